"""Time-domain routes to the transient scattering fields.

Two independent paths: direct implicit Newmark integration of the real
variable-coefficient layer system (the stretching is frequency
independent, so no auxiliary memory variables appear), and synthesis of
probe trajectories from a family of frequency solves along a vertical
contour in the right half-plane.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import FemBlocks, assemble, free_dofs, load_vector, \
    quadratic_form, solve_frequency
from .model import MediaParams, SourceSpec
from .xform import TruncationWarning


class ProbeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# point probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeSet:
    """Barycentric interpolation data for fixed sample points."""

    points: np.ndarray           # (n, 2)
    tri: np.ndarray              # containing triangle per point
    bary: np.ndarray             # (n, 3) barycentric weights

    @property
    def n(self) -> int:
        return self.points.shape[0]


def locate_probes(mesh, points) -> ProbeSet:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    tri_idx = np.empty(points.shape[0], dtype=np.int64)
    bary = np.empty((points.shape[0], 3))
    verts = mesh.vertices
    tris = mesh.triangles
    for k, pt in enumerate(points):
        found = False
        for t in range(tris.shape[0]):
            a, b, c = verts[tris[t]]
            m = np.array([[b[0] - a[0], c[0] - a[0]],
                          [b[1] - a[1], c[1] - a[1]]])
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if det == 0.0:
                continue
            r = pt - a
            l1 = (m[1, 1] * r[0] - m[0, 1] * r[1]) / det
            l2 = (-m[1, 0] * r[0] + m[0, 0] * r[1]) / det
            l0 = 1.0 - l1 - l2
            if min(l0, l1, l2) >= -1e-10:
                tri_idx[k] = t
                bary[k] = (l0, l1, l2)
                found = True
                break
        if not found:
            raise ProbeError(f"probe point {tuple(pt)} outside the mesh")
    return ProbeSet(points=points, tri=tri_idx, bary=bary)


def probe_values(mesh, probes: ProbeSet, nodal: np.ndarray) -> np.ndarray:
    """Interpolate a nodal field (last axis = vertices) at the probes."""
    tri_nodes = mesh.triangles[probes.tri]          # (n, 3)
    vals = np.take(nodal, tri_nodes, axis=-1)       # (..., n, 3)
    return np.einsum("...nk,nk->...n", vals, probes.bary)


# ---------------------------------------------------------------------------
# Newmark time integration
# ---------------------------------------------------------------------------

@dataclass
class TimeTrajectory:
    """Probe series and per-step diagnostics of one transient run."""

    t: np.ndarray
    probe_p: np.ndarray | None = None      # (n_probes, n_steps+1)
    probe_u: np.ndarray | None = None      # (n_probes_u, 2, n_steps+1)
    field_p: np.ndarray | None = None      # stored nodes x steps
    field_u: np.ndarray | None = None      # stored nodes x 2 x steps
    energy: np.ndarray | None = None
    norms: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)   # (t, p_nodal, u_nodal)
    meta: dict = field(default_factory=dict)


def time_matrices(blk: FemBlocks, media: MediaParams):
    """Real mass and stiffness of the second-order-in-time layer system.

    Fluid rows: (sigma/c^2) p'' + div-free stretched stiffness with the
    kinematic coupling -rho0 * n.u''; solid rows: rho_e u'' + elastic
    stiffness with the traction coupling +p n.
    """
    M = blk.M_all / media.c ** 2 + media.rho_e * blk.M_solid \
        - media.rho0 * blk.C_pu
    K = blk.K_all + media.lam * blk.K_div + media.mu * blk.K_eps \
        + blk.C_up
    return sp.csr_matrix(M), sp.csr_matrix(K)


def newmark_run(blk: FemBlocks, media: MediaParams,
                source: SourceSpec | None, T: float, n_steps: int,
                probes: ProbeSet | None = None,
                probes_u: ProbeSet | None = None,
                snapshot_times=(), record_norms: bool = False,
                record_energy: bool = False,
                initial_d: np.ndarray | None = None,
                source_cutoff: float | None = None,
                store_nodes: np.ndarray | None = None) -> TimeTrajectory:
    """Average-acceleration (1/4, 1/2) integration from rest.

    initial_d optionally seeds a nonzero displacement state (used by the
    conservation checks); source_cutoff zeroes the forcing past a given
    time; store_nodes keeps the full history of the listed vertex ids.
    """
    mesh = blk.mesh
    if mesh.pml is None:
        raise ValueError("transient runs need a mesh with the absorbing "
                         "layer (Dirichlet wall at its top)")
    if n_steps < 1 or T <= 0:
        raise ValueError("need T > 0 and n_steps >= 1")
    dt = T / n_steps
    beta_n, gamma_n = 0.25, 0.5

    M, K = time_matrices(blk, media)
    free = free_dofs(blk, "pml_layer")
    Mr = M[np.ix_(free, free)].tocsc()
    Kr = K[np.ix_(free, free)].tocsc()
    A_eff = (Mr + beta_n * dt * dt * Kr).tocsc()
    lu = spla.splu(A_eff)

    if source is not None:
        f_shape = load_vector(blk, source.spatial)[free] / media.c ** 2

        def forcing(t):
            if source_cutoff is not None and t > source_cutoff:
                return 0.0 * f_shape
            return source.pulse.derivative(t) * f_shape
    else:
        def forcing(t):
            return np.zeros(free.size)

    d = np.zeros(free.size)
    v = np.zeros(free.size)
    if initial_d is not None:
        d = np.asarray(initial_d, dtype=float)[free].copy()
    r0 = forcing(0.0) - Kr @ d
    if np.linalg.norm(r0) > 0:
        a = spla.splu(Mr.tocsc()).solve(r0)
    else:
        a = np.zeros(free.size)

    t_grid = np.linspace(0.0, T, n_steps + 1)
    traj = TimeTrajectory(t=t_grid, meta={"dt": dt, "n_steps": n_steps})
    if probes is not None:
        traj.probe_p = np.zeros((probes.n, n_steps + 1))
    if probes_u is not None:
        traj.probe_u = np.zeros((probes_u.n, 2, n_steps + 1))
    if store_nodes is not None:
        store_nodes = np.asarray(store_nodes, dtype=np.int64)
        traj.field_p = np.zeros((store_nodes.size, n_steps + 1))
        traj.field_u = np.zeros((store_nodes.size, 2, n_steps + 1))
    if record_energy:
        traj.energy = np.zeros(n_steps + 1)
    if record_norms:
        for key in ("dt_p", "grad_p", "dt_u", "div_u", "grad_u"):
            traj.norms[key] = np.zeros(n_steps + 1)
    snap_steps = {int(round(ts / dt)) for ts in snapshot_times}

    x_full = np.zeros(blk.dof.size)
    v_full = np.zeros(blk.dof.size)

    def record(step):
        x_full[free] = d
        v_full[free] = v
        if probes is not None or probes_u is not None or snap_steps \
                or record_norms or store_nodes is not None:
            p_nodal, u_nodal = _expand_fields(blk, x_full)
        if store_nodes is not None:
            traj.field_p[:, step] = p_nodal[store_nodes]
            traj.field_u[:, :, step] = u_nodal[store_nodes]
        if probes is not None:
            traj.probe_p[:, step] = probe_values(mesh, probes, p_nodal)
        if probes_u is not None:
            for comp in (0, 1):
                traj.probe_u[:, comp, step] = probe_values(
                    mesh, probes_u, u_nodal[:, comp])
        if step in snap_steps:
            traj.snapshots.append((t_grid[step], p_nodal.copy(),
                                   u_nodal.copy()))
        if record_energy:
            traj.energy[step] = 0.5 * float(v @ (Mr @ v)) \
                + 0.5 * float(d @ (Kr @ d))
        if record_norms:
            traj.norms["dt_p"][step] = _sqrt_form(blk.M_fluid, v_full)
            traj.norms["grad_p"][step] = _sqrt_form(blk.K_fluid, x_full)
            traj.norms["dt_u"][step] = _sqrt_form(blk.M_solid, v_full)
            traj.norms["div_u"][step] = _sqrt_form(blk.K_div, x_full)
            traj.norms["grad_u"][step] = _sqrt_form(blk.K_solid_h1, x_full)

    record(0)
    for step in range(1, n_steps + 1):
        d_star = d + dt * v + dt * dt * (0.5 - beta_n) * a
        v_star = v + dt * (1.0 - gamma_n) * a
        a = lu.solve(forcing(t_grid[step]) - Kr @ d_star)
        d = d_star + beta_n * dt * dt * a
        v = v_star + gamma_n * dt * a
        record(step)
    return traj


def _sqrt_form(A, x):
    return float(np.sqrt(max(quadratic_form(A, x).real, 0.0)))


def _expand_fields(blk: FemBlocks, x: np.ndarray):
    mesh = blk.mesh
    p = np.zeros(mesh.n_vertices, dtype=x.dtype)
    u = np.zeros((mesh.n_vertices, 2), dtype=x.dtype)
    p[blk.dof.p_nodes] = x[:blk.dof.n_p]
    if blk.dof.n_u:
        u[blk.dof.u_nodes, 0] = x[blk.dof.n_p::2]
        u[blk.dof.u_nodes, 1] = x[blk.dof.n_p + 1::2]
    return p[mesh.node_master], u[mesh.node_master]


def energy_trace(traj: TimeTrajectory, blk: FemBlocks,
                 media: MediaParams, source: SourceSpec) -> dict:
    """Max-over-time solution norms against the cumulative source norm
    ||dg/dt||_{L1(0,t; L2)}, with the layer-strength normalizations."""
    if not traj.norms:
        raise ValueError("trajectory was run without norm recording")
    chi = load_vector(blk, lambda x, z: source.spatial(x, z) ** 2)
    chi_l2 = float(np.sqrt(max(chi.sum(), 0.0)))
    dg = np.abs(source.pulse.derivative(traj.t)) * chi_l2
    dt = traj.t[1] - traj.t[0]
    cum = np.concatenate([[0.0],
                          np.cumsum(0.5 * (dg[1:] + dg[:-1])) * dt])
    cum = np.maximum(cum, 1e-300)
    fluid = (traj.norms["dt_p"] + traj.norms["grad_p"]) / cum
    solid = (traj.norms["dt_u"] + traj.norms["div_u"]
             + traj.norms["grad_u"]) / cum
    sigma0 = blk.mesh.pml.sigma0
    T = traj.t[-1]
    return {
        "fluid_ratio": float(fluid[1:].max()),
        "solid_ratio": float(solid[1:].max()),
        "fluid_ratio_pml": float(fluid[1:].max()) / (1.0 + sigma0 * T),
        "solid_ratio_pml": float(solid[1:].max())
        / np.sqrt(1.0 + sigma0 * T),
    }


def causality_margin(traj: TimeTrajectory, distance: float, c: float,
                     probe: int = 0) -> tuple[float, float]:
    """(pre-arrival max, global max) of one probe series for arrival
    time distance/c minus two steps."""
    dt = traj.meta["dt"]
    cutoff = distance / c - 2.0 * dt
    pre = traj.t < cutoff
    series = np.abs(traj.probe_p[probe])
    pre_max = float(series[pre].max()) if pre.any() else 0.0
    return pre_max, float(series.max())


# ---------------------------------------------------------------------------
# contour synthesis
# ---------------------------------------------------------------------------

@dataclass
class ContourConfig:
    """Vertical-line inversion parameters."""

    s1: float
    s2_max: float
    n_freq: int = 401           # symmetric count including s2 = 0 (odd)
    t_grid: np.ndarray | None = None

    def __post_init__(self):
        if self.s1 <= 0:
            raise ValueError("s1 must be positive")
        if self.n_freq % 2 != 1 or self.n_freq < 3:
            raise ValueError("n_freq must be odd and >= 3")

    def half_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.s2_max, (self.n_freq - 1) // 2 + 1)


def synthesize(values: np.ndarray, cfg: ContourConfig,
               t: np.ndarray) -> np.ndarray:
    """Inverse transform of conjugate-symmetric contour data.

    values holds the transform on the nonnegative half grid (last axis);
    the result is e^{s1 t}/pi * Re trapz(values * e^{i s2 t}).
    """
    s2 = cfg.half_grid()
    t = np.asarray(t, dtype=float)
    out = np.empty(values.shape[:-1] + t.shape)
    for k, tk in enumerate(t):
        phase = np.exp(1j * s2 * tk)
        out[..., k] = np.exp(cfg.s1 * tk) / np.pi \
            * np.real(np.trapezoid(values * phase, dx=s2[1] - s2[0],
                                   axis=-1))
    return out


def reconstruct_signal(transform, cfg: ContourConfig,
                       t: np.ndarray) -> np.ndarray:
    """Self-reconstruction of a scalar signal from its closed-form
    transform (the calibration oracle for the contour parameters)."""
    s2 = cfg.half_grid()
    vals = np.array([transform(cfg.s1 + 1j * w) for w in s2])
    return synthesize(vals, cfg, t)


def contour_synthesize(blk: FemBlocks, media: MediaParams,
                       source: SourceSpec, cfg: ContourConfig,
                       probes: ProbeSet, variant: str = "exact_dtn",
                       pml=None, jobs: int = 1,
                       check_tolerance: float = 1e-3) -> TimeTrajectory:
    """Probe pressure trajectories from per-frequency solves on the
    contour s = s1 + i s2, exploiting conjugate symmetry."""
    t = cfg.t_grid
    if t is None:
        t = np.linspace(0.0, source.T, 201)
    # calibration: the contour must reproduce the pulse itself
    recon = reconstruct_signal(source.pulse.laplace, cfg, t)
    err = float(np.max(np.abs(recon - source.pulse(t))))
    scale = float(np.max(np.abs(source.pulse(t))))
    if err > check_tolerance * max(scale, 1e-300):
        warnings.warn("contour too short/coarse: pulse self-"
                      f"reconstruction error {err:.2e}",
                      TruncationWarning, stacklevel=2)

    s2 = cfg.half_grid()

    def solve_one(w):
        s = cfg.s1 + 1j * w
        system = assemble(blk, media, s, source.spatial,
                          complex(source.pulse.laplace(s)), variant, pml)
        sol = solve_frequency(system)
        return probe_values(blk.mesh, probes, sol.p_hat)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(solve_one, s2))
    else:
        rows = [solve_one(w) for w in s2]
    vals = np.stack(rows, axis=-1)          # (n_probes, n_half)
    traj = TimeTrajectory(t=np.asarray(t, dtype=float),
                          probe_p=synthesize(vals, cfg, t),
                          meta={"variant": variant, "s1": cfg.s1,
                                "s2_max": cfg.s2_max,
                                "n_freq": cfg.n_freq,
                                "reconstruction_error": err})
    return traj
