"""First-order finite elements for the coupled fluid-solid strip problem.

One continuous P1 space for the pressure on the fluid (and layer)
region, two P1 components for the displacement on the inclusion.  The
assembly produces s-independent real blocks that the frequency-domain
forms combine with complex weights and the time integrator combines
with real ones.  The transparent-boundary term on x3 = h couples the
top-row pressure nodes through a truncated Fourier-mode multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import FLUID, MARKER_GAMMA_F, MARKER_GAMMA_HL, PML, SOLID, \
    StripMesh
from .model import MediaParams, PmlProfile, sigma_profile
from .symbols import dtn_symbol, pml_dtn_symbol

VARIANTS = ("exact_dtn", "pml_dtn", "pml_layer")

# edge-midpoint quadrature on the reference triangle (degree 2)
_PHI_MID = np.array([[0.5, 0.5, 0.0],
                     [0.0, 0.5, 0.5],
                     [0.5, 0.0, 0.5]])


class AssemblyError(ValueError):
    pass


class SingularSystemError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# degrees of freedom
# ---------------------------------------------------------------------------

@dataclass
class DofMap:
    """Global unknown numbering: pressure dofs first, then interleaved
    displacement components, all on periodic master nodes."""

    p_nodes: np.ndarray        # master node ids carrying a pressure dof
    u_nodes: np.ndarray        # master node ids carrying displacement dofs
    p_index: dict
    u_index: dict

    @property
    def n_p(self) -> int:
        return self.p_nodes.size

    @property
    def n_u(self) -> int:
        return self.u_nodes.size

    @property
    def size(self) -> int:
        return self.n_p + 2 * self.n_u

    def pdof(self, nodes) -> np.ndarray:
        return np.array([self.p_index[n] for n in np.atleast_1d(nodes)])

    def udof(self, nodes, comp) -> np.ndarray:
        return np.array([self.n_p + 2 * self.u_index[n] + comp
                         for n in np.atleast_1d(nodes)])


def build_dofmap(mesh: StripMesh) -> DofMap:
    p_nodes = mesh.masters(mesh.nodes_of_region(FLUID, PML))
    u_nodes = mesh.masters(mesh.nodes_of_region(SOLID)) \
        if np.any(mesh.tri_region == SOLID) else np.zeros(0, dtype=np.int64)
    return DofMap(
        p_nodes=p_nodes, u_nodes=u_nodes,
        p_index={int(n): i for i, n in enumerate(p_nodes)},
        u_index={int(n): i for i, n in enumerate(u_nodes)},
    )


# ---------------------------------------------------------------------------
# element geometry
# ---------------------------------------------------------------------------

def _tri_geometry(mesh: StripMesh, which: np.ndarray):
    """Areas, constant basis gradients and edge midpoints of a subset of
    triangles."""
    tris = mesh.triangles[which]
    c = mesh.vertices[tris]                     # (nt, 3, 2)
    d1 = c[:, 1] - c[:, 0]
    d2 = c[:, 2] - c[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates
    g = np.empty((tris.shape[0], 3, 2))
    g[:, 1, 0] = d2[:, 1] / det
    g[:, 1, 1] = -d2[:, 0] / det
    g[:, 2, 0] = -d1[:, 1] / det
    g[:, 2, 1] = d1[:, 0] / det
    g[:, 0] = -g[:, 1] - g[:, 2]
    mid = 0.5 * (c[:, [0, 1, 2]] + c[:, [1, 2, 0]])   # (nt, 3, 2)
    return tris, c, area, g, mid


def _scatter(dofr, dofc, vals, shape):
    return sp.coo_matrix(
        (vals.ravel(), (dofr.ravel(), dofc.ravel())), shape=shape).tocsr()


# ---------------------------------------------------------------------------
# assembled blocks
# ---------------------------------------------------------------------------

@dataclass
class FemBlocks:
    """All s-independent matrices of the strip problem on one mesh."""

    mesh: StripMesh
    dof: DofMap
    n_modes: int

    K_fluid: sp.csr_matrix = None        # grad-grad, fluid region only
    M_fluid: sp.csr_matrix = None        # mass, fluid region only
    K_all: sp.csr_matrix = None          # sigma-stretched grad-grad, fluid+pml
    M_all: sp.csr_matrix = None          # sigma-weighted mass, fluid+pml
    K_all_iso: sp.csr_matrix = None      # unweighted grad-grad, fluid+pml
    M_all_iso: sp.csr_matrix = None      # unweighted mass, fluid+pml
    K_div: sp.csr_matrix = None          # div-div, solid
    K_eps: sp.csr_matrix = None          # 2 eps:eps, solid
    M_solid: sp.csr_matrix = None        # vector mass, solid
    K_solid_h1: sp.csr_matrix = None     # componentwise grad-grad, solid
    C_pu: sp.csr_matrix = None           # rows: pressure tests, cols: u dofs
    C_up: sp.csr_matrix = None           # rows: u tests, cols: pressure dofs
    # modal analysis operator on the x3=h node row
    gamma_h_dofs: np.ndarray = None
    modal_E: np.ndarray = None           # (2N+1, n_h) analysis matrix
    modal_xi: np.ndarray = None
    dirichlet_f: np.ndarray = None       # pressure dofs on the bottom surface
    dirichlet_hl: np.ndarray = None      # pressure dofs on the layer top
    above_h_pdofs: np.ndarray = None     # pressure dofs strictly above x3=h
    meta: dict = field(default_factory=dict)


def _assemble_scalar(mesh, dof, which, weight_k=None, weight_m=None,
                     anisotropic=False, pml=None, h=None):
    """Stiffness and mass over a triangle subset, optionally weighted by
    the layer profile (midpoint quadrature)."""
    tris, c, area, g, mid = _tri_geometry(mesh, which)
    nt = tris.shape[0]
    ndof = dof.size
    masters = mesh.node_master[tris]
    dofs = np.vectorize(dof.p_index.__getitem__)(masters)

    if pml is not None:
        sig = sigma_profile(mid[:, :, 1], pml, h)       # (nt, 3)
        int_sig = area * sig.mean(axis=1)
        int_inv = area * (1.0 / sig).mean(axis=1)
    else:
        sig = np.ones((nt, 3))
        int_sig = area
        int_inv = area

    if anisotropic:
        K = int_sig[:, None, None] * np.einsum("tia,tja->tij",
                                               g[:, :, :1], g[:, :, :1]) \
            + int_inv[:, None, None] * np.einsum("tia,tja->tij",
                                                 g[:, :, 1:], g[:, :, 1:])
    else:
        K = area[:, None, None] * np.einsum("tia,tja->tij", g, g)

    Mel = np.einsum("tq,qi,qj->tij", (area / 3.0)[:, None] * sig,
                    _PHI_MID, _PHI_MID)

    rows = np.repeat(dofs, 3, axis=1)
    cols = np.tile(dofs, (1, 3))
    Km = _scatter(rows, cols, K.reshape(nt, 9), (ndof, ndof))
    Mm = _scatter(rows, cols, Mel.reshape(nt, 9), (ndof, ndof))
    return Km, Mm


def _assemble_solid(mesh, dof):
    which = np.flatnonzero(mesh.tri_region == SOLID)
    ndof = dof.size
    if which.size == 0:
        z = sp.csr_matrix((ndof, ndof))
        return z, z, z, z
    tris, c, area, g, mid = _tri_geometry(mesh, which)
    nt = tris.shape[0]
    masters = mesh.node_master[tris]
    nd = np.vectorize(dof.u_index.__getitem__)(masters)
    # interleaved (node, comp) dofs
    dcomp = np.empty((nt, 6), dtype=np.int64)
    dcomp[:, 0::2] = dof.n_p + 2 * nd
    dcomp[:, 1::2] = dof.n_p + 2 * nd + 1

    # div-div: A * g_i[a] * g_j[b]
    ga = g.reshape(nt, 6)                        # (i,a) flattened
    Kdiv = area[:, None, None] * np.einsum("ti,tj->tij", ga, ga)
    # 2 eps:eps: A * (delta_ab g_i.g_j + g_i[b] g_j[a])
    gdot = np.einsum("tia,tja->tij", g, g)
    Keps = np.zeros((nt, 6, 6))
    for i in range(3):
        for a in range(2):
            for j in range(3):
                for b in range(2):
                    Keps[:, 2 * i + a, 2 * j + b] = \
                        (gdot[:, i, j] if a == b else 0.0) \
                        + g[:, i, b] * g[:, j, a]
    Keps *= area[:, None, None]
    # vector mass and componentwise H1 stiffness
    Mel = np.einsum("t,qi,qj->tij", area / 3.0, _PHI_MID, _PHI_MID)
    Mvec = np.zeros((nt, 6, 6))
    Kh1 = np.zeros((nt, 6, 6))
    Ks = area[:, None, None] * gdot
    for a in range(2):
        Mvec[:, a::2, a::2] = Mel
        Kh1[:, a::2, a::2] = Ks

    rows = np.repeat(dcomp, 6, axis=1)
    cols = np.tile(dcomp, (1, 6))
    shape = (ndof, ndof)
    return (_scatter(rows, cols, Kdiv.reshape(nt, 36), shape),
            _scatter(rows, cols, Keps.reshape(nt, 36), shape),
            _scatter(rows, cols, Mvec.reshape(nt, 36), shape),
            _scatter(rows, cols, Kh1.reshape(nt, 36), shape))


def _assemble_coupling(mesh, dof):
    """Interface blocks: C_pu[q_i, u_(j,k)] = int_Gamma n_k phi_j phi_i
    and its transpose-structured partner C_up."""
    from .mesh import MARKER_GAMMA
    edges = mesh.boundary_edges[MARKER_GAMMA]
    ndof = dof.size
    if edges.size == 0:
        z = sp.csr_matrix((ndof, ndof))
        return z, z
    rows_pu, cols_pu, vals_pu = [], [], []
    for (a, b), n in zip(edges, mesh.gamma_normals):
        va, vb = mesh.vertices[a], mesh.vertices[b]
        ell = float(np.hypot(*(vb - va)))
        ma, mb = mesh.node_master[a], mesh.node_master[b]
        pd = [dof.p_index[int(ma)], dof.p_index[int(mb)]]
        for k in range(2):
            if n[k] == 0.0:
                continue
            ud = [dof.n_p + 2 * dof.u_index[int(ma)] + k,
                  dof.n_p + 2 * dof.u_index[int(mb)] + k]
            for i in range(2):
                for j in range(2):
                    w = n[k] * ell / 6.0 * (2.0 if i == j else 1.0)
                    rows_pu.append(pd[i])
                    cols_pu.append(ud[j])
                    vals_pu.append(w)
    C_pu = sp.coo_matrix((vals_pu, (rows_pu, cols_pu)),
                         shape=(ndof, ndof)).tocsr()
    return C_pu, C_pu.T.tocsr()


def _modal_operator(mesh, dof, n_modes):
    """Quadrature analysis matrix mapping top-row nodal values to the
    2N+1 lowest Fourier coefficients on x3 = h."""
    nodes = mesh.gamma_h_nodes
    x = mesh.vertices[nodes, 0]
    period = mesh.geometry.period
    nh = nodes.size
    N = min(n_modes, (nh - 1) // 2)
    xp = np.concatenate([[x[-1] - period], x, [x[0] + period]])
    w = 0.5 * (xp[2:] - xp[:-2])
    n = np.arange(-N, N + 1)
    xi = 2.0 * np.pi * n / period
    E = (w / period) * np.exp(-1j * np.outer(xi, x))
    dofs = dof.pdof(mesh.node_master[nodes])
    return dofs, E, xi


def build_blocks(mesh: StripMesh, n_modes: int = 64) -> FemBlocks:
    dof = build_dofmap(mesh)
    blk = FemBlocks(mesh=mesh, dof=dof, n_modes=n_modes)

    fluid = np.flatnonzero(mesh.tri_region == FLUID)
    both = np.flatnonzero(np.isin(mesh.tri_region, (FLUID, PML)))
    blk.K_fluid, blk.M_fluid = _assemble_scalar(mesh, dof, fluid)
    blk.K_all_iso, blk.M_all_iso = _assemble_scalar(mesh, dof, both)
    if mesh.pml is not None:
        blk.K_all, blk.M_all = _assemble_scalar(
            mesh, dof, both, anisotropic=True, pml=mesh.pml,
            h=mesh.geometry.h)
    else:
        blk.K_all, blk.M_all = blk.K_all_iso, blk.M_all_iso
    blk.K_div, blk.K_eps, blk.M_solid, blk.K_solid_h1 = \
        _assemble_solid(mesh, dof)
    blk.C_pu, blk.C_up = _assemble_coupling(mesh, dof)
    blk.gamma_h_dofs, blk.modal_E, blk.modal_xi = \
        _modal_operator(mesh, dof, n_modes)

    gf = mesh.masters(np.unique(mesh.boundary_edges[MARKER_GAMMA_F]))
    blk.dirichlet_f = dof.pdof(gf)
    if MARKER_GAMMA_HL in mesh.boundary_edges:
        ghl = mesh.masters(np.unique(mesh.boundary_edges[MARKER_GAMMA_HL]))
        blk.dirichlet_hl = dof.pdof(ghl)
    else:
        blk.dirichlet_hl = np.zeros(0, dtype=np.int64)
    h = mesh.geometry.h
    above = dof.p_nodes[mesh.vertices[dof.p_nodes, 1] > h + 1e-12]
    blk.above_h_pdofs = dof.pdof(above) if above.size else \
        np.zeros(0, dtype=np.int64)
    return blk


# ---------------------------------------------------------------------------
# frequency-domain system
# ---------------------------------------------------------------------------

@dataclass
class FrequencySystem:
    matrix: sp.csc_matrix           # reduced to free dofs
    rhs: np.ndarray
    free: np.ndarray                # free dof indices in the global space
    blocks: FemBlocks
    media: MediaParams
    s: complex
    variant: str


@dataclass
class FrequencySolution:
    p_hat: np.ndarray               # per mesh vertex (complex)
    u_hat: np.ndarray               # (n_vertices, 2) complex
    x: np.ndarray                   # global dof vector
    system: FrequencySystem
    residual: float = 0.0

    @property
    def s(self) -> complex:
        return self.system.s


def dtn_block(blk: FemBlocks, media: MediaParams, s: complex,
              variant: str, pml: PmlProfile | None = None) -> np.ndarray:
    """Dense Gamma_h block representing int_{Gamma_h} B[p] conj(q):
    period * E^H diag(symbol) E via the trace Parseval identity."""
    if variant == "exact_dtn":
        sym = np.array([dtn_symbol(x, s, media.c) for x in blk.modal_xi])
    elif variant == "pml_dtn":
        profile = pml if pml is not None else blk.mesh.pml
        if profile is None:
            raise AssemblyError("pml_dtn variant needs a layer profile")
        Lt = profile.L_tilde
        sym = np.array([pml_dtn_symbol(x, s, media.c, Lt)
                        for x in blk.modal_xi])
    else:
        raise AssemblyError("no boundary operator for variant "
                            f"{variant!r}")
    E = blk.modal_E
    return blk.mesh.geometry.period * (E.conj().T * sym) @ E


def free_dofs(blk: FemBlocks, variant: str) -> np.ndarray:
    """Active unknowns for the chosen formulation."""
    keep = np.ones(blk.dof.size, dtype=bool)
    keep[blk.dirichlet_f] = False
    if variant == "pml_layer":
        if blk.mesh.pml is None:
            raise AssemblyError("pml_layer variant needs a mesh with an "
                                "absorbing layer")
        keep[blk.dirichlet_hl] = False
    else:
        keep[blk.above_h_pdofs] = False
    return np.flatnonzero(keep)


def frequency_matrix(blk: FemBlocks, media: MediaParams,
                     s: complex, variant: str,
                     pml: PmlProfile | None = None) -> sp.csr_matrix:
    """Global (unreduced) matrix of the chosen sesquilinear form, with
    rows = test dofs and columns = trial dofs."""
    if variant not in VARIANTS:
        raise AssemblyError(f"unknown variant {variant!r}")
    rho0, rho_e, c = media.rho0, media.rho_e, media.c
    if variant == "pml_layer":
        Kf, Mf = blk.K_all, blk.M_all
    else:
        Kf, Mf = blk.K_fluid, blk.M_fluid
    A = (1.0 / s) * Kf + (s / c ** 2) * Mf
    A = A + rho0 * np.conj(s) * (media.lam * blk.K_div + media.mu * blk.K_eps)
    A = A + rho0 * rho_e * (abs(s) ** 2 * s) * blk.M_solid
    A = A - rho0 * s * blk.C_pu + rho0 * np.conj(s) * blk.C_up
    A = sp.csr_matrix(A, dtype=complex)
    if variant in ("exact_dtn", "pml_dtn"):
        B = dtn_block(blk, media, s, variant, pml)
        gh = blk.gamma_h_dofs
        A = A.tolil()
        A[np.ix_(gh, gh)] = A[np.ix_(gh, gh)].toarray() - B / s
        A = A.tocsr()
    return A


def load_vector(blk: FemBlocks, spatial, variant: str = "exact_dtn"):
    """Nodal load int_{Omega_h} chi(x) phi_i dx (fluid region only; the
    source is supported below x3 = h)."""
    mesh, dof = blk.mesh, blk.dof
    which = np.flatnonzero(mesh.tri_region == FLUID)
    tris, c, area, g, mid = _tri_geometry(mesh, which)
    chi = spatial(mid[:, :, 0], mid[:, :, 1])           # (nt, 3)
    vals = np.einsum("tq,qi->ti", (area / 3.0)[:, None] * chi, _PHI_MID)
    masters = mesh.node_master[tris]
    dofs = np.vectorize(dof.p_index.__getitem__)(masters)
    vec = np.zeros(dof.size)
    np.add.at(vec, dofs.ravel(), vals.ravel())
    return vec


def assemble(blk: FemBlocks, media: MediaParams, s: complex,
             g_hat_spatial, g_hat_scale: complex, variant: str,
             pml: PmlProfile | None = None) -> FrequencySystem:
    """Assemble the reduced linear system for one Laplace frequency.

    The transformed source is g_hat(x, s) = g_hat_scale * chi(x); the
    right-hand side of the variational problem is int g_hat / c^2 * q.
    """
    A = frequency_matrix(blk, media, s, variant, pml)
    b = np.zeros(blk.dof.size, dtype=complex)
    if g_hat_spatial is not None:
        b = (g_hat_scale / media.c ** 2) \
            * load_vector(blk, g_hat_spatial).astype(complex)
    free = free_dofs(blk, variant)
    return FrequencySystem(matrix=A[np.ix_(free, free)].tocsc(),
                           rhs=b[free], free=free, blocks=blk,
                           media=media, s=s, variant=variant)


def solve_frequency(system: FrequencySystem,
                    rhs: np.ndarray | None = None) -> FrequencySolution:
    """Sparse direct solve with a residual check and one step of
    iterative refinement if needed."""
    b = system.rhs if rhs is None else rhs
    try:
        lu = spla.splu(system.matrix)
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    x = lu.solve(b)
    norm_b = np.linalg.norm(b)
    if norm_b > 0:
        r = b - system.matrix @ x
        if np.linalg.norm(r) > 1e-10 * norm_b:
            x = x + lu.solve(r)
            r = b - system.matrix @ x
            if np.linalg.norm(r) > 1e-8 * norm_b:
                raise SingularSystemError(
                    f"relative residual {np.linalg.norm(r)/norm_b:.2e}")
        res = float(np.linalg.norm(b - system.matrix @ x) / norm_b)
    else:
        res = 0.0
    return _expand_solution(system, x, res)


def _expand_solution(system: FrequencySystem, x_free, res):
    blk = system.blocks
    x = np.zeros(blk.dof.size, dtype=complex)
    x[system.free] = x_free
    mesh = blk.mesh
    p_hat = np.zeros(mesh.n_vertices, dtype=complex)
    u_hat = np.zeros((mesh.n_vertices, 2), dtype=complex)
    for node in blk.dof.p_nodes:
        p_hat[node] = x[blk.dof.p_index[int(node)]]
    for node in blk.dof.u_nodes:
        iu = blk.dof.u_index[int(node)]
        u_hat[node, 0] = x[blk.dof.n_p + 2 * iu]
        u_hat[node, 1] = x[blk.dof.n_p + 2 * iu + 1]
    # propagate to periodic slave nodes
    p_hat = p_hat[mesh.node_master]
    u_hat = u_hat[mesh.node_master]
    return FrequencySolution(p_hat=p_hat, u_hat=u_hat, x=x, system=system,
                             residual=res)


# ---------------------------------------------------------------------------
# norms and probes
# ---------------------------------------------------------------------------

def nodal_to_dofs(blk: FemBlocks, p_nodal: np.ndarray,
                  u_nodal: np.ndarray | None = None) -> np.ndarray:
    """Pack per-vertex fields into a global dof vector."""
    x = np.zeros(blk.dof.size, dtype=complex)
    x[:blk.dof.n_p] = np.asarray(p_nodal)[blk.dof.p_nodes]
    if u_nodal is not None and blk.dof.n_u:
        u = np.asarray(u_nodal)
        x[blk.dof.n_p::2] = u[blk.dof.u_nodes, 0]
        x[blk.dof.n_p + 1::2] = u[blk.dof.u_nodes, 1]
    return x


def h_norm_sq(blk: FemBlocks, x: np.ndarray, layer: bool = False) -> float:
    """Squared norm of the product space: fluid H1 plus solid
    (L2 + componentwise H1), evaluated on a global dof vector."""
    Kf = blk.K_all_iso if layer else blk.K_fluid
    Mf = blk.M_all_iso if layer else blk.M_fluid
    G = Kf + Mf + blk.M_solid + blk.K_solid_h1
    return float(np.real(np.vdot(x, G @ x)))


def quadratic_form(A: sp.spmatrix, x: np.ndarray) -> complex:
    return complex(np.vdot(x, A @ x))


def coercivity_probe(blk: FemBlocks, media: MediaParams, s: complex,
                     omega: np.ndarray, variant: str = "exact_dtn",
                     pml: PmlProfile | None = None, matrix=None):
    """Return (Re a(omega, omega), ||omega||_H^2) for a global dof
    vector omega supported on the free dofs.

    Pass a precomputed form matrix to amortize assembly over many
    probes.
    """
    A = matrix if matrix is not None \
        else frequency_matrix(blk, media, s, variant, pml)
    free = free_dofs(blk, variant)
    mask = np.zeros(blk.dof.size, dtype=bool)
    mask[free] = True
    w = np.where(mask, omega, 0.0)
    re_a = float(np.real(quadratic_form(A, w)))
    return re_a, h_norm_sq(blk, w, layer=(variant == "pml_layer"))


def stability_ratios(sol: FrequencySolution, g_norm: float) -> dict:
    """Solution norms against the right-hand sides of the frequency
    stability estimates."""
    sys_ = sol.system
    blk, media, s = sys_.blocks, sys_.media, sys_.s
    s1 = s.real
    layer = sys_.variant == "pml_layer"
    x = sol.x
    Kf = blk.K_all_iso if layer else blk.K_fluid
    Mf = blk.M_all_iso if layer else blk.M_fluid
    grad_p = np.sqrt(max(np.real(quadratic_form(Kf, x)), 0.0))
    s_p = abs(s) * np.sqrt(max(np.real(quadratic_form(Mf, x)), 0.0))
    grad_u = np.sqrt(max(np.real(quadratic_form(blk.K_solid_h1, x)), 0.0))
    div_u = np.sqrt(max(np.real(quadratic_form(blk.K_div, x)), 0.0))
    s_u = abs(s) * np.sqrt(max(np.real(quadratic_form(blk.M_solid, x)), 0.0))
    if g_norm == 0.0:
        zero = grad_p + s_p + grad_u + div_u + s_u
        return {"fluid_ratio": 0.0 if zero == 0 else np.inf,
                "solid_ratio": 0.0 if zero == 0 else np.inf,
                "fluid_lhs": grad_p + s_p,
                "solid_lhs": grad_u + div_u + s_u}
    if sys_.variant in ("exact_dtn", "pml_dtn"):
        env_f = abs(s) / s1 * g_norm
        env_s = g_norm / (s1 * min(1.0, s1))
    else:
        pml = blk.mesh.pml
        factor = 1.0 + pml.sigma0 / s1
        env_f = factor * abs(s) / s1 * g_norm
        env_s = np.sqrt(factor) / (s1 * min(1.0, s1)) * g_norm
    return {"fluid_ratio": (grad_p + s_p) / env_f,
            "solid_ratio": (grad_u + div_u + s_u) / env_s,
            "fluid_lhs": grad_p + s_p,
            "solid_lhs": grad_u + div_u + s_u}


# ---------------------------------------------------------------------------
# manufactured solutions
# ---------------------------------------------------------------------------

def manufactured_residual(blk: FemBlocks, media: MediaParams, s: complex,
                          p_expr, u_expr=None):
    """Turn closed-form fields into consistent data for the strip
    problem.

    p_expr is a sympy expression in (x1, x3) vanishing on the bottom
    surface with zero value and zero x3-slope on x3 = h; u_expr is an
    optional pair of sympy expressions on the inclusion.  Returns
    (rhs_vector, p_exact_nodal, u_exact_nodal).
    """
    import sympy as sym

    x1, x3 = sym.symbols("x1 x3", real=True)
    c, rho0, rho_e = media.c, media.rho0, media.rho_e

    trace = sym.simplify(p_expr.subs(x3, blk.mesh.geometry.h))
    if trace != 0:
        raise AssemblyError("manufactured pressure must vanish on x3 = h")

    F_f = -sym.diff(p_expr, x1, 2) / s - sym.diff(p_expr, x3, 2) / s \
        + s / c ** 2 * p_expr
    f_fluid = sym.lambdify((x1, x3), F_f, "numpy")

    rhs = np.zeros(blk.dof.size, dtype=complex)
    mesh, dof = blk.mesh, blk.dof
    which = np.flatnonzero(mesh.tri_region == FLUID)
    tris, cc, area, g, mid = _tri_geometry(mesh, which)
    fv = np.asarray(f_fluid(mid[:, :, 0], mid[:, :, 1]), dtype=complex)
    fv = np.broadcast_to(fv, mid[:, :, 0].shape)
    vals = np.einsum("tq,qi->ti", (area / 3.0)[:, None] * fv, _PHI_MID)
    masters = mesh.node_master[tris]
    dofs = np.vectorize(dof.p_index.__getitem__)(masters)
    np.add.at(rhs, dofs.ravel(), vals.ravel())

    grad_p = [sym.lambdify((x1, x3), sym.diff(p_expr, v), "numpy")
              for v in (x1, x3)]
    p_num = sym.lambdify((x1, x3), p_expr, "numpy")

    u_num = None
    if u_expr is not None:
        lam, mu = media.lam, media.mu
        u1e, u2e = u_expr
        div_u = sym.diff(u1e, x1) + sym.diff(u2e, x3)
        # Lame operator: div sigma(u)
        sig11 = lam * div_u + 2 * mu * sym.diff(u1e, x1)
        sig22 = lam * div_u + 2 * mu * sym.diff(u2e, x3)
        sig12 = mu * (sym.diff(u1e, x3) + sym.diff(u2e, x1))
        lame1 = sym.diff(sig11, x1) + sym.diff(sig12, x3)
        lame2 = sym.diff(sig12, x1) + sym.diff(sig22, x3)
        # solid volume residual of the rho0*conj(s)-scaled weak form
        Fs1 = rho0 * np.conj(s) * (-lame1 + rho_e * s ** 2 * u1e)
        Fs2 = rho0 * np.conj(s) * (-lame2 + rho_e * s ** 2 * u2e)
        fs = [sym.lambdify((x1, x3), e, "numpy") for e in (Fs1, Fs2)]

        which_s = np.flatnonzero(mesh.tri_region == SOLID)
        tris_s, cs, area_s, gs, mid_s = _tri_geometry(mesh, which_s)
        masters_s = mesh.node_master[tris_s]
        nd = np.vectorize(dof.u_index.__getitem__)(masters_s)
        for comp in (0, 1):
            fvs = np.asarray(fs[comp](mid_s[:, :, 0], mid_s[:, :, 1]),
                             dtype=complex)
            fvs = np.broadcast_to(fvs, mid_s[:, :, 0].shape)
            vals_s = np.einsum("tq,qi->ti",
                               (area_s / 3.0)[:, None] * fvs, _PHI_MID)
            dofs_s = dof.n_p + 2 * nd + comp
            np.add.at(rhs, dofs_s.ravel(), vals_s.ravel())

        sig_num = [sym.lambdify((x1, x3), e, "numpy")
                   for e in (sig11, sig12, sig22)]
        u_num = [sym.lambdify((x1, x3), e, "numpy") for e in (u1e, u2e)]

        # interface corrections: the weak form imposed
        #   dn p = -rho0 s^2 n.u   and   sigma(u) n = -p n
        # exactly; add the manufactured imbalances as extra data.
        from .mesh import MARKER_GAMMA
        for (na, nb), n in zip(mesh.boundary_edges[MARKER_GAMMA],
                               mesh.gamma_normals):
            va, vb = mesh.vertices[na], mesh.vertices[nb]
            ell = float(np.hypot(*(vb - va)))
            # 2-point Gauss on the edge
            for t, wq in ((0.5 - 0.5 / np.sqrt(3.0), 0.5 * ell),
                          (0.5 + 0.5 / np.sqrt(3.0), 0.5 * ell)):
                xq = (1 - t) * va + t * vb
                shp = np.array([1 - t, t])
                dn_p = n[0] * grad_p[0](*xq) + n[1] * grad_p[1](*xq)
                nu = n[0] * u_num[0](*xq) + n[1] * u_num[1](*xq)
                r1 = dn_p + rho0 * s ** 2 * nu
                pd = [dof.p_index[int(mesh.node_master[na])],
                      dof.p_index[int(mesh.node_master[nb])]]
                for i in (0, 1):
                    rhs[pd[i]] -= (1.0 / s) * r1 * shp[i] * wq
                s11, s12, s22 = (f(*xq) for f in sig_num)
                trac = np.array([s11 * n[0] + s12 * n[1],
                                 s12 * n[0] + s22 * n[1]])
                r2 = trac + p_num(*xq) * np.array(n)
                for comp in (0, 1):
                    ud = [dof.n_p + 2 * dof.u_index[int(mesh.node_master[na])]
                          + comp,
                          dof.n_p + 2 * dof.u_index[int(mesh.node_master[nb])]
                          + comp]
                    for i in (0, 1):
                        rhs[ud[i]] += rho0 * np.conj(s) * r2[comp] \
                            * shp[i] * wq

    # exact nodal fields for error measurement
    p_exact = np.asarray(p_num(mesh.vertices[:, 0], mesh.vertices[:, 1]),
                         dtype=complex)
    p_exact = np.broadcast_to(p_exact, (mesh.n_vertices,)).copy()
    gf = np.unique(mesh.boundary_edges[MARKER_GAMMA_F])
    scale = max(1.0, float(np.max(np.abs(p_exact))))
    if np.max(np.abs(p_exact[gf])) > 1e-9 * scale:
        raise AssemblyError("manufactured pressure must vanish on the "
                            "bottom surface")
    u_exact = np.zeros((mesh.n_vertices, 2), dtype=complex)
    if u_num is not None:
        for comp in (0, 1):
            u_exact[:, comp] = u_num[comp](mesh.vertices[:, 0],
                                           mesh.vertices[:, 1])
    return rhs, p_exact, u_exact


def fluid_error_norms(blk: FemBlocks, p_num: np.ndarray,
                      p_ref: np.ndarray) -> tuple[float, float]:
    """(L2, H1) norms of a nodal pressure difference over the fluid
    region below x3 = h."""
    dof = blk.dof
    e = np.zeros(dof.size, dtype=complex)
    diff = p_num - p_ref
    for node in dof.p_nodes:
        e[dof.p_index[int(node)]] = diff[node]
    l2 = np.sqrt(max(np.real(quadratic_form(blk.M_fluid, e)), 0.0))
    h1 = np.sqrt(max(np.real(
        quadratic_form(blk.M_fluid + blk.K_fluid, e)), 0.0))
    return float(l2), float(h1)
