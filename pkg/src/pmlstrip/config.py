"""Configuration files for the command line harness.

Plain INI files parsed with configparser.  Sections mirror the
documented key groups: [media], [geom], [pml], [source], plus harness
controls in [numerics], [sweep], [audit], [layer] and [probes].  See
the README for the full schema.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .model import Geometry, MediaParams, PmlProfile, Pulse, Rectangle, \
    SourceSpec, SurfaceProfile, check_source, validate_media


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


DEFAULTS = {
    "media": {"c": "1.0", "rho0": "1.0", "rho_e": "1.0",
              "lambda": "1.0", "mu": "1.0"},
    "geom": {"period": "1.0", "h": "0.5", "surface": "flat",
             "obstacle": ""},
    "pml": {"sigma0": "2.0", "m": "1", "L": "1.0"},
    "source": {"center": "0.5,0.25", "radius": "0.08", "T": "2.0",
               "a": "4.0", "omega0": "8.0"},
    "numerics": {"mesh_size": "0.05", "s1": "", "s2_max": "",
                 "n_freq": "401", "n_steps": "400", "n_modes": "64",
                 "route": "freq", "variant": "exact_dtn", "seed": "0"},
    "freq": {"s2_values": "0,5,10"},
    "td": {"snapshot_times": ""},
    "sweep": {"L_values": "0.25,0.5,1.0", "sigma0_values": "",
              "L_ref": "3.0"},
    "audit": {"s1_values": "1.0,0.1", "s2_range": "-50,50,201",
              "xi_points": "401", "sigma0_values": "1,2,4",
              "L_values": "0.5,1,2", "m": "1"},
    "layer": {"xi_values": "0.0,6.283185307179586", "s": "1.0,0.0",
              "n_values": "32,64,128,256"},
    "probes": {"points": "0.25,0.3; 0.5,0.35; 0.75,0.3"},
    "parseval": {"s1": "1.0", "s2_max": "400.0", "n_freq": "8001",
                 "horizon": "40.0", "n_time": "16000"},
}


@dataclass
class RunConfig:
    """Everything a subcommand needs, parsed and validated."""

    media: MediaParams
    geometry: Geometry
    pml: PmlProfile
    source: SourceSpec
    numerics: dict
    sweep: dict
    audit: dict
    layer: dict
    probes: np.ndarray
    parseval: dict
    digest: str = ""
    raw: dict = field(default_factory=dict)


def _floats(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",")
                if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers: {text!r}") \
            from exc


def _points(text: str) -> np.ndarray:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        xy = _floats(chunk)
        if len(xy) != 2:
            raise ConfigError(f"point needs two coordinates: {chunk!r}")
        pts.append(xy)
    return np.array(pts, dtype=float).reshape(-1, 2)


def _surface(spec: str, period: float) -> SurfaceProfile:
    spec = spec.strip()
    if spec == "flat":
        return SurfaceProfile.flat(0.0)
    if spec.startswith("flat:"):
        return SurfaceProfile.flat(float(spec.split(":", 1)[1]))
    if spec.startswith("cosine:"):
        vals = _floats(spec.split(":", 1)[1])
        if len(vals) != 2:
            raise ConfigError("cosine surface needs amplitude,frequency")
        return SurfaceProfile.cosine(vals[0], vals[1], period)
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1].strip()
        try:
            data = np.loadtxt(path)
        except OSError as exc:
            raise ConfigError(f"cannot read surface file {path!r}") from exc
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError("surface file must have two columns x1, f")
        return SurfaceProfile.from_samples(data[:, 0], data[:, 1], period)
    raise ConfigError(f"unknown surface spec {spec!r}")


def _obstacle(text: str):
    """Parse a polygon vertex list; only axis-aligned rectangles are
    supported (four vertices)."""
    pts = _points(text)
    if pts.size == 0:
        return None
    if pts.shape[0] != 4:
        raise ConfigError("obstacle polygon must have exactly 4 vertices "
                          "(axis-aligned rectangle)")
    x1s, x3s = sorted(set(pts[:, 0])), sorted(set(pts[:, 1]))
    if len(x1s) != 2 or len(x3s) != 2:
        raise ConfigError("obstacle polygon must be an axis-aligned "
                          "rectangle")
    corners = {(a, b) for a in x1s for b in x3s}
    if {(p[0], p[1]) for p in pts} != corners:
        raise ConfigError("obstacle polygon must be an axis-aligned "
                          "rectangle")
    return Rectangle(x1s[0], x1s[1], x3s[0], x3s[1])


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.read_dict(DEFAULTS)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}") from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    try:
        media = MediaParams(
            c=cp.getfloat("media", "c"),
            rho0=cp.getfloat("media", "rho0"),
            rho_e=cp.getfloat("media", "rho_e"),
            lam=cp.getfloat("media", "lambda"),
            mu=cp.getfloat("media", "mu"))
        bad = validate_media(media)
        if bad:
            raise ConfigError("inadmissible media: " + ", ".join(bad))

        period = cp.getfloat("geom", "period")
        geometry = Geometry(
            period=period,
            surface=_surface(cp.get("geom", "surface"), period),
            h=cp.getfloat("geom", "h"),
            obstacle=_obstacle(cp.get("geom", "obstacle")))

        T = cp.getfloat("source", "T")
        s1_default = 1.0 / T
        s1_text = cp.get("numerics", "s1").strip()
        s1 = float(s1_text) if s1_text else s1_default
        pml = PmlProfile(sigma0=cp.getfloat("pml", "sigma0"),
                         m=cp.getint("pml", "m"),
                         L=cp.getfloat("pml", "L"), s1=s1)

        center = _floats(cp.get("source", "center"))
        if len(center) != 2:
            raise ConfigError("source.center needs two coordinates")
        source = SourceSpec(center=(center[0], center[1]),
                            radius=cp.getfloat("source", "radius"), T=T,
                            pulse=Pulse(a=cp.getfloat("source", "a"),
                                        omega0=cp.getfloat("source",
                                                           "omega0")))
        check_source(source, geometry)

        s2_text = cp.get("numerics", "s2_max").strip()
        numerics = {
            "mesh_size": cp.getfloat("numerics", "mesh_size"),
            "s1": s1,
            "s2_max": float(s2_text) if s2_text else 40.0 / T,
            "n_freq": cp.getint("numerics", "n_freq"),
            "n_steps": cp.getint("numerics", "n_steps"),
            "n_modes": cp.getint("numerics", "n_modes"),
            "route": cp.get("numerics", "route").strip(),
            "variant": cp.get("numerics", "variant").strip(),
            "seed": cp.getint("numerics", "seed"),
            "freq_s2_values": _floats(cp.get("freq", "s2_values")),
            "snapshot_times": _floats(cp.get("td", "snapshot_times")),
        }
        if numerics["route"] not in ("freq", "time"):
            raise ConfigError("numerics.route must be freq or time")
        if numerics["variant"] not in ("exact_dtn", "pml_dtn",
                                       "pml_layer"):
            raise ConfigError("numerics.variant must be exact_dtn, "
                              "pml_dtn or pml_layer")

        sweep = {
            "L_values": _floats(cp.get("sweep", "L_values")),
            "sigma0_values": _floats(cp.get("sweep", "sigma0_values")),
            "L_ref": cp.getfloat("sweep", "L_ref"),
        }
        for key in ("L_values", "sigma0_values"):
            vals = sweep[key]
            if vals and not np.all(np.diff(vals) > 0):
                raise ConfigError(f"sweep.{key} must be strictly "
                                  "increasing")

        rng = _floats(cp.get("audit", "s2_range"))
        if len(rng) != 3:
            raise ConfigError("audit.s2_range must be min,max,count")
        audit = {
            "s1_values": _floats(cp.get("audit", "s1_values")),
            "s2_grid": np.linspace(rng[0], rng[1], int(rng[2])),
            "xi_points": cp.getint("audit", "xi_points"),
            "sigma0_values": _floats(cp.get("audit", "sigma0_values")),
            "L_values": _floats(cp.get("audit", "L_values")),
            "m": cp.getint("audit", "m"),
        }
        if not audit["s1_values"] or audit["s2_grid"].size == 0 \
                or not audit["sigma0_values"] or not audit["L_values"]:
            raise ConfigError("audit grids must be nonempty")

        s_pair = _floats(cp.get("layer", "s"))
        if len(s_pair) != 2:
            raise ConfigError("layer.s must be s1,s2")
        layer = {
            "xi_values": _floats(cp.get("layer", "xi_values")),
            "s": complex(s_pair[0], s_pair[1]),
            "n_values": [int(v) for v in _floats(cp.get("layer",
                                                        "n_values"))],
        }

        parseval = {k: float(cp.get("parseval", k))
                    for k in ("s1", "s2_max", "horizon")}
        parseval["n_freq"] = cp.getint("parseval", "n_freq")
        parseval["n_time"] = cp.getint("parseval", "n_time")

        probes = _points(cp.get("probes", "points"))
    except (ValueError, configparser.Error) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    raw = {sec: dict(cp.items(sec)) for sec in cp.sections()}
    digest = hashlib.sha256(repr(sorted(
        (sec, tuple(sorted(items.items()))) for sec, items in raw.items()
    )).encode()).hexdigest()
    return RunConfig(media=media, geometry=geometry, pml=pml,
                     source=source, numerics=numerics, sweep=sweep,
                     audit=audit, layer=layer, probes=probes,
                     parseval=parseval, digest=digest, raw=raw)
