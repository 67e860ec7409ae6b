"""File formats and deterministic emitters for every pipeline data product.

All structured files are JSON with sorted keys and floats printed at 17
significant digits (lossless double round-trip); tabular products are
plain CSV with fixed headers and fixed row order.  Identical inputs
therefore produce byte-identical outputs.  Writes go through a temp file
plus os.replace, so readers never observe a half-written product.

Formats:
  stencil  -- {d, radius, blocks: [{offset, matrix}], decay: {alpha, beta}}
  defect   -- [{site, component, value}]
  geometry -- {lattice: {e1, e2}, resonators: [{center, radius}], n_e,
               grid_n, bz_grid_m, stencil_radius}
  problem  -- {stencil_file | geometry_file, lambda, sigma, defect_file?,
               k_list, halfspace?: {width}}
  bands    -- CSV kappa1,kappa2,band_1..band_d
  gaps     -- {spectrum_min, spectrum_max, gaps: [{lower, upper, width, flags}]}
  result   -- sectioned text: [result] JSON header, [field] CSV
              (n1,n2,component,value), [certification] key: value lines
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .lattice import (
    BlockStencil,
    DiagonalDefect,
    LatticeField,
    LatticeGeometry,
    Periodic,
    Strip,
)
from .spectrum import BandStructure, SpectralGap
from .soliton import SolitonResult

__all__ = [
    "fmt",
    "dumps",
    "atomic_write_text",
    "save_stencil",
    "load_stencil",
    "save_defect",
    "load_defect",
    "save_geometry",
    "load_geometry",
    "save_problem",
    "load_problem_dict",
    "bands_to_csv",
    "bands_from_csv",
    "gaps_to_json",
    "gaps_from_json",
    "field_to_csv",
    "field_from_csv",
    "projector_kernel_csv",
    "certification_lines",
    "result_to_text",
    "result_from_text",
]


# ----------------------------------------------------------------------
# deterministic JSON
# ----------------------------------------------------------------------

def fmt(x: float) -> str:
    """17-significant-digit decimal: the shortest string class that is
    guaranteed to round-trip any double exactly."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in output: {x}")
    return f"{float(x):.17g}"


def _emit(obj, indent: int) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{pad}  {json.dumps(str(key))}: {_emit(obj[key], indent + 1)}'
            for key in sorted(obj)
        ]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = [_emit(v, indent + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(inner) + "]"
        rows = [f"{pad}  {v}" for v in inner]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, 17-digit floats, trailing newline."""
    return _emit(obj, 0) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a sibling temp file and os.replace (all-or-nothing)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------
# stencil and defect files
# ----------------------------------------------------------------------

def stencil_to_dict(stencil: BlockStencil) -> dict:
    blocks = [
        {
            "offset": [int(m[0]), int(m[1])],
            "matrix": [float(v) for v in stencil.block(m).ravel()],
        }
        for m in stencil.offsets()
    ]
    return {
        "d": stencil.d,
        "radius": stencil.radius,
        "blocks": blocks,
        "decay": {"alpha": stencil.decay_alpha, "beta": stencil.decay_beta},
    }


def stencil_from_dict(data: dict) -> BlockStencil:
    d = int(data["d"])
    blocks = {}
    for entry in data["blocks"]:
        m1, m2 = entry["offset"]
        mat = np.array(entry["matrix"], dtype=float).reshape(d, d)
        blocks[(int(m1), int(m2))] = mat
    decay = (float(data["decay"]["alpha"]), float(data["decay"]["beta"]))
    return BlockStencil(blocks, decay=decay)


def save_stencil(path: str, stencil: BlockStencil) -> None:
    atomic_write_text(path, dumps(stencil_to_dict(stencil)))


def load_stencil(path: str) -> BlockStencil:
    with open(path) as handle:
        return stencil_from_dict(json.load(handle))


def defect_to_list(V: DiagonalDefect) -> list:
    return [
        {"site": [int(site[0]), int(site[1])], "component": int(comp), "value": float(val)}
        for (site, comp), val in sorted(V.entries.items())
    ]


def defect_from_list(rows) -> DiagonalDefect:
    entries = {}
    for row in rows:
        site = (int(row["site"][0]), int(row["site"][1]))
        entries[(site, int(row["component"]))] = float(row["value"])
    return DiagonalDefect(entries)


def save_defect(path: str, V: DiagonalDefect) -> None:
    atomic_write_text(path, dumps(defect_to_list(V)))


def load_defect(path: str) -> DiagonalDefect:
    with open(path) as handle:
        return defect_from_list(json.load(handle))


# ----------------------------------------------------------------------
# geometry and problem files
# ----------------------------------------------------------------------

def save_geometry(path: str, geometry: LatticeGeometry, *, grid_n: int,
                  bz_grid_m: int, stencil_radius: int) -> None:
    data = {
        "lattice": {
            "e1": [float(geometry.e1[0]), float(geometry.e1[1])],
            "e2": [float(geometry.e2[0]), float(geometry.e2[1])],
        },
        "resonators": [
            {"center": [float(c[0]), float(c[1])], "radius": float(r)}
            for c, r in zip(geometry.resonator_centers, geometry.resonator_radii)
        ],
        "n_e": float(geometry.n_e),
        "grid_n": int(grid_n),
        "bz_grid_m": int(bz_grid_m),
        "stencil_radius": int(stencil_radius),
    }
    atomic_write_text(path, dumps(data))


def load_geometry(path: str) -> tuple[LatticeGeometry, dict]:
    """Returns the geometry plus its attached run parameters."""
    with open(path) as handle:
        data = json.load(handle)
    geometry = LatticeGeometry(
        e1=tuple(data["lattice"]["e1"]),
        e2=tuple(data["lattice"]["e2"]),
        resonator_centers=tuple(tuple(r["center"]) for r in data["resonators"]),
        resonator_radii=tuple(float(r["radius"]) for r in data["resonators"]),
        n_e=float(data.get("n_e", 1.0)),
    )
    params = {
        "grid_n": int(data["grid_n"]),
        "bz_grid_m": int(data["bz_grid_m"]),
        "stencil_radius": int(data["stencil_radius"]),
    }
    return geometry, params


def save_problem(path: str, *, lam: float, sigma: float, k_list,
                 stencil_file: str | None = None,
                 geometry_file: str | None = None,
                 defect_file: str | None = None,
                 halfspace: dict | None = None) -> None:
    if (stencil_file is None) == (geometry_file is None):
        raise ValueError("problem needs exactly one of stencil_file / geometry_file")
    data = {
        "lambda": float(lam),
        "sigma": float(sigma),
        "k_list": [int(k) for k in k_list],
    }
    if stencil_file is not None:
        data["stencil_file"] = stencil_file
    if geometry_file is not None:
        data["geometry_file"] = geometry_file
    if defect_file is not None:
        data["defect_file"] = defect_file
    if halfspace is not None:
        data["halfspace"] = halfspace
    atomic_write_text(path, dumps(data))


def load_problem_dict(path: str) -> dict:
    """Parse a problem file; referenced files resolve relative to it."""
    with open(path) as handle:
        data = json.load(handle)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(name):
        p = data[name]
        return p if os.path.isabs(p) else os.path.join(base, p)

    out = {
        "lambda": float(data["lambda"]),
        "sigma": float(data["sigma"]),
        "k_list": [int(k) for k in data["k_list"]],
        "stencil": None,
        "geometry": None,
        "geometry_params": None,
        "defect": DiagonalDefect.empty(),
        "halfspace": data.get("halfspace"),
    }
    if "stencil_file" in data:
        out["stencil"] = load_stencil(resolve("stencil_file"))
    elif "geometry_file" in data:
        out["geometry"], out["geometry_params"] = load_geometry(resolve("geometry_file"))
    else:
        raise ValueError("problem file names neither stencil_file nor geometry_file")
    if "defect_file" in data:
        out["defect"] = load_defect(resolve("defect_file"))
    return out


# ----------------------------------------------------------------------
# band structure and gap reports
# ----------------------------------------------------------------------

def bands_to_csv(bands: BandStructure) -> str:
    d = bands.d
    header = "kappa1,kappa2," + ",".join(f"band_{b + 1}" for b in range(d))
    lines = [header]
    for i1, k1 in enumerate(bands.kappas):
        for i2, k2 in enumerate(bands.kappas):
            row = [fmt(k1), fmt(k2)] + [fmt(v) for v in bands.bands[i1, i2]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def bands_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Returns (kappas, bands) with the emitted shapes."""
    lines = [ln for ln in text.splitlines() if ln]
    d = len(lines[0].split(",")) - 2
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    M = round(math.isqrt(len(rows)))
    if M * M != len(rows):
        raise ValueError("band CSV is not an M x M grid")
    kappas = np.array([rows[i * M][0] for i in range(M)])
    bands = np.array([r[2:] for r in rows]).reshape(M, M, d)
    return kappas, bands


def gaps_to_json(gaps, bands: BandStructure) -> str:
    data = {
        "spectrum_min": float(bands.bands.min()),
        "spectrum_max": float(bands.bands.max()),
        "gaps": [
            {
                "lower": g.lower,
                "upper": g.upper,
                "width": g.width,
                "flags": {
                    "inf_positive": g.inf_positive,
                    "spectrum_below": g.spectrum_below,
                    "spectrum_above": g.spectrum_above,
                    "qualifies": g.qualifies,
                },
            }
            for g in gaps
        ],
    }
    return dumps(data)


def gaps_from_json(text: str) -> list[SpectralGap]:
    data = json.loads(text)
    return [
        SpectralGap(
            lower=g["lower"],
            upper=g["upper"],
            inf_positive=g["flags"]["inf_positive"],
            spectrum_below=g["flags"]["spectrum_below"],
            spectrum_above=g["flags"]["spectrum_above"],
        )
        for g in data["gaps"]
    ]


# ----------------------------------------------------------------------
# fields, kernels, results
# ----------------------------------------------------------------------

def field_to_csv(a: LatticeField) -> str:
    """CSV n1,n2,component,value over the window in site order (real fields)."""
    if not a.is_real(1e-12):
        raise ValueError("field CSV stores real fields only")
    lines = ["n1,n2,component,value"]
    s1, s2 = a.window.shape
    for i1 in range(s1):
        for i2 in range(s2):
            if isinstance(a.window, Strip):
                n1, n2 = i1 + 1, i2
            else:
                n1, n2 = i1, i2
            for c in range(a.d):
                lines.append(f"{n1},{n2},{c},{fmt(a.values[i1, i2, c].real)}")
    return "\n".join(lines) + "\n"


def field_from_csv(text: str, window) -> LatticeField:
    rows = [ln.split(",") for ln in text.splitlines()[1:] if ln]
    d = max(int(r[2]) for r in rows) + 1
    values = np.zeros(window.shape + (d,), dtype=np.complex128)
    for n1s, n2s, cs, vs in rows:
        i1, i2 = window.index((int(n1s), int(n2s)))
        values[i1, i2, int(cs)] = float(vs)
    return LatticeField(window, values)


def projector_kernel_csv(P) -> str:
    """Full (n, m) kernel table; sized for inspection at small k."""
    lines = ["n1,n2,m1,m2,i,j,value"]
    k, d = P.k, P.d
    for n1 in range(k):
        for n2 in range(k):
            for m1 in range(k):
                for m2 in range(k):
                    block = P.kernel_block((n1, n2), (m1, m2))
                    for i in range(d):
                        for j in range(d):
                            lines.append(
                                f"{n1},{n2},{m1},{m2},{i},{j},{fmt(block[i, j].real)}"
                            )
    return "\n".join(lines) + "\n"


_CHECK_DETAILS = {
    "in_gap": ("delta_iso",),
    "defect_ok": ("defect_norm", "delta_iso"),
    "residual_ok": ("residual_norm", "norm_l2"),
    "nontrivial": ("z0_overlap", "m1", "norm_l2"),
    "critical_value_ok": ("energy", "critical_value_floor"),
    "realness_ok": (),
}


def certification_lines(result: SolitonResult) -> list[str]:
    """Machine-parsable `check: PASS/FAIL key=value ...` lines."""
    lines = []
    for name in sorted(result.checks):
        status = "PASS" if result.checks[name] else "FAIL"
        extras = [
            f"{key}={fmt(result.details[key])}"
            for key in _CHECK_DETAILS.get(name, ())
            if key in result.details
        ]
        lines.append(f"{name}: {status}" + ("" if not extras else " " + " ".join(extras)))
    return lines


def _window_to_dict(window) -> dict:
    if isinstance(window, Periodic):
        return {"type": "periodic", "k": window.k}
    if isinstance(window, Strip):
        return {"type": "strip", "width": window.width, "k": window.k}
    raise ValueError(f"result files store Periodic or Strip fields, not {window!r}")


def _window_from_dict(data) -> Periodic | Strip:
    if data["type"] == "periodic":
        return Periodic(int(data["k"]))
    if data["type"] == "strip":
        return Strip(int(data["width"]), int(data["k"]))
    raise ValueError(f"unknown window type {data['type']!r}")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else "-inf"
    return value


def result_to_text(result: SolitonResult) -> str:
    header = {
        "lambda": result.lam,
        "sigma": result.sigma,
        "window": _window_to_dict(result.a.window),
        "energy": result.energy,
        "residual_norm": result.residual_norm,
        "decay_gamma": _json_safe(result.decay_gamma),
        "decay_quality": result.decay_quality,
        "checks": dict(result.checks),
        "details": {k: _json_safe(v) for k, v in result.details.items()},
    }
    parts = [
        "[result]",
        dumps(header).rstrip("\n"),
        "[field]",
        field_to_csv(result.a).rstrip("\n"),
        "[certification]",
        "\n".join(certification_lines(result)),
    ]
    return "\n".join(parts) + "\n"


def result_from_text(text: str) -> tuple[dict, LatticeField]:
    """Returns (header dict, field); certification lines are re-derivable."""
    sections = {}
    current = None
    for line in text.splitlines():
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    if "result" not in sections or "field" not in sections:
        raise ValueError("malformed result file: missing [result]/[field] section")
    header = json.loads("\n".join(sections["result"]))
    for key in ("decay_gamma",):
        if isinstance(header.get(key), str):
            header[key] = float(header[key])
    details = header.get("details", {})
    for key, value in list(details.items()):
        if isinstance(value, str):
            details[key] = float(value)
    window = _window_from_dict(header["window"])
    a = field_from_csv("\n".join(sections["field"]), window)
    return header, a
