"""Command-line surface: bounds, refine, sweep, field, oracle.

Configuration precedence is CLI flag > config file (``--config``, flat
``key = value`` lines) > built-in default.  Every command honors ``--seed``
and emits either schema-versioned JSON or fixed-header CSV; infinities become
the strings "+inf"/"-inf".  Wall time goes to stderr (and into the document
only under ``--timing``) so that documents are byte-identical across reruns.

Exit codes: 0 success, 2 usage or spec error, 3 unbounded or degenerate
result (the document is still written), 4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from .core import BoundsResult, LocalEnergyField, SingularEvaluationError
from .oracle import (
    BoxTooSmallError,
    ConvergenceError,
    Grid1D,
    Grid2D,
    solve_1d_ground_state,
    solve_2d_dirichlet_ground_state,
)
from .output import envelope, render_csv, render_json, write_text_atomic
from .refine import default_centers, new_refinement_state, optimize_bump_amplitude
from .search import EmptySearchRegionError, SearchConfig, bounds_of_field
from .systems import (
    AnnularBilliard,
    MagneticHydrogen,
    QuarticOscillator,
    billiard_local_energy_field,
    helium_bounds,
    hydrogen_radial_field,
    magnetic_hydrogen_field,
    magnetic_trivial_bounds,
    quartic_field,
    quartic_system,
    unit_disk_field,
)

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_UNBOUNDED = 3
EXIT_NUMERICAL = 4

BOUNDS_SYSTEMS = ("annular-billiard", "helium", "magnetic-hydrogen", "quartic", "hydrogen")
FIELD_SYSTEMS = ("quartic", "hydrogen-radial", "annular-billiard", "magnetic-hydrogen")
ORACLE_SYSTEMS = ("quartic", "annular-billiard", "harmonic", "hydrogen-radial", "disk")
SWEEP_PARAMS = {
    "annular-billiard": ("r", "delta"),
    "helium": ("Z",),
    "magnetic-hydrogen": ("B",),
    "quartic": ("rr", "delta2"),
}


class SpecError(ValueError):
    """Invalid run specification (maps to exit code 2)."""


@dataclass
class RunSpec:
    """Validated, merged (CLI > config file > defaults) run parameters."""

    command: str
    system: str
    params: dict
    search: SearchConfig
    fmt: str
    out: str | None
    seed: int
    timing: bool
    extras: dict


def _parse_box(text: str, dim: int) -> tuple[tuple[float, float], ...]:
    axes = [t for t in text.split(",") if t.strip()]
    if len(axes) == 1 and dim > 1:
        axes = axes * dim
    if len(axes) != dim:
        raise SpecError(f"--box needs {dim} lo:hi ranges, got {text!r}")
    out = []
    for axis in axes:
        try:
            lo, hi = (float(v) for v in axis.split(":"))
        except ValueError as exc:
            raise SpecError(f"bad --box component {axis!r} (want lo:hi)") from exc
        if not hi > lo:
            raise SpecError(f"empty --box range {axis!r}")
        out.append((lo, hi))
    return tuple(out)


def _parse_float_list(text: str) -> list[float]:
    items = [t.strip() for t in text.split(",")]
    items = [t for t in items if t]
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise SpecError(f"bad numeric list {text!r}") from exc


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path) as handle:
            for lineno, raw in enumerate(handle, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise SpecError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise SpecError(f"cannot read config file {path}: {exc}") from exc
    return out


class _Merger:
    """CLI > config file > defaults, with type conversion and key checking."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.config = _read_config_file(args.config) if args.config else {}
        self.used: set[str] = set()

    def get(self, key: str, default, convert: Callable[[str], Any] | None = None):
        dest = "fmt" if key == "format" else key.replace("-", "_")
        self.used.add(key)
        cli_val = self.args.get(dest)
        if cli_val is not None:
            return cli_val
        if key in self.config:
            raw = self.config[key]
            try:
                return convert(raw) if convert else raw
            except (TypeError, ValueError) as exc:
                raise SpecError(f"config key {key}: bad value {raw!r}") from exc
        return default

    def check_unknown(self) -> None:
        unknown = set(self.config) - self.used
        if unknown:
            raise SpecError(f"unknown config keys: {', '.join(sorted(unknown))}")


def _search_config(m: _Merger, grid_default: int, levels_default: int = 3,
                   multistarts_default: int = 8, dim: int = 1) -> SearchConfig:
    box_text = m.get("box", None)
    box = _parse_box(box_text, dim) if box_text else None
    try:
        return SearchConfig(
            grid_points_per_axis=m.get("grid-n", grid_default, int),
            refinement_levels=m.get("levels", levels_default, int),
            multistart_count=m.get("multistarts", multistarts_default, int),
            box=box,
            rng_seed=m.get("seed", 0, int),
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _witness_dict(report) -> dict:
    return {
        "kind": report.kind,
        "location": None if report.location is None else list(report.location),
        "value": report.value,
        "gradient_norm_at_location": report.gradient_norm_at_location,
        "boundary_or_asymptotic": report.boundary_or_asymptotic,
        "attained": report.attained,
        "history": list(report.history),
    }


def _bounds_result_dict(b: BoundsResult) -> dict:
    return {
        "lower": b.lower,
        "upper": b.upper,
        "lower_witness": _witness_dict(b.lower_witness),
        "upper_witness": _witness_dict(b.upper_witness),
        "resolution_caveat": None if b.resolution_caveat is None else b.resolution_caveat.as_dict(),
    }


def _emit(spec: RunSpec, document: dict, csv_text: str | None, started: float) -> int:
    wall = time.perf_counter() - started
    if spec.timing:
        document = dict(document)
        document["wall_time_s"] = round(wall, 6)
    text = render_json(document) if spec.fmt == "json" else csv_text
    if text is None:
        raise SpecError(f"command {spec.command} has no csv rendering")
    if spec.out:
        write_text_atomic(spec.out, text)
    else:
        sys.stdout.write(text)
    print(f"wall_time_s={wall:.3f}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# per-command system builders


def _bounds_for_system(spec: RunSpec) -> tuple[dict, BoundsResult]:
    name = spec.system
    p = spec.params
    if name == "annular-billiard":
        field = billiard_local_energy_field(AnnularBilliard(p["r"], p["delta"]))
        return {"name": name, "r": p["r"], "delta": p["delta"]}, bounds_of_field(field, spec.search)
    if name == "helium":
        return {"name": name, "Z": p["Z"]}, helium_bounds(p["Z"])
    if name == "magnetic-hydrogen":
        mh = MagneticHydrogen(p["B"])
        meta = {"name": name, "B": p["B"], "variant": p["variant"]}
        if p["variant"] == "trivial":
            return meta, magnetic_trivial_bounds(mh, spec.search)
        field = magnetic_hydrogen_field(mh, p["variant"])
        return meta, bounds_of_field(field, spec.search)
    if name == "quartic":
        qo = QuarticOscillator(p["rr"], p["eta"], p["delta2"])
        meta = {"name": name, "rr": p["rr"], "eta": p["eta"], "delta2": p["delta2"]}
        return meta, bounds_of_field(quartic_field(qo), spec.search)
    if name == "hydrogen":
        return {"name": name}, bounds_of_field(hydrogen_radial_field(1.0), spec.search)
    raise SpecError(f"unknown bounds system {name!r}")


def cmd_bounds(spec: RunSpec) -> int:
    started = time.perf_counter()
    meta, result = _bounds_for_system(spec)
    doc = envelope("bounds", meta, _config_dict(spec), _bounds_result_dict(result))
    rows = [
        ["lower", result.lower],
        ["upper", result.upper],
        ["lower_attained", result.lower_witness.attained],
        ["upper_attained", result.upper_witness.attained],
        ["lower_location", _loc_str(result.lower_witness.location)],
        ["upper_location", _loc_str(result.upper_witness.location)],
    ]
    code = _emit(spec, doc, render_csv(["key", "value"], rows), started)
    if not (math.isfinite(result.lower) and math.isfinite(result.upper)):
        return EXIT_UNBOUNDED
    return code


def _loc_str(location) -> str:
    if location is None:
        return ""
    return " ".join(repr(float(v)) for v in location)


def cmd_refine(spec: RunSpec) -> int:
    started = time.perf_counter()
    if spec.system != "quartic":
        raise SpecError("refine supports one-dimensional systems only (quartic)")
    p = spec.params
    qo = QuarticOscillator(p["rr"], p["eta"], p["delta2"])
    h, base = quartic_system(qo)
    asym = quartic_field(qo).asymptotic_limits

    centers_text = spec.extras["centers"]
    if centers_text is None:
        centers = default_centers(sweeps=spec.extras["sweeps"])
    else:
        centers = _parse_float_list(centers_text)
    sigma = spec.extras["sigma"]

    state = new_refinement_state(h, base, asym, cfg=spec.search)
    rows: list[list[Any]] = [[0, None, None, state.current_lower]]
    for step, center in enumerate(centers, start=1):
        s_star, state = optimize_bump_amplitude(state, center, sigma, cfg=spec.search)
        rows.append([step, center, s_star, state.current_lower])

    meta = {"name": "quartic", "rr": p["rr"], "eta": p["eta"], "delta2": p["delta2"],
            "sigma": sigma, "n_centers": len(centers)}
    history = [
        {"step": r[0], "center": r[1], "s_star": r[2], "lower_bound": r[3]} for r in rows
    ]
    doc = envelope("refine", meta, _config_dict(spec), {"history": history})
    csv_rows = [[r[0], "" if r[1] is None else r[1], "" if r[2] is None else r[2], r[3]] for r in rows]
    return _emit(spec, doc, render_csv(["step", "center", "s_star", "lower_bound"], csv_rows), started)


def cmd_sweep(spec: RunSpec) -> int:
    started = time.perf_counter()
    param = spec.extras["param"]
    allowed = SWEEP_PARAMS.get(spec.system, ())
    if param not in allowed:
        raise SpecError(
            f"system {spec.system!r} has no sweepable parameter {param!r} "
            f"(allowed: {', '.join(allowed) or 'none'})"
        )
    values = _parse_float_list(spec.extras["values"]) if spec.extras["values"] else []
    rows = []
    for v in values:
        sub = RunSpec(
            command="bounds",
            system=spec.system,
            params={**spec.params, param: (int(v) if param == "eta" else v)},
            search=spec.search,
            fmt=spec.fmt,
            out=None,
            seed=spec.seed,
            timing=False,
            extras={},
        )
        _, result = _bounds_for_system(sub)
        rows.append([param, v, result.lower, result.upper])
    meta = {"name": spec.system, **spec.params, "swept": param}
    doc = envelope(
        "sweep",
        meta,
        _config_dict(spec),
        {"rows": [{"param": r[0], "value": r[1], "lower": r[2], "upper": r[3]} for r in rows]},
    )
    return _emit(spec, doc, render_csv(["param", "value", "lower", "upper"], rows), started)


def _field_for_system(spec: RunSpec) -> tuple[dict, LocalEnergyField, list[str]]:
    p = spec.params
    if spec.system == "quartic":
        qo = QuarticOscillator(p["rr"], p["eta"], p["delta2"])
        meta = {"name": spec.system, "rr": p["rr"], "eta": p["eta"], "delta2": p["delta2"]}
        return meta, quartic_field(qo), ["q", "e_loc"]
    if spec.system == "hydrogen-radial":
        return {"name": spec.system}, hydrogen_radial_field(1.0), ["r", "e_loc"]
    if spec.system == "annular-billiard":
        field = billiard_local_energy_field(AnnularBilliard(p["r"], p["delta"]))
        return {"name": spec.system, "r": p["r"], "delta": p["delta"]}, field, ["x", "y", "e_loc"]
    if spec.system == "magnetic-hydrogen":
        variant = p["variant"] if p["variant"] != "trivial" else "lower"
        field = magnetic_hydrogen_field(MagneticHydrogen(p["B"]), variant)
        meta = {"name": spec.system, "B": p["B"], "variant": variant}
        return meta, field, ["rho", "z", "e_loc"]
    raise SpecError(f"unknown field system {spec.system!r}")


def cmd_field(spec: RunSpec) -> int:
    started = time.perf_counter()
    meta, field, columns = _field_for_system(spec)
    dim = field.domain.dimension
    if dim > 2:
        raise SpecError("field dumps support one- and two-dimensional systems only")
    box = spec.search.box or field.domain.box
    n = spec.search.grid_points_per_axis
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    if dim == 1:
        qs = axes[0][:, None]
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        qs = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    keep = field.domain.interior_mask(qs)
    qs = qs[keep]
    vals = field.evaluate_with_limits(qs, singular_as_nan=spec.extras["singular"] == "nan")
    rows = [[*map(float, q), float(v)] for q, v in zip(qs, vals)]
    doc = envelope(
        "field",
        meta,
        _config_dict(spec),
        {"columns": columns, "rows": rows},
    )
    return _emit(spec, doc, render_csv(columns, rows), started)


def cmd_oracle(spec: RunSpec) -> int:
    started = time.perf_counter()
    p = spec.params
    n = spec.search.grid_points_per_axis
    box = spec.search.box

    try:
        if spec.system == "quartic":
            qo = QuarticOscillator(p["rr"], p["eta"], p["delta2"])
            res = solve_1d_ground_state(qo.potential, Grid1D(*(box[0] if box else (-8.0, 8.0)), n))
            meta = {"name": spec.system, "rr": p["rr"], "eta": p["eta"], "delta2": p["delta2"]}
        elif spec.system == "harmonic":
            res = solve_1d_ground_state(lambda x: 0.5 * x * x, Grid1D(*(box[0] if box else (-10.0, 10.0)), n))
            meta = {"name": spec.system}
        elif spec.system == "hydrogen-radial":
            grid = Grid1D(*(box[0] if box else (0.0, 40.0)), n)
            res = solve_1d_ground_state(lambda r: -1.0 / r, grid, dirichlet_edges=(True, False))
            meta = {"name": spec.system}
        elif spec.system == "annular-billiard":
            field = billiard_local_energy_field(AnnularBilliard(p["r"], p["delta"]))
            res = solve_2d_dirichlet_ground_state(field.domain, Grid2D(box or field.domain.box, n))
            meta = {"name": spec.system, "r": p["r"], "delta": p["delta"]}
        elif spec.system == "disk":
            field = unit_disk_field()
            res = solve_2d_dirichlet_ground_state(field.domain, Grid2D(box or field.domain.box, n))
            meta = {"name": spec.system}
        else:
            raise SpecError(f"unknown oracle system {spec.system!r}")
    except ValueError as exc:  # grid validation
        raise SpecError(str(exc)) from exc

    result = {
        "energy": res.energy,
        "error_bar": res.error_bar,
        "coarse_value": res.coarse_value,
        "fine_value": res.fine_value,
        "detail": res.detail,
    }
    doc = envelope("oracle", meta, _config_dict(spec), result)
    rows = [[k, v] for k, v in result.items()]
    return _emit(spec, doc, render_csv(["key", "value"], rows), started)


def _config_dict(spec: RunSpec) -> dict:
    return {
        "grid_points_per_axis": spec.search.grid_points_per_axis,
        "refinement_levels": spec.search.refinement_levels,
        "multistart_count": spec.search.multistart_count,
        "box": spec.search.box,
        "seed": spec.seed,
    }


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--system", required=True)
    sub.add_argument("--variant", choices=["lower", "upper", "improved", "trivial"])
    sub.add_argument("--r", type=float, help="billiard inner radius")
    sub.add_argument("--delta", type=float, help="billiard center offset")
    sub.add_argument("--Z", type=float, help="helium-like nuclear charge")
    sub.add_argument("--B", type=float, help="magnetic field strength")
    sub.add_argument("--eta", type=int, choices=[-1, 1], help="quartic potential sign")
    sub.add_argument("--delta2", type=float, help="quartic well offset (delta^2)")
    sub.add_argument("--rr", type=float, help="quartic stiffness")
    sub.add_argument("--grid-n", type=int, help="grid points per axis")
    sub.add_argument("--levels", type=int, help="refinement levels of the search")
    sub.add_argument("--multistarts", type=int, help="random polish starts")
    sub.add_argument("--box", help="per-axis lo:hi, comma separated")
    sub.add_argument("--seed", type=int, help="RNG seed (bit-exact reruns)")
    sub.add_argument("--format", choices=["json", "csv"], dest="fmt")
    sub.add_argument("--out", help="output path (atomic write); default stdout")
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--timing", action="store_true", help="embed wall time in the document")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundbound",
        description="Two-sided ground-state energy bounds from local-energy extrema.",
        epilog="GROUNDBOUND_THREADS caps worker threads used by grid scans.",
    )
    parser.add_argument("--version", action="version", version=f"groundbound {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("bounds", "two-sided energy bounds for a shipped system"),
        ("refine", "iterative Gaussian-bump refinement of the lower bound"),
        ("sweep", "bounds over a range of one system parameter"),
        ("field", "dump the local-energy field on a grid"),
        ("oracle", "independent finite-difference reference energy"),
    ]:
        sub = subs.add_parser(name, help=helptext)
        _add_common(sub)
        if name == "refine":
            sub.add_argument("--centers", help="comma list of bump centers; empty for none")
            sub.add_argument("--sigma", type=float, help="bump width (default 1.0)")
            sub.add_argument("--sweeps", type=int, help="passes of the default schedule")
        if name == "sweep":
            sub.add_argument("--param", required=True, help="parameter to sweep")
            sub.add_argument("--values", required=True, help="comma list of values")
        if name == "field":
            sub.add_argument("--singular", choices=["limit", "nan"],
                             help="emit declared limits or nan inside singular tubes")
    return parser


_SYSTEM_DEFAULTS: dict[str, dict[str, tuple[Any, Callable]]] = {
    "annular-billiard": {"r": (0.75, float), "delta": (0.1, float)},
    "helium": {"Z": (2.0, float)},
    "magnetic-hydrogen": {"B": (1.0, float), "variant": (None, str)},
    "quartic": {"rr": (1.0 / math.sqrt(2.0), float), "eta": (-1, int), "delta2": (8.0, float)},
    "hydrogen": {},
    "hydrogen-radial": {},
    "harmonic": {},
    "disk": {},
}

_GRID_DEFAULTS = {
    "annular-billiard": 101,
    "helium": 61,
    "magnetic-hydrogen": 161,
    "quartic": 401,
    "hydrogen": 401,
    "hydrogen-radial": 401,
    "harmonic": 2000,
    "disk": 200,
}

# reference solves want finer grids than extremum searches
_ORACLE_GRID_DEFAULTS = {
    "quartic": 2000,
    "annular-billiard": 400,
    "harmonic": 2000,
    "hydrogen-radial": 4000,
    "disk": 200,
}

_DIMENSIONS = {
    "annular-billiard": 2,
    "helium": 3,
    "magnetic-hydrogen": 2,
    "quartic": 1,
    "hydrogen": 1,
    "hydrogen-radial": 1,
    "harmonic": 1,
    "disk": 2,
}


def _build_spec(args: argparse.Namespace) -> RunSpec:
    m = _Merger(args)
    system = args.system
    if system not in _SYSTEM_DEFAULTS:
        raise SpecError(f"unknown system {system!r}")

    params: dict[str, Any] = {}
    for key, (default, conv) in _SYSTEM_DEFAULTS[system].items():
        val = m.get(key if key != "variant" else "variant", default, conv)
        params[key] = val
    if system == "magnetic-hydrogen" and params.get("variant") is None:
        params["variant"] = "trivial"

    # validate parameters against the named system before any computation
    try:
        if system == "annular-billiard":
            AnnularBilliard(params["r"], params["delta"])
        elif system == "helium":
            if params["Z"] < 1.0:
                raise ValueError("helium-like bounds need Z >= 1")
        elif system == "magnetic-hydrogen":
            MagneticHydrogen(params["B"])
            if params["variant"] == "improved" and params["B"] <= 0:
                raise ValueError("the improved trial needs B > 0")
        elif system == "quartic":
            QuarticOscillator(params["rr"], params["eta"], params["delta2"])
    except ValueError as exc:
        raise SpecError(str(exc)) from exc

    if args.command == "oracle":
        grid_default = _ORACLE_GRID_DEFAULTS.get(system, _GRID_DEFAULTS[system])
    else:
        grid_default = _GRID_DEFAULTS[system]
    levels_default = 2 if args.command == "refine" else 3
    multistarts_default = 1 if args.command == "refine" else 8
    search = _search_config(m, grid_default, levels_default, multistarts_default,
                            dim=_DIMENSIONS[system])

    default_fmt = "json" if args.command in ("bounds", "oracle") else "csv"
    extras: dict[str, Any] = {}
    if args.command == "refine":
        extras["centers"] = m.get("centers", None)
        extras["sigma"] = m.get("sigma", 1.0, float)
        extras["sweeps"] = m.get("sweeps", 12, int)
        if extras["sigma"] <= 0:
            raise SpecError("--sigma must be positive")
    if args.command == "sweep":
        extras["param"] = args.param
        extras["values"] = m.get("values", "")
    if args.command == "field":
        extras["singular"] = m.get("singular", "limit")

    spec = RunSpec(
        command=args.command,
        system=system,
        params=params,
        search=search,
        fmt=m.get("format", default_fmt),
        out=m.get("out", None),
        seed=search.rng_seed,
        timing=bool(args.timing),
        extras=extras,
    )
    m.check_unknown()
    return spec


_COMMANDS = {
    "bounds": cmd_bounds,
    "refine": cmd_refine,
    "sweep": cmd_sweep,
    "field": cmd_field,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _build_spec(args)
        if spec.command == "bounds" and spec.system not in BOUNDS_SYSTEMS:
            raise SpecError(f"bounds does not support system {spec.system!r}")
        if spec.command == "field" and spec.system not in FIELD_SYSTEMS:
            raise SpecError(f"field does not support system {spec.system!r}")
        if spec.command == "oracle" and spec.system not in ORACLE_SYSTEMS:
            raise SpecError(f"oracle does not support system {spec.system!r}")
        return _COMMANDS[spec.command](spec)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (BoxTooSmallError, ConvergenceError, EmptySearchRegionError,
            SingularEvaluationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
