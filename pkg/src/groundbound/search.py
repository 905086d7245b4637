"""Global extremum location and control-parameter optimization.

``global_min`` / ``global_max`` certify extrema only up to the declared grid
resolution plus a derivative-free polish; the winning candidate is compared
against every declared singular-set limit and asymptotic limit, so a search
box on an unbounded domain is legitimate exactly when those limits are
supplied.  ``optimize_parameters`` runs the outer sup/inf over a trial
family's control vector with a full inner extremum search per probe.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    BoundsResult,
    Domain,
    Hamiltonian,
    LocalEnergyField,
    LogTrialFunction,
    RatioTrialFunction,
    ResolutionCaveat,
    SingularEvaluationError,
    make_log_field,
    make_ratio_field,
    sample_interior,
)

__all__ = [
    "SearchConfig",
    "ExtremumReport",
    "EmptySearchRegionError",
    "FamilyCannotBoundError",
    "TrialFamily",
    "global_min",
    "global_max",
    "bounds",
    "bounds_of_field",
    "optimize_parameters",
]

POLISH_STEP_STOP = 1e-9
POLISH_VALUE_STOP = 1e-12
RANDOM_PROBE_COUNT = 20  # probes recorded by optimize_parameters for dominance


class EmptySearchRegionError(RuntimeError):
    """No grid point survived the interior/singularity masks."""


class FamilyCannotBoundError(RuntimeError):
    """Every probed control vector produced an infinite objective."""


@dataclass(frozen=True)
class SearchConfig:
    """Budget and reproducibility knobs for the extremum searches."""

    grid_points_per_axis: int = 101
    refinement_levels: int = 3
    multistart_count: int = 8
    local_tol: float = 1e-6
    box: tuple[tuple[float, float], ...] | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_points_per_axis < 8:
            raise ValueError("grid_points_per_axis must be at least 8")
        if self.refinement_levels < 1:
            raise ValueError("refinement_levels must be at least 1")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be at least 1")


@dataclass(frozen=True)
class ExtremumReport:
    """A certified-to-resolution global extremum of a local-energy field.

    ``attained`` is ``"interior"`` or names the declared limit that won
    (``"singular:<name>"`` / ``"asymptotic:<name>"``), in which case
    ``boundary_or_asymptotic`` is set and ``location`` may be ``None``.
    ``history`` is the best value seen after each refinement level and is
    monotone by construction.
    """

    kind: str  # "min" | "max"
    location: np.ndarray | None
    value: float
    gradient_norm_at_location: float | None
    boundary_or_asymptotic: bool
    attained: str
    history: tuple[float, ...]


def _worker_count() -> int:
    raw = os.environ.get("GROUNDBOUND_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _chunked_eval(f: Callable[[np.ndarray], np.ndarray], qs: np.ndarray) -> np.ndarray:
    """Evaluate a vectorized field, optionally fanning chunks over threads.

    Chunks are disjoint and merged in index order, so the result is identical
    to a sequential evaluation regardless of GROUNDBOUND_THREADS.
    """
    workers = _worker_count()
    if workers <= 1 or qs.shape[0] < 4 * workers:
        return np.asarray(f(qs), dtype=float)
    from concurrent.futures import ThreadPoolExecutor

    chunks = np.array_split(np.arange(qs.shape[0]), workers)
    out = np.empty(qs.shape[0], dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(idx, pool.submit(f, qs[idx])) for idx in chunks if idx.size]
        for idx, fut in futures:
            out[idx] = np.asarray(fut.result(), dtype=float)
    return out


def _grid_points(box: Sequence[tuple[float, float]], n_per_axis: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, n_per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _masked_values(field: LocalEnergyField, qs: np.ndarray, sign: float) -> np.ndarray:
    """Field values with invalid/singular/non-finite points set to +inf (after sign)."""
    ok = field.valid_mask(qs)
    vals = np.full(qs.shape[0], np.inf)
    if ok.any():
        v = sign * _chunked_eval(field.evaluate, qs[ok])
        v[~np.isfinite(v)] = np.inf
        vals[ok] = v
    return vals


def _polish(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    box: Sequence[tuple[float, float]],
    initial_step: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Derivative-free coordinate descent with shrinking steps.

    Minimizes ``objective`` (already sign-adjusted).  A sweep that improves by
    less than ``POLISH_VALUE_STOP`` counts as stalled, so steps keep halving
    until they drop below ``POLISH_STEP_STOP``; this drives the location in to
    step resolution rather than quitting on the first flat sweep.
    """
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    x = np.clip(np.asarray(x0, dtype=float).copy(), lo, hi)
    fx = objective(x)
    step = np.asarray(initial_step, dtype=float).copy()
    while np.max(step) >= POLISH_STEP_STOP:
        start = fx
        improved = False
        for i in range(x.shape[0]):
            for s in (+step[i], -step[i]):
                cand = x.copy()
                cand[i] = min(max(cand[i] + s, lo[i]), hi[i])
                fc = objective(cand)
                if fc < fx:
                    x, fx = cand, fc
                    improved = True
        if not improved or (start - fx) < POLISH_VALUE_STOP:
            step *= 0.5
    return x, fx


def _fd_gradient_norm(field: LocalEnergyField, x: np.ndarray, sign: float) -> float | None:
    h = 1e-6
    dim = x.shape[0]
    g = np.zeros(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        pair = np.stack([x + e, x - e])
        if not field.valid_mask(pair).all():
            return None
        vp, vm = _chunked_eval(field.evaluate, pair)
        g[i] = (vp - vm) / (2 * h)
    return float(np.linalg.norm(g))


def _search_extremum(field: LocalEnergyField, cfg: SearchConfig, kind: str) -> ExtremumReport:
    sign = 1.0 if kind == "min" else -1.0
    domain = field.domain
    box = cfg.box or domain.box
    if box is None:
        raise ValueError("no search box: neither the domain nor the config supplies one")
    if domain.kind == "unbounded" and not field.asymptotic_limits:
        raise ValueError(
            "refusing to truncate an unbounded domain without declared asymptotic limits"
        )
    box = tuple((float(lo), float(hi)) for lo, hi in box)

    def objective(x: np.ndarray) -> float:
        return float(_masked_values(field, x[None, :], sign)[0])

    # level 0: full-box scan, then zoomed re-grids around the running best
    history: list[float] = []
    best_x: np.ndarray | None = None
    best_v = np.inf
    window = box
    for level in range(cfg.refinement_levels):
        pts = _grid_points(window, cfg.grid_points_per_axis)
        vals = _masked_values(field, pts, sign)
        if level == 0 and not np.isfinite(vals).any():
            raise EmptySearchRegionError(
                "every grid point is exterior, singular, or non-finite"
            )
        if np.isfinite(vals).any():
            i = int(np.argmin(vals))
            if vals[i] < best_v:
                best_v = float(vals[i])
                best_x = pts[i].copy()
        history.append(best_v)
        if best_x is None:
            break
        widths = np.array([hi - lo for lo, hi in window]) * 0.25
        window = tuple(
            (max(box[d][0], best_x[d] - widths[d] / 2), min(box[d][1], best_x[d] + widths[d] / 2))
            for d in range(len(box))
        )

    # polish the grid winner and the multistarts
    spacing = np.array([(hi - lo) / (cfg.grid_points_per_axis - 1) for lo, hi in box])
    candidates: list[tuple[np.ndarray, float]] = []
    if best_x is not None:
        candidates.append(_polish(objective, best_x, box, spacing.copy()))
    rng = np.random.default_rng(cfg.rng_seed)
    try:
        starts = sample_interior(
            replace(domain, box=box), cfg.multistart_count, rng,
            extra_mask=lambda qs: ~field.singular_mask(qs),
        )
    except SingularEvaluationError:
        # a sliver domain can defeat rejection sampling; the grid scan already
        # covered it, so multistarts are merely skipped
        starts = np.empty((0, len(box)))
    for x0 in starts:
        candidates.append(_polish(objective, x0, box, spacing.copy()))

    # ties on the value broken by lexicographically smallest location
    interior_x, interior_v = None, np.inf
    for x, v in candidates:
        if v < interior_v or (v == interior_v and interior_x is not None and tuple(x) < tuple(interior_x)):
            interior_x, interior_v = x, v
    if interior_x is not None and np.isfinite(interior_v):
        history.append(min(history[-1], interior_v) if history else interior_v)

    # fold in declared limits
    winner_value = interior_v
    winner_attained = "interior"
    for s in field.singularities:
        lim = s.min_limit if kind == "min" else s.max_limit
        if lim is None:
            continue
        if sign * lim < winner_value:
            winner_value = sign * lim
            winner_attained = f"singular:{s.name}"
    for a in field.asymptotic_limits:
        if sign * a.value < winner_value:
            winner_value = sign * a.value
            winner_attained = f"asymptotic:{a.name}"

    at_limit = winner_attained != "interior"
    if at_limit:
        location = None
        grad_norm = None
        value = sign * winner_value
    else:
        location = interior_x
        grad_norm = _fd_gradient_norm(field, interior_x, sign)
        value = sign * interior_v
    hist = tuple(sign * h for h in history)
    if at_limit:
        hist = hist + (value,)
    return ExtremumReport(
        kind=kind,
        location=location,
        value=value,
        gradient_norm_at_location=grad_norm,
        boundary_or_asymptotic=at_limit,
        attained=winner_attained,
        history=hist,
    )


def global_min(field: LocalEnergyField, domain: Domain | None = None, cfg: SearchConfig | None = None) -> ExtremumReport:
    """Global minimum of the field over the domain, including declared limits."""
    cfg = cfg or SearchConfig()
    if domain is not None and domain is not field.domain:
        field = replace(field, domain=domain)
    return _search_extremum(field, cfg, "min")


def global_max(field: LocalEnergyField, domain: Domain | None = None, cfg: SearchConfig | None = None) -> ExtremumReport:
    """Mirror of :func:`global_min`."""
    cfg = cfg or SearchConfig()
    if domain is not None and domain is not field.domain:
        field = replace(field, domain=domain)
    return _search_extremum(field, cfg, "max")


def _caveat(field: LocalEnergyField, cfg: SearchConfig) -> ResolutionCaveat:
    box = cfg.box or field.domain.box or ()
    spacing = max((hi - lo) / (cfg.grid_points_per_axis - 1) for lo, hi in box) if box else float("nan")
    # the polish refines far below the final grid, but the grid is what
    # certifies globality, so the caveat reports the level-0 spacing
    return ResolutionCaveat(
        grid_points_per_axis=cfg.grid_points_per_axis,
        refinement_levels=cfg.refinement_levels,
        multistart_count=cfg.multistart_count,
        box=tuple((float(lo), float(hi)) for lo, hi in box),
        final_grid_spacing=spacing,
    )


def bounds_of_field(field: LocalEnergyField, cfg: SearchConfig | None = None) -> BoundsResult:
    """Lower/upper energy bounds as the global min/max of one field."""
    cfg = cfg or SearchConfig()
    lo = global_min(field, cfg=cfg)
    hi = global_max(field, cfg=cfg)
    return BoundsResult(
        lower=lo.value,
        upper=hi.value,
        lower_witness=lo,
        upper_witness=hi,
        resolution_caveat=_caveat(field, cfg),
    )


def bounds(
    h: Hamiltonian,
    trial: LogTrialFunction | RatioTrialFunction,
    cfg: SearchConfig | None = None,
    field: LocalEnergyField | None = None,
) -> BoundsResult:
    """Bounds from a trial under a Hamiltonian (positivity of the trial assumed).

    Pass ``field`` to reuse a prebuilt annotated field; otherwise a bare one is
    assembled from the trial (log or ratio form) with the domain's declared
    singular sets and no asymptotic limits.
    """
    if field is None:
        if isinstance(trial, LogTrialFunction):
            field = make_log_field(h, trial)
        elif isinstance(trial, RatioTrialFunction):
            field = make_ratio_field(h.domain, trial)
        else:
            raise TypeError("trial must be a LogTrialFunction or RatioTrialFunction")
    return bounds_of_field(field, cfg)


# ---------------------------------------------------------------------------
# control-parameter optimization


@dataclass(frozen=True)
class TrialFamily:
    """A parameterized trial: a control box and a field builder.

    ``build(lam)`` must return the annotated local-energy field of the family
    member ``lam``.  An empty ``control_box`` denotes a frozen family.
    """

    control_box: tuple[tuple[float, float], ...]
    build: Callable[[np.ndarray], LocalEnergyField]
    label: str = ""


@dataclass(frozen=True)
class ParameterSearchResult:
    best_params: np.ndarray
    bounds: BoundsResult
    objective: str
    probes: tuple[tuple[tuple[float, ...], float], ...]


def optimize_parameters(
    family: TrialFamily,
    h: Hamiltonian | None,
    objective: str,
    cfg: SearchConfig | None = None,
) -> ParameterSearchResult:
    """sup (or inf) over the control box of the inner extremum search.

    ``objective`` is ``"maximize-lower"`` or ``"minimize-upper"``.  Control
    spaces here are tiny, so each probe runs the full inner search; the probe
    record always contains ``RANDOM_PROBE_COUNT`` seeded random draws, which is
    what makes the dominance property checkable.  ``h`` is accepted for
    signature symmetry with ``bounds`` but the family's builder owns it.
    """
    if objective not in ("maximize-lower", "minimize-upper"):
        raise ValueError(f"unknown objective {objective!r}")
    cfg = cfg or SearchConfig()
    want_lower = objective == "maximize-lower"
    inner_cfg = replace(cfg, box=None)

    def score(lam: np.ndarray) -> tuple[float, BoundsResult]:
        fld = family.build(np.atleast_1d(lam))
        b = bounds_of_field(fld, inner_cfg)
        val = b.lower if want_lower else b.upper
        return val, b

    if not family.control_box:
        val, b = score(np.empty(0))
        return ParameterSearchResult(np.empty(0), b, objective, (((), val),))

    lo = np.array([c[0] for c in family.control_box])
    hi = np.array([c[1] for c in family.control_box])
    sign = -1.0 if want_lower else 1.0  # minimize sign*val
    rng = np.random.default_rng(cfg.rng_seed)

    cache: dict[tuple[float, ...], float] = {}
    probes: list[tuple[tuple[float, ...], float]] = []

    def objective_fn(lam: np.ndarray) -> float:
        key = tuple(float(v) for v in lam)
        if key not in cache:
            val, _ = score(np.array(key))
            cache[key] = val
            probes.append((key, val))
        v = cache[key]
        return np.inf if not np.isfinite(v) else sign * v

    random_probes = rng.uniform(lo, hi, size=(RANDOM_PROBE_COUNT, lo.shape[0]))
    corner_probes = [lo, hi, (lo + hi) / 2]
    start_vals = []
    for lam in list(random_probes) + corner_probes:
        start_vals.append((objective_fn(lam), tuple(lam)))
    start_vals.sort()
    if not np.isfinite(start_vals[0][0]):
        raise FamilyCannotBoundError(
            f"objective is infinite at every probed control vector of {family.label or 'family'}"
        )

    n_starts = min(cfg.multistart_count, len(start_vals))
    best_x, best_f = None, np.inf
    step0 = (hi - lo) / 8.0
    for _, key in start_vals[:n_starts]:
        x, f = _polish(objective_fn, np.array(key), family.control_box, step0.copy())
        if f < best_f:
            best_x, best_f = x, f
    val, b = score(best_x)
    return ParameterSearchResult(
        best_params=best_x,
        bounds=b,
        objective=objective,
        probes=tuple(probes),
    )
