"""Domain types and the local-energy evaluation engine.

The central quantity is the local energy of a positive trial wavefunction
``phi`` under a Hamiltonian ``H``:

    E_loc(q) = (H phi)(q) / phi(q)

For a kinetic quadratic form ``sum_ij a_ij p_i p_j`` and ``S = ln phi`` this is

    E_loc(q) = V(q) - sum_ij a_ij (d_i d_j S + d_i S d_j S)

which reduces to ``V - (lap S + |grad S|^2) / 2`` for ``a = I/2``.  The global
infimum and supremum of this field bracket the ground-state energy, which is
what the rest of the package computes.

All evaluators are vectorized: a batch of points is an array of shape
``(n, dim)`` and scalar fields return shape ``(n,)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Point",
    "SingularSet",
    "AsymptoticLimit",
    "Domain",
    "Hamiltonian",
    "LogTrialFunction",
    "RatioTrialFunction",
    "LocalEnergyField",
    "BoundsResult",
    "CrossCheckReport",
    "SingularEvaluationError",
    "NonFiniteEnergyError",
    "local_energy_log",
    "local_energy_ratio",
    "local_energy_log_batch",
    "local_energy_ratio_batch",
    "cross_check_field",
    "derivative_consistency",
    "make_log_field",
    "make_ratio_field",
]

#: Half-width of the tube around a declared singular set inside which direct
#: evaluation is refused and the declared limit is used instead.
SINGULAR_TUBE_EPS = 1e-6


class SingularEvaluationError(ValueError):
    """Evaluation was requested on or inside a declared singular set."""


class NonFiniteEnergyError(ArithmeticError):
    """The local energy came out non-finite at a supposedly regular point."""


def as_batch(q, dim: int) -> np.ndarray:
    """Coerce a single point or a batch to shape ``(n, dim)`` float array."""
    arr = np.asarray(q, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Point:
    """A configuration-space point with finite coordinates."""

    coords: np.ndarray

    def __init__(self, coords) -> None:
        arr = np.atleast_1d(np.asarray(coords, dtype=float))
        if arr.ndim != 1:
            raise ValueError("a point is a flat coordinate vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def _point_array(q, dim: int) -> np.ndarray:
    if isinstance(q, Point):
        arr = q.coords
    else:
        arr = np.atleast_1d(np.asarray(q, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"expected a point of dimension {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SingularSet:
    """A declared singular set with its analytically known limits.

    ``tube(qs)`` returns a boolean mask marking points inside the exclusion
    tube.  ``limit`` is the uniform limit of the local energy on the set when
    one exists; ``min_limit`` / ``max_limit`` are the candidates contributed to
    a global minimum / maximum search (they default to ``limit``).  ``None``
    means the set contributes no candidate on that side.
    """

    name: str
    tube: Callable[[np.ndarray], np.ndarray]
    limit: float | None = None
    min_limit: float | None = None
    max_limit: float | None = None

    def __post_init__(self) -> None:
        if self.min_limit is None and self.limit is not None:
            object.__setattr__(self, "min_limit", self.limit)
        if self.max_limit is None and self.limit is not None:
            object.__setattr__(self, "max_limit", self.limit)


@dataclass(frozen=True)
class AsymptoticLimit:
    """Directional limit of the local energy as ``|q| -> inf``."""

    name: str
    value: float


@dataclass(frozen=True)
class Domain:
    """Configuration space, either unbounded or cut out by ``b(q) < 0``.

    ``box`` is the per-axis search window; for bounded domains it must contain
    the closure of the region, for unbounded ones it is the truncation window
    justified by the field's asymptotic limits.
    """

    dimension: int
    kind: str  # "unbounded" | "bounded"
    constraint: Callable[[np.ndarray], np.ndarray] | None = None
    box: tuple[tuple[float, float], ...] | None = None
    excluded_singular_sets: tuple[SingularSet, ...] = ()

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.kind not in ("unbounded", "bounded"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "bounded" and self.constraint is None:
            raise ValueError("a bounded domain requires a constraint field")
        if self.box is not None and len(self.box) != self.dimension:
            raise ValueError("box must give (lo, hi) per axis")

    def interior_mask(self, qs: np.ndarray) -> np.ndarray:
        """Strict interior: finite coordinates and ``b(q) < 0`` if bounded."""
        qs = as_batch(qs, self.dimension)
        mask = np.all(np.isfinite(qs), axis=1)
        if self.constraint is not None:
            b = np.asarray(self.constraint(qs), dtype=float)
            mask &= b < 0.0
        return mask

    def singular_mask(self, qs: np.ndarray) -> np.ndarray:
        qs = as_batch(qs, self.dimension)
        mask = np.zeros(qs.shape[0], dtype=bool)
        for s in self.excluded_singular_sets:
            mask |= np.asarray(s.tube(qs), dtype=bool)
        return mask

    def searchable_mask(self, qs: np.ndarray) -> np.ndarray:
        """Interior points outside every declared singular tube."""
        return self.interior_mask(qs) & ~self.singular_mask(qs)


@dataclass(frozen=True)
class Hamiltonian:
    """Kinetic quadratic form ``sum_ij a_ij p_i p_j`` plus a potential.

    ``inverse_mass_form`` is the symmetric positive-definite matrix ``a`` in
    units of inverse mass; ``H = -Delta/2 + V`` corresponds to ``a = I/2``.
    """

    inverse_mass_form: np.ndarray
    potential: Callable[[np.ndarray], np.ndarray]
    domain: Domain

    def __post_init__(self) -> None:
        a = np.asarray(self.inverse_mass_form, dtype=float)
        if a.shape != (self.domain.dimension, self.domain.dimension):
            raise ValueError("inverse_mass_form must be dim x dim")
        if not np.array_equal(a, a.T):
            raise ValueError("inverse_mass_form must be symmetric")
        if np.linalg.eigvalsh(a).min() <= 0.0:
            raise ValueError("inverse_mass_form must be positive definite")
        object.__setattr__(self, "inverse_mass_form", a)

    @classmethod
    def isotropic(cls, coefficient: float, potential, domain: Domain) -> "Hamiltonian":
        """Hamiltonian with ``a = coefficient * I`` (``1/2`` for ``-Delta/2 + V``)."""
        return cls(coefficient * np.eye(domain.dimension), potential, domain)

    @property
    def isotropic_coefficient(self) -> float | None:
        """The scalar ``c`` if ``a == c*I`` exactly, else ``None``."""
        a = self.inverse_mass_form
        c = a[0, 0]
        return c if np.array_equal(a, c * np.eye(a.shape[0])) else None


@dataclass(frozen=True)
class LogTrialFunction:
    """Trial state stored as ``S = ln phi`` with analytic derivatives.

    ``hess_s`` (full Hessian, shape ``(n, dim, dim)``) is only needed when the
    Hamiltonian's inverse-mass form has off-diagonal entries.
    """

    params: np.ndarray
    s: Callable[[np.ndarray], np.ndarray]
    grad_s: Callable[[np.ndarray], np.ndarray]
    lap_s: Callable[[np.ndarray], np.ndarray]
    hess_s: Callable[[np.ndarray], np.ndarray] | None = None
    normalizable: bool = True
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", np.atleast_1d(np.asarray(self.params, dtype=float)))


@dataclass(frozen=True)
class RatioTrialFunction:
    """Trial state given directly as ``phi`` and ``H phi`` (both analytic).

    Needed where ``phi`` vanishes (billiard boundaries); ``phi`` must be
    positive on the interior except on declared zero sets.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    h_phi: Callable[[np.ndarray], np.ndarray]
    label: str = ""


@dataclass(frozen=True)
class LocalEnergyField:
    """Evaluable scalar field ``q -> E_loc(q)`` with its declared structure.

    ``evaluate`` is the primary representation; ``alternates`` hold other
    analytically equal representations (used by :func:`cross_check_field`).
    """

    domain: Domain
    evaluate: Callable[[np.ndarray], np.ndarray]
    alternates: tuple[Callable[[np.ndarray], np.ndarray], ...] = ()
    singularities: tuple[SingularSet, ...] = ()
    asymptotic_limits: tuple[AsymptoticLimit, ...] = ()
    label: str = ""

    def singular_mask(self, qs: np.ndarray) -> np.ndarray:
        qs = as_batch(qs, self.domain.dimension)
        mask = np.zeros(qs.shape[0], dtype=bool)
        for s in self.singularities:
            mask |= np.asarray(s.tube(qs), dtype=bool)
        return mask

    def valid_mask(self, qs: np.ndarray) -> np.ndarray:
        return self.domain.interior_mask(qs) & ~self.singular_mask(qs)

    def evaluate_with_limits(self, qs: np.ndarray, singular_as_nan: bool = False) -> np.ndarray:
        """Evaluate everywhere, filling singular tubes with declared limits.

        Tube points get the set's uniform ``limit`` when declared, otherwise
        (or when ``singular_as_nan``) NaN.  Exterior points are NaN.
        """
        qs = as_batch(qs, self.domain.dimension)
        out = np.full(qs.shape[0], np.nan)
        ok = self.valid_mask(qs)
        if ok.any():
            out[ok] = self.evaluate(qs[ok])
        if not singular_as_nan:
            interior = self.domain.interior_mask(qs)
            for s in self.singularities:
                if s.limit is None:
                    continue
                inside = np.asarray(s.tube(qs), dtype=bool) & interior
                out[inside] = s.limit
        return out


@dataclass(frozen=True)
class ResolutionCaveat:
    """Record of the search resolution under which extrema were certified."""

    grid_points_per_axis: int
    refinement_levels: int
    multistart_count: int
    box: tuple[tuple[float, float], ...]
    final_grid_spacing: float

    def as_dict(self) -> dict:
        return {
            "grid_points_per_axis": self.grid_points_per_axis,
            "refinement_levels": self.refinement_levels,
            "multistart_count": self.multistart_count,
            "box": [list(b) for b in self.box],
            "final_grid_spacing": self.final_grid_spacing,
        }


@dataclass(frozen=True)
class BoundsResult:
    """Two-sided bracket of the ground-state energy from one or two trials."""

    lower: float
    upper: float
    lower_witness: "object"  # ExtremumReport; kept loose to avoid an import cycle
    upper_witness: "object"
    resolution_caveat: ResolutionCaveat | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


@dataclass(frozen=True)
class CrossCheckReport:
    """Outcome of sampling two representations of the same field."""

    n_requested: int
    n_used: int
    max_rel_discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_discrepancy <= self.tolerance


# ---------------------------------------------------------------------------
# local-energy evaluation


def local_energy_log_batch(h: Hamiltonian, trial: LogTrialFunction, qs: np.ndarray) -> np.ndarray:
    """Vectorized ``V - sum_ij a_ij (d_i d_j S + d_i S d_j S)``; no validity checks."""
    qs = as_batch(qs, h.domain.dimension)
    v = np.asarray(h.potential(qs), dtype=float)
    g = np.asarray(trial.grad_s(qs), dtype=float)
    c = h.isotropic_coefficient
    if c is not None:
        lap = np.asarray(trial.lap_s(qs), dtype=float)
        return v - c * (lap + np.sum(g * g, axis=1))
    if trial.hess_s is None:
        raise ValueError(
            "trial supplies no Hessian but the inverse-mass form is not a multiple "
            "of the identity; the Laplacian alone cannot contract against it"
        )
    hess = np.asarray(trial.hess_s(qs), dtype=float)
    a = h.inverse_mass_form
    kin = np.einsum("ij,nij->n", a, hess) + np.einsum("ij,ni,nj->n", a, g, g)
    return v - kin


def local_energy_log(h: Hamiltonian, trial: LogTrialFunction, q) -> float:
    """Local energy of ``phi = exp(S)`` at one interior, non-singular point."""
    arr = _point_array(q, h.domain.dimension)[None, :]
    if not h.domain.interior_mask(arr)[0]:
        raise SingularEvaluationError(f"point {arr[0]} is not interior to the domain")
    if h.domain.singular_mask(arr)[0]:
        raise SingularEvaluationError(
            f"point {arr[0]} lies in a declared singular tube; use the declared limit"
        )
    val = float(local_energy_log_batch(h, trial, arr)[0])
    if not np.isfinite(val):
        raise NonFiniteEnergyError(
            f"local energy is {val} at {arr[0]}; trial and Hamiltonian are inconsistent"
        )
    return val


def local_energy_ratio_batch(trial: RatioTrialFunction, qs: np.ndarray) -> np.ndarray:
    """Vectorized ``(H phi)(q) / phi(q)``; zero denominators yield inf/nan."""
    qs = np.asarray(qs, dtype=float)
    phi = np.asarray(trial.phi(qs), dtype=float)
    hphi = np.asarray(trial.h_phi(qs), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return hphi / phi


def local_energy_ratio(trial: RatioTrialFunction, q) -> float:
    """Local energy ``H phi / phi`` at one point where ``phi`` does not vanish."""
    arr = np.atleast_1d(np.asarray(q, dtype=float))[None, :]
    phi = float(np.asarray(trial.phi(arr), dtype=float)[0])
    if phi == 0.0:
        raise SingularEvaluationError(
            f"phi vanishes at {arr[0]} (boundary or nodal point); consult the "
            "field's singularity annotations"
        )
    return float(np.asarray(trial.h_phi(arr), dtype=float)[0]) / phi


# ---------------------------------------------------------------------------
# field construction helpers


def make_log_field(
    h: Hamiltonian,
    trial: LogTrialFunction,
    singularities: tuple[SingularSet, ...] = (),
    asymptotic_limits: tuple[AsymptoticLimit, ...] = (),
    alternates: tuple = (),
    label: str = "",
) -> LocalEnergyField:
    def _eval(qs: np.ndarray) -> np.ndarray:
        return local_energy_log_batch(h, trial, qs)

    return LocalEnergyField(
        domain=h.domain,
        evaluate=_eval,
        alternates=tuple(alternates),
        singularities=tuple(singularities) or h.domain.excluded_singular_sets,
        asymptotic_limits=tuple(asymptotic_limits),
        label=label or (trial.label and f"log-form local energy of {trial.label}"),
    )


def make_ratio_field(
    domain: Domain,
    trial: RatioTrialFunction,
    singularities: tuple[SingularSet, ...] = (),
    asymptotic_limits: tuple[AsymptoticLimit, ...] = (),
    alternates: tuple = (),
    label: str = "",
) -> LocalEnergyField:
    def _eval(qs: np.ndarray) -> np.ndarray:
        return local_energy_ratio_batch(trial, qs)

    return LocalEnergyField(
        domain=domain,
        evaluate=_eval,
        alternates=tuple(alternates),
        singularities=tuple(singularities) or domain.excluded_singular_sets,
        asymptotic_limits=tuple(asymptotic_limits),
        label=label or (trial.label and f"ratio-form local energy of {trial.label}"),
    )


def sample_interior(
    domain: Domain,
    n: int,
    rng: np.random.Generator,
    extra_mask: Callable[[np.ndarray], np.ndarray] | None = None,
    max_tries: int = 200,
) -> np.ndarray:
    """Rejection-sample ``n`` strictly interior (and unmasked) points."""
    if domain.box is None:
        raise ValueError("domain has no search box to sample from")
    lo = np.array([b[0] for b in domain.box])
    hi = np.array([b[1] for b in domain.box])
    got: list[np.ndarray] = []
    total = 0
    for _ in range(max_tries):
        cand = rng.uniform(lo, hi, size=(max(4 * n, 64), domain.dimension))
        ok = domain.searchable_mask(cand)
        if extra_mask is not None:
            ok &= np.asarray(extra_mask(cand), dtype=bool)
        pts = cand[ok]
        if pts.size:
            got.append(pts)
            total += pts.shape[0]
        if total >= n:
            return np.concatenate(got, axis=0)[:n]
    raise SingularEvaluationError(
        "failed to sample interior points; domain and singularity declarations "
        "are likely inconsistent"
    )


def cross_check_field(
    f: LocalEnergyField,
    n_samples: int,
    seed: int,
    tolerance: float = 1e-8,
) -> CrossCheckReport:
    """Sample interior points and compare all representations of the field.

    The representations are analytically equal, so the maximum relative
    discrepancy over the sample is itself the oracle: the check passes iff it
    stays at rounding level (default ``1e-8``).
    """
    if not f.alternates:
        raise ValueError("field has a single representation; nothing to cross-check")
    rng = np.random.default_rng(seed)
    pts = sample_interior(f.domain, n_samples, rng, extra_mask=lambda qs: ~f.singular_mask(qs))
    reps = [np.asarray(f.evaluate(pts), dtype=float)]
    reps += [np.asarray(alt(pts), dtype=float) for alt in f.alternates]
    worst = 0.0
    for other in reps[1:]:
        scale = np.maximum(np.maximum(np.abs(reps[0]), np.abs(other)), 1e-300)
        worst = max(worst, float(np.max(np.abs(reps[0] - other) / scale)))
    return CrossCheckReport(
        n_requested=n_samples, n_used=pts.shape[0], max_rel_discrepancy=worst, tolerance=tolerance
    )


# ---------------------------------------------------------------------------
# finite-difference consistency of supplied derivatives


def derivative_consistency(
    trial: LogTrialFunction,
    qs: np.ndarray,
    h_grad: float = 1e-5,
    h_lap: float = 1e-4,
) -> tuple[float, float]:
    """Max relative error of ``grad_s`` vs central differences of ``s`` and of
    ``lap_s`` vs the finite-difference divergence of ``grad_s``.

    Step sizes follow the usual central-difference optimum; the returned pair
    is compared against (1e-6, 1e-5) by the shipped-trial consistency tests.
    """
    qs = np.asarray(qs, dtype=float)
    n, dim = qs.shape
    g = np.asarray(trial.grad_s(qs), dtype=float)
    lap = np.asarray(trial.lap_s(qs), dtype=float)

    g_fd = np.empty_like(g)
    div_fd = np.zeros(n)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        g_fd[:, i] = (trial.s(qs + h_grad * e) - trial.s(qs - h_grad * e)) / (2 * h_grad)
        gp = np.asarray(trial.grad_s(qs + h_lap * e), dtype=float)[:, i]
        gm = np.asarray(trial.grad_s(qs - h_lap * e), dtype=float)[:, i]
        div_fd += (gp - gm) / (2 * h_lap)

    g_scale = np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1.0)
    grad_err = float(np.max(np.abs(g - g_fd) / g_scale))
    lap_scale = np.maximum(np.abs(lap), 1.0)
    lap_err = float(np.max(np.abs(lap - div_fd) / lap_scale))
    return grad_err, lap_err
