"""Independent finite-difference eigensolvers for reference ground energies.

These share no code with the local-energy machinery: the 1D path discretizes
``-(1/2) d^2/dq^2 + V`` on a uniform grid and finds the lowest eigenvalue of
the symmetric tridiagonal matrix by bisection on its Sturm-sequence negative
count; the 2D path applies inverse power iteration to the 5-point Dirichlet
Laplacian on a masked grid, with conjugate-gradient inner solves (the operator
is symmetric positive definite).  Both Richardson-extrapolate over a grid pair
(the 1D scheme is second order; the masked 2D boundary is staircase-limited,
so its pair difference is treated as first order).  The results are what the
bound inequalities are validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Domain

__all__ = [
    "Grid1D",
    "Grid2D",
    "OracleResult",
    "BoxTooSmallError",
    "ConvergenceError",
    "solve_1d_ground_state",
    "solve_2d_dirichlet_ground_state",
    "sturm_count_below",
]

EDGE_DECAY_FRACTION = 1e-8
BOX_RETRIES = 3


class BoxTooSmallError(RuntimeError):
    """The eigenfunction does not decay at the truncation edges."""


class ConvergenceError(RuntimeError):
    """An inner iterative solve exhausted its budget."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n points (edges included)."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 100:
            raise ValueError("use at least 100 grid points")
        if not self.x_max > self.x_min:
            raise ValueError("empty interval")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class Grid2D:
    """Axis-aligned box with n points per axis; the domain mask comes from
    the Domain's constraint (interior where b < 0)."""

    box: tuple[tuple[float, float], tuple[float, float]]
    n: int

    def __post_init__(self) -> None:
        if self.n < 32:
            raise ValueError("use at least 32 points per axis")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        (x0, x1), (y0, y1) = self.box
        return np.linspace(x0, x1, self.n), np.linspace(y0, y1, self.n)

    @property
    def spacings(self) -> tuple[float, float]:
        (x0, x1), (y0, y1) = self.box
        return (x1 - x0) / (self.n - 1), (y1 - y0) / (self.n - 1)


@dataclass(frozen=True)
class OracleResult:
    """Extrapolated eigenvalue estimate with a self-consistency error bar."""

    energy: float
    error_bar: float
    coarse_value: float
    fine_value: float
    detail: str = ""


# ---------------------------------------------------------------------------
# 1D: Sturm-sequence bisection on the tridiagonal discretization


def sturm_count_below(diag: np.ndarray, off: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix below x.

    Standard negative-count recurrence q_i = d_i - x - e_{i-1}^2 / q_{i-1}
    with a tiny floor guarding exact zeros.
    """
    tiny = 1e-300
    count = 0
    q = diag[0] - x
    if q == 0.0:
        q = tiny
    if q < 0.0:
        count += 1
    off2 = off * off
    for i in range(1, diag.shape[0]):
        q = diag[i] - x - off2[i - 1] / q
        if q == 0.0:
            q = tiny
        if q < 0.0:
            count += 1
    return count


def _lowest_eigenvalue_tridiag(diag: np.ndarray, off: np.ndarray) -> float:
    absoff = np.abs(off)
    radius = np.zeros_like(diag)
    radius[:-1] += absoff
    radius[1:] += absoff
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    # bisection on the Sturm count: lowest eigenvalue = inf{x : count(x) >= 1}
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sturm_count_below(diag, off, mid) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _tridiag_solve(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = diag.shape[0]
    c = np.empty(n - 1)
    d = np.empty(n)
    c[0] = off[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - off[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = off[i] / denom
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        d[i] -= c[i] * d[i + 1]
    return d


def _ground_vector(diag: np.ndarray, off: np.ndarray, e0: float) -> np.ndarray:
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(diag.shape[0])
    v /= np.linalg.norm(v)
    shift = e0 - 1e-10 * max(1.0, abs(e0))
    for _ in range(4):
        v = _tridiag_solve(diag - shift, off, v)
        v /= np.linalg.norm(v)
    return v


def _solve_1d_once(
    potential: Callable[[np.ndarray], np.ndarray],
    grid: Grid1D,
    dirichlet_edges: tuple[bool, bool],
) -> tuple[float, np.ndarray]:
    x = grid.points()[1:-1]  # unknowns at interior nodes, psi = 0 at edges
    h = grid.spacing
    v = np.asarray(potential(x), dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("potential must be finite on the interior grid")
    diag = 1.0 / (h * h) + v
    off = np.full(x.shape[0] - 1, -0.5 / (h * h))
    e0 = _lowest_eigenvalue_tridiag(diag, off)
    vec = _ground_vector(diag, off, e0)
    peak = float(np.max(np.abs(vec)))
    for side, hard in enumerate(dirichlet_edges):
        if hard:
            continue  # a physical wall, no decay requirement
        edge_amp = abs(vec[0] if side == 0 else vec[-1])
        if edge_amp > EDGE_DECAY_FRACTION * peak:
            raise BoxTooSmallError(
                f"eigenfunction amplitude {edge_amp/peak:.2e} of peak at "
                f"{'left' if side == 0 else 'right'} edge; enlarge the box"
            )
    return e0, vec


def solve_1d_ground_state(
    potential: Callable[[np.ndarray], np.ndarray],
    grid: Grid1D,
    dirichlet_edges: tuple[bool, bool] = (False, False),
) -> OracleResult:
    """Lowest eigenvalue of ``-(1/2) d^2/dq^2 + V`` on the truncated line.

    Solves on the given grid and on its nested refinement (doubled
    resolution), Richardson-extrapolates the O(h^2) scheme, and reports
    ``|fine - coarse| / 3`` as the error bar.  Soft edges must show the
    eigenfunction decayed below 1e-8 of its peak; otherwise the box grows by
    half (a bounded number of times) and the solve retries.
    """
    g = grid
    for attempt in range(BOX_RETRIES + 1):
        try:
            coarse, _ = _solve_1d_once(potential, g, dirichlet_edges)
            fine_grid = Grid1D(g.x_min, g.x_max, 2 * g.n - 1)
            fine, _ = _solve_1d_once(potential, fine_grid, dirichlet_edges)
            value = (4.0 * fine - coarse) / 3.0
            return OracleResult(
                energy=value,
                error_bar=abs(fine - coarse) / 3.0,
                coarse_value=coarse,
                fine_value=fine,
                detail=f"box [{g.x_min}, {g.x_max}], n = {g.n}/{fine_grid.n}",
            )
        except BoxTooSmallError:
            if attempt == BOX_RETRIES:
                raise
            width = g.x_max - g.x_min
            grow_lo = 0.0 if dirichlet_edges[0] else 0.25 * width
            grow_hi = 0.0 if dirichlet_edges[1] else 0.25 * width
            g = Grid1D(g.x_min - grow_lo, g.x_max + grow_hi, g.n)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# 2D: masked 5-point Laplacian, inverse power iteration with CG solves


def _mask_from_domain(domain: Domain, grid: Grid2D) -> np.ndarray:
    xs, ys = grid.axes()
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    mask = domain.interior_mask(pts).reshape(grid.n, grid.n)
    # Dirichlet ring: never let mask touch the array border
    mask[0, :] = mask[-1, :] = False
    mask[:, 0] = mask[:, -1] = False
    return mask


def _assert_connected(mask: np.ndarray) -> None:
    """Flood fill from one interior node; every masked node must be reached."""
    if not mask.any():
        raise ValueError("empty interior mask")
    seen = np.zeros_like(mask)
    start = tuple(np.argwhere(mask)[0])
    stack = [start]
    seen[start] = True
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if mask[ni, nj] and not seen[ni, nj]:
                seen[ni, nj] = True
                stack.append((ni, nj))
    if seen.sum() != mask.sum():
        raise ValueError("interior mask is not connected")


def _apply_h(u: np.ndarray, mask: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """H u for H = -(1/2) Laplacian with Dirichlet conditions off the mask."""
    out = u * (1.0 / (hx * hx) + 1.0 / (hy * hy))
    out[1:-1, :] -= 0.5 * (u[2:, :] + u[:-2, :]) / (hx * hx)
    out[:, 1:-1] -= 0.5 * (u[:, 2:] + u[:, :-2]) / (hy * hy)
    out *= mask
    return out


def _cg_solve(
    apply_a: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    x0: np.ndarray,
    tol: float,
    max_iter: int,
) -> np.ndarray:
    x = x0.copy()
    r = b - apply_a(x)
    p = r.copy()
    rs = float(np.vdot(r, r))
    b_norm = math.sqrt(float(np.vdot(b, b))) or 1.0
    for _ in range(max_iter):
        if math.sqrt(rs) <= tol * b_norm:
            return x
        ap = apply_a(p)
        alpha = rs / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise ConvergenceError(f"conjugate gradient exhausted {max_iter} iterations")


def _solve_2d_once(domain: Domain, grid: Grid2D, x0: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    mask = _mask_from_domain(domain, grid)
    _assert_connected(mask)
    hx, hy = grid.spacings

    def apply_a(u: np.ndarray) -> np.ndarray:
        return _apply_h(u, mask, hx, hy)

    if x0 is None:
        u = mask.astype(float)
    else:
        u = x0 * mask
    u /= np.linalg.norm(u)
    lam = float(np.vdot(u, apply_a(u)))
    rel_change = 1.0
    for _ in range(200):
        # inexact inverse iteration: the Rayleigh quotient error is quadratic
        # in the eigenvector error, so solves can stay loose; warm-start at
        # u/lam, the scale the converged solve would have
        tol = min(1e-6, max(5e-10, 1e-3 * rel_change))
        u_new = _cg_solve(apply_a, u, u / lam, tol=tol, max_iter=40 * grid.n)
        u_new *= mask
        u_new /= np.linalg.norm(u_new)
        lam_new = float(np.vdot(u_new, apply_a(u_new)))
        rel_change = abs(lam_new - lam) / max(1.0, abs(lam_new))
        u, lam = u_new, lam_new
        if rel_change <= 1e-7:
            break
    else:
        raise ConvergenceError("inverse power iteration did not settle")
    return lam, u


def _interp_double(u: np.ndarray, n_fine: int) -> np.ndarray:
    """Bilinear warm start for the doubled grid."""
    n = u.shape[0]
    xi = np.linspace(0, n - 1, n_fine)
    i0 = np.clip(xi.astype(int), 0, n - 2)
    t = xi - i0
    rows = u[i0, :] * (1 - t)[:, None] + u[i0 + 1, :] * t[:, None]
    cols = rows[:, i0] * (1 - t)[None, :] + rows[:, i0 + 1] * t[None, :]
    return cols


def solve_2d_dirichlet_ground_state(domain: Domain, grid: Grid2D) -> OracleResult:
    """Lowest Dirichlet eigenvalue of ``-(1/2) Laplacian`` on ``b < 0``.

    Solves on ``n`` and ``2n`` points per axis, climbing a grid pyramid so
    each level starts from the interpolated eigenvector of the previous one
    (only the final pair enters the result).  The staircase mask makes the
    leading eigenvalue error O(h), so the pair is extrapolated linearly and
    ``|fine - coarse|`` is reported as the error bar.
    """
    if domain.kind != "bounded":
        raise ValueError("the 2D oracle needs a bounded domain")
    sizes = [grid.n]
    while sizes[0] > 96:
        sizes.insert(0, (sizes[0] + 1) // 2)
    u = None
    for n in sizes:
        level = Grid2D(grid.box, n)
        coarse, vec = _solve_2d_once(domain, level, x0=None if u is None else _interp_double(u, n))
        u = vec
    fine_grid = Grid2D(grid.box, 2 * grid.n)
    fine, _ = _solve_2d_once(domain, fine_grid, x0=_interp_double(u, fine_grid.n))
    value = 2.0 * fine - coarse
    return OracleResult(
        energy=value,
        error_bar=abs(fine - coarse),
        coarse_value=coarse,
        fine_value=fine,
        detail=f"box {grid.box}, n = {grid.n}/{fine_grid.n} per axis",
    )
