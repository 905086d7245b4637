"""Dense-map multivariate polynomials with exact arithmetic.

Coefficients can be any Python numbers (floats, Fractions, ints); arithmetic
never leaves the coefficient ring, so identities like the Laplacian of a
product can be checked coefficient by coefficient.  The one non-arithmetic
operation is :func:`barta_polynomial_construction`, which searches for
polynomials ``f, g`` with ``Delta(f*b) = g*b`` so that the ratio trial
``phi = f*b`` on the region ``b < 0`` has the bounded local energy
``-g/(2f)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "MultivariatePolynomial",
    "BartaConstructionError",
    "barta_polynomial_construction",
]


class BartaConstructionError(RuntimeError):
    """No (f, g) with Delta(f*b) = g*b exists at the requested degree."""


def _clean(coeffs: Mapping[tuple, object]) -> dict:
    return {tuple(int(p) for p in e): c for e, c in coeffs.items() if c != 0}


@dataclass(frozen=True)
class MultivariatePolynomial:
    """Polynomial as a map from exponent tuples to coefficients."""

    dimension: int
    coeffs: dict

    def __post_init__(self) -> None:
        cleaned = _clean(self.coeffs)
        for e in cleaned:
            if len(e) != self.dimension or any(p < 0 for p in e):
                raise ValueError(f"bad exponent tuple {e} for dimension {self.dimension}")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def zero(cls, dimension: int) -> "MultivariatePolynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, dimension: int, value) -> "MultivariatePolynomial":
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, axis: int) -> "MultivariatePolynomial":
        e = [0] * dimension
        e[axis] = 1
        return cls(dimension, {tuple(e): 1})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return MultivariatePolynomial(self.dimension, out)

    def __neg__(self):
        return MultivariatePolynomial(self.dimension, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultivariatePolynomial(self.dimension, out)

    __rmul__ = __mul__
    __radd__ = __add__

    def _coerce(self, other) -> "MultivariatePolynomial":
        if isinstance(other, MultivariatePolynomial):
            if other.dimension != self.dimension:
                raise ValueError("dimension mismatch")
            return other
        return MultivariatePolynomial.constant(self.dimension, other)

    def partial(self, axis: int) -> "MultivariatePolynomial":
        out: dict = {}
        for e, c in self.coeffs.items():
            p = e[axis]
            if p == 0:
                continue
            e2 = list(e)
            e2[axis] = p - 1
            out[tuple(e2)] = out.get(tuple(e2), 0) + p * c
        return MultivariatePolynomial(self.dimension, out)

    def laplacian(self) -> "MultivariatePolynomial":
        out = MultivariatePolynomial.zero(self.dimension)
        for axis in range(self.dimension):
            out = out + self.partial(axis).partial(axis)
        return out

    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __call__(self, qs: np.ndarray) -> np.ndarray:
        qs = np.asarray(qs, dtype=float)
        if qs.ndim == 1:
            qs = qs[None, :]
        out = np.zeros(qs.shape[0])
        for e, c in self.coeffs.items():
            term = np.full(qs.shape[0], float(c))
            for axis, p in enumerate(e):
                if p:
                    term *= qs[:, axis] ** p
            out += term
        return out

    def max_abs_coeff_diff(self, other: "MultivariatePolynomial") -> float:
        diff = self - other
        return max((abs(float(c)) for c in diff.coeffs.values()), default=0.0)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        names = "xyzw" if self.dimension <= 4 else None
        parts = []
        for e, c in sorted(self.coeffs.items()):
            mono = "*".join(
                (names[i] if names else f"q{i}") + (f"^{p}" if p > 1 else "")
                for i, p in enumerate(e)
                if p
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _monomials(dimension: int, max_degree: int) -> list[tuple]:
    out = []
    for e in itertools.product(range(max_degree + 1), repeat=dimension):
        if sum(e) <= max_degree:
            out.append(e)
    return sorted(out)


def barta_polynomial_construction(
    b: MultivariatePolynomial,
    n: int,
    interior_point: np.ndarray | None = None,
    interior_samples: np.ndarray | None = None,
    residual_tol: float = 1e-10,
) -> tuple[MultivariatePolynomial, MultivariatePolynomial]:
    """Find polynomials ``f`` (degree <= n) and ``g`` (degree <= n-2) with
    ``Delta(f*b) = g*b`` exactly.

    The identity is linear in the unknown coefficients, so it becomes a
    homogeneous least-squares system; the scale is pinned by ``f = 1`` at
    ``interior_point``.  Solvability is decided by the residual threshold, and
    the returned ``f`` is checked to be nonvanishing on the interior by grid
    sampling over ``interior_samples`` (points with ``b < 0``).

    Raises :class:`BartaConstructionError` when no solution exists at this
    degree or when every candidate ``f`` vanishes somewhere inside; the caller
    raises ``n`` and retries.
    """
    if n < 2:
        raise BartaConstructionError(
            f"degree n={n} leaves no room for g (needs degree n-2 >= 0 and a "
            "nonconstant Delta(f*b) match); raise n"
        )
    dim = b.dimension
    f_mono = _monomials(dim, n)
    g_mono = _monomials(dim, n - 2)

    # residual polynomial Delta(m*b) - mu*b per unknown, as matrix columns
    rows: dict[tuple, int] = {}

    def row_of(e: tuple) -> int:
        if e not in rows:
            rows[e] = len(rows)
        return rows[e]

    columns = []
    for m in f_mono:
        poly = (MultivariatePolynomial(dim, {m: 1}) * b).laplacian()
        columns.append({e: float(c) for e, c in poly.coeffs.items()})
    for mu in g_mono:
        poly = MultivariatePolynomial(dim, {mu: 1}) * b
        columns.append({e: -float(c) for e, c in poly.coeffs.items()})
    for col in columns:
        for e in col:
            row_of(e)

    n_rows, n_cols = len(rows), len(columns)
    a = np.zeros((n_rows + 1, n_cols))
    for j, col in enumerate(columns):
        for e, c in col.items():
            a[rows[e], j] = c
    rhs = np.zeros(n_rows + 1)

    # normalization row: f(interior_point) = 1
    if interior_point is None:
        interior_point = np.zeros(dim)
    interior_point = np.asarray(interior_point, dtype=float)
    for j, m in enumerate(f_mono):
        a[n_rows, j] = float(np.prod(interior_point ** np.array(m)))
    rhs[n_rows] = 1.0

    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    residual = float(np.max(np.abs(a @ sol - rhs)))
    if residual > residual_tol:
        raise BartaConstructionError(
            f"no Delta(f*b) = g*b solution at degree n={n} "
            f"(least-squares residual {residual:.3e}); raise n"
        )

    f = MultivariatePolynomial(dim, {m: sol[j] for j, m in enumerate(f_mono)})
    g = MultivariatePolynomial(dim, {mu: sol[len(f_mono) + j] for j, mu in enumerate(g_mono)})

    if interior_samples is not None:
        pts = np.asarray(interior_samples, dtype=float)
        inside = pts[b(pts) < 0]
        if inside.size:
            fv = f(inside)
            if not (np.all(fv > 0) or np.all(fv < 0)):
                # f vanishes or changes sign inside: unusable as phi = f*b
                raise BartaConstructionError(
                    f"f vanishes on the interior at degree n={n}; raise n"
                )
    return f, g
