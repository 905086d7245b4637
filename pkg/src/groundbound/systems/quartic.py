"""1D quartic oscillator ``V = r^2 q^2 (q^2 + eta d2) / 2`` with a
semiclassical-style base trial.

With ``w = q^2 + d2`` the base log-trial is

    S0 = -(r/3) w^{3/2} + (r d2 (1-eta)/2) w^{1/2} - (1/2) ln w
         - (r d2^2 / 2) w^{-1/2}

The first two terms kill the polynomial growth of ``V - S0'^2/2`` at
infinity, the log term kills its ``r w^{1/2}`` remainder against ``-S0''/2``,
and the last (inverse square-root) term shifts the resulting constant so the
asymptotic limit of the local energy is

    E_inf = (r^2 d2^2 / 2) (1 - (1 - eta)^2 / 4)

(= 0 for the double-well sign eta = -1), which beats the trivial lower bound
``min V``.  The trial decays like ``exp(-r |q|^3 / 3)``, so adding bounded
bumps never threatens normalizability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    AsymptoticLimit,
    Domain,
    Hamiltonian,
    LocalEnergyField,
    LogTrialFunction,
    make_log_field,
)

__all__ = ["QuarticOscillator", "quartic_system", "quartic_field"]

DEFAULT_BOX_HALF_WIDTH = 8.0


@dataclass(frozen=True)
class QuarticOscillator:
    """Potential parameters: stiffness ``r > 0``, sign ``eta``, offset ``delta2 > 0``."""

    r: float
    eta: int
    delta2: float

    def __post_init__(self) -> None:
        if self.r <= 0:
            raise ValueError("stiffness r must be positive")
        if self.eta not in (+1, -1):
            raise ValueError("eta must be +1 or -1")
        if self.delta2 <= 0:
            raise ValueError("delta2 must be positive (the log term needs w > 0)")

    def potential(self, qs: np.ndarray) -> np.ndarray:
        q = np.asarray(qs, dtype=float)
        if q.ndim == 2:
            q = q[:, 0]
        q2 = q * q
        return self.r**2 * q2 * (q2 + self.eta * self.delta2) / 2.0

    def min_potential(self) -> float:
        """min V: 0 at the origin for eta=+1, -r^2 d2^2/8 at q^2 = d2/2 for eta=-1."""
        if self.eta == +1:
            return 0.0
        return -(self.r**2) * self.delta2**2 / 8.0

    def asymptotic_local_energy(self) -> float:
        return (self.r**2 * self.delta2**2 / 2.0) * (1.0 - (1.0 - self.eta) ** 2 / 4.0)

    def box(self, half_width: float = DEFAULT_BOX_HALF_WIDTH) -> tuple[tuple[float, float], ...]:
        return ((-half_width, half_width),)

    def domain(self) -> Domain:
        return Domain(dimension=1, kind="unbounded", box=self.box())

    def hamiltonian(self) -> Hamiltonian:
        return Hamiltonian.isotropic(0.5, self.potential, self.domain())

    def _s_parts(self, q: np.ndarray):
        r, d2, eta = self.r, self.delta2, self.eta
        w = q * q + d2
        sw = np.sqrt(w)
        s0 = (
            -(r / 3.0) * w * sw
            + (r * d2 * (1.0 - eta) / 2.0) * sw
            - 0.5 * np.log(w)
            - (r * d2 * d2 / 2.0) / sw
        )
        # S0' = q * bracket
        bracket = (
            -r * sw
            + (r * d2 * (1.0 - eta) / 2.0) / sw
            - 1.0 / w
            + (r * d2 * d2 / 2.0) / (w * sw)
        )
        s1 = q * bracket
        q2 = q * q
        s2 = (
            -r * sw
            - r * q2 / sw
            + (r * d2 * (1.0 - eta) / 2.0) * (1.0 / sw - q2 / (w * sw))
            - 1.0 / w
            + 2.0 * q2 / (w * w)
            + (r * d2 * d2 / 2.0) * (1.0 / (w * sw) - 3.0 * q2 / (w * w * sw))
        )
        return s0, s1, s2

    def log_trial(self) -> LogTrialFunction:
        def flat(qs):
            q = np.asarray(qs, dtype=float)
            return q[:, 0] if q.ndim == 2 else q

        return LogTrialFunction(
            params=np.array([self.r, float(self.eta), self.delta2]),
            s=lambda qs: self._s_parts(flat(qs))[0],
            grad_s=lambda qs: self._s_parts(flat(qs))[1][:, None],
            lap_s=lambda qs: self._s_parts(flat(qs))[2],
            normalizable=True,
            label=f"quartic base trial (r={self.r}, eta={self.eta:+d}, d2={self.delta2})",
        )


def quartic_system(qo: QuarticOscillator) -> tuple[Hamiltonian, LogTrialFunction]:
    """The Hamiltonian and base trial, derivatives in closed form."""
    return qo.hamiltonian(), qo.log_trial()


def quartic_field(qo: QuarticOscillator, trial: LogTrialFunction | None = None) -> LocalEnergyField:
    """Local-energy field of the (possibly perturbed) trial.

    The asymptotic limit is a property of the base trial's tail and survives
    any bounded, localized perturbation, so it is attached unconditionally.
    """
    h = qo.hamiltonian()
    trial = trial or qo.log_trial()
    return make_log_field(
        h,
        trial,
        asymptotic_limits=(
            AsymptoticLimit("|q| -> inf (both tails)", qo.asymptotic_local_energy()),
        ),
        label=f"quartic local energy (r={qo.r}, eta={qo.eta:+d}, d2={qo.delta2})",
    )
