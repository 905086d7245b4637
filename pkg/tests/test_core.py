import math

import numpy as np
import pytest

from groundbound.core import (
    BoundsResult,
    Domain,
    Hamiltonian,
    LocalEnergyField,
    LogTrialFunction,
    NonFiniteEnergyError,
    Point,
    RatioTrialFunction,
    SingularEvaluationError,
    SingularSet,
    cross_check_field,
    derivative_consistency,
    local_energy_log,
    local_energy_ratio,
)
from groundbound.systems import (
    MagneticHydrogen,
    QuarticOscillator,
    coulomb_log_trial,
    helium_system,
    hydrogen_hamiltonian_3d,
    hydrogen_trial_3d,
    magnetic_trial,
    quartic_system,
)

EXPECTED_QUARTIC_ELOC_AT_ZERO = -7.0 / 16.0


def harmonic_hamiltonian():
    dom = Domain(dimension=1, kind="unbounded", box=((-10.0, 10.0),))
    return Hamiltonian(np.array([[0.5]]), lambda qs: 0.5 * qs[:, 0] ** 2, dom)


def harmonic_trial():
    return LogTrialFunction(
        params=np.array([1.0]),
        s=lambda qs: -0.5 * qs[:, 0] ** 2,
        grad_s=lambda qs: -qs,
        lap_s=lambda qs: np.full(qs.shape[0], -1.0),
    )


# ---------------------------------------------------------------------------
# domain types


def test_point_validation():
    p = Point([1.0, 2.0])
    assert p.dim == 2
    with pytest.raises(ValueError):
        Point([1.0, np.inf])
    with pytest.raises(ValueError):
        Point([[1.0, 2.0], [3.0, 4.0]])


def test_domain_requires_constraint_when_bounded():
    with pytest.raises(ValueError):
        Domain(dimension=2, kind="bounded")
    with pytest.raises(ValueError):
        Domain(dimension=2, kind="open")


def test_interior_is_strict():
    dom = Domain(2, "bounded", constraint=lambda qs: qs[:, 0] ** 2 + qs[:, 1] ** 2 - 1.0)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert dom.interior_mask(pts).tolist() == [True, False, False]


def test_hamiltonian_validation():
    dom = Domain(dimension=2, kind="unbounded", box=((-1, 1), (-1, 1)))
    v = lambda qs: np.zeros(qs.shape[0])
    with pytest.raises(ValueError):
        Hamiltonian(np.array([[1.0, 0.5], [0.4, 1.0]]), v, dom)  # not symmetric
    with pytest.raises(ValueError):
        Hamiltonian(np.array([[1.0, 2.0], [2.0, 1.0]]), v, dom)  # not positive definite
    h = Hamiltonian.isotropic(0.5, v, dom)
    assert h.isotropic_coefficient == 0.5


def test_bounds_result_ordering():
    with pytest.raises(ValueError):
        BoundsResult(lower=1.0, upper=0.0, lower_witness=None, upper_witness=None)


# ---------------------------------------------------------------------------
# local energy, log form


def test_hydrogen_trial_is_flat():
    h = hydrogen_hamiltonian_3d()
    t = hydrogen_trial_3d(1.0)
    val = local_energy_log(h, t, [0.3, -0.2, 0.9])
    assert val == pytest.approx(-0.5, abs=1e-12)


def test_hydrogen_flatness_variance():
    # an exact eigenstate has exactly flat local energy
    h = hydrogen_hamiltonian_3d()
    t = hydrogen_trial_3d(1.0)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, size=(1000, 3))
    pts = pts[np.linalg.norm(pts, axis=1) > 1e-3]
    from groundbound.core import local_energy_log_batch

    vals = local_energy_log_batch(h, t, pts)
    rel_var = np.var(vals / np.mean(vals))
    assert rel_var < 1e-16


def test_harmonic_ground_state_value():
    assert local_energy_log(harmonic_hamiltonian(), harmonic_trial(), [1.3]) == pytest.approx(0.5, abs=1e-14)


def test_quartic_local_energy_at_origin_matches_symbolic_oracle():
    # independent symbolic oracle: differentiate a test-local transcription of
    # the trial exponent and evaluate V - (S'' + S'^2)/2 exactly at the origin
    import sympy as sp

    q = sp.Symbol("q", real=True)
    r, eta, d2 = 1 / sp.sqrt(2), -1, sp.Integer(8)
    w = q * q + d2
    s_expr = (
        -(r / 3) * w ** sp.Rational(3, 2)
        + (r * d2 * (1 - eta) / 2) * sp.sqrt(w)
        - sp.log(w) / 2
        - (r * d2**2 / 2) / sp.sqrt(w)
    )
    v_expr = r**2 * q**2 * (q**2 + eta * d2) / 2
    e_expr = v_expr - (sp.diff(s_expr, q, 2) + sp.diff(s_expr, q) ** 2) / 2
    oracle = sp.nsimplify(e_expr.subs(q, 0))
    assert oracle == sp.Rational(-7, 16)
    assert float(oracle) == EXPECTED_QUARTIC_ELOC_AT_ZERO

    qo = QuarticOscillator(r=1.0 / math.sqrt(2.0), eta=-1, delta2=8.0)
    h, trial = quartic_system(qo)
    assert local_energy_log(h, trial, [0.0]) == pytest.approx(EXPECTED_QUARTIC_ELOC_AT_ZERO, abs=1e-12)

    # coarse finite-difference corroboration of the same value
    def s(x):
        return float(trial.s(np.array([[x]]))[0])

    hh = 1e-3
    s1 = (-s(2 * hh) + 8 * s(hh) - 8 * s(-hh) + s(-2 * hh)) / (12 * hh)
    s2 = (-s(2 * hh) + 16 * s(hh) - 30 * s(0.0) + 16 * s(-hh) - s(-2 * hh)) / (12 * hh * hh)
    assert -0.5 * (s2 + s1 * s1) == pytest.approx(EXPECTED_QUARTIC_ELOC_AT_ZERO, abs=1e-6)


def test_log_form_errors():
    h = hydrogen_hamiltonian_3d()
    t = hydrogen_trial_3d(1.0)
    with pytest.raises(SingularEvaluationError):
        local_energy_log(h, t, [0.0, 0.0, 1e-9])  # inside the nucleus tube
    bad = LogTrialFunction(
        params=np.array([1.0]),
        s=t.s,
        grad_s=lambda qs: np.full_like(qs, np.nan),
        lap_s=t.lap_s,
    )
    with pytest.raises(NonFiniteEnergyError):
        local_energy_log(h, bad, [1.0, 0.0, 0.0])


def test_anisotropic_form_needs_hessian():
    dom = Domain(dimension=2, kind="unbounded", box=((-1, 1), (-1, 1)))
    a = np.array([[0.5, 0.1], [0.1, 0.5]])
    h = Hamiltonian(a, lambda qs: np.zeros(qs.shape[0]), dom)
    t = LogTrialFunction(
        params=np.array([]),
        s=lambda qs: -qs[:, 0] ** 2 - qs[:, 1] ** 2,
        grad_s=lambda qs: -2 * qs,
        lap_s=lambda qs: np.full(qs.shape[0], -4.0),
    )
    with pytest.raises(ValueError):
        local_energy_log(h, t, [0.3, 0.4])


# ---------------------------------------------------------------------------
# local energy, ratio form


def unit_disk_ratio_trial():
    b = lambda qs: qs[:, 0] ** 2 + qs[:, 1] ** 2 - 1.0
    return RatioTrialFunction(phi=lambda qs: -b(qs), h_phi=lambda qs: np.full(qs.shape[0], 2.0))


def test_disk_ratio_values():
    # phi = 1 - x^2 - y^2, H phi = -lap(phi)/2 = 2, so E_loc = 2/(1 - s)
    t = unit_disk_ratio_trial()
    assert local_energy_ratio(t, [0.0, 0.0]) == pytest.approx(2.0, abs=1e-14)
    assert local_energy_ratio(t, [0.5, 0.0]) == pytest.approx(8.0 / 3.0, abs=1e-14)


def test_ratio_zero_denominator():
    t = unit_disk_ratio_trial()
    with pytest.raises(SingularEvaluationError):
        local_energy_ratio(t, [1.0, 0.0])


# ---------------------------------------------------------------------------
# cross-checks between representations


def test_cross_check_identity():
    dom = Domain(1, "unbounded", box=((-1.0, 1.0),))
    f = LocalEnergyField(
        domain=dom,
        evaluate=lambda qs: np.sin(qs[:, 0]),
        alternates=(lambda qs: np.sin(qs[:, 0]),),
    )
    rep = cross_check_field(f, 100, seed=0)
    assert rep.max_rel_discrepancy == 0.0
    assert rep.passed


def test_cross_check_needs_two_representations():
    dom = Domain(1, "unbounded", box=((-1.0, 1.0),))
    f = LocalEnergyField(domain=dom, evaluate=lambda qs: qs[:, 0])
    with pytest.raises(ValueError):
        cross_check_field(f, 10, seed=0)


def test_cross_check_fails_when_everything_is_singular():
    dom = Domain(
        1,
        "unbounded",
        box=((-1.0, 1.0),),
        excluded_singular_sets=(
            SingularSet("everything", lambda qs: np.ones(qs.shape[0], dtype=bool)),
        ),
    )
    f = LocalEnergyField(
        domain=dom,
        evaluate=lambda qs: qs[:, 0],
        alternates=(lambda qs: qs[:, 0],),
        singularities=dom.excluded_singular_sets,
    )
    with pytest.raises(SingularEvaluationError):
        cross_check_field(f, 10, seed=0)


# ---------------------------------------------------------------------------
# derivative consistency of every shipped trial


@pytest.mark.parametrize(
    "name",
    ["hydrogen", "harmonic", "quartic", "coulomb-helium", "magnetic-lower", "magnetic-upper", "magnetic-improved"],
)
def test_shipped_trial_derivatives_match_finite_differences(name):
    rng = np.random.default_rng(42)
    n = 200
    if name == "hydrogen":
        trial = hydrogen_trial_3d(1.3)
        pts = rng.uniform(0.3, 3.0, size=(n, 3)) * rng.choice([-1.0, 1.0], size=(n, 3))
    elif name == "harmonic":
        trial = harmonic_trial()
        pts = rng.uniform(-3, 3, size=(n, 1))
    elif name == "quartic":
        trial = QuarticOscillator(r=1.0 / math.sqrt(2.0), eta=-1, delta2=8.0).log_trial()
        pts = rng.uniform(-6, 6, size=(n, 1))
    elif name == "coulomb-helium":
        trial = coulomb_log_trial(helium_system(2.0))
        pts = rng.uniform(0.4, 2.5, size=(n, 6)) * rng.choice([-1.0, 1.0], size=(n, 6))
    else:
        variant = name.split("-")[1]
        trial = magnetic_trial(MagneticHydrogen(2.0), variant)
        pts = rng.uniform(0.3, 4.0, size=(n, 3))
        pts[:, 2] += 0.2  # stay clear of the z = 0 ridge of the even extension
    grad_err, lap_err = derivative_consistency(trial, pts)
    assert grad_err <= 1e-6
    assert lap_err <= 1e-5


def test_evaluate_with_limits_fills_declared_values():
    tube = SingularSet("left half", lambda qs: qs[:, 0] < 0.0, limit=7.0)
    dom = Domain(1, "unbounded", box=((-1.0, 1.0),), excluded_singular_sets=(tube,))
    f = LocalEnergyField(
        domain=dom, evaluate=lambda qs: qs[:, 0], singularities=(tube,)
    )
    qs = np.array([[-0.5], [0.5]])
    filled = f.evaluate_with_limits(qs)
    assert filled.tolist() == [7.0, 0.5]
    as_nan = f.evaluate_with_limits(qs, singular_as_nan=True)
    assert math.isnan(as_nan[0]) and as_nan[1] == 0.5
