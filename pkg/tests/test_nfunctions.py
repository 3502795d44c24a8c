"""N-function evaluation, indices, conjugation, truncation, and the scalar inequalities."""

import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczfem.inequalities import inequality_margins
from orliczfem.nfunctions import (
    INDEX_GRID,
    DeltaPower,
    DomainError,
    IndexPair,
    PowerLaw,
    SingularityError,
    SumPower,
    Truncated,
    from_text,
    simonenko_gap,
    to_text,
    truncation_dual_gap,
    young_gap,
)

REL_TOL = 1e-9


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def test_eval_power2():
    assert PowerLaw(2).eval(1.0) == (0.5, 1.0, 1.0)


def test_eval_delta_power_against_symbolic_integration():
    # Oracle: integrate (1+s)*s symbolically and differentiate (1+t)*t.
    s, t = sympy.symbols("s t", nonnegative=True)
    phi_sym = sympy.integrate((1 + s) * s, (s, 0, t))
    d_sym = (1 + t) * t
    dd_sym = sympy.diff(d_sym, t)
    at = 1.0
    expected = tuple(float(e.subs(t, at)) for e in (phi_sym, d_sym, dd_sym))
    got = DeltaPower(3, 1).eval(at)
    assert got == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx((5.0 / 6.0, 2.0, 3.0))


def test_eval_truncated_quadratic_branch():
    spec = Truncated(PowerLaw(3), 1.0, math.inf)
    phi, d, dd = spec.eval(0.5)
    assert d == pytest.approx(0.5)  # phi'(1)/1 * t
    assert dd == pytest.approx(1.0)
    assert phi == pytest.approx(0.5 * 0.5**2)


def test_eval_negative_argument_rejected(spec):
    with pytest.raises(DomainError):
        spec.eval(-1.0)


@pytest.mark.parametrize(
    "singular", [PowerLaw(1.5), DeltaPower(1.3, 0.0), SumPower(1.5, 3.0)]
)
def test_eval_singular_second_derivative_at_zero(singular):
    with pytest.raises(SingularityError):
        singular.eval(0.0)
    # phi and phi' themselves are fine at zero
    assert singular.phi(np.asarray(0.0)) == 0.0
    assert singular.d_phi(np.asarray(0.0)) == 0.0


def test_phi_is_integral_of_d_phi(spec):
    # Quadrature oracle: phi(t) = int_0^t phi', split at truncation kinks.
    from scipy.integrate import quad

    kinks = []
    if isinstance(spec, Truncated):
        kinks = [k for k in (spec.lo, spec.hi) if math.isfinite(k)]
    for t in (0.37, 1.0, 4.2):
        pts = [k for k in kinks if 0.0 < k < t] or None
        val, err = quad(
            lambda x: float(spec.d_phi(np.asarray(x))), 0.0, t, limit=200, points=pts
        )
        assert float(spec.phi(np.asarray(t))) == pytest.approx(val, rel=1e-8, abs=1e-12)


def test_delta_power_small_argument_stability():
    # The series branch must keep the Simonenko ratio accurate near t=0.
    dp = DeltaPower(3, 1)
    t = np.logspace(-8, -4, 32)
    ratio = dp.d_phi(t) * t / dp.phi(t)
    assert np.all(ratio >= 2.0 - 1e-12)
    # exact expansion: ratio = 2 (1 + t) / (1 + 2 t / 3) = 2 + 2 t / 3 + O(t^2)
    assert ratio == pytest.approx(2.0 + 2.0 * t / 3.0, abs=1e-8)


# ---------------------------------------------------------------------------
# indices
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("p", [1.3, 1.5, 2.0, 3.0, 4.0])
def test_indices_power(p):
    idx = PowerLaw(p).indices()
    assert idx == IndexPair(p, p)
    grid = PowerLaw(p).indices_grid()
    assert grid.p_minus == pytest.approx(p, abs=1e-12)
    assert grid.p_plus == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("p", [1.3, 1.5, 2.0, 3.0, 4.0])
def test_indices_delta_power(p):
    idx = DeltaPower(p, 1.0).indices()
    assert (idx.p_minus, idx.p_plus) == (min(p, 2.0), max(p, 2.0))


def test_indices_truncated_power():
    assert Truncated(PowerLaw(3), 0.1, 10).indices() == IndexPair(2.0, 3.0)


def test_indices_grid_consistent_with_closed_form(spec):
    closed = spec.indices()
    grid = spec.indices_grid()
    # The grid estimate can only lie inside the closed-form (possibly
    # conservative) bracket, and should approach it closely.
    assert grid.p_minus >= closed.p_minus - 1e-10
    assert grid.p_plus <= closed.p_plus + 1e-10
    assert grid.p_minus - closed.p_minus <= 5e-3
    assert closed.p_plus - grid.p_plus <= 5e-3


def test_invalid_exponents_rejected():
    with pytest.raises(DomainError):
        PowerLaw(1.0)
    with pytest.raises(DomainError):
        DeltaPower(0.5, 1.0)
    with pytest.raises(DomainError):
        DeltaPower(2.0, -1.0)
    with pytest.raises(DomainError):
        Truncated(PowerLaw(2), 2.0, 1.0)
    with pytest.raises(DomainError):
        IndexPair(2.0, 1.5)


# ---------------------------------------------------------------------------
# conjugation
# ---------------------------------------------------------------------------


def test_conjugate_power2_self_conjugate():
    spec = PowerLaw(2)
    s = np.linspace(0.0, 5.0, 21)
    assert spec.conjugate(s) == pytest.approx(0.5 * s * s, rel=1e-11, abs=1e-14)


def test_conjugate_power3_against_grid_sup():
    # Independent oracle: numeric supremum of s*t - phi(t) over a dense grid.
    spec = PowerLaw(3)
    t = np.linspace(0.0, 10.0, 2_000_001)
    for s in (0.3, 1.0, 2.5):
        sup = float(np.max(s * t - spec.phi(t)))
        assert spec.conjugate(s) == pytest.approx(sup, rel=1e-9)
    assert spec.conjugate(1.0) == pytest.approx(2.0 / 3.0, rel=1e-11)


def test_conjugate_at_zero(spec):
    assert spec.conjugate(0.0) == 0.0


def test_conjugate_young_equality(spec):
    # phi(t) + phi*(phi'(t)) = t phi'(t) for every t
    t = np.logspace(-2, 1, 7)
    d = spec.d_phi(t)
    lhs = spec.phi(t) + spec.conjugate(d)
    assert lhs == pytest.approx(t * d, rel=1e-10)


def test_conjugate_spec_indices(spec):
    conj = spec.conjugate_spec()
    expected = spec.indices().conjugate()
    assert conj.indices().p_minus == pytest.approx(expected.p_minus)
    assert conj.indices().p_plus == pytest.approx(expected.p_plus)
    grid = conj.indices_grid(np.logspace(-3, 3, 256))
    assert grid.p_minus >= expected.p_minus - 5e-3
    assert grid.p_plus <= expected.p_plus + 5e-3


def test_d_phi_inv_roundtrip(spec):
    t = np.logspace(-4, 3, 40)
    back = spec.d_phi_inv(spec.d_phi(t))
    assert back == pytest.approx(t, rel=1e-10)


# ---------------------------------------------------------------------------
# truncation duality
# ---------------------------------------------------------------------------


def test_truncation_dual_gap_power2_exact():
    s = np.linspace(0.0, 3.0, 64)
    gap = truncation_dual_gap(PowerLaw(2), 1.0, 1.0, s)
    assert np.max(gap) <= 1e-12


@pytest.mark.parametrize(
    "base, lo, hi",
    [
        (PowerLaw(3), 0.5, 2.0),
        (DeltaPower(1.5, 0.1), 0.2, 5.0),
        (PowerLaw(1.3), 0.1, 10.0),
        (SumPower(1.5, 3.0), 0.5, 4.0),
    ],
)
def test_truncation_dual_gap_small(base, lo, hi):
    s = np.linspace(0.0, float(base.d_phi(np.asarray(hi))), 64)
    gap = truncation_dual_gap(base, lo, hi, s)
    assert np.max(gap) <= 1e-8


def test_truncation_dual_gap_rejects_unbounded():
    with pytest.raises(DomainError):
        truncation_dual_gap(PowerLaw(2), 0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# scalar inequality gaps
# ---------------------------------------------------------------------------


def test_young_gap_examples():
    assert young_gap(PowerLaw(2), 0.0, 0.0) == 0.0
    assert young_gap(PowerLaw(2), 1.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert young_gap(PowerLaw(3), 2.0, 5.0, 0.3) >= 0.0


@given(
    s=st.floats(min_value=0.0, max_value=5.0),
    t=st.floats(min_value=0.0, max_value=5.0),
    lam=st.floats(min_value=0.01, max_value=1.0),
)
@settings(max_examples=200, deadline=None)
def test_young_gap_nonnegative_property(s, t, lam):
    for spec in (PowerLaw(1.5), PowerLaw(3), DeltaPower(3, 1)):
        assert young_gap(spec, s, t, lam) >= -1e-12


def test_simonenko_gap_power_exact():
    for p in (1.5, 2.0, 3.0):
        lo, hi = simonenko_gap(PowerLaw(p), 0.7)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert hi == pytest.approx(0.0, abs=1e-12)


def test_simonenko_gap_examples():
    lo, hi = simonenko_gap(DeltaPower(3, 1), 1.0)
    assert lo >= 0.0 and hi >= 0.0
    lo, hi = simonenko_gap(Truncated(PowerLaw(1.5), 1.0, 2.0), 0.5)
    # quadratic branch: ratio is exactly 2, the upper index
    assert hi == pytest.approx(0.0, abs=1e-12)
    assert lo == pytest.approx(0.5, abs=1e-12)


def test_inequality_margins_no_violations(spec):
    margins = inequality_margins(spec)
    for name, margin in margins.items():
        tol = 1e-12 if name == "young" else REL_TOL
        assert margin >= -tol, f"{name} violated with margin {margin}"


@given(st.floats(min_value=1e-5, max_value=100.0), st.floats(min_value=0.05, max_value=20.0))
@settings(max_examples=150, deadline=None)
def test_scaling_property(s, lam):
    for spec in (PowerLaw(1.3), DeltaPower(3, 1), SumPower(1.5, 3)):
        idx = spec.indices()
        phi_s = float(spec.phi(np.asarray(s)))
        val = float(spec.phi(np.asarray(lam * s)))
        lo = min(lam**idx.p_plus, lam**idx.p_minus) * phi_s
        hi = max(lam**idx.p_plus, lam**idx.p_minus) * phi_s
        assert lo * (1 - 1e-10) <= val <= hi * (1 + 1e-10)


def test_joint_continuity_of_truncated_derivative():
    # phi'_(lo,hi)(t) varies continuously under small perturbations
    base = PowerLaw(3)
    rng = np.random.default_rng(42)
    for _ in range(50):
        lo = float(rng.uniform(0.05, 0.9))
        hi = float(rng.uniform(1.1, 50.0))
        t = float(rng.uniform(0.0, 60.0))
        eps = 1e-7
        ref = float(Truncated(base, lo, hi).d_phi(np.asarray(t)))
        pert = float(
            Truncated(base, lo + eps, hi + eps).d_phi(np.asarray(min(t + eps, 60.0)))
        )
        assert abs(pert - ref) <= 1e-4 * (1.0 + abs(ref))


def test_quadratic_growth_flags():
    assert PowerLaw(2).has_quadratic_growth()
    assert not PowerLaw(3).has_quadratic_growth()
    tr = Truncated(PowerLaw(3), 0.1, 10.0)
    assert tr.has_quadratic_growth()
    lo, hi = tr.quadratic_growth_bounds()
    dd = tr.dd_phi(INDEX_GRID)
    assert lo <= dd.min() * (1 + 1e-12)
    assert dd.max() <= hi * (1 + 1e-12)
    assert not Truncated(PowerLaw(3), 0.1, math.inf).has_quadratic_growth()


def test_one_sided_truncations_match_base_on_their_side():
    base = PowerLaw(3)
    up = Truncated(base, 0.0, 2.0)
    down = Truncated(base, 0.5, math.inf)
    t_small = np.linspace(0.0, 1.9, 20)
    t_large = np.linspace(0.6, 50.0, 20)
    assert up.phi(t_small) == pytest.approx(base.phi(t_small), rel=1e-13)
    assert down.d_phi(t_large) == pytest.approx(base.d_phi(t_large), rel=1e-13)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_text_roundtrip(spec):
    if isinstance(spec, Truncated) and math.isinf(spec.hi):
        pass  # inf round-trips via float('inf')
    text = to_text(spec)
    back = from_text(text)
    assert back == spec


def test_text_inline_commas():
    spec = from_text("variant=delta_power, p=3.0, delta=1.0, trunc_lo=0.1, trunc_hi=10.0")
    assert spec == Truncated(DeltaPower(3.0, 1.0), 0.1, 10.0)


def test_text_unknown_key_names_the_key():
    with pytest.raises(DomainError, match="wibble"):
        from_text("variant=power\np=2.0\nwibble=1\n")


def test_text_missing_and_malformed():
    with pytest.raises(DomainError):
        from_text("p=2.0")
    with pytest.raises(DomainError):
        from_text("variant=power\np=two")
    with pytest.raises(DomainError):
        from_text("variant=frobnicate\np=2.0")
    with pytest.raises(DomainError):
        from_text("variant=power\np=2.0\nq=3.0")
