import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from parabolic_ends import cap_smoothing as cs
from parabolic_ends import spectral_poincare as sp
from parabolic_ends._validation import HypothesisError

# first non-zero eigenvalue of the capped slice surfaces, from ODE shooting
LAMBDA1_SHOOTING = {
    1: 2.4656758284344695,
    2: 1.3173824124875666,
    3: 0.8622389374565778,
    4: 0.6439117123582716,
    5: 0.5239696876876182,
    6: 0.45137739213992745,
}
GOLDEN = (math.sqrt(5) - 1) / 2
EXP = (lambda t: np.exp(-t), lambda t: -np.exp(-t))


class TestPoincare:
    def test_constant_function(self):
        iv = sp.WeightedInterval(0.0, 5.0, *EXP, h0=0.5, delta=0.0)
        res = sp.poincare_1d_check(iv, lambda t: np.ones_like(t), lambda t: np.zeros_like(t))
        assert res.lhs == 0
        assert res.rhs == pytest.approx(-0.25 * (1 - math.exp(-5)), rel=1e-13)
        assert res.holds and res.branch == "above"

    def test_equality_witness(self):
        iv = sp.WeightedInterval(0.0, 5.0, *EXP, h0=0.5, delta=0.0)
        res = sp.poincare_1d_check(iv, lambda t: np.exp(0.5 * t), lambda t: 0.5 * np.exp(0.5 * t))
        assert abs(res.margin) < 1e-10

    @pytest.mark.parametrize("h0, delta, branch", [(0.5, 0.0, "above"), (0.5, 1.0, "below")])
    def test_random_functions(self, h0, delta, branch):
        iv = sp.WeightedInterval(0.0, 5.0, *EXP, h0, delta)
        rng = np.random.default_rng(42)
        for _ in range(100):
            res = sp.poincare_1d_check(iv, *sp.random_band_limited(rng, 5.0))
            assert res.branch == branch
            assert res.margin >= -1e-10

    def test_cap_profile_interval(self):
        p = cs.build_cap_profile(2)
        iv = sp.WeightedInterval(0.5, p.T - 0.01, p.phi, p.dphi, 0.5, 0.25, p.breakpoints)
        rng = np.random.default_rng(3)
        for _ in range(20):
            assert sp.poincare_1d_check(iv, *sp.random_band_limited(rng, 4.0)).holds

    def test_hypothesis_violation(self):
        iv = sp.WeightedInterval(0.0, 5.0, *EXP, h0=0.5, delta=0.5)
        with pytest.raises(HypothesisError):
            sp.poincare_1d_check(iv, np.cos, lambda t: -np.sin(t))


class TestSpectrum:
    def test_sphere(self):
        assert sp.lambda1_sphere(400) == pytest.approx(2.0, abs=1e-2)
        assert oracles.shoot_lambda1_sphere(1.5, 2.5) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("j", range(1, 7))
    def test_cap_against_shooting(self, j):
        p = cs.build_cap_profile(j)
        assert sp.lambda1_cap_surface(p) == pytest.approx(LAMBDA1_SHOOTING[j], rel=1e-4)

    def test_shooting_oracle_live(self):
        p = cs.build_cap_profile(3)
        lam = oracles.shoot_lambda1_cap(p.phi, p.T, p.pieces[-1].start, 0.8, 0.9)
        assert lam == pytest.approx(LAMBDA1_SHOOTING[3], rel=1e-9)

    def test_refinement_and_modes(self):
        p = cs.build_cap_profile(4)
        a = sp.lambda1_cap_surface(p, 3, 500)
        assert abs(a - sp.lambda1_cap_surface(p, 3, 1000)) < 1e-3
        assert sp.lambda1_cap_surface(p, 6, 500) == a

    def test_zero_mode(self):
        spectrum = sp.cap_surface_spectrum(cs.build_cap_profile(5), 2, 300)
        assert abs(spectrum.eigenvalues[0][0]) < 1e-9
        assert all(spectrum.eigenvalues[m][0] > spectrum.lambda1 for m in (1, 2))

    def test_uniform_lower_bound(self):
        vals = [sp.lambda1_cap_surface(cs.build_cap_profile(j), 3, 400) for j in range(1, 7)]
        assert min(vals) > 0.25

    def test_grid_guard(self):
        with pytest.raises(ValueError):
            sp.cap_grid(cs.build_cap_profile(1), 100)


class TestModes:
    def test_mode_action(self):
        assert sp.xtheta_mode_action(sp.FourierMode(0, 0), 0.3) == 0
        assert sp.xtheta_mode_action(sp.FourierMode(1, -2), Fraction(1, 2)) == 0
        assert sp.xtheta_mode_action(sp.FourierMode(1, 1), Fraction(1, 3)) == 1j * Fraction(4, 3)

    def test_gap_examples(self):
        assert sp.mode_gap_rational(1, 2) == Fraction(1, 2)
        assert sp.mode_gap_rational(2, 5) == Fraction(1, 5)
        assert sp.mode_gap_rational(0, 1) == 1
        assert oracles.brute_mode_gap(Fraction(2, 5), 10) == Fraction(1, 5)
        with pytest.raises(ValueError):
            sp.mode_gap_rational(2, 4)

    def test_all_gaps_up_to_50(self):
        for q in range(1, 51):
            for r in range(q):
                if math.gcd(r, q) == 1:
                    assert sp.mode_gap_rational(r, q) == Fraction(1, q)

    def test_epsilon_examples(self):
        g = sp.epsilon_for_K(GOLDEN, 3)
        assert g.eps == pytest.approx(oracles.brute_epsilon(GOLDEN, 3) ** 2, rel=1e-12)
        assert not g.degenerate
        h = sp.epsilon_for_K(Fraction(1, 2), 3)
        assert h.eps == 0 and h.degenerate
        assert abs(h.argmin.k + h.argmin.l / 2) == 0
        assert sp.epsilon_for_K(0.3, 2).eps == pytest.approx(0.09)
        assert sp.epsilon_for_K(0.5, 3).degenerate

    @pytest.mark.parametrize("alpha", [math.sqrt(2) - 1, GOLDEN, math.pi - 3])
    def test_epsilon_irrational(self, alpha):
        vals = [sp.epsilon_for_K(alpha, K).eps for K in range(1, 21)]
        assert all(v > 0 for v in vals)
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_lattice(self):
        modes = sp.ModeLattice(0.5, 3, 0.0).almost_invariant()
        assert sp.FourierMode(1, -2) in modes and sp.FourierMode(0, 0) in modes

    def test_convergents(self):
        assert sp.cf_convergents(0.5, 5) == [(1, 2)]
        conv = sp.cf_convergents(GOLDEN, 12)
        fib = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377]
        assert conv == [(fib[k + 1], fib[k + 2]) for k in range(12)]

    def test_convergents_are_best_approximations(self):
        alpha = Fraction(math.sqrt(2) - 1)
        conv = sp.cf_convergents(alpha, 10)
        best = oracles.best_approximations(alpha, conv[-1][1])
        assert set(conv) <= best

    def test_dichotomy(self):
        alpha = math.sqrt(2) - 1
        gaps = [sp.mode_gap_rational(r, q) for r, q in sp.cf_convergents(alpha, 8)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert all(sp.epsilon_for_K(alpha, K).eps > 0 for K in range(1, 21))

    def test_mode_inequality(self):
        single = sp.mode_inequality_check(1, 2, samples=0, polynomials=[{(0, 1): 1.0}])
        assert single.min_ratio == 0.25 and single.holds
        rej = sp.mode_inequality_check(1, 2, samples=0, polynomials=[{(1, -2): 1.0}])
        assert rej.rejected == 1 and rej.ratios == ()
        rnd = sp.mode_inequality_check(2, 5, samples=50, seed=1)
        assert rnd.holds and rnd.min_ratio >= 1 / 25 - 1e-15


@given(st.fractions(min_value=Fraction(1, 10_000), max_value=Fraction(9999, 10_000), max_denominator=10_000), st.integers(1, 30))
def test_convergent_bound(alpha, n):
    for p, q in sp.cf_convergents(alpha, n):
        assert abs(alpha - Fraction(p, q)) <= Fraction(1, q * q)


@given(st.integers(1, 40), st.data())
def test_gap_matches_bruteforce(q, data):
    r = data.draw(st.integers(0, q - 1))
    if math.gcd(r, q) != 1:
        return
    assert oracles.brute_mode_gap(Fraction(r, q), q + 1) == sp.mode_gap_rational(r, q, check=False)


@given(st.floats(0.01, 0.99), st.integers(1, 12))
def test_epsilon_matches_exhaustive(alpha, K):
    res = sp.epsilon_for_K(alpha, K)
    ref = oracles.brute_epsilon(alpha, K) ** 2
    if res.degenerate:
        assert ref <= 1e-24
    else:
        assert res.eps == pytest.approx(ref, rel=1e-9, abs=1e-30)
