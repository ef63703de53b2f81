from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from parabolic_ends import parabolic_bundles as pb
from parabolic_ends._validation import ConfigurationError


def bundle(degree, *points, genus=0):
    return pb.ParabolicBundle(pb.MarkedSurface(genus, points), degree)


P_HALF = pb.ParabolicPoint("P", 0, Fr(1, 2))


class TestDegrees:
    def test_par_degree_examples(self):
        assert pb.par_degree(bundle(0, P_HALF)) == Fr(1, 2)
        assert pb.par_degree(bundle(-1, pb.ParabolicPoint.trivial("P", Fr(1, 2)))) == 0
        assert pb.par_degree(bundle(3)) == 3

    def test_slope_examples(self):
        assert pb.slope(bundle(0, P_HALF)) == Fr(1, 4)
        assert pb.slope(bundle(0)) == 0
        assert pb.slope(bundle(2, pb.ParabolicPoint("P", Fr(1, 4), Fr(3, 4)))) == Fr(3, 2)

    def test_sub_slope_examples(self):
        E = bundle(0, P_HALF)
        assert pb.sub_slope(E, pb.SubLineData(0, {"P": True})) == Fr(1, 2)
        assert pb.sub_slope(E, pb.SubLineData(0, {"P": False})) == 0
        E3 = bundle(0, pb.ParabolicPoint.trivial("P", Fr(1, 3)))
        assert pb.sub_slope(E3, pb.SubLineData(-1)) == Fr(-2, 3)

    def test_sub_slope_needs_flags(self):
        with pytest.raises(ConfigurationError):
            pb.sub_slope(bundle(0, P_HALF), pb.SubLineData(0))
        with pytest.raises(ConfigurationError):
            pb.sub_slope(bundle(0, P_HALF), pb.SubLineData(0, {"P": True, "Z": False}))

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            pb.ParabolicPoint("P", Fr(1, 2), Fr(1, 3))
        with pytest.raises(ValueError):
            pb.ParabolicPoint("P", 0, 1)
        with pytest.raises(ValueError):
            pb.MarkedSurface(0, (P_HALF, P_HALF))
        with pytest.raises(ValueError):
            pb.ParabolicBundle(pb.MarkedSurface(), 0, rank=3)

    def test_string_weights(self):
        assert pb.ParabolicPoint("P", "1/3", "2/3").alpha2 == Fr(2, 3)


class TestStability:
    def test_verdicts(self):
        E = bundle(0, P_HALF)
        assert pb.stability_verdict(E, [pb.SubLineData(0, {"P": True})]) == pb.UNSTABLE
        assert pb.stability_verdict(E, [pb.SubLineData(-1, {"P": True})]) == pb.STABLE
        assert pb.stability_verdict(bundle(0), [pb.SubLineData(0)]) == pb.SEMISTABLE_ONLY

    def test_empty_candidates(self):
        with pytest.raises(ConfigurationError):
            pb.stability_verdict(bundle(0), [])

    def test_polystable(self):
        T = pb.MarkedSurface(0, (pb.ParabolicPoint.trivial("P", Fr(1, 2)),))
        assert pb.is_polystable_decomposable(pb.SubLineData(0), pb.SubLineData(0), T)
        B = pb.MarkedSurface(0, (P_HALF,))
        assert not pb.is_polystable_decomposable(pb.SubLineData(0, {"P": True}), pb.SubLineData(0, {"P": False}), B)
        assert not pb.is_polystable_decomposable(pb.SubLineData(-1, {"P": True}), pb.SubLineData(0, {"P": False}), B)
        with pytest.raises(ConfigurationError):
            pb.is_polystable_decomposable(pb.SubLineData(0, {"P": True}), pb.SubLineData(0, {"P": True}), B)


class TestNormalization:
    @pytest.mark.parametrize("pd, d0", [(Fr(3, 2), -1), (Fr(-1, 2), 0)])
    def test_examples(self, pd, d0):
        base_deg = pd.numerator // pd.denominator
        E = bundle(base_deg, pb.ParabolicPoint("R", 0, pd - base_deg))
        E2, log = pb.normalize_degree_zero(E)
        assert log.tensor_degree == d0
        assert [p.alpha1 for p in log.added_points] == [Fr(1, 4)]
        assert all(p.is_trivial for p in log.added_points)
        assert pb.par_degree(E2) == 0

    def test_identity_when_zero(self):
        E = bundle(-1, pb.ParabolicPoint.trivial("P", Fr(1, 2)))
        E2, log = pb.normalize_degree_zero(E)
        assert E2 == E and log.tensor_degree == 0 and log.added_points == ()

    def test_fresh_labels(self):
        E = bundle(0, pb.ParabolicPoint("Q1", 0, Fr(1, 3)))
        E2, log = pb.normalize_degree_zero(E)
        assert log.added_points[0].label == "Q2"


class TestHolonomy:
    def test_hyperbolic(self):
        pts = lambda k: tuple(pb.ParabolicPoint(f"P{i}") for i in range(k))
        assert pb.is_hyperbolic(pb.MarkedSurface(0, pts(3)))
        assert not pb.is_hyperbolic(pb.MarkedSurface(0, pts(2)))
        assert pb.is_hyperbolic(pb.MarkedSurface(2))

    def test_puncture_holonomy(self):
        np.testing.assert_allclose(pb.puncture_holonomy(pb.ParabolicPoint("P")), np.eye(2), atol=1e-15)
        np.testing.assert_allclose(pb.puncture_holonomy(P_HALF), np.diag([1, -1]), atol=1e-15)
        np.testing.assert_allclose(pb.puncture_holonomy(pb.ParabolicPoint("P", Fr(1, 4), Fr(3, 4))), np.diag([1j, -1j]), atol=1e-15)

    def test_irreducible(self):
        Z = np.diag([1.0, -1.0])
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert pb.is_irreducible(pb.UnitaryRepData((Z, S)))
        assert not pb.is_irreducible(pb.UnitaryRepData((Z,)))
        assert not pb.is_irreducible(pb.UnitaryRepData((np.eye(2),)))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            pb.UnitaryRepData((np.diag([1.0, 2.0]),))


weights = st.fractions(min_value=0, max_value=Fr(23, 24), max_denominator=24)


@st.composite
def points(draw, n_max=4):
    n = draw(st.integers(0, n_max))
    out = []
    for k in range(n):
        a, b = sorted((draw(weights), draw(weights)))
        out.append(pb.ParabolicPoint(f"P{k}", a, b))
    return tuple(out)


@given(points(), st.integers(-5, 5), weights)
def test_trivial_point_adds_twice_weight(pts, deg, a):
    E = bundle(deg, *pts)
    bigger = pb.ParabolicBundle(E.base.with_points([pb.ParabolicPoint.trivial("X", a)]), deg)
    assert pb.par_degree(bigger) - pb.par_degree(E) == 2 * a


@given(points(), st.integers(-5, 5), st.data())
def test_normalization_preserves_verdict(pts, deg, data):
    E = bundle(deg, *pts)
    cands = [
        pb.SubLineData(data.draw(st.integers(-4, 4)), {p.label: data.draw(st.booleans()) for p in pts if not p.is_trivial})
        for _ in range(3)
    ]
    E2, log = pb.normalize_degree_zero(E)
    assert pb.par_degree(E2) == 0
    assert all(p.alpha1 < 1 for p in log.added_points)
    moved = [pb.transform_certificate(c, log) for c in cands]
    assert pb.stability_verdict(E2, moved) == pb.stability_verdict(E, cands)


@given(weights, weights)
def test_holonomy_recovers_weights(a, b):
    a, b = sorted((a, b))
    H = pb.puncture_holonomy(pb.ParabolicPoint("P", a, b))
    np.testing.assert_allclose(H.conj().T @ H, np.eye(2), atol=1e-14)
    assert H[0, 1] == 0 and H[1, 0] == 0
    got = (np.angle(np.diag(H)) / (2 * np.pi)) % 1
    dist = np.abs(((got - [float(a), float(b)]) + 0.5) % 1 - 0.5)
    assert np.all(dist < 1e-12)


@given(st.integers(0, 10_000), st.booleans())
def test_irreducibility_conjugation_invariant(seed, reducible):
    rng = np.random.default_rng(seed)
    g1 = unitary_group.rvs(2, random_state=rng)
    g2 = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
    if reducible:
        g1 = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
    U = unitary_group.rvs(2, random_state=rng)
    before = pb.is_irreducible(pb.UnitaryRepData((g1, g2)))
    after = pb.is_irreducible(pb.UnitaryRepData((U @ g1 @ U.conj().T, U @ g2 @ U.conj().T)))
    assert before == after
