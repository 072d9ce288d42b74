from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from specpert import bounds, models
from specpert.errors import (
    DegenerateWeightsError,
    DomainError,
    InputError,
    NotMonotoneError,
    OutOfRangeError,
    ThetaUndefinedError,
    ZeroEigenvalueError,
)


def F_oracle_inv(y):
    return brentq(lambda x: x * x * math.exp(x) - y, 0.0, 60.0, xtol=1e-15, rtol=1e-15)


def er_inputs(n, p, delta=0.05, alpha=0.5, **constants):
    """Closed-form ingredients of E A = p (J - I)."""
    spectrum = np.concatenate([[(n - 1) * p], np.full(n - 1, -p)])
    return bounds.BoundInputs(
        eigvals_star=spectrum, s=0, r=1, n=n, pstar=p, pbar_star=p * (n - 1) / n, pbar=p,
        delta=delta, alpha=alpha, mnorm_Ustar=1 / math.sqrt(n), mnorm_Ubar_star=1.0,
        mnorm_Astar=p * math.sqrt(n - 1), maxnorm_Astar=p, psd=False,
        constants=bounds.Constants().override(**constants))


# ---------------------------------------------------------------------------
# gap and condition number
# ---------------------------------------------------------------------------


class TestGap:
    def test_leading_eigenvalue(self):
        assert bounds.effective_gap((10, 3, 0), 0, 1) == 7

    def test_mixed_sign_window(self):
        assert bounds.effective_gap((5, 4, -4, -5), 1, 2) == 1

    def test_full_window_uses_lambda_min(self):
        assert bounds.effective_gap((6, 2, -3), 0, 3) == 2

    def test_unsorted_input_is_sorted(self):
        assert bounds.effective_gap((0, 10, 3), 0, 1) == 7

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            bounds.effective_gap((1, 2), 1, 2)

    def test_condition(self):
        assert bounds.effective_condition((6, 3), 2) == 2
        assert bounds.effective_condition((100, 1), 2) == 4
        assert bounds.effective_condition((7,), 1) == 1

    def test_condition_zero(self):
        with pytest.raises(ZeroEigenvalueError):
            bounds.effective_condition((3, 0), 2)

    def test_block_count(self):
        assert bounds.block_count(3, 1.0) == 10.0
        assert bounds.block_count(10, 4.0) == 30.0


# ---------------------------------------------------------------------------
# eigen-partition
# ---------------------------------------------------------------------------


class TestEigenPartition:
    def test_reference_spectrum(self):
        lam = (55, 40, 25, 23, 16, 15, 8, 5, 3, 1, -1)
        assert bounds.eigen_partition(lam, 0, 10) == [(10, 9, 8), (7, 6, 5), (4, 3, 2), (1,)]

    def test_single_block(self):
        assert bounds.eigen_partition((4, 3.5, 3, 0), 0, 3) == [(3, 2, 1)]

    def test_mixed_signs_split(self):
        assert bounds.eigen_partition((5, -5), 0, 2) == [(1,), (2,)]

    def test_negative_window_mirrors_positive(self):
        lam = np.array([55, 40, 25, 23, 16, 15, 8, 5, 3, 1, -1], dtype=float)
        mirrored = bounds.eigen_partition(-lam, 1, 10)
        n = lam.size
        flipped = [tuple(sorted((n + 1 - t for t in blk), reverse=True)) for blk in mirrored]
        assert sorted(flipped) == sorted(bounds.eigen_partition(lam, 0, 10))

    def test_equal_gaps_do_not_split(self):
        # strict inequalities: a gap of exactly twice the reference does not split
        assert bounds.eigen_partition((4, 2, 0), 0, 2) == [(2, 1)]

    def test_zero_in_window(self):
        with pytest.raises(ZeroEigenvalueError):
            bounds.eigen_partition((3, 0, -1), 0, 2)


@st.composite
def positive_spectra(draw):
    r = draw(st.integers(1, 12))
    vals = draw(st.lists(st.floats(0.01, 1000), min_size=r, max_size=r, unique=True))
    tail = draw(st.floats(-5, 0.0))
    return np.array(sorted(vals, reverse=True) + [tail]), r


@given(positive_spectra())
def test_partition_guarantees(case):
    lam, r = case
    assume(np.min(np.diff(lam)) < -1e-9)
    blocks = bounds.eigen_partition(lam, 0, r)
    flat = sorted(t for blk in blocks for t in blk)
    assert flat == list(range(1, r + 1))
    whole_gap = bounds.effective_gap(lam, 0, r)
    kappa = bounds.condition_number(lam[:r])
    assert len(blocks) <= min(r, 2 + 2 * math.log2(kappa)) + 1e-12
    for blk in blocks:
        assert list(blk) == list(range(blk[0], blk[-1] - 1, -1))
        s_j, r_j = blk[-1] - 1, len(blk)
        window = lam[s_j:s_j + r_j]
        assert bounds.condition_number(window) <= 2 * r_j + 1e-9
        assert bounds.effective_gap(lam, s_j, r_j) >= whole_gap - 1e-9
        assert np.min(np.abs(window)) >= np.min(np.abs(lam[:r]))


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


class TestScalarHelpers:
    def test_H_anchors(self):
        assert bounds.H_func(1, 0) == 3
        assert bounds.H_func(1, 1) == pytest.approx(4 / 3 + 0.5 * 0.375, abs=1e-15)
        assert 2 * bounds.H_func(1, 1) <= 3.06
        assert 2 * bounds.H_func(2, 0) == pytest.approx(14 / 3, abs=1e-12)

    def test_H_domain(self):
        with pytest.raises(DomainError):
            bounds.H_func(0, 1)

    def test_F(self):
        assert bounds.F(2) == pytest.approx(4 * math.e**2)
        with pytest.raises(DomainError):
            bounds.F(-1)

    def test_F_inv_anchors(self):
        assert abs(bounds.F_inv(math.e) - 1) <= 1e-12
        assert bounds.F_inv(4 * math.e**2) == pytest.approx(2, abs=1e-12)

    @pytest.mark.parametrize("y", [1e-6, 0.3, 2.0, 50.0, 1e6])
    def test_F_inv_matches_root_finder(self, y):
        assert bounds.F_inv(y) == pytest.approx(F_oracle_inv(y), rel=1e-12)

    def test_F_inv_domain(self):
        with pytest.raises(DomainError):
            bounds.F_inv(0.0)

    def test_delta_star_floor(self):
        assert bounds.delta_star_floor(1, math.e, C=0.5) == pytest.approx(math.exp(-math.e))
        assert bounds.delta_star_floor(1000, 0.05) == pytest.approx(math.exp(-25 * math.log(50)))
        assert bounds.delta_star_floor(1000, 0.1) < bounds.delta_star_floor(1000, 0.05)
        with pytest.raises(DomainError):
            bounds.delta_star_floor(10, 0.1)

    def test_variance_and_tail_scales(self):
        n, p = 1000, 0.05
        assert bounds.variance_scale(n, p) == pytest.approx(p * (1 + (math.log(n) / 50) ** 4))
        assert bounds.tail_scale(n, p) == pytest.approx(math.sqrt(p) * (1 + (math.log(n) / 50) ** 2))
        assert bounds.tail_probability_bound(0.0, 1.0) == 1.0
        assert bounds.tail_probability_bound(3.0, 1.0) == pytest.approx(math.exp(-8))


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_F_inv_monotone_and_sublinear(y1, y2):
    lo, hi = sorted((y1, y2))
    assume(hi > lo * (1 + 1e-9))
    assert bounds.F_inv(lo) <= bounds.F_inv(hi)
    assert bounds.F_inv(lo) / math.sqrt(lo) >= bounds.F_inv(hi) / math.sqrt(hi) * (1 - 1e-12)


@given(st.floats(1e-6, 1e6))
def test_F_inv_inverts_F(y):
    assert abs(bounds.F(bounds.F_inv(y)) - y) <= 1e-10 * y


# ---------------------------------------------------------------------------
# Bernoulli tail bound
# ---------------------------------------------------------------------------


class TestBernoulliTail:
    def test_hand_evaluated(self):
        # Omega = 1 / (n p) = 0.2; bound = 2 log 10 / F_inv(0.4 log 10)
        value = bounds.bernoulli_tail_bound(np.ones(10), 0.5, 0.1)
        assert value == pytest.approx(6.749446296271719, rel=1e-12)
        L = math.log(10)
        assert value == pytest.approx(2 * L / F_oracle_inv(0.4 * L), rel=1e-12)

    def test_gamma_form(self):
        value = bounds.bernoulli_tail_bound(np.ones(10), 0.5, 0.1, gamma=1.0)
        assert value == pytest.approx(12.565439217323998, rel=1e-12)

    def test_vanishes_as_delta_tends_to_one(self):
        vals = [bounds.bernoulli_tail_bound(np.ones(50), 0.1, d) for d in (0.9, 0.99, 0.9999)]
        assert vals[0] > vals[1] > vals[2] > 0
        # small-y behaviour of F_inv makes the bound shrink like sqrt(log(1/delta))
        assert vals[2] < vals[0] / 10

    def test_degenerate(self):
        with pytest.raises(DegenerateWeightsError):
            bounds.bernoulli_tail_bound(np.ones(5), 0.0, 0.1)
        with pytest.raises(DegenerateWeightsError):
            bounds.bernoulli_tail_bound(np.zeros(5), 0.3, 0.1)

    def test_domain(self):
        with pytest.raises(DomainError):
            bounds.bernoulli_tail_bound(np.ones(5), 0.3, 1.0)

    def test_monte_carlo_validity(self):
        n, p, delta, T = 2000, 0.01, 0.05, 100_000
        bound = bounds.bernoulli_tail_bound(np.ones(n), p, delta)
        g = np.random.default_rng(2024)
        S = g.binomial(n, p, size=T) - n * p
        assert np.mean(S >= bound) <= delta + 3 * math.sqrt(delta / T)


# ---------------------------------------------------------------------------
# R, g, M
# ---------------------------------------------------------------------------


class TestQuantities:
    def test_edge_case(self):
        R, _, _ = bounds.quantities_from(math.e, 0, 1 / math.e, 0.5, 0.0)
        assert R == pytest.approx(2.0)

    def test_calculator_value(self):
        R, _, _ = bounds.quantities_from(1000, 2, 0.01, 0.5, 0.1)
        assert R == pytest.approx(13.5129, abs=5e-5)

    def test_zero_density(self):
        R, g, M = bounds.quantities_from(1000, 2, 0.01, 0.5, 0.0)
        assert g == pytest.approx(R / (0.5 * math.log(R)))
        assert M == pytest.approx(math.log(1e5))

    def test_small_R(self):
        with pytest.raises(DomainError):
            bounds.quantities_from(1.0, 0, 0.9, 0.5, 0.1)

    def test_inputs_validation(self):
        with pytest.raises(DomainError):
            er_inputs(100, 0.1, delta=1.5)
        with pytest.raises(DomainError):
            er_inputs(100, 0.1, alpha=1.0)


# ---------------------------------------------------------------------------
# binary-matrix bounds
# ---------------------------------------------------------------------------


def adjacency_by_hand(n, p, delta, alpha):
    """Term-by-term evaluation for Erdos-Renyi with r = 1 and unit constants."""
    lam = (n - 1) * p
    gap = min(lam - (-p), lam)
    kb = 1.0
    pbs = p * (n - 1) / n
    R = math.log(n / delta) + 1
    g = math.sqrt(n * pbs) + R / (alpha * math.log(R))
    U = 1 / math.sqrt(n)
    xi1 = p * math.sqrt(n - 1) / lam
    m = min(xi1, kb * 1.0)  # not psd: the second candidate is dropped
    lead = (math.sqrt(n * pbs) + math.sqrt(math.log(n / delta))) / gap
    dense = math.sqrt(n * pbs * R**alpha) / (alpha * math.log(R))
    to_u = (kb * g / gap + R / lam) * U + math.sqrt(R * p) / lam * (1 + dense / gap) + lead * m
    surr = (kb * g * (1 + R / lam) * U + math.sqrt(R * p) / lam * (kb * g + dense)) / gap + lead * m
    return to_u, surr, gap >= kb * g


class TestBinaryAdjacency:
    def test_er_matches_hand_evaluation(self):
        rep = bounds.binary_bound_adjacency(er_inputs(1000, 0.1))
        to_u, surr, cond = adjacency_by_hand(1000, 0.1, 0.05, 0.5)
        assert rep.bound_d2inf == pytest.approx(to_u, rel=1e-12)
        assert rep.bound_d2inf_surrogate == pytest.approx(surr, rel=1e-12)
        assert rep.condition_A4_satisfied == cond

    def test_from_probabilities_agrees_with_closed_form(self):
        n, p = 300, 0.1
        P = np.full((n, n), p)
        np.fill_diagonal(P, 0.0)
        a = bounds.binary_bound_adjacency(bounds.BoundInputs.from_probabilities(P, 0, 1, 0.05, 0.5))
        b = bounds.binary_bound_adjacency(er_inputs(n, p))
        assert a.bound_d2inf == pytest.approx(b.bound_d2inf, rel=1e-9)
        assert a.xi1 == pytest.approx(b.xi1, rel=1e-9)

    def test_xi2_infinite_when_not_psd(self):
        rep = bounds.binary_bound_adjacency(er_inputs(200, 0.1))
        assert rep.xi2 == math.inf
        assert rep.terms["min_term"] == min(rep.terms["min_term_xi1"], rep.terms["min_term_xi3"])

    def test_psd_model_uses_xi2(self):
        B = np.array([[0.6, 0.2], [0.2, 0.6]])
        P = models.expected_matrix(models.ModelSpec.sbm([50, 50], B, diag="kept"))
        rep = bounds.binary_bound_adjacency(bounds.BoundInputs.from_probabilities(P, 0, 2, 0.05, 0.5))
        assert math.isfinite(rep.xi2)

    def test_zero_density_limit(self):
        base = er_inputs(2000, 0.1)
        inp = bounds.BoundInputs(**{**base.__dict__, "pstar": 0.0, "pbar_star": 0.0, "pbar": 0.0})
        rep = bounds.binary_bound_adjacency(inp)
        R, g, lam = rep.R, rep.g, rep.lambda_min_star
        lead = math.sqrt(math.log(2000 / 0.05)) / rep.delta_star_gap
        expected = (g / rep.delta_star_gap + R / lam) / math.sqrt(2000) + lead * rep.terms["min_term"]
        assert g == pytest.approx(R / (0.5 * math.log(R)))
        assert rep.bound_d2inf == pytest.approx(expected, rel=1e-12)

    def test_condition_violation_is_a_flag(self):
        rep = bounds.binary_bound_adjacency(er_inputs(200, 0.1, condition=1e6))
        assert not rep.condition_A4_satisfied
        assert rep.condition_margin < 0
        assert math.isfinite(rep.bound_d2inf)

    def test_reports_nonnegative_terms(self):
        rep = bounds.binary_bound_adjacency(er_inputs(500, 0.05))
        for key, value in rep.terms.items():
            assert value >= 0, key

    def test_corollary_flags(self):
        # for ER, lambda* = (n - 1) p sits just below n p / (sqrt(n) ||U*||) = n p
        rep = bounds.binary_bound_adjacency(er_inputs(2000, 0.05))
        assert rep.terms["corollary_typical_applies"] == 0.0
        rep = bounds.binary_bound_adjacency(er_inputs(2000, 0.05, corollary=0.999))
        assert rep.terms["corollary_typical_applies"] == 1.0
        assert rep.terms["corollary_typical_d2inf"] <= rep.bound_d2inf

    def test_zero_eigenvalue_window(self):
        inp = bounds.BoundInputs(eigvals_star=np.array([3.0, 0.0, -1.0]), s=0, r=2, n=3,
                                 pstar=0.5, pbar_star=0.5, delta=0.1, alpha=0.5, mnorm_Ustar=0.5)
        with pytest.raises(ZeroEigenvalueError):
            bounds.binary_bound_adjacency(inp)

    def test_bit_for_bit_reproducible(self):
        a = bounds.binary_bound_adjacency(er_inputs(700, 0.05)).as_items()
        b = bounds.binary_bound_adjacency(er_inputs(700, 0.05)).as_items()
        assert a == b


@given(st.integers(2000, 100_000), st.floats(0.001, 0.5), st.floats(1e-6, 0.5), st.floats(1.01, 100))
def test_bounds_monotone_in_delta(n, p, delta, factor):
    small, big = delta / factor, delta
    a = bounds.binary_bound_adjacency(er_inputs(n, p, delta=small))
    b = bounds.binary_bound_adjacency(er_inputs(n, p, delta=big))
    assert a.bound_d2inf >= b.bound_d2inf * (1 - 1e-12)
    assert a.bound_d2inf_surrogate >= b.bound_d2inf_surrogate * (1 - 1e-12)


class TestLaplacianBound:
    def test_theta_hand_case(self):
        assert bounds.theta_star([1.0], np.full(5, 10.0)) == pytest.approx(1 / 9)

    def test_theta_zero_window(self):
        assert bounds.theta_star([0.0], [3.0, 4.0]) == 0.0

    def test_theta_undefined(self):
        with pytest.raises(ThetaUndefinedError):
            bounds.theta_star([2.0], [2.0, 5.0])

    def test_theta_at_stated_block_values(self):
        # window value m rho (a - b) against diagonal m rho (a + (K - 1) b)
        K, m, a, b, rho = 2, 100, 9.0, 3.0, 0.01
        value = bounds.theta_star([m * rho * (a - b)], [m * rho * (a + (K - 1) * b)])
        assert value == pytest.approx((a - b) / (K * b))

    def test_theta_on_actual_expected_laplacian(self):
        # the nonzero block eigenvalue of E L is n rho b = m rho K b, which gives
        # Theta* = m K b / (m (a - b) - a) rather than (a - b) / (K b)
        K, m, a, b, rho = 2, 100, 12.0, 2.0, 0.01
        spec = models.ModelSpec.four_parameter(K, m, a, b, rho, diag="kept")
        L = models.laplacian(models.expected_matrix(spec))
        values = np.sort(np.linalg.eigvalsh(L))
        window = values[1:K]
        value = bounds.theta_star(window, np.diag(L))
        assert window[0] == pytest.approx(m * rho * K * b)
        assert value == pytest.approx(m * K * b / (m * (a - b) - a), rel=1e-10)
        assert value != pytest.approx((a - b) / (K * b), rel=0.1)

    def test_report(self):
        K, m, a, b = 2, 150, 18.0, 2.0
        n = K * m
        rho = math.log(n) / n
        P = models.expected_matrix(models.ModelSpec.four_parameter(K, m, a, b, rho))
        inp = bounds.BoundInputs.from_probabilities(P, n - K, K - 1, 0.05, 0.5, "laplacian")
        rep = bounds.binary_bound_laplacian(inp, models.laplacian(P).diagonal())
        assert rep.theta_star > 0
        assert rep.terms["theta"] == pytest.approx(5 * rep.theta_star)
        assert rep.terms["kappa_prime"] == pytest.approx(1 + n * inp.pbar_star / rep.lambda_min_star)
        assert rep.bound_d2inf > 0 and rep.bound_d2inf_surrogate > 0


# ---------------------------------------------------------------------------
# generic bounds
# ---------------------------------------------------------------------------


GENERIC_ZERO = dict(L1=0.0, L2=0.0, L3=0.0, lambda_minus=0.0, E_plus=0.0, Ebar_plus=0.0,
                    E_inf=0.0, b_inf=0.0, b2=0.0, mnorm_EUstar=0.0)


class TestGenericBounds:
    def common(self):
        return dict(eigvals_star=(10.0, 6.0, 1.0, -1.0), s=0, r=2, mnorm_Ustar=0.3,
                    mnorm_Astar=2.0, maxnorm_Astar=0.5, mnorm_Ubar_star=0.7, psd=False)

    def test_all_zero(self):
        rep = bounds.generic_bound_terms(**GENERIC_ZERO, **self.common())
        assert rep.sigma == 0 and rep.bound_d2inf == 0 and rep.bound_d2inf_surrogate == 0

    def test_hand_evaluated(self):
        plug = dict(L1=0.1, L2=1.0, L3=0.2, lambda_minus=0.3, E_plus=0.4, Ebar_plus=0.5,
                    E_inf=0.05, b_inf=0.02, b2=0.03, mnorm_EUstar=0.06)
        rep = bounds.generic_bound_terms(**plug, **self.common())
        gap, lm, kb = 5.0, 6.0, min(10 / 6, 4)
        eta = 0.1
        sigma = (kb * 1.0 + 0.2 + 1) * eta + 0.4
        m = min(0.4 * 2.0 / lm, 0.5 * kb * 0.7)
        common = 0.4 * 0.03 / lm + m
        assert rep.eta == pytest.approx(eta)
        assert rep.sigma == pytest.approx(sigma)
        assert rep.bound_d2inf_surrogate == pytest.approx(72 / gap * (sigma * (0.3 + 0.06 / lm) + common))
        assert rep.bound_d2inf == pytest.approx(72 * 0.06 / lm + 72 / gap * (sigma * 0.3 + common))
        assert rep.condition_margin == pytest.approx(gap - 4 * (sigma + 0.1 + 0.3))

    def test_independent_plugins(self):
        L1, L2, L3 = bounds.independent_plugins(2.0, 0.5, 0.25, 4.0)
        assert (L1, L2, L3) == pytest.approx((math.sqrt(2) * 2.5, 1.0, 2.75 / 4))

    def test_m_dependent_plugins(self):
        L1, L2, L3 = bounds.independent_plugins(2.0, 0.5, 0.25, 4.0, m=3)
        assert (L1, L2, L3) == pytest.approx((math.sqrt(6) * 2.5, 3.0, 3 * 2.75 / 4))

    def test_surgery_terms(self):
        rep = bounds.surgery_bound_terms(
            theta=2.0, L1=0.1, L2=1.0, L3=0.2, lambda_minus=0.3, E_plus=0.4, Et_inf=0.05,
            bt_inf=0.02, bt2=0.03, eigvals_star=(10.0, 6.0, 1.0), s=0, r=2, mnorm_Ustar=0.3,
            mnorm_EUstar=0.06, mnorm_Atilde_star=1.5)
        gap, lm = 5.0, 6.0
        sigma = (10 / 6 + 0.2 + 1) * 0.1 + 0.4
        lead = 0.16 / 25 + 2 * sigma / gap
        cross = 2 * (0.03 + 1.5) * 0.4 / (lm * gap)
        assert rep.bound_d2inf_surrogate == pytest.approx(136 * (lead * (0.3 + 2 * 0.06 / lm) + cross))
        assert rep.condition_margin == pytest.approx(gap - 4 * (2 * sigma + 0.1 + 0.3 + 0.4))

    def test_surgery_correction_reduces_to_plain_case(self, rng):
        E = rng.standard_normal((6, 6))
        E = E + E.T
        U = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        lam = np.array([4.0, 3.0])
        V = bounds.surgery_correction(E, U, lam, np.zeros(6))
        np.testing.assert_allclose(V, E @ U / lam)

    def test_surgery_correction_undefined(self, rng):
        with pytest.raises(ThetaUndefinedError):
            bounds.surgery_correction(np.eye(2), np.eye(2)[:, :1], [1.0], [1.0, 0.0])

    def test_constants_override(self):
        c = bounds.Constants().override(generic=1)
        assert c.generic == 1.0 and c.surgery == 136.0
        with pytest.raises(InputError):
            bounds.Constants().override(nonsense=2)


# ---------------------------------------------------------------------------
# binary-tree model conditions
# ---------------------------------------------------------------------------


class TestFirstSplit:
    def test_t_zero(self):
        v = bounds.first_split_tail(0.7, 0.3, 0.0)
        assert v == pytest.approx(-0.5 * (1 - math.sqrt(0.4)) ** 2)

    def test_hand_value(self):
        assert bounds.first_split_tail(0.7, 0.3, 0.1) == pytest.approx(-0.02172993137261637)

    def test_vanishes_without_separation(self):
        assert abs(bounds.first_split_tail(1.0, 1e-9, 0.5)) < 1e-8

    def test_disassortative_sign(self):
        a = bounds.first_split_tail(0.7, 0.3, 0.1, assortative=True)
        b = bounds.first_split_tail(0.7, 0.3, 0.1, assortative=False)
        assert b < a

    def test_domain(self):
        with pytest.raises(DomainError):
            bounds.first_split_tail(0.3, 0.3, 0.1)

    def test_xi_terms(self):
        x1, x2 = bounds.first_split_xi(50.0, 20.0, 1000, 0.05, 4, 0.5)
        assert x1 > 0
        assert x2 == pytest.approx(min(math.sqrt(50), math.sqrt(80)))


class TestPartialRecovery:
    def test_abar(self):
        assert bounds.abar((40, 20, 5), 1) == 40
        assert bounds.abar((40, 20, 5), 2) == 30

    def test_depth_one_threshold(self):
        assert bounds.partial_recovery_condition((16, 4)).layers == {2: True}
        assert bounds.partial_recovery_condition((9, 4)).layers == {2: False}

    def test_strong_separation(self):
        flags = bounds.partial_recovery_condition((64, 16, 1))
        assert flags.layers == {2: True, 3: True}
        assert not flags.leaves_impossible

    def test_equal_top_coefficients(self):
        flags = bounds.partial_recovery_condition((20, 20, 5))
        assert flags.layers[3] is False
        assert flags.leaves_impossible

    def test_reference_cells(self):
        a = bounds.partial_recovery_condition((40, 20, 5))
        b = bounds.partial_recovery_condition((20.2, 20, 5))
        assert a.layers == {2: True, 3: False} and a.leaves_impossible
        assert b.layers == {2: True, 3: False} and b.leaves_impossible

    def test_ell(self):
        assert bounds.partial_recovery_condition((64, 16, 1), ell=1).layers == {2: True}
        with pytest.raises(OutOfRangeError):
            bounds.partial_recovery_condition((64, 16, 1), ell=3)

    def test_not_monotone(self):
        with pytest.raises(NotMonotoneError):
            bounds.partial_recovery_condition((5, 20, 1))


@given(st.floats(0.1, 100), st.floats(0.1, 100))
def test_depth_one_flags_are_complementary(a0, a1):
    gap = abs(math.sqrt(a0) - math.sqrt(a1))
    assume(abs(gap - math.sqrt(2)) > 1e-9)
    flags = bounds.partial_recovery_condition((max(a0, a1), min(a0, a1)))
    assert flags.layers[2] == (not flags.leaves_impossible)


def test_leading_vector_inputs_er():
    n, p = 50, 0.2
    P = np.full((n, n), p)
    np.fill_diagonal(P, 0)
    out = bounds.leading_vector_inputs(P)
    assert out["zeta"] == pytest.approx(1.0)
    assert out["gap"] == pytest.approx((n - 1) * p)
    assert out["pbar"] == pytest.approx(p)
