"""Slot statistics, LRT thresholds, detection/error/capacity, link simulation."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcflow.link import (
    HypothesisStats,
    LinkParams,
    NegativeGammaError,
    Threshold,
    average_detection,
    capacity,
    constant_arrivals,
    detect,
    detection_probs,
    error_probability,
    hypothesis_stats,
    link_params_from_config,
    mutual_information,
    negative_branch_mass,
    optimal_threshold,
    optimal_thresholds,
    roc_sweep,
    simulate_link,
    slot_error_sweep,
    validity_advisories,
)
from mcflow.hitting_time import arrival_probability
from mcflow.numerics import RandomStream, gaussian_tail_q
from mcflow.presets import make_config

from oracles import binary_entropy, binary_mi


def _params(i=4, Q=60.0, beta=0.5, mu_o=10.0, sigma2_o=10.0, profile=(0.4, 0.1)):
    budgets = (float(Q),) * i if np.ndim(Q) == 0 else tuple(Q)
    return LinkParams(
        i=i, Q=budgets, beta=beta, mu_o=mu_o, sigma2_o=sigma2_o,
        arrivals=constant_arrivals(profile),
    )


@pytest.fixture(scope="module")
def fig7_params():
    config = make_config("mobileBoth", v=1e-3, T=2e-3)
    return link_params_from_config(
        config, i=10, Q=90.0, beta=0.5, mu_o=10.0, sigma2_o=10.0
    )


# ------------------------------------------------------------- parameters

def test_link_params_validation():
    good = dict(i=2, Q=(30.0, 30.0), beta=0.5, mu_o=0.0, sigma2_o=1.0,
                arrivals=constant_arrivals([0.5]))
    LinkParams(**good)
    for bad in (
        dict(good, i=0, Q=()),
        dict(good, Q=(30.0,)),
        dict(good, Q=(30.0, 0.5)),
        dict(good, beta=0.0),
        dict(good, beta=1.0),
        dict(good, sigma2_o=-1.0),
        dict(good, mu_o=-1.0),
    ):
        with pytest.raises(ValueError):
            LinkParams(**bad)


def test_constant_arrivals_contract():
    view = constant_arrivals([0.5, 0.25])
    assert view(1, 0) == 0.5
    assert view(7, 0) == 0.5       # slot-independent
    assert view(3, 1) == 0.25
    assert view(3, 2) == 0.0       # beyond the profile
    with pytest.raises(ValueError):
        view(3, -1)


def test_config_binding_broadcasts_budget_and_shifts_slots():
    config = make_config("mobileBoth", v=1e-3, T=2e-3)
    params = link_params_from_config(config, i=3, Q=90.0, beta=0.5, mu_o=10.0,
                                     sigma2_o=10.0)
    assert params.Q == (90.0, 90.0, 90.0)
    for j, d in ((1, 0), (2, 0), (2, 1), (3, 2)):
        assert params.arrivals(j, d) == arrival_probability(config, j + 1, d)


def test_validity_advisories_flag_thin_slots():
    assert validity_advisories(_params(profile=(0.5,), Q=30.0)) == ()
    thin = validity_advisories(_params(i=3, profile=(0.1,), Q=30.0))
    assert len(thin) == 3 and "slot 1" in thin[0]
    # failures side: nearly saturated arrivals strain the other tail
    top = validity_advisories(_params(i=1, profile=(0.9,), Q=30.0))
    assert len(top) == 1


# ---------------------------------------------------------------- moments

def test_first_slot_stats_have_no_interference():
    params = _params(i=1, Q=(40.0,), mu_o=2.0, sigma2_o=3.0, profile=(0.3,))
    st1 = hypothesis_stats(params, 1)
    assert st1.mu0 == pytest.approx(2.0)
    assert st1.sigma2_0 == pytest.approx(3.0 + 2.0)
    assert st1.mu1 == pytest.approx(40.0 * 0.3 + 2.0)
    assert st1.sigma2_1 == pytest.approx(40.0 * 0.3 * 0.7 + 3.0 + (40.0 * 0.3 + 2.0))
    with pytest.raises(ValueError):
        hypothesis_stats(params, 0)
    with pytest.raises(ValueError):
        hypothesis_stats(params, 2)


def _enumerated_stats(params: LinkParams, j: int) -> HypothesisStats:
    """Independent re-derivation: enumerate the 2^(j-1) interference patterns
    and add the hypothesis-conditional counting variance at the end."""
    terms = [(params.Q[j - k - 1], params.arrivals(j - k, k)) for k in range(1, j)]

    def moments(signal_on: bool):
        q0 = params.arrivals(j, 0)
        budget = params.Q[j - 1]
        base_mean = (budget * q0 if signal_on else 0.0) + params.mu_o
        base_var = (budget * q0 * (1.0 - q0) if signal_on else 0.0) + params.sigma2_o
        probs, means, variances = [], [], []
        for combo in itertools.product((0, 1), repeat=len(terms)):
            p, m, v = 1.0, base_mean, base_var
            for on, (Qk, qk) in zip(combo, terms):
                p *= params.beta if on else 1.0 - params.beta
                if on:
                    m += Qk * qk
                    v += Qk * qk * (1.0 - qk)
            probs.append(p)
            means.append(m)
            variances.append(v)
        probs, means, variances = map(np.asarray, (probs, means, variances))
        mean = float(probs @ means)
        var = float(probs @ (variances + means**2) - mean**2)
        return mean, var

    mu0, v0 = moments(False)
    mu1, v1 = moments(True)
    return HypothesisStats(j=j, mu0=mu0, sigma2_0=v0 + mu0, mu1=mu1, sigma2_1=v1 + mu1)


@pytest.mark.parametrize("j", [2, 3, 5])
def test_stats_match_interference_enumeration(j):
    params = _params(i=5, Q=(30.0, 45.0, 60.0, 80.0, 100.0), beta=0.35,
                     mu_o=4.0, sigma2_o=7.0, profile=(0.4, 0.15, 0.05, 0.02))
    got = hypothesis_stats(params, j)
    want = _enumerated_stats(params, j)
    assert got.mu0 == pytest.approx(want.mu0, rel=1e-12)
    assert got.sigma2_0 == pytest.approx(want.sigma2_0, rel=1e-12)
    assert got.mu1 == pytest.approx(want.mu1, rel=1e-12)
    assert got.sigma2_1 == pytest.approx(want.sigma2_1, rel=1e-12)


def test_stats_recursion_telescopes_for_stationary_arrivals():
    profile = tuple(0.5 * 0.6**d for d in range(8))
    params = _params(i=8, Q=70.0, beta=0.3, mu_o=6.0, sigma2_o=2.0, profile=profile)
    Q, beta = 70.0, params.beta
    for j in range(1, 8):
        cur = hypothesis_stats(params, j)
        nxt = hypothesis_stats(params, j + 1)
        qj = profile[j]
        load = Q * qj
        d_mu = beta * load
        d_var = beta * Q * qj * (1.0 - qj) + beta * (1.0 - beta) * load * load + d_mu
        assert nxt.mu0 - cur.mu0 == pytest.approx(d_mu, rel=1e-12)
        assert nxt.mu1 - cur.mu1 == pytest.approx(d_mu, rel=1e-12)
        assert nxt.sigma2_0 - cur.sigma2_0 == pytest.approx(d_var, rel=1e-12)
        assert nxt.sigma2_1 - cur.sigma2_1 == pytest.approx(d_var, rel=1e-12)


# ------------------------------------------------------------- thresholds

def test_threshold_square_root_identity():
    params = _params()
    for thr, stats in zip(optimal_thresholds(params),
                          (hypothesis_stats(params, j) for j in range(1, 5))):
        assert not thr.fallback
        assert thr.gamma_prime == pytest.approx(math.sqrt(thr.gamma) - thr.alpha)
        assert stats.mu0 < thr.gamma_prime < stats.mu1


def test_threshold_agrees_with_log_likelihood_ratio_sign():
    stats = HypothesisStats(j=1, mu0=12.0, sigma2_0=30.0, mu1=25.0, sigma2_1=48.0)
    for beta in (0.2, 0.5, 0.8):
        thr = optimal_threshold(stats, beta)
        log_prior = math.log((1.0 - beta) / beta)
        for R in np.linspace(-thr.alpha, stats.mu1 + 8.0 * math.sqrt(stats.sigma2_1), 801):
            if abs(R - thr.gamma_prime) < 1e-9:
                continue
            llr = (
                -0.5 * math.log(stats.sigma2_1 / stats.sigma2_0)
                - (R - stats.mu1) ** 2 / (2.0 * stats.sigma2_1)
                + (R - stats.mu0) ** 2 / (2.0 * stats.sigma2_0)
            )
            assert (llr >= log_prior) == bool(detect(float(R), thr)), f"R={R}"


def test_equal_variance_fallback_is_midpoint_rule():
    stats = HypothesisStats(j=2, mu0=10.0, sigma2_0=4.0, mu1=14.0, sigma2_1=4.0)
    thr = optimal_threshold(stats, 0.3)
    assert thr.fallback and thr.gamma == 0.0
    want = 12.0 + 4.0 * math.log(0.7 / 0.3) / 4.0
    assert thr.gamma_prime == pytest.approx(want, rel=1e-12)
    assert thr.alpha == -thr.gamma_prime


def test_uninformative_slot_decides_by_prior():
    stats = HypothesisStats(j=1, mu0=5.0, sigma2_0=2.0, mu1=5.0, sigma2_1=2.0)
    assert optimal_threshold(stats, 0.4).gamma_prime == math.inf
    assert detect(1e9, optimal_threshold(stats, 0.4)) == 0
    assert optimal_threshold(stats, 0.6).gamma_prime == -math.inf
    assert detect(-1e9, optimal_threshold(stats, 0.6)) == 1


def test_dominated_hypothesis_raises():
    stats = HypothesisStats(j=1, mu0=0.0, sigma2_0=1.0, mu1=0.1, sigma2_1=100.0)
    with pytest.raises(NegativeGammaError):
        optimal_threshold(stats, 0.99)


def test_optimal_threshold_rejects_bad_prior():
    stats = HypothesisStats(j=1, mu0=1.0, sigma2_0=1.0, mu1=2.0, sigma2_1=3.0)
    with pytest.raises(ValueError):
        optimal_threshold(stats, 0.0)


def test_tie_decides_one():
    thr = Threshold(j=1, alpha=-5.0, gamma=0.0, gamma_prime=5.0, fallback=True)
    assert detect(5.0, thr) == 1
    assert detect(4.999999, thr) == 0


def test_negative_branch_mass_is_gaussian_tail():
    stats = HypothesisStats(j=1, mu0=12.0, sigma2_0=30.0, mu1=25.0, sigma2_1=48.0)
    thr = optimal_threshold(stats, 0.5)
    m0, m1 = negative_branch_mass(stats, thr)
    assert m0 == pytest.approx(
        float(gaussian_tail_q((stats.mu0 + thr.alpha) / math.sqrt(stats.sigma2_0)))
    )
    assert 0.0 <= m1 < 1e-3  # far branch barely populated in this regime
    fallback = Threshold(j=1, alpha=-3.0, gamma=0.0, gamma_prime=3.0, fallback=True)
    assert negative_branch_mass(stats, fallback) == (0.0, 0.0)


def test_slot_threshold_minimizes_slot_error(fig7_params):
    params = fig7_params
    for j in (1, 5, 10):
        thr = optimal_threshold(hypothesis_stats(params, j), params.beta)
        grid = np.linspace(thr.gamma_prime - 6.0, thr.gamma_prime + 6.0, 241)
        errors = slot_error_sweep(params, j, grid)
        step = grid[1] - grid[0]
        assert abs(grid[int(np.argmin(errors))] - thr.gamma_prime) <= step + 1e-12


# ------------------------------------------------- detection and averages

def test_detection_prob_basics():
    stats = HypothesisStats(j=1, mu0=10.0, sigma2_0=9.0, mu1=20.0, sigma2_1=16.0)
    p_d, p_fa = detection_probs(stats, 10.0)
    assert p_fa == pytest.approx(0.5)
    assert p_d > p_fa
    assert detection_probs(stats, 1e9) == (0.0, 0.0)
    assert detection_probs(stats, -1e9) == (1.0, 1.0)
    with pytest.raises(ValueError):
        detection_probs(HypothesisStats(1, 0.0, 0.0, 1.0, 1.0), 0.5)


def test_average_detection_single_slot_and_roc_consistency(fig7_params):
    params = fig7_params
    grid = np.linspace(10.0, 200.0, 25)
    p_fa_sweep, p_d_sweep = roc_sweep(params, grid)
    for idx in (0, 9, 24):
        g = float(grid[idx])
        p_d, p_fa = average_detection(params, [g] * params.i)
        assert p_d == pytest.approx(float(p_d_sweep[idx]), rel=1e-12)
        assert p_fa == pytest.approx(float(p_fa_sweep[idx]), rel=1e-12)
    assert np.all(np.diff(p_d_sweep) <= 1e-15)
    assert np.all(np.diff(p_fa_sweep) <= 1e-15)
    assert np.all((p_d_sweep >= 0.0) & (p_d_sweep <= 1.0))


def test_threshold_list_length_checked():
    params = _params(i=3)
    with pytest.raises(ValueError):
        average_detection(params, [10.0, 20.0])


def test_error_probability_single_slot_formula():
    params = _params(i=1, Q=(50.0,), beta=0.35, profile=(0.5,))
    stats = hypothesis_stats(params, 1)
    gamma = 30.0
    p_d, p_fa = detection_probs(stats, gamma)
    want = 0.35 * (1.0 - p_d) + 0.65 * p_fa
    assert error_probability(params, [gamma]) == pytest.approx(want, rel=1e-12)


# ----------------------------------------------------- mutual information

def test_mutual_information_known_channels():
    assert mutual_information(1.0, 0.0, 0.5) == pytest.approx(1.0)
    assert mutual_information(0.37, 0.37, 0.41) == 0.0
    assert mutual_information(0.0, 0.0, 0.3) == 0.0
    bsc = mutual_information(0.9, 0.1, 0.5)
    assert bsc == pytest.approx(1.0 - binary_entropy(0.1), rel=1e-12)
    with pytest.raises(ValueError):
        mutual_information(1.2, 0.0, 0.5)
    with pytest.raises(ValueError):
        mutual_information(0.5, 0.1, 1.0)


def test_mutual_information_relabeling_symmetry():
    for p_d, p_fa, beta in ((0.8, 0.2, 0.3), (0.55, 0.1, 0.7), (0.99, 0.5, 0.45)):
        assert mutual_information(p_d, p_fa, beta) == pytest.approx(
            mutual_information(p_fa, p_d, 1.0 - beta), rel=1e-12
        )


@settings(max_examples=200, deadline=None)
@given(
    p_d=st.floats(0.0, 1.0),
    p_fa=st.floats(0.0, 1.0),
    beta=st.floats(0.01, 0.99),
)
def test_mutual_information_nonnegative_and_matches_oracle(p_d, p_fa, beta):
    got = mutual_information(p_d, p_fa, beta)
    assert got >= 0.0
    assert got == pytest.approx(binary_mi(p_d, p_fa, beta), abs=1e-12)


# ---------------------------------------------------------------- capacity

def test_capacity_perfect_channel():
    params = _params(i=3, Q=30.0, mu_o=0.0, sigma2_o=1e-12, profile=(1.0,))
    c, beta_star = capacity(params)
    assert c > 1.0 - 1e-6
    assert beta_star == pytest.approx(0.5, abs=1e-3)


def test_capacity_grid_refinement_is_stable():
    params = _params(i=3, Q=60.0, mu_o=10.0, sigma2_o=10.0, profile=(0.4, 0.1))
    c_coarse, _ = capacity(params)
    c_fine, _ = capacity(params, np.linspace(0.01, 0.99, 501))
    assert abs(c_coarse - c_fine) < 1e-4


def test_capacity_decreases_with_frame_length():
    values = []
    for i in range(1, 7):
        params = _params(i=i, Q=30.0, mu_o=10.0, sigma2_o=10.0,
                         profile=(0.5, 0.2, 0.1))
        values.append(capacity(params)[0])
    diffs = np.diff(values)
    assert np.all(diffs <= 1e-9), values


def test_capacity_rejects_bad_grid():
    params = _params(i=1, Q=(30.0,), profile=(0.5,))
    with pytest.raises(ValueError):
        capacity(params, [])
    with pytest.raises(ValueError):
        capacity(params, [0.0, 0.5])


# -------------------------------------------------------------- simulation

def _mixture_rates(params, thresholds):
    """Exact slot-averaged (P_D, P_FA, P_e) of the matched sampler.

    The sampler conditions every interfering term on its own symbol, so the
    slot count is a 2^m mixture of Gaussians; enumerating the symbol patterns
    gives the sampler's true rates, of which the single-Gaussian analysis is
    the moment-matched collapse.
    """
    p_d = np.empty(params.i)
    p_fa = np.empty(params.i)
    for j in range(1, params.i + 1):
        stats = hypothesis_stats(params, j)
        gamma = thresholds[j - 1].gamma_prime
        terms = []
        for k in range(1, j):
            budget = params.Q[j - k - 1]
            qk = params.arrivals(j - k, k)
            terms.append((budget * qk, budget * qk * (1.0 - qk)))
        q0 = params.arrivals(j, 0)
        budget = params.Q[j - 1]
        for signal_on, out in ((0, p_fa), (1, p_d)):
            base_mean = params.mu_o + (budget * q0 if signal_on else 0.0)
            base_var = (
                params.sigma2_o
                + (budget * q0 * (1.0 - q0) if signal_on else 0.0)
                + (stats.mu1 if signal_on else stats.mu0)
            )
            total = 0.0
            for combo in itertools.product((0, 1), repeat=len(terms)):
                weight = 1.0
                mean, var = base_mean, base_var
                for on, (m, v) in zip(combo, terms):
                    weight *= params.beta if on else 1.0 - params.beta
                    if on:
                        mean += m
                        var += v
                total += weight * float(gaussian_tail_q((gamma - mean) / math.sqrt(var)))
            out[j - 1] = total
    p_e = params.beta * (1.0 - p_d) + (1.0 - params.beta) * p_fa
    return float(p_d.mean()), float(p_fa.mean()), float(p_e.mean())


def test_simulated_rates_match_mixture_enumeration():
    params = _params(i=4, Q=60.0, beta=0.5, mu_o=10.0, sigma2_o=10.0,
                     profile=(0.4, 0.1))
    thresholds = optimal_thresholds(params)
    res = simulate_link(params, thresholds, 40_000, RandomStream(99, 5))
    p_d_x, p_fa_x, p_e_x = _mixture_rates(params, thresholds)
    assert res.p_e == pytest.approx(p_e_x, abs=3.0 * res.se_p_e)
    assert res.p_d == pytest.approx(p_d_x, abs=3.0 * res.se_p_d)
    assert res.p_fa == pytest.approx(p_fa_x, abs=3.0 * res.se_p_fa)
    # the collapsed-Gaussian analysis sits close to the exact mixture even at
    # this deliberately ISI-heavy operating point
    pe = error_probability(params, thresholds)
    p_d, p_fa = average_detection(params, thresholds)
    assert abs(p_e_x - pe) < 4e-3
    assert abs(p_d_x - p_d) < 4e-3
    assert abs(p_fa_x - p_fa) < 4e-3


def test_exact_sampling_of_saturated_channel_is_quiet_under_silence():
    # every released molecule arrives in-slot: silence gives identically zero
    # counts, while transmissions still carry the counting perturbation
    params = LinkParams(i=2, Q=(50.0, 50.0), beta=0.5, mu_o=0.0, sigma2_o=0.0,
                        arrivals=constant_arrivals([1.0]))
    gamma = 35.0
    res = simulate_link(params, [gamma, gamma], 40_000, RandomStream(7, 1),
                        sampling_mode="binomial-exact")
    assert res.p_fa == 0.0
    p_d_true = float(gaussian_tail_q((gamma - 50.0) / math.sqrt(50.0)))
    assert res.p_d == pytest.approx(p_d_true, abs=3.0 * res.se_p_d)
    assert res.p_e > 0.0  # misses remain possible: counting noise never vanishes


def test_exact_and_matched_sampling_agree_for_fat_budgets():
    params = _params(i=4, Q=120.0, beta=0.5, mu_o=10.0, sigma2_o=10.0,
                     profile=(0.3, 0.05))
    thresholds = optimal_thresholds(params)
    res_g = simulate_link(params, thresholds, 100_000, RandomStream(17, 2))
    res_b = simulate_link(params, thresholds, 100_000, RandomStream(17, 3),
                          sampling_mode="binomial-exact")
    assert abs(res_g.p_e - res_b.p_e) < 0.01


def test_simulation_determinism_and_validation():
    params = _params(i=2, Q=30.0, profile=(0.5,))
    thresholds = optimal_thresholds(params)
    a = simulate_link(params, thresholds, 2000, RandomStream(5, 0))
    b = simulate_link(params, thresholds, 2000, RandomStream(5, 0))
    assert a.p_e == b.p_e and a.p_d == b.p_d and a.p_fa == b.p_fa
    c = simulate_link(params, thresholds, 2000, RandomStream(5, 1))
    assert c.p_e != a.p_e or c.p_d != a.p_d
    with pytest.raises(ValueError):
        simulate_link(params, thresholds[:1], 100, RandomStream(5, 0))
    with pytest.raises(ValueError):
        simulate_link(params, thresholds, 0, RandomStream(5, 0))
    with pytest.raises(ValueError):
        simulate_link(params, thresholds, 100, RandomStream(5, 0),
                      sampling_mode="exact")
