"""OOK link analysis: hypothesis statistics, LRT detection, error rate,
mutual information, capacity, and a Monte Carlo link simulator.

Per slot the receiver counts current-slot arrivals, leftovers from earlier
slots (ISI), a Gaussian background from other sources (MSI), and a Gaussian
counting perturbation whose variance equals the expected count. All terms
are Gaussian-approximated, so each slot is a two-Gaussian binary test whose
optimal Bayes rule reduces to a single threshold on the count.

The ISI statistics, the threshold, and the detection probabilities all
depend on the symbol prior beta, so capacity search re-runs the entire chain
per candidate prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize as _optimize

from .hitting_time import arrival_probability
from .numerics import RandomStream, gaussian_tail_q
from .scenario import ChannelConfig

__all__ = [
    "LinkParams",
    "HypothesisStats",
    "Threshold",
    "NegativeGammaError",
    "link_params_from_config",
    "constant_arrivals",
    "validity_advisories",
    "hypothesis_stats",
    "optimal_threshold",
    "optimal_thresholds",
    "negative_branch_mass",
    "detect",
    "detection_probs",
    "average_detection",
    "error_probability",
    "mutual_information",
    "capacity",
    "roc_sweep",
    "slot_error_sweep",
    "LinkSimResult",
    "simulate_link",
]

_EQUAL_VARIANCE_RTOL = 1e-9
_GAUSSIAN_VALIDITY_FLOOR = 5.0


class NegativeGammaError(ValueError):
    """The quadratic test has no real root: one hypothesis always wins.

    Raised instead of guessing a rule; callers in that regime should inspect
    the statistics rather than trust a threshold.
    """


@dataclass(frozen=True)
class LinkParams:
    """Link-level scenario: slot count, per-slot budgets, prior, MSI moments,
    and the arrival view q(transmit_slot, delay) feeding the ISI sums."""

    i: int
    Q: Tuple[float, ...]
    beta: float
    mu_o: float
    sigma2_o: float
    arrivals: Callable[[int, int], float]

    def __post_init__(self) -> None:
        if self.i < 1:
            raise ValueError("slot count i must be at least 1")
        if len(self.Q) != self.i:
            raise ValueError("Q must list one budget per slot")
        if any(qj < 1 for qj in self.Q):
            raise ValueError("per-slot budgets must be at least 1")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly between 0 and 1")
        if self.sigma2_o < 0.0:
            raise ValueError("sigma2_o must be nonnegative")
        if self.mu_o < 0.0:
            raise ValueError("mu_o must be nonnegative")


@dataclass(frozen=True)
class HypothesisStats:
    j: int
    mu0: float
    sigma2_0: float
    mu1: float
    sigma2_1: float


@dataclass(frozen=True)
class Threshold:
    """Decision rule for one slot: decide symbol 1 iff count >= gamma_prime.

    gamma_prime = sqrt(gamma) - alpha always holds; the equal-variance
    fallback encodes its linear threshold as gamma = 0, alpha = -gamma_prime.
    """

    j: int
    alpha: float
    gamma: float
    gamma_prime: float
    fallback: bool = False


def constant_arrivals(q: Sequence[float]) -> Callable[[int, int], float]:
    """Arrival view with slot-independent delay profile q[0], q[1], ...;
    delays beyond the profile contribute nothing."""
    profile = tuple(float(x) for x in q)

    def view(transmit_slot: int, delay: int) -> float:
        if delay < 0:
            raise ValueError("delay must be nonnegative")
        return profile[delay] if delay < len(profile) else 0.0

    return view


def link_params_from_config(
    config: ChannelConfig,
    i: int,
    Q,
    beta: float,
    mu_o: float,
    sigma2_o: float,
) -> LinkParams:
    """Bind a physical scenario into link parameters.

    ``Q`` may be a scalar budget (used for every slot) or a per-slot list.

    The distance law for slot j uses j itself as the number of elapsed
    walking slots: transceiver motion starts one slot ahead of the first
    symbol, so slot j's molecules are released after j slots of accumulated
    drift and dispersion. (The plain arrival-table view counts
    release_slot - 1 slots instead; see that module's slot convention.)
    """
    if np.ndim(Q) == 0:
        budgets = (float(Q),) * i
    else:
        budgets = tuple(float(x) for x in Q)

    def view(transmit_slot: int, delay: int) -> float:
        return arrival_probability(config, transmit_slot + 1, delay)

    return LinkParams(
        i=i, Q=budgets, beta=beta, mu_o=mu_o, sigma2_o=sigma2_o, arrivals=view
    )


def validity_advisories(params: LinkParams) -> Tuple[str, ...]:
    """Slots where the Gaussian approximation of the binomial count is thin
    (expected successes or failures at or below 5)."""
    notes = []
    for j in range(1, params.i + 1):
        qj = params.arrivals(j, 0)
        budget = params.Q[j - 1]
        if budget * qj <= _GAUSSIAN_VALIDITY_FLOOR or budget * (1.0 - qj) <= _GAUSSIAN_VALIDITY_FLOOR:
            notes.append(
                f"slot {j}: budget {budget:g} with arrival probability {qj:.3g} "
                "strains the Gaussian count approximation"
            )
    return tuple(notes)


def _isi_moments(params: LinkParams, j: int) -> Tuple[float, float]:
    beta = params.beta
    mean = 0.0
    var = 0.0
    for k in range(1, j):
        budget = params.Q[j - k - 1]
        qk = params.arrivals(j - k, k)
        load = budget * qk
        mean += beta * load
        var += beta * budget * qk * (1.0 - qk) + beta * (1.0 - beta) * load * load
    return mean, var


def hypothesis_stats(params: LinkParams, j: int) -> HypothesisStats:
    """Per-slot count moments under silence (H0) and transmission (H1).

    Both variances include the counting perturbation, whose variance equals
    the hypothesis-conditional expected count.
    """
    if not 1 <= j <= params.i:
        raise ValueError("slot index j out of range")
    isi_mean, isi_var = _isi_moments(params, j)
    q0 = params.arrivals(j, 0)
    budget = params.Q[j - 1]

    mu0 = isi_mean + params.mu_o
    sigma2_0 = isi_var + params.sigma2_o + mu0
    mu1 = budget * q0 + isi_mean + params.mu_o
    sigma2_1 = budget * q0 * (1.0 - q0) + isi_var + params.sigma2_o + mu1
    return HypothesisStats(j=j, mu0=mu0, sigma2_0=sigma2_0, mu1=mu1, sigma2_1=sigma2_1)


def optimal_threshold(stats: HypothesisStats, beta: float) -> Threshold:
    """Bayes-optimal count threshold for the two-Gaussian slot test.

    The log-likelihood-ratio test is quadratic in the count; completing the
    square gives (R + alpha)^2 >= gamma and, keeping the branch the count
    actually lives on, the rule R >= sqrt(gamma) - alpha. Near-equal
    variances fall back to the classical linear mean-shift threshold.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    mu0, s0 = stats.mu0, stats.sigma2_0
    mu1, s1 = stats.mu1, stats.sigma2_1
    dv = s1 - s0
    prior_ratio = (1.0 - beta) / beta

    if dv < _EQUAL_VARIANCE_RTOL * s0:
        if mu1 == mu0:
            # uninformative slot: decide by prior alone
            gp = math.inf if beta <= 0.5 else -math.inf
            return Threshold(j=stats.j, alpha=-gp, gamma=0.0, gamma_prime=gp, fallback=True)
        gp = 0.5 * (mu0 + mu1) + s0 * math.log(prior_ratio) / (mu1 - mu0)
        return Threshold(j=stats.j, alpha=-gp, gamma=0.0, gamma_prime=gp, fallback=True)

    alpha = (mu1 * s0 - mu0 * s1) / dv
    gamma = (
        (2.0 * s1 * s0 / dv) * math.log(prior_ratio * math.sqrt(s1 / s0))
        + alpha * alpha
        + (mu1 * mu1 * s0 - mu0 * mu0 * s1) / dv
    )
    if gamma < 0.0:
        raise NegativeGammaError(
            f"slot {stats.j}: the quadratic test has no real threshold "
            "(one hypothesis dominates at every count)"
        )
    return Threshold(
        j=stats.j, alpha=alpha, gamma=gamma, gamma_prime=math.sqrt(gamma) - alpha
    )


def optimal_thresholds(params: LinkParams) -> Tuple[Threshold, ...]:
    """Per-slot optimal thresholds for the configured prior."""
    return tuple(
        optimal_threshold(hypothesis_stats(params, j), params.beta)
        for j in range(1, params.i + 1)
    )


def negative_branch_mass(stats: HypothesisStats, thr: Threshold) -> Tuple[float, float]:
    """Probability mass on the count branch R + alpha < 0 under (H0, H1).

    On that branch the one-sided rule R >= gamma_prime deviates from the
    exact likelihood-ratio test; reporting the mass makes the approximation
    measurable. Zero by construction for fallback thresholds.
    """
    if thr.fallback:
        return (0.0, 0.0)
    m0 = float(gaussian_tail_q((stats.mu0 + thr.alpha) / math.sqrt(stats.sigma2_0)))
    m1 = float(gaussian_tail_q((stats.mu1 + thr.alpha) / math.sqrt(stats.sigma2_1)))
    return (m0, m1)


def detect(R: float, thr: Threshold) -> int:
    """Slot decision: 1 iff the count reaches the threshold (tie decides 1)."""
    return 1 if R >= thr.gamma_prime else 0


def detection_probs(stats: HypothesisStats, gamma_prime: float) -> Tuple[float, float]:
    """Per-slot (detection, false-alarm) probabilities of the rule
    R >= gamma_prime under the Gaussian count model."""
    if not (stats.sigma2_0 > 0.0 and stats.sigma2_1 > 0.0):
        raise ValueError("variances must be positive")
    p_d = float(gaussian_tail_q((gamma_prime - stats.mu1) / math.sqrt(stats.sigma2_1)))
    p_fa = float(gaussian_tail_q((gamma_prime - stats.mu0) / math.sqrt(stats.sigma2_0)))
    return (p_d, p_fa)


def _per_slot_probs(params: LinkParams, thresholds) -> Tuple[np.ndarray, np.ndarray]:
    gammas = [t.gamma_prime if isinstance(t, Threshold) else float(t) for t in thresholds]
    if len(gammas) != params.i:
        raise ValueError("need one threshold per slot")
    p_d = np.empty(params.i)
    p_fa = np.empty(params.i)
    for j in range(1, params.i + 1):
        stats = hypothesis_stats(params, j)
        p_d[j - 1], p_fa[j - 1] = detection_probs(stats, gammas[j - 1])
    return p_d, p_fa


def average_detection(params: LinkParams, thresholds) -> Tuple[float, float]:
    """Slot-averaged (P_D, P_FA) for a per-slot threshold list."""
    p_d, p_fa = _per_slot_probs(params, thresholds)
    return (float(p_d.mean()), float(p_fa.mean()))


def error_probability(params: LinkParams, thresholds) -> float:
    """Slot-averaged error probability beta*(1-P_D_j) + (1-beta)*P_FA_j."""
    p_d, p_fa = _per_slot_probs(params, thresholds)
    per_slot = params.beta * (1.0 - p_d) + (1.0 - params.beta) * p_fa
    return float(per_slot.mean())


def mutual_information(p_d: float, p_fa: float, beta: float) -> float:
    """Mutual information (bits) of the binary channel with transition
    probabilities P(1|1) = p_d, P(1|0) = p_fa and input prior beta."""
    if not 0.0 <= p_d <= 1.0 or not 0.0 <= p_fa <= 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    p_one = beta * p_d + (1.0 - beta) * p_fa

    def contribution(prior: float, cond: float) -> float:
        total = 0.0
        for cond_y, p_y in ((cond, p_one), (1.0 - cond, 1.0 - p_one)):
            if cond_y > 0.0:
                # p_y >= prior*cond_y > 0 here, so the log is finite
                total += prior * cond_y * math.log2(cond_y / p_y)
        return total

    # exact cancellation (p_d == p_fa) can round to -1e-16; MI is >= 0
    return max(0.0, contribution(beta, p_d) + contribution(1.0 - beta, p_fa))


def _averaged_mi(params: LinkParams) -> float:
    total = 0.0
    for j in range(1, params.i + 1):
        stats = hypothesis_stats(params, j)
        try:
            thr = optimal_threshold(stats, params.beta)
        except NegativeGammaError:
            # one hypothesis dominates at every count: the decision is
            # constant, so the slot carries no information
            continue
        p_d, p_fa = detection_probs(stats, thr.gamma_prime)
        total += mutual_information(p_d, p_fa, params.beta)
    return total / params.i


def capacity(
    params: LinkParams,
    beta_grid: Optional[Sequence[float]] = None,
) -> Tuple[float, float]:
    """Capacity (bits/slot) and maximizing prior.

    The prior feeds the ISI statistics and every slot threshold, so the full
    analysis chain is recomputed per grid point; a golden-section refinement
    then polishes the best interior grid point. ``params.beta`` is ignored.
    """
    if beta_grid is None:
        grid = np.linspace(0.01, 0.99, 101)
    else:
        grid = np.asarray(list(beta_grid), dtype=float)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(grid >= 1.0):
            raise ValueError("beta_grid must be nonempty within (0, 1)")

    values = np.array([_averaged_mi(replace(params, beta=float(b))) for b in grid])
    best = int(np.argmax(values))
    best_beta = float(grid[best])
    best_val = float(values[best])

    if 0 < best < grid.size - 1:
        neg = lambda b: -_averaged_mi(replace(params, beta=float(b)))
        try:
            refined_beta = float(
                _optimize.golden(
                    neg,
                    brack=(float(grid[best - 1]), best_beta, float(grid[best + 1])),
                    tol=1e-7,
                )
            )
        except ValueError:
            # flat plateau around the grid argmax: not a strict bracket
            refined_beta = best_beta
        refined_val = -neg(refined_beta)
        if refined_val > best_val:
            best_beta, best_val = refined_beta, refined_val
    return (best_val, best_beta)


def roc_sweep(params: LinkParams, gamma_primes) -> Tuple[np.ndarray, np.ndarray]:
    """Slot-averaged (P_FA, P_D) along a sweep of one common threshold
    applied to every slot (deliberately suboptimal survey mode)."""
    grid = np.asarray(gamma_primes, dtype=float)
    stats = [hypothesis_stats(params, j) for j in range(1, params.i + 1)]
    p_d = np.zeros(grid.size)
    p_fa = np.zeros(grid.size)
    for st in stats:
        s0 = math.sqrt(st.sigma2_0)
        s1 = math.sqrt(st.sigma2_1)
        p_d += gaussian_tail_q((grid - st.mu1) / s1)
        p_fa += gaussian_tail_q((grid - st.mu0) / s0)
    return (p_fa / params.i, p_d / params.i)


def slot_error_sweep(params: LinkParams, j: int, gamma_primes) -> np.ndarray:
    """Error probability of slot j along a threshold sweep."""
    grid = np.asarray(gamma_primes, dtype=float)
    st = hypothesis_stats(params, j)
    p_d = gaussian_tail_q((grid - st.mu1) / math.sqrt(st.sigma2_1))
    p_fa = gaussian_tail_q((grid - st.mu0) / math.sqrt(st.sigma2_0))
    return params.beta * (1.0 - p_d) + (1.0 - params.beta) * p_fa


@dataclass(frozen=True)
class LinkSimResult:
    p_d: float
    p_fa: float
    p_e: float
    se_p_d: float
    se_p_fa: float
    se_p_e: float
    n_trials: int
    per_slot_p_d: np.ndarray = None
    per_slot_p_fa: np.ndarray = None
    per_slot_p_e: np.ndarray = None


def _simulate_counts(
    params: LinkParams,
    n_trials: int,
    stream: RandomStream,
    sampling_mode: str,
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw symbol matrix X (n_trials, i) and received counts R (n_trials, i).

    Draw order is fixed (symbols, then per slot: signal, ISI by increasing
    delay, MSI, counting), so results depend only on the stream.
    """
    if sampling_mode not in ("gaussian-matched", "binomial-exact"):
        raise ValueError("sampling_mode must be gaussian-matched or binomial-exact")
    gen = stream.generator()
    i = params.i
    x = gen.random((n_trials, i)) < params.beta

    def count_draw(budget: float, prob: float, active: np.ndarray) -> np.ndarray:
        if sampling_mode == "binomial-exact":
            drawn = gen.binomial(int(round(budget)), prob, size=n_trials)
        else:
            mean = budget * prob
            std = math.sqrt(max(budget * prob * (1.0 - prob), 0.0))
            drawn = mean + std * gen.standard_normal(n_trials)
        return np.where(active, drawn, 0.0)

    r = np.empty((n_trials, i))
    for j in range(1, i + 1):
        total = count_draw(params.Q[j - 1], params.arrivals(j, 0), x[:, j - 1])
        for k in range(1, j):
            total = total + count_draw(
                params.Q[j - k - 1], params.arrivals(j - k, k), x[:, j - k - 1]
            )
        total = total + gen.normal(params.mu_o, math.sqrt(params.sigma2_o), n_trials)
        stats = hypothesis_stats(params, j)
        count_var = np.where(x[:, j - 1], stats.mu1, stats.mu0)
        total = total + np.sqrt(count_var) * gen.standard_normal(n_trials)
        r[:, j - 1] = total
    return x, r


def simulate_link(
    params: LinkParams,
    thresholds,
    n_trials: int,
    stream: RandomStream,
    sampling_mode: str = "gaussian-matched",
) -> LinkSimResult:
    """Monte Carlo link run: empirical detection, false-alarm, and error
    rates with standard errors.

    Signal and ISI counts come either from per-term Gaussian approximations
    with the analysis moments (gaussian-matched) or from exact binomial
    sampling (binomial-exact, which measures that approximation itself).
    Each interfering term stays conditioned on its own symbol, so the slot
    count is a symbol-pattern mixture of Gaussians; the analytic formulas
    are its moment-matched collapse and agree tightly wherever ISI is weak.
    Standard errors account for intra-frame correlation (per-trial error
    fractions for P_e, cross-slot covariance for the conditional rates).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    gammas = np.array(
        [t.gamma_prime if isinstance(t, Threshold) else float(t) for t in thresholds]
    )
    if gammas.size != params.i:
        raise ValueError("need one threshold per slot")

    x, r = _simulate_counts(params, n_trials, stream, sampling_mode)
    decided = r >= gammas[np.newaxis, :]

    ones = x.sum(axis=0)
    zeros = n_trials - ones
    detected = np.logical_and(decided, x).sum(axis=0)
    false_alarms = np.logical_and(decided, ~x).sum(axis=0)

    with np.errstate(invalid="ignore"):
        per_slot_p_d = np.where(ones > 0, detected / np.maximum(ones, 1), np.nan)
        per_slot_p_fa = np.where(zeros > 0, false_alarms / np.maximum(zeros, 1), np.nan)
    errors = decided != x
    per_slot_p_e = errors.mean(axis=0)

    per_trial_err = errors.mean(axis=1)
    se_p_e = float(per_trial_err.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else math.nan

    def _rate_se(indicator, mask, rates):
        # linearized SE of the slot-averaged conditional rate; the cross-slot
        # covariance term matters because slots share ISI draws within a trial
        counts = mask.sum(axis=0)
        valid = counts > 0
        if not valid.any():
            return math.nan
        a = np.where(mask[:, valid], indicator[:, valid] - rates[valid], 0.0)
        cov = (a.T @ a) / np.outer(counts[valid], counts[valid])
        return float(math.sqrt(max(cov.sum(), 0.0)) / valid.sum())

    return LinkSimResult(
        p_d=float(np.nanmean(per_slot_p_d)),
        p_fa=float(np.nanmean(per_slot_p_fa)),
        p_e=float(per_slot_p_e.mean()),
        se_p_d=_rate_se(np.logical_and(decided, x), x, per_slot_p_d),
        se_p_fa=_rate_se(np.logical_and(decided, ~x), ~x, per_slot_p_fa),
        se_p_e=se_p_e,
        n_trials=int(n_trials),
        per_slot_p_d=per_slot_p_d,
        per_slot_p_fa=per_slot_p_fa,
        per_slot_p_e=per_slot_p_e,
    )
