"""Closed-form distributions of cluster size, in-degree, and edge betweenness.

Every probability, CCDF, and conditional expectation is a pure function of
the attachment parameter alpha, the network time tau (a finite integer or
INFINITE), and the state.  alpha = 0 (uniform attachment) and alpha = 1
(star) are explicit dispatch branches because the generic formulas
degenerate there.  All intermediates live in sign + log-magnitude space;
alternating sums escalate to extended precision on cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
import mpmath
import numpy as np
from scipy.special import gammaln as _gammaln

from .params import INFINITE, ModelParams, validate_tau
from .specialfn import (
    EULER_GAMMA,
    DomainError,
    PrecisionPolicy,
    SLR_ONE,
    SLR_ZERO,
    SignedLogReal,
    _compensated_sum_signed,
    digamma,
    mp_rf,
    mp_sum_adaptive,
    pochhammer_frac,
    pochhammer_int,
    stirling_first,
    sum_term_signed,
)

__all__ = [
    "ConditioningError",
    "DivergenceError",
    "NumericIntegrityError",
    "DistTable",
    "p_specific",
    "p_joint",
    "p_marginal_n",
    "p_marginal_q",
    "ccdf_n",
    "ccdf_q",
    "cond_n_given_q",
    "cond_q_given_n",
    "mean_n_given_q",
    "second_moment_n_given_q",
    "mean_q_given_n",
    "mean_cluster_size",
    "mean_cluster_size_asymptotic",
    "indegree_fluctuation_inf",
    "betweenness_of",
    "invert_betweenness",
    "p_load_given_q",
    "p_load",
    "ccdf_load_unconditional",
    "ccdf_load_given_q",
    "ccdf_load_given_q_asymptotic",
    "ccdf_load_given_q_finite",
    "mean_load_given_q",
    "joint_table",
    "JointTable",
]

# Exact big-integer evaluation bounds for the uniform-attachment branches.
ER_EXACT_JOINT_MAX_N = 64
ER_EXACT_MARGQ_MAX_TAU = 200

_CLAMP_SLACK = 1e-9


class ConditioningError(ValueError):
    """Conditioning event has zero probability."""


class DivergenceError(ArithmeticError):
    """The requested quantity diverges at these parameters."""


class NumericIntegrityError(ArithmeticError):
    """A probability landed outside [0, 1] by more than the allowed slack."""


def _clamp_prob(value: float, context: str) -> float:
    """Clamp to [0, 1] within the diagnostic slack; larger excursions raise."""
    if math.isnan(value) or value < -_CLAMP_SLACK or value > 1.0 + _CLAMP_SLACK:
        raise NumericIntegrityError(f"{context}: probability {value!r} out of range")
    return min(1.0, max(0.0, value))


def _require_finite_tau(tau) -> int:
    validate_tau(tau)
    if tau == INFINITE:
        raise DomainError("finite tau required")
    return int(tau)


def _lpoch(x: float, s: float) -> float:
    """log of Gamma(x+s)/Gamma(x) for x > 0, x+s > 0 (real order)."""
    return math.lgamma(x + s) - math.lgamma(x)


# ---------------------------------------------------------------------------
# Distribution for an edge with known birth time
# ---------------------------------------------------------------------------

def p_specific(params: ModelParams, tau_e: int, tau: int, n: int, q: int) -> float:
    """Probability that an edge born at tau_e is in state (n, q) at tau.

    Solves the edge-state recurrence in closed form from the initial point
    mass at (0, 0); zero outside 0 <= q <= n <= tau - tau_e.
    """
    alpha = params.alpha
    if not 0.0 < alpha <= 1.0:
        raise DomainError("p_specific requires alpha in (0, 1]")
    if tau_e < 1 or tau < tau_e:
        raise DomainError("p_specific requires 1 <= tau_e <= tau")
    span = tau - tau_e
    if not (0 <= q <= n <= span):
        return 0.0
    if tau == tau_e:
        return 1.0 if (n, q) == (0, 0) else 0.0
    s = sum_term_signed(n, q, alpha, params.policy)
    if s.sign == 0:
        return 0.0
    log_binom = (math.lgamma(span + 1.0) - math.lgamma(n + 1.0)
                 - math.lgamma(span - n + 1.0))
    log_age = math.lgamma(tau - n) - math.lgamma(tau_e)
    log_decay = -_lpoch(tau_e + 1.0 - alpha, float(span))
    qfac = pochhammer_int(1.0 / alpha - 1.0, q)
    if qfac.sign == 0:
        return 0.0
    slr = SignedLogReal(s.sign * qfac.sign,
                        s.log_magnitude + qfac.log_magnitude
                        + log_binom + log_age + log_decay)
    return _clamp_prob(slr.to_float(), "p_specific")


# ---------------------------------------------------------------------------
# Joint distribution of a uniformly random edge
# ---------------------------------------------------------------------------

def _joint_prefactor(alpha: float, tau: int) -> float:
    return (tau + 1.0 - alpha) / tau


def _joint_slr(alpha: float, tau: int, n: int, q: int,
               policy: PrecisionPolicy) -> SignedLogReal:
    """Generic-branch joint probability in sign/log form (alpha in (0, 1))."""
    s = sum_term_signed(n, q, alpha, policy)
    if s.sign == 0:
        return SLR_ZERO
    qfac = pochhammer_int(1.0 / alpha - 1.0, q)
    if qfac.sign == 0:
        return SLR_ZERO
    denom = pochhammer_int(2.0 - alpha, n + 1)
    log_pref = math.log(_joint_prefactor(alpha, tau))
    return SignedLogReal(s.sign * qfac.sign * denom.sign,
                         log_pref + s.log_magnitude + qfac.log_magnitude
                         - denom.log_magnitude)


def p_joint(params: ModelParams, tau: int, n: int, q: int) -> float:
    """Probability that a uniformly random edge of a tau-edge network is (n, q)."""
    tau = _require_finite_tau(tau)
    if not (0 <= q <= n <= tau - 1):
        return 0.0
    alpha = params.alpha
    if alpha == 1.0:
        return 1.0 if (n, q) == (0, 0) else 0.0
    if alpha == 0.0:
        return _joint_er(tau, n, q)
    return _clamp_prob(_joint_slr(alpha, tau, n, q, params.policy).to_float(),
                       "p_joint")


def _joint_er_core_log(n: int, q: int) -> float:
    """log of the tau-independent part of the uniform-attachment joint pmf.

    For 1 <= q <= n this is log of
        sum_{k=q-1}^{n-1} C(k, q-1) |s(n-1, k)| / (n+2)!
    evaluated as a positive log-space sum (no cancellation).
    """
    row = _er_log_stirling_row(n - 1)
    k = np.arange(q - 1, n)
    logbinom = (_lgamma_cache(k + 1) - math.lgamma(q)
                - _lgamma_cache(k - q + 2))
    terms = row[q - 1:] + logbinom
    top = terms.max()
    total = top + math.log(np.exp(terms - top).sum())
    return total - math.lgamma(n + 3.0)


def _lgamma_cache(arr: np.ndarray) -> np.ndarray:
    return _gammaln(arr.astype(np.float64))


_ER_LOG_STIRLING_ROWS: list[np.ndarray] = [np.zeros(1)]


def _er_log_stirling_row(m: int) -> np.ndarray:
    """log of unsigned Stirling numbers of the first kind, row m (float)."""
    rows = _ER_LOG_STIRLING_ROWS
    while len(rows) <= m:
        j = len(rows) - 1
        prev = rows[j]
        nxt = np.full(j + 2, -np.inf)
        nxt[1:] = prev  # c(j+1, k) picks up c(j, k-1)
        if j >= 1:
            with np.errstate(invalid="ignore"):
                nxt[:-1] = np.logaddexp(nxt[:-1], math.log(j) + prev)
        elif j == 0:
            pass  # c(1, k): only c(1,1) = 1
        rows.append(nxt)
    return rows[m]


def _joint_er(tau: int, n: int, q: int) -> float:
    """Uniform-attachment (alpha -> 0) limit of the joint distribution."""
    if n == 0 and q == 0:
        return (tau + 1.0) / (2.0 * tau)
    if q == 0 or q > n:
        return 0.0
    if n <= ER_EXACT_JOINT_MAX_N:
        total = 0
        for k in range(q - 1, n):
            total += math.comb(k, q - 1) * abs(stirling_first(n - 1, k))
        value = Fraction((tau + 1) * total, tau * math.factorial(n + 2))
        return float(value)
    log_core = _joint_er_core_log(n, q)
    return math.exp(math.log((tau + 1.0) / tau) + log_core)


# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------

def p_marginal_n(params: ModelParams, tau, n: int) -> float:
    """Marginal cluster-size pmf P(n) at finite tau or in the infinite limit."""
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if alpha == 1.0:
            raise DomainError("infinite-network cluster marginal diverges at alpha = 1")
        if n < 0:
            return 0.0
        return (1.0 - alpha) / ((n + 1.0 - alpha) * (n + 2.0 - alpha))
    tau = int(tau)
    if not 0 <= n < tau:
        return 0.0
    if alpha == 1.0:
        return 1.0 if n == 0 else 0.0
    return (_joint_prefactor(alpha, tau) * (1.0 - alpha)
            / ((n + 1.0 - alpha) * (n + 2.0 - alpha)))


def _marginal_q_inf(alpha: float, q: int) -> float:
    inv = 1.0 / alpha
    log_val = (math.log(inv) + _lpoch(inv - 1.0, inv)
               - _lpoch(q + inv - 1.0, inv + 1.0))
    return math.exp(log_val)


def _marginal_q_terms(alpha: float, tau: int, q: int) -> list[SignedLogReal]:
    """All signed pieces of the finite-tau in-degree pmf, for one compensated sum."""
    inv = 1.0 / alpha
    log_pref = math.log(_joint_prefactor(alpha, tau))
    terms = [SignedLogReal(1, log_pref + math.log(inv)
                           + _lpoch(inv - 1.0, inv)
                           - _lpoch(q + inv - 1.0, inv + 1.0))]
    lq = pochhammer_int(inv - 1.0, q)
    if lq.sign == 0:
        return terms
    base = log_pref + lq.log_magnitude - _lpoch(2.0 - alpha, float(tau))
    for k in range(q + 1):
        poch = pochhammer_int(-alpha * k, tau)
        if poch.sign == 0:
            continue
        sign = -lq.sign * poch.sign * (-1 if k % 2 else 1)
        log_mag = (base + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - k + 1.0)
                   - math.log(alpha * k + 2.0 - alpha))
        terms.append(SignedLogReal(sign, log_mag))
    return terms


def _marginal_q_mp(alpha: float, tau: int, q: int):
    a = mpmath.mpf(alpha)
    inv = 1 / a
    pref = (tau + 1 - a) / tau
    out = [pref * inv * mpmath.rf(inv - 1, inv) / mpmath.rf(q + inv - 1, inv + 1)]
    lead = pref * mp_rf(inv - 1, q) / mpmath.rf(2 - a, tau)
    for k in range(q + 1):
        out.append(-lead * (-1) ** k * mp_rf(-a * k, tau)
                   / (mpmath.factorial(k) * mpmath.factorial(q - k)
                      * (a * k + 2 - a)))
    return out


def p_marginal_q(params: ModelParams, tau, q: int) -> float:
    """Marginal in-degree pmf P(q) at finite tau or in the infinite limit."""
    if q < 0:
        raise DomainError("in-degree must be non-negative")
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if alpha == 1.0:
            return 1.0 if q == 0 else 0.0
        if alpha == 0.0:
            return 0.5 ** (q + 1)
        return _marginal_q_inf(alpha, q)
    tau = int(tau)
    if q >= tau:
        return 0.0
    if alpha == 1.0:
        return 1.0 if q == 0 else 0.0
    if alpha == 0.0:
        return _marginal_q_er(tau, q, params.policy)
    value = _eval_compensated(
        lambda: _marginal_q_terms(alpha, tau, q),
        lambda: _marginal_q_mp(alpha, tau, q),
        params.policy,
    )
    return _clamp_prob(value.to_float(), "p_marginal_q")


def _eval_compensated(float_builder, mp_builder,
                      policy: PrecisionPolicy) -> SignedLogReal:
    """Compensated float64 sum with escalation to adaptive extended precision."""
    terms = float_builder()
    result, ratio = _compensated_sum_signed(terms)
    if len(terms) > 1 and ratio < policy.cancellation_threshold:
        return mp_sum_adaptive(mp_builder, policy.escalation_precision)
    return result


def _marginal_q_er(tau: int, q: int, policy: PrecisionPolicy) -> float:
    """Uniform-attachment in-degree pmf at finite tau.

    The limit of the two-term closed form: (tau+1)/tau * (2^{-q-1} - D/(tau+1)!)
    where D is (q-1)! times the alpha^{q-1} series coefficient of
    (1+alpha)_{tau-1} / (2-alpha).  Exact rational extraction up to
    ER_EXACT_MARGQ_MAX_TAU, a small-alpha Richardson limit beyond.
    """
    if q == 0:
        return (tau + 1.0) / (2.0 * tau)
    if tau <= ER_EXACT_MARGQ_MAX_TAU:
        coeff = _er_poly_coefficient(tau, q - 1)
        value = (Fraction(tau + 1, tau)
                 * (Fraction(1, 2 ** (q + 1))
                    - coeff / math.factorial(tau + 1)))
        return float(value)
    strict = _limit_policy(policy)
    return _richardson_alpha_limit(
        lambda a: p_marginal_q(ModelParams(a, strict), tau, q),
        h0=_er_step(tau))


def _limit_policy(policy: PrecisionPolicy) -> PrecisionPolicy:
    """Force extended precision inside small-alpha limit evaluations.

    Richardson extrapolation amplifies evaluation noise, and the expansion
    runs in powers of alpha * tau, so every sample must be clean.
    """
    return PrecisionPolicy(escalation_precision=policy.escalation_precision,
                           cancellation_threshold=0.999)


def _er_step(tau: int) -> float:
    # expansion parameter is alpha * tau; keep (h0 * tau)^3 below ~1e-12
    return min(3e-6, 1e-5 / tau ** (2.0 / 3.0))


def _er_poly_coefficient(tau: int, j: int) -> Fraction:
    """Coefficient of alpha^j in the series of (1+alpha)_{tau-1} / (2-alpha)."""
    # (1+alpha)_{tau-1} = sum_k |s(tau-1, k)| (1+alpha)^k
    poly = [0] * (j + 1)
    for k in range(tau):
        c = abs(stirling_first(tau - 1, k))
        if c == 0:
            continue
        for i in range(min(j, k) + 1):
            poly[i] += c * math.comb(k, i)
    # divide by (2 - alpha): 1/(2-alpha) = sum_m alpha^m / 2^{m+1}
    return sum(Fraction(poly[i], 2 ** (j - i + 1)) for i in range(j + 1))


def _richardson_alpha_limit(f, h0: float = 3e-6, levels: int = 3) -> float:
    """Richardson extrapolation of f(alpha) to alpha -> 0 by step halving.

    With the default three evaluations the linear and quadratic terms of
    the alpha-expansion cancel; the cancellation-heavy evaluations at tiny
    alpha are protected by the adaptive-precision escalation inside the
    closed forms.
    """
    table = [f(h0 / 2 ** i) for i in range(levels)]
    for order in range(1, levels):
        factor = 2.0 ** order
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0)
                 for i in range(len(table) - 1)]
    return table[0]


# ---------------------------------------------------------------------------
# CCDFs
# ---------------------------------------------------------------------------

def ccdf_n(params: ModelParams, tau, n: int) -> float:
    """Right-tail P(cluster-size index >= n)."""
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if alpha == 1.0:
            raise DomainError("infinite-network CCDF undefined at alpha = 1")
        if n < 0:
            raise DomainError("support starts at n = 0")
        return (1.0 - alpha) / (n + 1.0 - alpha)
    tau = int(tau)
    if not 0 <= n <= tau:
        raise DomainError(f"ccdf_n support is 0 <= n <= tau, got n={n}")
    if n == tau:
        return 0.0
    if alpha == 1.0:
        return 1.0 if n == 0 else 0.0
    return _clamp_prob(
        _joint_prefactor(alpha, tau) * (1.0 - alpha) / (n + 1.0 - alpha)
        - (1.0 - alpha) / tau, "ccdf_n")


def _ccdf_q_terms(alpha: float, tau: int, q: int) -> list[SignedLogReal]:
    inv = 1.0 / alpha
    log_pref = math.log(_joint_prefactor(alpha, tau))
    terms = [
        SignedLogReal(1, log_pref + _lpoch(inv - 1.0, inv)
                      - _lpoch(q + inv - 1.0, inv)),
        SignedLogReal(-1, math.log((1.0 - alpha) / tau)),
    ]
    lq = pochhammer_int(inv - 1.0, q)
    if lq.sign == 0:
        return terms
    base = log_pref + lq.log_magnitude - _lpoch(2.0 - alpha, float(tau))
    for k in range(q - 1):
        poch = pochhammer_int(1.0 - alpha - alpha * k, tau - 1)
        if poch.sign == 0:
            continue
        sign = lq.sign * poch.sign * (-1 if k % 2 else 1)
        log_mag = (base + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - 1.0 - k)
                   - math.log(k + inv) - math.log(k + 2.0 * inv))
        terms.append(SignedLogReal(sign, log_mag))
    return terms


def _ccdf_q_mp(alpha: float, tau: int, q: int):
    a = mpmath.mpf(alpha)
    inv = 1 / a
    pref = (tau + 1 - a) / tau
    out = [pref * mpmath.rf(inv - 1, inv) / mpmath.rf(q + inv - 1, inv),
           -(1 - a) / tau]
    lead = pref * mp_rf(inv - 1, q) / mpmath.rf(2 - a, tau)
    for k in range(q - 1):
        out.append(lead * (-1) ** k * mp_rf(1 - a - a * k, tau - 1)
                   / (mpmath.factorial(k) * mpmath.factorial(q - 2 - k)
                      * (k + inv) * (k + 2 * inv)))
    return out


def ccdf_q(params: ModelParams, tau, q: int) -> float:
    """Right-tail P(in-degree >= q)."""
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if q < 0:
            raise DomainError("support starts at q = 0")
        if alpha == 1.0:
            return 1.0 if q == 0 else 0.0
        if alpha == 0.0:
            return 0.5 ** q
        return math.exp(_lpoch(1.0 / alpha - 1.0, 1.0 / alpha)
                        - _lpoch(q + 1.0 / alpha - 1.0, 1.0 / alpha))
    tau = int(tau)
    if not 0 <= q <= tau:
        raise DomainError(f"ccdf_q support is 0 <= q <= tau, got q={q}")
    if q == tau:
        return 0.0
    if alpha == 1.0:
        return 1.0 if q == 0 else 0.0
    if alpha == 0.0:
        return _ccdf_q_er(tau, q, params.policy)
    value = _eval_compensated(
        lambda: _ccdf_q_terms(alpha, tau, q),
        lambda: _ccdf_q_mp(alpha, tau, q),
        params.policy,
    )
    return _clamp_prob(value.to_float(), "ccdf_q")


def _ccdf_q_er(tau: int, q: int, policy: PrecisionPolicy) -> float:
    if q == 0:
        return 1.0
    if tau <= ER_EXACT_MARGQ_MAX_TAU:
        return math.fsum(_marginal_q_er(tau, r, policy) for r in range(q, tau))
    strict = _limit_policy(policy)
    return _richardson_alpha_limit(
        lambda a: ccdf_q(ModelParams(a, strict), tau, q),
        h0=_er_step(tau))


# ---------------------------------------------------------------------------
# Conditionals
# ---------------------------------------------------------------------------

def cond_n_given_q(params: ModelParams, tau, n: int, q: int) -> float:
    """Conditional cluster-size pmf P(n | q)."""
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if alpha == 1.0:
            if q != 0:
                raise ConditioningError("q > 0 has probability zero at alpha = 1")
            return 1.0 if n == 0 else 0.0
        if n < q or n < 0 or q < 0:
            return 0.0
        if alpha == 0.0:
            if q == 0:
                return 1.0 if n == 0 else 0.0
            log_core = (_joint_er_core_log(n, q) if n > ER_EXACT_JOINT_MAX_N
                        else None)
            if log_core is None:
                total = 0
                for k in range(q - 1, n):
                    total += math.comb(k, q - 1) * abs(stirling_first(n - 1, k))
                return float(Fraction(total * 2 ** (q + 1),
                                      math.factorial(n + 2)))
            return math.exp(log_core + (q + 1) * math.log(2.0))
        s = sum_term_signed(n, q, alpha, params.policy)
        if s.sign == 0:
            return 0.0
        lead = pochhammer_int(2.0 / alpha - 1.0, q + 1)
        denom = pochhammer_int(2.0 - alpha, n + 1)
        slr = SignedLogReal(s.sign * lead.sign * denom.sign,
                            math.log(alpha) + s.log_magnitude
                            + lead.log_magnitude - denom.log_magnitude)
        return _clamp_prob(slr.to_float(), "cond_n_given_q")
    tau = int(tau)
    pq = p_marginal_q(params, tau, q)
    if pq <= 0.0:
        raise ConditioningError(f"P(q={q}) = 0 at tau={tau}")
    return _clamp_prob(p_joint(params, tau, n, q) / pq, "cond_n_given_q")


def cond_q_given_n(params: ModelParams, tau, q: int, n: int) -> float:
    """Conditional in-degree pmf P(q | n)."""
    validate_tau(tau)
    if tau == INFINITE:
        pn = p_marginal_n(params, tau, n)
        if pn <= 0.0:
            raise ConditioningError(f"P(n={n}) = 0 in the infinite network")
        if not 0 <= q <= n:
            return 0.0
        alpha = params.alpha
        if alpha == 0.0:
            joint = _joint_er_inf(n, q)
        else:
            s = sum_term_signed(n, q, alpha, params.policy)
            qfac = pochhammer_int(1.0 / alpha - 1.0, q)
            denom = pochhammer_int(2.0 - alpha, n + 1)
            joint = (SignedLogReal(s.sign * qfac.sign * denom.sign,
                                   s.log_magnitude + qfac.log_magnitude
                                   - denom.log_magnitude).to_float()
                     if s.sign and qfac.sign else 0.0)
        return _clamp_prob(joint / pn, "cond_q_given_n")
    tau = int(tau)
    pn = p_marginal_n(params, tau, n)
    if pn <= 0.0:
        raise ConditioningError(f"P(n={n}) = 0 at tau={tau}")
    return _clamp_prob(p_joint(params, tau, n, q) / pn, "cond_q_given_n")


def _joint_er_inf(n: int, q: int) -> float:
    if n == 0 and q == 0:
        return 0.5
    if q == 0 or q > n:
        return 0.0
    if n <= ER_EXACT_JOINT_MAX_N:
        total = 0
        for k in range(q - 1, n):
            total += math.comb(k, q - 1) * abs(stirling_first(n - 1, k))
        return float(Fraction(total, math.factorial(n + 2)))
    return math.exp(_joint_er_core_log(n, q))


# ---------------------------------------------------------------------------
# Conditional means and second moments
# ---------------------------------------------------------------------------

def _g_factor_terms(alpha: float, tau: int, q: int, shift: float,
                    order_arg: float) -> list[SignedLogReal]:
    """Terms of 1 - (x)_{q+1}/(y)_tau * sum_k ..., shared by both G sums.

    ``shift`` is the k-offset in the denominators (1/alpha - 1 or
    2/alpha - 1); ``order_arg`` is the base of the tau-order Pochhammer
    ((1-alpha) or (2-alpha)); the leading Pochhammer argument is shift.
    """
    terms = [SLR_ONE]
    lead = pochhammer_int(shift, q + 1)
    if lead.sign == 0:
        return terms
    base = lead.log_magnitude - _lpoch(order_arg, float(tau))
    for k in range(q + 1):
        poch = pochhammer_int(-alpha * k, tau)
        if poch.sign == 0:
            continue
        sign = -lead.sign * poch.sign * (-1 if k % 2 else 1)
        log_mag = (base + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - k + 1.0)
                   - math.log(k + shift))
        terms.append(SignedLogReal(sign, log_mag))
    return terms


def _g_factor_mp(alpha: float, tau: int, q: int, shift_expr, order_expr):
    a = mpmath.mpf(alpha)
    shift = shift_expr(a)
    lead = mp_rf(shift, q + 1) / mpmath.rf(order_expr(a), tau)
    out = [mpmath.mpf(1)]
    for k in range(q + 1):
        out.append(-lead * (-1) ** k * mp_rf(-a * k, tau)
                   / (mpmath.factorial(k) * mpmath.factorial(q - k)
                      * (k + shift)))
    return out


def _mean_shifted_n_given_q(params: ModelParams, tau, q: int) -> float:
    """E[n + 2 - alpha | q]; the closed form every load moment builds on."""
    alpha = params.alpha
    if q < 0:
        raise ConditioningError("in-degree must be non-negative")
    if alpha == 1.0:
        if q != 0:
            raise ConditioningError("q > 0 has probability zero at alpha = 1")
        return 2.0 - alpha
    if tau == INFINITE:
        if alpha == 0.0:
            return float(2 ** (q + 1))
        inv = 1.0 / alpha
        return (1.0 - alpha) * math.exp(_lpoch(q + inv, inv)
                                        - _lpoch(inv - 1.0, inv))
    tau = int(tau)
    if q >= tau:
        raise ConditioningError(f"q={q} outside support at tau={tau}")
    if alpha == 0.0:
        strict = _limit_policy(params.policy)
        return _richardson_alpha_limit(
            lambda a: _mean_shifted_n_given_q(ModelParams(a, strict), tau, q),
            h0=_er_step(tau))
    inv = 1.0 / alpha
    num = _eval_compensated(
        lambda: _g_factor_terms(alpha, tau, q, inv - 1.0, 1.0 - alpha),
        lambda: _g_factor_mp(alpha, tau, q, lambda a: 1 / a - 1,
                             lambda a: 1 - a),
        params.policy,
    )
    den = _eval_compensated(
        lambda: _g_factor_terms(alpha, tau, q, 2.0 * inv - 1.0, 2.0 - alpha),
        lambda: _g_factor_mp(alpha, tau, q, lambda a: 2 / a - 1,
                             lambda a: 2 - a),
        params.policy,
    )
    if den.sign == 0:
        raise ConditioningError(f"P(q={q}) = 0 at tau={tau}")
    g = (num / den).to_float()
    asymptotic = (1.0 - alpha) * math.exp(_lpoch(q + inv, inv)
                                          - _lpoch(inv - 1.0, inv))
    return asymptotic * g


def mean_n_given_q(params: ModelParams, tau, q: int) -> float:
    """Conditional expectation E[n | q] of cluster size given in-degree."""
    return _mean_shifted_n_given_q(params, tau, q) - (2.0 - params.alpha)


def _second_moment_terms(alpha: float, tau: int, q: int) -> list[SignedLogReal]:
    bracket = (alpha * digamma(tau - alpha) - alpha * digamma(1.0 - alpha)
               - digamma(float(q)) - EULER_GAMMA)
    first = (1.0 - alpha) / math.gamma(float(q)) * bracket
    terms = [SignedLogReal.from_float(first)]
    base = -math.log(alpha) - _lpoch(2.0 - alpha, float(tau - 2))
    for k in range(2, q + 1):
        poch = pochhammer_int(-alpha * k, tau)
        if poch.sign == 0:
            continue
        sign = -poch.sign * (-1 if k % 2 else 1)
        log_mag = (base + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - k + 1.0)
                   - math.log(k - 1.0))
        terms.append(SignedLogReal(sign, log_mag))
    return terms


def _second_moment_mp(alpha: float, tau: int, q: int):
    a = mpmath.mpf(alpha)
    bracket = (a * mpmath.digamma(tau - a) - a * mpmath.digamma(1 - a)
               - mpmath.digamma(q) - mpmath.euler)
    out = [(1 - a) / mpmath.gamma(q) * bracket]
    lead = 1 / (a * mpmath.rf(2 - a, tau - 2))
    for k in range(2, q + 1):
        out.append(-lead * (-1) ** k * mp_rf(-a * k, tau)
                   / (mpmath.factorial(k) * mpmath.factorial(q - k) * (k - 1)))
    return out


def second_moment_n_given_q(params: ModelParams, tau: int, q: int) -> float:
    """E[(n + 2 - alpha)(n + 1 - alpha) | q] at finite tau."""
    alpha = params.alpha
    tau = _require_finite_tau(tau)
    if q < 0 or q >= tau:
        raise ConditioningError(f"q={q} outside support at tau={tau}")
    if q == 0:
        # q = 0 forces n = 0
        return (2.0 - alpha) * (1.0 - alpha)
    if alpha == 1.0:
        raise ConditioningError("q > 0 has probability zero at alpha = 1")
    if alpha == 0.0:
        strict = _limit_policy(params.policy)
        return _richardson_alpha_limit(
            lambda a: second_moment_n_given_q(ModelParams(a, strict), tau, q),
            h0=_er_step(tau))
    inner = _eval_compensated(
        lambda: _second_moment_terms(alpha, tau, q),
        lambda: _second_moment_mp(alpha, tau, q),
        params.policy,
    )
    pq = p_marginal_q(params, tau, q)
    if pq <= 0.0:
        raise ConditioningError(f"P(q={q}) = 0 at tau={tau}")
    qfac = pochhammer_int(1.0 / alpha - 1.0, q)
    lead = SignedLogReal(qfac.sign,
                         math.log(_joint_prefactor(alpha, tau))
                         + qfac.log_magnitude - math.log(pq))
    return (lead * inner).to_float()


def mean_q_given_n(params: ModelParams, n: int) -> float:
    """Conditional expectation E[q | n]; independent of network size."""
    if n < 0:
        raise DomainError("cluster index must be non-negative")
    alpha = params.alpha
    if alpha == 0.0:
        return digamma(n + 1.0) + EULER_GAMMA
    return (math.gamma(2.0 - alpha) / alpha
            * pochhammer_frac(n + 1.0 - alpha, alpha)
            - (1.0 / alpha - 1.0))


def mean_cluster_size(params: ModelParams, tau: int) -> float:
    """Exact mean of the cluster-size index over a tau-edge network."""
    tau = _require_finite_tau(tau)
    alpha = params.alpha
    if alpha == 1.0:
        return 0.0
    n = np.arange(tau, dtype=np.float64)
    pmf = (_joint_prefactor(alpha, tau) * (1.0 - alpha)
           / ((n + 1.0 - alpha) * (n + 2.0 - alpha)))
    return float(np.dot(n, pmf))


def mean_cluster_size_asymptotic(params: ModelParams, tau: int) -> float:
    """Leading logarithmic growth (1 - alpha) ln tau of the mean cluster size."""
    tau = _require_finite_tau(tau)
    return (1.0 - params.alpha) * math.log(tau)


def indegree_fluctuation_inf(params: ModelParams) -> float:
    """Second moment E[(q-1)^2] of in-degree in the infinite network."""
    alpha = params.alpha
    if not 0.0 < alpha < 1.0:
        raise DomainError("defined for alpha in (0, 1)")
    if alpha == 0.5:
        raise DivergenceError("in-degree fluctuations diverge at alpha = 1/2")
    return 2.0 / abs(1.0 - 2.0 * alpha)


# ---------------------------------------------------------------------------
# Edge betweenness
# ---------------------------------------------------------------------------

def betweenness_of(n: int, tau: int) -> int:
    """Betweenness L = (n+1)(tau-n) of an edge whose cluster index is n."""
    if not 0 <= n <= tau - 1:
        raise DomainError(f"cluster index {n} outside 0..{tau - 1}")
    return (n + 1) * (tau - n)


def invert_betweenness(L: int, tau: int) -> int | None:
    """Smaller integer solution n of (n+1)(tau-n) = L, or None.

    Solved in exact integer arithmetic: the discriminant (tau+1)^2 - 4L
    must be a perfect square of matching parity.
    """
    if L < 1:
        raise DomainError("betweenness must be >= 1")
    disc = (tau + 1) * (tau + 1) - 4 * L
    if disc < 0:
        return None
    s = math.isqrt(disc)
    if s * s != disc:
        return None
    if (tau - 1 - s) % 2 != 0:
        return None
    n = (tau - 1 - s) // 2
    return n if n >= 0 else None


def p_load_given_q(params: ModelParams, tau: int, L: int, q: int) -> float:
    """Conditional betweenness pmf P(L | q); zero at non-representable L."""
    tau = _require_finite_tau(tau)
    n = invert_betweenness(L, tau)
    if n is None or n > tau - 1:
        return 0.0
    mirror = tau - 1 - n
    value = cond_n_given_q(params, tau, n, q)
    if mirror != n:
        value += cond_n_given_q(params, tau, mirror, q)
    return _clamp_prob(value, "p_load_given_q")


def p_load(params: ModelParams, tau: int, L: int) -> float:
    """Unconditional betweenness pmf P(L); zero at non-representable L."""
    tau = _require_finite_tau(tau)
    n = invert_betweenness(L, tau)
    if n is None or n > tau - 1:
        return 0.0
    mirror = tau - 1 - n
    value = p_marginal_n(params, tau, n)
    if mirror != n:
        value += p_marginal_n(params, tau, mirror)
    return _clamp_prob(value, "p_load")


def _lowest_n_with_load(tau: int, L: int) -> int | None:
    """Smallest integer n with (n+1)(tau-n) >= L, by exact integer search."""
    if L <= tau:
        return 0
    disc = (tau + 1) * (tau + 1) - 4 * L
    if disc < 0:
        return None
    s = math.isqrt(disc)
    n = max(0, (tau - 1 - s) // 2 - 1)
    while (n + 1) * (tau - n) < L:
        n += 1
    if n > tau - 1 - n:
        return None
    return n


def ccdf_load_unconditional(params: ModelParams, tau: int, L: int) -> float:
    """Right-tail P(betweenness >= L) of a uniformly random edge."""
    tau = _require_finite_tau(tau)
    if L < 1:
        raise DomainError("betweenness must be >= 1")
    alpha = params.alpha
    n = _lowest_n_with_load(tau, L)
    if n is None:
        return 0.0
    if alpha == 1.0:
        return 1.0 if L <= tau else 0.0
    return _clamp_prob(
        _joint_prefactor(alpha, tau) * (1.0 - alpha) * (tau - 2.0 * n)
        / ((n + 1.0 - alpha) * (tau - n + 1.0 - alpha)),
        "ccdf_load_unconditional")


def _ccdf_load_terms(alpha: float, lam: int, q: int) -> list[SignedLogReal]:
    inv = 1.0 / alpha
    lead = pochhammer_int(2.0 * inv - 1.0, q + 1)
    base = lead.log_magnitude - _lpoch(2.0 - alpha, float(lam - 1))
    terms = []
    for k in range(q + 1):
        poch = pochhammer_int(-alpha * k, lam - 1)
        if poch.sign == 0:
            continue
        sign = lead.sign * poch.sign * (-1 if k % 2 else 1)
        log_mag = (base + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - k + 1.0)
                   - math.log(k + 2.0 * inv - 1.0))
        terms.append(SignedLogReal(sign, log_mag))
    return terms


def _ccdf_load_mp(alpha: float, lam: int, q: int):
    a = mpmath.mpf(alpha)
    inv = 1 / a
    lead = mpmath.rf(2 * inv - 1, q + 1) / mpmath.rf(2 - a, lam - 1)
    return [lead * (-1) ** k * mp_rf(-a * k, lam - 1)
            / (mpmath.factorial(k) * mpmath.factorial(q - k)
               * (k + 2 * inv - 1))
            for k in range(q + 1)]


def ccdf_load_given_q(params: ModelParams, lam: int, q: int) -> float:
    """Infinite-network CCDF of rescaled betweenness at integer lam >= q+1."""
    alpha = params.alpha
    if not 0.0 < alpha < 1.0:
        raise DomainError("rescaled-load CCDF requires alpha in (0, 1)")
    if q < 0 or lam < q + 1:
        raise DomainError("support requires lam >= q + 1")
    value = _eval_compensated(
        lambda: _ccdf_load_terms(alpha, lam, q),
        lambda: _ccdf_load_mp(alpha, lam, q),
        params.policy,
    )
    return _clamp_prob(value.to_float(), "ccdf_load_given_q")


def ccdf_load_given_q_asymptotic(params: ModelParams, lam: float, q: int) -> float:
    """Large-lam tail: alpha^2 (1-alpha) / (2 Gamma(2/alpha - 1)) q^{2/alpha} / lam^2."""
    alpha = params.alpha
    if not 0.0 < alpha < 1.0:
        raise DomainError("asymptotic form requires alpha in (0, 1)")
    inv = 2.0 / alpha
    return (alpha * alpha * (1.0 - alpha) / (2.0 * math.gamma(inv - 1.0))
            * q ** inv / (lam * lam))


def ccdf_load_given_q_finite(params: ModelParams, tau: int, lam: int, q: int) -> float:
    """Leading finite-size correction to the rescaled-load CCDF."""
    f_inf = ccdf_load_given_q(params, lam, q)
    alpha = params.alpha
    return f_inf - (1.0 - f_inf) * alpha * alpha * (1.0 - alpha) / (2.0 * tau * tau)


def mean_load_given_q(params: ModelParams, tau, q: int) -> float:
    """E[L | q] at finite tau, or E[rescaled load | q] in the infinite limit."""
    alpha = params.alpha
    validate_tau(tau)
    if tau == INFINITE:
        if alpha == 0.0:
            return float(2 ** (q + 1) - 1)
        if alpha == 1.0:
            if q != 0:
                raise ConditioningError("q > 0 has probability zero at alpha = 1")
            return 1.0
        return _mean_shifted_n_given_q(params, INFINITE, q) - 1.0 + alpha
    tau = int(tau)
    e1 = _mean_shifted_n_given_q(params, tau, q)
    e2 = second_moment_n_given_q(params, tau, q)
    one_m = 1.0 - alpha
    return (tau * (e1 - one_m)
            - (e2 - 2.0 * one_m * e1 + (2.0 - alpha) * one_m))


# ---------------------------------------------------------------------------
# Bulk tables
# ---------------------------------------------------------------------------

@dataclass
class DistTable:
    """A tabulated distribution with its parameters and support ordering."""

    kind: str
    alpha: float
    tau: object
    columns: tuple[str, ...]
    rows: list[tuple]


@dataclass
class JointTable:
    """Joint pmf over the computed support, in (n, q)-lexicographic order."""

    alpha: float
    tau: int
    n: np.ndarray
    q: np.ndarray
    p: np.ndarray
    skipped_mass_bound: float
    escalations: int

    def total_mass(self) -> float:
        return math.fsum(self.p.tolist())

    def marginal_over_q(self) -> dict[int, float]:
        out: dict[int, list] = {}
        for nv, pv in zip(self.n.tolist(), self.p.tolist()):
            out.setdefault(nv, []).append(pv)
        return {nv: math.fsum(vals) for nv, vals in out.items()}

    def marginal_over_n(self) -> dict[int, float]:
        out: dict[int, list] = {}
        for qv, pv in zip(self.q.tolist(), self.p.tolist()):
            out.setdefault(qv, []).append(pv)
        return {qv: math.fsum(vals) for qv, vals in out.items()}

try:
    import gmpy2
    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    _HAVE_GMPY2 = False


class _HighPrecRowSweeper:
    """Incremental extended-precision alternating sums across table rows.

    Maintains the row factors (1 - alpha - alpha k)_{n-1} as mpfr values,
    advanced with one multiply per (k, row).  Escalated points inside the
    mass-relevant band never cancel more than ~20 decades, so a fixed
    320-bit significand leaves a wide margin; points that still cancel too
    deeply are handed back to the adaptive mpmath path.
    """

    BITS = 320

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.ctx = gmpy2.context(precision=self.BITS)
        with gmpy2.local_context(self.ctx):
            self.alpha_hp = gmpy2.mpfr(alpha)
        self.n = 1
        self.factors: list = []   # factors[k] = (1 - a - a k)_{n-1}
        self.inv_fact: list = []  # 1 / k!
        self.weighted: list = []  # (-1)^k factors[k] / k!, per prepared row

    def _ensure_k(self, k_hi: int) -> None:
        a = self.alpha_hp
        while len(self.factors) < k_hi:
            k = len(self.factors)
            x = 1 - a - a * k
            prod = gmpy2.mpfr(1)
            for j in range(self.n - 1):
                prod *= x + j
            self.factors.append(prod)
            self.inv_fact.append(1 / gmpy2.mpfr(gmpy2.fac(k)))

    def prepare_row(self, n: int, k_hi: int) -> None:
        """Advance the row factors to row n and pre-weight them by 1/k!."""
        if n < self.n:
            raise ValueError("sweeper only advances forward")
        with gmpy2.local_context(self.ctx):
            a = self.alpha_hp
            for t in range(self.n + 1, n + 1):
                # (x)_{t-1} = (x)_{t-2} * (x + t - 2)
                for k in range(len(self.factors)):
                    self.factors[k] *= 1 - a - a * k + (t - 2)
            self.n = n
            self._ensure_k(k_hi)
            self.weighted = [-f * w if k % 2 else f * w
                             for k, (f, w) in enumerate(zip(self.factors,
                                                            self.inv_fact))]

    def sum_terms_batch(self, wanted: dict[int, tuple],
                        ) -> dict[int, "SignedLogReal | None"]:
        """S(n, q) for each flagged q of the prepared row.

        ``wanted`` maps q to (top_log, k_lo, k_hi): the float-path log of the
        largest term (without the leading alpha) and the window of k indices
        whose terms can reach the sweeper resolution at all.  Entries whose
        cancellation exceeds the sweeper depth come back as None.
        """
        out: dict[int, SignedLogReal | None] = {}
        log_alpha = math.log(self.alpha)
        with gmpy2.local_context(self.ctx):
            weighted = self.weighted
            inv_fact = self.inv_fact
            for q, (top_log, k_lo, k_hi) in wanted.items():
                total = gmpy2.mpfr(0)
                for k in range(k_lo, k_hi + 1):
                    total += weighted[k] * inv_fact[q - 1 - k]
                if total == 0:
                    out[q] = SLR_ZERO
                    continue
                log_mag = float(gmpy2.log(abs(total)))
                if (top_log - log_mag) / math.log(2.0) > self.BITS - 64:
                    out[q] = None
                else:
                    out[q] = SignedLogReal(1 if total > 0 else -1,
                                           log_mag + log_alpha)
        return out

# Bulk tables escalate much earlier than the scalar ops: a mass-accurate sum
# over ~1e5 support points cannot afford the log-gamma input error amplified
# by even mild cancellation.  Points whose largest term is tiny in absolute
# probability units are exempt: their float error cannot reach the mass
# tolerances regardless of cancellation depth.
_TABLE_ESCALATION_RATIO = 3e-3
_TABLE_MAXTERM_FLOOR_LOG = math.log(3e-7)


def _joint_row_generic(alpha: float, tau: int, n: int, q_hi: int,
                       policy: PrecisionPolicy,
                       lpq: np.ndarray, lp2: np.ndarray,
                       lfact: np.ndarray,
                       sweeper: "_HighPrecRowSweeper | None" = None,
                       tail_bound: float = 0.0,
                       lfact_matrix: np.ndarray | None = None,
                       ) -> tuple[np.ndarray, int]:
    """p(n, q) for q = 0..q_hi at fixed n, generic branch.

    Returns (row, escalation count).  The alternating sum over k shares its
    Pochhammer factors across the whole row; each q is summed at the common
    scale and handed to the extended-precision path when it cancels below
    the table threshold.
    """
    pref = _joint_prefactor(alpha, tau)
    out = np.zeros(q_hi + 1)
    if n == 0:
        out[0] = pref / (2.0 - alpha)
        return out, 0
    if q_hi < 1:
        return out, 0
    k = np.arange(q_hi)
    x = 1.0 - alpha - alpha * k
    sign_a, log_a = _poch_sign_log_vec(x, n - 1)
    term_sign = sign_a * np.where(k % 2 == 0, 1, -1)
    log_base = math.log(alpha) + log_a - lfact[k]  # lfact[k] = log k!
    live = sign_a != 0
    log_pref = math.log(pref)
    escalate_below = max(_TABLE_ESCALATION_RATIO, policy.cancellation_threshold)
    # Certified-negligible shortcut: |S| <= (live terms) * maxterm, so points
    # whose value cannot reach a safety margin under the tail bound are
    # recorded as zero without extended-precision work.
    negligible_log = math.log(tail_bound) - 7.0 if tail_bound > 0.0 else -math.inf
    log_alpha = math.log(alpha)

    def emit(q: int, slr: SignedLogReal) -> None:
        if slr.sign == 0:
            return
        value = slr.sign * math.exp(log_pref + lpq[q]
                                    + slr.log_magnitude - lp2[n + 1])
        out[q] = _clamp_prob(value, f"joint_table({n},{q})")

    # Float pass over the whole row at once: term matrix over (k, q).
    qs = np.arange(1, q_hi + 1)
    if lfact_matrix is not None and lfact_matrix.shape[0] >= q_hi:
        lfm = lfact_matrix[:q_hi, :q_hi]
        valid = np.isfinite(lfm) & live[:, None]
        log_t = log_base[:, None] - lfm
        log_t[~live, :] = -np.inf
    else:
        idx = qs[None, :] - 1 - k[:, None]
        valid = (idx >= 0) & live[:, None]
        log_t = np.where(valid,
                         log_base[:, None] - lfact[np.clip(idx, 0, None)],
                         -np.inf)
    top = log_t.max(axis=0)
    cols = np.isfinite(top)
    total = np.zeros(q_hi)
    if cols.any():
        with np.errstate(invalid="ignore"):
            scaled = np.where(valid[:, cols],
                              term_sign[:, None]
                              * np.exp(log_t[:, cols] - top[None, cols]), 0.0)
        total[cols] = scaled.sum(axis=0)

    maxterm_log = np.where(cols, log_pref + lpq[qs] + top - lp2[n + 1],
                           -np.inf)
    settled = cols & ((np.abs(total) >= escalate_below)
                      | (maxterm_log <= _TABLE_MAXTERM_FLOOR_LOG))
    if settled.any():
        with np.errstate(divide="ignore"):
            log_p = maxterm_log[settled] + np.log(np.abs(total[settled]))
        vals = np.sign(total[settled]) * np.exp(log_p)
        if vals.min() < -_CLAMP_SLACK or vals.max() > 1.0 + _CLAMP_SLACK:
            raise NumericIntegrityError(
                f"joint_table row n={n}: probability outside [0, 1]")
        out[qs[settled]] = np.clip(vals, 0.0, 1.0)

    flagged: dict[int, tuple] = {}
    maybe = cols & ~settled
    if maybe.any():
        bound_log = maxterm_log[maybe] + np.log(qs[maybe].astype(np.float64))
        # Terms below what could lift the value above the certified-zero
        # floor are irrelevant; cap the window at the sweeper resolution.
        floor_log = negligible_log - 12.0 if tail_bound > 0.0 else -math.inf
        hard = (_HighPrecRowSweeper.BITS - 10) * math.log(2.0)
        for j, q, tl, bl, ml in zip(np.nonzero(maybe)[0].tolist(),
                                    qs[maybe].tolist(), top[maybe].tolist(),
                                    bound_log.tolist(),
                                    maxterm_log[maybe].tolist()):
            if bl < negligible_log:
                continue
            window = min(hard, ml - floor_log + 8.0)
            relevant = np.nonzero(log_t[:q, j] >= tl - window)[0]
            flagged[q] = (tl - log_alpha, int(relevant[0]),
                          int(relevant[-1]))
    if flagged:
        if sweeper is not None:
            sweeper.prepare_row(n, q_hi)
            resolved = sweeper.sum_terms_batch(flagged)
        else:
            resolved = {q: None for q in flagged}
        for q, slr in resolved.items():
            if slr is None:
                # Deeper than the sweeper precision.  The surviving sum is
                # then certifiably below maxterm * 2^(64 - BITS); points
                # whose value cannot reach the tail bound are recorded as
                # zero, the rest go to adaptive precision.
                deep_bound = (log_pref + lpq[q] + flagged[q][0] + log_alpha
                              + math.log(float(q)) - lp2[n + 1]
                              - (_HighPrecRowSweeper.BITS - 64) * math.log(2.0))
                if deep_bound < negligible_log:
                    continue
                slr = sum_term_signed(n, q, alpha, policy)
            emit(q, slr)
    return out, len(flagged)


def _poch_sign_log_vec(x: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized sign and log|(x)_m| for integer order m >= 0."""
    x = np.asarray(x, dtype=np.float64)
    sign = np.ones(x.shape, dtype=np.int64)
    log_mag = np.zeros_like(x)
    if m == 0:
        return sign, log_mag
    upper = x + m
    integral = (x == np.floor(x)) & (x <= 0.0)
    zero = integral & (x + m - 1 >= 0.0)
    sign[zero] = 0
    negint = integral & ~zero  # all m factors are negative integers
    if negint.any():
        mm = -x[negint]
        sign[negint] = -1 if m % 2 else 1
        log_mag[negint] = _gammaln(mm + 1.0) - _gammaln(mm - m + 1.0)
    general = ~integral
    if general.any():
        xg = x[general]
        ug = upper[general]
        s = np.ones(xg.shape, dtype=np.int64)
        neg = xg < 0
        s[neg] = np.where(np.ceil(-xg[neg]) % 2 == 1, -1, 1)
        su = np.ones(ug.shape, dtype=np.int64)
        neg_u = ug < 0
        su[neg_u] = np.where(np.ceil(-ug[neg_u]) % 2 == 1, -1, 1)
        sign[general] = s * su
        log_mag[general] = _gammaln(ug) - _gammaln(xg)
    return sign, log_mag


def joint_table(params: ModelParams, tau: int,
                max_n: int | None = None, max_q: int | None = None,
                tail_bound: float = 0.0) -> JointTable:
    """Joint pmf over (n, q) in lexicographic order.

    With ``tail_bound`` > 0 each row's q-range stops once the pmf has fallen
    below the bound and is locally decreasing; a bound on the mass that
    could hide beyond the frontier is accumulated into
    ``skipped_mass_bound``.  With the default 0 the full requested range is
    evaluated.
    """
    tau = _require_finite_tau(tau)
    alpha = params.alpha
    n_hi = tau - 1 if max_n is None else min(max_n, tau - 1)

    if alpha == 1.0:
        return JointTable(alpha, tau, np.array([0]), np.array([0]),
                          np.array([1.0]), 0.0, 0)

    rows_n: list[np.ndarray] = []
    rows_q: list[np.ndarray] = []
    rows_p: list[np.ndarray] = []
    skipped = 0.0
    escal = 0

    if alpha == 0.0:
        def row_fn(n, q_hi):
            return _joint_row_er(tau, n, q_hi), 0
    else:
        lpq = np.concatenate(([0.0], np.cumsum(
            np.log(1.0 / alpha - 1.0 + np.arange(tau, dtype=np.float64)))))
        lp2 = np.concatenate(([0.0], np.cumsum(
            np.log(2.0 - alpha + np.arange(tau + 1, dtype=np.float64)))))
        lfact = _gammaln(np.arange(tau + 3, dtype=np.float64) + 1.0)
        sweeper = _HighPrecRowSweeper(alpha) if _HAVE_GMPY2 else None
        # Toeplitz lfact[q-1-k] matrix shared by every row (NaN-free -inf
        # marks k >= q), sized to the largest row that can occur.
        side = n_hi if max_q is None else min(n_hi, max_q)
        side = min(side, tau)
        if side >= 1:
            kk = np.arange(side)[:, None]
            qq = np.arange(1, side + 1)[None, :]
            dd = qq - 1 - kk
            lfact_matrix = np.where(dd >= 0, lfact[np.clip(dd, 0, None)],
                                    np.inf)
        else:
            lfact_matrix = None

        def row_fn(n, q_hi):
            return _joint_row_generic(alpha, tau, n, q_hi, params.policy,
                                      lpq, lp2, lfact, sweeper, tail_bound,
                                      lfact_matrix)

    prev_keep = 0
    for n in range(n_hi + 1):
        q_cap = n if max_q is None else min(n, max_q)
        q_hi = q_cap
        if tail_bound > 0.0 and n > 8:
            q_hi = min(q_cap, max(_frontier_guess(alpha, n), prev_keep + 8))
        while True:
            p_row, esc = row_fn(n, q_hi)
            if q_hi >= q_cap or _row_settled(p_row, tail_bound):
                break
            q_hi = min(q_cap, max(q_hi * 2, q_hi + 8))
        escal += esc
        keep = len(p_row) - 1
        if tail_bound > 0.0:
            above = np.nonzero(p_row > tail_bound)[0]
            eff = int(above.max()) if len(above) else 0
            keep = min(keep, eff + 2)
            p_row = p_row[: keep + 1]
        prev_keep = keep
        rows_n.append(np.full(keep + 1, n))
        rows_q.append(np.arange(keep + 1))
        rows_p.append(p_row)
        if keep < q_cap:
            skipped += float(p_row[-3:].max()) * (q_cap - keep)
    return JointTable(
        alpha=alpha,
        tau=tau,
        n=np.concatenate(rows_n).astype(np.int64),
        q=np.concatenate(rows_q).astype(np.int64),
        p=np.concatenate(rows_p),
        skipped_mass_bound=skipped,
        escalations=escal,
    )


def _frontier_guess(alpha: float, n: int) -> int:
    """Starting q-range for a row: conditional mean plus a wide safety band."""
    mean = math.log(n + 1.0) if alpha == 0.0 else n ** alpha
    return max(16, int(mean + 10.0 * math.sqrt(mean) + 10))


def _row_settled(p_row: np.ndarray, tail_bound: float) -> bool:
    # The starting q-range already clears the conditional mode by a wide
    # margin, so a fully sub-threshold trailing window means the tail is done.
    if tail_bound <= 0.0 or len(p_row) < 4:
        return True
    return bool(p_row[-3:].max() <= tail_bound)


def _joint_row_er(tau: int, n: int, q_hi: int) -> np.ndarray:
    """Uniform-attachment joint pmf row: p(n, q) for q = 0..q_hi."""
    out = np.zeros(q_hi + 1)
    if n == 0:
        out[0] = (tau + 1.0) / (2.0 * tau)
        return out
    if q_hi < 1:
        return out
    row = _er_log_stirling_row(n - 1)  # length n
    k = np.arange(n, dtype=np.float64)
    lgk = _gammaln(k + 1.0)
    log_pref = math.log((tau + 1.0) / tau) - math.lgamma(n + 3.0)
    for q in range(1, q_hi + 1):
        sl = slice(q - 1, n)
        terms = row[sl] + lgk[sl] - math.lgamma(float(q)) - _gammaln(
            k[sl] - q + 2.0)
        top = terms.max()
        if not np.isfinite(top):
            continue
        out[q] = math.exp(log_pref + top + math.log(np.exp(terms - top).sum()))
    return out
