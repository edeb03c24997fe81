"""Numerically hardened special-function kernel.

Everything downstream (closed-form distributions, conditional means, load
CCDFs) reduces to products and alternating sums of Pochhammer symbols,
digamma values, and Stirling numbers of the first kind.  The kernel keeps
all intermediates in sign + log-magnitude form so that quantities far
outside float range combine safely, and it escalates alternating sums to
extended precision when compensated float64 summation loses too many bits.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath

__all__ = [
    "EULER_GAMMA",
    "PrecisionPolicy",
    "SignedLogReal",
    "compensated_sum",
    "digamma",
    "mp_rf",
    "mp_sum_adaptive",
    "pochhammer_int",
    "pochhammer_frac",
    "stirling_first",
    "StirlingTable",
    "sum_term",
    "sum_term_signed",
]

# Euler-Mascheroni constant, 30 significant digits.
EULER_GAMMA = 0.577215664901532860606512090082

# Below this order a Pochhammer symbol is evaluated by direct factor-by-factor
# product; above it, by sign-tracked log-gamma with explicit pole detection.
_PRODUCT_CUTOFF = 64


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class BoundError(ValueError):
    """Requested size exceeds a configured table or DP bound."""


@dataclass(frozen=True)
class PrecisionPolicy:
    """Evaluation policy for cancellation-prone alternating sums.

    base_precision is the working significand width (float64).  When a
    compensated sum retains less than ``cancellation_threshold`` of its
    largest term, evaluation is redone at ``escalation_precision`` bits
    (and doubled further until the surviving bits are trustworthy).
    """

    base_precision: int = 53
    escalation_precision: int = 256
    cancellation_threshold: float = 1e-6

    def __post_init__(self):
        if self.escalation_precision <= self.base_precision:
            raise ValueError("escalation_precision must exceed base_precision")
        if not 0.0 < self.cancellation_threshold < 1.0:
            raise ValueError("cancellation_threshold must lie in (0, 1)")


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True)
class SignedLogReal:
    """A real number stored as sign and natural log of absolute value.

    ``sign`` is -1, 0, or +1; ``log_magnitude`` is ignored when sign is 0.
    """

    sign: int
    log_magnitude: float = 0.0

    @staticmethod
    def from_float(x: float) -> "SignedLogReal":
        if x == 0.0:
            return SignedLogReal(0)
        return SignedLogReal(1 if x > 0 else -1, math.log(abs(x)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > 709.0:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "SignedLogReal") -> "SignedLogReal":
        if self.sign == 0 or other.sign == 0:
            return SignedLogReal(0)
        return SignedLogReal(self.sign * other.sign,
                             self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "SignedLogReal") -> "SignedLogReal":
        if other.sign == 0:
            raise ZeroDivisionError("division by exact zero SignedLogReal")
        if self.sign == 0:
            return SignedLogReal(0)
        return SignedLogReal(self.sign * other.sign,
                             self.log_magnitude - other.log_magnitude)

    def __neg__(self) -> "SignedLogReal":
        return SignedLogReal(-self.sign, self.log_magnitude)


SLR_ONE = SignedLogReal(1, 0.0)
SLR_ZERO = SignedLogReal(0)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _gamma_sign(x: float) -> int:
    """Sign of Gamma(x) for non-pole x."""
    if x > 0.0:
        return 1
    # Gamma alternates sign between consecutive negative integers.
    return -1 if math.ceil(-x) % 2 else 1


def _lgamma_signed(x: float) -> SignedLogReal:
    """Gamma(x) as sign + log-magnitude; x must not be a pole."""
    return SignedLogReal(_gamma_sign(x), math.lgamma(x))


def pochhammer_int(x: float, n: int) -> SignedLogReal:
    """Rising factorial (x)_n = x (x+1) ... (x+n-1) for integer order n >= 0.

    Total over all real x: an exact zero (sign 0) is returned whenever some
    factor x+j vanishes, i.e. when x is a non-positive integer with -x < n.
    Small orders use the direct product; large orders use sign-tracked
    log-gamma, never evaluated at a pole.
    """
    if n < 0:
        raise DomainError("pochhammer_int requires n >= 0")
    if n == 0:
        return SLR_ONE
    if _is_nonpositive_integer(x):
        if x + n - 1 >= 0.0:
            return SLR_ZERO
        # All n factors are negative integers: (-1)^n * |x|! / (|x|-n)!
        m = -x
        return SignedLogReal(-1 if n % 2 else 1,
                             math.lgamma(m + 1.0) - math.lgamma(m - n + 1.0))
    if n <= _PRODUCT_CUTOFF:
        sign = 1
        log_mag = 0.0
        for j in range(n):
            f = x + j
            if f == 0.0:
                return SLR_ZERO
            if f < 0.0:
                sign = -sign
            log_mag += math.log(abs(f))
        return SignedLogReal(sign, log_mag)
    num = _lgamma_signed(x + n)
    den = _lgamma_signed(x)
    return num / den


def pochhammer_frac(x: float, s: float) -> float:
    """Gamma(x+s)/Gamma(x) for fractional order 0 <= s <= 1, x > 0."""
    if x <= 0.0:
        raise DomainError("pochhammer_frac requires x > 0")
    if not 0.0 <= s <= 1.0:
        raise DomainError("pochhammer_frac requires 0 <= s <= 1")
    return math.exp(math.lgamma(x + s) - math.lgamma(x))


# Coefficients -B_{2k}/(2k) of the digamma asymptotic series.
_DIGAMMA_ASYMP = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)

_DIGAMMA_SHIFT = 12.0


def digamma(x: float) -> float:
    """Psi(x) for x > 0 by upward recurrence into the asymptotic region."""
    if x <= 0.0:
        raise DomainError("digamma requires x > 0")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_ASYMP:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x + series


class StirlingTable:
    """Lazily grown triangle of exact signed Stirling numbers of the first kind.

    Row n holds s(n, k) for 0 <= k <= n, built from s(n+1, k) =
    s(n, k-1) - n * s(n, k).  Construction is guarded by a lock so that
    concurrent readers always observe fully built rows.
    """

    def __init__(self, n_max: int = 256):
        self.n_max = n_max
        self._rows: list[list[int]] = [[1]]
        self._lock = threading.Lock()

    def row(self, n: int) -> list[int]:
        if n > self.n_max:
            raise BoundError(f"Stirling row {n} exceeds bound {self.n_max}")
        if n >= len(self._rows):
            with self._lock:
                while len(self._rows) <= n:
                    m = len(self._rows) - 1
                    prev = self._rows[m]
                    nxt = [0] * (m + 2)
                    for k in range(1, m + 2):
                        nxt[k] = prev[k - 1] - (m * prev[k] if k <= m else 0)
                    self._rows.append(nxt)
        return self._rows[n]

    def value(self, n: int, k: int) -> int:
        if not 0 <= k <= n:
            raise DomainError("stirling_first requires 0 <= k <= n")
        return self.row(n)[k]


_DEFAULT_STIRLING = StirlingTable()


def stirling_first(n: int, k: int, table: StirlingTable | None = None) -> int:
    """Exact signed Stirling number of the first kind s(n, k)."""
    return (table or _DEFAULT_STIRLING).value(n, k)


def compensated_sum(terms: Sequence[SignedLogReal],
                    policy: PrecisionPolicy = DEFAULT_POLICY,
                    ) -> tuple[float, float]:
    """Error-compensated sum of signed log-space terms.

    Returns (sum, cancellation_ratio) where the ratio is |sum| / max|term|,
    the quantity escalation decisions key on.  The terms are rescaled by the
    largest magnitude and accumulated with exact (fsum) summation, so the
    only float error is the final rounding at the common scale.
    """
    slr, ratio = _compensated_sum_signed(terms)
    return slr.to_float(), ratio


def _compensated_sum_signed(terms: Sequence[SignedLogReal],
                            ) -> tuple[SignedLogReal, float]:
    live = [t for t in terms if t.sign != 0]
    if not live:
        return SLR_ZERO, 0.0
    top = max(t.log_magnitude for t in live)
    scaled = math.fsum(t.sign * math.exp(t.log_magnitude - top) for t in live)
    if scaled == 0.0:
        return SLR_ZERO, 0.0
    return SignedLogReal(1 if scaled > 0 else -1,
                         top + math.log(abs(scaled))), abs(scaled)


def mp_sum_adaptive(builder: Callable[[], Sequence], start_bits: int,
                    max_bits: int = 1 << 14) -> SignedLogReal:
    """Sum the terms produced by ``builder`` at increasing precision.

    ``builder`` is invoked inside an mpmath working-precision context and
    must return the term list evaluated at that precision.  Precision is
    doubled until the surviving magnitude keeps a comfortable margin over
    the bits lost to cancellation.  The result is returned in sign +
    log-magnitude form so callers can combine it with out-of-range factors.
    """
    bits = start_bits
    while True:
        with mpmath.workprec(bits):
            terms = builder()
            total = mpmath.mpf(0)
            top = mpmath.mpf(0)
            for t in terms:
                total += t
                if abs(t) > top:
                    top = abs(t)
            done = total == 0 or top == 0
            if not done:
                lost = float(mpmath.log(top / abs(total), 2))
                done = lost + 64 <= bits or bits >= max_bits
            if done:
                if total == 0:
                    return SLR_ZERO
                return SignedLogReal(1 if total > 0 else -1,
                                     float(mpmath.log(abs(total))))
        bits *= 2


def mp_rf(x, n: int):
    """Rising factorial in mpmath, safe at non-positive integer x."""
    if x == int(x) and x <= 0:
        if x + n - 1 >= 0:
            return mpmath.mpf(0)
        m = int(-x)
        mag = mpmath.gamma(m + 1) / mpmath.gamma(m - n + 1)
        return -mag if n % 2 else mag
    return mpmath.rf(x, n)


_mp_rf = mp_rf


def sum_term_signed(n: int, q: int, alpha: float,
                    policy: PrecisionPolicy = DEFAULT_POLICY) -> SignedLogReal:
    """Alternating Pochhammer sum underlying every closed-form distribution.

    For q >= 1 uses the reduced form
        alpha * sum_{k=0}^{q-1} (-1)^k (1-alpha-alpha*k)_{n-1} / (k! (q-1-k)!)
    and for q = 0 the defining sum, which collapses to [n == 0].  Exactly
    zero for q > n.  Escalates to extended precision when the compensated
    float64 result keeps less than ``policy.cancellation_threshold`` of the
    largest term.
    """
    if n < 0 or q < 0:
        raise DomainError("sum_term requires n >= 0 and q >= 0")
    if not 0.0 < alpha <= 1.0:
        raise DomainError("sum_term requires alpha in (0, 1]")
    if q > n:
        return SLR_ZERO
    if q == 0:
        return SLR_ONE if n == 0 else SLR_ZERO

    log_alpha = math.log(alpha)
    terms = []
    for k in range(q):
        poch = pochhammer_int(1.0 - alpha - alpha * k, n - 1)
        if poch.sign == 0:
            continue
        sign = poch.sign * (-1 if k % 2 else 1)
        log_mag = (log_alpha + poch.log_magnitude
                   - math.lgamma(k + 1.0) - math.lgamma(q - k))
        terms.append(SignedLogReal(sign, log_mag))
    result, ratio = _compensated_sum_signed(terms)
    # Secondary trigger: the term inputs carry O(n) ulps of rounding, so a
    # surviving fraction below ~n * 1e-6 cannot be trusted to 1e-9 relative
    # even though it clears the cancellation threshold.
    trigger = max(policy.cancellation_threshold, (n + 2) * 1e-6)
    if terms and ratio < trigger:
        return _sum_term_escalated(n, q, alpha, policy)
    return result


def _sum_term_escalated(n: int, q: int, alpha: float,
                        policy: PrecisionPolicy) -> SignedLogReal:
    def build():
        a = mpmath.mpf(alpha)
        return [(-1) ** k * a * _mp_rf(1 - a - a * k, n - 1)
                / (mpmath.factorial(k) * mpmath.factorial(q - 1 - k))
                for k in range(q)]

    return mp_sum_adaptive(build, policy.escalation_precision)


def sum_term(n: int, q: int, alpha: float,
             policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Float value of the alternating sum; see sum_term_signed."""
    return sum_term_signed(n, q, alpha, policy).to_float()
