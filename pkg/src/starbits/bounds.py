"""Closed-form discrepancy and security bound calculators.

Everything here is a pure function of scalar inputs: dimension d, point
count n, coordinate precision p (bits), generator security level b (bits),
a discrepancy constant c multiplying sqrt(d/n), and a confidence q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "BoundReport",
    "ah_bound",
    "ah_confidence",
    "exceedance_bound",
    "required_security_bits",
    "inverse_size_bound",
    "security_advantage",
    "AH_SCALE",
    "AH_OFFSET",
    "AH_THRESHOLD_C",
    "C_AISTLEITNER",
    "C_GNEWUCH_HEBBINGHAUS",
]

# Constants of the Aistleitner-Hofer high-probability bound
#   D*_n <= AH_SCALE * sqrt(AH_OFFSET + ln(1/(1-q))) * sqrt(d/n)
AH_SCALE = 5.7
AH_OFFSET = 4.9

# Smallest c for which the q > 0 guarantee kicks in (= 5.7 * sqrt(4.9)).
AH_THRESHOLD_C = AH_SCALE * math.sqrt(AH_OFFSET)

# Published constants for the existence bound D*_n <= c * sqrt(d/n).
C_AISTLEITNER = 10.0
C_GNEWUCH_HEBBINGHAUS = 2.5287


@dataclass(frozen=True)
class BoundReport:
    """A bound value together with its named sub-terms."""

    bound_value: float
    components: dict[str, float]
    formula_id: str
    vacuous: bool = False
    note: str = ""

    def lines(self) -> list[str]:
        out = [f"{self.formula_id}: {self.bound_value!r}"]
        for name, value in self.components.items():
            out.append(f"  {name} = {value!r}")
        if self.vacuous:
            out.append("  [capped: bound vacuous at these parameters]")
        if self.note:
            out.append(f"  note: {self.note}")
        return out


def _check_dn(d: int, n: int) -> None:
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")


def ah_bound(d: int, n: int, q: float) -> float:
    """Discrepancy level a random n-point set in [0,1)^d stays below with
    probability at least q:  5.7 * sqrt(4.9 + ln(1/(1-q))) * sqrt(d/n).

    q = 0 is accepted as the continuous limit of the formula.
    """
    _check_dn(d, n)
    if not 0.0 <= q < 1.0:
        raise ValueError(f"confidence q must be in [0, 1), got {q}")
    # log((1-q)^-1) with the cancellation-friendly form.
    log_term = -math.log1p(-q)
    return AH_SCALE * math.sqrt(AH_OFFSET + log_term) * math.sqrt(d / n)


def ah_confidence(d: int, n: int, c: float) -> float:
    """Invert ah_bound: the confidence q at which the guaranteed level is
    c * sqrt(d/n).  Returns 0.0 when c is at or below the threshold
    5.7*sqrt(4.9); the result is clamped to [0, 1).
    """
    _check_dn(d, n)
    if c <= 0.0:
        raise ValueError(f"constant c must be positive, got {c}")
    exponent = AH_OFFSET - (c / AH_SCALE) ** 2
    if exponent >= 0.0:
        return 0.0
    q = -math.expm1(exponent)  # 1 - exp(exponent), accurately
    return min(q, math.nextafter(1.0, 0.0))


def security_advantage(t_ops: float, b: int) -> float:
    """Maximal distinguisher advantage sqrt(T / 2**b) for a T-operation
    attack on a generator with b bits of security."""
    if t_ops < 1:
        raise ValueError(f"operation count must be >= 1, got {t_ops}")
    if b < 0:
        raise ValueError(f"security bits must be >= 0, got {b}")
    return math.sqrt(t_ops * 2.0 ** (-b))


def exceedance_bound(d: int, n: int, p: int, b: int, c: float) -> BoundReport:
    """Upper bound on the probability that an n-point set built from a
    b-bit-security generator at precision p has star-discrepancy at least
    c * sqrt(d/n).

    The bound is the sum of a tail term
        exp(4.9 - ((c - sqrt(d*n)/2**p) / 5.7)**2)
    and a distinguishing term equal to
        security_advantage(n**(1 + d/2), b),
    the advantage of an adversary that simply computes the discrepancy
    (n**(1+d/2) operations, counted with an O(1) constant of 1).
    Probability components are capped at 1 and flagged when the cap bites.
    """
    _check_dn(d, n)
    if p < 1 or b < 0:
        raise ValueError(f"need p >= 1 and b >= 0, got p={p}, b={b}")
    if c <= 0.0:
        raise ValueError(f"constant c must be positive, got {c}")
    shift = math.sqrt(d * n) * 2.0 ** (-p)
    vacuous = c <= shift
    if vacuous:
        tail = 1.0
    else:
        tail = math.exp(AH_OFFSET - ((c - shift) / AH_SCALE) ** 2)
        if tail > 1.0:
            tail = 1.0
            vacuous = True
    security = security_advantage(n ** (1.0 + d / 2.0), b)
    total = tail + security
    if total > 1.0:
        total = 1.0
        vacuous = True
    return BoundReport(
        bound_value=total,
        components={"tail": tail, "security": security, "shift": shift},
        formula_id="exceedance",
        vacuous=vacuous,
        note="distinguisher cost n**(1+d/2) with O(1) constant taken as 1",
    )


def required_security_bits(c: float, d: int, n: int) -> int:
    """Security level b = ceil(2*log2(c) + (d/2)*log2(n)) at which the
    distinguishing term of exceedance_bound is driven below 1/c * sqrt(n)
    (equivalently sqrt(n**(d/2) / 2**b) <= 1/c)."""
    if c <= 1.0:
        raise ValueError(f"constant c must exceed 1, got {c}")
    if d < 1 or n < 2:
        raise ValueError(f"need d >= 1 and n >= 2, got d={d}, n={n}")
    return math.ceil(2.0 * math.log2(c) + 0.5 * d * math.log2(n))


def inverse_size_bound(epsilon: float, d: int, c: float) -> int:
    """Point count ceil(c**2 * d / epsilon**2) sufficient for discrepancy
    epsilon in dimension d under the c * sqrt(d/n) guarantee."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if c <= 0.0:
        raise ValueError(f"constant c must be positive, got {c}")
    return math.ceil(c * c * d / (epsilon * epsilon))
