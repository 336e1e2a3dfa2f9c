"""
Closed-form bounds, recurrences and asymptotic expressions for region counts.

Rational formulas are evaluated exactly. Formulas involving logarithms, powers or square
roots are evaluated with :mod:`decimal` at a few guard digits above the requested
precision and then rounded in the direction of the bound: lower bounds down, upper
bounds up. Inexact intermediate results are padded away from the bound before the final
rounding, so a bound never changes direction when the precision is raised.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from decimal import (
    ROUND_CEILING,
    ROUND_FLOOR,
    ROUND_HALF_EVEN,
    Decimal,
    Inexact,
    localcontext,
)
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

from pwlcomplexity.constants import (
    DEFAULT_PRECISION,
    BoundDomainError,
    BoundViolationError,
    MissingBaseValueError,
)
from pwlcomplexity.rationals import format_rational


__all__ = [
    "BoundValue",
    "Direction",
    "LeadingTermReport",
    "b_recurrence",
    "binary_entropy",
    "ckn_expansion",
    "ckn_recurrence",
    "deep_set_guide",
    "entropy_bounds_fc",
    "fc_asymptotic_guide",
    "fc_entropy_lower",
    "generalized_factorial",
    "invariant_regions_guide",
    "invariant_upper_bound",
    "leading_coefficient",
    "leading_term_lower",
    "montufar_count",
    "multinomial",
    "schlafli",
    "shallow_invariant_guide",
    "theorem_one_lower",
]


logger = logging.getLogger(__name__)

_GUARD_DIGITS = 10
_PAD_DIGITS = 5

Number = Union[int, Fraction, Decimal]


class Direction(Enum):
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"
    GUIDE = "guide"


@dataclass(frozen=True)
class BoundValue:
    """A formula evaluated at concrete inputs.

    ``precision`` is the number of significant digits of a Decimal ``value`` and None for
    exact values. Guides are asymptotic expressions, not bounds on any count.
    """

    value: Number
    formula_id: str
    inputs: Tuple[Tuple[str, object], ...]
    direction: Direction
    precision: Optional[int] = None
    reference: str = ""

    def render(self) -> str:
        if isinstance(self.value, Fraction):
            return format_rational(self.value)
        return str(self.value)

    def as_row(self) -> Dict[str, str]:
        return {
            "formula": self.formula_id,
            "inputs": ", ".join(f"{k}={v}" for k, v in self.inputs),
            "value": self.render(),
            "direction": self.direction.value,
            "reference": self.reference,
        }


def _rounding_for(direction: Direction) -> str:
    if direction == Direction.LOWER:
        return ROUND_FLOOR
    if direction == Direction.UPPER:
        return ROUND_CEILING
    return ROUND_HALF_EVEN


def _directed(compute: Callable[[], Decimal], precision: int, rounding: str) -> Decimal:
    """Evaluate ``compute`` with guard digits and round the result in one direction."""
    with localcontext() as ctx:
        ctx.prec = precision + _GUARD_DIGITS
        ctx.rounding = ROUND_HALF_EVEN
        ctx.clear_flags()
        value = compute()
        if ctx.flags[Inexact] and rounding in (ROUND_FLOOR, ROUND_CEILING):
            if value:
                pad = abs(value).scaleb(-(precision + _PAD_DIGITS))
            else:
                pad = Decimal(1).scaleb(-(precision + _GUARD_DIGITS))
            value = value - pad if rounding == ROUND_FLOOR else value + pad
    with localcontext() as ctx:
        ctx.prec = precision
        ctx.rounding = rounding
        return +value


def _dec(value: Union[int, Fraction]) -> Decimal:
    """A rational as a Decimal in the current context."""
    value = Fraction(value)
    return Decimal(value.numerator) / Decimal(value.denominator)


def _entropy(p: Fraction) -> Decimal:
    if p in (0, 1):
        return Decimal(0)
    if p == Fraction(1, 2):
        return Decimal(1)
    ln2 = Decimal(2).ln()
    q = 1 - p
    return -(_dec(p) * _dec(p).ln() + _dec(q) * _dec(q).ln()) / ln2


def binary_entropy(
    p: Union[int, Fraction],
    precision: int = DEFAULT_PRECISION,
    rounding: str = ROUND_HALF_EVEN,
) -> Decimal:
    """``H(p) = -p log₂ p - (1 - p) log₂(1 - p)``, with ``H(0) = H(1) = 0``."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise BoundDomainError(f"binary entropy needs 0 <= p <= 1, got {p}")
    return _directed(lambda: _entropy(p), precision, rounding)


def schlafli(n0: int, n1: int) -> int:
    """Maximal number of chambers of n1 hyperplanes in n0 dimensions."""
    if n0 < 0 or n1 < 0:
        raise BoundDomainError(f"schlafli needs n0, n1 >= 0, got ({n0}, {n1})")
    return sum(math.comb(n1, i) for i in range(min(n0, n1) + 1))


def entropy_bounds_fc(
    n0: int, n1: int, precision: int = DEFAULT_PRECISION
) -> Tuple[BoundValue, BoundValue]:
    """Entropy sandwich around ``schlafli(n0, n1)``.

    ``2^{n1 H(n0/n1)} / sqrt(8 n0 (1 - n0/n1)) <= schlafli(n0, n1) <= 2^{n1 H(n0/n1)}``
    holds for ``0 <= n0 <= n1/2``; the n0 = 0 case is the exact value 1.
    """
    if n0 < 0 or 2 * n0 > n1:
        raise BoundDomainError(
            f"the entropy bounds hold for 0 <= n0 <= n1/2, got n0={n0}, n1={n1}"
        )
    inputs: Tuple[Tuple[str, object], ...] = (("n0", n0), ("n1", n1))
    count = schlafli(n0, n1)
    if n0 == 0:
        lower_value: Number = Decimal(1)
        upper_value: Number = Decimal(1)
    else:
        p = Fraction(n0, n1)

        def power() -> Decimal:
            return Decimal(2) ** (n1 * _entropy(p))

        def reduced() -> Decimal:
            return power() / (8 * _dec(n0 * (1 - p))).sqrt()

        lower_value = _directed(reduced, precision, ROUND_FLOOR)
        upper_value = _directed(power, precision, ROUND_CEILING)
    if not lower_value <= count <= upper_value:
        raise BoundViolationError(
            f"schlafli({n0}, {n1}) = {count} is outside [{lower_value}, {upper_value}]"
        )
    return (
        BoundValue(
            lower_value,
            "entropy_lower",
            inputs,
            Direction.LOWER,
            precision,
            "entropy lower bound on the region count",
        ),
        BoundValue(
            upper_value,
            "entropy_upper",
            inputs,
            Direction.UPPER,
            precision,
            "entropy upper bound on the region count",
        ),
    )


def theorem_one_lower(n0: int, n1: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """Lower bound on the refined complexity of single-hidden-layer networks.

    Generic networks have pairwise inequivalent regions, so the bound coincides with the
    entropy lower bound on the region count, taken at ``H(n0/n1)``.
    """
    lower, _ = entropy_bounds_fc(n0, n1, precision)
    return BoundValue(
        lower.value,
        "theorem_one_lower",
        lower.inputs,
        Direction.LOWER,
        precision,
        "refined complexity of fully connected shallow networks",
    )


def fc_entropy_lower(m: int, n: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """:func:`theorem_one_lower` for n inputs and ``m·n`` hidden units."""
    if m < 2 or n < 1:
        raise BoundDomainError(f"needs m >= 2 and n >= 1, got m={m}, n={n}")
    bound = theorem_one_lower(n, m * n, precision)
    return BoundValue(
        bound.value,
        "fc_entropy_lower",
        (("m", m), ("n", n)),
        Direction.LOWER,
        precision,
        bound.reference,
    )


def _guide(
    compute: Callable[[], Decimal],
    formula_id: str,
    inputs: Tuple[Tuple[str, object], ...],
    precision: int,
    reference: str,
) -> BoundValue:
    value = _directed(compute, precision, ROUND_HALF_EVEN)
    return BoundValue(value, formula_id, inputs, Direction.GUIDE, precision, reference)


def fc_asymptotic_guide(m: int, n: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """Leading term ``e^n / (2 sqrt(2n)) · m^n`` of :func:`fc_entropy_lower` for large m."""
    if n < 1:
        raise BoundDomainError(f"needs n >= 1, got {n}")
    return _guide(
        lambda: Decimal(n).exp() / (2 * Decimal(2 * n).sqrt()) * Decimal(m) ** n,
        "fc_asymptotic_guide",
        (("m", m), ("n", n)),
        precision,
        "asymptotic guide, not exact count",
    )


def deep_set_guide(ms: Sequence[int], n: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """``(m₁⋯m_L e)^n / sqrt(n)``: growth of deep-set complexity with depth."""
    product = math.prod(ms)
    return _guide(
        lambda: (Decimal(product) * Decimal(1).exp()) ** n / Decimal(n).sqrt(),
        "deep_set_guide",
        (("ms", tuple(ms)), ("n", n)),
        precision,
        "asymptotic guide, not exact count",
    )


def shallow_invariant_guide(
    ms: Sequence[int], n: int, precision: int = DEFAULT_PRECISION
) -> BoundValue:
    """``(m₁ + ⋯ + m_L)^n e^n / sqrt(n)``: the same units spent on one invariant layer."""
    total = sum(ms)
    return _guide(
        lambda: Decimal(total) ** n * Decimal(n).exp() / Decimal(n).sqrt(),
        "shallow_invariant_guide",
        (("ms", tuple(ms)), ("n", n)),
        precision,
        "asymptotic guide, not exact count",
    )


def invariant_regions_guide(m: int, n: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """``(2^{5/4})^n / (n sqrt 2) · m^n``: growth of the region count of invariant models."""
    return _guide(
        lambda: _quarter_power_bound(n) * Decimal(m) ** n,
        "invariant_regions_guide",
        (("m", m), ("n", n)),
        precision,
        "asymptotic guide, not exact count",
    )


@lru_cache(maxsize=None)
def b_recurrence(m: int, n: int, level: int) -> int:
    """Chambers of a generic invariant arrangement, by the three-term recurrence.

    ``b^l_{m,n} = b^l_{m,n-1} + m b^{l-1}_{m,n-1} + m(m-1)/2 · b^{l-2}_{m-1,n-1}``, with
    ``b^l = 0`` for ``l < 0`` and ``b^0_{m,n} = b^l_{0,n} = b^l_{m,0} = 1``. The number of
    chambers of a generic ``B_{m,n}`` is ``b^n_{m,n}``.
    """
    if m < 0 or n < 0:
        raise BoundDomainError(f"b_recurrence needs m, n >= 0, got ({m}, {n})")
    if level < 0:
        return 0
    if level == 0 or m == 0 or n == 0:
        return 1
    return (
        b_recurrence(m, n - 1, level)
        + m * b_recurrence(m, n - 1, level - 1)
        + m * (m - 1) // 2 * b_recurrence(m - 1, n - 1, level - 2)
    )


def _base_values(n: int, base: Union[Sequence[int], Mapping[int, int]]) -> Dict[int, int]:
    values = dict(base) if isinstance(base, Mapping) else dict(enumerate(base))
    missing = [j for j in range(n + 1) if j not in values]
    if missing:
        raise MissingBaseValueError(f"missing base values c0_j for j in {missing}")
    return values


def _coxeter_weight(k: int, printed_form: bool) -> int:
    return k if printed_form else k - 1


def ckn_recurrence(
    n: int, base: Union[Sequence[int], Mapping[int, int]], printed_form: bool = False
) -> int:
    """Chambers of ``B`` augmented with the Coxeter planes, from chamber counts of restrictions.

    ``base[j]`` is the number of chambers of the restriction of ``B`` to the
    j-dimensional flat where the coordinates take j distinct values. Adding the planes
    ``x_i = x_k`` (i < k) for k = 1, …, n gives ``c^k_j = c^{k-1}_j + (k-1) c^{k-1}_{j-1}``
    and the result is ``c^n_n``. ``printed_form`` uses the multiplier k instead, which
    overcounts (it gives ``(n+1)!`` chambers for an empty arrangement).
    """
    if n < 0:
        raise BoundDomainError(f"ckn_recurrence needs n >= 0, got {n}")
    values = _base_values(n, base)
    row = [values[j] for j in range(n + 1)]
    for k in range(1, n + 1):
        weight = _coxeter_weight(k, printed_form)
        row = [row[j] + (weight * row[j - 1] if j >= 1 else 0) for j in range(n + 1)]
    return row[n]


def ckn_expansion(
    n: int, base: Union[Sequence[int], Mapping[int, int]], printed_form: bool = False
) -> int:
    """Closed form of :func:`ckn_recurrence` as a sum over subsets S of ``{1, …, n}``."""
    values = _base_values(n, base)
    total = 0
    for size in range(n + 1):
        for subset in itertools.combinations(range(1, n + 1), size):
            weight = math.prod(_coxeter_weight(k, printed_form) for k in subset)
            total += weight * values[n - size]
    return total


def generalized_factorial(gamma: Number) -> Number:
    """``γ! = ∏_{0 <= k < γ} (γ - k)``; exact for rational γ.

    Decimal arguments are evaluated in the current decimal context.
    """
    if gamma < 0:
        raise BoundDomainError(f"generalized factorial needs gamma >= 0, got {gamma}")
    steps = math.ceil(gamma)
    if isinstance(gamma, Decimal):
        result = Decimal(1)
        for k in range(steps):
            result *= gamma - k
        return result
    exact = Fraction(gamma)
    return math.prod((exact - k for k in range(steps)), start=Fraction(1))


def _alpha(m: int) -> Decimal:
    return Decimal(2) ** (m * _entropy(Fraction(1, m)))


def invariant_upper_bound(m: int, n: int, precision: int = DEFAULT_PRECISION) -> BoundValue:
    """Upper bound ``(n + α)! / (α! n!)`` on the refined complexity of invariant models.

    ``α = 2^{m H(1/m)}``; for m = 2, α = 4 and the bound is the integer ``C(n + 4, 4)``.
    """
    if m < 2 or n < 0:
        raise BoundDomainError(f"the invariant bound needs m >= 2 and n >= 0, got ({m}, {n})")
    inputs: Tuple[Tuple[str, object], ...] = (("m", m), ("n", n))
    reference = "refined complexity of invariant shallow models"
    if m == 2:
        value = Fraction(generalized_factorial(n + 4)) / (
            Fraction(generalized_factorial(4)) * math.factorial(n)
        )
        return BoundValue(
            value, "invariant_upper_bound", inputs, Direction.UPPER, None, reference
        )

    def compute() -> Decimal:
        alpha = _alpha(m)
        numerator = generalized_factorial(n + alpha)
        denominator = generalized_factorial(alpha) * math.factorial(n)
        return Decimal(numerator) / Decimal(denominator)

    value_up = _directed(compute, precision, ROUND_CEILING)
    return BoundValue(
        value_up, "invariant_upper_bound", inputs, Direction.UPPER, precision, reference
    )


def multinomial(n: int, parts: Sequence[int]) -> int:
    """``n! / (k₁! ⋯ k_r!)`` for parts summing to n."""
    if sum(parts) != n or any(k < 0 for k in parts):
        raise BoundDomainError(f"parts {tuple(parts)} do not split {n}")
    return math.factorial(n) // math.prod(math.factorial(k) for k in parts)


def _leading_sum_term(n: int, k: int) -> Fraction:
    return Fraction(multinomial(n, (k, k, n - 2 * k)), 2**k)


def _quarter_power_bound(n: int) -> Decimal:
    return Decimal(2) ** (Decimal(5 * n) / 4) / (n * Decimal(2).sqrt())


@dataclass(frozen=True)
class LeadingTermReport:
    """Lower bound on the leading coefficient in m of ``b^n_{m,n}`` and the exact sum it bounds."""

    bound: BoundValue
    leading_sum: Fraction
    quarter_term: Fraction


def leading_term_lower(m: int, n: int, precision: int = DEFAULT_PRECISION) -> LeadingTermReport:
    """Evaluate the leading-coefficient lower bound ``(2^{5/4})^n / (n sqrt 2)``.

    Also reports the exact leading sum ``Σ_k n! / (k! k! (n-2k)!) / 2^k`` and its
    ``k = n/4`` term, from which the bound is derived. The bound concerns the regime
    m > n/2.
    """
    if n < 1:
        raise BoundDomainError(f"needs n >= 1, got {n}")
    if 2 * m <= n:
        raise BoundDomainError(f"the leading term bound assumes m > n/2, got m={m}, n={n}")
    bound = _directed(lambda: _quarter_power_bound(n), precision, ROUND_FLOOR)
    leading_sum = sum(
        (_leading_sum_term(n, k) for k in range(n // 2 + 1)), start=Fraction(0)
    )
    return LeadingTermReport(
        BoundValue(
            bound,
            "leading_term_lower",
            (("m", m), ("n", n)),
            Direction.LOWER,
            precision,
            "leading coefficient of the invariant region count",
        ),
        leading_sum,
        _leading_sum_term(n, n // 4),
    )


def leading_coefficient(n: int, m0: Optional[int] = None) -> Fraction:
    """Leading coefficient in m of ``b^n_{m,n}``, as the n-th finite difference over n!."""
    if m0 is None:
        m0 = n // 2 + 1
    difference = sum(
        (-1) ** (n - i) * math.comb(n, i) * b_recurrence(m0 + i, n, n) for i in range(n + 1)
    )
    return Fraction(difference, math.factorial(n))


def montufar_count(widths: Sequence[int], n: int, n_last: int) -> int:
    """Regions of a folding network: ``∏ ⌊n_i / n⌋^n · schlafli(n, n_L)``.

    Args:
        widths: Widths of the folding layers.
        n: Input dimension.
        n_last: Number of hyperplanes of the head.
    """
    for width in widths:
        if width < n:
            raise BoundDomainError(f"folding widths must be at least n = {n}, got {width}")
    return math.prod((width // n) ** n for width in widths) * schlafli(n, n_last)
