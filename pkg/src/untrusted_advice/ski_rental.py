"""Ski rental with a single advice bit.

Renting costs 1 per day and buying costs ``B``.  The advice bit is 1 exactly
when the season is shorter than ``B`` days (``D < B``); at ``D == B`` the bit
is 0.  Every deterministic 1-bit algorithm is a pair of buy days, one per bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import CompetitivePair, InvariantViolation, ParameterError, pareto_frontier

__all__ = [
    "NEVER",
    "OneBitPolicy",
    "SkiInstance",
    "ak_cost",
    "ak_pair",
    "ak_policy",
    "correct_bit",
    "enumerate_policies_frontier",
    "large_b_randomized_pair",
    "measure_pair",
    "policy_cost",
    "randomized_dominance_holds",
    "randomized_pairs",
]

NEVER = None


@dataclass(frozen=True)
class SkiInstance:
    B: int
    D: int

    def __post_init__(self):
        if self.B < 1 or self.D < 1:
            raise ParameterError(f"need B >= 1 and D >= 1, got B={self.B}, D={self.D}")

    @property
    def opt(self) -> int:
        return min(self.D, self.B)


@dataclass(frozen=True)
class OneBitPolicy:
    """Buy day to use under each advice bit; ``None`` means never buy."""

    buy_day_if_advice0: Optional[int]
    buy_day_if_advice1: Optional[int]

    def __post_init__(self):
        for day in (self.buy_day_if_advice0, self.buy_day_if_advice1):
            if day is not None and day < 1:
                raise ParameterError(f"buy day must be >= 1, got {day}")

    def buy_day(self, bit: int) -> Optional[int]:
        return self.buy_day_if_advice1 if bit else self.buy_day_if_advice0

    def label(self) -> str:
        def f(d):
            return "never" if d is None else str(d)

        return f"{f(self.buy_day_if_advice0)}/{f(self.buy_day_if_advice1)}"


def correct_bit(B: int, D: int) -> int:
    return 1 if D < B else 0


def _buy_day_cost(buy_day: Optional[int], B: int, D: int) -> int:
    if buy_day is None or D < buy_day:
        return D
    return (buy_day - 1) + B


def policy_cost(policy: OneBitPolicy, B: int, D: int, bit: int) -> int:
    return _buy_day_cost(policy.buy_day(bit), B, D)


def ak_policy(k: int, B: int) -> OneBitPolicy:
    _check_k(k, B)
    return OneBitPolicy(buy_day_if_advice0=k, buy_day_if_advice1=B)


def _check_k(k: int, B: int) -> None:
    if B < 1:
        raise ParameterError(f"B must be >= 1, got {B}")
    if not 1 <= k <= B:
        raise ParameterError(f"k must lie in [1, B={B}], got {k}")


def ak_cost(k: int, B: int, D: int, advice_bit: int) -> int:
    _check_k(k, B)
    if advice_bit not in (0, 1):
        raise ParameterError(f"advice bit must be 0 or 1, got {advice_bit}")
    return policy_cost(ak_policy(k, B), B, D, advice_bit)


def ak_pair(k: int, B: int) -> CompetitivePair:
    _check_k(k, B)
    return CompetitivePair(1 + Fraction(k - 1, B), 1 + Fraction(B - 1, k))


def _ratio_sup(policy: OneBitPolicy, B: int, days: range):
    """Exact (trusted, untrusted) sup over ``days`` as integer fractions."""
    # Fractions kept as (num, den) pairs and compared by cross-multiplication.
    tn, td = 0, 1
    un, ud = 0, 1
    for D in days:
        opt = D if D < B else B
        cb = 1 if D < B else 0
        for bit in (0, 1):
            c = _buy_day_cost(policy.buy_day(bit), B, D)
            if c * ud > un * opt:
                un, ud = c, opt
            if bit == cb and c * td > tn * opt:
                tn, td = c, opt
    return Fraction(tn, td), Fraction(un, ud)


def measure_pair(policy: OneBitPolicy, B: int, cap: Optional[int] = None) -> CompetitivePair:
    """Empirical pair over seasons ``D = 1..cap`` (default ``3B``).

    With both buy days finite, cost and OPT are constant once ``D`` passes
    every buy day and ``B``, so the sup over the sweep is the true sup; this is
    checked rather than assumed.  A never-buy branch has an unbounded ratio
    and the capped value is reported.
    """
    if B < 1:
        raise ParameterError(f"B must be >= 1, got {B}")
    cap = 3 * B if cap is None else cap
    if cap < 3 * B:
        raise ParameterError(f"day cap must be >= 3B = {3 * B}, got {cap}")
    r, w = _ratio_sup(policy, B, range(1, cap + 1))
    days = (policy.buy_day_if_advice0, policy.buy_day_if_advice1)
    if None not in days:
        horizon = max(B, *days)
        if horizon <= cap:
            r0, w0 = _ratio_sup(policy, B, range(1, horizon + 1))
            if (r0, w0) != (r, w):
                raise InvariantViolation(
                    "ski.saturation", f"sup over D grew past D={horizon} for {policy.label()}"
                )
    return CompetitivePair(r, w)


def enumerate_policies_frontier(B: int) -> list[tuple[OneBitPolicy, CompetitivePair]]:
    """Pareto frontier of every policy with buy days in ``{1..2B, never}``.

    Also checks that no frontier point beats the ``A_k`` family.
    """
    if not 1 <= B <= 50:
        raise ParameterError(f"enumeration supports 1 <= B <= 50, got {B}")
    days = list(range(1, 2 * B + 1)) + [NEVER]
    points = []
    for d0 in days:
        for d1 in days:
            pol = OneBitPolicy(d0, d1)
            points.append((pol, measure_pair(pol, B)))
    front = pareto_frontier(points)
    family = [ak_pair(k, B) for k in range(1, B + 1)]
    for pol, pair in front:
        if not any(f.r <= pair.r and f.w <= pair.w for f in family):
            raise InvariantViolation(
                "ski.frontier", f"policy {pol.label()} with {pair} is not covered by any A_k"
            )
    return front


def randomized_pairs(lam: float, B: int) -> CompetitivePair:
    """Formula-level pair of the randomized 1-bit ski rental algorithm.

    Only the competitive pair is evaluated; the algorithm itself is not
    simulated.
    """
    if B < 1:
        raise ParameterError(f"B must be >= 1, got {B}")
    if not 1.0 / B < lam < 1.0:
        raise ParameterError(f"lambda must lie in (1/B, 1) = ({1.0 / B}, 1), got {lam}")
    r = lam / -math.expm1(-lam)
    w = 1.0 / -math.expm1(-(lam - 1.0 / B))
    return CompetitivePair(r, w)


# w = 1/(1 - e^-lambda) for lambda in (0, 1)
_LARGE_B_W_MIN = math.e / (math.e - 1)


def large_b_randomized_pair(w: float) -> CompetitivePair:
    """Large-``B`` pair ``(w ln(w/(w-1)), w)``, defined for ``w > e/(e-1)``."""
    if not w > _LARGE_B_W_MIN:
        raise ParameterError(f"w must exceed e/(e-1) = {_LARGE_B_W_MIN:.6f}, got {w}")
    return CompetitivePair(w * math.log(w / (w - 1)), w)


def randomized_dominance_holds(w: float) -> bool:
    """Whether the randomized pair beats the deterministic ``w/(w-1)``."""
    return large_b_randomized_pair(w).r < w / (w - 1)
