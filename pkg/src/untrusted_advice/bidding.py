"""Online bidding with untrusted advice.

A bidder submits increasing bids ``x_1 < x_2 < ...`` until one reaches the
hidden value ``u`` and pays the sum of all bids made.  The module provides

* the auxiliary sequences ``a_i, b_i, c_i, d_i`` that govern the best
  ``(r, w)`` tradeoff, in closed form and by recurrence;
* the strategy ``X*`` that is optimal when the advice is the exact ``u``
  (:func:`optimal_bid_sequence`, :func:`pareto_strategy`);
* the geometric strategy driven by ``k`` advice bits (:func:`kbit_strategy`);
* a randomized mixture of ``X*`` and its scaled copy;
* simulation and empirical ``(r, w)`` measurement over grids of hidden values;
* the adversary game that witnesses the lower bound for ``k``-bit advice.

``w = 4`` is a double root of the characteristic polynomial and always takes
its own branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import CompetitivePair, InvariantViolation, ParameterError

__all__ = [
    "ABCDState",
    "ADVERSARIAL_DELTA",
    "BidSequence",
    "DoublingStrategy",
    "GameResult",
    "Infeasible",
    "KBitBidding",
    "ParetoBidding",
    "ParetoResult",
    "RootPair",
    "StrategyExhausted",
    "abcd",
    "abcd_recurrence",
    "adversary_game",
    "check_prefix_sum_bound",
    "check_step_bound",
    "empirical_pair",
    "kbit_advice",
    "kbit_bounds",
    "kbit_rho",
    "kbit_strategy",
    "log_grid",
    "optimal_bid_sequence",
    "pareto_strategy",
    "randomized_bounds",
    "randomized_mixture_pair",
    "roots",
    "simulate",
]

# "Infinitesimally larger" hidden values sit this far above a bid.
ADVERSARIAL_DELTA = 1e-9
_REL_TOL = 1e-9


class StrategyExhausted(ValueError):
    """A finite bid sequence ended before reaching the hidden value."""


@dataclass(frozen=True)
class RootPair:
    rho1: float
    rho2: float
    p: float


def _check_w(w) -> None:
    if w < 4:
        raise ParameterError(f"w must be >= 4 (complex characteristic roots below), got {w}")


def roots(w) -> RootPair:
    """Roots of ``x^2 - w x + w`` and ``p = rho1 - 1``."""
    _check_w(w)
    if w == 4:
        return RootPair(2.0, 2.0, 1.0)
    w = float(w)
    s = math.sqrt(w * w - 4 * w)
    # 2w / (w + s) equals (w - s) / 2 without the cancellation
    rho1 = 2 * w / (w + s)
    rho2 = (w + s) / 2
    return RootPair(rho1, rho2, rho1 - 1)


@dataclass(frozen=True)
class ABCDState:
    a: float
    b: float
    c: float
    d: float
    index: int


def abcd(w, i: int) -> ABCDState:
    """Closed-form ``(a_i, b_i, c_i, d_i)``."""
    _check_w(w)
    if i < 0:
        raise ParameterError(f"index must be >= 0, got {i}")
    if w == 4:
        return ABCDState(
            a=2.0 / ((i + 2) * 2.0**i),
            b=i / (i + 2),
            c=2.0 - 2.0 / (i + 1),
            d=2.0**i / (i + 1),
            index=i,
        )
    w = float(w)
    p = roots(w).p
    pi = p**i
    a = (p * p - 1) / (pi * p * p - 1) * (p / w) ** (i / 2)
    b = p * (pi - 1) / (pi * p * p - 1)
    c = 1 + p - pi * (p * p - 1) / (pi * p - 1)
    d = (p - 1) / (pi * p - 1) * (p * w) ** (i / 2)
    return ABCDState(a, b, c, d, i)


def abcd_recurrence(w, n: int) -> list[ABCDState]:
    """``(a_i, b_i, c_i, d_i)`` for ``i = 0..n`` by the defining recurrences.

    Exact when ``w`` is an ``int`` or ``Fraction``.
    """
    _check_w(w)
    exact = isinstance(w, (int, Fraction))
    one = Fraction(1) if exact else 1.0
    zero = one * 0
    a, b, c, d = one, zero, zero, one
    out = [ABCDState(a, b, c, d, 0)]
    for i in range(1, n + 1):
        den = w - 1 - b
        a, b, c, d = a / den, (1 + b) / den, c + d * a, d * (1 + b)
        out.append(ABCDState(a, b, c, d, i))
    return out


class BidSequence:
    """Increasing bids given by a rule ``i -> x_i`` for ``i >= 1``.

    ``length`` bounds the sequence; ``None`` means it never ends.  Bids are
    cached once computed.
    """

    def __init__(self, rule: Callable[[int], float], length: Optional[int] = None, name: str = ""):
        self._rule = rule
        self.length = length
        self.name = name
        self._cache: list[float] = []

    @classmethod
    def from_list(cls, bids: Sequence[float], name: str = "") -> "BidSequence":
        bids = [float(x) for x in bids]
        for x in bids:
            if x <= 0:
                raise ParameterError("bids must be positive")
        for lo, hi in zip(bids, bids[1:]):
            if not hi > lo:
                raise ParameterError("bids must be strictly increasing")
        return cls(lambda i: bids[i - 1], len(bids), name)

    def bid(self, i: int) -> float:
        if i < 1:
            raise IndexError("bids are indexed from 1")
        if self.length is not None and i > self.length:
            raise IndexError(f"bid {i} past the end of a {self.length}-bid sequence")
        while len(self._cache) < i:
            self._cache.append(float(self._rule(len(self._cache) + 1)))
        return self._cache[i - 1]

    def prefix(self, n: int) -> list[float]:
        if self.length is not None:
            n = min(n, self.length)
        return [self.bid(i) for i in range(1, n + 1)]

    def through(self, u: float, max_bids: int = 100_000) -> list[float]:
        """Bids up to and including the first one ``>= u``."""
        out = []
        i = 1
        while True:
            if self.length is not None and i > self.length:
                raise StrategyExhausted(
                    f"sequence {self.name or '<anon>'} ends at {out[-1] if out else None} < u={u}"
                )
            if i > max_bids:
                raise StrategyExhausted(f"no bid reached u={u} within {max_bids} bids")
            x = self.bid(i)
            out.append(x)
            if x >= u:
                return out
            i += 1

    def scaled(self, factor: float, name: str = "") -> "BidSequence":
        return BidSequence(lambda i: factor * self.bid(i), self.length, name or f"{factor}*{self.name}")

    def __iter__(self) -> Iterator[float]:
        i = 1
        while self.length is None or i <= self.length:
            yield self.bid(i)
            i += 1

    def __repr__(self):
        shown = ", ".join(f"{x:.6g}" for x in self.prefix(5))
        tail = "" if self.length is not None and self.length <= 5 else ", ..."
        return f"BidSequence([{shown}{tail}])"


def simulate(X: BidSequence, u: float) -> float:
    """Total paid when bidding ``X`` against hidden value ``u``."""
    return math.fsum(X.through(u))


@dataclass(frozen=True)
class Infeasible:
    """No ``m``-bid solution hitting ``u`` exactly keeps ratio ``w``."""

    m: int
    u: float
    w: float
    a_prev: float

    def __bool__(self):
        return False


def _feasible(a_prev: float, u: float, w: float) -> bool:
    # Inclusive boundary, with slack for rounding in a_prev
    return a_prev * u <= w * (1 + 1e-12)


def optimal_bid_sequence(m: int, u: float, w: float, check: bool = True):
    """``X*_{m,u}``: bid ``m`` equals ``u`` and every budget constraint is tight.

    Budget constraint ``i`` says the first ``i`` bids sum to at most
    ``w * x_{i-1}`` (with ``x_0 = 1``).  The returned sequence continues
    forever under the same tight rule.  Returns :class:`Infeasible` when
    ``a_{m-1} u > w``.
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if u < 1:
        raise ParameterError(f"u must be >= 1, got {u}")
    _check_w(w)
    u = float(u)
    a_prev = abcd(w, m - 1).a
    if not _feasible(a_prev, u, w):
        return Infeasible(m, u, float(w), a_prev)
    rp = roots(w)
    if w == 4:
        if m == 1:
            alpha = beta = u / 4
        else:
            den = 2.0**m * (m - 1)
            alpha = (2.0 ** (m - 1) * m * a_prev - 1) / den * u
            beta = (1 - 2.0 ** (m - 1) * a_prev) / den * u

        def rule(i: int) -> float:
            return u if i == m else (alpha + beta * i) * 2.0**i

    else:
        r1, r2 = rp.rho1, rp.rho2
        if m == 1:
            beta = u * (r2 - 1) / (r2 - r1)
            alpha = u - beta
        else:
            e1, e2 = r1 ** (m - 1), r2 ** (m - 1)
            alpha = (a_prev * e2 - 1) / (e2 - e1) * u
            beta = (a_prev * e1 - 1) / (e1 - e2) * u

        def rule(i: int) -> float:
            return u if i == m else alpha * r1 ** (i - 1) + beta * r2 ** (i - 1)

    seq = BidSequence(rule, None, f"X*(m={m},u={u:g},w={float(w):g})")
    seq.alpha, seq.beta, seq.m = alpha, beta, m
    if check:
        _check_optimal(seq, m, u, float(w), a_prev)
    return seq


def _close(x: float, y: float, tol: float = _REL_TOL) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _check_optimal(seq: BidSequence, m: int, u: float, w: float, a_prev: float) -> None:
    bids = seq.prefix(m + 3)
    if not _close(bids[0], a_prev * u):
        raise InvariantViolation("bidding.first_bid", f"x_1={bids[0]} != a_(m-1) u={a_prev * u}")
    for lo, hi in zip(bids, bids[1:]):
        if not hi > lo:
            raise InvariantViolation("bidding.increasing", f"{seq.name}: {lo} >= {hi}")
    prefix = 0.0
    for i, x in enumerate(bids, start=1):
        prefix += x
        if i >= 2 and not _close(prefix, w * bids[i - 2]):
            raise InvariantViolation(
                "bidding.tight", f"{seq.name}: constraint {i} has slack {w * bids[i - 2] - prefix}"
            )
    ratio = math.fsum(bids[:m]) / u
    if not _close(ratio, abcd(w, m).c):
        raise InvariantViolation("bidding.objective", f"{seq.name}: sum/u={ratio} != c_m={abcd(w, m).c}")


@dataclass(frozen=True)
class ParetoResult:
    m: int
    bids: BidSequence
    ratio: float


def pareto_strategy(u: float, w: float) -> ParetoResult:
    """``X*_u``: the feasible ``X*_{m,u}`` with the fewest bids up to ``u``.

    Its trusted ratio ``c_m`` stays below ``rho1`` and grows with ``m``, so
    the smallest feasible ``m`` is the best; it is found by binary search.
    """
    if u < 1:
        raise ParameterError(f"u must be >= 1, got {u}")
    _check_w(w)
    lo, hi = 1, max(1, math.ceil(math.log2(u))) + 2
    if not _feasible(abcd(w, hi - 1).a, u, w):
        raise InvariantViolation("bidding.m_star_bound", f"no feasible m <= {hi} for u={u}, w={w}")
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(abcd(w, mid - 1).a, u, w):
            hi = mid
        else:
            lo = mid + 1
    seq = optimal_bid_sequence(lo, u, w)
    ratio = abcd(w, lo).c
    if not ratio < roots(w).rho1 + 1e-9:
        raise InvariantViolation("bidding.r_star", f"c_{lo}={ratio} exceeds rho1")
    return ParetoResult(lo, seq, ratio)


def kbit_rho(k: int, w: float) -> float:
    """Growth factor of the ``k``-bit geometric strategy."""
    _check_w(w)
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    K = 2**k
    if w <= (1 + K) ** 2 / K:
        return roots(w).rho2
    return float(1 + K)


def kbit_bounds(k: int, w: float) -> CompetitivePair:
    """Guaranteed ``(r, w)`` of :func:`kbit_strategy`."""
    K = 2**k
    rho = kbit_rho(k, w)
    return CompetitivePair(rho ** (1 + 1 / K) / (rho - 1), rho * rho / (rho - 1))


def kbit_advice(k: int, w: float, u: float) -> int:
    """Offset symbol placing a bid within a factor ``rho^(1/K)`` above ``u``."""
    if u < 1:
        raise ParameterError(f"u must be >= 1, got {u}")
    K = 2**k
    rho = kbit_rho(k, w)
    n = math.ceil(K * math.log(u) / math.log(rho) - 1e-12)
    # Confirm against the bid as the sequence computes it; logs can round low.
    while rho ** (n // K + (n % K) / K) < u:
        n += 1
    return n % K


def _kbit_sequence(k: int, w: float, a: int) -> BidSequence:
    K = 2**k
    rho = kbit_rho(k, w)
    return BidSequence(lambda i: rho ** ((i - 1) + a / K), None, f"kbit(k={k},a={a})")


def kbit_strategy(k: int, w: float, u_advice: float) -> tuple[int, BidSequence]:
    """Advice symbol for ``u_advice`` and the geometric sequence it selects.

    Bids are ``rho^(j + a/K)`` for ``j = 0, 1, ...``.
    """
    a = kbit_advice(k, w, u_advice)
    return a, _kbit_sequence(k, w, a)


# Strategy families.  Each maps advice to a bid sequence and knows how to
# produce the correct advice and the space an adversary may pick from.


@dataclass
class DoublingStrategy:
    """Bids ``1, 2, 4, ...`` regardless of advice."""

    name: str = "doubling"

    def advice_for(self, u):
        return None

    def advice_space(self, u_grid):
        return [None]

    def sequence(self, advice) -> BidSequence:
        return BidSequence(lambda i: 2.0 ** (i - 1), None, "doubling")


@dataclass
class ParetoBidding:
    """``X*_u`` with the hidden value itself as advice."""

    w: float
    name: str = "pareto"
    _cache: dict = field(default_factory=dict, repr=False)

    def advice_for(self, u):
        return float(u)

    def advice_space(self, u_grid):
        return sorted(set(float(u) for u in u_grid))

    def sequence(self, advice) -> BidSequence:
        seq = self._cache.get(advice)
        if seq is None:
            seq = self._cache[advice] = pareto_strategy(advice, self.w).bids
        return seq


@dataclass
class KBitBidding:
    k: int
    w: float
    name: str = "kbit"

    def __post_init__(self):
        self._seqs = [_kbit_sequence(self.k, self.w, a) for a in range(2**self.k)]

    def advice_for(self, u):
        return kbit_advice(self.k, self.w, u)

    def advice_space(self, u_grid):
        return list(range(2**self.k))

    def sequence(self, advice) -> BidSequence:
        return self._seqs[advice]


def log_grid(u_max: float, points_per_octave: int = 8) -> list[float]:
    """Log-uniform hidden values in ``[1, u_max]``, both ends included."""
    if u_max < 1:
        raise ParameterError(f"u_max must be >= 1, got {u_max}")
    n = max(1, math.ceil(math.log2(u_max) * points_per_octave))
    return sorted(set(np.geomspace(1.0, u_max, n + 1).tolist()))


def _bids_with_sums(seq: BidSequence, u_max: float) -> tuple[np.ndarray, np.ndarray]:
    bids = np.array(seq.through(u_max))
    return bids, np.cumsum(bids)


def _costs(seq: BidSequence, us: np.ndarray) -> np.ndarray:
    bids, sums = _bids_with_sums(seq, float(us.max()))
    return sums[np.searchsorted(bids, us, side="left")]


def _adversarial_points(seq: BidSequence, u_max: float, delta: float) -> list[float]:
    pts = []
    for x in seq:
        if x > u_max:
            break
        pts.append(x * (1 + delta))
    return pts


def empirical_pair(strategy, u_grid: Iterable[float], delta: float = ADVERSARIAL_DELTA,
                   with_witness: bool = False):
    """Measured ``(r, w)`` of a strategy family over hidden values.

    Hidden values are the grid, 1, and every bid (of every sequence in the
    advice space) nudged up by ``delta``.  The trusted ratio uses the correct
    advice for each hidden value; the untrusted ratio takes the worst advice.
    """
    grid = sorted(set(float(u) for u in u_grid) | {1.0})
    u_max = grid[-1]
    advices = list(strategy.advice_space(grid))
    pts = set(grid)
    for adv in advices:
        pts.update(_adversarial_points(strategy.sequence(adv), u_max, delta))
    us = np.array(sorted(pts))

    r_hat, r_at = 0.0, None
    for u in us:
        seq = strategy.sequence(strategy.advice_for(float(u)))
        ratio = simulate(seq, float(u)) / u
        if ratio > r_hat:
            r_hat, r_at = float(ratio), float(u)

    w_hat, w_at = 0.0, None
    for adv in advices:
        ratios = _costs(strategy.sequence(adv), us) / us
        j = int(np.argmax(ratios))
        if ratios[j] > w_hat:
            w_hat, w_at = float(ratios[j]), (adv, float(us[j]))
    pair = CompetitivePair(r_hat, max(w_hat, r_hat))
    if with_witness:
        return pair, {"trusted_u": r_at, "untrusted_advice_u": w_at}
    return pair


def randomized_bounds(w: float) -> CompetitivePair:
    """Guaranteed expected ``(r, w)`` of the mixture of ``X*_u`` and ``rho1 X*_u``."""
    if w <= 4:
        raise ParameterError(f"the mixture needs w > 4, got {w}")
    r1 = roots(w).rho1
    return CompetitivePair(r1 * (1 + r1) / 2, (1 + r1) * w / (2 * r1))


def randomized_mixture_pair(w: float, u_grid: Iterable[float], delta: float = ADVERSARIAL_DELTA,
                            check: bool = True, with_witness: bool = False):
    """Expected ``(r, w)`` of the fair coin between ``X = X*_v`` and ``Y = rho1 X``.

    ``v`` is the advice.  Hidden values probed are just above the bids of
    ``X`` and ``Y`` for the untrusted ratio (the worst case for every
    advice), and the grid plus those points for the trusted ratio.  Hidden
    values below ``x_1`` are not probed.
    """
    bounds = randomized_bounds(w)
    r1 = roots(w).rho1
    grid = sorted(set(float(u) for u in u_grid))
    u_max = grid[-1]

    def pair_of(v):
        X = pareto_strategy(v, w).bids
        return X, X.scaled(r1)

    w_hat, w_at = 0.0, None
    trusted_pts = set(grid)
    for v in grid:
        X, Y = pair_of(v)
        pts = _adversarial_points(X, u_max, delta) + _adversarial_points(Y, u_max, delta)
        if not pts:
            continue
        trusted_pts.update(pts)
        us = np.array(pts)
        ratios = (_costs(X, us) + _costs(Y, us)) / (2 * us)
        j = int(np.argmax(ratios))
        if ratios[j] > w_hat:
            w_hat, w_at = float(ratios[j]), (v, float(us[j]))
    r_hat, r_at = 0.0, None
    for u in sorted(trusted_pts):
        X, Y = pair_of(u)
        ratio = (simulate(X, u) + simulate(Y, u)) / (2 * u)
        if ratio > r_hat:
            r_hat, r_at = ratio, u
    if check:
        if r_hat > bounds.r + 1e-3:
            raise InvariantViolation("bidding.randomized_trusted", f"{r_hat} > {bounds.r}")
        if w_hat > bounds.w + 1e-3:
            raise InvariantViolation("bidding.randomized_untrusted", f"{w_hat} > {bounds.w}")
    pair = CompetitivePair(r_hat, max(w_hat, r_hat))
    if with_witness:
        return pair, {"trusted_u": r_at, "untrusted_advice_u": w_at}
    return pair


def check_step_bound(seq: BidSequence, n: int, tol: float = _REL_TOL) -> Optional[int]:
    """First ``i <= n`` with ``x_i > (2 + 2/i) x_{i-1}`` (``x_0 = 1``), else ``None``."""
    prev = 1.0
    for i, x in enumerate(seq.prefix(n), start=1):
        if x > (2 + 2 / i) * prev * (1 + tol):
            return i
        prev = x
    return None


def check_prefix_sum_bound(seq: BidSequence, n: int, tol: float = _REL_TOL) -> Optional[int]:
    """First ``i <= n`` with ``x_1 + ... + x_i < (2 - 2/i) x_i``, else ``None``."""
    total = 0.0
    for i, x in enumerate(seq.prefix(n), start=1):
        total += x
        if total < (2 - 2 / i) * x * (1 - tol):
            return i
    return None


def _sup_ratio(seq: BidSequence, n: int, delta: float) -> float:
    """Worst ratio over hidden values in ``[1, x_n]``."""
    bids = seq.prefix(n + 1)
    worst = bids[0]  # hidden value 1
    total = bids[0]
    for j in range(1, len(bids)):
        total += bids[j]
        worst = max(worst, total / (bids[j - 1] * (1 + delta)))
    return worst


@dataclass(frozen=True)
class GameResult:
    witness: float
    rounds: list  # (hidden value, chosen strategy, ratio) per round
    bound: float


def adversary_game(strategies: Sequence[BidSequence], advice_fn: Callable[[float], int], i: int,
                   delta: float = ADVERSARIAL_DELTA, slack: float = 0.05, check: bool = True) -> GameResult:
    """Adversary rounds against ``K`` bid sequences and an advice function.

    The last sequence plays the distinguished role: round 0 hides a value
    just above its bid ``i-1``.  Each later round hides a value just above
    the first bid exceeding that value in the sequence chosen previously.
    The game ends when the advice picks the last sequence or fails to pick a
    higher index.  The witness is the worst trusted ratio seen.
    """
    K = len(strategies)
    if K < 1:
        raise ParameterError("need at least one strategy")
    if i < 2:
        raise ParameterError(f"index i must be >= 2, got {i}")
    horizon = i + 40
    for j, seq in enumerate(strategies):
        sup = _sup_ratio(seq, horizon, delta)
        if sup > 4 + 1e-6:
            raise ParameterError(f"strategy {j} is not 4-competitive (ratio {sup})")
    top = strategies[-1]
    base = top.bid(i - 1)

    def first_above(seq: BidSequence, x: float) -> float:
        n = 1
        while seq.bid(n) <= x:
            n += 1
        return seq.bid(n)

    rounds = []
    u = base * (1 + delta)
    prev = -1
    for _ in range(K + 1):
        j = int(advice_fn(u))
        if not 0 <= j < K:
            raise ParameterError(f"advice function returned {j}, outside [0, {K})")
        ratio = simulate(strategies[j], u) / u
        rounds.append((u, j, ratio))
        if j == K - 1 or j <= prev:
            break
        prev = j
        u = first_above(strategies[j], base) * (1 + delta)
    witness = max(r for _, _, r in rounds)
    bound = 2 + 1 / (3 * K)
    if check and witness < bound - slack:
        raise InvariantViolation("bidding.lower_bound", f"witness {witness} < {bound} - {slack} with K={K}")
    return GameResult(witness, rounds, bound)
