"""List update with free and paid exchanges.

Accessing the item at position ``i`` (1-indexed) costs ``i``.  Right after an
access the item may move forward for free.  Any adjacent swap otherwise costs
1.  Items are the integers ``1..m``.

Algorithms: Move-To-Front, Timestamp, the bit-based MTFE/MTFO pair, and Toggle,
which alternates between trusting phases that follow the advised MTF2 variant
and ignoring phases that fall back on Move-To-Front.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import CompetitivePair, InvariantViolation, ParameterError, as_fraction, make_rng

__all__ = [
    "ADVICE",
    "CostLedger",
    "FAMILIES",
    "ListState",
    "OPT_DP_LIMIT",
    "PhaseRecord",
    "ToggleConfig",
    "generate_sequence",
    "kendall_tau",
    "opt_dp",
    "reconfigure",
    "run_algorithm",
    "serve_mtf",
    "serve_mtf2",
    "serve_timestamp",
    "toggle_cost_bound",
    "toggle_ratio_bounds",
    "toggle_serve",
    "toggle_tradeoff",
    "trusted_advice",
    "worst_advice",
]

ADVICE = ("ts", "mtfe", "mtfo")
OPT_DP_LIMIT = 5


@dataclass
class ListState:
    order: list
    bits: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict)  # item -> sorted access times
    time: int = 0

    @classmethod
    def initial(cls, m: int, bit: int = 0, order: Optional[Sequence[int]] = None) -> "ListState":
        if m < 1:
            raise ParameterError(f"list length must be >= 1, got {m}")
        order = list(range(1, m + 1)) if order is None else list(order)
        if sorted(order) != list(range(1, m + 1)):
            raise ParameterError(f"initial order {order} is not a permutation of 1..{m}")
        return cls(order, {x: bit for x in order}, {x: [] for x in order}, 0)

    @property
    def m(self) -> int:
        return len(self.order)

    def position(self, x: int) -> int:
        try:
            return self.order.index(x) + 1
        except ValueError:
            raise ParameterError(f"item {x} is not in the list") from None

    def copy(self) -> "ListState":
        return ListState(list(self.order), dict(self.bits), {k: list(v) for k, v in self.history.items()}, self.time)

    def _record(self, x: int) -> None:
        self.history[x].append(self.time)
        self.time += 1

    def _move_forward(self, x: int, new_pos: int) -> None:
        """Free exchange: move ``x`` to 1-indexed ``new_pos`` ahead of it."""
        old = self.order.index(x)
        if new_pos - 1 > old:
            raise InvariantViolation("list.free_move", "free exchanges only move the accessed item forward")
        del self.order[old]
        self.order.insert(new_pos - 1, x)

    def check_permutation(self) -> None:
        if sorted(self.order) != list(range(1, self.m + 1)):
            raise InvariantViolation("list.permutation", f"order {self.order} is not a permutation")


def serve_mtf(state: ListState, request: int) -> tuple[ListState, int]:
    cost = state.position(request)
    state._record(request)
    state._move_forward(request, 1)
    return state, cost


def serve_mtf2(state: ListState, request: int) -> tuple[ListState, int]:
    """Flip the item's bit; move it to the front if the bit is now 0.

    Start with all bits 0 for MTFE and all bits 1 for MTFO.
    """
    cost = state.position(request)
    state._record(request)
    state.bits[request] ^= 1
    if state.bits[request] == 0:
        state._move_forward(request, 1)
    return state, cost


def serve_timestamp(state: ListState, request: int) -> tuple[ListState, int]:
    """Insert the item before the frontmost item accessed at most once since
    the item's previous access.  An item's first access does not move it."""
    x = request
    cost = state.position(x)
    hist = state.history[x]
    if hist:
        prev = hist[-1]
        for y in state.order[: cost - 1]:
            since = len(state.history[y]) - bisect.bisect_right(state.history[y], prev)
            if since <= 1:
                target = state.order.index(y) + 1
                state._record(x)
                state._move_forward(x, target)
                return state, cost
    state._record(x)
    return state, cost


def kendall_tau(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of item pairs ordered differently in ``a`` and ``b``."""
    pos = {x: i for i, x in enumerate(b)}
    seq = [pos[x] for x in a]
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def reconfigure(state: ListState, target: Sequence[int]) -> int:
    """Reach ``target`` by paid adjacent swaps; returns the swaps made."""
    rank = {x: i for i, x in enumerate(target)}
    order = state.order
    swaps = 0
    # Bubble sort performs exactly the inversions, one adjacent swap each.
    for end in range(len(order) - 1, 0, -1):
        for i in range(end):
            if rank[order[i]] > rank[order[i + 1]]:
                order[i], order[i + 1] = order[i + 1], order[i]
                swaps += 1
    if order != list(target):
        raise InvariantViolation("list.reconfigure", f"reached {order}, wanted {list(target)}")
    return swaps


_SERVERS = {"mtf": serve_mtf, "ts": serve_timestamp, "mtfe": serve_mtf2, "mtfo": serve_mtf2}


def run_algorithm(name: str, sequence: Sequence[int], m: int, initial_order=None) -> int:
    """Total cost of a classical algorithm (``mtf``, ``ts``, ``mtfe``, ``mtfo``)."""
    if name not in _SERVERS:
        raise ParameterError(f"unknown list update algorithm {name!r}")
    state = ListState.initial(m, 1 if name == "mtfo" else 0, initial_order)
    serve = _SERVERS[name]
    total = 0
    for r in sequence:
        _, c = serve(state, r)
        total += c
    return total


@dataclass(frozen=True)
class ToggleConfig:
    beta: Fraction
    advice: str
    m: int

    def __post_init__(self):
        beta = as_fraction(self.beta)
        object.__setattr__(self, "beta", beta)
        if not 0 <= beta <= Fraction(1, 2):
            raise ParameterError(f"beta must lie in [0, 1/2], got {beta}")
        if self.advice not in ADVICE:
            raise ParameterError(f"advice must be one of {ADVICE}, got {self.advice!r}")
        if self.m < 2:
            raise ParameterError(f"m must be >= 2, got {self.m}")


@dataclass
class PhaseRecord:
    kind: str  # "trusting", "ignoring" or "timestamp"
    start: int
    end: int = 0  # exclusive
    access_cost: int = 0
    paid_cost: int = 0
    complete: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "start": self.start,
            "end": self.end,
            "access_cost": self.access_cost,
            "paid_cost": self.paid_cost,
            "complete": self.complete,
        }


@dataclass
class CostLedger:
    access_cost: int = 0
    paid_exchange_cost: int = 0
    phases: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.access_cost + self.paid_exchange_cost

    @property
    def trusting_phases(self) -> int:
        return sum(p.kind == "trusting" for p in self.phases)

    def check_totals(self) -> None:
        a = sum(p.access_cost for p in self.phases)
        p = sum(p.paid_cost for p in self.phases)
        if (a, p) != (self.access_cost, self.paid_exchange_cost):
            raise InvariantViolation("list.ledger", "phase entries do not add up to the totals")


def toggle_cost_bound(k: int, m: int, beta) -> Fraction:
    """Upper bound on Toggle's total cost with ``k`` trusting phases."""
    return k * m**3 * (1 + as_fraction(beta) + Fraction(3, m))


def _check_phase(ph: PhaseRecord, m: int, beta: Fraction) -> None:
    m3 = m**3
    if ph.paid_cost >= m * m:
        raise InvariantViolation("list.paid_cost", f"paid {ph.paid_cost} >= m^2 at request {ph.start}")
    if not ph.complete:
        return
    if ph.kind == "trusting" and not m3 <= ph.access_cost < m3 + m:
        raise InvariantViolation("list.trusting_phase", f"access cost {ph.access_cost} outside [{m3}, {m3 + m})")
    if ph.kind == "ignoring" and not beta * m3 < ph.access_cost <= beta * m3 + m:
        raise InvariantViolation(
            "list.ignoring_phase", f"access cost {ph.access_cost} outside ({beta * m3}, {beta * m3 + m}]"
        )


def toggle_serve(sequence: Sequence[int], config: ToggleConfig, initial_order=None,
                 check: bool = True) -> tuple[CostLedger, ListState]:
    """Serve ``sequence`` with Toggle and record every phase.

    With ``check`` the phase cost ranges, the paid-exchange bound, the
    agreement with the shadow MTF2 run during trusting phases, and the total
    cost bound are all verified, raising :class:`InvariantViolation`.
    """
    m = config.m
    beta = config.beta
    ledger = CostLedger()
    if config.advice == "ts":
        state = ListState.initial(m, 0, initial_order)
        ph = PhaseRecord("timestamp", 0)
        for r in sequence:
            _, c = serve_timestamp(state, r)
            ph.access_cost += c
        ph.end = len(sequence)
        ledger.access_cost = ph.access_cost
        ledger.phases.append(ph)
        return ledger, state

    bit = 1 if config.advice == "mtfo" else 0
    state = ListState.initial(m, bit, initial_order)
    shadow = ListState.initial(m, bit, initial_order)
    m3 = m**3
    trusting = True
    ph: Optional[PhaseRecord] = None
    for t, r in enumerate(sequence):
        if ph is None:
            ph = PhaseRecord("trusting" if trusting else "ignoring", t)
            if trusting:
                ph.paid_cost = reconfigure(state, shadow.order)
                state.bits = dict(shadow.bits)
        if trusting:
            _, c = serve_mtf2(state, r)
        else:
            _, c = serve_mtf(state, r)
        serve_mtf2(shadow, r)
        ph.access_cost += c
        if check:
            if trusting and (state.order != shadow.order or state.bits != shadow.bits):
                raise InvariantViolation("list.shadow", f"trusting phase diverged from MTF2 at request {t}")
            state.check_permutation()
        done = ph.access_cost >= m3 if trusting else ph.access_cost > beta * m3
        if done:
            ph.end, ph.complete = t + 1, True
            ledger.phases.append(ph)
            ph = None
            # With beta = 0 the ignoring phase is skipped.
            trusting = (not trusting) or beta == 0
    if ph is not None:
        ph.end = len(sequence)
        ledger.phases.append(ph)
    ledger.access_cost = sum(p.access_cost for p in ledger.phases)
    ledger.paid_exchange_cost = sum(p.paid_cost for p in ledger.phases)
    if check:
        ledger.check_totals()
        for p in ledger.phases:
            _check_phase(p, m, beta)
        bound = toggle_cost_bound(ledger.trusting_phases, m, beta)
        if ledger.total > bound:
            raise InvariantViolation("list.total_cost", f"total {ledger.total} > {bound}")
    return ledger, state


def _advice_costs(sequence: Sequence[int], m: int, initial_order=None) -> dict:
    return {a: run_algorithm(a, sequence, m, initial_order) for a in ADVICE}


def trusted_advice(sequence: Sequence[int], m: int, initial_order=None) -> str:
    """The cheapest of Timestamp, MTFE and MTFO on this sequence (ties in that order)."""
    costs = _advice_costs(sequence, m, initial_order)
    return min(ADVICE, key=lambda a: (costs[a], ADVICE.index(a)))


def worst_advice(sequence: Sequence[int], config_beta, m: int, initial_order=None) -> tuple[str, int]:
    """Advice maximising Toggle's cost, with that cost."""
    worst = None
    for a in ADVICE:
        ledger, _ = toggle_serve(sequence, ToggleConfig(config_beta, a, m), initial_order)
        if worst is None or ledger.total > worst[1]:
            worst = (a, ledger.total)
    return worst


def toggle_ratio_bounds(beta) -> CompetitivePair:
    b = as_fraction(beta)
    if not 0 <= b <= Fraction(1, 2):
        raise ParameterError(f"beta must lie in [0, 1/2], got {beta}")
    return CompetitivePair(Fraction(5, 3) + 5 * b / (6 + 3 * b), 2 + 2 / (4 + 5 * b))


def toggle_tradeoff(r) -> Fraction:
    """Untrusted ratio as a function of the trusted ratio along Toggle's curve."""
    r = as_fraction(r)
    return 2 + (10 - 3 * r) / (9 * r - 5)


# Exact offline optimum by dynamic programming over the m! list orders.

_DP_CACHE: dict = {}


def _dp_tables(m: int):
    if m in _DP_CACHE:
        return _DP_CACHE[m]
    perms = list(itertools.permutations(range(1, m + 1)))
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    dist = np.array([[kendall_tau(a, b) for b in perms] for a in perms], dtype=np.int64)
    pos = np.array([[p.index(x) + 1 for p in perms] for x in range(1, m + 1)], dtype=np.int64)
    big = np.iinfo(np.int64).max // 4
    free = np.full((m, n, n), big, dtype=np.int64)
    for xi in range(m):
        x = xi + 1
        for i, p in enumerate(perms):
            at = p.index(x)
            for new in range(at + 1):
                q = list(p)
                del q[at]
                q.insert(new, x)
                free[xi, i, index[tuple(q)]] = 0
    _DP_CACHE[m] = (perms, index, dist, pos, free)
    return _DP_CACHE[m]


def opt_dp(sequence: Sequence[int], initial_order: Optional[Sequence[int]] = None, m: Optional[int] = None) -> int:
    """Minimum total cost over all offline strategies.

    Before each access the list may be rearranged by paid adjacent swaps,
    and after it the accessed item may move forward for free.
    """
    if m is None:
        m = len(initial_order) if initial_order is not None else max(sequence, default=1)
    if m > OPT_DP_LIMIT:
        raise ParameterError(f"exact list update OPT is limited to m <= {OPT_DP_LIMIT}, got {m}")
    if len(sequence) > 100_000:
        raise ParameterError("exact list update OPT is limited to 100000 requests")
    perms, index, dist, pos, free = _dp_tables(m)
    init = tuple(range(1, m + 1)) if initial_order is None else tuple(initial_order)
    if init not in index:
        raise ParameterError(f"initial order {init} is not a permutation of 1..{m}")
    cost = dist[index[init]].copy()  # after optional paid swaps before the first access
    for r in sequence:
        if not 1 <= r <= m:
            raise ParameterError(f"request {r} outside 1..{m}")
        served = cost + pos[r - 1]
        moved = (served[:, None] + free[r - 1]).min(axis=0)
        cost = (moved[:, None] + dist).min(axis=0)
    return int(cost.min())


FAMILIES = ("uniform", "zipf", "last-item")


def generate_sequence(family: str, m: int, n: int, seed: int) -> list[int]:
    """Seeded request sequences over items ``1..m``.

    ``last-item`` always requests the last item of a Move-To-Front list
    whose starting order is drawn from the seed.
    """
    if m < 1 or n < 0:
        raise ParameterError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    rng = make_rng(seed)
    if family == "uniform":
        return (rng.integers(1, m + 1, size=n)).tolist()
    if family == "zipf":
        w = 1.0 / np.arange(1, m + 1)
        labels = rng.permutation(m) + 1
        return labels[rng.choice(m, size=n, p=w / w.sum())].tolist()
    if family == "last-item":
        order = (rng.permutation(m) + 1).tolist()
        out = []
        for _ in range(n):
            x = order.pop()
            out.append(x)
            order.insert(0, x)
        return out
    raise ParameterError(f"unknown family {family!r}; expected one of {FAMILIES}")
