"""Brute-force reference solvers.

Each one reaches its answer by a different route than the production code
it checks: Gaussian elimination instead of closed forms, set-partition
enumeration instead of branch and bound, shortest paths instead of a
permutation DP, and day-by-day simulation instead of buy-day arithmetic.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Optional, Sequence

from .core import CompetitivePair, ParameterError, as_fraction

__all__ = [
    "BIN_ORACLE_LIMIT",
    "LIST_ORACLE_LIMIT",
    "TIGHT_LIMIT",
    "brute_ski_cost",
    "brute_ski_opt",
    "brute_ski_pair",
    "exhaustive_bin_opt",
    "exhaustive_list_opt",
    "solve_tight",
]

TIGHT_LIMIT = 8
BIN_ORACLE_LIMIT = 10
LIST_ORACLE_LIMIT = (4, 12)  # (m, n)
_CAP_EPS = 1e-9


def solve_tight(m: int, u, w) -> list:
    """Bids ``x_1..x_m`` with ``x_m = u`` and every budget constraint tight.

    Solves the ``m x m`` linear system by Gaussian elimination in exact
    rationals.
    """
    if not 1 <= m <= TIGHT_LIMIT:
        raise ParameterError(f"tight system solver handles 1 <= m <= {TIGHT_LIMIT}, got {m}")
    u, w = as_fraction(u), as_fraction(w)
    if w < 4:
        raise ParameterError(f"w must be >= 4, got {w}")
    rows = []
    for i in range(2, m + 1):
        # x_1 + ... + x_i - w x_{i-1} = 0
        row = [Fraction(1) if j < i else Fraction(0) for j in range(m)]
        row[i - 2] -= w
        rows.append(row + [Fraction(0)])
    rows.append([Fraction(0)] * (m - 1) + [Fraction(1), u])
    for col in range(m):
        piv = next((r for r in range(col, m) if rows[r][col] != 0), None)
        assert piv is not None, "singular tight system"
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        rows[col] = [v / p for v in rows[col]]
        for r in range(m):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][m] for i in range(m)]


def exhaustive_bin_opt(items: Sequence) -> int:
    """Fewest bins, by enumerating every set partition that fits."""
    n = len(items)
    if n > BIN_ORACLE_LIMIT:
        raise ParameterError(f"exhaustive bin oracle handles n <= {BIN_ORACLE_LIMIT}, got {n}")
    sizes = [float(s) for s in items]
    best = n

    def extend(i: int, loads: list) -> None:
        nonlocal best
        if i == n:
            best = min(best, len(loads))
            return
        for j in range(len(loads)):
            if loads[j] + sizes[i] <= 1 + _CAP_EPS:
                loads[j] += sizes[i]
                extend(i + 1, loads)
                loads[j] -= sizes[i]
        loads.append(sizes[i])
        extend(i + 1, loads)
        loads.pop()

    if n:
        extend(0, [])
    return best if n else 0


def _neighbors_swap(p: tuple):
    for i in range(len(p) - 1):
        q = list(p)
        q[i], q[i + 1] = q[i + 1], q[i]
        yield tuple(q)


def _after_access(p: tuple, x: int):
    at = p.index(x)
    for new in range(at + 1):
        q = list(p)
        del q[at]
        q.insert(new, x)
        yield tuple(q)


def exhaustive_list_opt(sequence: Sequence[int], initial_order: Optional[Sequence[int]] = None) -> int:
    """Offline list update optimum as a shortest path.

    Nodes are (requests served, list order).  Edges are single paid adjacent
    swaps of cost 1 and serving the next request (cost = its position) with
    an optional free forward move of that item.
    """
    if initial_order is None:
        m = max(sequence, default=1)
        initial_order = range(1, m + 1)
    start = tuple(initial_order)
    m, n = len(start), len(sequence)
    if m > LIST_ORACLE_LIMIT[0] or n > LIST_ORACLE_LIMIT[1]:
        raise ParameterError(f"exhaustive list oracle handles m <= {LIST_ORACLE_LIMIT[0]}, n <= {LIST_ORACLE_LIMIT[1]}")
    if n == 0:
        return 0
    dist = {(0, start): 0}
    heap = [(0, 0, start)]
    while heap:
        d, t, p = heapq.heappop(heap)
        if d > dist.get((t, p), d):
            continue
        if t == n:
            return d
        moves = [((t, q), 1) for q in _neighbors_swap(p)]
        x = sequence[t]
        cost = p.index(x) + 1
        moves += [((t + 1, q), cost) for q in _after_access(p, x)]
        for (t2, q), c in moves:
            nd = d + c
            if nd < dist.get((t2, q), nd + 1):
                dist[(t2, q)] = nd
                heapq.heappush(heap, (nd, t2, q))
    raise AssertionError("unreachable: every request can be served")


def brute_ski_cost(buy_day: Optional[int], B: int, D: int) -> int:
    """Walk the season one day at a time."""
    total = 0
    for day in range(1, D + 1):
        if buy_day is not None and day == buy_day:
            return total + B
        total += 1
    return total


def brute_ski_opt(B: int, D: int) -> int:
    options = [brute_ski_cost(day, B, D) for day in range(1, D + 1)]
    return min(options + [brute_ski_cost(None, B, D)])


def brute_ski_pair(policy, B: int, cap: Optional[int] = None) -> CompetitivePair:
    """Competitive pair of a one-bit policy by day-by-day simulation."""
    cap = 3 * B if cap is None else cap
    r = w = Fraction(0)
    for D in range(1, cap + 1):
        opt = brute_ski_opt(B, D)
        truth = 1 if D < B else 0
        for bit in (0, 1):
            ratio = Fraction(brute_ski_cost(policy.buy_day(bit), B, D), opt)
            w = max(w, ratio)
            if bit == truth:
                r = max(r, ratio)
    return CompetitivePair(r, w)
