"""Online bin packing with advice on the critical-bin ratio.

Items are split by size into four classes.  Reserve-Critical is told how many
critical items will arrive and reserves space for them.  Robust-Reserve-
Critical (RRC) instead receives a k-bit fraction ``gamma`` and keeps the share
of critical bins among critical and tiny bins near ``beta = min(alpha,
gamma)``, where ``alpha`` caps how far the advice is trusted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import ParameterError, as_fraction, make_rng

__all__ = [
    "AuditReport",
    "Bin",
    "BinLabel",
    "CheckResult",
    "EPS",
    "FAMILIES",
    "ItemClass",
    "OPT_LIMIT",
    "OpeningEvent",
    "Packing",
    "RrcConfig",
    "adversarial_sequences",
    "audit_packing",
    "bin_weight",
    "classify",
    "encode_gamma",
    "first_fit",
    "opt_bins",
    "opt_packing",
    "pure_advice_term",
    "ratio_bound",
    "reserve_critical",
    "rrc_pack",
    "tiny_weight",
    "trusted_ratio_bound",
    "untrusted_ratio_bound",
    "weight_density_bound",
]

# Capacity slack for floating-point sums.
EPS = 1e-9
OPT_LIMIT = 14
FAMILY_EPS = 1e-4

_THIRD = Fraction(1, 3)
_HALF = Fraction(1, 2)
_TWO_THIRDS = Fraction(2, 3)


class ItemClass(enum.Enum):
    TINY = "tiny"
    SMALL = "small"
    CRITICAL = "critical"
    LARGE = "large"


class BinLabel(enum.Enum):
    TINY = "tiny"
    SMALL = "small"
    CRITICAL = "critical"
    LARGE = "large"
    GENERIC = "generic"


def classify(size) -> ItemClass:
    if not 0 < size <= 1:
        raise ParameterError(f"item size must lie in (0, 1], got {size}")
    if isinstance(size, float):
        # No double lies strictly between 1/3 and its rounded value, same for 2/3.
        return _classify_float(size)
    if size <= _THIRD:
        return ItemClass.TINY
    if size <= _HALF:
        return ItemClass.SMALL
    if size <= _TWO_THIRDS:
        return ItemClass.CRITICAL
    return ItemClass.LARGE


def _classify_float(size: float) -> ItemClass:
    if size <= 1 / 3:
        return ItemClass.TINY
    if size <= 0.5:
        return ItemClass.SMALL
    if size <= 2 / 3:
        return ItemClass.CRITICAL
    return ItemClass.LARGE


@dataclass
class Bin:
    label: BinLabel
    items: list = field(default_factory=list)  # (item index, size)
    tiny_level: float = 0.0
    has_critical: bool = False
    level: float = 0.0

    @property
    def sizes(self) -> list:
        return [s for _, s in self.items]

    def add(self, index: int, size, cls: ItemClass) -> None:
        self.items.append((index, size))
        self.level += float(size)
        if cls is ItemClass.TINY:
            self.tiny_level += float(size)
        elif cls is ItemClass.CRITICAL:
            self.has_critical = True

    def free(self) -> float:
        return 1.0 - self.level


@dataclass(frozen=True)
class OpeningEvent:
    """A bin opened by a tiny item, with the counts seen just before."""

    bin_index: int
    item_index: int
    c_prime: int
    t_prime: int
    label: BinLabel


@dataclass
class Packing:
    bins: list
    n_items: int
    assignment: list = field(default_factory=list)  # item index -> bin index
    events: list = field(default_factory=list)
    algorithm: str = ""

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def counts(self) -> dict:
        out = {lab: 0 for lab in BinLabel}
        for b in self.bins:
            out[b.label] += 1
        return out

    def __post_init__(self):
        self._by_label = {lab: [] for lab in BinLabel}
        for j, b in enumerate(self.bins):
            self._by_label[b.label].append(j)

    def _open(self, label: BinLabel) -> int:
        self.bins.append(Bin(label))
        self._by_label[label].append(len(self.bins) - 1)
        return len(self.bins) - 1

    def _place(self, bin_index: int, item_index: int, size, cls: ItemClass) -> None:
        self.bins[bin_index].add(item_index, size, cls)
        self.assignment[item_index] = bin_index

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "bins": [{"label": b.label.value, "items": [i for i, _ in b.items]} for b in self.bins],
        }


def _validate(items: Sequence) -> list[ItemClass]:
    return [classify(s) for s in items]


def first_fit(items: Sequence) -> Packing:
    _validate(items)
    pk = Packing([], len(items), [None] * len(items), algorithm="ff")
    for i, s in enumerate(items):
        for j, b in enumerate(pk.bins):
            if b.level + float(s) <= 1 + EPS:
                pk._place(j, i, s, classify(s))
                break
        else:
            pk._place(pk._open(BinLabel.GENERIC), i, s, classify(s))
    return pk


def _place_large_small(pk: Packing, i: int, s, cls: ItemClass) -> bool:
    if cls is ItemClass.LARGE:
        pk._place(pk._open(BinLabel.LARGE), i, s, cls)
        return True
    if cls is ItemClass.SMALL:
        small = pk._by_label[BinLabel.SMALL]
        if small and len(pk.bins[small[-1]].items) == 1:
            pk._place(small[-1], i, s, cls)
            return True
        pk._place(pk._open(BinLabel.SMALL), i, s, cls)
        return True
    return False


def _place_critical(pk: Packing, i: int, s) -> None:
    for j in pk._by_label[BinLabel.CRITICAL]:
        if not pk.bins[j].has_critical:
            pk._place(j, i, s, ItemClass.CRITICAL)
            return
    pk._place(pk._open(BinLabel.CRITICAL), i, s, ItemClass.CRITICAL)


def _try_place_tiny(pk: Packing, i: int, s) -> bool:
    x = float(s)
    bins = pk.bins
    for j in pk._by_label[BinLabel.CRITICAL]:
        if bins[j].tiny_level + x <= 1 / 3 + EPS:
            pk._place(j, i, s, ItemClass.TINY)
            return True
    for j in pk._by_label[BinLabel.TINY]:
        if bins[j].level + x <= 1 + EPS:
            pk._place(j, i, s, ItemClass.TINY)
            return True
    return False


def reserve_critical(items: Sequence, c: int) -> Packing:
    """Reserve-Critical told that ``c`` critical items will arrive."""
    if c < 0:
        raise ParameterError(f"critical count advice must be >= 0, got {c}")
    classes = _validate(items)
    pk = Packing([], len(items), [None] * len(items), algorithm="rc")
    for _ in range(c):
        pk._open(BinLabel.CRITICAL)
    for i, (s, cls) in enumerate(zip(items, classes)):
        if _place_large_small(pk, i, s, cls):
            continue
        if cls is ItemClass.CRITICAL:
            _place_critical(pk, i, s)
        elif not _try_place_tiny(pk, i, s):
            pk._place(pk._open(BinLabel.TINY), i, s, cls)
    return pk


def encode_gamma(items: Sequence, k: int) -> Fraction:
    """Trusted k-bit advice: a multiple of ``1/2^k`` just below ``c/(c+t)``.

    ``c`` counts critical items and ``t`` the tiny bins Reserve-Critical
    opens when told ``c``.  When the ratio is itself a positive multiple of
    ``1/2^k`` the next multiple down is used, so ``gamma`` stays strictly
    below a positive ratio.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    classes = _validate(items)
    c = sum(cls is ItemClass.CRITICAL for cls in classes)
    t = reserve_critical(items, c).counts()[BinLabel.TINY]
    if c + t == 0:
        return Fraction(0)
    ratio = Fraction(c, c + t)
    scaled = ratio * 2**k
    if scaled.denominator == 1 and scaled > 0:
        return (scaled - 1) / 2**k
    return Fraction(math.floor(scaled), 2**k)


def critical_ratio(items: Sequence) -> Fraction:
    classes = _validate(items)
    c = sum(cls is ItemClass.CRITICAL for cls in classes)
    t = reserve_critical(items, c).counts()[BinLabel.TINY]
    return Fraction(c, c + t) if c + t else Fraction(0)


@dataclass(frozen=True)
class RrcConfig:
    alpha: Fraction
    gamma: Fraction
    k: int

    def __post_init__(self):
        alpha = as_fraction(self.alpha)
        gamma = as_fraction(self.gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)
        if not 0 <= alpha <= 1:
            raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        scaled = gamma * 2**self.k
        if scaled.denominator != 1 or not 0 <= gamma <= 1 - Fraction(1, 2**self.k):
            raise ParameterError(f"gamma={gamma} is not a {self.k}-bit multiple of 1/2^k below 1")

    @property
    def beta(self) -> Fraction:
        return min(self.alpha, self.gamma)


def _beta_rule(c_prime: int, t_prime: int, beta: Fraction) -> BinLabel:
    if c_prime + t_prime > 0 and c_prime < beta * (c_prime + t_prime):
        return BinLabel.CRITICAL
    return BinLabel.TINY


def rrc_pack(items: Sequence, config: RrcConfig) -> Packing:
    """Robust-Reserve-Critical with ``beta = min(alpha, gamma)``."""
    classes = _validate(items)
    beta = config.beta
    pk = Packing([], len(items), [None] * len(items), algorithm="rrc")
    n_crit = n_tiny = 0
    for i, (s, cls) in enumerate(zip(items, classes)):
        if _place_large_small(pk, i, s, cls):
            continue
        if cls is ItemClass.CRITICAL:
            before = len(pk.bins)
            _place_critical(pk, i, s)
            n_crit += len(pk.bins) - before
            continue
        if _try_place_tiny(pk, i, s):
            continue
        label = _beta_rule(n_crit, n_tiny, beta)
        j = pk._open(label)
        pk.events.append(OpeningEvent(j, i, n_crit, n_tiny, label))
        pk._place(j, i, s, cls)
        if label is BinLabel.CRITICAL:
            n_crit += 1
        else:
            n_tiny += 1
    return pk


def _tiny_coef(beta) -> Fraction:
    beta = as_fraction(beta)
    return (6 - 6 * beta) / (4 - 3 * beta)


def tiny_weight(size, beta) -> Fraction | float:
    coef = _tiny_coef(beta)
    if isinstance(size, (int, Fraction)):
        return coef * size
    return float(coef) * size


def bin_weight(contents: Sequence, beta):
    """Total weight: 1 per large or critical item, 1/2 per small item,
    and a size-proportional weight for tiny items.

    Exact when every size is rational, float otherwise.
    """
    whole = halves = 0
    tiny = []
    for s in contents:
        cls = classify(s)
        if cls is ItemClass.TINY:
            tiny.append(s)
        elif cls is ItemClass.SMALL:
            halves += 1
        else:
            whole += 1
    coef = _tiny_coef(beta)
    if all(isinstance(x, (int, Fraction)) for x in tiny):
        return whole + Fraction(halves, 2) + coef * sum(tiny, Fraction(0))
    return whole + halves / 2 + float(coef) * math.fsum(float(x) for x in tiny)


def weight_density_bound(beta) -> Fraction:
    beta = as_fraction(beta)
    return (14 - 11 * beta) / (8 - 6 * beta)


def pure_advice_term(k: int) -> Fraction | float:
    """``15 / 2^(k/2 + 1)``: the trusted ratio's excess over 1.5 when ``gamma <= alpha``.

    Taken as given from prior analysis of Reserve-Critical with ``k`` bits;
    recorded alongside results, not verified here.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k % 2 == 0:
        return Fraction(15, 2 ** (k // 2 + 1))
    return 15 / 2 ** (k / 2 + 1)


def trusted_ratio_bound(alpha, k: Optional[int] = None) -> Fraction | float:
    """Trusted ratio guarantee; without ``k`` only the all-critical-bins-filled term."""
    a = as_fraction(alpha)
    filled = Fraction(3, 2) + (1 - a) / (4 - 3 * a)
    if k is None:
        return filled
    return max(filled, Fraction(3, 2) + pure_advice_term(k))


def untrusted_ratio_bound(alpha) -> Fraction:
    a = as_fraction(alpha)
    return Fraction(3, 2) + max(Fraction(1, 4), 9 * a / (8 - 6 * a))


def ratio_bound(beta) -> Fraction:
    """Multiplier of OPT bounding RRC whichever way its critical bins fill."""
    b = as_fraction(beta)
    return Fraction(3, 2) + max((1 - b) / (4 - 3 * b), 9 * b / (8 - 6 * b))


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    margin: Optional[float] = None
    detail: str = ""


@dataclass
class AuditReport:
    checks: dict = field(default_factory=dict)
    all_critical_filled: bool = True

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "all_critical_filled": self.all_critical_filled,
            "checks": {
                k: {"passed": v.passed, "margin": v.margin, "detail": v.detail} for k, v in self.checks.items()
            },
        }


def _structure_problems(packing: Packing, items: Sequence) -> list[str]:
    problems = []
    seen = [0] * len(items)
    for j, b in enumerate(packing.bins):
        for i, s in b.items:
            seen[i] += 1
            if s != items[i]:
                problems.append(f"bin {j} holds size {s} for item {i} of size {items[i]}")
        if b.level > 1 + EPS:
            problems.append(f"bin {j} overfull at {b.level}")
        classes = [classify(s) for s in b.sizes]
        count = {c: classes.count(c) for c in ItemClass}
        lab = b.label
        if lab is BinLabel.CRITICAL:
            if count[ItemClass.CRITICAL] > 1 or count[ItemClass.SMALL] or count[ItemClass.LARGE]:
                problems.append(f"critical bin {j} holds {classes}")
            if b.tiny_level > 1 / 3 + EPS:
                problems.append(f"critical bin {j} tiny level {b.tiny_level} > 1/3")
        elif lab is BinLabel.LARGE:
            if count[ItemClass.LARGE] != 1 or len(classes) != 1:
                problems.append(f"large bin {j} holds {classes}")
        elif lab is BinLabel.SMALL:
            if count[ItemClass.SMALL] != len(classes) or not 1 <= len(classes) <= 2:
                problems.append(f"small bin {j} holds {classes}")
        elif lab is BinLabel.TINY:
            if count[ItemClass.TINY] != len(classes):
                problems.append(f"tiny bin {j} holds {classes}")
    for i, n in enumerate(seen):
        if n != 1:
            problems.append(f"item {i} placed {n} times")
    return problems


def audit_packing(packing: Packing, beta, items: Sequence) -> AuditReport:
    """Check an RRC packing against its structural rules and size bounds.

    * ``structure``: capacities, per-label contents, each item placed once.
    * ``beta_rule``: each bin opened by a tiny item has the label the
      ``beta`` rule gives for the bins opened before it.
    * ``size_tiny``: total tiny size ``S > (t-1)(4-3b)/(6-6b) - 1/6``
      (only when ``beta < 1`` and ``t >= 1``).
    * ``w_plus_3``: at most ``W + 3`` bins, where ``W`` is the total item
      weight (only when every critical bin got a critical item).
    """
    beta = as_fraction(beta)
    rep = AuditReport()
    problems = _structure_problems(packing, items)
    rep.checks["structure"] = CheckResult(not problems, None, "; ".join(problems[:5]))

    bad_events = []
    for ev in packing.events:
        prior = packing.bins[: ev.bin_index]
        c0 = sum(b.label is BinLabel.CRITICAL for b in prior)
        t0 = sum(b.label is BinLabel.TINY for b in prior)
        if (c0, t0) != (ev.c_prime, ev.t_prime) or _beta_rule(c0, t0, beta) is not packing.bins[ev.bin_index].label:
            bad_events.append(ev.bin_index)
    rep.checks["beta_rule"] = CheckResult(not bad_events, None, f"bad openings at bins {bad_events}" if bad_events else "")

    counts = packing.counts()
    t = counts[BinLabel.TINY]
    S = math.fsum(float(s) for s in items if classify(s) is ItemClass.TINY)
    if beta < 1 and t >= 1:
        rhs = (t - 1) * float((4 - 3 * beta) / (6 - 6 * beta)) - 1 / 6
        margin = S - rhs
        rep.checks["size_tiny"] = CheckResult(margin > 0, margin, f"S={S:.6g}, t={t}")
    else:
        rep.checks["size_tiny"] = CheckResult(True, None, "vacuous")

    rep.all_critical_filled = all(b.has_critical for b in packing.bins if b.label is BinLabel.CRITICAL)
    if rep.all_critical_filled:
        W = float(bin_weight(items, beta))
        margin = W + 3 - packing.num_bins
        rep.checks["w_plus_3"] = CheckResult(margin >= -EPS, margin, f"bins={packing.num_bins}, W={W:.6g}")
    else:
        rep.checks["w_plus_3"] = CheckResult(True, None, "vacuous: some critical bin lacks a critical item")
    return rep


def _ffd_bins(sizes: list[float]) -> list[list[int]]:
    order = sorted(range(len(sizes)), key=lambda i: -sizes[i])
    bins: list[list[int]] = []
    levels: list[float] = []
    for i in order:
        for j, lv in enumerate(levels):
            if lv + sizes[i] <= 1 + EPS:
                bins[j].append(i)
                levels[j] += sizes[i]
                break
        else:
            bins.append([i])
            levels.append(sizes[i])
    return bins


def opt_packing(items: Sequence) -> list[list[int]]:
    """An optimal packing (lists of item indices) by branch and bound."""
    n = len(items)
    if n > OPT_LIMIT:
        raise ParameterError(f"exact OPT is limited to n <= {OPT_LIMIT} items, got {n}")
    _validate(items)
    if n == 0:
        return []
    sizes = [float(s) for s in items]
    best = _ffd_bins(sizes)
    lower = max(1, math.ceil(math.fsum(sizes) - EPS))
    if len(best) == lower:
        return best
    order = sorted(range(n), key=lambda i: -sizes[i])
    # Suffix sums of the remaining sizes give a bound at every node.
    rest = [0.0] * (n + 1)
    for pos in range(n - 1, -1, -1):
        rest[pos] = rest[pos + 1] + sizes[order[pos]]
    levels: list[float] = []
    members: list[list[int]] = []
    best_box = [best]

    def search(pos: int) -> None:
        if len(best_box[0]) == lower:
            return
        if pos == n:
            if len(levels) < len(best_box[0]):
                best_box[0] = [list(m) for m in members]
            return
        free = sum(1 - lv for lv in levels)
        extra = max(0, math.ceil(rest[pos] - free - EPS))
        if len(levels) + extra >= len(best_box[0]):
            return
        i = order[pos]
        x = sizes[i]
        tried = set()
        for j in range(len(levels)):
            lv = levels[j]
            if lv + x <= 1 + EPS and round(lv, 12) not in tried:
                tried.add(round(lv, 12))
                levels[j] += x
                members[j].append(i)
                search(pos + 1)
                members[j].pop()
                levels[j] = lv
        if len(levels) + 1 < len(best_box[0]):
            levels.append(x)
            members.append([i])
            search(pos + 1)
            levels.pop()
            members.pop()

    search(0)
    return best_box[0]


def opt_bins(items: Sequence) -> int:
    return len(opt_packing(items))


FAMILIES = ("tiny-sixth", "dense-triples", "uniform-random", "critical-heavy")


def adversarial_sequences(family: str, n: int, seed: int) -> list[float]:
    """Seeded item sequences that stress the critical/tiny balance."""
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    rng = make_rng(seed)
    eps = FAMILY_EPS
    if family == "tiny-sixth":
        return [1 / 6 + eps] * n
    if family == "dense-triples":
        group = [1 / 2 + eps, 1 / 3 + eps, 1 / 6 - 2 * eps]
        items = (group * (n // 3 + 1))[:n]
        return [items[i] for i in rng.permutation(n)] if seed else items
    if family == "uniform-random":
        return (1.0 - rng.random(n)).tolist()
    if family == "critical-heavy":
        crit = rng.random(n) < 0.5
        lo_c, hi_c = 0.5 + eps, 2 / 3
        critical = lo_c + (hi_c - lo_c) * rng.random(n)
        tiny = eps + (1 / 3 - eps) * rng.random(n)
        return np.where(crit, critical, tiny).tolist()
    raise ParameterError(f"unknown family {family!r}; expected one of {FAMILIES}")
