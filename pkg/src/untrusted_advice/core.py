"""Shared vocabulary for online algorithms with untrusted advice.

An algorithm facing possibly-wrong advice is summarised by a pair ``(r, w)``:
``r`` is its competitive ratio when the advice is correct and ``w`` when the
advice is chosen by an adversary.  Pairs are compared by componentwise
dominance, and families of algorithms are judged by their Pareto frontier.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Hashable, Iterable, Sequence, TypeVar

import numpy as np

__all__ = [
    "AdviceMode",
    "CompetitivePair",
    "ExperimentRecord",
    "InvariantViolation",
    "ParameterError",
    "RatioAccumulator",
    "as_fraction",
    "cost_ratio",
    "derive_seed",
    "dominates",
    "make_rng",
    "pareto_frontier",
    "to_jsonable",
]

P = TypeVar("P")

# Floating pairs may carry rounding noise in the r <= w check.
_PAIR_TOL = 1e-12


class ParameterError(ValueError):
    """An operation was called with parameters outside its domain."""


class InvariantViolation(AssertionError):
    """A stated bound or structural invariant failed on a concrete run.

    ``name`` identifies the invariant so the CLI can report it.
    """

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        self.detail = detail
        super().__init__(f"{name}: {detail}" if detail else name)


def as_fraction(x: Real | str) -> Fraction:
    """Exact rational for ``x``; floats are read through their decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ParameterError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    return Fraction(str(x))


def _num_le(a, b, tol: float = _PAIR_TOL) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a <= b
    return float(a) <= float(b) + tol * max(1.0, abs(float(b)))


@dataclass(frozen=True)
class AdviceMode:
    """How the advice string is chosen for a run.

    ``trusted`` is the advice the oracle is meant to give, ``adversarial`` the
    worst case over the advice space, and ``fixed`` a specific payload.
    """

    mode: str
    value: Any = None

    def __post_init__(self):
        if self.mode not in ("trusted", "adversarial", "fixed"):
            raise ParameterError(f"unknown advice mode {self.mode!r}")
        if self.mode != "fixed" and self.value is not None:
            raise ParameterError(f"advice mode {self.mode!r} takes no payload")

    @classmethod
    def trusted(cls) -> "AdviceMode":
        return cls("trusted")

    @classmethod
    def adversarial(cls) -> "AdviceMode":
        return cls("adversarial")

    @classmethod
    def fixed(cls, value: Any) -> "AdviceMode":
        return cls("fixed", value)

    def to_json(self) -> dict:
        if self.mode == "fixed":
            return {"mode": "fixed", "value": to_jsonable(self.value)}
        return {"mode": self.mode}

    @classmethod
    def from_json(cls, obj: dict) -> "AdviceMode":
        return cls(obj["mode"], obj.get("value"))


@dataclass(frozen=True)
class CompetitivePair:
    """Trusted ratio ``r`` and untrusted ratio ``w`` of one algorithm."""

    r: Real
    w: Real

    def __post_init__(self):
        if self.r < 0 or self.w < 0:
            raise ParameterError(f"ratios must be nonnegative, got {self}")
        if not _num_le(self.r, self.w):
            raise InvariantViolation(
                "pair.r_le_w", f"trusted ratio {self.r} exceeds untrusted ratio {self.w}"
            )

    def as_floats(self) -> tuple[float, float]:
        return float(self.r), float(self.w)

    def __iter__(self):
        yield self.r
        yield self.w


def dominates(a: CompetitivePair, b: CompetitivePair) -> bool:
    """True iff ``a`` is at least as good as ``b`` in both coordinates."""
    return a.r <= b.r and a.w <= b.w


def pareto_frontier(
    points: Iterable[tuple[P, CompetitivePair]],
) -> list[tuple[P, CompetitivePair]]:
    """Points not strictly dominated by any other point, input order kept.

    Identical pairs never eliminate each other, so ties all survive.
    """
    pts = list(points)
    out = []
    for i, (params, pair) in enumerate(pts):
        beaten = False
        for j, (_, other) in enumerate(pts):
            if i != j and dominates(other, pair) and (other.r, other.w) != (pair.r, pair.w):
                beaten = True
                break
        if not beaten:
            out.append((params, pair))
    return out


class RatioAccumulator:
    """Running supremum of cost ratios with the input that attains it."""

    def __init__(self, additive_slack: Real = 0):
        self.max_ratio: Real = float("-inf")
        self.arg_max: Hashable | None = None
        self.additive_slack = additive_slack
        self.count = 0

    def add(self, ratio: Real, witness: Hashable = None) -> None:
        self.count += 1
        if ratio > self.max_ratio:
            self.max_ratio = ratio
            self.arg_max = witness

    def add_costs(self, alg_cost: Real, opt_cost: Real, witness: Hashable = None) -> Real:
        ratio = cost_ratio(alg_cost - self.additive_slack, opt_cost)
        self.add(ratio, witness)
        return ratio

    def __repr__(self):
        return f"RatioAccumulator(max_ratio={self.max_ratio!r}, arg_max={self.arg_max!r}, n={self.count})"


def cost_ratio(alg_cost: Real, opt_cost: Real) -> Real:
    """``alg_cost / opt_cost``, exact when both are rational."""
    if opt_cost <= 0:
        raise ParameterError("ratio undefined: optimal cost must be positive")
    if isinstance(alg_cost, (int, Fraction)) and isinstance(opt_cost, (int, Fraction)):
        return Fraction(alg_cost) / Fraction(opt_cost)
    return float(alg_cost) / float(opt_cost)


def to_jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return float(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "value") and hasattr(x, "name") and not isinstance(x, (str, int, float)):
        return x.value  # enum members
    return x


@dataclass(frozen=True)
class ExperimentRecord:
    """One measured run: costs of the algorithm and of OPT on one input.

    An asymptotic experiment puts its additive constant under
    ``params["additive_constant"]``; :attr:`adjusted_ratio` subtracts it.
    """

    problem: str
    algorithm: str
    params: dict = field(default_factory=dict)
    input_family: str = ""
    seed: int = 0
    alg_cost: Real = 0
    opt_cost: Real = 1
    ratio: Real = field(default=None)
    advice_mode: AdviceMode = field(default_factory=AdviceMode.trusted)

    FIELDS = (
        "problem",
        "algorithm",
        "params",
        "input_family",
        "seed",
        "alg_cost",
        "opt_cost",
        "ratio",
        "advice_mode",
    )

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must fit in 64 unsigned bits")
        if not isinstance(self.advice_mode, AdviceMode):
            raise ParameterError(f"advice_mode must be an AdviceMode, got {self.advice_mode!r}")
        if self.ratio is None:
            object.__setattr__(self, "ratio", cost_ratio(self.alg_cost, self.opt_cost))

    @property
    def additive_constant(self) -> Real:
        return self.params.get("additive_constant", 0)

    @property
    def adjusted_ratio(self) -> Real:
        return cost_ratio(self.alg_cost - self.additive_constant, self.opt_cost)

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "algorithm": self.algorithm,
            "params": to_jsonable(self.params),
            "input_family": self.input_family,
            "seed": int(self.seed),
            "alg_cost": to_jsonable(self.alg_cost),
            "opt_cost": to_jsonable(self.opt_cost),
            "ratio": float(self.ratio),
            "advice_mode": self.advice_mode.to_json(),
        }

    def to_jsonl(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentRecord":
        missing = [f for f in cls.FIELDS if f not in obj]
        if missing:
            raise ParameterError(f"record is missing fields {missing}")
        extra = sorted(set(obj) - set(cls.FIELDS))
        if extra:
            raise ParameterError(f"record has unknown fields {extra}")
        return cls(
            problem=obj["problem"],
            algorithm=obj["algorithm"],
            params=dict(obj["params"]),
            input_family=obj["input_family"],
            seed=obj["seed"],
            alg_cost=obj["alg_cost"],
            opt_cost=obj["opt_cost"],
            ratio=obj["ratio"],
            advice_mode=AdviceMode.from_json(obj["advice_mode"]),
        )


def derive_seed(base: int, *indices: int | str) -> int:
    """Stable 64-bit seed from a base seed and cell/trial indices."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(base)).encode())
    for idx in indices:
        h.update(b"/")
        h.update(str(idx).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def sup_pair(trusted: Sequence[Real], untrusted: Sequence[Real]) -> CompetitivePair:
    return CompetitivePair(max(trusted), max(untrusted))
