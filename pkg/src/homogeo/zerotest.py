"""Probabilistic zero testing: simplify, then sample.

Every identity check in the package reduces to this test.  The verdict
policy is: a literal 0 after simplification is zero; otherwise the
expression is evaluated at `sample_count` random rational points of the
constrained domain.  Expressions that are rational in all variables are
evaluated in exact arithmetic (a nonzero verdict is then sound and comes
with an exact witness); everything else is compared against
`tolerance` in floating point.  The per-query RNG is derived from
(seed, expression fingerprint), so verdicts and witnesses are stable
across runs and independent of evaluation order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Tuple

import numpy as np
import random

from . import expr as ex
from . import numtape

__all__ = ["ZeroTestPolicy", "ZeroVerdict", "ConfigError", "is_zero",
           "zero_report", "all_zero", "sample_points", "DEFAULT_POLICY"]

_PREFILTER = 1e-6          # float magnitude above which we try an exact witness
_MAX_REDRAWS = 200


class ConfigError(ValueError):
    """Unsatisfiable domain constraints or other bad configuration."""


@dataclass(frozen=True)
class ZeroTestPolicy:
    sample_count: int = 20
    tolerance: float = 1e-9
    seed: int = 0
    constraints: Tuple[ex.Constraint, ...] = ()

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")

    def with_constraints(self, extra: Iterable[ex.Constraint]) -> "ZeroTestPolicy":
        merged = self.constraints + tuple(c for c in extra if c not in self.constraints)
        return replace(self, constraints=merged)

    def with_seed(self, seed: int) -> "ZeroTestPolicy":
        return replace(self, seed=seed)


DEFAULT_POLICY = ZeroTestPolicy()


@dataclass(frozen=True)
class ZeroVerdict:
    is_zero: bool
    exact: bool                      # verdict used exact rational arithmetic
    witness: Optional[dict] = None   # var -> Fraction, present when nonzero
    witness_value: Optional[object] = None
    samples: int = 0
    note: str = ""


def _fingerprint(e: ex.Expr, policy: ZeroTestPolicy) -> int:
    blob = ex.to_dsl(e) + "|" + ";".join(repr(c) for c in policy.constraints)
    digest = hashlib.sha256(blob.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _bounds(constraints, names):
    lo, hi, excl = {}, {}, {}
    for c in constraints:
        if c.name not in names:
            continue
        if c.op == ">":
            lo[c.name] = max(lo.get(c.name, c.bound), c.bound)
        elif c.op == "<":
            hi[c.name] = min(hi.get(c.name, c.bound), c.bound)
        else:
            excl.setdefault(c.name, set()).add(c.bound)
    for n in names:
        if n in lo and n in hi and lo[n] >= hi[n]:
            raise ConfigError(f"constraints on {n} are unsatisfiable")
    return lo, hi, excl


def _draw(rng: random.Random, lo, hi, excl, name) -> Fraction:
    for _ in range(_MAX_REDRAWS):
        d = rng.randint(2, 13)
        if name in lo and name in hi:
            x = lo[name] + (hi[name] - lo[name]) * Fraction(rng.randint(1, d - 1), d)
        elif name in lo:
            x = lo[name] + Fraction(rng.randint(1, 3 * d), d)
        elif name in hi:
            x = hi[name] - Fraction(rng.randint(1, 3 * d), d)
        else:
            x = Fraction(rng.randint(-3 * d, 3 * d), d)
        if x in excl.get(name, ()):
            continue
        return x
    raise ConfigError(f"could not sample a value for {name}")


def sample_points(names, policy: ZeroTestPolicy, rng: random.Random, count=None):
    """Draw `count` points satisfying the policy constraints (no domain
    validation against any particular expression)."""
    lo, hi, excl = _bounds(policy.constraints, set(names))
    count = policy.sample_count if count is None else count
    return [{n: _draw(rng, lo, hi, excl, n) for n in names} for _ in range(count)]


def zero_report(e: ex.Expr, policy: ZeroTestPolicy = DEFAULT_POLICY) -> ZeroVerdict:
    e = ex.simplify(e, policy.constraints)
    if isinstance(e, ex.Rat):
        if e.value == 0:
            return ZeroVerdict(True, True, note="literal zero")
        return ZeroVerdict(False, True, witness={}, witness_value=e.value,
                           note="literal nonzero constant")

    names = sorted(e.free)
    rng = random.Random(_fingerprint(e, policy) ^ (policy.seed * 0x9E3779B97F4A7C15))
    lo, hi, excl = _bounds(policy.constraints, set(names))
    tape = numtape.compile_tape(e, names)

    points = []
    floats = []
    draws = 0
    while len(points) < policy.sample_count:
        if draws > _MAX_REDRAWS:
            raise ConfigError("could not find enough valid sample points "
                              "(expression may be singular on the whole domain)")
        draws += 1
        p = {n: _draw(rng, lo, hi, excl, n) for n in names}
        vals = np.array([[float(p[n])] for n in names], dtype=np.float64)
        if not names:
            vals = vals.reshape(0, 1)
        v = float(numtape.eval_tape(tape, vals)[0])
        if not np.isfinite(v):
            continue  # outside the expression's domain; redraw
        points.append(p)
        floats.append(v)

    if e.rational:
        # float prefilter: likely witnesses first, then exact confirmation
        order = sorted(range(len(points)), key=lambda i: -abs(floats[i]))
        for i in order:
            try:
                val = ex.eval_exact(e, points[i])
            except ZeroDivisionError:
                continue
            if val != 0:
                return ZeroVerdict(False, True, witness=points[i], witness_value=val,
                                   samples=len(points))
            if abs(floats[i]) <= _PREFILTER:
                # remaining floats are all small; confirm each exactly
                break
        for p in points:
            try:
                val = ex.eval_exact(e, p)
            except ZeroDivisionError:
                continue
            if val != 0:
                return ZeroVerdict(False, True, witness=p, witness_value=val,
                                   samples=len(points))
        return ZeroVerdict(True, True, samples=len(points))

    worst = max(range(len(points)), key=lambda i: abs(floats[i]))
    if abs(floats[worst]) > policy.tolerance:
        return ZeroVerdict(False, False, witness=points[worst],
                           witness_value=floats[worst], samples=len(points))
    return ZeroVerdict(True, False, samples=len(points))


def is_zero(e: ex.Expr, policy: ZeroTestPolicy = DEFAULT_POLICY) -> bool:
    return zero_report(e, policy).is_zero


def all_zero(exprs, policy: ZeroTestPolicy = DEFAULT_POLICY):
    """Test a collection of expressions; returns (ok, first_bad_report)."""
    for key, e in (exprs.items() if isinstance(exprs, dict) else enumerate(exprs)):
        rep = zero_report(e, policy)
        if not rep.is_zero:
            return False, (key, rep)
    return True, None
