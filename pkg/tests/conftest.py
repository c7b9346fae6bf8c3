"""Shared generators and independent numeric oracles for the test suite.

Everything random is driven by explicitly seeded random.Random instances,
so failures reproduce exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from homogeo import expr as ex
from homogeo.tensors import VectorField
from homogeo.zerotest import ZeroTestPolicy


def frac(rng: random.Random, lo=-3, hi=3, den=4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def rand_poly(rng: random.Random, names, degree=2, terms=4,
              coeff_den=6) -> ex.Expr:
    """Random sparse polynomial with small rational coefficients."""
    parts = [ex.rat(Fraction(rng.randint(-3, 3), coeff_den))]
    for _ in range(terms):
        c = Fraction(rng.randint(-3, 3), coeff_den)
        if c == 0:
            continue
        term = [ex.rat(c)]
        for _ in range(rng.randint(1, degree)):
            term.append(ex.var(rng.choice(list(names))))
        parts.append(ex.mul(*term))
    return ex.add(*parts)


def rand_expr(rng: random.Random, names, depth=4) -> ex.Expr:
    """Random expression tree exercising every node kind; arguments of
    log/sqrt are kept positive by construction."""
    if depth == 0 or rng.random() < 0.25:
        choice = rng.random()
        if choice < 0.4:
            return ex.var(rng.choice(list(names)))
        return ex.rat(frac(rng))
    op = rng.choice(["add", "mul", "pow", "sin", "cos", "exp", "log", "sqrt", "abs"])
    a = rand_expr(rng, names, depth - 1)
    if op == "add":
        return ex.add(a, rand_expr(rng, names, depth - 1))
    if op == "mul":
        return ex.mul(a, rand_expr(rng, names, depth - 1))
    if op == "pow":
        if rng.random() < 0.4:
            return ex.pw(_positivize(a), Fraction(1, 2))
        return ex.pw(a, rng.choice([2, 3, -1]))
    if op in ("sin", "cos", "exp"):
        return {"sin": ex.sin_, "cos": ex.cos_, "exp": ex.exp_}[op](_shrink(a))
    if op == "log":
        return ex.log_(_positivize(a))
    if op == "sqrt":
        return ex.sqrt_(_positivize(a))
    return ex.abs_(_positivize(a))


def _positivize(a: ex.Expr) -> ex.Expr:
    return ex.add(ex.ONE, ex.mul(a, a))


def _shrink(a: ex.Expr) -> ex.Expr:
    # keep transcendental arguments moderate to avoid float overflow
    return ex.mul(ex.rat(Fraction(1, 4)), a)


def rand_point(rng: random.Random, names, lo=-2, hi=2):
    return {n: frac(rng, lo, hi) for n in names}


def finite_difference(e: ex.Expr, v: str, point, h=1e-6) -> float:
    """Independent derivative oracle: central difference of the float
    evaluation."""
    up = dict(point)
    dn = dict(point)
    up[v] = float(up[v]) + h
    dn[v] = float(dn[v]) - h
    fl = {k: float(x) for k, x in point.items()}
    up = {k: float(x) for k, x in up.items()}
    dn = {k: float(x) for k, x in dn.items()}
    return (ex.eval_float(e, up) - ex.eval_float(e, dn)) / (2 * h)


def vf_apply_numeric(X: VectorField, f: ex.Expr, point, h=1e-6) -> float:
    """Numeric directional derivative (oracle for bracket tests)."""
    total = 0.0
    for comp, name in zip(X.comps, X.chart.coords):
        c = ex.eval_float(comp, {k: float(v) for k, v in point.items()})
        total += c * finite_difference(f, name, point, h)
    return total


@pytest.fixture
def policy():
    return ZeroTestPolicy()
