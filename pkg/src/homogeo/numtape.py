"""Batched floating-point evaluation of expression DAGs.

An Expr is compiled once into a flat postfix tape (numpy arrays); the tape
is then evaluated over many sample points at once.  Two interpreter
backends exist:

* a numba ``@njit`` kernel (default when numba imports cleanly), and
* a pure-numpy fallback.

Set the environment variable ``HOMOGEO_NO_NUMBA=1`` to force the numpy
path.  ``benchmarks/bench_eval.py`` compares the two.
"""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex

__all__ = ["Tape", "compile_tape", "eval_tape", "NUMBA_ENABLED"]

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_POW, OP_EXP, OP_LOG, OP_ABS, OP_SIGN, \
    OP_SIN, OP_COS = range(11)

_env_off = os.environ.get("HOMOGEO_NO_NUMBA", "") not in ("", "0")
if not _env_off:
    try:
        from numba import njit
        NUMBA_ENABLED = True
    except Exception:  # pragma: no cover - exercised only without numba
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


class Tape:
    __slots__ = ("ops", "a", "b", "consts", "varnames")

    def __init__(self, ops, a, b, consts, varnames):
        self.ops = ops
        self.a = a
        self.b = b
        self.consts = consts
        self.varnames = varnames

    def __len__(self):
        return len(self.ops)


def compile_tape(e: ex.Expr, varnames: Sequence[str] | None = None) -> Tape:
    """Flatten an expression DAG into a tape.  Shared subexpressions are
    evaluated once (node identity is structural thanks to interning)."""
    if varnames is None:
        varnames = sorted(e.free)
    index = {name: i for i, name in enumerate(varnames)}
    ops, aa, bb, consts = [], [], [], []
    memo: dict = {}

    def emit(op, a=-1, b=-1) -> int:
        ops.append(op)
        aa.append(a)
        bb.append(b)
        return len(ops) - 1

    def cidx(v: float) -> int:
        consts.append(float(v))
        return len(consts) - 1

    def rec(x: ex.Expr) -> int:
        hit = memo.get(id(x))
        if hit is not None:
            return hit
        if isinstance(x, ex.Rat):
            out = emit(OP_CONST, cidx(x.value))
        elif isinstance(x, ex.Var):
            out = emit(OP_VAR, index[x.name])
        elif isinstance(x, ex.Sum):
            out = rec(x.terms[0])
            for t in x.terms[1:]:
                out = emit(OP_ADD, out, rec(t))
            if x.const != 0:
                out = emit(OP_ADD, out, emit(OP_CONST, cidx(x.const)))
        elif isinstance(x, ex.Prod):
            out = rec(x.factors[0])
            for f in x.factors[1:]:
                out = emit(OP_MUL, out, rec(f))
            if x.coeff != 1:
                out = emit(OP_MUL, out, emit(OP_CONST, cidx(x.coeff)))
        elif isinstance(x, ex.Pow):
            out = emit(OP_POW, rec(x.base), cidx(x.exponent))
        else:
            opmap = {"exp": OP_EXP, "log": OP_LOG, "abs": OP_ABS,
                     "sign": OP_SIGN, "sin": OP_SIN, "cos": OP_COS}
            out = emit(opmap[x.name], rec(x.arg))
        memo[id(x)] = out
        return out

    rec(e)
    return Tape(np.array(ops, dtype=np.int64), np.array(aa, dtype=np.int64),
                np.array(bb, dtype=np.int64),
                np.array(consts, dtype=np.float64), tuple(varnames))


def _eval_numpy(ops, a, b, consts, values):
    n = ops.shape[0]
    ns = values.shape[1]
    buf = np.empty((n, ns), dtype=np.float64)
    with np.errstate(all="ignore"):
        for i in range(n):
            op = ops[i]
            if op == OP_CONST:
                buf[i] = consts[a[i]]
            elif op == OP_VAR:
                buf[i] = values[a[i]]
            elif op == OP_ADD:
                buf[i] = buf[a[i]] + buf[b[i]]
            elif op == OP_MUL:
                buf[i] = buf[a[i]] * buf[b[i]]
            elif op == OP_POW:
                buf[i] = np.power(buf[a[i]], consts[b[i]])
            elif op == OP_EXP:
                buf[i] = np.exp(buf[a[i]])
            elif op == OP_LOG:
                buf[i] = np.log(buf[a[i]])
            elif op == OP_ABS:
                buf[i] = np.abs(buf[a[i]])
            elif op == OP_SIGN:
                buf[i] = np.sign(buf[a[i]])
            elif op == OP_SIN:
                buf[i] = np.sin(buf[a[i]])
            else:
                buf[i] = np.cos(buf[a[i]])
    return buf[-1]


if NUMBA_ENABLED:
    @njit(cache=True)
    def _eval_numba(ops, a, b, consts, values):  # pragma: no cover - compiled
        n = ops.shape[0]
        ns = values.shape[1]
        buf = np.empty((n, ns), dtype=np.float64)
        for i in range(n):
            op = ops[i]
            for s in range(ns):
                if op == OP_CONST:
                    v = consts[a[i]]
                elif op == OP_VAR:
                    v = values[a[i], s]
                elif op == OP_ADD:
                    v = buf[a[i], s] + buf[b[i], s]
                elif op == OP_MUL:
                    v = buf[a[i], s] * buf[b[i], s]
                elif op == OP_POW:
                    v = buf[a[i], s] ** consts[b[i]]
                elif op == OP_EXP:
                    v = np.exp(buf[a[i], s])
                elif op == OP_LOG:
                    v = np.log(buf[a[i], s])
                elif op == OP_ABS:
                    v = abs(buf[a[i], s])
                elif op == OP_SIGN:
                    x = buf[a[i], s]
                    v = 0.0 if x == 0.0 else (1.0 if x > 0.0 else -1.0)
                elif op == OP_SIN:
                    v = np.sin(buf[a[i], s])
                else:
                    v = np.cos(buf[a[i], s])
                buf[i, s] = v
        return buf[n - 1]
else:
    _eval_numba = None


def eval_tape(tape: Tape, values: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Evaluate at a batch of points.  `values` has shape (nvars, nsamples)
    ordered like tape.varnames.  Returns the root row (nsamples,)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != len(tape.varnames):
        raise ValueError("values must have shape (nvars, nsamples)")
    if backend is None:
        backend = "numba" if NUMBA_ENABLED else "numpy"
    if backend == "numba":
        if _eval_numba is None:
            raise RuntimeError("numba backend unavailable")
        return _eval_numba(tape.ops, tape.a, tape.b, tape.consts, values)
    return _eval_numpy(tape.ops, tape.a, tape.b, tape.consts, values)


def eval_points(e: ex.Expr, points: Sequence[Mapping[str, Fraction]],
                backend: str | None = None) -> np.ndarray:
    """Convenience wrapper: evaluate an expression at a list of points."""
    names = sorted(e.free)
    tape = compile_tape(e, names)
    vals = np.array([[float(p[n]) for p in points] for n in names], dtype=np.float64)
    if not names:
        vals = vals.reshape(0, len(points))
    return eval_tape(tape, vals, backend=backend)
