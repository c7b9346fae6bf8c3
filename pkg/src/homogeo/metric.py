"""Metric machinery: Christoffel symbols, Riemann curvature, musicals.

Curvature convention: R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
- nabla_[X,Y] Z.  Components are stored as R[l][k][i][j] with
R(d_i, d_j) d_k = R^l_{kij} d_l.  For a constant-curvature metric this
gives g(R(X,Y)Y, X) = kappa (|X|^2 |Y|^2 - g(X,Y)^2).
"""

from __future__ import annotations

from fractions import Fraction
from typing import List

from . import expr as ex
from . import symmat
from .chart import Chart, ChartError
from .tensors import KForm, SymTensor2, VectorField, one_form
from .zerotest import ZeroTestPolicy, DEFAULT_POLICY, is_zero

__all__ = ["DegeneracyError", "metric_inverse", "christoffel", "riemann",
           "sharp", "flat", "covariant_derivative_oneform",
           "covariant_derivative_twoform", "sectional_curvature"]


class DegeneracyError(ValueError):
    pass


def _check_nondegenerate(g: SymTensor2, policy: ZeroTestPolicy):
    pol = policy.with_constraints(g.chart.constraints)
    if is_zero(symmat.det(g.rows()), pol):
        raise DegeneracyError("metric is degenerate at the sampled points")


def metric_inverse(g: SymTensor2, policy: ZeroTestPolicy = DEFAULT_POLICY):
    _check_nondegenerate(g, policy)
    return symmat.inverse(g.rows())


def christoffel(g: SymTensor2, policy: ZeroTestPolicy = DEFAULT_POLICY,
                ginv=None) -> List:
    """Gamma[k][i][j] of the Levi-Civita connection,
    Gamma^k_{ij} = g^{kl}(d_i g_{jl} + d_j g_{il} - d_l g_{ij}) / 2."""
    chart = g.chart
    n = chart.dim
    cons = chart.constraints
    if ginv is None:
        ginv = metric_inverse(g, policy)
    dg = [[[ex.diff(g.mat[i][j], chart.coords[k], cons) for j in range(n)]
           for i in range(n)] for k in range(n)]
    half = ex.rat(Fraction(1, 2))
    out = []
    for k in range(n):
        out_k = []
        for i in range(n):
            row = []
            for j in range(n):
                parts = []
                for l in range(n):
                    s = ex.add(dg[i][j][l], dg[j][i][l], ex.neg(dg[l][i][j]))
                    parts.append(ex.mul(ginv[k][l], s))
                row.append(ex.mul(half, ex.add(*parts)))
            out_k.append(row)
        out.append(out_k)
    return out


def riemann(g: SymTensor2, policy: ZeroTestPolicy = DEFAULT_POLICY,
            gamma=None) -> List:
    """R[l][k][i][j] with R(d_i, d_j) d_k = R^l_{kij} d_l:
    R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}."""
    chart = g.chart
    n = chart.dim
    cons = chart.constraints
    if gamma is None:
        gamma = christoffel(g, policy)
    out = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    parts = [ex.diff(gamma[l][j][k], chart.coords[i], cons),
                             ex.neg(ex.diff(gamma[l][i][k], chart.coords[j], cons))]
                    for m in range(n):
                        parts.append(ex.mul(gamma[l][i][m], gamma[m][j][k]))
                        parts.append(ex.neg(ex.mul(gamma[l][j][m], gamma[m][i][k])))
                    out[l][k][i][j] = ex.add(*parts)
    return out


def sharp(g: SymTensor2, alpha: KForm, policy: ZeroTestPolicy = DEFAULT_POLICY,
          ginv=None) -> VectorField:
    if alpha.degree != 1:
        raise ChartError("sharp acts on 1-forms")
    if ginv is None:
        ginv = metric_inverse(g, policy)
    n = g.chart.dim
    comps = [ex.add(*[ex.mul(ginv[i][j], alpha.coeff((j,))) for j in range(n)])
             for i in range(n)]
    return VectorField(g.chart, tuple(comps))


def flat(g: SymTensor2, X: VectorField) -> KForm:
    n = g.chart.dim
    return one_form(g.chart, [ex.add(*[ex.mul(g.mat[i][j], X.comps[j])
                                       for j in range(n)]) for i in range(n)])


def covariant_derivative_oneform(g_or_gamma, eta: KForm, chart: Chart = None,
                                 policy: ZeroTestPolicy = DEFAULT_POLICY) -> List:
    """(nabla_a eta)_b = d_a eta_b - Gamma^c_{ab} eta_c, returned as [a][b]."""
    if isinstance(g_or_gamma, SymTensor2):
        chart = g_or_gamma.chart
        gamma = christoffel(g_or_gamma, policy)
    else:
        gamma = g_or_gamma
    n = chart.dim
    cons = chart.constraints
    out = []
    for a in range(n):
        row = []
        for b in range(n):
            parts = [ex.diff(eta.coeff((b,)), chart.coords[a], cons)]
            for c in range(n):
                parts.append(ex.neg(ex.mul(gamma[c][a][b], eta.coeff((c,)))))
            row.append(ex.add(*parts))
        out.append(row)
    return out


def covariant_derivative_twoform(gamma, w: KForm) -> List:
    """(nabla_a w)_{bc} = d_a w_{bc} - Gamma^d_{ab} w_{dc} - Gamma^d_{ac} w_{bd},
    returned as [a][b][c] with w_{bc} the full antisymmetric coefficient."""
    chart = w.chart
    n = chart.dim
    cons = chart.constraints

    def wfull(b, c):
        if b == c:
            return ex.ZERO
        if b < c:
            return w.coeff((b, c))
        return ex.neg(w.coeff((c, b)))

    out = []
    for a in range(n):
        plane = []
        for b in range(n):
            row = []
            for c in range(n):
                parts = [ex.diff(wfull(b, c), chart.coords[a], cons)]
                for dd in range(n):
                    parts.append(ex.neg(ex.mul(gamma[dd][a][b], wfull(dd, c))))
                    parts.append(ex.neg(ex.mul(gamma[dd][a][c], wfull(b, dd))))
                row.append(ex.add(*parts))
            plane.append(row)
        out.append(plane)
    return out


def sectional_curvature(g: SymTensor2, X: VectorField, Y: VectorField,
                        policy: ZeroTestPolicy = DEFAULT_POLICY) -> ex.Expr:
    """g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - g(X,Y)^2) as a symbolic quotient."""
    R = riemann(g, policy)
    n = g.chart.dim
    rxyy = []
    for l in range(n):
        parts = []
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    parts.append(ex.mul(R[l][k][i][j], Y.comps[k], X.comps[i], Y.comps[j]))
        rxyy.append(ex.add(*parts))
    num = ex.add(*[ex.mul(g.mat[l][m], rxyy[l], X.comps[m])
                   for l in range(n) for m in range(n)])
    den = ex.sub(ex.mul(g(X, X), g(Y, Y)), ex.pw(g(X, Y), 2))
    return ex.div(num, den)
