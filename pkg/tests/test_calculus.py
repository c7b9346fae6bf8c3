import random
from fractions import Fraction

import pytest

from homogeo import expr as ex
from homogeo.chart import Chart, ChartError, SmoothMap
from homogeo.metric import (DegeneracyError, christoffel, flat, riemann,
                            sectional_curvature, sharp)
from homogeo.tensors import (KForm, SymTensor2, VectorField, coordinate_field,
                             d, interior, lie_bracket, lie_derivative, one_form,
                             pullback, pushforward, sym_product, wedge)
from homogeo.zerotest import ZeroTestPolicy, is_zero

from conftest import rand_point, rand_poly, vf_apply_numeric

B2 = Chart("b2", ("x", "y"))
B3 = Chart("b3", ("x", "y", "z"))
TOTAL = Chart("tot", ("u", "x", "p", "mu"), (ex.Constraint("mu", ">", 0),))


def rand_field(rng, chart):
    return VectorField(chart, tuple(rand_poly(rng, chart.coords)
                                    for _ in range(chart.dim)))


def rand_form(rng, chart, degree):
    from itertools import combinations
    coeffs = {idx: rand_poly(rng, chart.coords)
              for idx in combinations(range(chart.dim), degree)}
    return KForm(chart, degree, coeffs)


def forms_equal(a, b, pol=ZeroTestPolicy()):
    keys = set(a.coeffs) | set(b.coeffs)
    return all(is_zero(ex.sub(a.coeff(k), b.coeff(k)), pol) for k in keys)


# -- exterior derivative -------------------------------------------------------

def test_d_coordinate_one_form():
    w = one_form(B2, [ex.ZERO, ex.var("x")])   # x dy
    assert dict(d(w).coeffs) == {(0, 1): ex.ONE}


def test_d_constant_two_form():
    w = KForm(B2, 2, {(0, 1): ex.ONE})
    assert d(w).is_structurally_zero()


def test_d_darboux_potential():
    mu, p = ex.var("mu"), ex.var("p")
    w = one_form(TOTAL, [mu, ex.neg(ex.mul(mu, p)), ex.ZERO, ex.ZERO])
    got = d(w)
    want = {(0, 3): ex.rat(-1), (1, 3): p, (1, 2): mu}
    assert dict(got.coeffs) == want


def test_dd_zero_random():
    rng = random.Random(5)
    for degree in (0, 1, 2):
        for _ in range(50):
            w = rand_form(rng, B3, degree)
            assert d(d(w)).is_structurally_zero() or \
                all(is_zero(c) for c in d(d(w)).coeffs.values())


# -- wedge ---------------------------------------------------------------------

def test_wedge_nilpotent():
    dx = one_form(B3, [1, 0, 0])
    assert wedge(dx, dx).is_structurally_zero()


def test_wedge_convention_pin():
    dx = one_form(B3, [1, 0, 0])
    dy = one_form(B3, [0, 1, 0])
    w = wedge(dx, dy)
    assert w(coordinate_field(B3, 0), coordinate_field(B3, 1)) is ex.ONE
    assert w(coordinate_field(B3, 1), coordinate_field(B3, 0)) is ex.rat(-1)


def test_wedge_top_form():
    dx = one_form(B3, [1, 0, 0])
    dy = one_form(B3, [0, 1, 0])
    dz = one_form(B3, [0, 0, 1])
    top = wedge(dz, wedge(dx, dy))
    assert dict(top.coeffs) == {(0, 1, 2): ex.ONE}


def test_wedge_chart_mismatch():
    with pytest.raises(ChartError):
        wedge(one_form(B2, [1, 0]), one_form(B3, [1, 0, 0]))


def test_wedge_graded_commutative():
    rng = random.Random(6)
    a = rand_form(rng, B3, 1)
    b = rand_form(rng, B3, 2)
    lhs = wedge(a, b)
    rhs = wedge(b, a)  # (-1)^{1*2} = +1
    assert forms_equal(lhs, rhs)


# -- brackets ------------------------------------------------------------------

def test_bracket_spec_examples():
    X = VectorField(B2, (ex.ZERO, ex.var("x")))   # x d_y
    Y = VectorField(B2, (ex.ONE, ex.ZERO))        # d_x
    assert lie_bracket(X, Y).comps == (ex.ZERO, ex.rat(-1))

    T = Chart("t", ("x", "mu"), (ex.Constraint("mu", ">", 0),))
    E = VectorField(T, (ex.ZERO, ex.var("mu")))
    F = VectorField(T, (ex.var("mu"), ex.ZERO))
    assert lie_bracket(E, F).comps == (ex.var("mu"), ex.ZERO)

    assert lie_bracket(coordinate_field(B2, 0),
                       coordinate_field(B2, 1)).comps == (ex.ZERO, ex.ZERO)


def test_bracket_against_composition_oracle():
    # [X, Y](f) = X(Y(f)) - Y(X(f)) evaluated numerically
    rng = random.Random(7)
    X, Y = rand_field(rng, B2), rand_field(rng, B2)
    br = lie_bracket(X, Y)
    f = rand_poly(rng, B2.coords, degree=3)
    for _ in range(5):
        p = rand_point(rng, B2.coords)
        pf = {k: float(v) for k, v in p.items()}
        want = vf_apply_numeric(X, Y(f), p) - vf_apply_numeric(Y, X(f), p)
        got = ex.eval_float(br(f), pf)
        assert got == pytest.approx(want, rel=1e-4, abs=1e-4)


def test_jacobi_identity_random():
    rng = random.Random(8)
    for _ in range(5):
        X, Y, Z = (rand_field(rng, B2) for _ in range(3))
        total = lie_bracket(X, lie_bracket(Y, Z)) + \
            lie_bracket(Y, lie_bracket(Z, X)) + \
            lie_bracket(Z, lie_bracket(X, Y))
        assert all(is_zero(c) for c in total.comps)


# -- interior / transport --------------------------------------------------------

def test_interior_first_slot():
    du_dx = wedge(one_form(TOTAL, [1, 0, 0, 0]), one_form(TOTAL, [0, 1, 0, 0]))
    got = interior(coordinate_field(TOTAL, 0), du_dx)
    assert dict(got.coeffs) == {(1,): ex.ONE}


def test_pullback_scaling_map():
    T = Chart("t", ("x", "mu"), (ex.Constraint("mu", ">", 0),))
    r = ex.var("r")
    h = SmoothMap(T, T, (ex.var("x"), ex.mul(r, ex.var("mu"))),
                  (ex.var("x"), ex.div(ex.var("mu"), r)))
    dmu = one_form(T, [0, 1])
    assert dict(pullback(h, dmu).coeffs) == {(1,): r}


def test_pushforward_euler_invariant():
    T = Chart("t", ("x", "mu"), (ex.Constraint("mu", ">", 0),))
    r = ex.var("r")
    h = SmoothMap(T, T, (ex.var("x"), ex.mul(r, ex.var("mu"))),
                  (ex.var("x"), ex.div(ex.var("mu"), r)))
    E = VectorField(T, (ex.ZERO, ex.var("mu")))
    assert pushforward(h, E).comps == (ex.ZERO, ex.var("mu"))


def test_pushforward_requires_inverse():
    f = SmoothMap(B2, B2, (ex.var("x"), ex.var("y")))
    with pytest.raises(ChartError):
        pushforward(f, coordinate_field(B2, 0))


def test_pullback_commutes_with_d():
    T = Chart("t", ("x", "mu"), (ex.Constraint("mu", ">", 0),))
    r = ex.var("r")
    h = SmoothMap(T, T, (ex.var("x"), ex.mul(r, ex.var("mu"))),
                  (ex.var("x"), ex.div(ex.var("mu"), r)))
    rng = random.Random(9)
    pol = ZeroTestPolicy(constraints=T.constraints + (ex.Constraint("r", ">", 0),))
    for _ in range(5):
        w = rand_form(rng, T, 1)
        assert forms_equal(pullback(h, d(w)), d(pullback(h, w)), pol)


def test_cartan_magic_formula():
    rng = random.Random(10)
    for degree in (1, 2):
        for _ in range(5):
            X = rand_field(rng, B3)
            w = rand_form(rng, B3, degree)
            lhs = lie_derivative(X, w)
            rhs = interior(X, d(w)) + d(interior(X, w))
            assert forms_equal(lhs, rhs)


def test_pushforward_preserves_bracket():
    T = Chart("t", ("x", "mu"), (ex.Constraint("mu", ">", 0),))
    r = ex.var("r")
    h = SmoothMap(T, T, (ex.var("x"), ex.mul(r, ex.var("mu"))),
                  (ex.var("x"), ex.div(ex.var("mu"), r)))
    rng = random.Random(12)
    pol = ZeroTestPolicy(constraints=T.constraints + (ex.Constraint("r", ">", 0),))
    X, Y = rand_field(rng, T), rand_field(rng, T)
    lhs = pushforward(h, lie_bracket(X, Y))
    rhs = lie_bracket(pushforward(h, X), pushforward(h, Y))
    assert all(is_zero(ex.sub(a, b), pol) for a, b in zip(lhs.comps, rhs.comps))


# -- metric machinery -------------------------------------------------------------

def test_flat_metric():
    g = SymTensor2(B2, ((ex.ONE, ex.ZERO), (ex.ZERO, ex.ONE)))
    gam = christoffel(g)
    assert all(v is ex.ZERO for plane in gam for row in plane for v in row)
    R = riemann(g)
    assert all(v is ex.ZERO for a in R for b in a for c in b for v in c)


def test_sphere_sectional_curvature_quarter():
    S = Chart("s2", ("th", "ph"), (ex.Constraint("th", ">", Fraction(1, 10)),
                                   ex.Constraint("th", "<", 3)))
    th = ex.var("th")
    g = SymTensor2(S, ((ex.rat(4), ex.ZERO),
                       (ex.ZERO, ex.mul(ex.rat(4), ex.pw(ex.sin_(th), 2)))))
    sec = sectional_curvature(g, coordinate_field(S, 0), coordinate_field(S, 1))
    pol = ZeroTestPolicy(constraints=S.constraints)
    assert is_zero(ex.sub(sec, ex.rat(Fraction(1, 4))), pol)


def test_cone_metric_is_flat():
    # dR . dR + R^2 g(S^1) in polar coordinates is the flat plane
    P = Chart("polar", ("R", "z"), (ex.Constraint("R", ">", 0),))
    R = ex.var("R")
    g = SymTensor2(P, ((ex.ONE, ex.ZERO), (ex.ZERO, ex.pw(R, 2))))
    pol = ZeroTestPolicy(constraints=P.constraints)
    Rm = riemann(g, pol)
    assert all(is_zero(v, pol) for a in Rm for b in a for c in b for v in c)


def test_flat_radial_sphere_metric_n2():
    # dR . dR + R^2 g(S^2): flat in spherical coordinates
    S = Chart("sph", ("R", "th", "ph"),
              (ex.Constraint("R", ">", 0),
               ex.Constraint("th", ">", Fraction(1, 10)),
               ex.Constraint("th", "<", 3)))
    R, th = ex.var("R"), ex.var("th")
    g = SymTensor2(S, ((ex.ONE, ex.ZERO, ex.ZERO),
                       (ex.ZERO, ex.pw(R, 2), ex.ZERO),
                       (ex.ZERO, ex.ZERO,
                        ex.mul(ex.pw(R, 2), ex.pw(ex.sin_(th), 2)))))
    pol = ZeroTestPolicy(constraints=S.constraints)
    Rm = riemann(g, pol)
    assert all(is_zero(v, pol) for a in Rm for b in a for c in b for v in c)


def test_degenerate_metric_raises():
    g = SymTensor2(B2, ((ex.ONE, ex.ONE), (ex.ONE, ex.ONE)))
    with pytest.raises(DegeneracyError):
        christoffel(g)


def test_sharp_flat_examples():
    g = SymTensor2(B2, ((ex.ONE, ex.ZERO), (ex.ZERO, ex.ONE)))
    assert sharp(g, one_form(B2, [1, 0])).comps == (ex.ONE, ex.ZERO)
    g4 = SymTensor2(B2, ((ex.rat(4), ex.ZERO), (ex.ZERO, ex.rat(4))))
    assert sharp(g4, one_form(B2, [1, 0])).comps == (ex.rat(Fraction(1, 4)), ex.ZERO)


def test_sharp_flat_inverse_pair():
    rng = random.Random(13)
    x = ex.var("x")
    g = SymTensor2(B2, ((ex.add(ex.rat(2), ex.pw(x, 2)), ex.ONE),
                        (ex.ONE, ex.rat(3))))
    for _ in range(5):
        a = rand_form(rng, B2, 1)
        back = flat(g, sharp(g, a))
        assert forms_equal(a, back)
        X = rand_field(rng, B2)
        Xback = sharp(g, flat(g, X))
        assert all(is_zero(ex.sub(u, v)) for u, v in zip(X.comps, Xback.comps))
        # defining property g(a#, Y) = a(Y)
        Y = rand_field(rng, B2)
        assert is_zero(ex.sub(g(sharp(g, a), Y), a(Y)))


def test_first_bianchi_random_metrics():
    rng = random.Random(14)
    x, y = ex.var("x"), ex.var("y")
    for trial in range(3):
        f = rand_poly(rng, ("x", "y"), degree=2, terms=2, coeff_den=10)
        g = SymTensor2(B2, ((ex.add(ex.rat(2), ex.pw(f, 2)), f),
                            (f, ex.rat(2))))
        R = riemann(g)
        n = 2
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        total = ex.add(R[l][k][i][j], R[l][i][j][k], R[l][j][k][i])
                        assert is_zero(total)


def test_sym_product_pin():
    # sum_i dx^i . dx^i is exactly the euclidean coefficient matrix
    dx = one_form(B2, [1, 0])
    dy = one_form(B2, [0, 1])
    g = sym_product(dx, dx) + sym_product(dy, dy)
    assert g.mat == ((ex.ONE, ex.ZERO), (ex.ZERO, ex.ONE))
    # polарization: (a . b)(X, Y) symmetric
    rng = random.Random(15)
    a, b = rand_form(rng, B2, 1), rand_form(rng, B2, 1)
    X, Y = rand_field(rng, B2), rand_field(rng, B2)
    s = sym_product(a, b)
    assert is_zero(ex.sub(s(X, Y), s(Y, X)))
    assert is_zero(ex.sub(ex.mul(ex.rat(2), s(X, Y)),
                          ex.add(ex.mul(a(X), b(Y)), ex.mul(a(Y), b(X)))))
