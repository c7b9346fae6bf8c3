import random
from fractions import Fraction

import pytest

from homogeo import expr as ex
from homogeo import ratmat as rm
from homogeo.frames import (Frame, NotHomogeneousError, chart_frame,
                            build_frame, degree_coset, frame_from_matrix,
                            frames_G_equivalent, homomorphism_law_holds,
                            is_homogeneous_chart, transition)
from homogeo.groups import (GL, O, SP, contact_lift, rand_element,
                            sqrt_abs_lift, trivial_hom)
from homogeo.linebundle import LineBundleScenario
from homogeo.metric import DegeneracyError
from homogeo.tensors import VectorField
from homogeo.zerotest import ZeroTestPolicy, is_zero

SCN1 = LineBundleScenario("m1", ("x",))
SCN3 = LineBundleScenario("m3", ("u", "x1", "p1"))


def vf(scn, comps):
    return VectorField(scn.total, tuple(ex._coerce(c) if not isinstance(c, str)
                                        else scn.total.parse(c) for c in comps))


def mat_is(mat, want, pol=ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))):
    for row, wrow in zip(mat, want):
        for v, w in zip(row, wrow):
            if not is_zero(ex.sub(v, ex._coerce(w) if not isinstance(w, str)
                                  else ex.var(w)), pol):
                return False
    return True


# -- transition --------------------------------------------------------------------

def test_transition_invariant_frame():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "mu"])))
    tr = transition(f)
    assert tr.homogeneous
    assert mat_is(tr.matrix_sym, [[1, 0], [0, 1]])
    assert rm.req(tr.hom.B, rm.rzeros(2))
    assert rm.req(tr.hom.C, rm.rident(2))


def test_transition_coordinate_frame():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "1"])))
    tr = transition(f)
    assert tr.homogeneous
    r = ex.var("r")
    assert mat_is(tr.matrix_sym, [[1, 0], [0, r]])
    assert rm.req(tr.hom.B, rm.rmat([[0, 0], [0, 1]]))
    assert rm.req(tr.hom.C, rm.rmat([[1, 0], [0, -1]]))
    assert homomorphism_law_holds(tr)


def test_transition_darboux_chart_frame():
    mu, p1, u, x1 = (SCN3.total.var(c) for c in ("mu", "p1", "u", "x1"))
    chi = (u, x1, ex.neg(mu), ex.mul(mu, p1))
    f = chart_frame(SCN3, chi)
    tr = transition(f)
    assert tr.homogeneous
    r = ex.var("r")
    want = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, r, 0], [0, 0, 0, r]]
    assert mat_is(tr.matrix_sym, want)


def test_transition_inhomogeneous_frame():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "1 + mu"])))
    tr = transition(f)
    assert not tr.homogeneous
    assert tr.failure and "mu" in tr.failure


def test_transition_degenerate_frame():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["1", "0"])))
    with pytest.raises(DegeneracyError):
        transition(f)


def test_transition_reflection_parity():
    # |mu|^(1/2)-scaled frame: B = I/2, C is orthogonal with C^2 = I
    h = "sqrt(abs(mu))"
    f = Frame(SCN1, (vf(SCN1, [f"1/{h}", "0"]), vf(SCN1, ["0", h])))
    tr = transition(f)
    assert tr.homogeneous
    assert rm.req(tr.hom.B, rm.rscale(rm.rident(2), Fraction(1, 2)))
    assert rm.req(rm.rmul(tr.hom.C, tr.hom.C), rm.rident(2))


# -- build_frame --------------------------------------------------------------------

def test_build_frame_trivial_degree():
    sigma0 = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "1"])))
    built = build_frame(SCN1, sigma0, ex.ONE, trivial_hom(2))
    assert built.components[0].comps == (ex.ONE, ex.ZERO)
    assert built.components[1].comps == (ex.ZERO, SCN1.mu)


def test_build_frame_contact_lift():
    cf = Frame(SCN3, tuple(VectorField(SCN3.total,
                                       tuple(ex.rat(int(i == j)) for i in range(4)))
                           for j in range(4)))
    built = build_frame(SCN3, cf, ex.ONE, contact_lift(2))
    tr = transition(built)
    assert tr.homogeneous
    r = ex.var("r")
    assert mat_is(tr.matrix_sym, [[1, 0, 0, 0], [0, 1, 0, 0],
                                  [0, 0, r, 0], [0, 0, 0, r]])


def test_build_frame_reproduces_prescribed_degree():
    # any supported hom: the built frame's transition equals it
    sigma0 = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "1"])))
    for hom in (trivial_hom(2), sqrt_abs_lift(2)):
        built = build_frame(SCN1, sigma0, ex.ONE, hom)
        tr = transition(built)
        assert tr.homogeneous
        assert rm.req(tr.hom.B, hom.B)
    # on the section (mu = 1 slice) the frame restricts to sigma0
    built = build_frame(SCN1, sigma0, ex.ONE, trivial_hom(2))
    S = built.matrix()
    at_section = [[ex.subs(v, {"mu": ex.ONE}) for v in row] for row in S]
    assert at_section == [[ex.ONE, ex.ZERO], [ex.ZERO, ex.ONE]]


def test_build_frame_round_trip_up_to_gl():
    # rebuild a homogeneous frame from its own section restriction
    mu = SCN1.mu
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["x", "mu"])))
    tr = transition(f)
    assert tr.homogeneous
    section_matrix = [[ex.subs(v, {"mu": ex.ONE}) for v in row] for row in f.matrix()]
    sigma0 = frame_from_matrix(SCN1, section_matrix)
    rebuilt = build_frame(SCN1, sigma0, ex.ONE, tr.hom)
    assert frames_G_equivalent(f, rebuilt, GL(2))


# -- degree cosets ---------------------------------------------------------------

def test_degree_coset_darboux_identity():
    mu, p1, u, x1 = (SCN3.total.var(c) for c in ("mu", "p1", "u", "x1"))
    f = chart_frame(SCN3, (u, x1, ex.neg(mu), ex.mul(mu, p1)))
    rep = degree_coset(f, SP(2))
    assert rep.in_normalizer
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert is_zero(ex.sub(rep.quotient_value, ex.var("r")), pol)
    assert rep.quotient_value_neg1 == Fraction(-1)


def test_degree_coset_trivial_cosymplectic_frame():
    scn = LineBundleScenario("c3", ("x", "y", "z"))
    comps = [VectorField(scn.total, tuple(ex.rat(int(i == j)) for i in range(4)))
             for j in range(3)]
    comps.append(scn.euler())
    rep = degree_coset(Frame(scn, tuple(comps)), SP(2))
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert rep.in_normalizer
    assert is_zero(ex.sub(rep.quotient_value, ex.ONE), pol)
    assert rep.quotient_value_neg1 == Fraction(1)


def test_degree_coset_sqrt_abs():
    h = "sqrt(abs(mu))"
    f = Frame(SCN1, (vf(SCN1, [f"1/{h}", "0"]), vf(SCN1, ["0", h])))
    rep = degree_coset(f, O(2))
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert rep.in_normalizer
    assert is_zero(ex.sub(rep.quotient_value, ex.var("r")), pol)
    assert rep.quotient_value_neg1 == Fraction(1)


def test_degree_coset_invariance_failure():
    # diag(1, r) does not normalize O(2)
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "1"])))
    rep = degree_coset(f, O(2))
    assert not rep.in_normalizer
    assert rep.failure


def test_right_translation_preserves_coset():
    rng = random.Random(51)
    mu, p1, u, x1 = (SCN3.total.var(c) for c in ("mu", "p1", "u", "x1"))
    f = chart_frame(SCN3, (u, x1, ex.neg(mu), ex.mul(mu, p1)))
    g = rand_element(SP(2), rng)
    f2 = f.translate(g)
    rep = degree_coset(f2, SP(2))
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert rep.in_normalizer
    assert is_zero(ex.sub(rep.quotient_value, ex.var("r")), pol)
    assert frames_G_equivalent(f, f2, SP(2))


# -- G-equivalence ---------------------------------------------------------------

def test_frames_equivalent_constant_translation():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "mu"])))
    g = ((Fraction(1), Fraction(2)), (Fraction(0), Fraction(1)))
    assert frames_G_equivalent(f, f.translate(g), GL(2))


def test_frames_not_equivalent_outside_group():
    f = Frame(SCN1, (vf(SCN1, ["1", "0"]), vf(SCN1, ["0", "mu"])))
    stretch = ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(1)))
    assert not frames_G_equivalent(f, f.translate(stretch), O(2))


def test_two_darboux_charts_sp_equivalent():
    # u' = u + 1, x' = 2x, p' = p/2 preserves theta = du - p dx
    mu, p1, u, x1 = (SCN3.total.var(c) for c in ("mu", "p1", "u", "x1"))
    chi1 = (u, x1, ex.neg(mu), ex.mul(mu, p1))
    chi2 = (ex.add(u, ex.ONE), ex.mul(ex.rat(2), x1), ex.neg(mu),
            ex.mul(mu, ex.div(p1, ex.rat(2))))
    f1 = chart_frame(SCN3, chi1)
    f2 = chart_frame(SCN3, chi2)
    assert frames_G_equivalent(f1, f2, SP(2))


# -- homogeneous charts -------------------------------------------------------------

def test_chart_log_mu():
    x = SCN1.total.var("x")
    rep = is_homogeneous_chart(SCN1, (x, ex.log_(SCN1.mu)))
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert mat_is(rep.A_sym, [[1, 0], [0, 1]])
    assert is_zero(rep.b_sym[0], pol)
    assert is_zero(ex.sub(rep.b_sym[1], ex.log_(ex.var("r"))), pol)
    assert rep.A_neg1 is None   # domain is only the positive branch


def test_chart_darboux():
    mu, p1, u, x1 = (SCN3.total.var(c) for c in ("mu", "p1", "u", "x1"))
    rep = is_homogeneous_chart(SCN3, (u, x1, ex.neg(mu), ex.mul(mu, p1)))
    r = ex.var("r")
    assert mat_is(rep.A_sym, [[1, 0, 0, 0], [0, 1, 0, 0],
                              [0, 0, r, 0], [0, 0, 0, r]])
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert all(is_zero(b, pol) for b in rep.b_sym)
    assert rep.A_neg1 is not None
    want = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]
    assert rm.req(rep.A_neg1, rm.rmat(want))
    assert rep.b_neg1 == (0, 0, 0, 0)


def test_chart_mu_squared():
    x = SCN1.total.var("x")
    rep = is_homogeneous_chart(SCN1, (x, ex.pw(SCN1.mu, 2)))
    r = ex.var("r")
    assert mat_is(rep.A_sym, [[1, 0], [0, ex.pw(r, 2)]])
    pol = ZeroTestPolicy(constraints=(ex.Constraint("r", ">", 0),))
    assert all(is_zero(b, pol) for b in rep.b_sym)


def test_chart_not_homogeneous():
    x = SCN1.total.var("x")
    with pytest.raises(NotHomogeneousError):
        is_homogeneous_chart(SCN1, (x, ex.add(SCN1.mu, ex.pw(SCN1.mu, 2))))


def test_chart_degenerate_jacobian():
    x = SCN1.total.var("x")
    with pytest.raises(DegeneracyError):
        is_homogeneous_chart(SCN1, (x, x))
