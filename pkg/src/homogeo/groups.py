"""Matrix groups inside GL_{n+1}(R): membership, normalizers, splittings,
and one-parameter degree homomorphisms.

Everything on rational matrices is exactly decidable.  The supported
groups are Sp_k (A^t J A = J), GL_k(C) embedded as the J-commutant
(A^{-1} J A = J), O_m (A^t A = I) and GL_m itself.  Normalizer membership
is tested through the defining products

    Sp:  J^t B^t J B  = p(B) I          (p in R^x)
    GLC: J^{-1} B^{-1} J B = (+-) I     (parity in Z_2)
    O:   B^t B = p(B) I                 (p in R^x_+)

Degree homomorphisms r -> A(r) are stored as the pair (B, C) with
A(r) = exp(B log r) for r > 0 and A(r) = C exp(B log|r|) for r < 0,
subject to C^2 = I and CB = BC.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import List, Optional, Union

from . import expr as ex
from . import ratmat as rm
from .zerotest import ZeroTestPolicy, DEFAULT_POLICY, is_zero

__all__ = ["GroupId", "SP", "GLC", "O", "GL", "std_J", "member",
           "normalizer_product", "in_normalizer", "normalizer_p",
           "NotInNormalizerError", "splitting", "DegreeHom", "hom_eval",
           "hom_eval_symbolic", "hom_eval_symbolic_full", "coset_eq",
           "member_residual_symbolic", "rand_element", "rand_lie_element",
           "centralizer_basis", "contact_lift", "trivial_hom", "sqrt_abs_lift"]


class NotInNormalizerError(ValueError):
    pass


@dataclass(frozen=True)
class GroupId:
    family: str   # 'sp' | 'glc' | 'o' | 'gl'
    param: int    # k for sp/glc (ambient size 2k), m for o/gl

    def __post_init__(self):
        if self.family not in ("sp", "glc", "o", "gl"):
            raise ValueError(f"unknown group family {self.family!r}")
        if self.param < 1:
            raise ValueError("group parameter must be positive")

    @property
    def size(self) -> int:
        return 2 * self.param if self.family in ("sp", "glc") else self.param

    def __str__(self):
        names = {"sp": "Sp", "glc": "GL_C", "o": "O", "gl": "GL"}
        return f"{names[self.family]}({self.param})"


def SP(k: int) -> GroupId:
    return GroupId("sp", k)


def GLC(k: int) -> GroupId:
    return GroupId("glc", k)


def O(m: int) -> GroupId:
    return GroupId("o", m)


def GL(m: int) -> GroupId:
    return GroupId("gl", m)


def std_J(k: int) -> rm.Mat:
    """Block matrix ((0, I_k), (-I_k, 0)); J^2 = -I, J^t = -J."""
    n = 2 * k
    rows = []
    for i in range(n):
        row = [Fraction(0)] * n
        if i < k:
            row[k + i] = Fraction(1)
        else:
            row[i - k] = Fraction(-1)
        rows.append(tuple(row))
    return tuple(rows)


def _check_size(G: GroupId, M: rm.Mat):
    if len(M) != G.size or any(len(row) != G.size for row in M):
        raise ValueError(f"matrix size {len(M)} does not match {G} (size {G.size})")


def member(G: GroupId, M) -> bool:
    """Exact membership test in rational arithmetic."""
    M = rm.rmat(M)
    _check_size(G, M)
    if G.family == "sp":
        J = std_J(G.param)
        return rm.req(rm.rmul(rm.rmul(rm.rtranspose(M), J), M), J)
    if G.family == "glc":
        if rm.rdet(M) == 0:
            return False
        J = std_J(G.param)
        return rm.req(rm.rmul(M, J), rm.rmul(J, M))
    if G.family == "o":
        return rm.req(rm.rmul(rm.rtranspose(M), M), rm.rident(G.size))
    return rm.rdet(M) != 0


def normalizer_product(G: GroupId, B) -> rm.Mat:
    """The defining product whose scalarity characterizes N(G)."""
    B = rm.rmat(B)
    _check_size(G, B)
    if G.family == "sp":
        J = std_J(G.param)
        return rm.rmul(rm.rmul(rm.rmul(rm.rtranspose(J), rm.rtranspose(B)), J), B)
    if G.family == "glc":
        J = std_J(G.param)
        return rm.rmul(rm.rmul(rm.rinv(J), rm.rinv(B)), rm.rmul(J, B))
    if G.family == "o":
        return rm.rmul(rm.rtranspose(B), B)
    raise ValueError("GL is its own normalizer; no defining product")


def in_normalizer(G: GroupId, B) -> bool:
    if G.family == "gl":
        return rm.rdet(rm.rmat(B)) != 0
    try:
        prod = normalizer_product(G, B)
    except ZeroDivisionError:
        return False
    c = rm.is_scalar(prod)
    if c is None:
        return False
    if G.family == "sp":
        return c != 0
    if G.family == "glc":
        return c in (1, -1)
    return c > 0


def normalizer_p(G: GroupId, B) -> Union[Fraction, int]:
    """Quotient value of B in N(G): a nonzero rational for Sp, a parity
    (0 or 1) for GLC, a positive rational for O."""
    prod = normalizer_product(G, B)
    c = rm.is_scalar(prod)
    if c is None:
        raise NotInNormalizerError(f"matrix is not in N({G}): defining product "
                                   "is not scalar")
    if G.family == "sp":
        if c == 0:
            raise NotInNormalizerError("defining product is zero")
        return c
    if G.family == "glc":
        if c == 1:
            return 0
        if c == -1:
            return 1
        raise NotInNormalizerError(f"defining product is {c} I, expected +-I")
    if c <= 0:
        raise NotInNormalizerError("defining product must be positive")
    return c


def splitting(G: GroupId, value) -> rm.Mat:
    """Section of the normalizer quotient: Sp: diag(I, r I); GLC: I or the
    block swap V; O: r^(1/2) I (r must have an exact rational square root)."""
    n = G.size
    if G.family == "sp":
        value = Fraction(value)
        if value == 0:
            raise ValueError("quotient value must be nonzero")
        k = G.param
        return tuple(tuple(Fraction(int(i == j)) * (1 if i < k else value)
                           for j in range(n)) for i in range(n))
    if G.family == "glc":
        if value not in (0, 1):
            raise ValueError("quotient value must be the parity 0 or 1")
        if value == 0:
            return rm.rident(n)
        k = G.param
        rows = []
        for i in range(n):
            row = [Fraction(0)] * n
            row[(i + k) % n] = Fraction(1)
            rows.append(tuple(row))
        return tuple(rows)
    if G.family == "o":
        value = Fraction(value)
        if value <= 0:
            raise ValueError("quotient value must be positive")
        root = rm.rsqrt(value)
        if root is None:
            raise ValueError(f"{value} has no exact rational square root; "
                             "pick a square value for exact arithmetic")
        return rm.rscale(rm.rident(n), root)
    raise ValueError("GL has a trivial quotient")


# ---------------------------------------------------------------------------
# degree homomorphisms

@dataclass(frozen=True)
class DegreeHom:
    """One-parameter family A(r) = exp(B log r) (r>0), C exp(B log|r|) (r<0)."""

    B: rm.Mat
    C: rm.Mat

    def __post_init__(self):
        B, C = rm.rmat(self.B), rm.rmat(self.C)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        n = len(B)
        if len(C) != n:
            raise ValueError("B and C must have the same size")
        if not rm.req(rm.rmul(C, C), rm.rident(n)):
            raise ValueError("C^2 must be the identity")
        if not rm.req(rm.rmul(C, B), rm.rmul(B, C)):
            raise ValueError("C must commute with B (hence with exp(Bt))")

    @property
    def size(self) -> int:
        return len(self.B)


def trivial_hom(n: int) -> DegreeHom:
    return DegreeHom(rm.rzeros(n), rm.rident(n))


def contact_lift(k: int) -> DegreeHom:
    """diag(I_k, r I_k): B = diag(0, I), C = identity... A(-1) = diag(I, -I)."""
    n = 2 * k
    B = tuple(tuple(Fraction(int(i == j and i >= k)) for j in range(n))
              for i in range(n))
    C = tuple(tuple(Fraction(int(i == j)) * (1 if i < k else -1)
                    for j in range(n)) for i in range(n))
    return DegreeHom(B, C)


def sqrt_abs_lift(n: int) -> DegreeHom:
    """|r|^(1/2) I: B = I/2, C = I."""
    return DegreeHom(rm.rscale(rm.rident(n), Fraction(1, 2)), rm.rident(n))


def hom_eval(A: DegreeHom, q) -> rm.Mat:
    """Exact evaluation at a nonzero rational.  Supported when B is
    semisimple with rational eigenvalues lam and |q|^lam is rational
    (always true at q = +-1)."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("degree homomorphisms are defined on r != 0")
    aq = abs(q)
    n = A.size
    if aq == 1:
        out = rm.rident(n)
    else:
        eigs, projectors, nil = rm.spectral_projectors(A.B)
        if any(v != 0 for row in nil for v in row):
            raise rm.UnsupportedMatrixError(
                "exact evaluation needs a semisimple B (log terms otherwise)")
        out = rm.rzeros(n)
        for (lam, _), P in zip(eigs, projectors):
            # aq ** lam must be rational
            num, den = aq.numerator, aq.denominator
            root_num = _exact_pow(aq, lam)
            if root_num is None:
                raise rm.UnsupportedMatrixError(
                    f"{aq}^{lam} is irrational; pick a compatible rational")
            out = rm.radd(out, rm.rscale(P, root_num))
    if q < 0:
        out = rm.rmul(A.C, out)
    return out


def _exact_pow(q: Fraction, lam: Fraction) -> Optional[Fraction]:
    """q ** lam as an exact rational, or None."""
    if lam == 0:
        return Fraction(1)
    if lam.denominator == 1:
        return q ** lam.numerator
    root = _nth_root(q, lam.denominator)
    if root is None:
        return None
    return root ** lam.numerator


def _nth_root(q: Fraction, n: int) -> Optional[Fraction]:
    if q < 0:
        return None

    def iroot(m: int) -> Optional[int]:
        if m == 0:
            return 0
        r = round(m ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == m:
                return cand
        return None

    a, b = iroot(q.numerator), iroot(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def hom_eval_symbolic(A: DegreeHom, param: str = "r") -> List[List[ex.Expr]]:
    """A(r) on the branch r > 0 as a matrix of expressions:
    sum_i r^lam_i (log r)^j / j! P_i N^j.  Needs rational eigenvalues."""
    eigs, projectors, nil = rm.spectral_projectors(A.B)
    n = A.size
    r = ex.var(param)
    out = [[ex.ZERO] * n for _ in range(n)]
    for (lam, mult), P in zip(eigs, projectors):
        coeff_mat = P
        j = 0
        while True:
            scalar = ex.mul(ex.pw(r, lam),
                            ex.pw(ex.log_(r), j) if j else ex.ONE,
                            ex.rat(Fraction(1, factorial(j))))
            if any(v != 0 for row in coeff_mat for v in row):
                for i in range(n):
                    for jj in range(n):
                        if coeff_mat[i][jj] != 0:
                            out[i][jj] = ex.add(out[i][jj],
                                                ex.mul(scalar, ex.rat(coeff_mat[i][jj])))
            j += 1
            coeff_mat = rm.rmul(coeff_mat, nil)
            if all(v == 0 for row in coeff_mat for v in row) or j > n:
                break
    return out


def hom_eval_symbolic_full(A: DegreeHom, abs_value: ex.Expr,
                           sign_value: ex.Expr, invert: bool = False
                           ) -> List[List[ex.Expr]]:
    """A(r) (or its inverse) over both branches as a matrix of expressions,
    with |r| and sign(r) supplied as expressions:

        A(r) = exp(B log|r|) ((I + C)/2 + sign(r) (I - C)/2).

    All factors commute (C commutes with B, hence with every polynomial in
    B), and the inverse flips B while keeping C."""
    from . import symmat
    B = rm.rscale(A.B, -1) if invert else A.B
    eigs, projectors, nil = rm.spectral_projectors(B)
    n = A.size
    exp_part = [[ex.ZERO] * n for _ in range(n)]
    for (lam, mult), P in zip(eigs, projectors):
        coeff_mat = P
        j = 0
        while True:
            scalar = ex.mul(ex.pw(abs_value, lam),
                            ex.pw(ex.log_(abs_value), j) if j else ex.ONE,
                            ex.rat(Fraction(1, factorial(j))))
            for i in range(n):
                for jj in range(n):
                    if coeff_mat[i][jj] != 0:
                        exp_part[i][jj] = ex.add(
                            exp_part[i][jj],
                            ex.mul(scalar, ex.rat(coeff_mat[i][jj])))
            j += 1
            coeff_mat = rm.rmul(coeff_mat, nil)
            if all(v == 0 for row in coeff_mat for v in row) or j > n:
                break
    half = Fraction(1, 2)
    csplit = [[ex.add(ex.rat(half * (int(i == j) + A.C[i][j])),
                      ex.mul(sign_value,
                             ex.rat(half * (int(i == j) - A.C[i][j]))))
               for j in range(n)] for i in range(n)]
    return symmat.mat_mul(exp_part, csplit)


def member_residual_symbolic(G: GroupId, M: List[List[ex.Expr]]):
    """Entries that must vanish for M(r) to lie in G, plus invertibility
    requirement for GLC/GL (checked separately)."""
    from . import symmat
    n = len(M)
    if G.family == "sp":
        J = [[ex.rat(v) for v in row] for row in std_J(G.param)]
        res = symmat.mat_sub(symmat.mat_mul(symmat.mat_mul(symmat.transpose(M), J), M), J)
        return [v for row in res for v in row]
    if G.family == "glc":
        J = [[ex.rat(v) for v in row] for row in std_J(G.param)]
        res = symmat.mat_sub(symmat.mat_mul(M, J), symmat.mat_mul(J, M))
        return [v for row in res for v in row]
    if G.family == "o":
        res = symmat.mat_sub(symmat.mat_mul(symmat.transpose(M), M),
                             symmat.identity(n))
        return [v for row in res for v in row]
    return []


def _symbolic_in_normalizer(G: GroupId, M, policy: ZeroTestPolicy) -> bool:
    """Defining product of M(r) must be a scalar matrix for symbolic r > 0."""
    from . import symmat
    if G.family == "gl":
        return not is_zero(symmat.det(M),
                           policy.with_constraints((ex.Constraint("r", ">", 0),)))
    n = len(M)
    J = [[ex.rat(v) for v in row] for row in std_J(G.param)] \
        if G.family in ("sp", "glc") else None
    if G.family == "sp":
        P = symmat.mat_mul(symmat.mat_mul(symmat.mat_mul(symmat.transpose(J),
                                                         symmat.transpose(M)), J), M)
    elif G.family == "glc":
        Minv = [[ex.subs(v, {"r": ex.pw(ex.var("r"), Fraction(-1))}) for v in row]
                for row in M]
        P = symmat.mat_mul(symmat.mat_mul(symmat.mat_scale(J, ex.rat(-1)), Minv),
                           symmat.mat_mul(J, M))
    else:
        P = symmat.mat_mul(symmat.transpose(M), M)
    pol = policy.with_constraints((ex.Constraint("r", ">", 0),))
    for i in range(n):
        for j in range(n):
            target = P[0][0] if i == j else ex.ZERO
            if not is_zero(ex.sub(P[i][j], target), pol):
                return False
    return True


def coset_eq(G: GroupId, A1: DegreeHom, A2: DegreeHom,
             policy: ZeroTestPolicy = DEFAULT_POLICY) -> bool:
    """A1 = A2 mod G: A1(r) A2(r)^{-1} in G for symbolic r > 0 and at r = -1.

    Preconditions: both homs take values in N(G), checked exactly at
    r in {2, -1, 1/3} where the spectral form evaluates exactly, and
    symbolically through the defining product."""
    if A1.size != A2.size or A1.size != G.size:
        raise ValueError("size mismatch")
    for A in (A1, A2):
        for q in (Fraction(2), Fraction(-1), Fraction(1, 3)):
            try:
                M = hom_eval(A, q)
            except rm.UnsupportedMatrixError:
                continue
            if not in_normalizer(G, M):
                raise NotInNormalizerError(
                    f"hom value at r={q} is not in N({G})")
        if not _symbolic_in_normalizer(G, hom_eval_symbolic(A), policy):
            raise NotInNormalizerError(
                f"hom does not take values in N({G}) for symbolic r > 0")
    # A2(r)^{-1} = A2(1/r) since A2 is a homomorphism
    M1 = hom_eval_symbolic(A1)
    M2inv = [[ex.subs(v, {"r": ex.pw(ex.var("r"), Fraction(-1))}) for v in row]
             for row in hom_eval_symbolic(A2)]
    from . import symmat
    M = symmat.mat_mul(M1, M2inv)
    pol = policy.with_constraints((ex.Constraint("r", ">", 0),))
    for v in member_residual_symbolic(G, M):
        if not is_zero(v, pol):
            return False
    if G.family in ("glc", "gl"):
        if is_zero(symmat.det(M), pol):
            return False
    # reflection: exact rational check at r = -1
    C = rm.rmul(hom_eval(A1, -1), rm.rinv(hom_eval(A2, -1)))
    return member(G, C)


# ---------------------------------------------------------------------------
# random elements (exact, via the Cayley transform of Lie algebra elements)

def _rand_frac(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-4, 4), rng.randint(1, 4))


def rand_lie_element(G: GroupId, rng: random.Random) -> rm.Mat:
    n = G.size
    if G.family == "sp":
        k = G.param
        A = [[_rand_frac(rng) for _ in range(k)] for _ in range(k)]
        Bsym = [[Fraction(0)] * k for _ in range(k)]
        Csym = [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                Bsym[i][j] = Bsym[j][i] = _rand_frac(rng)
                Csym[i][j] = Csym[j][i] = _rand_frac(rng)
        rows = []
        for i in range(k):
            rows.append(tuple(A[i]) + tuple(Bsym[i]))
        for i in range(k):
            rows.append(tuple(Csym[i]) + tuple(-A[j][i] for j in range(k)))
        return tuple(rows)
    if G.family == "glc":
        k = G.param
        P = [[_rand_frac(rng) for _ in range(k)] for _ in range(k)]
        Q = [[_rand_frac(rng) for _ in range(k)] for _ in range(k)]
        rows = []
        for i in range(k):
            rows.append(tuple(P[i]) + tuple(-Q[i][j] for j in range(k)))
        for i in range(k):
            rows.append(tuple(Q[i]) + tuple(P[i]))
        return tuple(rows)
    if G.family == "o":
        A = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                v = _rand_frac(rng)
                A[i][j], A[j][i] = v, -v
        return tuple(tuple(row) for row in A)
    return tuple(tuple(_rand_frac(rng) for _ in range(n)) for _ in range(n))


def rand_element(G: GroupId, rng: random.Random) -> rm.Mat:
    """Random exact group element: Cayley transform (I-X)^{-1}(I+X) of a
    random Lie algebra element (O elements land in SO; a reflection is
    mixed in half the time for full O)."""
    n = G.size
    ident = rm.rident(n)
    for _ in range(50):
        X = rand_lie_element(G, rng)
        try:
            M = rm.rmul(rm.rinv(rm.rsub(ident, X)), rm.radd(ident, X))
        except ZeroDivisionError:
            continue
        if G.family == "gl" and rm.rdet(M) == 0:
            continue
        if G.family == "o" and rng.random() < 0.5:
            refl = [list(row) for row in rm.rident(n)]
            refl[0][0] = Fraction(-1)
            M = rm.rmul(M, tuple(tuple(row) for row in refl))
        if member(G, M):
            return M
    raise RuntimeError(f"could not sample an element of {G}")


def centralizer_basis(k: int) -> List[rm.Mat]:
    """Exact basis of the centralizer of the embedded GL_k(C) inside
    gl_{2k}(R), found by solving the commutation system against the block
    generators ((U,0),(0,U)) and ((0,U),(-U,0)) over a basis of U's."""
    n = 2 * k
    gens = []
    for a in range(k):
        for b in range(k):
            U = [[Fraction(int(i == a and j == b)) for j in range(k)] for i in range(k)]
            g1 = [[Fraction(0)] * n for _ in range(n)]
            g2 = [[Fraction(0)] * n for _ in range(n)]
            for i in range(k):
                for j in range(k):
                    g1[i][j] = U[i][j]
                    g1[k + i][k + j] = U[i][j]
                    g2[i][k + j] = U[i][j]
                    g2[k + i][j] = -U[i][j]
            gens.append(tuple(tuple(row) for row in g1))
            gens.append(tuple(tuple(row) for row in g2))
    rows = []
    for g in gens:
        # (Xg - gX)[i][j] = 0, unknowns X flattened row-major
        for i in range(n):
            for j in range(n):
                row = [Fraction(0)] * (n * n)
                for t in range(n):
                    row[i * n + t] += g[t][j]
                    row[t * n + j] -= g[i][t]
                rows.append(row)
    basis = rm.nullspace(rows)
    return [tuple(tuple(vec[i * n + j] for j in range(n)) for i in range(n))
            for vec in basis]
