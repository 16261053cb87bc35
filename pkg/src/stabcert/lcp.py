"""Linear complementarity problems: solving, slices, and the stability certificate.

S(q) = {x : x >= 0, Mx + q >= 0, x^T (Mx + q) = 0}.  A graph point (q, x) lies
in exactly one slice, addressed by the index combination

    I1 = {i : x_i = 0 < (Mx+q)_i},  I2 = {i : x_i > 0 = (Mx+q)_i},
    I3 = {i : x_i = 0 = (Mx+q)_i}.

Indices are 0-based internally and 1-based in every serialized form.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, nnls

from .errors import InvariantError, MembershipError, NotCertifiedError, NotQ0Error, SignError
from .geometry import (
    Cone,
    PolyhedronH,
    PolyhedronV,
    contains,
    conv_pos,
    linear_image,
    project_onto_cone,
    vrep,
)
from .geometry.linalg import (
    RMatrix,
    RVector,
    column,
    det,
    dot,
    fmt,
    fmt_vec,
    mat_vec,
    matrix,
    nullspace,
    vector,
)
from .parallel import ordered_map


@dataclass(frozen=True)
class LcpProblem:
    m: RMatrix

    def __post_init__(self):
        if any(len(r) != len(self.m) for r in self.m):
            raise ValueError("m must be square")

    @property
    def n(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class IndexCombination:
    i1: frozenset
    i2: frozenset
    i3: frozenset

    def __post_init__(self):
        if self.i1 & self.i2 or self.i1 & self.i3 or self.i2 & self.i3:
            raise ValueError("index sets must be disjoint")

    @classmethod
    def of(cls, i1=(), i2=(), i3=()) -> IndexCombination:
        """Build from 1-based index lists."""
        return cls(frozenset(i - 1 for i in i1), frozenset(i - 1 for i in i2), frozenset(i - 1 for i in i3))

    @property
    def n(self) -> int:
        return len(self.i1) + len(self.i2) + len(self.i3)

    def check_complete(self, n: int):
        if self.i1 | self.i2 | self.i3 != frozenset(range(n)):
            raise ValueError(f"index sets do not cover 1..{n}")

    def to_json(self) -> dict:
        return {name: sorted(i + 1 for i in getattr(self, name)) for name in ("i1", "i2", "i3")}

    def __str__(self) -> str:
        parts = (",".join(str(i + 1) for i in sorted(getattr(self, k))) for k in ("i1", "i2", "i3"))
        return "({{{}}}, {{{}}}, {{{}}})".format(*parts)


# solving


@dataclass(frozen=True)
class Piece:
    """One polyhedral part of a solution set: the H-system it came from and its canonical V-rep."""

    h: PolyhedronH = field(compare=False)
    v: PolyhedronV

    def contains_piece(self, other: Piece) -> bool:
        if not all(self.h.contains(x) for x in other.v.vertices):
            return False
        rec = [(a, 0) for a in self.h.a_le]
        dirs = list(other.v.rays) + list(other.v.lines) + [tuple(-x for x in l) for l in other.v.lines]
        for d in dirs:
            if any(dot(a, d) > 0 for a, _ in rec) or any(dot(a, d) != 0 for a in self.h.a_eq):
                return False
        return True


@dataclass(frozen=True)
class SolutionSet:
    pieces: tuple[Piece, ...]

    def key(self) -> frozenset:
        return frozenset(p.v for p in self.pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, SolutionSet) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def is_empty(self) -> bool:
        return not self.pieces

    def points(self) -> list[RVector]:
        """The isolated solutions; raises if some piece is not a point."""
        if any(not p.v.is_point() for p in self.pieces):
            raise ValueError("solution set has non-point pieces")
        return [p.v.vertices[0] for p in self.pieces]

    def representatives(self, reach: Fraction = Fraction(1)) -> list[RVector]:
        out = []
        for p in self.pieces:
            out.extend(p.v.sample_points(reach))
        return out

    def to_json(self) -> list:
        return [{"vertices": [fmt_vec(x) for x in p.v.vertices],
                 "rays": [fmt_vec(r) for r in p.v.rays],
                 "lines": [fmt_vec(l) for l in p.v.lines]} for p in self.pieces]


def _subsets(n: int):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


@dataclass(frozen=True)
class _Support:
    alpha: tuple
    comp: tuple
    d: int  # det of the integer principal block, 0 if singular
    adj: tuple  # adjugate rows, when nonsingular
    left_null: tuple  # y with y^T M_aa = 0, when singular


@lru_cache(maxsize=256)
def _common_denominator(m: RMatrix) -> int:
    return math.lcm(*(x.denominator for row in m for x in row))


@lru_cache(maxsize=256)
def _integer_scaled(m: RMatrix) -> tuple:
    den = _common_denominator(m)
    return tuple(tuple(int(x * den) for x in row) for row in m)


@lru_cache(maxsize=256)
def _support_table(m: RMatrix) -> tuple[_Support, ...]:
    mi = _integer_scaled(m)
    n = len(m)
    table = []
    for alpha in _subsets(n):
        comp = tuple(i for i in range(n) if i not in alpha)
        block = [[mi[i][j] for j in alpha] for i in alpha]
        d = int(det(block)) if alpha else 1
        if d:
            adj = _adjugate(block, d)
            table.append(_Support(alpha, comp, d, adj, ()))
        else:
            left = nullspace([[block[i][j] for i in range(len(alpha))] for j in range(len(alpha))], len(alpha))
            table.append(_Support(alpha, comp, 0, (), tuple(left)))
    return tuple(table)


def _adjugate(block, d) -> tuple:
    k = len(block)
    if k == 0:
        return ()
    # adj = d * inverse, computed exactly and known to be integral
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(block)]
    for c in range(k):
        piv = next(i for i in range(c, k) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(k):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return tuple(tuple(int(d * aug[i][k + j]) for j in range(k)) for i in range(k))


def _support_piece(m: RMatrix, alpha: tuple, comp: tuple, q: RVector) -> PolyhedronH:
    """{x : x_comp = 0, (Mx+q)_alpha = 0, x_alpha >= 0, (Mx+q)_comp >= 0}."""
    n = len(m)
    a_eq, b_eq, a_le, b_le = [], [], [], []
    for i in comp:
        a_eq.append([int(i == j) for j in range(n)])
        b_eq.append(0)
        a_le.append([-x for x in m[i]])
        b_le.append(q[i])
    for i in alpha:
        a_eq.append(list(m[i]))
        b_eq.append(-q[i])
        a_le.append([-int(i == j) for j in range(n)])
        b_le.append(0)
    return PolyhedronH.build(n, a_le, b_le, a_eq, b_eq)


def solve_lcp(m: Sequence[Sequence], q: Sequence) -> SolutionSet:
    """All solutions, one candidate piece per complementary support.

    Nonsingular principal blocks give at most a point; singular ones give
    the full polyhedral family.  Identical pieces and pieces contained in
    other pieces are dropped.
    """
    m, q = matrix(m), vector(q)
    n = len(m)
    if len(q) != n:
        raise ValueError("q has the wrong dimension")
    found: dict[PolyhedronV, Piece] = {}
    for sup in _support_table(m):
        alpha, comp = sup.alpha, sup.comp
        if sup.d:
            # M_aa = Mi_aa / den, so x_a = adj(Mi_aa) (-den q_a) / det(Mi_aa)
            rhs = [-q[i] for i in alpha]
            scale = _common_denominator(m)
            xa = [sum(sup.adj[r][c] * rhs[c] for c in range(len(alpha))) * scale / sup.d
                  for r in range(len(alpha))]
            if any(v < 0 for v in xa):
                continue
            x = [Fraction(0)] * n
            for i, v in zip(alpha, xa):
                x[i] = Fraction(v)
            w = [dot(m[i], x) + q[i] for i in comp]
            if any(v < 0 for v in w):
                continue
            x = tuple(x)
            pv = PolyhedronV(n, (x,), (), ())
            if pv not in found:
                found[pv] = Piece(_support_piece(m, alpha, comp, q), pv)
        else:
            qa = [q[i] for i in alpha]
            if any(dot(y, qa) != 0 for y in sup.left_null):
                continue
            h = _support_piece(m, alpha, comp, q)
            pv = vrep(h)
            if not pv.is_empty() and pv not in found:
                found[pv] = Piece(h, pv)
    pieces = list(found.values())
    maximal = [p for p in pieces if not any(o is not p and o.contains_piece(p) for o in pieces)]
    maximal.sort(key=lambda p: (p.v.vertices, p.v.rays, p.v.lines))
    return SolutionSet(tuple(maximal))


def is_solvable(m: Sequence[Sequence], q: Sequence) -> bool:
    """Whether S(q) is nonempty; integer sign tests, stops at the first hit."""
    m, q = matrix(m), vector(q)
    den = math.lcm(*(x.denominator for x in q))
    qi = [int(x * den) for x in q]
    mi = _integer_scaled(m)
    for sup in _support_table(m):
        alpha, comp = sup.alpha, sup.comp
        if sup.d:
            s = 1 if sup.d > 0 else -1
            y = [-sum(row[c] * qi[alpha[c]] for c in range(len(alpha))) for row in sup.adj]
            if any(s * v < 0 for v in y):
                continue
            if all(s * (sum(mi[i][alpha[c]] * y[c] for c in range(len(alpha))) + sup.d * qi[i]) >= 0
                   for i in comp):
                return True
        else:
            qa = [qi[i] for i in alpha]
            if any(dot(y, qa) != 0 for y in sup.left_null):
                continue
            if not vrep(_support_piece(m, alpha, comp, vector(q))).is_empty():
                return True
    return False


# slices


def _check_graph_point(m: RMatrix, q: RVector, x: RVector) -> RVector:
    if len(q) != len(m) or len(x) != len(m):
        raise ValueError("dimension mismatch")
    w = tuple(a + b for a, b in zip(mat_vec(m, x), q))
    if any(v < 0 for v in x) or any(v < 0 for v in w) or dot(x, w) != 0:
        raise MembershipError(f"x = {fmt_vec(x)} does not solve the LCP at q = {fmt_vec(q)}")
    return w


def classify(m: Sequence[Sequence], q: Sequence, x: Sequence) -> IndexCombination:
    m, q, x = matrix(m), vector(q), vector(x)
    w = _check_graph_point(m, q, x)
    i1 = frozenset(i for i in range(len(m)) if x[i] == 0 and w[i] > 0)
    i2 = frozenset(i for i in range(len(m)) if x[i] > 0)
    i3 = frozenset(i for i in range(len(m)) if x[i] == 0 and w[i] == 0)
    return IndexCombination(i1, i2, i3)


def reconstruct_q(m: Sequence[Sequence], combo: IndexCombination, x: Sequence, slack: Sequence) -> RVector:
    """q = sum over I1 of slack_i e_i minus sum over I2 of x_i M_{.,i}."""
    m, x, slack = matrix(m), vector(x), vector(slack)
    n = len(m)
    combo.check_complete(n)
    for i in range(n):
        if (x[i] > 0) != (i in combo.i2) or x[i] < 0:
            raise SignError(f"x_{i + 1} = {fmt(x[i])} does not match the combination {combo}")
        if (slack[i] > 0) != (i in combo.i1) or slack[i] < 0:
            raise SignError(f"slack_{i + 1} = {fmt(slack[i])} does not match the combination {combo}")
    q = [Fraction(0)] * n
    for i in combo.i1:
        q[i] += slack[i]
    for i in combo.i2:
        for r in range(n):
            q[r] -= m[r][i] * x[i]
    return tuple(q)


def neighboring_combinations(combo: IndexCombination) -> list[IndexCombination]:
    """Every i in I3 moves to I1, to I2, or stays; ternary order over sorted I3."""
    free = sorted(combo.i3)
    out = []
    for digits in itertools.product(range(3), repeat=len(free)):
        sets = [set(combo.i1), set(combo.i2), set()]
        for i, d in zip(free, digits):
            sets[d].add(i)
        out.append(IndexCombination(frozenset(sets[0]), frozenset(sets[1]), frozenset(sets[2])))
    return out


def all_combinations(n: int) -> list[IndexCombination]:
    return neighboring_combinations(IndexCombination(frozenset(), frozenset(), frozenset(range(n))))


# domain


def _cols(m: RMatrix) -> tuple[list, list]:
    n = len(m)
    e = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    minus_m = [tuple(-x for x in column(m, i)) for i in range(n)]
    return e, minus_m


def domain_cone(m: Sequence[Sequence]) -> Cone:
    m = matrix(m)
    e, minus_m = _cols(m)
    return conv_pos(e + minus_m, dim=len(m))


class Q0Status(str, Enum):
    CERTIFIED_YES_ON_RAYS = "certified_yes_on_rays"
    PROBABLE_YES = "probable_yes"
    NO = "no"


@dataclass(frozen=True)
class Q0Result:
    status: Q0Status
    witness: RVector | None = None
    samples: int = 0
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.status is not Q0Status.NO


def is_p_matrix(m: Sequence[Sequence]) -> bool:
    m = matrix(m)
    return all(det([[m[i][j] for j in a] for i in a]) > 0 for a in _subsets(len(m)) if a)


def is_q0(m: Sequence[Sequence], sample_count: int = 10_000, seed: int = 0) -> Q0Result:
    """Exact solvability on every extreme ray and line of dom S, then on samples.

    ``certified_yes_on_rays`` is returned when the rays pass and coverage of
    the whole cone follows exactly: M is a P-matrix, or the domain cone is
    itself one complementary cone.  Otherwise passing samples give
    ``probable_yes``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    return _is_q0(matrix(m), sample_count, seed)


@lru_cache(maxsize=256)
def _is_q0(m: RMatrix, sample_count: int, seed: int) -> Q0Result:
    n = len(m)
    dom = domain_cone(m)
    for g in dom.generators():
        if not is_solvable(m, g):
            return Q0Result(Q0Status.NO, vector(g), 0, "extreme ray of the domain cone is unsolvable")
    if is_p_matrix(m):
        return Q0Result(Q0Status.CERTIFIED_YES_ON_RAYS, None, 0, "P-matrix")
    e, minus_m = _cols(m)
    for alpha in _subsets(n):
        gens = [minus_m[i] if i in alpha else e[i] for i in range(n)]
        if conv_pos(gens, dim=n) == dom:
            return Q0Result(Q0Status.CERTIFIED_YES_ON_RAYS, None, 0,
                            f"domain cone is the complementary cone of support {[i + 1 for i in alpha]}")
    rng = random.Random(seed)
    mi = _integer_scaled(m)
    cols = e + [tuple(-mi[r][i] for r in range(n)) for i in range(n)]
    for k in range(sample_count):
        q = [0] * n
        for g in cols:
            if rng.random() < 0.3:
                continue
            w = rng.randint(1, 1000)
            q = [a + w * b for a, b in zip(q, g)]
        if not is_solvable(m, q):
            return Q0Result(Q0Status.NO, vector(q), k + 1, "sampled point of the domain cone is unsolvable")
    return Q0Result(Q0Status.PROBABLE_YES, None, sample_count, "all samples solvable")


def domain_normal_cone(m: Sequence[Sequence], combo: IndexCombination) -> Cone:
    """N(I1, I2, I3): the normal cone of dom S at any q of the slice."""
    m = matrix(m)
    e, minus_m = _cols(m)
    n = len(m)
    eqs = [e[i] for i in sorted(combo.i1)] + [minus_m[i] for i in sorted(combo.i2)]
    ineqs = [e[i] for i in range(n) if i not in combo.i1] + [minus_m[i] for i in range(n) if i not in combo.i2]
    return Cone.from_h(ineqs, eqs, dim=n)


def domain_tangent_cone(m: Sequence[Sequence], combo: IndexCombination) -> Cone:
    m = matrix(m)
    e, minus_m = _cols(m)
    n = len(m)
    rays = [e[i] for i in range(n) if i not in combo.i1] + [minus_m[i] for i in range(n) if i not in combo.i2]
    lines = [e[i] for i in sorted(combo.i1)] + [minus_m[i] for i in sorted(combo.i2)]
    return Cone.from_v(rays, lines, dim=n)


# W and W'


def _branch_digits(combo: IndexCombination):
    return itertools.product(range(3), repeat=len(combo.i3))


def _w_branch(m: RMatrix, combo: IndexCombination, digits) -> Cone:
    """u-space cone of one branch: digit 0 -> u_i = 0, 1 -> (M^T u)_i = 0, 2 -> both <= 0 (with -M^T u)."""
    n = len(m)
    e, minus_m = _cols(m)
    eqs, ineqs = [], []
    for i in combo.i1:
        eqs.append(e[i])
    for i in combo.i2:
        eqs.append(minus_m[i])
    for i, d in zip(sorted(combo.i3), digits):
        if d == 0:
            eqs.append(e[i])
        elif d == 1:
            eqs.append(minus_m[i])
        else:
            ineqs.append(e[i])
            ineqs.append(minus_m[i])
    return Cone.from_h(ineqs, eqs, dim=n)


def w_cone_branches(m: Sequence[Sequence], combo: IndexCombination) -> list[Cone]:
    """{u : (u, -M^T u) in W(combo)} as 3^|I3| cones in ternary order."""
    m = matrix(m)
    return [_w_branch(m, combo, d) for d in _branch_digits(combo)]


def w_prime_cone(m: Sequence[Sequence], combo: IndexCombination) -> Cone:
    """{u : (u, -M^T u) in W'(combo)}: every free line clamped to the nonpositive side."""
    m = matrix(m)
    n = len(m)
    e, minus_m = _cols(m)
    eqs, ineqs = [], []
    for i in range(n):
        mt_row = tuple(-x for x in minus_m[i])  # (M^T u)_i = column_i(M) . u
        if i in combo.i1:
            eqs.append(e[i])
            ineqs.append(tuple(-x for x in mt_row))
        elif i in combo.i2:
            ineqs.append(e[i])
            eqs.append(mt_row)
        else:
            ineqs.append(e[i])
            ineqs.append(tuple(-x for x in mt_row))
    return Cone.from_h(ineqs, eqs, dim=n)


def _mt_u(m: RMatrix, u: Sequence) -> list:
    return [sum(m[r][i] * u[r] for r in range(len(m))) for i in range(len(m))]


def in_w(m: Sequence[Sequence], combo: IndexCombination, u: Sequence) -> bool:
    """Pointwise test of (u, -M^T u) in W(combo)."""
    m = matrix(m)
    v = [-x for x in _mt_u(m, u)]
    for i in range(len(m)):
        if i in combo.i1 and u[i] != 0:
            return False
        if i in combo.i2 and v[i] != 0:
            return False
        if i in combo.i3 and not (u[i] == 0 or v[i] == 0 or (u[i] <= 0 and v[i] <= 0)):
            return False
    return True


def in_w_prime(m: Sequence[Sequence], combo: IndexCombination, u: Sequence) -> bool:
    m = matrix(m)
    v = [-x for x in _mt_u(m, u)]
    for i in range(len(m)):
        if i in combo.i1 and not (u[i] == 0 and v[i] <= 0):
            return False
        if i in combo.i2 and not (u[i] <= 0 and v[i] == 0):
            return False
        if i in combo.i3 and not (u[i] <= 0 and v[i] <= 0):
            return False
    return True


@dataclass(frozen=True)
class BranchResult:
    digits: tuple
    contained: bool
    witness: tuple | None

    def to_json(self) -> dict:
        return {"digits": list(self.digits), "contained": self.contained,
                "witness": None if self.witness is None else fmt_vec(self.witness)}


@dataclass
class LipschitzCertificate:
    verdict: bool
    combination: IndexCombination
    witness: tuple | None = None
    combination_trace: list = field(default_factory=list)
    modulus: float | None = None
    modulus_diagnostics: list = field(default_factory=list)
    q0: Q0Result | None = None


def check_lipschitz_domain(m: Sequence[Sequence], q_bar: Sequence, x_bar: Sequence, *,
                           q0_samples: int = 10_000, seed: int = 0) -> LipschitzCertificate:
    """Lipschitz-like property of S relative to dom S at (q̄, x̄): exact, necessary and sufficient.

    Holds iff every branch of {u : (u, -M^T u) in W} lies in W'.
    """
    m, q_bar, x_bar = matrix(m), vector(q_bar), vector(x_bar)
    combo = classify(m, q_bar, x_bar)
    q0 = is_q0(m, q0_samples, seed)
    if not q0.accepted:
        raise NotQ0Error(f"m is not Q0: {q0.reason}", q0.witness)
    wp = w_prime_cone(m, combo)
    results = []
    witness = None
    for digits in _branch_digits(combo):
        ok, w = contains(wp, _w_branch(m, combo, digits))
        results.append(BranchResult(digits, ok, w))
        if not ok and witness is None:
            witness = w
    if witness is not None and not (in_w(m, combo, witness) and not in_w_prime(m, combo, witness)):
        raise InvariantError(f"witness {list(witness)} failed its exact re-check")
    cert = LipschitzCertificate(witness is None, combo, witness, [(combo, results)], q0=q0)
    if not cert.verdict:
        cert.modulus = math.inf
    return cert


def normal_cone_gph_s(m: Sequence[Sequence], q: Sequence, x: Sequence) -> list[Cone]:
    """N_{gph S}(q, x) as images (u, M^T u + v) of the branches of W in (u, v)-space."""
    m, q, x = matrix(m), vector(q), vector(x)
    combo = classify(m, q, x)
    n = len(m)
    lift = [tuple(int(i == j) for j in range(2 * n)) for i in range(n)]
    lift += [tuple(m[j][i] for j in range(n)) + tuple(int(i == j) for j in range(n)) for i in range(n)]
    out = []
    for digits in _branch_digits(combo):
        eqs, ineqs = [], []
        u = lambda i: tuple(int(j == i) for j in range(2 * n))
        v = lambda i: tuple(int(j == n + i) for j in range(2 * n))
        for i in combo.i1:
            eqs.append(u(i))
        for i in combo.i2:
            eqs.append(v(i))
        for i, d in zip(sorted(combo.i3), digits):
            if d == 0:
                eqs.append(u(i))
            elif d == 1:
                eqs.append(v(i))
            else:
                ineqs += [u(i), v(i)]
        out.append(linear_image(lift, Cone.from_h(ineqs, eqs, dim=2 * n)))
    return out


# modulus


@dataclass(frozen=True)
class ComboSup:
    combination: IndexCombination
    value: float
    maximizer: tuple | None
    float_value: float

    def to_json(self) -> dict:
        return {"combination": self.combination.to_json(),
                "sup": _json_float(self.value),
                "float_sup": _json_float(self.float_value),
                "maximizer": None if self.maximizer is None else fmt_vec(self.maximizer)}


def _json_float(x: float):
    if math.isinf(x):
        return "inf"
    return round(x, 12)


def _exact_ratio(m: RMatrix, combo: IndexCombination, n_cone: Cone, u: Sequence) -> float:
    num2 = project_onto_cone(n_cone, u)[1]
    a = _mt_u(m, u)
    den2 = sum(a[i] ** 2 for i in combo.i2) + sum(max(Fraction(0), -a[i]) ** 2 for i in combo.i3)
    if den2 == 0:
        return 0.0 if num2 == 0 else math.inf
    return math.sqrt(num2 / den2)


def _combo_sup(args) -> ComboSup:
    m, combo, starts, tol, seed = args
    n = len(m)
    free = sorted(combo.i2 | combo.i3)
    if not free:
        return ComboSup(combo, 0.0, None, 0.0)
    n_cone = domain_normal_cone(m, combo)
    gens = n_cone.generators()
    g = np.array(gens, dtype=float).T if gens else np.zeros((n, 0))
    mf = np.array(m, dtype=float)
    i2 = np.array(sorted(combo.i2), dtype=int)
    i3 = np.array(sorted(combo.i3), dtype=int)
    free_idx = np.array(free)
    lower_only = [i in combo.i3 for i in free]

    def ratio(y):
        u = np.zeros(n)
        u[free_idx] = y
        nrm = np.linalg.norm(u)
        if nrm < 1e-300:
            return 0.0
        u = u / nrm
        num = nnls(g, u)[1] if g.shape[1] else 1.0
        a = mf.T @ u
        den = math.sqrt(float(np.sum(a[i2] ** 2) + np.sum(np.maximum(0.0, -a[i3]) ** 2)))
        if den < 1e-10:
            return 0.0
        return num / den

    rng = np.random.default_rng(seed)
    bounds = [(None, 0.0) if lo else (None, None) for lo in lower_only]
    start_points = []
    for k, lo in enumerate(lower_only):
        for s in ((-1.0,) if lo else (1.0, -1.0)):
            y = np.zeros(len(free))
            y[k] = s
            start_points.append(y)
    while len(start_points) < starts:
        y = rng.standard_normal(len(free))
        y[np.array(lower_only)] = -np.abs(y[np.array(lower_only)])
        start_points.append(y)
    results = []
    for y0 in start_points[:max(starts, 1)]:
        res = minimize(lambda y: -ratio(y), y0, method="L-BFGS-B", bounds=bounds,
                       options={"ftol": tol, "maxiter": 200})
        y = res.x if -res.fun >= ratio(y0) else y0
        results.append((ratio(y), tuple(y)))
    results.sort(key=lambda t: -t[0])
    best_float = results[0][0]
    best = (-1.0, None)
    for value, y in results[:8]:
        u = [Fraction(0)] * n
        for i, yi in zip(free, y):
            r = Fraction(yi).limit_denominator(10 ** 6)
            u[i] = min(r, Fraction(0)) if i in combo.i3 else r
        if all(x == 0 for x in u):
            continue
        exact = _exact_ratio(m, combo, n_cone, u)
        if exact > best[0]:
            best = (exact, tuple(u))
    if best[1] is None:
        return ComboSup(combo, 0.0, None, best_float)
    return ComboSup(combo, best[0], best[1], best_float)


def modulus(m: Sequence[Sequence], q_bar: Sequence, x_bar: Sequence, *, starts: int = 64,
            tol: float = 1e-6, seed: int = 0, certificate: LipschitzCertificate | None = None,
            q0_samples: int = 10_000) -> tuple[float, list[ComboSup]]:
    """Numerical estimate of the graphical modulus of S relative to dom S.

    The ratio is maximized per neighboring combination by multi-start
    L-BFGS-B over U (0-homogeneous, so effectively on the unit sphere), and
    the best candidates are re-evaluated exactly after rounding to rationals.
    """
    m, q_bar, x_bar = matrix(m), vector(q_bar), vector(x_bar)
    if certificate is None:
        try:
            certificate = check_lipschitz_domain(m, q_bar, x_bar, q0_samples=q0_samples, seed=seed)
        except NotQ0Error as exc:
            raise NotCertifiedError(str(exc)) from exc
    if not certificate.verdict:
        return math.inf, []
    combos = neighboring_combinations(classify(m, q_bar, x_bar))
    tasks = [(m, c, starts, tol, seed + k) for k, c in enumerate(combos)]
    sups = ordered_map(_combo_sup, tasks)
    return max((s.value for s in sups), default=0.0), sups
