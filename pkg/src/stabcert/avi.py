"""Critical cones, face pairs and the critical face condition for affine VIs.

The solution map is S(q) = {x : 0 ∈ q + Mx + N_C(x)} with C polyhedral.  Near
a graph point everything is governed by the critical cone
K = T_C(x) ∩ [v]^⊥ with v = -Mx - q, and the normal cone to gph N_C is the
union over face pairs F2 ⊆ F1 of K of the products (F1 - F2)* × (F1 - F2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Sequence

from .errors import CqViolation, DirectionError, MembershipError, NonPolyhedralError
from .geometry import (
    Cone,
    PolyhedronH,
    contains,
    face_from_rays,
    face_ray_sets,
    intersect,
    linear_image,
    linear_preimage,
    minkowski_diff,
    minkowski_sum,
    normal_cone_poly,
    polar,
    tangent_cone_poly,
)
from .geometry.linalg import RMatrix, RVector, fmt_vec, mat_vec, matrix, neg, project_onto_span, transpose, vector


@dataclass(frozen=True)
class AviProblem:
    m: RMatrix
    c: PolyhedronH
    q_set: PolyhedronH
    q_is_domain: bool = False  # caller asserts q_set = dom S

    def __post_init__(self):
        n = len(self.m)
        if any(len(r) != n for r in self.m):
            raise ValueError("m must be square")
        if not isinstance(self.q_set, PolyhedronH) or not isinstance(self.c, PolyhedronH):
            raise NonPolyhedralError("C and Q must be given as PolyhedronH")
        if self.c.dim != n or self.q_set.dim != n:
            raise ValueError("dimensions of C and Q must match m")

    @property
    def n(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class FacePair:
    f1: Cone
    f2: Cone
    diff: Cone
    f1_rays: frozenset = field(default=frozenset(), compare=False)
    f2_rays: frozenset = field(default=frozenset(), compare=False)


class Necessity(str, Enum):
    SUFFICIENT_ONLY = "sufficient_only"
    SUFFICIENT_AND_NECESSARY = "sufficient_and_necessary"


@dataclass
class CritFaceVerdict:
    cq_holds: bool
    condition_holds: bool
    necessity: Necessity
    failing_pair: FacePair | None = None
    witness_ray: tuple | None = None
    pairs_checked: int = 0
    cq_witness: tuple | None = None
    graph_regular: bool = False

    @property
    def lipschitz_like(self) -> bool | None:
        """True when certified, False when refuted, None when undecided."""
        if self.condition_holds and (self.cq_holds or self.necessity is Necessity.SUFFICIENT_AND_NECESSARY):
            return True
        if not self.condition_holds and self.necessity is Necessity.SUFFICIENT_AND_NECESSARY:
            return False
        return None


def critical_cone(c: PolyhedronH, x: Sequence, v: Sequence) -> Cone:
    x, v = vector(x), vector(v)
    t = tangent_cone_poly(c, x)
    n_c = polar(t)
    if not n_c.contains_point(v):
        raise MembershipError(f"{fmt_vec(v)} is not a normal vector to C at {fmt_vec(x)}")
    return Cone.from_h(t.ineqs, t.eqs + ((v,) if any(v) else ()), dim=c.dim)


def enumerate_face_pairs(k: Cone) -> list[FacePair]:
    """All (F1, F2) with F2 ⊆ F1 faces of k, ordered by the faces' incidence sets."""
    sets = face_ray_sets(k)
    faces = [face_from_rays(k, s) for s in sets]
    pairs = []
    for i, s1 in enumerate(sets):
        for j, s2 in enumerate(sets):
            if s2 <= s1:
                pairs.append(FacePair(faces[i], faces[j], minkowski_diff(faces[i], faces[j]), s1, s2))
    return pairs


def normal_cone_gph_nc(c: PolyhedronH, x: Sequence, v: Sequence) -> list[tuple[Cone, Cone]]:
    k = critical_cone(c, x, v)
    return [(polar(p.diff), p.diff) for p in enumerate_face_pairs(k)]


def _filter_pairs(pairs: list[FacePair], x_dir: Sequence, v_dir: Sequence) -> list[FacePair]:
    out = []
    for p in pairs:
        if not p.f2.contains_point(x_dir):
            continue
        if any(sum(a * b for a, b in zip(g, v_dir)) != 0 for g in p.f1.generators()):
            continue
        out.append(p)
    return out


def _check_direction(k: Cone, x_dir: RVector, v_dir: RVector):
    kp = polar(k)
    orth = sum(a * b for a, b in zip(x_dir, v_dir)) == 0
    if not (k.contains_point(x_dir) and kp.contains_point(v_dir) and orth):
        raise DirectionError(
            f"({fmt_vec(x_dir)}, {fmt_vec(v_dir)}) is not in the graph of the normal cone map of K")


def normal_cone_gph_nc_near(c: PolyhedronH, x: Sequence, v: Sequence,
                            x_dir: Sequence, v_dir: Sequence) -> list[tuple[Cone, Cone]]:
    """Pieces of N_{gph N_C} at graph points (x, v) + t (x_dir, v_dir), small t > 0."""
    k = critical_cone(c, x, v)
    x_dir, v_dir = vector(x_dir), vector(v_dir)
    _check_direction(k, x_dir, v_dir)
    return [(polar(p.diff), p.diff) for p in _filter_pairs(enumerate_face_pairs(k), x_dir, v_dir)]


@lru_cache(maxsize=4096)
def _pair_cone(m: RMatrix, diff: Cone) -> Cone:
    """diff ∩ (M diff)*: the u with u in diff and M^T u in diff*."""
    return intersect(diff, polar(linear_image(m, diff)))


def _normal_at(p: AviProblem, q_bar: RVector, x_bar: RVector):
    if not p.q_set.contains(q_bar):
        raise MembershipError(f"q_bar {fmt_vec(q_bar)} is not in Q")
    if not p.c.contains(x_bar):
        raise MembershipError(f"x_bar {fmt_vec(x_bar)} is not in C")
    v_bar = neg([a + b for a, b in zip(mat_vec(p.m, x_bar), q_bar)])
    try:
        k = critical_cone(p.c, x_bar, v_bar)
    except MembershipError as exc:
        raise MembershipError(f"x_bar is not a solution for q_bar: {exc}") from None
    return v_bar, k


def check_generalized_critical_face(p: AviProblem, q_bar: Sequence, x_bar: Sequence) -> CritFaceVerdict:
    if not isinstance(p, AviProblem):
        raise NonPolyhedralError("expected an AviProblem with polyhedral C and Q")
    q_bar, x_bar = vector(q_bar), vector(x_bar)
    _, k = _normal_at(p, q_bar, x_bar)
    n_q = normal_cone_poly(p.q_set, q_bar)
    minus_n_q = n_q.negated()
    regular = k.is_subspace()
    necessary = p.q_is_domain or regular
    verdict = CritFaceVerdict(
        cq_holds=True, condition_holds=True,
        necessity=Necessity.SUFFICIENT_AND_NECESSARY if necessary else Necessity.SUFFICIENT_ONLY,
        graph_regular=regular)
    for pair in enumerate_face_pairs(k):
        verdict.pairs_checked += 1
        u = _pair_cone(p.m, pair.diff)
        if verdict.cq_holds:
            meet = intersect(n_q, u)
            if not meet.is_trivial():
                verdict.cq_holds = False
                verdict.cq_witness = meet.generators()[0]
        if verdict.condition_holds:
            ok, w = contains(minus_n_q, u)
            if not ok:
                verdict.condition_holds = False
                verdict.failing_pair = pair
                verdict.witness_ray = w
    return verdict


def classical_critical_face(m: RMatrix, c: PolyhedronH, q_bar: Sequence, x_bar: Sequence) -> tuple[bool, tuple | None]:
    """Unrestricted condition: diff ∩ (M diff)* = {0} for every face pair."""
    p = AviProblem(matrix(m), c, PolyhedronH.whole(len(m)))
    _, k = _normal_at(p, vector(q_bar), vector(x_bar))
    for pair in enumerate_face_pairs(k):
        u = _pair_cone(p.m, pair.diff)
        if not u.is_trivial():
            return False, u.generators()[0]
    return True, None


def _relint_point(c: Cone) -> tuple:
    """Sum of all rays: a point in the relative interior of the pointed part."""
    out = [0] * c.dim
    for r in c.rays:
        out = [a + b for a, b in zip(out, r)]
    return tuple(out)


def _statuses(p: AviProblem, q_bar: RVector, k: Cone, t_q: Cone):
    """Representative directions (q', x') of every status of the restricted graph.

    For faces F ⊆ H of K and a face G of T_Q(q̄), the cone of directions with
    q' ∈ G, x' ∈ F and v' = -Mx' - q' ∈ K* ∩ H^⊥ is built in (q', x')-space;
    a relative interior point of it has exactly the status (minimal face of
    x', face of K exposed by v', minimal face of q') whenever that status is
    realized at all.
    """
    n = p.n
    k_sets = face_ray_sets(k)
    k_faces = [face_from_rays(k, s) for s in k_sets]
    t_sets = face_ray_sets(t_q)
    t_faces = [face_from_rays(t_q, s) for s in t_sets]
    kp = polar(k)
    seen = set()
    out = []
    lift_q = tuple(tuple(int(i == j) for j in range(2 * n)) for i in range(n))
    lift_x = tuple(tuple(int(i + n == j) for j in range(2 * n)) for i in range(n))
    # v' = -(q' + M x') as a linear map of (q', x')
    v_map = tuple(tuple(-int(i == j) for j in range(n)) + tuple(-x for x in p.m[i]) for i in range(n))
    for fi, f in enumerate(k_faces):
        for hi, h in enumerate(k_faces):
            if not k_sets[fi] <= k_sets[hi]:
                continue
            v_cone = intersect(kp, Cone.from_h([], h.generators(), dim=n))
            for g in t_faces:
                cone = Cone.from_h(
                    linear_preimage(lift_x, f).ineqs + linear_preimage(lift_q, g).ineqs
                    + linear_preimage(v_map, v_cone).ineqs,
                    linear_preimage(lift_x, f).eqs + linear_preimage(lift_q, g).eqs
                    + linear_preimage(v_map, v_cone).eqs,
                    dim=2 * n)
                point = _relint_point(cone)
                if point in seen:
                    continue
                seen.add(point)
                out.append((point[:n], point[n:]))
    return out


def projcode_zero_upper(p: AviProblem, q_bar: Sequence, x_bar: Sequence) -> list[Cone]:
    """Cones whose union contains the projectional coderivative of S at (q̄, x̄) applied to 0.

    For each status (q', x') the set proj_{T_Q(q)}(-u + N_Q(q)) is computed,
    u ranging over diff ∩ (M diff)* for the filtered face pairs; the
    projection onto a cone T is linear on each region G + (T° ∩ G^⊥), G a
    face of T, so the image is a finite union of cones.
    """
    q_bar, x_bar = vector(q_bar), vector(x_bar)
    v_bar, k = _normal_at(p, q_bar, x_bar)
    n = p.n
    n_q = normal_cone_poly(p.q_set, q_bar)
    t_q = polar(n_q)
    pairs = enumerate_face_pairs(k)
    if not p.q_is_domain:
        for pair in pairs:
            meet = intersect(n_q, _pair_cone(p.m, pair.diff))
            if not meet.is_trivial():
                u = meet.generators()[0]
                raise CqViolation(f"basic qualification fails with u* = {list(u)}", u)
    out: list[Cone] = []
    seen = set()
    for q_dir, x_dir in _statuses(p, q_bar, k, t_q):
        v_dir = neg([a + b for a, b in zip(mat_vec(p.m, x_dir), q_dir)])
        n_qq = Cone.from_h(n_q.ineqs, n_q.eqs + ((q_dir,) if any(q_dir) else ()), dim=n)
        t_qq = polar(n_qq)
        for pair in _filter_pairs(pairs, x_dir, v_dir):
            z = minkowski_sum(_pair_cone(p.m, pair.diff).negated(), n_qq)
            for piece in _project_cone_onto_cone(z, t_qq):
                if piece not in seen:
                    seen.add(piece)
                    out.append(piece)
    return out


def _project_cone_onto_cone(z: Cone, t: Cone) -> list[Cone]:
    n = z.dim
    t_polar = polar(t)
    pieces = []
    for s in face_ray_sets(t):
        g = face_from_rays(t, s)
        normal_part = intersect(t_polar, Cone.from_h([], g.generators(), dim=n))
        region = minkowski_sum(g, normal_part)
        part = intersect(z, region)
        basis = g.generators()
        proj = tuple(project_onto_span(basis, e, n) for e in
                     (tuple(int(i == j) for j in range(n)) for i in range(n)))
        # proj holds the images of unit vectors, i.e. the columns of the projector
        pieces.append(linear_image(transpose(proj), part))
    return pieces
