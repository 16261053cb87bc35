"""Operations on cones: polar, sums, images, containment, faces, projection."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .cone import Cone
from .linalg import IVector, RVector, project_onto_span, sq_norm, sub, vector
from .polyhedron import PolyhedronH


def dd_h_to_v(p: PolyhedronH) -> Cone:
    if not p.is_homogeneous():
        raise ValueError("double description needs a homogeneous system")
    c = p.to_cone()
    c.rays, c.ineqs
    return c


def dd_v_to_h(rays: Sequence[Sequence], lines: Sequence[Sequence] = (), dim: int | None = None) -> Cone:
    c = Cone.from_v(rays, lines, dim=dim)
    c.ineqs, c.rays
    return c


def polar(c: Cone) -> Cone:
    """{v : <v, x> <= 0 for all x in c}; both reps come for free."""
    return Cone(c.dim, h=(c.rays, c.lines), v=(c.ineqs, c.eqs),
                canonical_h=True, canonical_v=True)


def intersect(a: Cone, b: Cone) -> Cone:
    _same_dim(a, b)
    return Cone.from_h(a.ineqs + b.ineqs, a.eqs + b.eqs, dim=a.dim)


def intersect_all(cones: Sequence[Cone]) -> Cone:
    ineqs, eqs = [], []
    for c in cones:
        ineqs.extend(c.ineqs)
        eqs.extend(c.eqs)
    return Cone.from_h(ineqs, eqs, dim=cones[0].dim)


def minkowski_sum(a: Cone, b: Cone) -> Cone:
    _same_dim(a, b)
    return Cone.from_v(a.rays + b.rays, a.lines + b.lines, dim=a.dim)


def minkowski_diff(f1: Cone, f2: Cone) -> Cone:
    """F1 - F2 = {a - b : a in F1, b in F2}."""
    _same_dim(f1, f2)
    neg = tuple(tuple(-x for x in r) for r in f2.rays)
    return Cone.from_v(f1.rays + neg, f1.lines + f2.lines, dim=f1.dim)


def linear_image(m: Sequence[Sequence], c: Cone) -> Cone:
    rows = len(m)
    if m and len(m[0]) != c.dim:
        raise ValueError("matrix columns do not match the cone dimension")

    def apply(g):
        return tuple(sum(mij * gj for mij, gj in zip(row, g)) for row in m)

    return Cone.from_v([apply(r) for r in c.rays], [apply(l) for l in c.lines], dim=rows)


def linear_preimage(m: Sequence[Sequence], c: Cone) -> Cone:
    """{u : m u in c}; each constraint a becomes a^T m."""
    if len(m) != c.dim:
        raise ValueError("matrix rows do not match the cone dimension")
    cols = len(m[0]) if m else 0

    def pull(a):
        return tuple(sum(a[i] * m[i][j] for i in range(len(m))) for j in range(cols))

    return Cone.from_h([pull(a) for a in c.ineqs], [pull(a) for a in c.eqs], dim=cols)


def contains(big: Cone, small: Cone) -> tuple[bool, IVector | None]:
    """Whether small ⊆ big; on failure also a generator of small outside big."""
    _same_dim(big, small)
    for g in small.generators():
        if not big.contains_point(g):
            return False, g
    return True, None


def is_trivial(c: Cone) -> bool:
    return c.is_trivial()


def conv_pos(columns: Sequence[Sequence], dim: int | None = None) -> Cone:
    """Cone generated by the given column vectors."""
    return Cone.from_v(columns, (), dim=dim)


def face_ray_sets(k: Cone) -> list[frozenset[int]]:
    """Faces of k as sets of indices into k.rays, ordered by size then lexicographically.

    Every face is the lineality space plus the rays it contains; faces are
    generated by closing the facet incidence sets under intersection.
    """
    rays = k.rays
    full = frozenset(range(len(rays)))
    facets = [frozenset(i for i, r in enumerate(rays) if _idot(a, r) == 0) for a in k.ineqs]
    found = {full}
    frontier = [full]
    while frontier:
        nxt = []
        for f in frontier:
            for fac in facets:
                g = f & fac
                if g not in found:
                    found.add(g)
                    nxt.append(g)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def face_from_rays(k: Cone, ray_set) -> Cone:
    rays = tuple(k.rays[i] for i in sorted(ray_set))
    return Cone(k.dim, v=(rays, k.lines), canonical_v=True)


def faces_of_cone(k: Cone) -> list[Cone]:
    return [face_from_rays(k, s) for s in face_ray_sets(k)]


def project_onto_cone(c: Cone, p: Sequence) -> tuple[RVector, Fraction]:
    """Exact Euclidean projection and squared distance.

    The projection lies in the relative interior of some face F and there
    equals the orthogonal projection onto span(F); so the feasible
    span-projections over all faces contain it and it is the closest one.
    """
    p = vector(p)
    best = None
    for s in face_ray_sets(c):
        gens = [c.rays[i] for i in s] + list(c.lines)
        y = project_onto_span(gens, p, c.dim)
        if not c.contains_point(y):
            continue
        d2 = sq_norm(sub(p, y))
        if best is None or d2 < best[1]:
            best = (y, d2)
    assert best is not None
    return best


def _idot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _same_dim(a: Cone, b: Cone):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
