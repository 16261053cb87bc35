"""Polyhedra in H-representation and their tangent and normal cones."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import MembershipError
from .cone import Cone
from .linalg import RMatrix, RVector, dot, fmt_mat, fmt_vec, integer_row, matrix, vector


@dataclass(frozen=True)
class PolyhedronH:
    """The set {x : a_le x <= b_le, a_eq x = b_eq} in R^dim."""

    dim: int
    a_le: RMatrix = ()
    b_le: RVector = ()
    a_eq: RMatrix = ()
    b_eq: RVector = ()

    def __post_init__(self):
        for name in ("a_le", "a_eq"):
            for row in getattr(self, name):
                if len(row) != self.dim:
                    raise ValueError(f"{name} row has {len(row)} columns, expected {self.dim}")
        if len(self.a_le) != len(self.b_le) or len(self.a_eq) != len(self.b_eq):
            raise ValueError("constraint matrix and right-hand side lengths differ")

    @classmethod
    def build(cls, dim: int, a_le=(), b_le=(), a_eq=(), b_eq=()) -> PolyhedronH:
        return cls(dim, matrix(a_le), vector(b_le), matrix(a_eq), vector(b_eq))

    @classmethod
    def orthant(cls, n: int) -> PolyhedronH:
        rows = [[-int(i == j) for j in range(n)] for i in range(n)]
        return cls.build(n, rows, [0] * n)

    @classmethod
    def whole(cls, n: int) -> PolyhedronH:
        return cls(n)

    @classmethod
    def from_cone(cls, c: Cone) -> PolyhedronH:
        return cls.build(c.dim, c.ineqs, [0] * len(c.ineqs), c.eqs, [0] * len(c.eqs))

    def is_homogeneous(self) -> bool:
        return all(b == 0 for b in self.b_le) and all(b == 0 for b in self.b_eq)

    def to_cone(self) -> Cone:
        if not self.is_homogeneous():
            raise ValueError("polyhedron is not a cone")
        return Cone.from_h(self.a_le, self.a_eq, dim=self.dim)

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise ValueError(f"point has dimension {len(x)}, expected {self.dim}")
        return (all(dot(a, x) <= b for a, b in zip(self.a_le, self.b_le))
                and all(dot(a, x) == b for a, b in zip(self.a_eq, self.b_eq)))

    def active(self, x: Sequence) -> list[int]:
        return [i for i, (a, b) in enumerate(zip(self.a_le, self.b_le)) if dot(a, x) == b]

    def to_json(self) -> dict:
        return {"a_le": fmt_mat(self.a_le), "b_le": fmt_vec(self.b_le),
                "a_eq": fmt_mat(self.a_eq), "b_eq": fmt_vec(self.b_eq)}

    @classmethod
    def from_json(cls, data: dict, dim: int) -> PolyhedronH:
        return cls.build(dim, data.get("a_le", []), data.get("b_le", []),
                         data.get("a_eq", []), data.get("b_eq", []))


@dataclass(frozen=True)
class PolyhedronV:
    """conv(vertices) + pos(rays) + span(lines), canonical and hashable.

    ``vertices`` are representatives of the minimal faces taken in the
    orthogonal complement of the lineality space.
    """

    dim: int
    vertices: tuple[RVector, ...]
    rays: tuple[tuple[int, ...], ...]
    lines: tuple[tuple[int, ...], ...]

    def is_empty(self) -> bool:
        return not self.vertices

    def is_point(self) -> bool:
        return len(self.vertices) == 1 and not self.rays and not self.lines

    def sample_points(self, reach: Fraction = Fraction(1)) -> list[RVector]:
        """Vertices plus each vertex pushed a distance at most ``reach`` along each ray and line."""
        out = list(self.vertices)
        dirs = list(self.rays) + list(self.lines) + [tuple(-x for x in l) for l in self.lines]
        for v in self.vertices:
            for d in dirs:
                t = reach / sum(x * x for x in d)
                out.append(tuple(vi + t * di for vi, di in zip(v, d)))
        return out


def vrep(p: PolyhedronH) -> PolyhedronV:
    """Canonical V-representation of a (possibly empty) polyhedron.

    Homogenize with a new last coordinate t >= 0 and run the cone kernel;
    rays with t > 0 give vertices, rays with t = 0 recession directions.
    """
    n = p.dim
    ineqs = [tuple(a) + (-b,) for a, b in zip(p.a_le, p.b_le)]
    ineqs.append((0,) * n + (-1,))
    eqs = [tuple(a) + (-b,) for a, b in zip(p.a_eq, p.b_eq)]
    cone = Cone.from_h(ineqs, eqs, dim=n + 1)
    vertices, rays = [], []
    for r in cone.rays:
        if r[n] > 0:
            vertices.append(tuple(Fraction(x, r[n]) for x in r[:n]))
        else:
            rays.append(tuple(r[:n]))
    if not vertices:
        return PolyhedronV(n, (), (), ())
    lines = tuple(tuple(l[:n]) for l in cone.lines)
    rays = tuple(sorted(set(integer_row(r) for r in rays if any(r))))
    return PolyhedronV(n, tuple(sorted(vertices)), rays, lines)


def tangent_cone_poly(p: PolyhedronH, x: Sequence) -> Cone:
    """T_P(x) = {d : active rows . d <= 0, a_eq d = 0}."""
    x = vector(x)
    if not p.contains(x):
        raise MembershipError(f"point {fmt_vec(x)} is not in the polyhedron")
    act = p.active(x)
    return Cone.from_h([p.a_le[i] for i in act], p.a_eq, dim=p.dim)


def normal_cone_poly(p: PolyhedronH, x: Sequence) -> Cone:
    """N_P(x) = pos(active rows) + span(equality rows)."""
    x = vector(x)
    if not p.contains(x):
        raise MembershipError(f"point {fmt_vec(x)} is not in the polyhedron")
    act = p.active(x)
    return Cone.from_v([p.a_le[i] for i in act], p.a_eq, dim=p.dim)
