"""Finitely generated rational polyhedral cones, fully exact.

Rays are primitive integer vectors, so "equal up to positive scaling" is
structural equality.  Membership and pointedness run an exact phase-1
simplex (Bland's rule, no tolerances) and always return a certificate:
nonnegative combination coefficients on the inside, a separating
functional on the outside.  Duals and facets come from an incremental
double description pass with generators inserted in input order, which
keeps facet lists reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

from .rational import QMat, QVec, rat

IVec = tuple[int, ...]


class ConeError(ValueError):
    pass


def _ivec_dot(a: Sequence, b: Sequence) -> Fraction | int:
    return sum(x * y for x, y in zip(a, b))


def canonicalize_ray(v) -> IVec:
    """Unique primitive integer vector positively proportional to v.

    Clears denominators, divides by the content.  The direction is kept:
    no sign flip, a ray and its negative stay distinct.
    """
    if isinstance(v, QVec):
        entries = list(v.entries)
    else:
        entries = [rat(e) for e in v]
    if not entries:
        raise ConeError("empty vector")
    if all(e == 0 for e in entries):
        raise ConeError("zero vector has no ray direction")
    lcm = 1
    for e in entries:
        lcm = lcm * e.denominator // gcd(lcm, e.denominator)
    ints = [int(e * lcm) for e in entries]
    content = 0
    for x in ints:
        content = gcd(content, abs(x))
    return tuple(x // content for x in ints)


# ---------------------------------------------------------------------------
# Exact phase-1 simplex
# ---------------------------------------------------------------------------

def _phase1(cols: list[Sequence], rhs: Sequence):
    """Feasibility of  sum_j lam_j * cols[j] = rhs,  lam >= 0.

    Returns ("feasible", lam) with exact nonnegative coefficients, or
    ("infeasible", y) with y . cols[j] <= 0 for every j and y . rhs > 0.
    Bland's rule throughout: deterministic and cycle-free.
    """
    d = len(rhs)
    n = len(cols)
    flip = [-1 if rhs[k] < 0 else 1 for k in range(d)]
    tab = []
    for k in range(d):
        row = [Fraction(flip[k] * cols[j][k]) for j in range(n)]
        row += [Fraction(1) if t == k else Fraction(0) for t in range(d)]
        row.append(Fraction(flip[k] * rhs[k]))
        tab.append(row)
    basis = [n + k for k in range(d)]
    total = n + d
    # reduced costs for cost vector (0,...,0, 1,...,1)
    z = [Fraction(0)] * (total + 1)
    for j in range(total + 1):
        z[j] = (Fraction(1) if n <= j < total else Fraction(0)) - sum(
            tab[k][j] for k in range(d))

    while True:
        enter = next((j for j in range(total) if z[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for k in range(d):
            if tab[k][enter] > 0:
                ratio = tab[k][total] / tab[k][enter]
                if best is None or ratio < best or (
                        ratio == best and basis[k] < basis[leave]):
                    best = ratio
                    leave = k
        if leave is None:
            raise ConeError("unbounded phase-1 objective (corrupt input)")
        piv = tab[leave][enter]
        tab[leave] = [e / piv for e in tab[leave]]
        for k in range(d):
            if k != leave and tab[k][enter] != 0:
                f = tab[k][enter]
                tab[k] = [a - f * b for a, b in zip(tab[k], tab[leave])]
        if z[enter] != 0:
            f = z[enter]
            z = [a - f * b for a, b in zip(z, tab[leave])]
        basis[leave] = enter

    objective = -z[total]
    if objective > 0:
        # duals sit under the artificial columns: z[n+t] = 1 - y_t
        y = [flip[t] * (1 - z[n + t]) for t in range(d)]
        return "infeasible", y
    lam = [Fraction(0)] * n
    for k in range(d):
        if basis[k] < n:
            lam[basis[k]] = tab[k][total]
    return "feasible", lam


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Membership:
    inside: bool
    coefficients: Optional[tuple[Fraction, ...]]  # aligned with generators
    separator: Optional[tuple[Fraction, ...]]


@dataclass(frozen=True)
class Pointedness:
    pointed: bool
    functional: Optional[tuple[Fraction, ...]]  # <w, g> > 0 for every g
    line_combination: Optional[tuple[Fraction, ...]]  # mu >= 0, sum mu g = 0
    line: Optional[IVec]


# ---------------------------------------------------------------------------
# Double description
# ---------------------------------------------------------------------------

def _dd_tight(ray: IVec, constraints: list[IVec]) -> frozenset[int]:
    return frozenset(i for i, c in enumerate(constraints)
                     if _ivec_dot(c, ray) == 0)


def dual_description(generators: Sequence[IVec], dim: int):
    """Minimal description (rays, lineality) of {w : w.g >= 0 for all g}.

    Generators are inserted in the given order; rays come back sorted.
    The lineality basis is empty exactly when the generators span R^dim.
    """
    lineality: list[IVec] = [
        tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
    rays: list[IVec] = []
    processed: list[IVec] = []
    for a in generators:
        vals = [_ivec_dot(a, u) for u in lineality]
        hit = next((i for i, s in enumerate(vals) if s != 0), None)
        if hit is not None:
            u0 = lineality[hit]
            s = vals[hit]
            if s < 0:
                u0 = tuple(-x for x in u0)
                s = -s
            new_lin = []
            for i, u in enumerate(lineality):
                if i == hit:
                    continue
                t = _ivec_dot(a, u)
                new_lin.append(canonicalize_ray(
                    tuple(s * x - t * y for x, y in zip(u, u0))))
            new_rays = []
            for r in rays:
                t = _ivec_dot(a, r)
                new_rays.append(canonicalize_ray(
                    tuple(s * x - t * y for x, y in zip(r, u0))))
            new_rays.append(canonicalize_ray(u0))
            lineality = new_lin
            rays = list(dict.fromkeys(new_rays))
        else:
            pos = [r for r in rays if _ivec_dot(a, r) > 0]
            zero = [r for r in rays if _ivec_dot(a, r) == 0]
            neg = [r for r in rays if _ivec_dot(a, r) < 0]
            if neg:
                tight = {r: _dd_tight(r, processed) for r in rays}
                fresh = []
                for p in pos:
                    for m in neg:
                        common = tight[p] & tight[m]
                        adjacent = not any(
                            r not in (p, m) and common <= tight[r]
                            for r in rays)
                        if adjacent:
                            ap = _ivec_dot(a, p)
                            am = _ivec_dot(a, m)
                            fresh.append(canonicalize_ray(tuple(
                                ap * x - am * y for x, y in zip(m, p))))
                rays = pos + zero + [
                    r for r in dict.fromkeys(fresh) if r not in pos + zero]
        processed.append(a)
    return sorted(rays), sorted(lineality)


# ---------------------------------------------------------------------------
# Cone
# ---------------------------------------------------------------------------

class Cone:
    """Polyhedral cone given by generators (canonical primitive rays).

    Immutable except for the write-once memoized facet list; queries are
    pure, so instances are safe to share across threads.
    """

    __slots__ = ("ambient_dim", "generators", "_facets", "_extreme")

    def __init__(self, ambient_dim: int, generators: Iterable = ()):
        if ambient_dim <= 0:
            raise ConeError("ambient dimension must be positive")
        seen: dict[IVec, None] = {}
        for g in generators:
            ray = canonicalize_ray(g)
            if len(ray) != ambient_dim:
                raise ConeError(
                    f"generator dim {len(ray)} != ambient {ambient_dim}")
            seen.setdefault(ray, None)
        self.ambient_dim = ambient_dim
        self.generators: tuple[IVec, ...] = tuple(seen)
        self._facets: Optional[tuple[IVec, ...]] = None
        self._extreme: Optional[tuple[IVec, ...]] = None

    def __repr__(self) -> str:
        return f"Cone(dim={self.ambient_dim}, gens={len(self.generators)})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Cone)
                and self.ambient_dim == other.ambient_dim
                and sorted(self.generators) == sorted(other.generators))

    def __hash__(self):
        return hash((self.ambient_dim, tuple(sorted(self.generators))))

    # -- queries ----------------------------------------------------------

    def rank(self) -> int:
        if not self.generators:
            return 0
        return _int_rank([list(g) for g in self.generators])

    def is_full_dimensional(self) -> bool:
        return self.rank() == self.ambient_dim

    def is_pointed(self) -> Pointedness:
        """Strict convexity with certificate.

        Pointed: a functional strictly positive on every generator.
        Not pointed: nonnegative coefficients mu, not all zero, with
        sum mu_j g_j = 0, exhibiting a line inside the cone.
        """
        if not self.generators:
            return Pointedness(True, tuple(Fraction(0) for _ in
                                           range(self.ambient_dim)),
                               None, None)
        cols = [g + (1,) for g in self.generators]
        rhs = tuple([0] * self.ambient_dim + [1])
        status, cert = _phase1(cols, rhs)
        if status == "infeasible":
            w = tuple(-y for y in cert[:-1])
            return Pointedness(True, w, None, None)
        mu = tuple(cert)
        first = next(j for j, m in enumerate(mu) if m > 0)
        return Pointedness(False, None, mu, self.generators[first])

    def membership(self, v) -> Membership:
        """Farkas-certified membership of a vector."""
        vv = [rat(e) for e in (v.entries if isinstance(v, QVec) else v)]
        if len(vv) != self.ambient_dim:
            raise ConeError("dimension mismatch")
        if all(e == 0 for e in vv):
            return Membership(True, tuple(Fraction(0)
                                          for _ in self.generators), None)
        if not self.generators:
            # separate v from the origin
            sep = tuple(-e for e in vv)
            return Membership(False, None, sep)
        status, cert = _phase1(list(self.generators), vv)
        if status == "feasible":
            return Membership(True, tuple(cert), None)
        return Membership(False, None, tuple(-y for y in cert))

    def contains(self, v) -> bool:
        return self.membership(v).inside

    def extreme_rays(self) -> tuple[IVec, ...]:
        """Minimal generating subset, sorted lexicographically.

        A generator is kept iff it is not in the cone of the others.  For a
        pointed cone that is equivalent to spanning a one-dimensional face,
        so each generator is tested by the rank of its tight constraints in
        the dual description (equalities from the dual's lineality count as
        always-tight).
        """
        if self._extreme is not None:
            return self._extreme
        pt = self.is_pointed()
        if not pt.pointed:
            raise ConeError(
                f"extreme rays undefined: cone contains the line through "
                f"{pt.line}")
        if len(self.generators) <= 1:
            result = tuple(self.generators)
            self._extreme = result
            return result
        normals, lineality = dual_description(self.generators,
                                              self.ambient_dim)
        survivors = []
        for g in self.generators:
            tight = [list(u) for u in lineality]
            tight += [list(n) for n in normals if _ivec_dot(n, g) == 0]
            if tight and _int_rank(tight) == self.ambient_dim - 1:
                survivors.append(g)
        result = tuple(sorted(survivors))
        self._extreme = result
        return result

    def dual(self) -> "Cone":
        """Dual cone {w : <w, g> >= 0 for all generators g}.

        For a full-dimensional input the generators of the result are
        exactly its extreme rays.  Otherwise the dual contains lines and
        both directions of a lineality basis are included as generators.
        """
        rays, lineality = dual_description(self.generators, self.ambient_dim)
        gens = list(rays)
        for u in lineality:
            gens.append(u)
            gens.append(tuple(-x for x in u))
        return Cone(self.ambient_dim, gens)

    def image(self, m: QMat) -> "Cone":
        """Image cone under a linear map; zero images dropped, result
        reduced to extreme rays."""
        if m.cols != self.ambient_dim:
            raise ConeError(
                f"map expects dim {m.cols}, cone has {self.ambient_dim}")
        images = []
        for g in self.generators:
            w = m.apply(QVec(g))
            if not w.is_zero():
                images.append(canonicalize_ray(w))
        if not images:
            return Cone(m.rows, [])
        cone = Cone(m.rows, images)
        return Cone(m.rows, cone.extreme_rays())

    def facets(self) -> tuple[IVec, ...]:
        """Supporting halfspace normals (<n, g> >= 0), memoized write-once."""
        if self._facets is not None:
            return self._facets
        pt = self.is_pointed()
        if not pt.pointed:
            raise ConeError("facet enumeration requires a pointed cone")
        if not self.is_full_dimensional():
            raise ConeError(
                f"facet enumeration requires a full-dimensional cone "
                f"(rank {self.rank()} < ambient {self.ambient_dim})")
        rays, lineality = dual_description(self.generators, self.ambient_dim)
        assert not lineality
        computed = tuple(rays)
        if self._facets is None:  # compute-then-publish
            self._facets = computed
        return self._facets

    def codim2_faces(self):
        """Codimension-two faces with the two facets containing each.

        Returns a list of ((facet_index_a, facet_index_b), face_rays).
        Every codimension-two face of a pointed full-dimensional cone lies
        in exactly two facets; violations raise, since they can only come
        from corrupt data.
        """
        normals = self.facets()
        ext = self.extreme_rays()
        d = self.ambient_dim
        result = []
        seen: dict[tuple[IVec, ...], tuple[int, int]] = {}
        for i in range(len(normals)):
            for j in range(i + 1, len(normals)):
                tight = tuple(g for g in ext
                              if _ivec_dot(normals[i], g) == 0
                              and _ivec_dot(normals[j], g) == 0)
                r = _int_rank([list(g) for g in tight]) if tight else 0
                if r != d - 2:
                    continue
                containing = [k for k in range(len(normals))
                              if all(_ivec_dot(normals[k], g) == 0
                                     for g in tight)]
                if tight and len(containing) != 2:
                    raise ConeError(
                        f"codim-2 face in {len(containing)} facets: {tight}")
                if tight in seen:
                    continue
                seen[tight] = (i, j)
                result.append(((i, j), tight))
        return result


def _int_rank(rows: list[list[int]]) -> int:
    """Rank by fraction-free elimination over the integers."""
    rows = [list(r) for r in rows if any(r)]
    rank = 0
    cols = len(rows[0]) if rows else 0
    col = 0
    while rows and col < cols:
        piv = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if piv is None:
            col += 1
            continue
        pivot = rows.pop(piv)
        rank += 1
        new_rows = []
        for r in rows:
            if r[col] != 0:
                r = [pivot[col] * a - r[col] * b for a, b in zip(r, pivot)]
            if any(r):
                new_rows.append(r)
        rows = new_rows
        col += 1
    return rank
