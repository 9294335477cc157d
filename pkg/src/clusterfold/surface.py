"""Triangulated unpunctured surfaces as pure label combinatorics.

A triangulation is a list of counterclockwise triples of edge labels; internal
arcs are "1".."n", everything else is a boundary segment.  Arcs are crossing
sequences (no embedded curves anywhere), and the involution machinery
(restriction to the collapsed half, orbit splitting, reflection double) is
label rewriting on top of that.
"""

from __future__ import annotations

from collections import Counter

from .errors import ValidationError


class DuplicateLabelInTriangle(ValidationError):
    pass


class ArcDegreeError(ValidationError):
    pass


class NoSharedTriangle(ValidationError):
    pass


class AmbiguousTriangle(ValidationError):
    pass


class ImmediateBacktrack(ValidationError):
    pass


class NotFlippable(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class NotAnOrbit(ValidationError):
    pass


class MultipleTauNCrossings(ValidationError):
    pass


class ArcInTriangulation(ValidationError):
    pass


class SmoothingUnresolved(ValidationError):
    pass


class Triangulation:
    """Counterclockwise triangle triples over arc labels "1".."n" plus boundary labels."""

    def __init__(self, n: int, boundary, triangles, arc_labels=None):
        self.n = n
        if arc_labels is None:
            self.arc_labels = tuple(str(i) for i in range(1, n + 1))
        else:
            self.arc_labels = tuple(str(a) for a in arc_labels)
            if len(self.arc_labels) != n:
                raise ArcDegreeError(f"{len(self.arc_labels)} arc labels for n={n}")
        self._arc_set = set(self.arc_labels)
        self.boundary = tuple(str(b) for b in boundary)
        self.triangles = tuple(tuple(str(l) for l in tri) for tri in triangles)
        self._by_label: dict[str, list[int]] = {}
        self._validate()
        self.euler_data = self._euler()

    def _validate(self) -> None:
        arc_set = self._arc_set
        boundary_set = set(self.boundary)
        if arc_set & boundary_set:
            raise DuplicateLabelInTriangle("arc and boundary labels overlap")
        if len(boundary_set) != len(self.boundary):
            raise DuplicateLabelInTriangle("repeated boundary label")
        counts: Counter[str] = Counter()
        for idx, tri in enumerate(self.triangles):
            if len(tri) != 3:
                raise DuplicateLabelInTriangle(f"triangle {idx} does not have 3 edges")
            if len(set(tri)) != 3:
                raise DuplicateLabelInTriangle(f"triangle {idx} repeats a label: {tri}")
            for lab in tri:
                if lab not in arc_set and lab not in boundary_set:
                    raise DuplicateLabelInTriangle(f"unknown label {lab!r} in triangle {idx}")
                counts[lab] += 1
                self._by_label.setdefault(lab, []).append(idx)
        for lab in self.arc_labels:
            if counts[lab] != 2:
                raise ArcDegreeError(f"arc {lab} occurs in {counts[lab]} slots, expected 2")
        for lab in self.boundary:
            if counts[lab] != 1:
                raise ArcDegreeError(f"boundary {lab} occurs in {counts[lab]} slots, expected 1")

    def _euler(self) -> dict:
        # Walk corners around each marked point.  The corner after edge k of a
        # ccw triangle sits at the head of edge k; crossing the outgoing edge
        # lands on the corner of the neighbouring triangle where that edge is
        # traversed the other way.  Unpunctured surfaces have every vertex on
        # the boundary, so every corner chain must terminate at a boundary edge.
        nxt = {}
        starts = []
        for t, tri in enumerate(self.triangles):
            for k in range(3):
                out_edge = tri[(k + 1) % 3]
                if len(self._by_label.get(out_edge, ())) == 2:
                    a, b = self._by_label[out_edge]
                    other = b if a == t else a
                    m = self.triangles[other].index(out_edge)
                    nxt[(t, k)] = (other, m)
                if tri[k] not in self._arc_set:
                    starts.append((t, k))
        chains = 0
        visited = set()
        boundary_link = {}
        for c in starts:
            chains += 1
            tri, k = c
            in_edge = self.triangles[tri][k]
            cur = c
            while cur in nxt:
                cur = nxt[cur]
                if cur in visited:
                    raise ArcDegreeError("corner walk revisits a corner; bad gluing")
                visited.add(cur)
            t2, k2 = cur
            boundary_link[in_edge] = self.triangles[t2][(k2 + 1) % 3]
        all_corners = {(t, k) for t in range(len(self.triangles)) for k in range(3)}
        if all_corners - set(starts) - visited:
            # a corner on no boundary chain lies on a closed cycle: an
            # interior marked point, i.e. a puncture
            raise ArcDegreeError("triangulation has an interior vertex (punctured surface)")
        vertices = chains
        edges = self.n + len(self.boundary)
        faces = len(self.triangles)
        euler = vertices - edges + faces
        # boundary components: cycles of the edge-after-edge map along the boundary
        comps = 0
        left = set(boundary_link)
        while left:
            comps += 1
            e = next(iter(left))
            while e in left:
                left.discard(e)
                e = boundary_link[e]
        genus2 = 2 - comps - euler
        if genus2 < 0 or genus2 % 2:
            raise ArcDegreeError(f"inconsistent Euler characteristic {euler} with {comps} boundary components")
        return {"vertices": vertices, "edges": edges, "faces": faces,
                "euler": euler, "boundary_components": comps, "genus": genus2 // 2}

    # -- queries -----------------------------------------------------------

    def is_arc(self, label: str) -> bool:
        return label in self._arc_set

    def triangles_of(self, label: str) -> tuple[int, ...]:
        return tuple(self._by_label.get(label, ()))

    def third_edge(self, tri_index: int, a: str, b: str) -> str:
        tri = self.triangles[tri_index]
        rest = [l for l in tri if l not in (a, b)]
        if len(rest) != 1:
            raise ValueError(f"triangle {tri} does not contain exactly {a},{b}")
        return rest[0]

    def ccw_successor(self, tri_index: int, label: str) -> str:
        tri = self.triangles[tri_index]
        return tri[(tri.index(label) + 1) % 3]

    def ccw_predecessor(self, tri_index: int, label: str) -> str:
        tri = self.triangles[tri_index]
        return tri[(tri.index(label) - 1) % 3]

    @staticmethod
    def _canon(tri):
        rots = [tri[i:] + tri[:i] for i in range(3)]
        return min(rots)

    def __eq__(self, other):
        if not isinstance(other, Triangulation):
            return NotImplemented
        return (self.n, sorted(self.boundary), Counter(self._canon(t) for t in self.triangles)) == \
               (other.n, sorted(other.boundary), Counter(other._canon(t) for t in other.triangles))


def validate_triangulation(raw_triangles, n: int | None = None, boundary=None) -> Triangulation:
    """Build a Triangulation from a raw triple list, inferring n/boundary if omitted."""
    labels = {str(l) for tri in raw_triangles for l in tri}
    if n is None:
        n = 0
        while str(n + 1) in labels:
            n += 1
    arc_set = {str(i) for i in range(1, n + 1)}
    if boundary is None:
        boundary = sorted(labels - arc_set)
    return Triangulation(n, boundary, raw_triangles)


def signed_adjacency(t: Triangulation) -> list[list[int]]:
    """B(T): entry (i,j) counts triangles where arc i immediately follows arc j ccw, minus the reverse."""
    n = t.n
    index = {lab: i for i, lab in enumerate(t.arc_labels)}
    b = [[0] * n for _ in range(n)]
    for tri in t.triangles:
        for k in range(3):
            j, i = tri[k], tri[(k + 1) % 3]
            if t.is_arc(i) and t.is_arc(j):
                b[index[i]][index[j]] += 1
                b[index[j]][index[i]] -= 1
    return b


def flip(t: Triangulation, k: str) -> Triangulation:
    """Replace arc k by the other diagonal of its quadrilateral.

        a   /|   d            a   ___   d
           / |                   |\\
          /  |k        ->        | \\  k'
         /   |                   |  \\
        b    |   c            b  |___\\  c

    With ccw triples (k,a,b) and (k,c,d) the result is (k',d,a) and (k',b,c);
    the label k is reused for k'.
    """
    k = str(k)
    if not t.is_arc(k):
        raise NotFlippable(f"{k} is not an internal arc")
    tris = t.triangles_of(k)
    if len(tris) != 2 or tris[0] == tris[1]:
        raise NotFlippable(f"arc {k} is not flippable")
    t1, t2 = tris
    a = t.ccw_successor(t1, k)
    b = t.ccw_predecessor(t1, k)
    c = t.ccw_successor(t2, k)
    d = t.ccw_predecessor(t2, k)
    new_triangles = [tri for i, tri in enumerate(t.triangles) if i not in (t1, t2)]
    new_triangles.append((k, d, a))
    new_triangles.append((k, b, c))
    return Triangulation(t.n, t.boundary, new_triangles)


class ArcPath:
    """A transversal arc given by its ordered crossing sequence.

    `triangle_seq` lists the indices of the triangles traversed (one more
    entry than crossings).  Empty crossing list = boundary-parallel arc.
    """

    def __init__(self, crossings, triangle_seq, ends_at_basepoint: bool):
        self.crossings = tuple(str(c) for c in crossings)
        self.triangle_seq = tuple(triangle_seq)
        self.ends_at_basepoint = bool(ends_at_basepoint)

    def __repr__(self):
        suffix = " ->■" if self.ends_at_basepoint else ""
        return f"ArcPath({','.join(self.crossings) or 'boundary'}{suffix})"

    def __eq__(self, other):
        if not isinstance(other, ArcPath):
            return NotImplemented
        return (self.crossings, self.triangle_seq, self.ends_at_basepoint) == \
               (other.crossings, other.triangle_seq, other.ends_at_basepoint)


class CollapsedTriangulation:
    """A triangulation with a marked basepoint triangle (tau_n, b_L, b_R).

    The basepoint triangle has two boundary edges meeting at the collapsed
    point; every arc "to the basepoint" crosses tau_n last and terminates
    there.
    """

    def __init__(self, base: Triangulation, tau_n: str, basepoint_triangle):
        self.base = base
        self.tau_n = str(tau_n)
        want = tuple(str(l) for l in basepoint_triangle)
        matches = [i for i, tri in enumerate(base.triangles) if Counter(tri) == Counter(want)]
        if not matches:
            raise NotAdmissible(f"basepoint triangle {want} not present")
        self.basepoint_index = matches[0]
        self.basepoint_triangle = base.triangles[self.basepoint_index]
        if not base.is_arc(self.tau_n):
            raise NotAdmissible(f"tau_n {self.tau_n} is not an arc")
        if self.tau_n not in self.basepoint_triangle:
            raise NotAdmissible("tau_n must be an edge of the basepoint triangle")
        others = [l for l in self.basepoint_triangle if l != self.tau_n]
        if any(base.is_arc(l) for l in others):
            raise NotAdmissible("basepoint triangle must have two boundary edges")
        side = [i for i in base.triangles_of(self.tau_n) if i != self.basepoint_index]
        if len(side) != 1:
            raise NotAdmissible("tau_n must separate the basepoint triangle from one neighbor")
        self.neighbor_index = side[0]
        self.neighbor_triangle = base.triangles[self.neighbor_index]

    @property
    def n(self):
        return self.base.n

    def prev_arc(self) -> str | None:
        """The internal arc crossed right after tau_n when leaving the basepoint.

        On the supported surfaces the neighbor triangle carries exactly one
        other internal arc; None when tau_n's neighbor triangle has none.
        """
        others = [l for l in self.neighbor_triangle if l != self.tau_n and self.base.is_arc(l)]
        if len(others) > 1:
            raise NotAdmissible(
                "neighbor triangle of tau_n has two internal arcs; orbit expansion not supported here")
        return others[0] if others else None


def validate_arc(t: Triangulation, crossings, hints=None, to_basepoint=False,
                 collapsed: CollapsedTriangulation | None = None) -> ArcPath:
    """Resolve a crossing sequence into a triangle walk.

    The walk is forced after the first step: entering triangle D via arc c,
    the next triangle is the other triangle of the next crossed arc.  Hints
    (triangle indices, length = crossings + 1) are only needed when the first
    shared triangle is ambiguous, which happens on annuli.
    """
    crossings = [str(c) for c in crossings]
    if to_basepoint and collapsed is None:
        raise ValueError("to_basepoint requires the collapsed triangulation")
    if not crossings:
        return ArcPath((), (), False)
    for c in crossings:
        if not t.is_arc(c):
            raise NoSharedTriangle(f"{c} is not an internal arc")
    for a, b in zip(crossings, crossings[1:]):
        if a == b:
            raise ImmediateBacktrack(f"arc crosses {a} twice in a row")

    if to_basepoint:
        if crossings[-1] != collapsed.tau_n:
            raise NoSharedTriangle(f"arc to basepoint must cross {collapsed.tau_n} last")
        if collapsed.tau_n in crossings[:-1]:
            raise MultipleTauNCrossings("tau_n crossed more than once")

    d = len(crossings)
    if hints is not None:
        seq = [int(h) for h in hints]
        if len(seq) != d + 1:
            raise AmbiguousTriangle(f"need {d + 1} triangle hints, got {len(seq)}")
    else:
        seq = None

    # middle triangles: shared between consecutive crossings
    walk: list[int] = [None] * (d + 1)
    for j in range(1, d):
        shared = set(t.triangles_of(crossings[j - 1])) & set(t.triangles_of(crossings[j]))
        if not shared:
            raise NoSharedTriangle(f"{crossings[j-1]} and {crossings[j]} bound no common triangle")
        if seq is not None:
            if seq[j] not in shared:
                raise NoSharedTriangle(f"hint {seq[j]} does not contain {crossings[j-1]},{crossings[j]}")
            walk[j] = seq[j]
        elif len(shared) == 1:
            walk[j] = next(iter(shared))
        else:
            walk[j] = None  # fix up by forcing below

    if to_basepoint:
        walk[d] = collapsed.basepoint_index
    elif seq is not None:
        walk[d] = seq[d]

    # force forward: after crossing arc c out of triangle walk[j-1], the next
    # triangle is the other triangle of c
    for j in range(1, d + 1):
        if walk[j - 1] is None:
            continue
        tris = t.triangles_of(crossings[j - 1])
        if walk[j - 1] not in tris:
            raise NoSharedTriangle(f"triangle {walk[j-1]} does not contain {crossings[j-1]}")
        other = tris[1] if tris[0] == walk[j - 1] else tris[0]
        if walk[j] is None:
            walk[j] = other
        elif walk[j] != other:
            raise NoSharedTriangle(
                f"walk is not transversal at crossing {j}: {walk[j]} vs forced {other}")
    # force backward from any fixed point (covers to_basepoint and hinted ends)
    for j in range(d, 0, -1):
        if walk[j] is None:
            continue
        tris = t.triangles_of(crossings[j - 1])
        if walk[j] not in tris:
            raise NoSharedTriangle(f"triangle {walk[j]} does not contain {crossings[j-1]}")
        other = tris[1] if tris[0] == walk[j] else tris[0]
        if walk[j - 1] is None:
            walk[j - 1] = other
        elif walk[j - 1] != other:
            raise NoSharedTriangle(
                f"walk is not transversal at crossing {j}: {walk[j-1]} vs forced {other}")

    if walk[0] is None or any(w is None for w in walk):
        raise AmbiguousTriangle(
            "triangle walk is ambiguous (two shared triangles); pass explicit hints")
    # each middle step must really be transversal: consecutive crossings lie in walk[j]
    for j in range(1, d):
        tri = t.triangles[walk[j]]
        if crossings[j - 1] not in tri or crossings[j] not in tri:
            raise NoSharedTriangle(f"triangle {walk[j]} misses a required crossing")
    return ArcPath(crossings, walk, to_basepoint)


class SigmaTriangulation:
    """An involution-stable triangulation of the double surface.

    `involution` swaps label i with i' (and boundary labels likewise) and
    fixes the single invariant arc.  Internal arcs are n unprimed, the
    invariant one, and n-1 primed partners; the stored triples must be mapped
    to themselves as a multiset by the involution (orientation is preserved,
    so cyclic order is kept).
    """

    def __init__(self, triangulation: Triangulation, involution: dict, invariant_arc: str):
        self.full = triangulation
        self.invariant_arc = str(invariant_arc)
        inv = {str(k): str(v) for k, v in involution.items()}
        for k, v in list(inv.items()):
            if inv.get(v) != k:
                raise NotAdmissible(f"involution not self-inverse at {k}")
        self.involution = inv
        self._validate()

    def _validate(self) -> None:
        t = self.full
        if not t.is_arc(self.invariant_arc):
            raise NotAdmissible("invariant arc missing")
        fixed = [l for l in t.arc_labels if self.involution.get(l, l) == l]
        if fixed != [self.invariant_arc]:
            raise NotAdmissible(f"expected exactly one invariant arc, got {fixed}")
        for lab in list(t.arc_labels) + list(t.boundary):
            if lab not in self.involution:
                raise NotAdmissible(f"involution undefined on {lab}")
        image = Counter(tuple(self.involution[l] for l in tri) for tri in t.triangles)
        # cyclic rotations of a triple are the same triangle
        def canon(tri):
            rots = [tri[i:] + tri[:i] for i in range(3)]
            return min(rots)
        have = Counter(canon(tri) for tri in t.triangles)
        want = Counter(canon(tri) for tri in image)
        if have != want:
            raise NotAdmissible("triangle list is not involution-stable")
        primed = {l for l in t.arc_labels if l.endswith("'")}
        unprimed = {l for l in t.arc_labels if not l.endswith("'") and l != self.invariant_arc}
        for tri in t.triangles:
            arcs = [l for l in tri if t.is_arc(l) and l != self.invariant_arc]
            if any(a in primed for a in arcs) and any(a in unprimed for a in arcs):
                raise NotAdmissible(f"triangle {tri} mixes primed and unprimed arcs")

    def sigma(self, label: str) -> str:
        return self.involution[label]


def _strip_prime(label: str) -> str:
    return label[:-1] if label.endswith("'") else label


def restrict_triangulation(s: SigmaTriangulation) -> CollapsedTriangulation:
    """Collapse the primed half: keep unprimed triangles, cap tau_n with (tau_n, bL, bR)."""
    t = s.full
    tau = s.invariant_arc
    keep = []
    for tri in t.triangles:
        arcs = [l for l in tri]
        if any(l.endswith("'") for l in arcs):
            continue
        keep.append(tri)
    # the flank triangle of tau_n on the primed side was dropped with the rest;
    # exactly one kept triangle still contains tau_n
    holders = [tri for tri in keep if tau in tri]
    if len(holders) != 1:
        raise NotAdmissible(f"expected one unprimed triangle on tau_n, found {len(holders)}")
    keep.append((tau, "bL", "bR"))
    labels = {l for tri in keep for l in tri}
    arcs = sorted((l for l in labels if t.is_arc(l)), key=int)
    n = len(arcs)
    if arcs != [str(i) for i in range(1, n + 1)]:
        raise NotAdmissible(f"unprimed arcs are not labeled 1..{n}: {arcs}")
    if tau != str(n):
        raise NotAdmissible(f"invariant arc must carry the top label {n}")
    boundary = sorted(labels - set(arcs))
    base = Triangulation(n, boundary, keep)
    return CollapsedTriangulation(base, tau, (tau, "bL", "bR"))


class OrbitSpec:
    def __init__(self, kind: str, gamma1: ArcPath, gamma2: ArcPath | None = None):
        if kind not in ("one", "two"):
            raise NotAnOrbit(f"unknown orbit kind {kind!r}")
        if kind == "two" and gamma2 is None:
            raise NotAnOrbit("kind two needs two arcs")
        self.kind = kind
        self.gamma1 = gamma1
        self.gamma2 = gamma2

    def __repr__(self):
        if self.kind == "one":
            return f"OrbitSpec(one, {self.gamma1!r})"
        return f"OrbitSpec(two, {self.gamma1!r}, {self.gamma2!r})"


def _sigma_crossings(s: SigmaTriangulation, crossings):
    return [s.sigma(c) for c in crossings]


def restrict_orbit(s: SigmaTriangulation, arcs, collapsed: CollapsedTriangulation | None = None,
                   hints=None) -> OrbitSpec:
    """Split a sigma-orbit of arcs on the double surface into basepoint arcs.

    `arcs` is a list with one crossing sequence (sigma-invariant arc) or two
    (a sigma-pair).  Returns the restricted OrbitSpec over the collapsed
    triangulation; gamma1/gamma2 ordering for kind two is settled by the
    caller (snake module) against the gluing convention.
    """
    if collapsed is None:
        collapsed = restrict_triangulation(s)
    tau = s.invariant_arc

    seqs = [[str(c) for c in a] for a in arcs]
    if len(seqs) == 1:
        cr = seqs[0]
        back = [s.sigma(c) for c in reversed(cr)]
        if back != cr:
            raise NotAnOrbit("single arc given but it is not sigma-invariant")
        if tau not in cr:
            raise NotAnOrbit("sigma-invariant arc must cross the invariant arc")
        if cr.count(tau) != 1:
            raise MultipleTauNCrossings("invariant arc crossed more than once")
        pos = cr.index(tau)
        left = cr[:pos + 1]
        if any(c.endswith("'") for c in left):
            left = [_strip_prime(c) for c in reversed(cr[pos:])]
        gamma1 = validate_arc(collapsed.base, left, hints=hints, to_basepoint=True,
                              collapsed=collapsed)
        return OrbitSpec("one", gamma1)

    if len(seqs) != 2:
        raise NotAnOrbit("an orbit is one invariant arc or a pair")
    a, b = seqs
    sb = [s.sigma(c) for c in b]
    if sb != a and list(reversed(sb)) != a:
        raise NotAnOrbit("the two arcs are not exchanged by sigma")
    counts = (a.count(tau), b.count(tau))
    if counts == (0, 0):
        rep = None
        for cand in (a, b):
            if all(not c.endswith("'") for c in cand):
                rep = cand
                break
        if rep is None:
            raise NotAnOrbit("pair avoids the invariant arc but is not confined to one half")
        gamma1 = validate_arc(collapsed.base, rep, hints=hints)
        return OrbitSpec("one", gamma1)
    if counts != (1, 1):
        raise MultipleTauNCrossings(f"invariant arc crossed {counts} times")

    halves = []
    for cr in (a, b):
        pos = cr.index(tau)
        left = cr[:pos + 1]
        if any(c.endswith("'") for c in left):
            left = [_strip_prime(c) for c in reversed(cr[pos:])]
        if any(c.endswith("'") for c in left):
            raise NotAnOrbit(f"could not extract an unprimed half from {cr}")
        halves.append(left)
    g1 = validate_arc(collapsed.base, halves[0], to_basepoint=True, collapsed=collapsed)
    g2 = validate_arc(collapsed.base, halves[1], to_basepoint=True, collapsed=collapsed)
    return OrbitSpec("two", g1, g2)


def _carry_corner(t: Triangulation, tri_from: int, tri_to: int, label: str, corner):
    """Re-express a triangle corner in the triangle on the other side of one
    of its two sides.

    A corner is the frozenset of the two sides meeting at it.  With all
    triangles stored counterclockwise, the head of a shared side in one
    triangle is its tail in the other.
    """
    if t.ccw_successor(tri_from, label) in corner:
        return frozenset((t.ccw_predecessor(tri_to, label), label))
    if t.ccw_predecessor(tri_from, label) in corner:
        return frozenset((label, t.ccw_successor(tri_to, label)))
    raise SmoothingUnresolved(f"corner {set(corner)} does not flank arc {label}")


def smooth_at_basepoint(c: CollapsedTriangulation, gamma1: ArcPath, gamma2: ArcPath) -> ArcPath:
    """Best-effort smoothing of two basepoint arcs into gamma3.

    The smoothed curve runs along gamma1, turns around just short of the
    basepoint, and follows gamma2 backwards; its crossing sequence is the
    concatenation and its endpoints are the far endpoints of the halves.
    The curve is then pulled taut: a backtrack (equal adjacent crossings
    returning to the same triangle) bounds an empty bigon and cancels, and a
    leading or trailing crossing whose arc ends at the adjacent endpoint of
    the curve slides off around that endpoint.  Since every vertex is a
    marked point there are no other moves, so the result is reduced.

    The slide moves are only sound on disc surfaces: elsewhere the curve can
    wrap around a hole and corners are no longer determined by their label
    pair, so when a slide would apply off a disc the reduction gives up
    instead of guessing.  Backtrack cancellations happen inside a single
    triangle and stay safe on every surface.

    This is still only a candidate: the division identity computed by the
    snake module is the authoritative source of F_{gamma3}, and disagreement
    there is an error.  Raises SmoothingUnresolved when the reduction loses
    track of the walk or the result does not validate.
    """
    if not (gamma1.ends_at_basepoint and gamma2.ends_at_basepoint):
        raise SmoothingUnresolved("both arcs must end at the basepoint")
    t = c.base
    cr = list(gamma1.crossings) + list(reversed(gamma2.crossings))
    walk = list(gamma1.triangle_seq) + list(reversed(gamma2.triangle_seq))[1:]
    if len(walk) != len(cr) + 1:
        raise SmoothingUnresolved("triangle walks of the halves do not line up")

    def far_corner(g):
        sides = [l for l in t.triangles[g.triangle_seq[0]] if l != g.crossings[0]]
        if len(sides) != 2:
            raise SmoothingUnresolved("cannot locate the far endpoint")
        return frozenset(sides)

    start, end = far_corner(gamma1), far_corner(gamma2)
    is_disc = t.euler_data["genus"] == 0 and t.euler_data["boundary_components"] == 1
    changed = True
    while changed and cr:
        changed = False
        for i in range(len(cr) - 1):
            if cr[i] == cr[i + 1]:
                if walk[i] != walk[i + 2]:
                    raise SmoothingUnresolved("backtrack does not return to its triangle")
                del cr[i:i + 2]
                del walk[i + 1:i + 3]
                changed = True
                break
        if changed:
            continue
        if cr[0] in start or cr[-1] in end:
            if not is_disc:
                raise SmoothingUnresolved(
                    "an endpoint slide applies but the surface is not a disc")
            if cr[0] in start:
                start = _carry_corner(t, walk[0], walk[1], cr[0], start)
                del cr[0], walk[0]
            else:
                end = _carry_corner(t, walk[-1], walk[-2], cr[-1], end)
                del cr[-1], walk[-1]
            changed = True
    if not cr:
        return ArcPath((), (), False)
    try:
        return validate_arc(c.base, cr, hints=walk)
    except ValidationError as exc:
        raise SmoothingUnresolved(f"reduced sequence {cr} is not a valid arc: {exc}") from exc


class SymmetricDouble:
    """Output of `reflect`: the doubled triangulation with its flip involution rho."""

    def __init__(self, triangulation: Triangulation, rho: dict, tau_n: str):
        self.triangulation = triangulation
        self.rho = dict(rho)
        self.tau_n = tau_n


def reflect(s: SigmaTriangulation) -> SymmetricDouble:
    """Cut along the invariant arc and reflect the unprimed half onto labels i''.

    The reflected copy reverses every triple (reflection is orientation-
    reversing); the invariant arc is shared between the halves and fixed by
    rho.
    """
    collapsed = restrict_triangulation(s)
    t = collapsed.base
    tau = collapsed.tau_n

    def mirror(label: str) -> str:
        if label == tau:
            return label
        return label + "''"

    triangles = []
    rho = {tau: tau}
    for idx, tri in enumerate(t.triangles):
        if idx == collapsed.basepoint_index:
            continue
        triangles.append(tri)
        triangles.append(tuple(mirror(l) for l in reversed(tri)))
        for l in tri:
            rho[l] = mirror(l)
            rho[mirror(l)] = l

    # relabel arcs to 1..2n-1: keep 1..n, map i'' -> 2n - i
    n = t.n
    rename = {}
    for i in range(1, n + 1):
        rename[str(i)] = str(i)
    for i in range(1, n):
        rename[f"{i}''"] = str(2 * n - i)
    out_triangles = [tuple(rename.get(l, l) for l in tri) for tri in triangles]
    boundary = sorted({l for tri in out_triangles for l in tri
                       if not l.isdigit()})
    doubled = Triangulation(2 * n - 1, boundary, out_triangles)
    rho_out = {}
    for a, b in rho.items():
        rho_out[rename.get(a, a)] = rename.get(b, b)
    return SymmetricDouble(doubled, rho_out, tau)
