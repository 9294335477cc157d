"""HTTP facade over the pipelines.

The CLI drives this app through an in-process transport, and the same app can
be served over the network with uvicorn.  Requests use the documented JSON
shapes; domain validation failures answer 422 and cross-check mismatches 409,
so clients can tell bad input from broken invariants without parsing text.

The verify suite lives here too: every case builds its inputs
programmatically (no fixture files) and raises CrossCheckFailed on the first
mismatch.  Tests reuse the same case functions directly.
"""

from __future__ import annotations

import random
import time

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import cluster, render as drawing, repalg, snake, surface
from .errors import CrossCheckFailed, ValidationError
from .poly import LaurentPoly


# -- request schemas ----------------------------------------------------------

class TriangulationModel(BaseModel):
    """Triangulation input, optionally with collapsed or involutive extras.

    `tau_n` + `basepoint_triangle` mark a collapsed surface.  `involution` +
    `invariant_arc` mark a triangulation with a symmetry; its collapsed form
    is derived by restriction.
    """

    n: int
    boundary: list[str]
    triangles: list[list[str]]
    arc_labels: list[str] | None = None
    tau_n: str | None = None
    basepoint_triangle: list[str] | None = None
    involution: dict[str, str] | None = None
    invariant_arc: str | None = None


class ArcModel(BaseModel):
    cross: list[str]
    hints: list[int] | None = None
    to_basepoint: bool = False


class OrbitModel(BaseModel):
    kind: str
    gamma1: ArcModel
    gamma2: ArcModel | None = None


class MutateRequest(BaseModel):
    matrix: list[list[int]]
    sequence: list[int] = Field(default_factory=list)


class EnumerateRequest(BaseModel):
    matrix: list[list[int]]
    depth: int = 12


class SnakeRequest(BaseModel):
    triangulation: TriangulationModel
    arc: ArcModel


class OrbitRequest(BaseModel):
    triangulation: TriangulationModel
    orbit: OrbitModel


class QuiverRequest(BaseModel):
    triangulation: TriangulationModel


class ModuleRequest(BaseModel):
    triangulation: TriangulationModel
    arc: ArcModel


class RenderRequest(BaseModel):
    triangulation: TriangulationModel
    arc: ArcModel | None = None
    orbit: OrbitModel | None = None
    format: str = "svg"


class VerifyRequest(BaseModel):
    cases: list[str] | None = None
    seed: int = 0


# -- input builders -----------------------------------------------------------

def build_context(model: TriangulationModel):
    """(triangulation, collapsed or None, sigma or None) from the JSON shape."""
    t = surface.Triangulation(model.n, model.boundary,
                              [tuple(tri) for tri in model.triangles],
                              arc_labels=model.arc_labels)
    sigma = None
    collapsed = None
    if model.involution is not None:
        if model.invariant_arc is None:
            raise ValidationError("involution given without invariant_arc")
        sigma = surface.SigmaTriangulation(t, model.involution, model.invariant_arc)
        collapsed = surface.restrict_triangulation(sigma)
    elif model.tau_n is not None:
        if model.basepoint_triangle is None:
            raise ValidationError("tau_n given without basepoint_triangle")
        collapsed = surface.CollapsedTriangulation(
            t, model.tau_n, tuple(model.basepoint_triangle))
    return t, collapsed, sigma


def build_arc(t, collapsed, model: ArcModel):
    return surface.validate_arc(t, [str(x) for x in model.cross],
                                hints=model.hints,
                                to_basepoint=model.to_basepoint,
                                collapsed=collapsed)


def build_orbit(t, collapsed, model: OrbitModel):
    g1 = build_arc(t, collapsed, model.gamma1)
    g2 = build_arc(t, collapsed, model.gamma2) if model.gamma2 is not None else None
    return surface.OrbitSpec(model.kind, g1, g2)


# -- app ----------------------------------------------------------------------

app = FastAPI(title="clusterfold", version="1.0.0")


def _error_payload(exc, status):
    return JSONResponse(status_code=status,
                        content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(ValueError)
async def _on_value_error(request, exc):
    # covers ValidationError and every parse/constraint error in the core
    return _error_payload(exc, 422)


@app.exception_handler(cluster.DepthExceeded)
async def _on_depth(request, exc):
    return _error_payload(exc, 422)


@app.exception_handler(CrossCheckFailed)
async def _on_crosscheck(request, exc):
    return _error_payload(exc, 409)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/mutate")
def mutate(req: MutateRequest):
    seed = cluster.Seed.initial(cluster.validate(req.matrix))
    for k in req.sequence:
        seed = seed.mutate(k)
    return {
        "matrix": [list(row) for row in seed.bmat],
        "history": list(seed.history),
        "variables": [
            {
                "x": seed.variables[i].render(),
                "g": list(seed.g_vector(i)),
                "f": seed.f_polynomial(i).render(),
            }
            for i in range(seed.n)
        ],
    }


@app.post("/enumerate")
def enumerate_matrix(req: EnumerateRequest):
    pairs = cluster.enumerate_variables(cluster.validate(req.matrix), req.depth)
    return {"count": len(pairs), "lines": cluster.render_enumeration(pairs)}


@app.post("/snake")
def snake_graph(req: SnakeRequest):
    t, collapsed, _ = build_context(req.triangulation)
    base = collapsed.base if collapsed is not None else t
    gamma = build_arc(base, collapsed, req.arc)
    touches = collapsed is not None and (
        gamma.ends_at_basepoint or collapsed.prev_arc() in gamma.crossings)
    if touches:
        graph = snake.build_modified(collapsed, gamma)
    else:
        graph = snake.build_snake(base, gamma)
    f = snake.matching_polynomial(graph)
    return {
        "variant": graph.variant,
        "tiles": graph.describe(),
        "matchings": sum(f.terms().values()),
        "f": f.render(),
        "g": list(snake.g_vector(graph)),
    }


@app.post("/orbit")
def orbit(req: OrbitRequest):
    t, collapsed, _ = build_context(req.triangulation)
    if collapsed is None:
        raise ValidationError(
            "orbit expansion needs a collapsed surface: give tau_n and "
            "basepoint_triangle, or involution and invariant_arc")
    spec = build_orbit(collapsed.base, collapsed, req.orbit)
    f, g, report = snake.orbit_expansion(collapsed, spec)
    graph = snake.build_orbit_graph(collapsed, spec)
    return {
        "f": f.render(),
        "g": list(g),
        "tiles": graph.describe(),
        "report": report,
        "crosscheck": "OK",
    }


@app.post("/quiver")
def quiver(req: QuiverRequest):
    t, collapsed, sigma = build_context(req.triangulation)
    if sigma is None:
        raise ValidationError(
            "the symmetric double needs involution and invariant_arc")
    q, inv = repalg.symmetric_double(sigma)
    payload = q.as_dict()
    payload["involution"] = inv.as_dict()
    payload["fixed_vertex"] = collapsed.tau_n
    return payload


@app.post("/module")
def module(req: ModuleRequest):
    t, collapsed, _ = build_context(req.triangulation)
    base = collapsed.base if collapsed is not None else t
    gamma = build_arc(base, collapsed, req.arc)
    q = repalg.quiver_of_triangulation(base)
    walk = repalg.string_of_arc(q, base, gamma)
    mod = repalg.string_module(walk)
    f = repalg.module_f_polynomial(mod)
    cc = repalg.cc_map(mod, cluster.validate(surface.signed_adjacency(base)))
    return {
        "dims": {v: mod.dims[v] for v in q.vertices},
        "string": walk.describe(),
        "f": f.render(),
        "g": list(repalg.g_vector_module(mod)),
        "cc": cc.render(),
    }


@app.post("/render")
def render_document(req: RenderRequest):
    t, collapsed, _ = build_context(req.triangulation)
    base = collapsed.base if collapsed is not None else t
    if req.orbit is not None:
        if collapsed is None:
            raise ValidationError("rendering an orbit graph needs a collapsed surface")
        spec = build_orbit(base, collapsed, req.orbit)
        target = snake.build_orbit_graph(collapsed, spec)
    elif req.arc is not None:
        gamma = build_arc(base, collapsed, req.arc)
        if collapsed is not None:
            target = snake.build_modified(collapsed, gamma)
        else:
            target = snake.build_snake(base, gamma)
    else:
        target = base
    return {"format": req.format, "document": drawing.render(target, req.format)}


@app.post("/verify")
def verify(req: VerifyRequest):
    results = run_verify(req.cases, req.seed)
    return {"ok": all(r["ok"] for r in results), "cases": results}


# -- reference surfaces --------------------------------------------------------
#
# Shared by the verify suite and the test-bed: the annulus with a symmetry
# whose quotient is the running five-arc collapsed surface, the fan polygons
# folding to B_2/B_3, and two minimal collapsed surfaces (quadrilateral,
# smaller annulus).

def running_sigma() -> surface.SigmaTriangulation:
    tris = [("2", "1", "x"), ("3", "1", "v"), ("4", "2", "3"), ("5", "4", "z"),
            ("2'", "1'", "x'"), ("3'", "1'", "v'"), ("4'", "2'", "3'"), ("5", "4'", "z'")]
    t = surface.Triangulation(
        9, ["x", "v", "z", "x'", "v'", "z'"], tris,
        arc_labels=["1", "2", "3", "4", "5", "1'", "2'", "3'", "4'"])
    inv = {"5": "5"}
    for a in ("1", "2", "3", "4", "x", "v", "z"):
        inv[a] = a + "'"
        inv[a + "'"] = a
    return surface.SigmaTriangulation(t, inv, "5")


def fan_sigma(nb: int) -> surface.SigmaTriangulation:
    """Fan polygon with nb unprimed arcs; folds to type B_nb."""
    tris = [("b1", "b2", "1")]
    for i in range(1, nb):
        tris.append((str(i), f"b{i + 2}", str(i + 1)))
    mirrored = [tuple(l if l == str(nb) else l + "'" for l in tri) for tri in tris]
    t = surface.Triangulation(
        2 * nb - 1,
        [f"b{i}" for i in range(1, nb + 2)] + [f"b{i}'" for i in range(1, nb + 2)],
        tris + mirrored,
        arc_labels=[str(i) for i in range(1, nb + 1)] + [f"{i}'" for i in range(1, nb)])
    inv = {str(nb): str(nb)}
    for i in range(1, nb):
        inv[str(i)] = f"{i}'"
        inv[f"{i}'"] = str(i)
    for i in range(1, nb + 2):
        inv[f"b{i}"] = f"b{i}'"
        inv[f"b{i}'"] = f"b{i}"
    return surface.SigmaTriangulation(t, inv, str(nb))


def quadrilateral_sigma() -> surface.SigmaTriangulation:
    return fan_sigma(1)


def annulus_sigma() -> surface.SigmaTriangulation:
    """Annulus with a basepoint: two boundary circles, parallel-arrow core."""
    tris = [("2", "1", "bO"), ("2", "1", "3"), ("4", "3", "z"),
            ("2'", "1'", "bO'"), ("2'", "1'", "3'"), ("4", "3'", "z'")]
    t = surface.Triangulation(7, ["bO", "z", "bO'", "z'"], tris,
                              arc_labels=["1", "2", "3", "4", "1'", "2'", "3'"])
    inv = {"4": "4"}
    for a in ("1", "2", "3", "bO", "z"):
        inv[a] = a + "'"
        inv[a + "'"] = a
    return surface.SigmaTriangulation(t, inv, "4")


def folded_matrix(nb: int) -> list[list[int]]:
    """Exchange matrix of the folded fan: type B_nb."""
    rows = [[0] * nb for _ in range(nb)]
    for i in range(nb - 1):
        rows[i][i + 1] = 1
        rows[i + 1][i] = -1
    rows[nb - 1][nb - 2] = -2
    return rows


def test_surfaces():
    """Name -> sigma triangulation for sweep-style checks."""
    return {
        "quadrilateral": quadrilateral_sigma(),
        "annulus": annulus_sigma(),
        "running": running_sigma(),
    }


# -- golden data ---------------------------------------------------------------
#
# Exact expansions for the running surface, written as y-exponent -> coefficient
# over the collapsed arcs 1..5.

GOLD_ORBIT_F = {
    (1, 0, 1, 2, 2): 1, (1, 0, 1, 2, 1): 2, (1, 0, 0, 2, 2): 1, (1, 0, 1, 2, 0): 1,
    (1, 0, 0, 2, 1): 2, (0, 0, 0, 2, 2): 1, (1, 0, 1, 1, 0): 1, (1, 0, 0, 2, 0): 1,
    (1, 0, 0, 1, 1): 2, (0, 0, 0, 2, 1): 2, (1, 0, 0, 1, 0): 2, (0, 0, 0, 2, 0): 1,
    (0, 0, 0, 1, 1): 2, (1, 0, 0, 0, 0): 1, (0, 0, 0, 1, 0): 2, (0, 0, 0, 0, 0): 1,
}
GOLD_ORBIT_G = (-1, 1, 2, -2, 2)
GOLD_ORBIT_MATCHINGS = 23
GOLD_MINIMAL_LABELS = (0, 1, 3, 0, 4)
GOLD_CROSSINGS = (1, 0, 1, 2, 2)

GOLD_MODULE_F = {
    (0, 0, 0, 0, 0): 1, (1, 0, 1, 1, 2): 1, (1, 0, 1, 1, 1): 2, (1, 0, 0, 1, 2): 1,
    (1, 0, 1, 1, 0): 1, (1, 0, 0, 1, 1): 2, (0, 0, 0, 1, 2): 1, (1, 0, 0, 1, 0): 1,
    (0, 0, 0, 1, 1): 2, (1, 0, 0, 0, 0): 1, (0, 0, 0, 1, 0): 1,
}
GOLD_MODULE_G = (-1, 1, 1, -1, 0)


# -- random sweep helpers --------------------------------------------------------

def _random_plain_arc(rng, t, collapsed=None, max_len=6):
    """A random valid arc avoiding the collapsed arc and basepoint triangle."""
    tau = collapsed.tau_n if collapsed is not None else None
    skip = collapsed.basepoint_index if collapsed is not None else None
    for _ in range(120):
        start = rng.randrange(len(t.triangles))
        if start == skip:
            continue
        cur = start
        walk = [start]
        crossings: list[str] = []
        target = rng.randint(1, max_len)
        while len(crossings) < target:
            opts = sorted(a for a in t.triangles[cur]
                          if t.is_arc(a) and a != tau and (not crossings or a != crossings[-1]))
            if not opts:
                break
            arc = opts[rng.randrange(len(opts))]
            nxt = [i for i in t.triangles_of(arc) if i != cur]
            if not nxt:
                break
            cur = nxt[0]
            crossings.append(arc)
            walk.append(cur)
        if not crossings:
            continue
        try:
            return surface.validate_arc(t, crossings, hints=walk)
        except ValidationError:
            continue
    raise ValidationError("random arc generation failed to find a valid walk")


def _random_basepoint_arc(rng, c, max_len=6):
    """A random arc ending at the basepoint: crosses tau exactly once, last."""
    t = c.base
    for _ in range(400):
        start = rng.randrange(len(t.triangles))
        if start == c.basepoint_index:
            continue
        cur = start
        walk = [start]
        crossings: list[str] = []
        for _ in range(rng.randint(0, max_len - 1)):
            opts = sorted(a for a in t.triangles[cur]
                          if t.is_arc(a) and a != c.tau_n
                          and (not crossings or a != crossings[-1]))
            if not opts:
                break
            arc = opts[rng.randrange(len(opts))]
            cur = [i for i in t.triangles_of(arc) if i != cur][0]
            crossings.append(arc)
            walk.append(cur)
        if cur != c.neighbor_index:
            continue
        crossings.append(c.tau_n)
        walk.append(c.basepoint_index)
        try:
            return surface.validate_arc(t, crossings, hints=walk,
                                        to_basepoint=True, collapsed=c)
        except ValidationError:
            continue
    raise ValidationError("random basepoint arc generation failed")


def _plain_poly_of_crossings(t, crossings):
    """Matching polynomial of a crossing list.

    The triangle walk is forced once the starting triangle is chosen, so both
    choices are tried; annuli make the hintless resolution ambiguous."""
    for start in t.triangles_of(crossings[0]):
        walk = [start]
        cur = start
        ok = True
        for c in crossings:
            tris = t.triangles_of(c)
            if cur not in tris:
                ok = False
                break
            cur = tris[1] if tris[0] == cur else tris[0]
            walk.append(cur)
        if not ok:
            continue
        try:
            arc = surface.validate_arc(t, crossings, hints=walk)
            return snake.matching_polynomial(snake.build_snake(t, arc))
        except ValidationError:
            continue
    return None


class DoubleContext:
    """A sigma surface with its reflection double and the triangle maps
    linking collapsed triangles to their unprimed and mirrored copies."""

    def __init__(self, sigma):
        self.sigma = sigma
        self.collapsed = surface.restrict_triangulation(sigma)
        self.double = surface.reflect(sigma)
        self.quiver, self.rho = repalg.symmetric_double(sigma)
        t2 = self.double.triangulation
        by_labels: dict[frozenset, list[int]] = {}
        for i, tri in enumerate(t2.triangles):
            by_labels.setdefault(frozenset(sorted(tri)), []).append(i)

        def lookup(labels):
            hits = by_labels.get(frozenset(sorted(labels)), [])
            if len(hits) != 1:
                raise ValidationError(f"triangle {labels} not unique in the double")
            return hits[0]

        self.up = {}
        self.down = {}
        for i, tri in enumerate(self.collapsed.base.triangles):
            if i == self.collapsed.basepoint_index:
                continue
            self.up[i] = lookup(tri)
            self.down[i] = lookup([self.double.rho[l] for l in tri])

    def orbit_module(self, spec):
        """The orthogonal indecomposable matching a surface orbit."""
        g1 = spec.gamma1
        rho = self.double.rho
        if spec.kind == "two":
            cross = list(g1.crossings) + [rho[x] for x in
                                          reversed(spec.gamma2.crossings[:-1])]
            walk = ([self.up[i] for i in g1.triangle_seq[:-1]]
                    + [self.down[i] for i in reversed(spec.gamma2.triangle_seq[:-1])])
            m = self._string(cross, walk)
            return repalg.direct_sum(m, repalg.twisted_dual(m, self.rho))
        if g1.ends_at_basepoint:
            cross = list(g1.crossings) + [rho[x] for x in reversed(g1.crossings[:-1])]
            walk = ([self.up[i] for i in g1.triangle_seq[:-1]]
                    + [self.down[i] for i in reversed(g1.triangle_seq[:-1])])
            return self._string(cross, walk)
        m = self._string(list(g1.crossings), [self.up[i] for i in g1.triangle_seq])
        return repalg.direct_sum(m, repalg.twisted_dual(m, self.rho))

    def _string(self, cross, walk):
        t2 = self.double.triangulation
        arc = surface.validate_arc(t2, cross, hints=walk)
        return repalg.string_module(repalg.string_of_arc(self.quiver, t2, arc))


def _fan_orbit_specs(c, nb):
    """Every orbit of arcs on the fan double, restricted to the collapsed fan."""
    specs = []
    for lo in range(1, 2 * nb):
        for hi in range(lo, 2 * nb):
            mirror = (2 * nb - hi, 2 * nb - lo)
            if (lo, hi) > mirror:
                continue
            if hi < nb:
                cross = [str(k) for k in range(lo, hi + 1)]
                hints = list(c.base.triangles_of(cross[0])) if len(cross) == 1 else None
                specs.append(surface.OrbitSpec(
                    "one", surface.validate_arc(c.base, cross, hints=hints)))
            elif (lo, hi) == mirror:
                cross = [str(k) for k in range(lo, nb + 1)]
                specs.append(surface.OrbitSpec(
                    "one", surface.validate_arc(c.base, cross, to_basepoint=True,
                                                collapsed=c)))
            else:
                c1 = [str(k) for k in range(lo, nb + 1)]
                c2 = [str(k) for k in range(2 * nb - hi, nb + 1)]
                specs.append(surface.OrbitSpec(
                    "two",
                    surface.validate_arc(c.base, c1, to_basepoint=True, collapsed=c),
                    surface.validate_arc(c.base, c2, to_basepoint=True, collapsed=c)))
    return specs


def _norm_terms(f, n):
    return frozenset((k[-n:], v) for k, v in f.terms().items())


def _expect(cond, message, extra=None):
    if not cond:
        raise CrossCheckFailed(message if extra is None else f"{message}: {extra}")


# -- verify cases ----------------------------------------------------------------

def _case_golden_orbit(seed):
    ctx = DoubleContext(running_sigma())
    c = ctx.collapsed
    spec = surface.OrbitSpec(
        "two",
        surface.validate_arc(c.base, ["4", "5"], to_basepoint=True, collapsed=c),
        surface.validate_arc(c.base, ["1", "3", "4", "5"], to_basepoint=True,
                             collapsed=c))
    f, g, _ = snake.orbit_expansion(c, spec)
    _expect(f.terms() == GOLD_ORBIT_F,
            "orbit expansion differs from the golden 16-term polynomial", f.render())
    _expect(tuple(g) == GOLD_ORBIT_G, "orbit g-vector differs", tuple(g))
    mod = ctx.orbit_module(spec)
    f2, g2, _ = repalg.orbit_module_expansion(mod, ctx.rho, c)
    _expect(f2.terms() == GOLD_ORBIT_F,
            "module expansion differs from the golden polynomial", f2.render())
    _expect(tuple(g2) == GOLD_ORBIT_G, "module g-vector differs", tuple(g2))
    return "16-term F and g=(-1,1,2,-2,2) from both the matching and module pipelines"


def _case_golden_matchings(seed):
    s = running_sigma()
    c = surface.restrict_triangulation(s)
    spec = surface.OrbitSpec(
        "two",
        surface.validate_arc(c.base, ["4", "5"], to_basepoint=True, collapsed=c),
        surface.validate_arc(c.base, ["1", "3", "4", "5"], to_basepoint=True,
                             collapsed=c))
    graph = snake.build_orbit_graph(c, spec)
    count = len(snake.enumerate_matchings(graph))
    _expect(count == GOLD_ORBIT_MATCHINGS, "matching count differs", count)
    minimal = snake.minimal_matching(graph)
    labels = [0] * c.n
    arc_names = {str(i + 1) for i in range(c.n)}
    for eid in minimal:
        e = graph.edges[eid]
        if e.kind in ("plain", "flank") and e.label in arc_names:
            labels[int(e.label) - 1] += 1
    crossings = [0] * c.n
    for tile in graph.tiles:
        crossings[int(tile.diagonal_label) - 1] += 1
    _expect(tuple(labels) == GOLD_MINIMAL_LABELS,
            "minimal matching labels differ", tuple(labels))
    _expect(tuple(crossings) == GOLD_CROSSINGS, "tile diagonals differ",
            tuple(crossings))
    g = tuple(a - b for a, b in zip(labels, crossings))
    _expect(g == GOLD_ORBIT_G, "label counts do not reproduce the g-vector", g)
    _expect(tuple(snake.g_vector(graph)) == g, "g-vector readback differs")
    return "23 matchings; minimal labels (0,1,3,0,4) minus crossings (1,0,1,2,2) give g"


def _case_golden_module(seed):
    ctx = DoubleContext(running_sigma())
    c = ctx.collapsed
    t2 = ctx.double.triangulation
    arc = surface.validate_arc(t2, ["1", "3", "4", "5"])
    m = repalg.string_module(repalg.string_of_arc(ctx.quiver, t2, arc))
    n_mod = repalg.direct_sum(m, repalg.twisted_dual(m, ctx.rho))
    f, g, _ = repalg.orbit_module_expansion(n_mod, ctx.rho, c)
    _expect(f.terms() == GOLD_MODULE_F,
            "module expansion differs from the golden 11-term polynomial", f.render())
    _expect(tuple(g) == GOLD_MODULE_G, "module g-vector differs", tuple(g))
    res = repalg.restrict_module(n_mod, repalg.quiver_of_triangulation(c.base))
    f_res = repalg.module_f_polynomial(res)
    y5 = LaurentPoly(0, 5, {(0, 0, 0, 0, 1): 1})
    one_y1 = LaurentPoly(0, 5, {(0, 0, 0, 0, 0): 1, (1, 0, 0, 0, 0): 1})
    _expect((f + y5 * one_y1).terms() == f_res.terms(),
            "restriction polynomial does not satisfy the division relation")
    return "11-term F, g=(-1,1,1,-1,0), and F(Res N) = F_N + y5*(1+y1)"


def _case_fan(nb, seed):
    ctx = DoubleContext(fan_sigma(nb))
    c = ctx.collapsed
    oracle = cluster.enumerate_variables(cluster.validate(folded_matrix(nb)), 10)
    non_initial = {(g, _norm_terms(f, nb)) for g, f in oracle if not f.is_one()}
    via_snake = set()
    via_module = set()
    for spec in _fan_orbit_specs(c, nb):
        f, g, _ = snake.orbit_expansion(c, spec)
        via_snake.add((tuple(g), _norm_terms(f, nb)))
        mod = ctx.orbit_module(spec)
        f2, g2, _ = repalg.orbit_module_expansion(mod, ctx.rho, c)
        via_module.add((tuple(g2), _norm_terms(f2, nb)))
    _expect(via_snake == non_initial,
            "matching pipeline misses oracle variables",
            f"snake {len(via_snake)} vs oracle {len(non_initial)}")
    _expect(via_module == non_initial,
            "module pipeline misses oracle variables",
            f"module {len(via_module)} vs oracle {len(non_initial)}")
    total = len(oracle)
    return (f"{total} variables; {len(non_initial)} non-initial matched by the "
            f"matching and module pipelines")


def _case_b2(seed):
    return _case_fan(2, seed)


def _case_b3(seed):
    return _case_fan(3, seed)


def _case_msw(seed, per_surface=24):
    rng = random.Random(seed)
    checked = 0
    for name, s in test_surfaces().items():
        c = surface.restrict_triangulation(s)
        base = c.base
        q = repalg.quiver_of_triangulation(base)
        has_plain = any(l != c.tau_n for l in base.arc_labels)
        for i in range(per_surface):
            if i % 3 == 2 or not has_plain:
                gamma = _random_basepoint_arc(rng, c)
            else:
                gamma = _random_plain_arc(rng, base, collapsed=c)
            graph = snake.build_snake(base, gamma)
            mod = repalg.string_module(repalg.string_of_arc(q, base, gamma))
            f_graph = snake.matching_polynomial(graph)
            f_mod = repalg.module_f_polynomial(mod)
            _expect(f_graph.terms() == f_mod.terms(),
                    f"F mismatch on {name} arc {list(gamma.crossings)}",
                    f"{f_graph.render()} vs {f_mod.render()}")
            _expect(tuple(snake.g_vector(graph)) == repalg.g_vector_module(mod),
                    f"g mismatch on {name} arc {list(gamma.crossings)}")
            checked += 1
    return f"{checked} random arcs on 3 surfaces: matchings and submodules agree"


def _case_division(seed, orbits=60, module_checks=12):
    rng = random.Random(seed)
    contexts = {name: DoubleContext(s) for name, s in test_surfaces().items()}
    surfaces = {name: ctx.collapsed for name, ctx in contexts.items()}
    names = sorted(surfaces)
    done = 0
    module_done = 0
    attempts = 0
    while done < orbits:
        attempts += 1
        if attempts > 40 * orbits:
            raise CrossCheckFailed(
                f"could not assemble {orbits} random orbits ({done} found)")
        name = names[rng.randrange(len(names))]
        c = surfaces[name]
        g1 = _random_basepoint_arc(rng, c)
        g2 = _random_basepoint_arc(rng, c)
        if g1.crossings == g2.crossings:
            continue
        spec = surface.OrbitSpec("two", g1, g2)
        try:
            f, g, report = snake.orbit_expansion(c, spec)
        except ValidationError:
            continue
        n = c.n
        f1 = snake.matching_polynomial(snake.build_snake(c.base, g1))
        f2 = snake.matching_polynomial(snake.build_snake(c.base, g2))
        diff = f1 * f2 - f
        _expect(not diff.is_zero(),
                f"division difference vanished on {name}",
                (list(g1.crossings), list(g2.crossings)))
        shift = diff.monomial_content()
        _expect(all(v >= 0 for v in shift), "negative monomial content", shift)
        rest = diff.shift(tuple(-v for v in shift))
        _expect(rest.terms().get((0,) * n, 0) == 1,
                "quotient has no unit constant term", rest.render())
        _expect(all(v > 0 for v in rest.terms().values()),
                "quotient has non-positive coefficients", rest.render())
        if report["smoothed"]:
            f3 = _plain_poly_of_crossings(c.base, report["smoothed"])
            _expect(f3 is not None and f3.terms() == rest.terms(),
                    f"smoothing disagrees with the quotient on {name}",
                    report["smoothed"])
        if module_done < module_checks:
            ctx = contexts[name]
            try:
                mod = ctx.orbit_module(spec)
            except ValidationError:
                mod = None
            if mod is not None:
                fm, gm, _ = repalg.orbit_module_expansion(mod, ctx.rho, c)
                _expect(fm.terms() == f.terms(),
                        f"module orbit F differs on {name}")
                _expect(tuple(gm) == tuple(g),
                        f"module orbit g differs on {name}")
                module_done += 1
        done += 1
    return (f"{done} random two-arc orbits verified; {module_done} also "
            f"cross-checked through modules")


def _random_exchange_matrix(rng):
    n = rng.randint(2, 4)
    weights = [rng.randint(1, 3) for _ in range(n)]
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            u = rng.randint(-2, 2)
            rows[i][j] = u * weights[j]
            rows[j][i] = -u * weights[i]
    return rows


def _case_structural(seed, mutation_pairs=1000, dual_checks=6, tiny_modules=40):
    rng = random.Random(seed)

    for _ in range(mutation_pairs):
        m = cluster.validate(_random_exchange_matrix(rng))
        s0 = cluster.Seed.initial(m)
        k = rng.randint(1, m.n)
        s2 = s0.mutate(k).mutate(k)
        _expect(s2.bmat == s0.bmat and s2.cmat == s0.cmat
                and s2.variables == s0.variables,
                "mutation is not an involution", (m.entries, k))
        s1 = s0.mutate(k)
        d = s0.skew_symmetrizer
        _expect(all(d[i] * s1.bmat[i][j] == -d[j] * s1.bmat[j][i]
                    for i in range(m.n) for j in range(m.n)),
                "skew-symmetrizer lost under mutation", (m.entries, k))

    surfaces = test_surfaces()
    match_counts = 0
    for name, s in surfaces.items():
        c = surface.restrict_triangulation(s)
        for _ in range(4):
            for _attempt in range(60):
                gamma = _random_basepoint_arc(rng, c)
                try:
                    modified = snake.build_modified(c, gamma)
                except snake.HypothesisViolated:
                    continue
                break
            else:
                raise CrossCheckFailed(
                    f"no random arc on {name} satisfies the modification hypotheses")
            plain = snake.build_snake(c.base, gamma)
            _expect(len(snake.enumerate_matchings(plain))
                    == len(snake.enumerate_matchings(modified)),
                    f"matching count changed by the modification on {name}",
                    list(gamma.crossings))
            match_counts += 1

    dual_ok = 0
    for name, s in surfaces.items():
        dbl = surface.reflect(s)
        q2, rho = repalg.symmetric_double(s)
        for first, second in q2.relations:
            _expect((rho.arrow(second), rho.arrow(first)) in q2.relation_set,
                    f"relations of the double of {name} are not stable")
        for _ in range(dual_checks):
            gamma = _random_plain_arc(rng, dbl.triangulation, max_len=4)
            mod = repalg.string_module(
                repalg.string_of_arc(q2, dbl.triangulation, gamma))
            dual = repalg.twisted_dual(mod, rho)
            _expect(all(dual.dims[v] == mod.dims[rho.vertex(v)]
                        for v in q2.vertices),
                    f"dual dimensions not permuted on {name}")
            _expect(repalg.is_isomorphic(repalg.twisted_dual(dual, rho), mod),
                    f"double dual not isomorphic on {name}")
            dual_ok += 1

    oracle_ok = 0
    for name, s in surfaces.items():
        base = surface.restrict_triangulation(s).base
        q = repalg.quiver_of_triangulation(base)
        found = 0
        guard = 0
        while found < tiny_modules // len(surfaces) and guard < 200:
            guard += 1
            gamma = _random_plain_arc(rng, base, max_len=5)
            mod = repalg.string_module(repalg.string_of_arc(q, base, gamma))
            if mod.total_dim() > 6:
                continue
            _expect(dict(repalg.module_f_polynomial(mod).terms()) == _grassmannian_counts(mod),
                    f"submodule counts differ from the brute-force oracle on {name}",
                    list(gamma.crossings))
            found += 1
            oracle_ok += 1

    return (f"{mutation_pairs} mutation involutions, {match_counts} matching-count "
            f"folds, {dual_ok} duality checks, {oracle_ok} brute-force submodule "
            f"oracles")


def _grassmannian_counts(mod):
    """Brute force: all coordinate-subspace subrepresentations, by dimension."""
    q = mod.quiver
    coords = []
    seen: dict[str, int] = {}
    for w in mod.strings:
        for p in w.positions:
            coords.append((p, seen.get(p, 0)))
            seen[p] = seen.get(p, 0) + 1
    total = len(coords)
    counts: dict[tuple[int, ...], int] = {}
    nq = len(q.vertices)
    for mask in range(1 << total):
        chosen = {coords[i] for i in range(total) if mask >> i & 1}
        ok = True
        for a in q.arrows:
            m = mod.maps[a.name]
            for (pv, k) in chosen:
                if pv != a.src:
                    continue
                col = k
                for row in range(mod.dims[a.tgt]):
                    if m[row][col] != 0 and (a.tgt, row) not in chosen:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            continue
        dim = [0] * nq
        for (pv, _k) in chosen:
            dim[q.index(pv)] += 1
        counts[tuple(dim)] = counts.get(tuple(dim), 0) + 1
    return counts


VERIFY_CASES = ("golden-orbit", "golden-matchings", "golden-module",
                "b2", "b3", "msw", "division", "structural")

_CASE_TABLE = {
    "golden-orbit": _case_golden_orbit,
    "golden-matchings": _case_golden_matchings,
    "golden-module": _case_golden_module,
    "b2": _case_b2,
    "b3": _case_b3,
    "msw": _case_msw,
    "division": _case_division,
    "structural": _case_structural,
}


def run_verify(names=None, seed=0):
    chosen = list(names) if names else list(VERIFY_CASES)
    for name in chosen:
        if name not in _CASE_TABLE:
            raise ValidationError(
                f"unknown verify case {name!r}; known: {', '.join(VERIFY_CASES)}")
    results = []
    for name in chosen:
        started = time.perf_counter()
        try:
            detail = _CASE_TABLE[name](seed)
            ok = True
        except (CrossCheckFailed, ValidationError) as exc:
            detail = f"{type(exc).__name__}: {exc}"
            ok = False
        results.append({
            "name": name,
            "ok": ok,
            "detail": detail,
            "seconds": round(time.perf_counter() - started, 3),
        })
    return results
