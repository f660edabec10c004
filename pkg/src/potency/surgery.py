"""Graph rewriting: layered covers, the properness step, cut-and-shift and
the two-Cayley-graph gluing.

Layered outputs number vertex ``v`` of layer ``i`` (0-based) as
``i * V + v`` where V is the input vertex count.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import MalformedInputError, PreconditionError, VerificationError
from .graph import (
    ActionGraph,
    Label,
    UCycleReport,
    amalgam_classes,
    crossing_counts,
    has_no_l_near_vertices,
    is_proper,
    orbit_crossings,
    orbit_reps,
    overlap_condition,
    scope_labels,
    trace_u_cycle,
    u_cycle_lengths,
    validate_action_graph,
    word_perm,
)
from .groups import FiniteGroup, direct_product, element_order
from .words import FactorSystem, is_cyclically_reduced, syllable_count


@dataclass(frozen=True)
class SurgerySpec:
    t: int
    marks: tuple  # ((vertex, factor), ...)

    def to_dict(self) -> dict:
        return {"t": self.t, "marks": [{"vertex": int(v), "factor": int(f)} for v, f in self.marks]}

    @classmethod
    def from_dict(cls, d: dict) -> "SurgerySpec":
        try:
            marks = tuple((int(m["vertex"]), int(m["factor"])) for m in d.get("marks", []))
            return cls(int(d["t"]), marks)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"bad surgery spec: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SurgerySpec":
        return cls.from_dict(json.loads(text))


def check_spec(fs: FactorSystem, graph: ActionGraph, spec: SurgerySpec) -> None:
    if spec.t < 1:
        raise PreconditionError("t must be a positive integer")
    comps = {}
    for v, f in spec.marks:
        if not 0 <= v < graph.vertex_count:
            raise PreconditionError(f"mark vertex {v} out of range")
        if not 0 <= f < fs.nfinite:
            raise PreconditionError(f"mark factor {f} is not a finite factor")
        if f not in comps:
            comps[f] = orbit_reps(graph, scope_labels(fs, graph, f))
    for (p, f), (q, g) in itertools.combinations(spec.marks, 2):
        if f == g and comps[f][p] == comps[f][q]:
            raise PreconditionError(
                f"marks ({p},{f}) and ({q},{g}) share a factor subgraph; rewrite would be ambiguous"
            )


def layered_surgery(fs: FactorSystem, graph: ActionGraph, spec: SurgerySpec) -> ActionGraph:
    """t stacked copies with the marked boundary edges shifted one layer.

    For a mark (p, k), a tagged factor-k edge leaving the amalgam class B(p)
    from layer i now lands in layer i+1, and one entering B(p) now starts in
    layer i+1 (layers mod t).  Every other edge stays inside its layer.
    """
    check_spec(fs, graph, spec)
    n, t = graph.vertex_count, spec.t
    shift = (np.arange(t, dtype=np.int64) * n)[:, None]
    nxt_shift = np.roll(shift, -1, axis=0)
    out = {lab: (arr[None, :] + shift) for lab, arr in graph.succ.items()}
    classes = amalgam_classes(fs, graph)
    for p, k in spec.marks:
        inside = np.nonzero(classes == classes[p])[0]
        for lab, arr in graph.succ.items():
            if lab.factor != k:
                continue
            layers = out[lab]
            layers[:, inside] = arr[inside][None, :] + nxt_shift
            inv = np.empty(n, dtype=np.int64)
            inv[arr] = np.arange(n)
            feeders = inv[inside]
            # rows are source layers: layer i+1 of a feeder lands on layer i
            layers[:, feeders] = inside[None, :] + np.roll(shift, 1, axis=0)
    succ = {lab: a.reshape(-1) for lab, a in out.items()}
    names = None
    if graph.names is not None:
        names = [f"{nm}^{i + 1}" for i in range(t) for nm in graph.names]
    return ActionGraph(n * t, succ, names)


def predicted_cycle_length(report: UCycleReport, p: int, k: int, t: int) -> int:
    """Length after layering t copies at (p, k): t / gcd(t, l) times the old length."""
    l = crossing_counts(report, p, k)[2]
    return t // math.gcd(t, l) * report.length


@dataclass
class ProperStepResult:
    graph: ActionGraph
    site: tuple  # (vertex, factor) in the new graph
    marks: tuple
    length: int
    notes: list = field(default_factory=list)


def make_proper_step(
    fs: FactorSystem, graph: ActionGraph, u, max_tries: int = 64, max_pairs: int = 4096
) -> ProperStepResult:
    """Double a graph with no proper u-cycle so that one becomes proper.

    Representatives start at the least vertex of each u-cycle in turn; the
    first doubling that keeps every u-cycle length and makes the cycle from
    the start vertex proper is returned.  Lengths and properness are checked
    by tracing, never assumed.  If no start works, other mark pairs along
    one representative are tried in order, up to ``max_pairs``.
    """
    if fs.free_rank:
        raise PreconditionError("needs a free product of finite groups")
    if not is_cyclically_reduced(u) or syllable_count(u) < 2:
        raise PreconditionError("u must be cyclically reduced with at least two syllables")
    rep = overlap_condition(fs, graph)
    if not rep:
        raise PreconditionError(f"overlap condition fails: {rep.witness}")
    oc = orbit_crossings(fs, graph, u)
    lengths = np.unique(oc.length)
    if len(lengths) != 1:
        raise PreconditionError(f"u-cycle lengths differ: {lengths.tolist()}")
    if oc.proper_sites():
        raise PreconditionError("a proper u-cycle already exists")
    attempts = []
    for p in np.unique(oc.orbit)[:max_tries].tolist():
        res = _proper_step_at(fs, graph, u, oc, int(p), int(lengths[0]), attempts)
        if res is not None:
            return res
    res = _proper_step_search(fs, graph, u, oc, int(lengths[0]), max_pairs, attempts)
    if res is not None:
        return res
    raise VerificationError("no representative became proper after doubling", attempts)


def _proper_step_search(fs, graph, u, oc, length, max_pairs, attempts):
    # the canonical marks fail when the representative meets its start class
    # twice; try other (leaving, entering) mark pairs along the same path
    path = trace_u_cycle(fs, graph, u, int(oc.orbit.min()), oc.classes).path
    n = len(path)
    tried = 0
    for i in range(1, n - 1):
        b, k = path[i][0], Label.parse(path[i][1]).factor
        for j in range(1, n):
            c, s = path[j][0], Label.parse(path[j - 1][1]).factor
            if k < 0 or s < 0 or oc.classes[b] == oc.classes[c]:
                continue
            tried += 1
            if tried > max_pairs:
                attempts.append({"search": "mark pairs", "result": f"gave up after {max_pairs}"})
                return None
            marks = ((int(b), int(k)), (int(c), int(s)))
            try:
                out = layered_surgery(fs, graph, SurgerySpec(2, marks))
            except PreconditionError:
                continue
            if not validate_action_graph(fs, out):
                continue
            if np.unique(u_cycle_lengths(fs, out, u)).tolist() != [length]:
                continue
            sites = orbit_crossings(fs, out, u).proper_sites()
            if sites:
                attempts.append({"search": "mark pairs", "marks": [list(m) for m in marks], "tried": tried})
                return ProperStepResult(out, min(sites), marks, length, attempts)
    attempts.append({"search": "mark pairs", "result": f"exhausted {tried} pairs"})
    return None


def _proper_step_at(fs, graph, u, oc, p, length, attempts):
    path = trace_u_cycle(fs, graph, u, p, oc.classes).path
    first_factor = Label.parse(path[0][1]).factor
    b, k = path[1][0], Label.parse(path[1][1]).factor
    c, s = path[-1][0], Label.parse(path[-2][1]).factor
    if oc.classes[b] == oc.classes[c]:
        raise PreconditionError(
            f"degenerate representative: vertices {b} and {c} share an amalgam class"
        )
    marks = ((int(b), int(k)), (int(c), int(s)))
    out = layered_surgery(fs, graph, SurgerySpec(2, marks))
    rep = validate_action_graph(fs, out)
    if not rep:
        raise VerificationError(f"doubled graph invalid: {rep.to_dict()}")
    new_lengths = np.unique(u_cycle_lengths(fs, out, u)).tolist()
    if new_lengths != [length]:
        attempts.append({"start": p, "marks": [list(m) for m in marks], "result": f"lengths {new_lengths}"})
        return None
    trace = trace_u_cycle(fs, out, u, p)
    factors = [first_factor] + [f for f in range(fs.nfinite) if f != first_factor]
    for f in factors:
        if is_proper(trace, p, f):
            return ProperStepResult(out, (p, f), marks, length)
    # the start vertex is not proper; any other proper site serves the driver
    sites = orbit_crossings(fs, out, u).proper_sites()
    if sites:
        site = min(sites)
        attempts.append({"start": p, "marks": [list(m) for m in marks], "result": f"proper elsewhere {list(site)}"})
        return ProperStepResult(out, site, marks, length, attempts)
    attempts.append({"start": p, "marks": [list(m) for m in marks], "result": "not proper"})
    return None


# ---------------------------------------------------------------------------
# cut and shift over a finite subgroup plus free generators


def cut_shift(fs: FactorSystem, graph: ActionGraph, region, n: int) -> ActionGraph:
    """n layers; free-generator edges entering ``region`` move to the next layer.

    ``fs`` has the finite subgroup as its only finite factor and the free
    generators as free factors; ``region`` must be one orbit of that subgroup.
    """
    if n < 1:
        raise PreconditionError("n must be a positive integer")
    if fs.nfinite != 1:
        raise PreconditionError("expected exactly one finite factor (the finite subgroup)")
    region = np.unique(np.asarray(list(region), dtype=np.int64))
    if len(region) == 0:
        raise PreconditionError("region is empty")
    reps = orbit_reps(graph, scope_labels(fs, graph, 0))
    orbit = np.nonzero(reps == reps[region[0]])[0]
    if not np.array_equal(orbit, region):
        raise PreconditionError("region is not an orbit of the finite subgroup")
    v = graph.vertex_count
    shift = (np.arange(n, dtype=np.int64) * v)[:, None]
    out = {}
    for lab, arr in graph.succ.items():
        layers = arr[None, :] + shift
        if fs.is_free(lab.factor):
            inv = np.empty(v, dtype=np.int64)
            inv[arr] = np.arange(v)
            layers[:, inv[region]] = region[None, :] + np.roll(shift, -1, axis=0)
        out[lab] = layers.reshape(-1)
    return ActionGraph(v * n, out)


def _regular_perms(k: FiniteGroup, copies: int) -> list[tuple]:
    # right-regular action of k, repeated on `copies` disjoint blocks
    out = []
    for a in range(k.order):
        perm = []
        for c in range(copies):
            perm += [int(k.table[x, a]) + c * k.order for x in range(k.order)]
        out.append(tuple(perm))
    return out


def cayley_graph_of_image(fs: FactorSystem, images) -> tuple[ActionGraph, FiniteGroup]:
    """Cayley graph of the permutation group generated by per-generator images.

    ``images`` lists one permutation per element of the finite factor (in
    element order) followed by one per free generator.
    """
    images = [tuple(int(x) for x in p) for p in images]
    grp = FiniteGroup.from_permutations(images)
    index = {tuple(p): i for i, p in enumerate(grp.permutations.tolist())}
    succ = {}
    k = fs.factors[0]
    for a in range(1, k.order):
        succ[Label(0, a)] = grp.table[:, index[images[a]]]
    for j in range(fs.free_rank):
        succ[Label(fs.nfinite + j, 1)] = grp.table[:, index[images[k.order + j]]]
    return ActionGraph(grp.order, succ), grp


def _all_representatives_far(fs, graph, u, min_length: int = 1) -> bool:
    total = word_perm(fs, graph, u)
    orbit, length = _kernels.orbit_labels(total)
    if len(np.unique(length)) != 1 or length[0] < min_length:
        return False
    for rep in np.unique(orbit):
        report = trace_u_cycle(fs, graph, u, int(rep))
        if not has_no_l_near_vertices(graph, report.vertices, 1):
            return False
    return True


def find_cut_shift_base(
    fs: FactorSystem, u, max_copies: int = 3, order_cap: int = 2000, min_length: int = 2
):
    """Brute-force a finite quotient whose Cayley graph suits :func:`cut_shift`.

    The finite factor acts by ``c`` copies of its regular representation
    (faithful by construction) and each free generator by a permutation of
    the same points, searched in lexicographic order.  Returns the first
    ``(graph, group)`` whose u-cycles all have one length, at least
    ``min_length``, and whose representatives have no 1-near vertices, or None.
    """
    if fs.nfinite != 1 or fs.free_rank < 1:
        raise PreconditionError("expected one finite factor and at least one free generator")
    k = fs.factors[0]
    for copies in range(1, max_copies + 1):
        base = _regular_perms(k, copies)
        d = k.order * copies
        for xs in itertools.product(itertools.permutations(range(d)), repeat=fs.free_rank):
            if _closure_exceeds(base[1:] + list(xs), order_cap):
                continue
            graph, grp = cayley_graph_of_image(fs, base + list(xs))
            if _all_representatives_far(fs, graph, u, min_length):
                return graph, grp
    return None


def _closure_exceeds(gens, cap) -> bool:
    degree = len(gens[0])
    seen = {tuple(range(degree))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                prod = tuple(g[x] for x in h)
                if prod not in seen:
                    seen.add(prod)
                    if len(seen) > cap:
                        return True
                    nxt.append(prod)
        frontier = nxt
    return False


# ---------------------------------------------------------------------------
# gluing n copies of two Cayley graphs


def _cycles(perm: np.ndarray) -> list[list[int]]:
    """Cycles of ``perm``, each starting at its least vertex, sorted by it."""
    seen = np.zeros(len(perm), dtype=bool)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        cyc, v = [], s
        while not seen[v]:
            seen[v] = True
            cyc.append(v)
            v = int(perm[v])
        out.append(cyc)
    return out


def _literal_pattern(m: int, split: int):
    """Identifications y_j -> (x index, copy offset) from the index recipe.

    Unassigned positions are filled in order with the unused x positions.
    Returns None when the recipe uses some vertex twice.
    """
    p = split
    pairs = [(0, 1, 0), (1, 0, 1), ((p + 1) % m, (p + 2) % m, 0), ((p + 2) % m, (p + 1) % m, 1)]
    for j in range(1, p + 1):
        pairs.append(((m - j - 1) % m, (j + 1) % m, 0))
        pairs.append(((j + 1) % m, (m - j - 1) % m, 1))
    ys: dict = {}
    for y, x, off in pairs:
        if ys.setdefault(y, (x, off)) != (x, off):
            return None
    # x in copy i+off is claimed once per copy only if every x is used once
    used = [x for x, _ in ys.values()]
    if len(set(used)) != len(used):
        return None
    free_x = [x for x in range(m) if x not in used]
    free_y = [y for y in range(m) if y not in ys]
    for y, x in zip(free_y, free_x):
        ys[y] = (x, 0)
    return [ys[y] for y in range(m)]


def _shift_pattern(m: int):
    """y_0 -> x_1 (same copy), y_1 -> x_0 (next copy), y_j -> x_{m+1-j} (next copy)."""
    out = [(1, 0), (0, 1)]
    out += [((m + 1 - j) % m, 1) for j in range(2, m)]
    return out


def _glue_candidates(m: int):
    for split in range(0, m - 1):
        yield f"index-recipe(p={split},q={m - 2 - split})", _literal_pattern(m, split)
    yield "layer-shift", _shift_pattern(m)


@dataclass
class GlueResult:
    graph: ActionGraph
    fs: FactorSystem
    candidate: str
    attempts: list


def glue_cayley_copies(A: FiniteGroup, B: FiniteGroup, a: int, b: int, n: int) -> GlueResult:
    """Free action graph of A * B on which every ab-cycle has length 1 or n.

    n copies of the Cayley graphs of A and B are identified vertex to vertex:
    the a^m-cycle and b^m-cycle through the identity are glued by a candidate
    index pattern that advances one copy per turn, and every other a-cycle is
    glued to a b-cycle run backwards so ab fixes it.  Candidates are tried in
    a fixed order and the first one that passes verification is returned.
    """
    if n < 1:
        raise PreconditionError("n must be a positive integer")
    m = element_order(A, a)
    if m != element_order(B, b) or m <= 1:
        raise PreconditionError("need |a| = |b| > 1")
    fs = FactorSystem([A, B])
    if A.order == B.order:
        ga, gb = A, B
        ea, eb = np.arange(A.order), np.arange(B.order)
    else:
        # both sides act on A x B so the vertex sets have the same size
        prod, (emb_a, emb_b) = direct_product([A, B])
        ga = gb = prod
        ea, eb = emb_a.image, emb_b.image
    size = ga.order
    alpha = ga.table[:, ea[a]]
    beta = gb.table[:, eb[b]]
    a_cycles = _cycles(alpha)
    b_cycles = _cycles(beta)
    attempts = []
    u = ((0, a), (1, b))
    for name, pattern in _glue_candidates(m):
        if pattern is None:
            attempts.append({"candidate": name, "result": "inconsistent identifications"})
            continue
        sigma = np.full(n * size, -1, dtype=np.int64)  # copy-major Y vertex -> X vertex id
        lam_a, lam_b = a_cycles[0], b_cycles[0]
        for i in range(n):
            for j, (xk, off) in enumerate(pattern):
                sigma[i * size + lam_b[j]] = ((i + off) % n) * size + lam_a[xk]
            for ca, cb in zip(a_cycles[1:], b_cycles[1:]):
                for j, y in enumerate(cb):
                    sigma[i * size + y] = i * size + ca[(-j) % m]
        if np.any(sigma < 0) or len(np.unique(sigma)) != len(sigma):
            attempts.append({"candidate": name, "result": "not a bijection"})
            continue
        graph = _glued_graph(A, B, ga, gb, ea, eb, sigma, n)
        rep = validate_action_graph(fs, graph)
        if not rep:
            attempts.append({"candidate": name, "result": f"invalid graph: {rep.rule}"})
            continue
        lengths = set(u_cycle_lengths(fs, graph, u).tolist())
        if not lengths <= {1, n} or (n > 1 and n not in lengths):
            attempts.append({"candidate": name, "result": f"cycle lengths {sorted(lengths)}"})
            continue
        attempts.append({"candidate": name, "result": "verified"})
        return GlueResult(graph, fs, name, attempts)
    raise VerificationError("no candidate gluing passed verification", attempts)


def _glued_graph(A, B, ga, gb, ea, eb, sigma, n) -> ActionGraph:
    size = ga.order
    copies = (np.arange(n, dtype=np.int64) * size)[:, None]
    succ = {}
    for x in range(1, A.order):
        succ[Label(0, x)] = (ga.table[:, ea[x]][None, :] + copies).reshape(-1)
    for y in range(1, B.order):
        # vertex sigma(i, v) goes to sigma(i, v*y)
        moved = (gb.table[:, eb[y]][None, :] + copies).reshape(-1)
        arr = np.empty(n * size, dtype=np.int64)
        arr[sigma] = sigma[moved]
        succ[Label(1, y)] = arr
    return ActionGraph(n * size, succ)
