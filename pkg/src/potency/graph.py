"""Action graphs of free products: per-label successor arrays over vertices.

Vertex ``v`` followed along label ``g`` lands on ``graph.succ[g][v]``; this
is the right action ``v . g``.  Words act letter by letter from the left.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import MalformedInputError, PreconditionError
from .groups import DEFAULT_ORDER_CAP, FiniteGroup, ValidationReport, direct_product
from .words import FactorSystem, Letter, is_cyclically_reduced

AMALGAM = -1


class Label(NamedTuple):
    """``factor == AMALGAM`` marks an element of the abstract amalgamated subgroup."""

    factor: int
    elem: int

    @property
    def is_amalgam(self) -> bool:
        return self.factor == AMALGAM

    def key(self) -> str:
        return f"B:{self.elem}" if self.is_amalgam else f"{self.factor}:{self.elem}"

    @classmethod
    def parse(cls, key: str) -> "Label":
        head, _, tail = key.partition(":")
        try:
            return cls(AMALGAM if head == "B" else int(head), int(tail))
        except ValueError as exc:
            raise MalformedInputError(f"bad label key {key!r}") from exc


def expected_labels(fs: FactorSystem) -> list[Label]:
    labels = [Label(AMALGAM, b) for b in range(1, fs.amalgam_order)]
    for i, g in enumerate(fs.factors):
        labels += [Label(i, a) for a in range(1, g.order) if not fs.in_amalgam(i, a)]
    labels += [Label(fs.nfinite + j, 1) for j in range(fs.free_rank)]
    return labels


def label_for(fs: FactorSystem, f: int, a: int) -> Label:
    """Label carried by the non-identity generator ``a`` of factor ``f``."""
    if fs.is_free(f):
        return Label(f, 1)
    if fs.in_amalgam(f, a):
        return Label(AMALGAM, fs.to_amalgam(f, a))
    return Label(f, a)


class ActionGraph:
    def __init__(self, vertex_count: int, succ: dict, names: Sequence[str] | None = None):
        self.vertex_count = int(vertex_count)
        self.succ = {}
        for lab, arr in succ.items():
            arr = np.asarray(arr, dtype=np.int64)
            if arr.shape != (self.vertex_count,):
                raise MalformedInputError(f"successor array for {lab} has wrong length")
            if self.vertex_count and (arr.min() < 0 or arr.max() >= self.vertex_count):
                raise MalformedInputError(f"successor array for {lab} out of range")
            arr.setflags(write=False)
            self.succ[Label(*lab)] = arr
        self.names = None if names is None else tuple(str(s) for s in names)

    def __repr__(self):
        return f"<ActionGraph V={self.vertex_count} labels={len(self.succ)}>"

    @property
    def labels(self) -> list[Label]:
        return sorted(self.succ)

    def perm(self, label: Label) -> np.ndarray:
        try:
            return self.succ[label]
        except KeyError:
            raise PreconditionError(f"graph has no label {label.key()}") from None

    def vertex_name(self, v: int) -> str:
        return self.names[v] if self.names else str(v)

    def same_as(self, other: "ActionGraph") -> bool:
        return (
            self.vertex_count == other.vertex_count
            and self.succ.keys() == other.succ.keys()
            and all(np.array_equal(self.succ[k], other.succ[k]) for k in self.succ)
        )

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "vertex_count": self.vertex_count,
            "successors": {lab.key(): self.succ[lab].tolist() for lab in self.labels},
        }
        if self.names is not None:
            d["names"] = list(self.names)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ActionGraph":
        try:
            succ = {Label.parse(k): v for k, v in d["successors"].items()}
            return cls(int(d["vertex_count"]), succ, d.get("names"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedInputError(f"bad graph record: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ActionGraph":
        return cls.from_dict(json.loads(text))

    def to_dot(self, fs: FactorSystem | None = None) -> str:
        """Graphviz source; one edge per positively oriented edge, stable order."""
        lines = ["digraph action_graph {"]
        for v in range(self.vertex_count):
            lines.append(f'  "{v}" [label="{self.vertex_name(v)}"];')
        for lab in self.labels:
            text = _label_text(fs, lab)
            arr = self.succ[lab]
            for v in range(self.vertex_count):
                lines.append(f'  "{v}" -> "{int(arr[v])}" [label="{text}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label_text(fs, lab: Label) -> str:
    if fs is None:
        return lab.key()
    if lab.is_amalgam:
        return "B:" + fs.factors[0].names[fs.from_amalgam(0, lab.elem)]
    if fs.is_free(lab.factor):
        return f"{lab.factor}:x{lab.factor - fs.nfinite + 1}"
    return f"{lab.factor}:{fs.factors[lab.factor].names[lab.elem]}"


# ---------------------------------------------------------------------------
# element actions


def element_perm(fs: FactorSystem, graph: ActionGraph, f: int, a: int) -> np.ndarray:
    """Permutation by which the generator-element ``a`` of factor ``f`` acts."""
    n = graph.vertex_count
    if fs.is_free(f):
        base = graph.perm(Label(f, 1))
        if a < 0:
            base = np.argsort(base)
            a = -a
        out = np.arange(n, dtype=np.int64)
        for _ in range(a):
            out = base[out]
        return out
    if a == 0:
        return np.arange(n, dtype=np.int64)
    return graph.perm(label_for(fs, f, a))


def factor_perms(fs: FactorSystem, graph: ActionGraph, i: int) -> np.ndarray:
    """(|A_i|, V) stack with row a the action of element a."""
    g = fs.factors[i]
    return np.stack([element_perm(fs, graph, i, a) for a in range(g.order)])


@dataclass(frozen=True)
class Step:
    """One edge-traversal of a word: ``perm`` moves the walker; ``factor`` is
    the finite factor of a counted (tagged) edge or -1."""

    perm: np.ndarray
    label: Label
    sign: int
    factor: int


def word_steps(fs: FactorSystem, graph: ActionGraph, u) -> list[Step]:
    steps = []
    for letter in u:
        f, a = fs.check_letter(letter)
        if fs.is_free(f):
            lab = Label(f, 1)
            fwd = graph.perm(lab)
            if a > 0:
                steps += [Step(fwd, lab, 1, -1)] * a
            else:
                steps += [Step(np.argsort(fwd), lab, -1, -1)] * (-a)
            continue
        if a == 0:
            continue
        lab = label_for(fs, f, a)
        steps.append(Step(graph.perm(lab), lab, 1, -1 if lab.is_amalgam else f))
    return steps


def word_perm(fs: FactorSystem, graph: ActionGraph, u) -> np.ndarray:
    cur = np.arange(graph.vertex_count, dtype=np.int64)
    for s in word_steps(fs, graph, u):
        cur = s.perm[cur]
    return cur


def u_cycle_lengths(fs: FactorSystem, graph: ActionGraph, u) -> np.ndarray:
    """Length of the u-cycle through each vertex."""
    return _kernels.orbit_labels(word_perm(fs, graph, u))[1]


# ---------------------------------------------------------------------------
# constructors


def cayley_of_factor(g: FiniteGroup) -> ActionGraph:
    succ = {Label(0, a): g.table[:, a] for a in range(1, g.order)}
    return ActionGraph(g.order, succ, g.names)


def base_graph_direct_product(fs: FactorSystem, cap: int = DEFAULT_ORDER_CAP) -> ActionGraph:
    """Cayley graph of the direct product of the factors, generated by their union."""
    if fs.amalgam is not None:
        raise PreconditionError("direct-product base graph needs a plain free product")
    if fs.free_rank:
        raise PreconditionError("direct-product base graph needs finite factors")
    prod, embeds = direct_product(fs.factors, cap)
    succ = {}
    for i, g in enumerate(fs.factors):
        for a in range(1, g.order):
            succ[Label(i, a)] = prod.table[:, embeds[i](a)]
    return ActionGraph(prod.order, succ, prod.names)


def disjoint_union(graphs: Sequence[ActionGraph]) -> ActionGraph:
    graphs = list(graphs)
    labels = graphs[0].succ.keys()
    if any(g.succ.keys() != labels for g in graphs):
        raise PreconditionError("graphs carry different label sets")
    offsets = np.cumsum([0] + [g.vertex_count for g in graphs])
    succ = {lab: np.concatenate([g.succ[lab] + off for g, off in zip(graphs, offsets)]) for lab in labels}
    return ActionGraph(int(offsets[-1]), succ)


# ---------------------------------------------------------------------------
# validation


def validate_action_graph(fs: FactorSystem, graph: ActionGraph) -> ValidationReport:
    want = set(expected_labels(fs))
    have = set(graph.succ)
    if want != have:
        missing = sorted(want - have)
        extra = sorted(have - want)
        return ValidationReport.failed(
            "labels",
            "label set does not match the factor system",
            missing=[l.key() for l in missing],
            extra=[l.key() for l in extra],
        )
    n = graph.vertex_count
    for lab in graph.labels:
        counts = np.bincount(graph.succ[lab], minlength=n)
        if np.any(counts != 1):
            v = int(np.nonzero(counts != 1)[0][0])
            return ValidationReport.failed(
                "property-1", "label does not act as a bijection", label=lab.key(), vertex=v
            )
    for i, g in enumerate(fs.factors):
        P = factor_perms(fs, graph, i)
        fixed = np.nonzero(P[1:] == np.arange(n))
        if len(fixed[0]):
            a, v = int(fixed[0][0]) + 1, int(fixed[1][0])
            return ValidationReport.failed(
                "property-2", "non-identity element fixes a vertex", factor=i, elem=a, vertex=v
            )
        for x in range(g.order):
            lhs = P[g.table[x]]
            rhs = P[:, P[x]]
            bad = np.nonzero(lhs != rhs)
            if len(bad[0]):
                y, v = int(bad[0][0]), int(bad[1][0])
                return ValidationReport.failed(
                    "property-2",
                    "factor multiplication table violated",
                    factor=i,
                    pair=(x, y),
                    vertex=v,
                )
    return ValidationReport.passed()


# ---------------------------------------------------------------------------
# subgraphs


def orbit_reps(graph: ActionGraph, labels: Sequence[Label]) -> np.ndarray:
    """Least vertex of each vertex's orbit under the given labels."""
    n = graph.vertex_count
    if not labels:
        return np.arange(n, dtype=np.int64)
    rows = np.concatenate([np.arange(n)] * len(labels))
    cols = np.concatenate([graph.succ[l] for l in labels])
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, comp = connected_components(adj, directed=True, connection="weak")
    first = np.full(comp.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(n))
    return first[comp]


def scope_labels(fs: FactorSystem, graph: ActionGraph, scope) -> list[Label]:
    if scope == "B":
        return [l for l in graph.labels if l.is_amalgam]
    return [l for l in graph.labels if l.factor == scope or (l.is_amalgam and not fs.is_free(scope))]


def amalgam_classes(fs: FactorSystem, graph: ActionGraph) -> np.ndarray:
    return orbit_reps(graph, scope_labels(fs, graph, "B"))


def subgraph_of(fs: FactorSystem, graph: ActionGraph, p: int, scope) -> list[int]:
    """Vertex set of A_i(p) (``scope=i``) or B(p) (``scope="B"``)."""
    if not 0 <= p < graph.vertex_count:
        raise PreconditionError(f"vertex {p} out of range")
    reps = orbit_reps(graph, scope_labels(fs, graph, scope))
    return np.nonzero(reps == reps[p])[0].tolist()


def overlap_condition(fs: FactorSystem, graph: ActionGraph) -> ValidationReport:
    """Intersections A_i(p) & A_j(q), i != j, must sit inside one B(r)."""
    bcls = amalgam_classes(fs, graph)
    comps = [orbit_reps(graph, scope_labels(fs, graph, i)) for i in range(fs.nfinite)]
    for i in range(fs.nfinite):
        for j in range(i + 1, fs.nfinite):
            order = np.lexsort((bcls, comps[j], comps[i]))
            ci, cj, cb = comps[i][order], comps[j][order], bcls[order]
            same = (ci[1:] == ci[:-1]) & (cj[1:] == cj[:-1])
            bad = np.nonzero(same & (cb[1:] != cb[:-1]))[0]
            if len(bad):
                k = bad[0]
                return ValidationReport.failed(
                    "overlap",
                    "two factor subgraphs share vertices from different amalgam classes",
                    factors=(i, j),
                    p=ci[k],
                    q=cj[k],
                    vertices=(order[k], order[k + 1]),
                )
    return ValidationReport.passed()


# ---------------------------------------------------------------------------
# u-cycles


@dataclass
class UCycleReport:
    base_vertex: int
    length: int
    path: list  # (src, label key, dst, sign) per edge
    crossing_counts: dict  # (class rep, factor) -> (entering, leaving)
    classes: np.ndarray = field(repr=False)

    @property
    def vertices(self) -> list[int]:
        """Start vertex of every edge of the closed path."""
        return [e[0] for e in self.path]

    def to_dict(self) -> dict:
        return {
            "base_vertex": self.base_vertex,
            "length": self.length,
            "edges": len(self.path),
            "path": [[s, lab, d, sg] for s, lab, d, sg in self.path],
            "crossing_counts": [
                {"class": c, "factor": k, "entering": p, "leaving": m}
                for (c, k), (p, m) in sorted(self.crossing_counts.items())
            ],
        }


def _require_cyclic_word(u):
    if len(u) == 0:
        raise PreconditionError("u must be a non-empty word")
    if not is_cyclically_reduced(u):
        raise PreconditionError("u must be cyclically reduced")


def trace_u_cycle(fs: FactorSystem, graph: ActionGraph, u, p: int, classes=None) -> UCycleReport:
    _require_cyclic_word(u)
    if not 0 <= p < graph.vertex_count:
        raise PreconditionError(f"vertex {p} out of range")
    steps = word_steps(fs, graph, u)
    if classes is None:
        classes = amalgam_classes(fs, graph)
    path = []
    counts: dict = {}
    cur, length = p, 0
    while True:
        for s in steps:
            nxt = int(s.perm[cur])
            path.append((cur, s.label.key(), nxt, s.sign))
            if s.factor >= 0:
                key_in = (int(classes[nxt]), s.factor)
                key_out = (int(classes[cur]), s.factor)
                pin = counts.get(key_in, (0, 0))
                counts[key_in] = (pin[0] + 1, pin[1])
                pout = counts.get(key_out, (0, 0))
                counts[key_out] = (pout[0], pout[1] + 1)
            cur = nxt
        length += 1
        if cur == p:
            break
        if length > graph.vertex_count:
            raise MalformedInputError("u does not act as a permutation on this graph")
    return UCycleReport(p, length, path, counts, classes)


def crossing_counts(report: UCycleReport, p: int, k: int) -> tuple[int, int, int]:
    plus, minus = report.crossing_counts.get((int(report.classes[p]), k), (0, 0))
    return plus, minus, abs(plus - minus)


def is_proper(report: UCycleReport, p: int, k: int) -> bool:
    return crossing_counts(report, p, k)[2] != 0


@dataclass
class OrbitCrossings:
    """Crossing data of every u-cycle at once.

    ``orbit[v]`` is the least vertex of v's u-cycle, ``length[v]`` its length;
    ``table`` maps (orbit rep, class rep, factor) -> (entering, leaving).
    """

    orbit: np.ndarray
    length: np.ndarray
    classes: np.ndarray
    table: dict

    def proper_sites(self) -> dict:
        """(class rep, factor) -> sorted list of (orbit rep, l) with l != 0."""
        out: dict = {}
        for (o, c, k), (pl, mi) in self.table.items():
            if pl != mi:
                out.setdefault((c, k), []).append((o, abs(pl - mi)))
        for v in out.values():
            v.sort()
        return out


def orbit_crossings(fs: FactorSystem, graph: ActionGraph, u) -> OrbitCrossings:
    _require_cyclic_word(u)
    steps = word_steps(fs, graph, u)
    classes = amalgam_classes(fs, graph)
    total = np.arange(graph.vertex_count, dtype=np.int64)
    for s in steps:
        total = s.perm[total]
    orbit, length = _kernels.orbit_labels(total)
    keys, plus, minus = _kernels.walk_tally(
        np.stack([s.perm for s in steps]), np.array([s.factor for s in steps]), classes, orbit
    )
    table = {
        (int(o), int(c), int(k)): (int(pl), int(mi))
        for (o, c, k), pl, mi in zip(keys.tolist(), plus.tolist(), minus.tolist())
    }
    return OrbitCrossings(orbit, length, classes, table)


# ---------------------------------------------------------------------------
# distances


def undirected_csr(graph: ActionGraph):
    """CSR adjacency of the underlying undirected simple graph."""
    n = graph.vertex_count
    fwd = [graph.succ[lab] for lab in graph.labels]
    src = np.tile(np.arange(n, dtype=np.int64), len(fwd))
    dst = np.concatenate(fwd) if fwd else np.zeros(0, np.int64)
    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    adj.sum_duplicates()
    return adj.indptr.astype(np.int64), adj.indices.astype(np.int64)


def has_no_l_near_vertices(graph: ActionGraph, cycle: Sequence[int], l: int) -> bool:
    """True when positions i < j of the closed cycle satisfy
    dist(cycle[i], cycle[j]) >= min(|i-j|, n-|i-j|, l+1).

    ``cycle`` lists the start vertex of each edge.  Distances are taken in the
    underlying undirected graph; unreachable pairs always pass.
    """
    if l < 0:
        raise PreconditionError("l must be nonnegative")
    cyc = np.asarray(cycle, dtype=np.int64)
    n = len(cyc)
    if n <= 1:
        return True
    indptr, indices = undirected_csr(graph)
    uniq, inv = np.unique(cyc, return_inverse=True)
    dist = _kernels.bfs_distances(indptr, indices, uniq, l + 1)
    d = dist[inv][:, cyc]
    i, j = np.triu_indices(n, k=1)
    gap = j - i
    need = np.minimum(np.minimum(gap, n - gap), l + 1)
    got = d[i, j]
    return bool(np.all((got < 0) | (got >= need)))
