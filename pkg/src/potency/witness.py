"""End-to-end witness drivers and the permutation oracle that certifies them."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce as _fold

import numpy as np

from .errors import PreconditionError, VerificationError
from .graph import (
    ActionGraph,
    Label,
    base_graph_direct_product,
    label_for,
    orbit_crossings,
    overlap_condition,
    subgraph_of,
    trace_u_cycle,
    u_cycle_lengths,
    validate_action_graph,
)
from .groups import DEFAULT_ORDER_CAP, FiniteGroup, element_order, quotient_lcm
from .surgery import SurgerySpec, cut_shift, glue_cayley_copies, layered_surgery, make_proper_step
from .words import (
    FactorSystem,
    cartesian_power,
    cyclic_reduce,
    direct_image,
    power,
    reduce,
    syllable_count,
    word_to_json,
)


def _lcm(values) -> int:
    return _fold(lambda a, b: a * b // math.gcd(a, b), values, 1)


# ---------------------------------------------------------------------------
# oracle


@dataclass
class PermutationRep:
    """A homomorphism G -> Sym(V) given by one permutation per label."""

    fs: FactorSystem
    perms: dict  # Label -> np.ndarray
    degree: int

    def letter_perm(self, f: int, a: int) -> np.ndarray:
        ident = np.arange(self.degree, dtype=np.int64)
        if self.fs.is_free(f):
            base = self.perms[Label(f, 1)]
            if a < 0:
                inv = np.empty_like(base)
                inv[base] = ident
                base, a = inv, -a
            out = ident
            for _ in range(a):
                out = base[out]
            return out
        if a == 0:
            return ident
        return self.perms[label_for(self.fs, f, a)]

    def image(self, w) -> np.ndarray:
        """Permutation of the word, applied letter by letter (right action)."""
        cur = np.arange(self.degree, dtype=np.int64)
        for f, a in w:
            cur = self.letter_perm(int(f), int(a))[cur]
        return cur

    def to_dict(self) -> dict:
        return {lab.key(): self.perms[lab].tolist() for lab in sorted(self.perms)}


def graph_to_permutations(fs: FactorSystem, graph: ActionGraph) -> PermutationRep:
    rep = validate_action_graph(fs, graph)
    if not rep:
        raise PreconditionError(f"graph is not a free action graph: {rep.to_dict()}")
    perms = {lab: np.array(arr) for lab, arr in graph.succ.items()}
    out = PermutationRep(fs, perms, graph.vertex_count)
    bad = check_homomorphism(out)
    if bad is not None:
        raise VerificationError(f"permutations violate the factor relations: {bad}")
    return out


def check_homomorphism(rep: PermutationRep):
    """Exhaustive check that each factor's table holds among the permutations.

    Returns None on success, else a (factor, g, h) witness.
    """
    ident = np.arange(rep.degree)
    for i, g in enumerate(rep.fs.factors):
        imgs = [rep.letter_perm(i, a) for a in range(g.order)]
        for x in range(g.order):
            if not _is_perm(imgs[x]):
                return (i, x, None)
            for y in range(g.order):
                # right action: first x, then y
                if not np.array_equal(imgs[y][imgs[x]], imgs[g.mul(x, y)]):
                    return (i, x, y)
        if not np.array_equal(imgs[0], ident):
            return (i, 0, 0)
    return None


def _is_perm(arr) -> bool:
    return len(arr) == 0 or np.array_equal(np.sort(arr), np.arange(len(arr)))


def cycle_type(perm) -> list[int]:
    """Cycle lengths by direct walking; kept independent of the kernels."""
    perm = [int(x) for x in perm]
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        n, v = 0, s
        while not seen[v]:
            seen[v] = True
            v = perm[v]
            n += 1
        out.append(n)
    return out


def order_of_word_image(rep: PermutationRep, u) -> int:
    return _lcm(cycle_type(rep.image(u)))


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class PotencyWitness:
    fs: FactorSystem
    word: tuple
    n: int
    k_u: int
    graph: ActionGraph
    rep: PermutationRep
    certified_order: int
    mode: str
    transcript: list = field(default_factory=list)

    @property
    def vertices(self) -> int:
        return self.graph.vertex_count

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "factor_system": self.fs.to_dict(),
            "word": json.loads(word_to_json(self.word)),
            "k_u": self.k_u,
            "n": self.n,
            "certified_order": self.certified_order,
            "vertices": self.vertices,
            "permutations": self.rep.to_dict(),
            "transcript": self.transcript,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def verify_witness_dict(d: dict) -> tuple[bool, str]:
    """Re-check an emitted witness from its JSON alone."""
    from .words import word_from_json

    try:
        fs = FactorSystem.from_dict(d["factor_system"])
        u = word_from_json(d["word"])
        graph = ActionGraph.from_dict({"vertex_count": d["vertices"], "successors": d["permutations"]})
        claimed = int(d["certified_order"])
    except (KeyError, TypeError, ValueError) as exc:
        return False, f"malformed witness: {exc}"
    try:
        rep = graph_to_permutations(fs, graph)
    except (PreconditionError, VerificationError) as exc:
        return False, str(exc)
    order = order_of_word_image(rep, u)
    if order != claimed:
        return False, f"image of u has order {order}, witness claims {claimed}"
    return True, f"order {order} confirmed"


def _certify(fs, graph, u, expected, transcript) -> tuple[PermutationRep, int]:
    try:
        rep = graph_to_permutations(fs, graph)
    except (PreconditionError, VerificationError) as exc:
        raise VerificationError(f"witness graph rejected: {exc}", transcript) from exc
    order = order_of_word_image(rep, u)
    transcript.append({"step": "oracle", "order": order, "expected": expected})
    if order != expected:
        raise VerificationError(
            f"oracle order {order} disagrees with the construction's {expected}", transcript
        )
    return rep, order


def _lengthen(fs, graph, core, n, m, transcript) -> ActionGraph:
    """Layer the base graph so the u-cycle lengths have lcm m*n."""
    oc = orbit_crossings(fs, graph, core)
    sites = oc.proper_sites()
    if not sites:
        step = make_proper_step(fs, graph, core)
        transcript.append(
            {
                "step": "make_proper",
                "marks": [list(x) for x in step.marks],
                "site": list(step.site),
                "vertices": step.graph.vertex_count,
                "notes": step.notes,
            }
        )
        graph = step.graph
        oc = orbit_crossings(fs, graph, core)
        sites = oc.proper_sites()
        if not sites:
            raise VerificationError("no proper u-cycle after the properness step", transcript)
    (p, k) = min(sites)
    ls = [l for _, l in sites[(p, k)]]
    q = quotient_lcm(n, ls)
    t = n * q.gcd
    transcript.append(
        {
            "step": "quotient_lcm",
            "site": [p, k],
            "crossings": ls,
            "gcd": q.gcd,
            "quotients": list(q.quotients),
            "lcm": q.lcm,
        }
    )
    spec = SurgerySpec(t, ((p, k),))
    delta = layered_surgery(fs, graph, spec)
    transcript.append({"step": "layered_surgery", **spec.to_dict(), "vertices": delta.vertex_count})
    allowed = {m} | {m * x for x in q.quotients}
    seen = set(u_cycle_lengths(fs, delta, core).tolist())
    transcript.append({"step": "cycle_lengths", "lengths": sorted(seen)})
    if not seen <= allowed:
        raise VerificationError(f"cycle lengths {sorted(seen)} outside predicted {sorted(allowed)}", transcript)
    return delta


def _require_n(n):
    if int(n) != n or n < 1:
        raise PreconditionError("n must be a positive integer")


def quasipotency_witness(
    fs: FactorSystem,
    u,
    n: int,
    base_graph: ActionGraph | None = None,
    cap: int = DEFAULT_ORDER_CAP,
) -> PotencyWitness:
    """Quotient in which u's image has order k_u * n, k_u fixed by the base graph."""
    _require_n(n)
    if fs.free_rank:
        raise PreconditionError("factors must be finite")
    rep = fs.validate()
    if not rep:
        raise PreconditionError(f"invalid factor system: {rep.message}")
    u = reduce(fs, u)
    core, conj = cyclic_reduce(fs, u)
    if not core:
        raise PreconditionError("u is trivial")
    transcript: list = [
        {"step": "cyclic_reduce", "core": json.loads(word_to_json(core)), "conjugator": json.loads(word_to_json(conj))}
    ]
    if base_graph is None:
        if fs.amalgam is not None:
            raise PreconditionError("an amalgamated product needs a supplied base graph")
        base_graph = base_graph_direct_product(fs, cap)
        transcript.append({"step": "base_graph", "kind": "direct_product", "vertices": base_graph.vertex_count})
    else:
        check = validate_action_graph(fs, base_graph)
        if not check:
            raise PreconditionError(f"base graph invalid: {check.to_dict()}")
        transcript.append({"step": "base_graph", "kind": "supplied", "vertices": base_graph.vertex_count})
    lengths = np.unique(u_cycle_lengths(fs, base_graph, core))
    if len(lengths) != 1:
        raise PreconditionError(f"base graph u-cycle lengths differ: {lengths.tolist()}")
    m = int(lengths[0])
    transcript.append({"step": "base_lengths", "k_u": m})
    if syllable_count(core) == 1:
        # torsion element of a factor: its order is fixed, only n = 1 is realisable
        if n != 1:
            raise PreconditionError(
                f"u lies in a conjugate of a finite factor (order {m}); only n = 1 is realisable"
            )
        perm_rep, order = _certify(fs, base_graph, u, m, transcript)
        return PotencyWitness(fs, u, n, m, base_graph, perm_rep, order, "quasipotency", transcript)
    check = overlap_condition(fs, base_graph)
    if not check:
        raise PreconditionError(f"base graph fails the overlap condition: {check.witness}")
    graph = _lengthen(fs, base_graph, core, n, m, transcript)
    perm_rep, order = _certify(fs, graph, u, m * n, transcript)
    return PotencyWitness(fs, u, n, m, graph, perm_rep, order, "quasipotency", transcript)


def hpotency_witness(fs: FactorSystem, u, n: int, cap: int = DEFAULT_ORDER_CAP) -> PotencyWitness:
    """Quotient in which the image of a kernel element u has order exactly n."""
    _require_n(n)
    if fs.amalgam is not None or fs.free_rank:
        raise PreconditionError("needs a plain free product of finite groups")
    u = reduce(fs, u)
    if not u:
        raise PreconditionError("u is trivial")
    if any(direct_image(fs, u)):
        raise PreconditionError("u is not in the kernel of the map onto the direct product")
    w = quasipotency_witness(fs, u, n, cap=cap)
    if w.k_u != 1 or w.certified_order != n:
        raise VerificationError(f"expected order {n}, got {w.certified_order}", w.transcript)
    w.mode = "h-potency"
    return w


def uab_potency_witness(A: FiniteGroup, B: FiniteGroup, a: int, b: int, n: int) -> PotencyWitness:
    """Quotient of A * B in which ab has order exactly n."""
    _require_n(n)
    res = glue_cayley_copies(A, B, a, b, n)
    transcript = [{"step": "glue", "candidate": res.candidate, "attempts": res.attempts, "vertices": res.graph.vertex_count}]
    u = ((0, a), (1, b))
    from .words import word

    u = word(*u)
    rep, order = _certify(res.fs, res.graph, u, n, transcript)
    return PotencyWitness(res.fs, u, n, 1, res.graph, rep, order, "uab-potency", transcript)


def cut_shift_witness(fs: FactorSystem, graph: ActionGraph, u, p: int, n: int) -> PotencyWitness:
    """Cut-and-shift a finite quotient graph at the subgroup orbit of p.

    The certified order is whatever the oracle measures; the transcript
    records whether the u-cycle through p in layer 1 reached k * n.
    """
    _require_n(n)
    u = reduce(fs, u)
    lengths = np.unique(u_cycle_lengths(fs, graph, u))
    if len(lengths) != 1:
        raise PreconditionError(f"base graph u-cycle lengths differ: {lengths.tolist()}")
    k = int(lengths[0])
    region = subgraph_of(fs, graph, p, 0)
    out = cut_shift(fs, graph, region, n)
    check = validate_action_graph(fs, out)
    if not check:
        raise VerificationError(f"cut-shift output invalid: {check.to_dict()}")
    through_p = trace_u_cycle(fs, out, u, p).length
    transcript = [
        {"step": "cut_shift", "region": region, "n": n, "vertices": out.vertex_count},
        {"step": "cycle_through_base", "length": through_p, "target": k * n},
    ]
    rep = graph_to_permutations(fs, out)
    order = order_of_word_image(rep, u)
    transcript.append({"step": "oracle", "order": order})
    return PotencyWitness(fs, u, n, k, out, rep, order, "cut-shift", transcript)


@dataclass
class CartesianReduction:
    powers: tuple  # (n_u, n_v)
    witnesses: tuple
    letters: dict
    note: str = (
        "residual finiteness of the amalgamated product is not decided here; "
        "only the finite-factor reduction and the potency witnesses are computed"
    )

    def to_dict(self) -> dict:
        return {
            "n_u": self.powers[0],
            "n_v": self.powers[1],
            "witnesses": [w.to_dict() for w in self.witnesses],
            "letters": self.letters,
            "note": self.note,
        }


def cartesian_reduction_report(F: FactorSystem, G: FactorSystem, u, v, w=(), order: int = 2) -> CartesianReduction:
    """Powers landing u, v in the Cartesian subgroups, with h-potency witnesses.

    ``w`` is a word over F's factors followed by G's factors; only the
    per-factor sets of its letters are reported.
    """
    witnesses, powers = [], []
    for fs, x in ((F, u), (G, v)):
        core, _ = cyclic_reduce(fs, x)
        if syllable_count(core) < 2:
            raise PreconditionError("element lies in a conjugate of a free factor")
        k = cartesian_power(fs, x)
        powers.append(k)
        witnesses.append(hpotency_witness(fs, reduce(fs, power(fs, x, k)), order))
    letters: dict = {}
    for name, fs, x in (("F", F, u), ("G", G, v)):
        for f, e in reduce(fs, x):
            letters.setdefault(f"{name}{f}", set()).add(int(e))
    for f, e in w:
        f = int(f)
        key = f"F{f}" if f < F.nfinite else f"G{f - F.nfinite}"
        letters.setdefault(key, set()).add(int(e))
    return CartesianReduction(tuple(powers), tuple(witnesses), {k: sorted(s) for k, s in sorted(letters.items())})
