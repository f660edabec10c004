"""Acceptance suite: one test per numbered criterion.

The terminal summary (see conftest.py) prints one PASS/FAIL line each.
"""
import itertools
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from potency import _kernels
from potency.graph import (
    base_graph_direct_product,
    has_no_l_near_vertices,
    orbit_crossings,
    trace_u_cycle,
    u_cycle_lengths,
    validate_action_graph,
    word_perm,
)
from potency.groups import FiniteGroup, quotient_lcm
from potency.surgery import (
    SurgerySpec,
    find_cut_shift_base,
    glue_cayley_copies,
    layered_surgery,
    make_proper_step,
    predicted_cycle_length,
)
from potency.witness import (
    check_homomorphism,
    cut_shift_witness,
    hpotency_witness,
    order_of_word_image,
    quasipotency_witness,
    uab_potency_witness,
)
from potency.words import FactorSystem, word

Z2, Z3 = FiniteGroup.cyclic(2), FiniteGroup.cyclic(3)
SMALL = [FiniteGroup.cyclic(n) for n in range(2, 9)] + [
    FiniteGroup(np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]), name="V4"),
    FiniteGroup.symmetric(3),
    FiniteGroup.dihedral(4),
    FiniteGroup.quaternion(),
]


def _random_word(rng, fs, max_syllables=6):
    nf = fs.nfinite
    length = int(rng.integers(2, max_syllables + 1))
    seq = [int(rng.integers(nf))]
    while len(seq) < length:
        f = int(rng.integers(nf))
        if f != seq[-1]:
            seq.append(f)
    if seq[0] == seq[-1]:
        seq.pop()
    return word(*[(f, int(rng.integers(1, fs.factors[f].order))) for f in seq])


def _random_fs(rng):
    while True:
        fac = [SMALL[int(rng.integers(len(SMALL)))] for _ in range(int(rng.integers(2, 4)))]
        if math.prod(g.order for g in fac) <= 512:
            return FactorSystem(fac)


@lru_cache(maxsize=None)
def layered_runs():
    """500 layered surgeries; (measured, predicted, output valid) per case."""
    rng = np.random.default_rng(20240611)
    runs = []
    t0 = time.perf_counter()
    while len(runs) < 500:
        fs = _random_fs(rng)
        u = _random_word(rng, fs)
        g = base_graph_direct_product(fs)
        p = int(rng.integers(g.vertex_count))
        k = int(rng.integers(fs.nfinite))
        t = int(rng.integers(1, 9))
        r = trace_u_cycle(fs, g, u, p)
        out = layered_surgery(fs, g, SurgerySpec(t, ((p, k),)))
        runs.append(
            (
                trace_u_cycle(fs, out, u, p).length,
                predicted_cycle_length(r, p, k, t),
                bool(validate_action_graph(fs, out)),
            )
        )
    return runs, time.perf_counter() - t0


@lru_cache(maxsize=None)
def hpotency_runs():
    fs = FactorSystem([Z2, Z2])
    u = word((0, 1), (1, 1), (0, 1), (1, 1))
    hpotency_witness(fs, u, 2)  # warm-up
    out = []
    for n in range(1, 17):
        t0 = time.perf_counter()
        w = hpotency_witness(fs, u, n)
        out.append((n, w, time.perf_counter() - t0))
    return out


@lru_cache(maxsize=None)
def quasipotency_runs():
    fs = FactorSystem([Z2, Z3])
    u = word((0, 1), (1, 1))
    quasipotency_witness(fs, u, 2)  # warm-up
    out = []
    for n in range(1, 9):
        t0 = time.perf_counter()
        w = quasipotency_witness(fs, u, n)
        out.append((n, w, time.perf_counter() - t0))
    return out


@lru_cache(maxsize=None)
def glue_runs():
    out = []
    for m in (2, 3):
        zm = FiniteGroup.cyclic(m)
        for n in range(1, 6):
            res = glue_cayley_copies(zm, zm, 1, 1, n)
            w = uab_potency_witness(zm, zm, 1, 1, n)
            out.append((m, n, res, w))
    return out


@lru_cache(maxsize=None)
def cut_shift_runs():
    fs = FactorSystem([Z2], free_rank=1)
    u = word((0, 1), (1, 1))
    g, _ = find_cut_shift_base(fs, u)
    reps = np.unique(orbit_crossings_free(fs, g, u))
    far = all(has_no_l_near_vertices(g, trace_u_cycle(fs, g, u, int(p)).vertices, 1) for p in reps)
    out = []
    for n in (2, 3, 4):
        w = cut_shift_witness(fs, g, u, 0, n)
        through = trace_u_cycle(fs, w.graph, u, 0).length
        out.append((n, w, through))
    return fs, g, far, out


def orbit_crossings_free(fs, g, u):
    # least vertex of each u-cycle; crossing tallies only cover finite factors
    return _kernels.orbit_labels(word_perm(fs, g, u))[0]


@lru_cache(maxsize=None)
def proper_step_runs():
    rng = np.random.default_rng(7)
    out = []
    while len(out) < 60:
        fs = _random_fs(rng)
        if math.prod(g.order for g in fs.factors) > 200:
            continue
        u = _random_word(rng, fs)
        g = base_graph_direct_product(fs)
        if orbit_crossings(fs, g, u).proper_sites():
            continue
        res = make_proper_step(fs, g, u)
        out.append((fs, u, res))
    return out


# ---------------------------------------------------------------------------


@pytest.mark.acceptance(1, "layered lcm equals n, exhaustive n<=30, |ls|<=3, entries<=24, < 10 s")
def test_criterion_1_layered_lcm_exhaustive():
    t0 = time.perf_counter()
    bad = []
    entries = range(1, 25)
    for n in range(1, 31):
        for size in (1, 2, 3):
            for ls in itertools.product(entries, repeat=size):
                if quotient_lcm(n, ls).lcm != n:
                    bad.append((n, ls))
    elapsed = time.perf_counter() - t0
    assert not bad, bad[:5]
    assert elapsed < 10, elapsed


@pytest.mark.acceptance(2, "500 random layered surgeries: measured length = t/gcd(t,l)*len exactly, < 60 s")
def test_criterion_2_layered_length_formula():
    runs, elapsed = layered_runs()
    mismatches = [(m, p) for m, p, _ in runs if m != p]
    assert len(runs) == 500
    assert not mismatches, mismatches[:5]
    assert elapsed < 60, elapsed


@pytest.mark.acceptance(3, "Z/2*Z/2, u=abab: certified order n for n=1..16, each < 1 s")
def test_criterion_3_kernel_element_orders():
    for n, w, secs in hpotency_runs():
        assert w.certified_order == n
        assert secs < 1, (n, secs)


@pytest.mark.acceptance(4, "Z/2*Z/3, u=ab: k_u=6 and certified order 6n for n=1..8, each < 1 s")
def test_criterion_4_quasipotency():
    for n, w, secs in quasipotency_runs():
        assert w.k_u == 6
        assert w.certified_order == 6 * n
        assert secs < 1, (n, secs)


@pytest.mark.acceptance(5, "every surgery output satisfies the free action graph properties")
def test_criterion_5_surgery_outputs_valid():
    runs, _ = layered_runs()
    assert all(ok for _, _, ok in runs)
    for fs, u, res in proper_step_runs():
        assert validate_action_graph(fs, res.graph)
    fs, _, _, cuts = cut_shift_runs()
    for _, w, _ in cuts:
        assert validate_action_graph(fs, w.graph)
    for _, _, res, _ in glue_runs():
        assert validate_action_graph(res.fs, res.graph)


@pytest.mark.acceptance(6, "glued Cayley copies for Z/2 and Z/3, n=1..5: ab-cycle lengths in {1,n}, order n")
def test_criterion_6_glued_copies():
    u = word((0, 1), (1, 1))
    for m, n, res, w in glue_runs():
        lengths = set(u_cycle_lengths(res.fs, res.graph, u).tolist())
        assert lengths <= {1, n}, (m, n, lengths)
        assert w.certified_order == n


@pytest.mark.acceptance(7, "cut-and-shift on a searched Z/2*Z quotient without 1-near vertices: length k*n, n=2..4")
def test_criterion_7_cut_shift():
    _, g, far, runs = cut_shift_runs()
    assert far
    for n, w, through in runs:
        assert through == w.k_u * n
        assert w.certified_order == w.k_u * n


@pytest.mark.acceptance(8, "every witness from criteria 3, 4, 6, 7 respects the factor tables and its certified order")
def test_criterion_8_homomorphism_soundness():
    witnesses = [w for _, w, _ in hpotency_runs()]
    witnesses += [w for _, w, _ in quasipotency_runs()]
    witnesses += [w for _, _, _, w in glue_runs()]
    witnesses += [w for _, w, _ in cut_shift_runs()[3]]
    assert len(witnesses) == 16 + 8 + 10 + 3
    for w in witnesses:
        assert check_homomorphism(w.rep) is None
        assert order_of_word_image(w.rep, w.word) == w.certified_order
