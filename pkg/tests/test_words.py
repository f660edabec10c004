import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potency.errors import MalformedInputError, PreconditionError
from potency.groups import FiniteGroup
from potency.words import (
    Amalgam,
    FactorSystem,
    cartesian_power,
    cyclic_reduce,
    direct_image,
    in_cartesian_subgroup,
    inverse,
    is_cyclically_reduced,
    multiply,
    power,
    reduce,
    syllable_count,
    word,
    word_from_json,
    word_to_json,
)

Z2, Z3, Z4 = FiniteGroup.cyclic(2), FiniteGroup.cyclic(3), FiniteGroup.cyclic(4)
FS23 = FactorSystem([Z2, Z3])
FS22 = FactorSystem([Z2, Z2])
# Z/4 *_{Z/2} Z/4, squares identified
AM44 = FactorSystem([Z4, Z4], Amalgam(((0, 2), (0, 2)), ((0, 1), (0, 1))))
# S3 * Z/2 with the transposition subgroup identified with Z/2
S3 = FiniteGroup.symmetric(3)
_S3_INV = next(x for x in range(6) if S3.element_orders[x] == 2)
AMS3 = FactorSystem([S3, Z4], Amalgam(((0, _S3_INV), (0, 2)), ((0, 1), (0, 1))))


def test_reduction_examples():
    a, b, b2 = (0, 1), (1, 1), (1, 2)
    assert reduce(FS23, word(a, a)) == ()
    assert reduce(FS23, word(a, b, b2)) == word(a)
    assert reduce(FS23, word(a, b)) == word(a, b)


def test_cyclic_reduce_examples():
    core, conj = cyclic_reduce(FS23, word((0, 1), (1, 1), (0, 1)))
    assert core == word((1, 1)) and conj == word((0, 1))
    w = word((0, 1), (1, 1))
    assert cyclic_reduce(FS23, w) == (w, ())
    assert cyclic_reduce(FS23, ()) == ((), ())


def test_syllables_and_images():
    assert syllable_count(word((0, 1), (1, 1), (0, 1), (1, 2))) == 4
    assert syllable_count(()) == 0
    assert direct_image(FS22, word((0, 1), (1, 1), (0, 1), (1, 1))) == (0, 0)
    assert in_cartesian_subgroup(FS22, word((0, 1), (1, 1), (0, 1), (1, 1)))
    assert direct_image(FS23, word((0, 1), (1, 1))) == (1, 1)
    assert direct_image(FS23, ()) == (0, 0)


def test_cartesian_power_examples():
    assert cartesian_power(FS23, word((0, 1), (1, 1))) == 6
    assert cartesian_power(FS22, word((0, 1), (1, 1), (0, 1), (1, 1))) == 1
    assert cartesian_power(FS22, word((0, 1), (1, 1))) == 2
    with pytest.raises(PreconditionError):
        cartesian_power(FS23, word((0, 1)))


def test_direct_image_refuses_amalgam():
    with pytest.raises(PreconditionError):
        direct_image(AM44, word((0, 1)))


def test_letter_range_checked():
    with pytest.raises(MalformedInputError):
        reduce(FS23, word((2, 1)))
    with pytest.raises(MalformedInputError):
        reduce(FS23, word((1, 3)))


def test_amalgam_letters_are_absorbed():
    # a^2 = b^2 in the amalgam, so a^2 b^2 is trivial and a b^2 = a^3
    assert reduce(AM44, word((0, 2), (1, 2))) == ()
    assert reduce(AM44, word((0, 1), (1, 2))) == word((0, 3))
    # a lone amalgam element is written in factor 0
    assert reduce(AM44, word((1, 2))) == word((0, 2))


def test_amalgam_system_validates():
    assert AM44.validate()
    assert AMS3.validate()
    bad = FactorSystem([Z4, Z4], Amalgam(((0, 1), (0, 2)), ((0, 1), (0, 1))))
    assert not bad.validate()


def test_word_json_round_trip():
    w = word((0, 1), (1, 2))
    assert word_from_json(word_to_json(w)) == w
    with pytest.raises(MalformedInputError):
        word_from_json('[{"factor": 0}]')


def test_factor_system_json_round_trip():
    for fs in (FS23, AM44, FactorSystem([Z2], free_rank=2)):
        back = FactorSystem.from_json(fs.to_json())
        assert back.to_dict() == fs.to_dict()


# -- permutation-image oracle


def _rep_free(fs, rng, degree=12):
    """Random permutation images of each factor: conjugates of a regular action."""
    imgs = []
    for g in fs.factors:
        blocks = degree // g.order
        perm_of = []
        relabel = rng.permutation(degree)
        for a in range(g.order):
            p = np.arange(degree)
            for blk in range(blocks):
                base = blk * g.order
                p[base: base + g.order] = base + g.table[:, a]
            # conjugate by a random relabelling
            q = np.empty(degree, dtype=np.int64)
            q[relabel] = relabel[p]
            perm_of.append(q)
        imgs.append(perm_of)
    return imgs


def _rep_am44(rng):
    # alpha and beta of order 4 with alpha^2 = beta^2 on 8 points
    alpha = np.array([1, 2, 3, 0, 5, 6, 7, 4])
    sq = alpha[alpha]
    pairs = [(0, 2), (1, 3), (4, 6), (5, 7)]
    order = rng.permutation(4)
    gamma = np.empty(8, dtype=np.int64)
    for src, dst in zip(pairs, [pairs[i] for i in order]):
        flip = rng.integers(2)
        gamma[src[0]], gamma[src[1]] = (dst[flip], dst[1 - flip])
    ginv = np.argsort(gamma)
    beta = gamma[alpha[ginv]]
    assert np.array_equal(beta[beta], sq)
    ident = np.arange(8)
    pa = [ident, alpha, sq, sq[alpha]]
    pb = [ident, beta, beta[beta], beta[beta][beta]]
    return [pa, pb]


def _image(imgs, w, degree):
    cur = np.arange(degree)
    for f, a in w:
        cur = imgs[f][a][cur]
    return cur


def words_over(fs, max_len=10):
    letter = st.tuples(
        st.integers(0, fs.nfinite - 1),
        st.integers(0, 10**6),
    ).map(lambda t: (t[0], t[1] % fs.factors[t[0]].order))
    return st.lists(letter, max_size=max_len).map(lambda ps: word(*ps))


@settings(max_examples=200, deadline=None)
@given(words_over(FS23), st.integers(0, 2**32 - 1))
def test_reduce_preserves_image_free(w, seed):
    imgs = _rep_free(FS23, np.random.default_rng(seed))
    assert np.array_equal(_image(imgs, w, 12), _image(imgs, reduce(FS23, w), 12))


@settings(max_examples=200, deadline=None)
@given(words_over(AM44), st.integers(0, 2**32 - 1))
def test_reduce_preserves_image_amalgam(w, seed):
    imgs = _rep_am44(np.random.default_rng(seed))
    assert np.array_equal(_image(imgs, w, 8), _image(imgs, reduce(AM44, w), 8))


@pytest.mark.parametrize("fs", [FS23, AM44, AMS3], ids=["free", "amalgam44", "amalgamS3"])
@settings(max_examples=150, deadline=None)
@given(data=st.data())
def test_reduce_is_a_congruence(fs, data):
    w1 = data.draw(words_over(fs))
    w2 = data.draw(words_over(fs))
    v = data.draw(words_over(fs, 6))
    r = reduce(fs, w1)
    assert reduce(fs, r) == r  # idempotent
    assert multiply(fs, w1, w2) == reduce(fs, r + reduce(fs, w2))
    # inserting v v^-1 anywhere does not change the normal form
    assert reduce(fs, w1 + v + inverse(fs, v) + w2) == multiply(fs, w1, w2)
    assert multiply(fs, w1, inverse(fs, w1)) == ()


@pytest.mark.parametrize("fs", [FS23, AM44], ids=["free", "amalgam"])
@settings(max_examples=150, deadline=None)
@given(data=st.data())
def test_reduced_words_alternate(fs, data):
    r = reduce(fs, data.draw(words_over(fs)))
    assert all(x.factor != y.factor for x, y in zip(r, r[1:]))
    assert all(x.elem != 0 for x in r)
    if len(r) > 1:
        assert not any(fs.in_amalgam(f, a) for f, a in r)


@pytest.mark.parametrize("fs", [FS23, AM44], ids=["free", "amalgam"])
@settings(max_examples=150, deadline=None)
@given(data=st.data())
def test_cyclic_reduce_is_a_conjugation(fs, data):
    w = data.draw(words_over(fs))
    core, conj = cyclic_reduce(fs, w)
    assert is_cyclically_reduced(core)
    assert multiply(fs, conj, core, inverse(fs, conj)) == reduce(fs, w)


def test_power_and_inverse():
    w = word((0, 1), (1, 1))
    assert reduce(FS23, power(FS23, w, 6)) == reduce(FS23, power(FS23, w, 6))
    assert multiply(FS23, power(FS23, w, 3), power(FS23, w, -3)) == ()


def test_free_generator_letters():
    fs = FactorSystem([Z2], free_rank=1)
    assert reduce(fs, word((1, 2), (1, -2))) == ()
    assert reduce(fs, word((1, 2), (1, 1))) == word((1, 3))
    assert fs.validate()
