import itertools
import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potency.errors import CapExceededError, MalformedInputError, PreconditionError
from potency.groups import (
    FiniteGroup,
    GroupHom,
    direct_product,
    element_order,
    quotient_lcm,
    validate_group,
)

KLEIN = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])


def small_groups():
    return [
        FiniteGroup.cyclic(1),
        FiniteGroup.cyclic(5),
        FiniteGroup(KLEIN, name="V4"),
        FiniteGroup.dihedral(4),
        FiniteGroup.symmetric(3),
        FiniteGroup.symmetric(4),
        FiniteGroup.quaternion(),
    ]


@pytest.mark.parametrize("g", small_groups(), ids=lambda g: g.name or "g")
def test_builtin_groups_satisfy_axioms(g):
    assert validate_group(g)


def test_klein_passes_and_swapped_entry_fails():
    assert validate_group(FiniteGroup(KLEIN))
    t = FiniteGroup.cyclic(3).table.copy()
    t[1, 1], t[1, 2] = t[1, 2], t[1, 1]
    rep = validate_group(FiniteGroup(t))
    assert not rep and rep.rule == "latin"


def test_non_associative_latin_square_is_caught():
    # a loop of order 5 that is not a group
    t = np.array(
        [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    )
    rep = validate_group(FiniteGroup(t))
    assert not rep
    assert rep.rule in ("associativity", "inverse")


def test_identity_violation_has_witness():
    t = FiniteGroup.cyclic(3).table.copy()
    t[0] = [1, 2, 0]
    rep = validate_group(FiniteGroup(t))
    assert rep.rule == "identity" and "element" in rep.witness


def test_constructor_rejects_malformed():
    with pytest.raises(MalformedInputError):
        FiniteGroup(np.zeros((2, 3), dtype=int))
    with pytest.raises(MalformedInputError):
        FiniteGroup([[0, 5], [1, 0]])
    with pytest.raises(MalformedInputError):
        FiniteGroup.from_dict({"order": 3, "table": [[0, 1], [1, 0]]})


def test_element_orders():
    z6 = FiniteGroup.cyclic(6)
    assert element_order(z6, 0) == 1
    assert element_order(z6, 1) == 6
    assert element_order(z6, 3) == 2
    with pytest.raises(PreconditionError):
        element_order(z6, 6)


def test_quaternion_has_a_single_involution():
    q = FiniteGroup.quaternion()
    assert q.order == 8
    assert sorted(q.element_orders.tolist()) == [1, 2, 4, 4, 4, 4, 4, 4]


def test_symmetric_and_dihedral_orders():
    assert FiniteGroup.symmetric(4).order == 24
    assert FiniteGroup.dihedral(5).order == 10
    assert max(FiniteGroup.dihedral(5).element_orders) == 5


def test_direct_product_z2_z3_is_cyclic_of_order_6():
    prod, emb = direct_product([FiniteGroup.cyclic(2), FiniteGroup.cyclic(3)])
    assert prod.order == 6 and validate_group(prod)
    x = prod.mul(emb[0](1), emb[1](1))
    assert element_order(prod, x) == 6
    assert all(e.is_homomorphism() and e.is_injective() for e in emb)


def test_direct_product_of_two_z2_is_klein():
    prod, _ = direct_product([FiniteGroup.cyclic(2)] * 2)
    assert sorted(prod.element_orders.tolist()) == [1, 2, 2, 2]


def test_direct_product_single_factor_and_cap():
    g = FiniteGroup.symmetric(3)
    prod, (emb,) = direct_product([g])
    assert np.array_equal(prod.table, g.table)
    with pytest.raises(CapExceededError):
        direct_product([FiniteGroup.cyclic(10)] * 3, cap=999)


def test_group_hom_checks():
    z4, z2 = FiniteGroup.cyclic(4), FiniteGroup.cyclic(2)
    assert GroupHom(z4, z2, np.array([0, 1, 0, 1])).is_homomorphism()
    assert not GroupHom(z4, z2, np.array([0, 1, 1, 0])).is_homomorphism()
    assert not GroupHom(z4, z2, np.array([0, 1, 0, 1])).is_injective()


@pytest.mark.parametrize("g", small_groups(), ids=lambda g: g.name or "g")
def test_json_round_trip(g):
    back = FiniteGroup.from_json(g.to_json())
    assert back == g and back.names == g.names


def test_inverse_and_power():
    s3 = FiniteGroup.symmetric(3)
    for x in range(s3.order):
        assert s3.mul(x, s3.inv(x)) == 0
        assert s3.power(x, element_order(s3, x)) == 0
        assert s3.power(x, -1) == s3.inv(x)


# -- lcm of layered quotients


def test_quotient_lcm_examples():
    q = quotient_lcm(6, [4, 6])
    assert (q.gcd, q.quotients, q.lcm) == (2, (3, 2), 6)
    q = quotient_lcm(12, [8, 12, 20])
    assert q.gcd == 4 and q.lcm == 12
    assert quotient_lcm(7, [5]).lcm == 7


def test_quotient_lcm_rejects_bad_input():
    with pytest.raises(PreconditionError):
        quotient_lcm(3, [])
    with pytest.raises(PreconditionError):
        quotient_lcm(0, [2])
    with pytest.raises(PreconditionError):
        quotient_lcm(3, [0])


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**6), st.lists(st.integers(1, 10**9), min_size=1, max_size=6))
def test_quotient_lcm_recovers_n(n, ls):
    q = quotient_lcm(n, ls)
    d = reduce(math.gcd, ls)
    # independent recomputation via math.lcm
    assert q.lcm == math.lcm(*[n * d // math.gcd(n * d, x) for x in ls]) == n


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(2, 6), min_size=1, max_size=3))
def test_direct_product_of_cyclics_matches_coordinatewise_addition(orders):
    prod, _ = direct_product([FiniteGroup.cyclic(n) for n in orders])
    coords = prod.coordinates
    for x, y in itertools.islice(itertools.product(range(prod.order), repeat=2), 200):
        want = (coords[x] + coords[y]) % np.array(orders)
        assert np.array_equal(coords[prod.mul(x, y)], want)
