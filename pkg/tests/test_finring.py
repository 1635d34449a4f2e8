import math

import pytest
from hypothesis import given, settings, strategies as st

from fmr.errors import AxiomViolationError, CenterMismatchError, InvalidInputError
from fmr.finring import (
    center_and_central_units,
    construct_from_tables,
    construct_product,
    construct_zmod,
    idempotent_analysis,
    is_commutative,
    is_local,
    is_normal_ring,
    jacobson_radical,
    ring_condition_profile,
    subring,
    units,
)

F4_ADD = [
    [0, 1, 2, 3],
    [1, 0, 3, 2],
    [2, 3, 0, 1],
    [3, 2, 1, 0],
]
# 0, 1, x, x+1 with x^2 = x + 1
F4_MUL = [
    [0, 0, 0, 0],
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
]


def test_zmod_basic():
    r = construct_zmod(4)
    assert r.order == 4 and r.one == 1 and r.zero == 0
    assert construct_zmod(2).order == 2


def test_zmod_invalid_modulus():
    with pytest.raises(InvalidInputError):
        construct_zmod(1)
    with pytest.raises(InvalidInputError):
        construct_zmod(0)


def test_from_tables_z2():
    r = construct_from_tables([[0, 1], [1, 0]], [[0, 0], [0, 1]], 0, 1)
    assert r.order == 2


def test_from_tables_corrupted_z4():
    z4 = construct_zmod(4)
    mul = [list(row) for row in z4._mul]
    mul[2][2] = 1
    with pytest.raises(AxiomViolationError) as exc:
        construct_from_tables(z4._add, mul, 0, 1)
    assert exc.value.law in ("associativity", "left distributivity", "right distributivity")
    assert len(exc.value.witness) == 3


def test_from_tables_f4():
    f4 = construct_from_tables(F4_ADD, F4_MUL, 0, 1, label="F4")
    assert f4.order == 4
    assert len(f4.units) == 3  # every nonzero element of a field


def test_product_is_z6():
    p = construct_product([construct_zmod(2), construct_zmod(3)])
    z6 = construct_zmod(6)
    assert p.order == 6
    # independent oracle: brute-force search over all bijections for a ring
    # isomorphism onto Z/6
    import itertools

    found = None
    for perm in itertools.permutations(range(6)):
        if perm[p.zero] != z6.zero or perm[p.one] != z6.one:
            continue
        if all(
            perm[p.add(a, b)] == z6.add(perm[a], perm[b])
            and perm[p.mul(a, b)] == z6.mul(perm[a], perm[b])
            for a in range(6)
            for b in range(6)
        ):
            found = perm
            break
    assert found is not None


def test_product_singleton_and_idempotents():
    z2 = construct_zmod(2)
    assert construct_product([z2]).order == 2
    sq = construct_product([z2, construct_zmod(2)])
    # direct idempotent scan
    assert sum(1 for x in range(sq.order) if sq.mul(x, x) == x) == 4
    assert len(sq.idempotents) == 4


def test_product_injections_projections():
    p = construct_product([construct_zmod(2), construct_zmod(3)])
    x = p.inject(1, 2)
    assert p.project(1, x) == 2 and p.project(0, x) == 0


def test_units_zmod():
    assert [u.index for u in units(construct_zmod(4))] == [1, 3]
    assert [u.index for u in units(construct_zmod(2))] == [1]


def test_units_m2_z2(m2_z2):
    # |GL_2(F_2)| = (4 - 1)(4 - 2) = 6
    assert len(m2_z2.underlying.units) == 6


def test_center_m2_z2(m2_z2):
    K = m2_z2.underlying
    Z, cu = center_and_central_units(K)
    assert Z.order == 2  # 0 and the identity matrix
    assert cu.order == 1


def test_center_commutative():
    z6 = construct_zmod(6)
    Z, cu = center_and_central_units(z6)
    assert Z.order == 6
    z3 = construct_zmod(3)
    _, cu3 = center_and_central_units(z3)
    assert sorted(cu3.elements) == [1, 2]


def test_unit_center_mismatch_detected(t3_z2):
    # the unipotent group of T(3, Z/2) has a bigger center than the ring
    # center provides, so the equation C(U(R)) = U(Z(R)) must be rejected
    with pytest.raises(CenterMismatchError):
        center_and_central_units(t3_z2.underlying)


def test_idempotents_z6():
    z6 = construct_zmod(6)
    ana = idempotent_analysis(z6)
    assert ana.idempotents == [0, 1, 3, 4]
    assert not ana.indecomposable
    assert ana.witnesses["central_idempotent"] == 3


def test_idempotents_z4():
    ana = idempotent_analysis(construct_zmod(4))
    assert ana.indecomposable and ana.strongly_indecomposable and ana.condition4


def test_idempotents_t2_z2(t2_z2):
    K = t2_z2.underlying
    ana = idempotent_analysis(K)
    assert not ana.strongly_indecomposable
    assert not ana.condition4
    e = ana.witnesses["condition4"]
    # the witness satisfies (1-e)Ke = 0 but eK(1-e) != 0, by direct scan
    ce = K.sub(K.one, e)
    assert all(K.mul(K.mul(ce, r), e) == K.zero for r in range(K.order))
    assert any(K.mul(K.mul(e, r), ce) != K.zero for r in range(K.order))


def test_radical_examples():
    ra4 = jacobson_radical(construct_zmod(4))
    assert ra4.elements == [0, 2]
    assert ra4.factor.order == 2 and ra4.factor_indecomposable
    ra3 = jacobson_radical(construct_zmod(3))
    assert ra3.elements == [0] and ra3.semiprime
    ra6 = jacobson_radical(construct_zmod(6))
    assert ra6.elements == [0] and ra6.semiprime
    assert not idempotent_analysis(ra6.factor).indecomposable


def test_radical_nilpotence():
    z8 = construct_zmod(8)
    ra = jacobson_radical(z8)
    assert ra.elements == [0, 2, 4, 6]
    assert ra.nilpotence_degree == 3
    # direct product oracle: J^3 = 0, J^2 != 0
    j2 = {z8.mul(a, b) for a in ra.elements for b in ra.elements}
    assert j2 == {0, 4}
    assert {z8.mul(a, b) for a in j2 for b in ra.elements} == {0}


def _corpus():
    rings = [construct_zmod(n) for n in (2, 3, 4, 5, 6, 8, 9, 12)]
    rings.append(construct_from_tables(F4_ADD, F4_MUL, 0, 1, label="F4"))
    rings.append(construct_product([construct_zmod(2), construct_zmod(3)]))
    rings.append(construct_product([construct_zmod(2), construct_zmod(2)]))
    return rings


def test_condition_implication_chain():
    for R in _corpus():
        p = ring_condition_profile(R)
        if p.factor_mod_radical_indecomposable:
            assert p.strongly_indecomposable, R.label
        if p.strongly_indecomposable:
            assert p.indecomposable, R.label
            assert p.condition4, R.label


def test_condition4_sufficient_hypotheses(t2_z2, t3_z2, m2_z2):
    rings = _corpus() + [m2_z2.underlying]
    for R in rings:
        p = ring_condition_profile(R)
        if p.semiprime or is_commutative(R) or is_normal_ring(R) or p.strongly_indecomposable:
            assert p.condition4, R.label


def test_local_flags():
    assert is_local(construct_zmod(4))
    assert is_local(construct_zmod(2))
    assert not is_local(construct_zmod(6))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=24))
def test_zmod_units_and_radical_oracles(n):
    r = construct_zmod(n)
    assert sorted(r.units) == [x for x in range(n) if math.gcd(x, n) == 1]
    # x generates a nilpotent ideal iff every prime of n divides x
    primes = {p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))}
    rad = [x for x in range(n) if all(x % p == 0 for p in primes)]
    assert sorted(r.radical) == sorted(rad)


def test_additive_closure_replay():
    for R in _corpus():
        identity = R.apply_generator_images([R.gen_sequence[k] for k in range(len(R.gen_sequence))])
        assert identity == list(range(R.order))


def test_subring_closure_rejection(t2_z2):
    K = t2_z2.underlying
    with pytest.raises(InvalidInputError):
        subring(K, [K.zero, K.one, 3], label="bad")


def test_dual_route_units_and_radical(m2_z2, m2_z3, m2_z4):
    # structured routes against the definitional brute scans
    for fmr in (m2_z2, m2_z3, m2_z4):
        K = fmr.underlying
        brute_units = []
        for x in range(K.order):
            inv = next(
                (
                    y
                    for y in range(K.order)
                    if K.mul(x, y) == K.one and K.mul(y, x) == K.one
                ),
                None,
            )
            if inv is not None:
                brute_units.append(x)
        assert brute_units == list(K.units), fmr.label
        brute_rad = [
            x
            for x in range(K.order)
            if all(K.is_unit[K.sub(K.one, K.mul(r, x))] for r in range(K.order))
        ]
        assert brute_rad == list(K.radical), fmr.label


def test_empty_product_rejected():
    with pytest.raises(InvalidInputError):
        construct_product([])


def test_unit_groups_close():
    from fmr.finring import unit_group

    for R in _corpus():
        g = unit_group(R)  # construction verifies closure and inverses
        assert g.order == len(R.units)
