import pytest

from fmr.errors import BudgetExceededError, InvalidInputError
from fmr.groups import (
    FiniteGroup,
    closure,
    cyclic_group,
    direct_power,
    elementary_abelian,
    hom_image_kernel,
    is_normal,
    iso_check,
    lagrange_check,
    quotient,
    semidirect_verify,
    subgroup_from_product,
)


def _s3():
    # permutations of 3 points under composition
    import itertools

    elems = list(itertools.permutations(range(3)))

    def comp(a, b):
        return tuple(a[b[i]] for i in range(3))

    return FiniteGroup(elems, comp, (0, 1, 2), label="S3")


def test_closure_empty_and_single():
    g = closure([], lambda a, b: (a + b) % 5, 0)
    assert g.order == 1
    g2 = closure([1], lambda a, b: (a + b) % 2, 0)
    assert g2.order == 2


def test_closure_cap():
    with pytest.raises(BudgetExceededError):
        closure([1], lambda a, b: (a + b) % 100, 0, max_order=10)


def test_normality_and_quotient():
    s3 = _s3()
    a3 = s3.subgroup([(0, 1, 2), (1, 2, 0), (2, 0, 1)], "A3")
    assert is_normal(a3, s3)
    q = quotient(s3, a3)
    assert q.order == 2
    flip = s3.subgroup([(0, 1, 2), (1, 0, 2)], "C2")
    assert not is_normal(flip, s3)
    with pytest.raises(InvalidInputError):
        quotient(s3, flip)
    assert quotient(s3, s3).order == 1


def test_semidirect():
    s3 = _s3()
    a3 = s3.subgroup([(0, 1, 2), (1, 2, 0), (2, 0, 1)], "A3")
    flip = s3.subgroup([(0, 1, 2), (1, 0, 2)], "C2")
    cert = semidirect_verify(s3, a3, flip)
    assert cert.valid
    bad = semidirect_verify(s3, a3, a3)
    assert not bad.valid and not bad.intersection_trivial


def test_iso_basic():
    assert iso_check(cyclic_group(2), elementary_abelian(2, 1)).isomorphic
    res = iso_check(cyclic_group(4), elementary_abelian(2, 2))
    assert not res.isomorphic and "fingerprint" in res.reason
    res6 = iso_check(cyclic_group(6), direct_power(cyclic_group(6), 1))
    assert res6.isomorphic
    # witness is a verified isomorphism
    c6 = cyclic_group(6)
    c2xc3 = FiniteGroup(
        [(a, b) for a in range(2) for b in range(3)],
        lambda x, y: ((x[0] + y[0]) % 2, (x[1] + y[1]) % 3),
        (0, 0),
    )
    res = iso_check(c6, c2xc3)
    assert res.isomorphic
    w = res.witness
    for a in range(6):
        for b in range(6):
            assert w[c6.op(a, b)] == c2xc3.op(w[a], w[b])


def test_iso_nonabelian():
    s3 = _s3()
    import itertools

    elems = list(itertools.permutations("xyz"))

    def comp(a, b):
        idx = {"x": 0, "y": 1, "z": 2}
        return tuple(a[idx[c]] for c in b)

    other = FiniteGroup(elems, comp, tuple("xyz"), label="S3'")
    assert iso_check(s3, other).isomorphic
    assert not iso_check(s3, cyclic_group(6)).isomorphic


def test_iso_budget():
    with pytest.raises(BudgetExceededError):
        iso_check(cyclic_group(30), cyclic_group(30), budget=10)


def test_hom_image_kernel():
    c6 = cyclic_group(6)
    c3 = cyclic_group(3)
    mapping = {x: x % 3 for x in range(6)}
    image, kernel = hom_image_kernel(c6, c3, mapping)
    assert image.order == 3 and kernel.order == 2
    ident, triv = hom_image_kernel(c6, c6, {x: x for x in range(6)})
    assert ident.order == 6 and triv.order == 1
    const, full = hom_image_kernel(c6, c3, {x: 0 for x in range(6)})
    assert const.order == 1 and full.order == 6
    with pytest.raises(InvalidInputError):
        hom_image_kernel(c6, c3, {x: (x + 1) % 3 for x in range(6)})


def test_product_subgroup_and_lagrange():
    s3 = _s3()
    a3 = s3.subgroup([(0, 1, 2), (1, 2, 0), (2, 0, 1)], "A3")
    flip = s3.subgroup([(0, 1, 2), (1, 0, 2)], "C2")
    prod = subgroup_from_product(s3, a3, flip)
    assert prod.order == 6
    for h in (a3, flip, prod):
        assert lagrange_check(s3, h)


def test_quotient_projection_is_homomorphism():
    s3 = _s3()
    a3 = s3.subgroup([(0, 1, 2), (1, 2, 0), (2, 0, 1)], "A3")
    q = quotient(s3, a3)
    proj = {}
    for g in s3.elements:
        proj[g] = tuple(sorted(s3.index[s3.op(g, h)] for h in a3.elements))
    image, kernel = hom_image_kernel(s3, q, proj)
    assert image.order == q.order and kernel.order == a3.order


def test_element_orders_and_center():
    s3 = _s3()
    orders = sorted(s3.element_order(g) for g in s3.elements)
    assert orders == [1, 2, 2, 2, 3, 3]
    assert len(s3.center_keys()) == 1
    assert not s3.is_abelian()
    assert cyclic_group(5).is_abelian()
