import pytest

from fmr.errors import (
    AxiomViolationError,
    InvalidInputError,
    UnsupportedMultiplierError,
)
from fmr.formal import (
    GeneralFormalData,
    MultiplierSystem,
    build_formal_ring,
    build_general_formal,
    certify_tau_isomorphism,
    m_square_zero_check,
    make_triangular,
    make_triangular_data,
    multiplier_matrix_and_classes,
    normalize_blocks,
    sigma_block_form,
    split_and_trace_ideals,
    validate_multiplier_system,
)


def test_all_ones_valid(z2):
    sigma = MultiplierSystem.all_ones(2, z2)
    assert validate_multiplier_system(sigma).valid


def test_all_zero_valid(z3):
    sigma = MultiplierSystem.all_zero(3, z3)
    report = validate_multiplier_system(sigma)
    assert report.valid


def test_invalid_trichotomy_example(z3):
    # s_121 = 0, s_232 = 1, s_131 = 1 with the remaining values defaulted to 1
    sigma = MultiplierSystem.from_binary(
        3, z3, {(1, 2, 1): 0, (2, 3, 2): 1, (1, 3, 1): 1}, default=1
    )
    report = validate_multiplier_system(sigma)
    assert not report.valid
    assert report.identity_violations


def test_noncentral_multiplier_rejected(m2_z2):
    K = m2_z2.underlying
    e12 = K.pack(m2_z2.single_entry(1, 2, m2_z2.base.one))
    with pytest.raises(InvalidInputError):
        MultiplierSystem(2, K, {(1, 2, 1): e12})


def test_classes(z2, z3):
    _, classes = multiplier_matrix_and_classes(MultiplierSystem.all_ones(2, z2))
    assert classes == [(1, 2)]
    _, classes = multiplier_matrix_and_classes(MultiplierSystem.all_zero(3, z3))
    assert classes == [(1,), (2,), (3,)]
    sigma = MultiplierSystem.from_partition(3, z3, [(1, 2), (3,)])
    _, classes = multiplier_matrix_and_classes(sigma)
    assert classes == [(1, 2), (3,)]


def test_non_binary_rejected(z3):
    # s = 2 on pairwise-distinct triples is central and satisfies the
    # identities over Z/3 (2 * 2 = 1), but is not a 0/1 system
    entries = {
        (i, j, k): 2
        for i in range(1, 4)
        for j in range(1, 4)
        for k in range(1, 4)
        if len({i, j, k}) == 3
    }
    sigma = MultiplierSystem(3, z3, entries, default=z3.one)
    assert validate_multiplier_system(sigma).valid
    assert not sigma.is_binary()
    with pytest.raises(UnsupportedMultiplierError):
        multiplier_matrix_and_classes(sigma)
    # construction is still allowed for general central multipliers
    # (tuple level: this exotic ring has no structured unit route)
    K = build_formal_ring(z3, sigma, materialize_limit=0)
    assert K.order == 3 ** 9 and K.blocks is None
    e12 = K.matrix_units[(1, 2)]
    e23 = K.matrix_units[(2, 3)]
    assert K.t_mul(e12, e23) == K.single_entry(1, 3, 2)


def test_normalize_split_classes(z3):
    sigma = MultiplierSystem.from_partition(3, z3, [(1, 3), (2,)])
    blocks, tau_sigma = normalize_blocks(sigma)
    assert blocks.tau == (1, 3, 2)
    assert blocks.block_orders == [2, 1]
    assert validate_multiplier_system(tau_sigma).valid
    assert sigma_block_form(tau_sigma) is not None
    assert sigma_block_form(sigma) is None


def test_normalize_identity_cases(z2):
    blocks, _ = normalize_blocks(MultiplierSystem.all_zero(2, z2))
    assert blocks.tau == (1, 2)
    blocks, _ = normalize_blocks(MultiplierSystem.all_ones(2, z2))
    assert blocks.tau == (1, 2) and blocks.m == 1 and blocks.block_orders == [2]


def test_build_m2_z2(m2_z2):
    assert m2_z2.order == 16
    assert len(m2_z2.underlying.units) == 6
    # matrix unit relations
    e12 = m2_z2.matrix_units[(1, 2)]
    e21 = m2_z2.matrix_units[(2, 1)]
    assert m2_z2.t_mul(e12, e21) == m2_z2.matrix_units[(1, 1)]
    assert m2_z2.t_mul(e12, e12) == m2_z2.zero_tuple


def test_build_m2_z3_zero(z3):
    K = build_formal_ring(z3, MultiplierSystem.all_zero(2, z3))
    assert K.order == 81
    # every product between the two off-diagonal cells vanishes
    for a in K.cell_members(1, 2):
        for b in K.cell_members(2, 1):
            x = K.single_entry(1, 2, a)
            y = K.single_entry(2, 1, b)
            assert K.t_mul(x, y) == K.zero_tuple
            assert K.t_mul(y, x) == K.zero_tuple


def test_build_invalid_sigma_rejected(z3):
    sigma = MultiplierSystem.from_binary(
        3, z3, {(1, 2, 1): 0, (2, 3, 2): 1, (1, 3, 1): 1}, default=1
    )
    with pytest.raises(InvalidInputError):
        build_formal_ring(z3, sigma)


def test_tau_isomorphism_certificate(z3):
    K = build_formal_ring(z3, MultiplierSystem.all_zero(2, z3))
    K_tau, cert = certify_tau_isomorphism(K, (2, 1), exhaustive=True)
    assert cert.valid and cert.exhaustive


def test_make_triangular_orders(z2, z3):
    assert make_triangular(z2, 2).order == 8
    t33 = make_triangular(z3, 3)
    assert t33.order == 729


def test_general_with_zero_product_map(z2, t3_z2):
    data = make_triangular_data(z2, 3)
    zero13 = data.bimodules[(1, 3)].zero
    zero_table = [
        [zero13] * data.bimodules[(2, 3)].size
        for _ in range(data.bimodules[(1, 2)].size)
    ]
    data = GeneralFormalData(
        rings=data.rings,
        bimodules=data.bimodules,
        products={(1, 2, 3): zero_table},  # explicit zero map through M_13
        base=z2,
        triangular=False,
    )
    K = build_general_formal(data)
    assert K.order == 64
    e12 = K.single_entry(1, 2, 1)
    e23 = K.single_entry(2, 3, 1)
    assert K.t_mul(e12, e23) == K.zero_tuple
    # distinct from the canonical triangular ring, where the product is e13
    canonical = t3_z2
    assert canonical.t_mul(e12, e23) == canonical.single_entry(1, 3, 1)


def test_general_validation_catches_bad_action(z2):
    data = make_triangular_data(z2, 2)
    data.bimodules[(1, 2)].left[1] = [0, 0]  # breaks unitality of the action
    with pytest.raises(AxiomViolationError):
        build_general_formal(data)


def test_trace_ideals_triangular(t3_z2, t2_z4):
    for fmr in (t3_z2, t2_z4):
        split = split_and_trace_ideals(fmr)
        assert split.zero_trace
        assert split.nilpotence_degree is not None
        assert split.nilpotence_degree <= fmr.n


def test_trace_ideals_m2_z2_positions(m2_z2):
    split = split_and_trace_ideals(m2_z2, level="position")
    assert not split.zero_trace
    assert [len(t) for t in split.trace_ideals] == [2, 2]
    assert split.nilpotence_degree is None


def test_trace_ideals_blocked(blocked_z3):
    split = split_and_trace_ideals(blocked_z3, level="block")
    assert split.zero_trace
    assert split.nilpotence_degree == 2


def test_m_square_zero_allzero(z3):
    rep = m_square_zero_check(MultiplierSystem.all_zero(3, z3))
    assert rep.criterion and rep.direct and rep.agree


def test_m_square_zero_two_blocks(z2):
    sigma = MultiplierSystem.from_partition(3, z2, [(1, 2), (3,)])
    rep = m_square_zero_check(sigma)
    assert rep.criterion and rep.direct


def test_m_square_nonzero_strict_order(z3):
    # singleton classes with the strict-chain cross multiplier s_123 = 1
    sigma = MultiplierSystem.from_partition(
        3, z3, [(1,), (2,), (3,)], cross={(1, 2, 3): 1}
    )
    assert validate_multiplier_system(sigma).valid
    rep = m_square_zero_check(sigma)
    assert not rep.criterion and not rep.direct and rep.agree


def test_materialization_limit(z3):
    K = build_formal_ring(z3, MultiplierSystem.all_zero(2, z3), materialize_limit=10)
    assert K.underlying is None
    # tuple-level arithmetic still works
    assert K.t_mul(K.one_tuple, K.one_tuple) == K.one_tuple


def test_split_sizes(t2_z3):
    split = split_and_trace_ideals(t2_z3)
    assert split.l_size == 9 and split.m_size == 3


def test_zero_trace_iff_m_is_ideal(t3_z2, m2_z2):
    # zero trace ideals exactly when the off-diagonal part absorbs
    # multiplication by the whole ring on both sides
    from fmr.autgrp import ring_split

    for fmr, level in ((t3_z2, "position"), (m2_z2, "position")):
        rs = ring_split(fmr, level=level)
        K = rs.ring
        mset = set(rs.m_indices)
        closed = all(
            K.mul(x, mm) in mset and K.mul(mm, x) in mset
            for x in range(K.order)
            for mm in rs.m_indices
        )
        assert closed == rs.split.zero_trace, fmr.label


def test_nilpotence_degree_at_most_block_count(z2, z3, blocked_z3):
    from fmr.formal import MultiplierSystem, build_formal_ring, split_and_trace_ideals

    sigma = MultiplierSystem.from_partition(3, z2, [(1, 2), (3,)])
    K = build_formal_ring(z2, sigma)
    split = split_and_trace_ideals(K, level="block")
    assert split.zero_trace and split.nilpotence_degree <= 2
    split3 = split_and_trace_ideals(blocked_z3, level="block")
    assert split3.nilpotence_degree <= 3
