import pytest

from fmr.errors import BudgetExceededError, InvalidInputError, LawViolationError
from fmr.finring import construct_from_tables, construct_zmod
from fmr.formal import MultiplierSystem, build_formal_ring, make_triangular
from fmr.autgrp import (
    bimodule_iso_exists,
    canonical_subgroups,
    centralizer_units_of_l,
    certify_automorphism,
    condition_checks,
    decompose_inner_ring,
    enumerate_automorphisms,
    find_conjugator,
    identity_automorphism,
    inner_automorphism,
    inner_automorphisms,
    is_inner_multiplicative,
    lcm_block_context,
    multiplicative_profile,
    omega1_membership,
    psi0_group_direct,
    psi_group_direct,
    psi_predicted,
    ring_automorphism_from_base,
    ring_split,
    triangular_profile,
)

F4_ADD = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]
F4_MUL = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]]


def test_certify_identity(t2_z2):
    K = t2_z2.underlying
    phi = identity_automorphism(K)
    assert phi.is_identity()
    assert phi.certificate["pairwise"]


def test_certify_conjugation(t2_z3):
    K = t2_z3.underlying
    for u in K.units:
        ui = K.unit_inverse[u]
        image = [K.mul(K.mul(ui, x), u) for x in range(K.order)]
        certify_automorphism(K, image)


def test_certify_transpose_fails(m2_z2):
    K = m2_z2.underlying
    fmr = m2_z2

    def transpose(x):
        digs = K.unpack(x)
        t = [0] * 4
        for idx, (i, j) in enumerate(fmr.positions):
            t[fmr.pos_index[(j, i)]] = digs[idx]
        return K.pack(tuple(t))

    image = [transpose(x) for x in range(K.order)]
    with pytest.raises(LawViolationError) as exc:
        certify_automorphism(K, image)
    assert exc.value.law == "multiplicativity"


def test_enumerate_zmod():
    assert len(enumerate_automorphisms(construct_zmod(4))) == 1
    assert len(enumerate_automorphisms(construct_zmod(6))) == 1


def test_enumerate_f4_frobenius():
    f4 = construct_from_tables(F4_ADD, F4_MUL, 0, 1, label="F4")
    autos = enumerate_automorphisms(f4)
    assert len(autos) == 2
    frob = [f4.mul(x, x) for x in range(4)]
    assert any(list(a.images) == frob for a in autos)


def test_enumerate_t2_z2(t2_z2):
    K = t2_z2.underlying
    autos = enumerate_automorphisms(K)
    inns = inner_automorphisms(K)
    assert len(autos) == 2
    assert set(inns) == {a.key for a in autos}


def test_enumerate_m2_z2(m2_z2):
    K = m2_z2.underlying
    autos = enumerate_automorphisms(K)
    assert len(autos) == 6
    assert set(inner_automorphisms(K)) == {a.key for a in autos}


def test_enumeration_budget(t3_z2):
    with pytest.raises(BudgetExceededError):
        enumerate_automorphisms(t3_z2.underlying, cap=3)


def test_inner_basics(t2_z2):
    K = t2_z2.underlying
    assert inner_automorphism(K, K.one).is_identity()
    with pytest.raises(InvalidInputError):
        inner_automorphism(K, K.zero)
    # u = 1 + e12 sends e11 to e11 + e12 (characteristic 2)
    fmr = t2_z2
    e11 = K.pack(fmr.single_entry(1, 1, 1))
    e12 = K.pack(fmr.single_entry(1, 2, 1))
    u = K.add(K.one, e12)
    phi = inner_automorphism(K, u)
    assert phi.images[e11] == K.add(e11, e12)


def test_inner_composition_convention(t2_z3):
    # conj_u after conj_v equals conj_(v u) for phi(x) = u^-1 x u
    K = t2_z3.underlying
    us = K.units[:4]
    for u in us:
        for v in us:
            lhs = inner_automorphism(K, u).compose(inner_automorphism(K, v))
            rhs = inner_automorphism(K, K.mul(v, u))
            assert lhs.images == rhs.images
    # kernel of conjugation is exactly the central units
    kernel = [u for u in K.units if inner_automorphism(K, u).is_identity()]
    assert kernel == list(K.central_units)


def test_triangular_profile(t2_z2):
    K = t2_z2.underlying
    rs = ring_split(t2_z2)
    ident = identity_automorphism(K)
    prof = triangular_profile(ident, rs)
    assert prof.is_diagonal and prof.is_triangular
    fmr = t2_z2
    e11 = K.pack(fmr.single_entry(1, 1, 1))
    e12 = K.pack(fmr.single_entry(1, 2, 1))
    phi = inner_automorphism(K, K.add(K.one, e12))
    prof2 = triangular_profile(phi, rs)
    assert prof2.is_triangular and not prof2.is_diagonal
    assert prof2.delta[e11] == e12


def test_profile_gamma_nonzero_on_position_split(m2_z2):
    rs = ring_split(m2_z2, level="position")
    autos = enumerate_automorphisms(m2_z2.underlying)
    K = m2_z2.underlying
    assert any(
        any(v != K.zero for v in triangular_profile(a, rs, check_derivation=False).gamma.values())
        for a in autos
    )


def test_condition_checks(t2_z2, m2_z2):
    rs = ring_split(t2_z2)
    autos = enumerate_automorphisms(t2_z2.underlying)
    flags = condition_checks(rs, autos)
    assert flags.applicable and flags.condition_i and flags.condition_ii
    rsp = ring_split(m2_z2, level="position")
    flags2 = condition_checks(rsp, enumerate_automorphisms(m2_z2.underlying))
    assert not flags2.applicable


def test_subgroup_orders_t2_z3(t2_z3):
    subs = canonical_subgroups(t2_z3)
    table = subs.order_table()
    assert table["Aut"] == 6
    assert table["In1"] == 3 and table["In0"] == 2
    assert table["Psi"] == 2 and table["Psi0"] == 2
    assert table["Lambda"] == 2 and table["Omega"] == 1 and table["Out"] == 1


def test_subgroup_orders_t3_z2(t3_z2):
    subs = canonical_subgroups(t3_z2)
    table = subs.order_table()
    assert table["Aut"] == 8 == table["In1"]
    assert table["Lambda"] == 1 and table["Psi"] == 1


def test_psi_direct_matches_bundle(t2_z3):
    subs = canonical_subgroups(t2_z3)
    rs = subs.rs
    psi, _ = psi_group_direct(rs)
    assert psi.key_set() == subs.psi.key_set()
    psi0, _, _ = psi0_group_direct(rs)
    assert psi0.key_set() == subs.psi0.key_set()


def test_multiplicative_profile_t2_z3(t2_z3):
    rs = ring_split(t2_z3)
    psi, reg = psi_group_direct(rs)
    K = rs.ring
    nontrivial = [reg[k] for k in psi.elements if not reg[k].is_identity()]
    assert len(nontrivial) == 1
    phi = nontrivial[0]
    system = multiplicative_profile(phi, rs)
    assert system.candidates[(0, 1)] == (2,)  # scaling by 2 on the upper cell
    assert is_inner_multiplicative(system)
    # explicit conjugator diag(1, 2)
    fmr = t2_z3
    v = K.pack(
        tuple(
            2 if (i == j == 2) else (1 if i == j else fmr.cell_zero(i, j))
            for (i, j) in fmr.positions
        )
    )
    assert inner_automorphism(K, v).images == phi.images
    assert find_conjugator(K, phi, units=centralizer_units_of_l(rs)) is not None


def test_psi_predicted_cases(z2, z3, m2_z2, blocked_z3):
    # one block: no off-diagonal positions at all
    pred1 = psi_predicted(m2_z2)
    assert pred1.p == 0 and pred1.predicted_order == 1
    # two blocks: M^2 = 0 automatically, p = 2(m-1) = 2
    sigma = MultiplierSystem.from_partition(3, z3, [(1, 2), (3,)])
    K2 = build_formal_ring(z3, sigma)
    pred2 = psi_predicted(K2)
    assert pred2.p == 2 and pred2.predicted_order == 4
    psi2, _ = psi_group_direct(ring_split(K2))
    assert psi2.order == 4
    # three singleton blocks with everything zero: p = 6
    pred3 = psi_predicted(blocked_z3)
    assert pred3.p == 6 and pred3.predicted_order == 64


def test_psi_predicted_chain_sensitivity(z3):
    # strict-chain system: M_12 M_23 nonzero, so c_13 is determined: p = 4
    sigma = MultiplierSystem.from_partition(
        3, z3, [(1,), (2,), (3,)], cross={(1, 2, 3): 1}
    )
    K = build_formal_ring(z3, sigma)
    pred = psi_predicted(K)
    assert pred.reach_upper == [3, 3]
    assert pred.upper_extra == []
    assert pred.lower_extra == [(3, 1)]
    assert pred.p == 2 * 2 + 1
    psi, _ = psi_group_direct(ring_split(K))
    assert psi.order == pred.predicted_order == 2 ** 5


def test_decompose_identity(t2_z4):
    rs = ring_split(t2_z4)
    dec = decompose_inner_ring(identity_automorphism(rs.ring), rs)
    assert dec.inner.compose(dec.ring_part).is_identity()


def test_decompose_t3_z2_all(t3_z2):
    rs = ring_split(t3_z2)
    for phi in enumerate_automorphisms(rs.ring):
        dec = decompose_inner_ring(phi, rs)
        assert dec.ring_part.is_identity()  # the base has no automorphisms
        assert dec.inner.compose(dec.ring_part).images == phi.images


def test_decompose_roundtrip_with_base_automorphism():
    f4 = construct_from_tables(F4_ADD, F4_MUL, 0, 1, label="F4")
    T = make_triangular(f4, 2)
    rs = ring_split(T)
    K = rs.ring
    frob = next(
        a for a in enumerate_automorphisms(f4) if not a.is_identity()
    )
    gamma = ring_automorphism_from_base(T, frob)
    u = next(u for u in K.units if not inner_automorphism(K, u).is_identity())
    phi = inner_automorphism(K, u).compose(gamma)
    phi = certify_automorphism(K, phi.images)
    dec = decompose_inner_ring(phi, rs)
    assert dec.inner.compose(dec.ring_part).images == phi.images
    assert not dec.base_automorphism.is_identity()


def test_decompose_rejects_nontriangular(m2_z2):
    rs = ring_split(m2_z2)
    with pytest.raises(InvalidInputError):
        decompose_inner_ring(identity_automorphism(rs.ring), rs)


def test_bimodule_iso_identity(z2):
    ctx = lcm_block_context(z2, 1, 2)
    ida = identity_automorphism(z2)
    idq = identity_automorphism(ctx.q_ring)
    res = bimodule_iso_exists(ida, idq, ctx)
    assert res.exists and res.agree


def test_bimodule_iso_all_pairs_z2(z2):
    ctx = lcm_block_context(z2, 1, 2)
    for g in enumerate_automorphisms(ctx.q_ring):
        res = bimodule_iso_exists(identity_automorphism(z2), g, ctx)
        assert res.exists and res.agree


def test_bimodule_automorphism_count_z4(z4):
    # direct search over additive bijections of Z/4 respecting both actions
    count = 0
    for c in range(4):
        arr = [z4.mul(c, x) for x in range(4)]
        if sorted(arr) == [0, 1, 2, 3] and all(
            arr[z4.mul(a, z4.mul(v, b))] == z4.mul(a, z4.mul(arr[v], b))
            for a in range(4)
            for v in range(4)
            for b in range(4)
        ):
            count += 1
    assert count == len(z4.central_units) == 2
    ctx = lcm_block_context(z4, 1, 1)
    res = bimodule_iso_exists(
        identity_automorphism(z4), identity_automorphism(z4), ctx
    )
    assert res.exists


def test_omega1_membership(z2):
    sigma = MultiplierSystem.from_partition(3, z2, [(1,), (2, 3)])
    K = build_formal_ring(z2, sigma)
    rs = ring_split(K)
    comp2 = [
        R for R in [construct_zmod(2)]
    ]
    from fmr.formal import matrix_ring

    m2 = matrix_ring(z2, 2).underlying
    id1 = identity_automorphism(z2)
    assert omega1_membership([id1, identity_automorphism(m2)], rs)
    for a in enumerate_automorphisms(m2):
        # every automorphism of M(2,Z/2) is inner, so every pair qualifies
        assert omega1_membership([id1, a], rs)


def test_scalar_group_on_blocked(z2):
    sigma = MultiplierSystem.from_partition(3, z2, [(1, 2), (3,)])
    K = build_formal_ring(z2, sigma)
    subs = canonical_subgroups(K)
    # block orders (2, 1): smallest is 1, so scalars lift base automorphisms
    assert subs.d_scalar is not None
    assert subs.d_scalar.order == 1  # Z/2 has no automorphisms
    assert subs.sigma_lift is not None and subs.sigma_lift.order == 1


def test_inner_subgroups_normal_and_semidirect(t2_z3, t3_z2):
    from fmr.groups import is_normal, semidirect_verify

    for fmr in (t2_z3, t3_z2):
        subs = canonical_subgroups(fmr)
        assert is_normal(subs.inn, subs.aut)
        assert is_normal(subs.in1, subs.aut)
        cert = semidirect_verify(subs.inn, subs.in1, subs.in0)
        assert cert.valid


def test_lagrange_on_all_handles(t2_z3):
    from fmr.groups import lagrange_check

    subs = canonical_subgroups(t2_z3)
    handles = [
        subs.inn, subs.in1, subs.in0, subs.psi, subs.psi0, subs.lam,
        subs.phi_grp, subs.ker_f, subs.ker_g, subs.delta_grp,
    ]
    for h in handles:
        if h is not None:
            assert lagrange_check(subs.aut, h), h.label
    for h in (subs.in_aut_l, subs.omega, subs.omega1, subs.gamma_grp,
              subs.sigma_perm, subs.d_scalar):
        if h is not None:
            assert lagrange_check(subs.aut_l, h), h.label


def test_group_closure_under_composition(t3_z2):
    autos = enumerate_automorphisms(t3_z2.underlying)
    keys = {a.key for a in autos}
    for a in autos:
        assert a.inverse().key in keys
        for b in autos:
            assert a.compose(b).key in keys


def test_one_line_serialization(t2_z2):
    K = t2_z2.underlying
    phi = identity_automorphism(K)
    assert phi.one_line() == list(range(K.order))


def test_closure_of_inner_generators(t3_z2):
    from fmr.groups import closure

    K = t3_z2.underlying
    gens = []
    for (i, j) in ((1, 2), (2, 3), (1, 3)):
        e = K.pack(t3_z2.single_entry(i, j, 1))
        gens.append(inner_automorphism(K, K.add(K.one, e)))
    grp = closure(
        gens,
        lambda a, b: a.compose(b),
        identity_automorphism(K),
        label="In1",
    )
    assert grp.order == 8
