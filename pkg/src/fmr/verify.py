"""Executable checks for the structural results, compiled into reports.

Each check id names one labeled fact about formal matrix rings. A check
evaluates its preconditions first and reports `not-applicable` with the
named unmet precondition, `pass`, or `fail` with a concrete witness (the
smallest one in canonical order). Iff-statements are checked in both
directions and quantified statements range over the whole relevant sets.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .errors import (
    BudgetExceededError,
    FmrError,
    InvalidInputError,
    TheoremViolationError,
)
from .finring import (
    FiniteRing,
    RingConditionProfile,
    is_commutative,
    is_local,
    is_normal_ring,
    ring_condition_profile,
)
from .formal import FormalMatrixRing, matrix_ring, m_square_zero_check
from .autgrp import (
    AutomorphismSubgroups,
    RingAutomorphism,
    RingSplit,
    canonical_subgroups,
    centralizer_units_of_l,
    certify_automorphism,
    decompose_inner_ring,
    enumerate_automorphisms,
    find_conjugator,
    inner_automorphisms,
    is_inner_multiplicative,
    lcm_block_context,
    bimodule_iso_exists,
    multiplicative_profile,
    omega1_membership,
    psi_predicted,
    ring_automorphism_from_base,
    ring_split,
)
from .groups import (
    FiniteGroup,
    direct_power,
    iso_check,
    is_normal,
    quotient,
    semidirect_verify,
    sorted_keys,
    subgroup_from_product,
)

DEFAULT_ISO_BUDGET = 2000


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------

class VerifyContext:
    """Caches the expensive structures of one instance across checks."""

    def __init__(
        self,
        fmr: FormalMatrixRing,
        cap: int = 10_000_000,
        iso_budget: int = DEFAULT_ISO_BUDGET,
    ):
        self.fmr = fmr
        self.cap = cap
        self.iso_budget = iso_budget
        self._cache: dict = {}

    def _get(self, key: str, builder: Callable):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def ring(self) -> FiniteRing:
        if self.fmr.underlying is None:
            raise BudgetExceededError(
                f"instance of order {self.fmr.order} is not materialized"
            )
        return self.fmr.underlying

    @property
    def rs(self) -> RingSplit:
        return self._get("rs", lambda: ring_split(self.fmr))

    @property
    def subs(self) -> AutomorphismSubgroups:
        return self._get(
            "subs", lambda: canonical_subgroups(self.fmr, cap=self.cap, rs=self.rs)
        )

    @property
    def base_profile(self) -> Optional[RingConditionProfile]:
        if self.fmr.base is None:
            return None
        return self._get(
            "base_profile", lambda: ring_condition_profile(self.fmr.base)
        )

    @property
    def component_rings(self) -> List[FiniteRing]:
        def build():
            out = []
            for grp in self.rs.groups:
                if len(grp) == 1:
                    out.append(self.fmr.component_ring(grp[0]))
                else:
                    out.append(matrix_ring(self.fmr.base, len(grp)).underlying)
            return out

        return self._get("component_rings", build)

    @property
    def component_profiles(self) -> List[RingConditionProfile]:
        return self._get(
            "component_profiles",
            lambda: [ring_condition_profile(R) for R in self.component_rings],
        )

    @property
    def component_auts(self) -> List[List[RingAutomorphism]]:
        return self._get(
            "component_auts",
            lambda: [
                enumerate_automorphisms(R, cap=self.cap)
                for R in self.component_rings
            ],
        )

    @property
    def psi_bundle(self):
        """Psi and Psi0 with registries, via the pinned direct enumeration.

        Works on instances whose full automorphism group is out of budget;
        on small instances it agrees with the subgroup-bundle Psi (asserted
        in the test suite).
        """

        def build():
            from .autgrp import psi_group_direct, psi0_group_direct

            psi, reg = psi_group_direct(self.rs, cap=self.cap)
            psi0, reg0, units0 = psi0_group_direct(self.rs)
            for key in psi0.elements:
                if key not in psi.index:
                    raise TheoremViolationError("psi0-not-inside-psi", witness=key)
                reg.setdefault(key, reg0[key])
            return psi, reg, psi0

        return self._get("psi_bundle", build)

    def component_restriction(
        self, alpha: RingAutomorphism
    ) -> Optional[List[RingAutomorphism]]:
        """Per-block restriction of an Aut L element fixing every block."""
        rs = self.rs
        lr = rs.l_ring
        fmr = self.fmr
        out = []
        for gi, grp in enumerate(rs.groups):
            comp = self.component_rings[gi]
            imap = [0] * comp.order
            for d in range(comp.order):
                if len(grp) == 1:
                    src_t = fmr.single_entry(grp[0], grp[0], d)
                else:
                    sub = comp.unpack(d)
                    t = list(fmr.zero_tuple)
                    for idx, (a, b) in enumerate(comp.fmr.positions):
                        t[fmr.pos_index[(grp[a - 1], grp[b - 1])]] = sub[idx]
                    src_t = tuple(t)
                src = rs.ring.pack(src_t)
                img = alpha.images[lr.parent_position[src]]
                img_t = rs.ring.unpack(lr.parent_indices[img])
                if len(grp) == 1:
                    out_d = img_t[fmr.pos_index[(grp[0], grp[0])]]
                else:
                    sub_i = tuple(
                        img_t[fmr.pos_index[(grp[a - 1], grp[b - 1])]]
                        for (a, b) in comp.fmr.positions
                    )
                    if any(
                        img_t[fmr.pos_index[p]] != fmr.cell_zero(*p)
                        for p in fmr.positions
                        if not (p[0] in grp and p[1] in grp)
                    ):
                        return None
                    out_d = comp.pack(sub_i)
                imap[d] = out_d
            try:
                out.append(certify_automorphism(comp, imap))
            except FmrError:
                return None
        return out

    def group_cell_members(self, a: int, b: int) -> List[int]:
        """Ring indices of the elements supported in group cell (a, b)."""
        import itertools as _it

        fmr = self.fmr
        rs = self.rs
        positions = [(i, j) for i in rs.groups[a] for j in rs.groups[b]]
        ranges = [range(fmr.cell_sizes[p]) for p in positions]
        out = []
        for combo in _it.product(*ranges):
            t = list(fmr.zero_tuple)
            for p, v in zip(positions, combo):
                t[fmr.pos_index[p]] = v
            out.append(rs.ring.pack(tuple(t)))
        return sorted(out)

    def is_plain_matrix_instance(self) -> bool:
        fmr = self.fmr
        return (
            fmr.kind == "sigma"
            and fmr.blocks is not None
            and fmr.blocks.m == 1
        )


# ---------------------------------------------------------------------------
# result records
# ---------------------------------------------------------------------------

PASS = "pass"
FAIL = "fail"
NA = "not-applicable"


@dataclass
class ResultCheck:
    id: str
    outcome: str
    witnesses: dict = field(default_factory=dict)
    unmet: List[str] = field(default_factory=list)
    millis: Optional[int] = None

    def to_json_obj(self, include_timings: bool = False) -> dict:
        return {
            "id": self.id,
            "outcome": self.outcome,
            "witnesses": _jsonable(self.witnesses),
            "millis": self.millis if include_timings else None,
        }


@dataclass
class VerificationReport:
    instance: str
    checks: List[ResultCheck]
    summary: Dict[str, int]

    def to_json_obj(self, include_timings: bool = False) -> dict:
        return {
            "instance": self.instance,
            "checks": [c.to_json_obj(include_timings) for c in self.checks],
            "summary": dict(self.summary),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


# ---------------------------------------------------------------------------
# check helpers
# ---------------------------------------------------------------------------

def _na(*unmet: str) -> Tuple[str, dict, List[str]]:
    return (NA, {}, list(unmet))


def _pass(**witnesses) -> Tuple[str, dict, List[str]]:
    return (PASS, witnesses, [])


def _fail(**witnesses) -> Tuple[str, dict, List[str]]:
    return (FAIL, witnesses, [])


def _requires_zero_trace_and_i(ctx: VerifyContext) -> Optional[Tuple[str, dict, List[str]]]:
    if not ctx.rs.split.zero_trace:
        return _na("zero-trace-ideals")
    if not ctx.subs.condition_i_holds:
        return _na("condition-I")
    return None


def _iso(ctx, g1: FiniteGroup, g2: FiniteGroup):
    return iso_check(g1, g2, budget=ctx.iso_budget)


def _semidirect_outcome(cert) -> Tuple[str, dict, List[str]]:
    if cert.valid:
        return _pass()
    return _fail(semidirect=cert.witnesses)


def _central_unit_group(R: FiniteRing) -> FiniteGroup:
    R.verify_unit_center_equality()
    return FiniteGroup(list(R.central_units), R.mul, R.one, label=f"C(U({R.label}))")


def _triangular_shape(fmr: FormalMatrixRing) -> bool:
    return fmr.kind == "triangular"


# ---------------------------------------------------------------------------
# the checks
# ---------------------------------------------------------------------------

CheckFn = Callable[[VerifyContext], Tuple[str, dict, List[str]]]
_REGISTRY: Dict[str, CheckFn] = {}
CHECK_IDS: List[str] = []


def check(id_: str):
    def deco(fn: CheckFn) -> CheckFn:
        _REGISTRY[id_] = fn
        CHECK_IDS.append(id_)
        return fn

    return deco


@check("Rel-2-1")
def _rel_2_1(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    psi_in = s.psi.key_set() & s.inn.key_set()
    psi_in0 = s.psi.key_set() & s.in0.key_set()
    psi0 = s.psi0.key_set()
    if psi_in == psi_in0 == psi0:
        return _pass(order=len(psi0))
    return _fail(
        psi_cap_in=len(psi_in), psi_cap_in0=len(psi_in0), psi0=len(psi0)
    )


@check("Rel-2-2")
def _rel_2_2(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        in0psi = subgroup_from_product(s.aut, s.in0, s.psi, "In0.Psi")
        lam_sub = s.lam.subgroup(in0psi.elements, "In0.Psi")
        q1 = quotient(s.lam, lam_sub)
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    try:
        q2 = quotient(s.omega, s.omega.subgroup(s.in_aut_l.elements, "InAutL"))
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    res = _iso(ctx, q1, q2)
    if res.isomorphic:
        return _pass(order=q1.order)
    return _fail(reason=res.reason, left=q1.order, right=q2.order)


@check("Rel-2-3")
def _rel_2_3(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        q1 = quotient(s.phi_grp, s.phi_grp.subgroup(s.ker_f.elements, "KerF"))
        q2 = quotient(s.in0, s.in0.subgroup(s.psi0.elements, "Psi0"))
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    r1 = _iso(ctx, q1, q2)
    r2 = _iso(ctx, q2, s.in_aut_l)
    if r1.isomorphic and r2.isomorphic:
        return _pass(order=q1.order)
    return _fail(first=r1.reason, second=r2.reason)


@check("Rel-2-4")
def _rel_2_4(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        q1 = quotient(s.phi_grp, s.phi_grp.subgroup(s.inn.elements, "In"))
        q2 = quotient(s.psi, s.psi.subgroup(s.psi0.elements, "Psi0"))
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    res = _iso(ctx, q1, q2)
    if res.isomorphic:
        return _pass(order=q1.order)
    return _fail(reason=res.reason, left=q1.order, right=q2.order)


@check("Thm-2.1-a1")
def _thm21_a1(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    return _semidirect_outcome(semidirect_verify(s.aut, s.in1, s.lam))


@check("Thm-2.1-a2")
def _thm21_a2(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    return _semidirect_outcome(semidirect_verify(s.ker_f, s.in1, s.psi))


@check("Thm-2.1-a3")
def _thm21_a3(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        in_psi = subgroup_from_product(s.aut, s.inn, s.psi, "In.Psi")
        in0_psi = subgroup_from_product(s.aut, s.in0, s.psi, "In0.Psi")
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    if in_psi.key_set() != s.phi_grp.key_set():
        return _fail(reason="Phi differs from In.Psi", left=in_psi.order)
    cert = semidirect_verify(s.phi_grp, s.in1, in0_psi)
    return _semidirect_outcome(cert)


@check("Thm-2.1-b1")
def _thm21_b1(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        q1 = quotient(s.aut, s.aut.subgroup(s.ker_f.elements, "KerF"))
        q2 = quotient(s.lam, s.lam.subgroup(s.psi.elements, "Psi"))
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    r1 = _iso(ctx, q1, s.omega)
    r2 = _iso(ctx, s.omega, q2)
    if r1.isomorphic and r2.isomorphic:
        return _pass(omega=s.omega.order)
    return _fail(first=r1.reason, second=r2.reason)


@check("Thm-2.1-b2")
def _thm21_b2(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    try:
        q1 = quotient(s.aut, s.aut.subgroup(s.phi_grp.elements, "Phi"))
        q2 = quotient(s.omega, s.omega.subgroup(s.in_aut_l.elements, "InAutL"))
    except InvalidInputError as exc:
        return _fail(structure=str(exc))
    res = _iso(ctx, q1, q2)
    if res.isomorphic:
        return _pass(order=q1.order)
    return _fail(reason=res.reason, left=q1.order, right=q2.order)


@check("Thm-2.1-c")
def _thm21_c(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    out = quotient(s.aut, s.aut.subgroup(s.inn.elements, "In"), label="Out")
    # image of Phi inside Out
    proj: Dict[tuple, tuple] = {}
    for g in s.aut.elements:
        members = tuple(
            sorted(s.aut.index[s.aut.op(g, h)] for h in s.inn.elements)
        )
        proj[g] = members
    n_keys = sorted_keys({proj[k] for k in s.phi_grp.elements})
    N = out.subgroup(n_keys, "Out(Phi)")
    if not is_normal(N, out):
        return _fail(reason="image of Phi is not normal in Out")
    q_psi = quotient(s.psi, s.psi.subgroup(s.psi0.elements, "Psi0"))
    r1 = _iso(ctx, N, q_psi)
    q_out = quotient(out, N)
    q_om = quotient(s.omega, s.omega.subgroup(s.in_aut_l.elements, "InAutL"))
    r2 = _iso(ctx, q_out, q_om)
    if r1.isomorphic and r2.isomorphic:
        return _pass(normal_order=N.order, quotient_order=q_out.order)
    return _fail(first=r1.reason, second=r2.reason)


@check("Thm-2.1-d")
def _thm21_d(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    if s.omega.key_set() != s.in_aut_l.key_set():
        return _na("Omega-equals-InAutL")
    if s.aut.key_set() != s.phi_grp.key_set():
        return _fail(reason="Aut differs from Phi")
    in0_psi = subgroup_from_product(s.aut, s.in0, s.psi, "In0.Psi")
    cert = semidirect_verify(s.aut, s.in1, in0_psi)
    if not cert.valid:
        return _fail(semidirect=cert.witnesses)
    out = quotient(s.aut, s.aut.subgroup(s.inn.elements, "In"))
    q_psi = quotient(s.psi, s.psi.subgroup(s.psi0.elements, "Psi0"))
    res = _iso(ctx, out, q_psi)
    if res.isomorphic:
        return _pass(out=out.order)
    return _fail(reason=res.reason)


@check("Thm-2.1-e")
def _thm21_e(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    if s.psi.key_set() != s.psi0.key_set():
        return _na("Psi-equals-Psi0")
    if s.phi_grp.key_set() != s.inn.key_set():
        return _fail(reason="Phi differs from In")
    out = quotient(s.aut, s.aut.subgroup(s.inn.elements, "In"))
    q_om = quotient(s.omega, s.omega.subgroup(s.in_aut_l.elements, "InAutL"))
    res = _iso(ctx, out, q_om)
    if res.isomorphic:
        return _pass(out=out.order)
    return _fail(reason=res.reason)


@check("Cor-2.2")
def _cor22(ctx):
    if not ctx.rs.split.zero_trace:
        return _na("zero-trace-ideals")
    if not all(p.factor_mod_radical_indecomposable for p in ctx.component_profiles):
        return _na("component-factor-rings-indecomposable")
    flags = ctx.subs.conditions
    if flags.condition_ii and flags.condition_i:
        return _pass()
    return _fail(condition_i=flags.condition_i, condition_ii=flags.condition_ii,
                 witness=flags.witness)


@check("Thm-2.3")
def _thm23(ctx):
    if not ctx.rs.split.zero_trace:
        return _na("zero-trace-ideals")
    if not all(p.factor_mod_radical_indecomposable for p in ctx.component_profiles):
        return _na("component-factor-rings-indecomposable")
    s = ctx.subs
    rs = ctx.rs
    m = len(rs.groups)
    comp_sets = [set(ctx.group_cell_members(i, i)) for i in range(m)]
    cell_sets = {
        (i, j): set(ctx.group_cell_members(i, j))
        for i in range(m)
        for j in range(m)
        if i != j
    }
    for key, prof in s.profiles.items():
        if not prof.is_diagonal:
            continue
        phi = s.registry[key]
        tau = []
        for i in range(m):
            img = {phi.images[x] for x in comp_sets[i]}
            hit = next((j for j in range(m) if img == comp_sets[j]), None)
            if hit is None:
                return _fail(automorphism=key, block=i)
            tau.append(hit)
        if sorted(tau) != list(range(m)):
            return _fail(automorphism=key, tau=tau)
        for (i, j), members in cell_sets.items():
            img = {phi.images[x] for x in members}
            if img != cell_sets[(tau[i], tau[j])]:
                return _fail(automorphism=key, cell=(i, j))
    return _pass()


@check("Prop-3.2")
def _prop32(ctx):
    if not _triangular_shape(ctx.fmr):
        return _na("triangular-instance")
    if not all(p.condition4 for p in ctx.component_profiles):
        return _na("components-satisfy-condition-4")
    flags = ctx.subs.conditions
    if flags.condition_i:
        return _pass()
    return _fail(witness=flags.witness)


@check("Lem-3.3")
def _lem33(ctx):
    rings = list(ctx.component_rings)
    if ctx.fmr.base is not None and ctx.fmr.base not in rings:
        rings.append(ctx.fmr.base)
    tested = 0
    for R in rings:
        prof = ring_condition_profile(R)
        qualifies = (
            prof.semiprime
            or is_commutative(R)
            or is_normal_ring(R)
            or prof.strongly_indecomposable
        )
        if not qualifies:
            continue
        tested += 1
        if not prof.condition4:
            return _fail(ring=R.label, witness=prof.witnesses.get("condition4"))
    if tested == 0:
        return _na("some-ring-satisfies-a-hypothesis")
    return _pass(rings_tested=tested)


@check("Cor-3.4")
def _cor34(ctx):
    if not _triangular_shape(ctx.fmr):
        return _na("triangular-instance")
    if not all(p.condition4 for p in ctx.component_profiles):
        return _na("components-satisfy-condition-4")
    for sub_id in ("Thm-2.1-a1", "Thm-2.1-a2", "Thm-2.1-a3"):
        outcome, wit, unmet = _REGISTRY[sub_id](ctx)
        if outcome != PASS:
            return (outcome, {"delegated": sub_id, **wit}, unmet)
    return _pass()


@check("Cor-3.5")
def _cor35(ctx):
    if not _triangular_shape(ctx.fmr):
        return _na("triangular-instance")
    if not all(is_commutative(R) for R in ctx.component_rings):
        return _na("commutative-components")
    s = ctx.subs
    if not s.condition_i_holds:
        return _na("condition-I")
    if s.omega.order != 1:
        return _na("Omega-trivial")
    return _semidirect_outcome(semidirect_verify(s.aut, s.in1, s.psi))


@check("Cor-3.6")
def _cor36(ctx):
    if not _triangular_shape(ctx.fmr):
        return _na("triangular-instance")
    if not ctx.subs.condition_i_holds:
        return _na("condition-I")
    if not all(p.factor_mod_radical_indecomposable for p in ctx.component_profiles):
        return _na("component-factor-rings-indecomposable")
    fmr = ctx.fmr
    n = fmr.n
    if any(
        fmr.cell_sizes[(i, j)] == 1 for i in range(1, n) for j in range(i + 1, n + 1)
    ):
        return _na("upper-cells-nonzero")
    s = ctx.subs
    rs = ctx.rs
    m = len(rs.groups)
    comp_sets = [set(ctx.group_cell_members(i, i)) for i in range(m)]
    for key, prof in s.profiles.items():
        if not prof.is_diagonal:
            continue
        phi = s.registry[key]
        for i in range(m):
            if {phi.images[x] for x in comp_sets[i]} != comp_sets[i]:
                return _fail(automorphism=key, block=i)
    return _pass()


@check("Cor-4.1")
def _cor41(ctx):
    if ctx.fmr.kind != "triangular":
        return _na("triangular-over-a-base-ring")
    if not ctx.subs.condition_i_holds:
        return _na("condition-I")
    fmr = ctx.fmr
    R = fmr.base
    n = fmr.n
    # superdiagonal bimodule automorphism groups: additive bijections of R
    # commuting with both actions
    maps: List[tuple] = []
    for arr in _bimodule_automorphisms_of_base(R):
        maps.append(arr)
    bim = FiniteGroup(
        maps,
        lambda a, b: tuple(a[b[x]] for x in range(R.order)),
        tuple(range(R.order)),
        label="Aut(M)",
    )
    target = direct_power(bim, n - 1)
    res = _iso(ctx, ctx.subs.psi, target)
    if res.isomorphic:
        return _pass(factor_order=bim.order, power=n - 1)
    return _fail(reason=res.reason, psi=ctx.subs.psi.order, target=target.order)


def _bimodule_automorphisms_of_base(R: FiniteRing) -> List[tuple]:
    out = []
    gens = R.gen_sequence
    import itertools as _it

    pools = [
        [h for h in range(R.order) if R.add_orders[h] == R.add_orders[g]]
        for g in gens
    ]
    for combo in _it.product(*pools):
        arr = R.apply_generator_images(list(combo))
        if sorted(set(arr)) != list(range(R.order)):
            continue
        ok = True
        for x in range(R.order):
            for v in range(R.order):
                if arr[R.mul(x, v)] != R.mul(x, arr[v]):
                    ok = False
                    break
                if arr[R.mul(v, x)] != R.mul(arr[v], x):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(tuple(arr))
    return out


@check("Cor-4.2")
def _cor42(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    s = ctx.subs
    all_inner = s.inn.key_set() == s.aut.key_set()
    rhs = (
        s.psi.key_set() == s.psi0.key_set()
        and s.omega.key_set() == s.in_aut_l.key_set()
    )
    if all_inner != rhs:
        return _fail(all_inner=all_inner, rhs=rhs)
    psi_in_in = s.psi.key_set() <= s.inn.key_set()
    psi_eq = s.psi.key_set() == s.psi0.key_set()
    if psi_in_in != psi_eq:
        return _fail(part=2, psi_in_in=psi_in_in, psi_eq=psi_eq)
    return _pass(all_inner=all_inner)


def _common_center_ok(ctx) -> Optional[Tuple[str, dict, List[str]]]:
    fmr = ctx.fmr
    if fmr.base is None:
        return _na("common-base-ring")
    R = fmr.base
    K = ctx.ring
    # centers of the components must be the scalar copies of Z(R)
    for gi in range(len(ctx.rs.groups)):
        comp = ctx.component_rings[gi]
        grp = ctx.rs.groups[gi]
        centers = set()
        for z in comp.center:
            if len(grp) == 1:
                t = ctx.fmr.single_entry(grp[0], grp[0], z)
            else:
                sub = comp.unpack(z)
                tt = list(fmr.zero_tuple)
                for idx, (a, b) in enumerate(comp.fmr.positions):
                    tt[fmr.pos_index[(grp[a - 1], grp[b - 1])]] = sub[idx]
                t = tuple(tt)
            centers.add(K.pack(t))
        expected = set()
        for c in R.center:
            t = list(fmr.zero_tuple)
            for p in grp:
                t[fmr.pos_index[(p, p)]] = c
            expected.add(K.pack(tuple(t)))
        if centers != expected:
            return _na("component-centers-are-scalar")
    for c in R.center:
        s_t = K.pack(fmr.scalar_tuple(c))
        for mm in ctx.rs.m_indices[: min(len(ctx.rs.m_indices), 64)]:
            if K.mul(s_t, mm) != K.mul(mm, s_t):
                return _na("center-commutes-with-M")
    return None


@check("Prop-4.3")
def _prop43(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    cc = _common_center_ok(ctx)
    if cc:
        return cc
    s = ctx.subs
    psi_eq = s.psi.key_set() == s.psi0.key_set()
    all_cocycle = True
    witness = None
    for key in s.psi.elements:
        system = multiplicative_profile(s.registry[key], ctx.rs)
        if not is_inner_multiplicative(system):
            all_cocycle = False
            witness = key
            break
    if psi_eq == all_cocycle:
        return _pass(psi=s.psi.order, psi0=s.psi0.order)
    return _fail(psi_eq=psi_eq, all_cocycle=all_cocycle, witness=witness)


@check("Cor-4.4")
def _cor44(ctx):
    blocked = _requires_zero_trace_and_i(ctx)
    if blocked:
        return blocked
    cc = _common_center_ok(ctx)
    if cc:
        return cc
    faithful = _products_faithful(ctx)
    if faithful is not True:
        return _na("products-faithful-over-center")
    s = ctx.subs
    if s.psi.key_set() == s.psi0.key_set():
        return _pass(psi=s.psi.order)
    return _fail(psi=s.psi.order, psi0=s.psi0.order)


def _products_faithful(ctx) -> object:
    """True iff every product M_ij * M_jk (i != j, j != k) is C-faithful."""
    fmr = ctx.fmr
    R = fmr.base
    K = ctx.ring
    rs = ctx.rs
    m = len(rs.groups)
    nonzero_center = [c for c in R.center if c != R.zero]
    if not nonzero_center:
        return True
    for i in range(m):
        for j in range(m):
            for k in range(m):
                if i == j or j == k:
                    continue
                mij = ctx.group_cell_members(i, j)
                mjk = ctx.group_cell_members(j, k)
                prods = sorted(
                    {K.mul(x, y) for x in mij for y in mjk} - {K.zero}
                )
                span = K.additive_span([K.zero] + prods)
                for c in nonzero_center:
                    s_t = K.pack(fmr.scalar_tuple(c))
                    if all(K.mul(s_t, p) == K.zero for p in span):
                        return (i, j, k, c)
    return True


@check("Lem-5.1")
def _lem51(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma":
        return _na("multiplier-built-instance")
    sigma = fmr.sigma
    if not sigma.is_binary():
        return _na("binary-multipliers")
    n = sigma.n
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                if len({i, j, k}) != 3:
                    continue
                trio = sorted(
                    (sigma.binary(i, j, i), sigma.binary(j, k, j), sigma.binary(k, i, k))
                )
                if trio not in ([1, 1, 1], [0, 0, 1], [0, 0, 0]):
                    return _fail(triple=(i, j, k), values=trio)
    return _pass()


@check("Lem-5.2")
def _lem52(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma":
        return _na("multiplier-built-instance")
    sigma = fmr.sigma
    if not sigma.is_binary():
        return _na("binary-multipliers")
    from .formal import multiplier_matrix_and_classes

    try:
        multiplier_matrix_and_classes(sigma)
    except TheoremViolationError as exc:
        return _fail(witness=str(exc))
    return _pass()


@check("Cor-5.3")
def _cor53(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    flags = ctx.subs.conditions
    if flags.condition_ii and flags.condition_i:
        return _pass()
    return _fail(condition_i=flags.condition_i, condition_ii=flags.condition_ii)


@check("Lem-6.1")
def _lem61(ctx):
    if not all(p.indecomposable for p in ctx.component_profiles):
        return _na("components-indecomposable")
    s = ctx.subs
    rs = ctx.rs
    m = len(rs.groups)
    comp_sets = [set(ctx.group_cell_members(i, i)) for i in range(m)]
    lr = rs.l_ring
    comp_sets_l = [
        {lr.parent_position[x] for x in cs} for cs in comp_sets
    ]
    for key in s.aut_l.elements:
        a = s.l_registry[key]
        for i in range(m):
            img = {a.images[x] for x in comp_sets_l[i]}
            if not any(img == comp_sets_l[j] for j in range(m)):
                return _fail(automorphism=key, block=i)
    return _pass()


@check("Lem-6.2")
def _lem62(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    try:
        rep = m_square_zero_check(fmr.sigma)
    except TheoremViolationError as exc:
        return _fail(witness=str(exc))
    return _pass(m_square_zero=rep.criterion)


@check("Thm-6.3-1")
def _thm631(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    sp = ctx.rs.split
    if not (sp.nilpotence_degree is not None and sp.nilpotence_degree <= 2):
        return _na("M-square-zero")
    s = ctx.subs
    if s.delta_grp.key_set() != s.in1.key_set():
        return _fail(reason="Delta differs from In1")
    one_m = _one_plus_m_group(ctx)
    r_delta = _iso(ctx, s.delta_grp, one_m)
    if not r_delta.isomorphic:
        return _fail(reason="Delta not isomorphic to 1+M")
    c1 = semidirect_verify(s.aut, s.delta_grp, s.lam)
    if not c1.valid:
        return _fail(stage="Aut=Delta.Lambda", semidirect=c1.witnesses)
    if s.ker_g is None or s.sigma_lift is None:
        return _fail(reason="block permutation machinery unavailable")
    cgrp = s.aut.subgroup(
        sorted_keys(s.ker_g.key_set() & s.lam.key_set()), "C"
    )
    c2 = semidirect_verify(s.ker_g, s.delta_grp, cgrp)
    if not c2.valid:
        return _fail(stage="KerG=Delta.C", semidirect=c2.witnesses)
    c3 = semidirect_verify(s.aut, s.ker_g, s.sigma_lift)
    if not c3.valid:
        return _fail(stage="Aut=KerG.Sigma", semidirect=c3.witnesses)
    in0psi = subgroup_from_product(s.aut, s.in0, s.psi, "In0.Psi")
    c4 = semidirect_verify(s.phi_grp, s.delta_grp, in0psi)
    if not c4.valid:
        return _fail(stage="Phi=Delta.(In0.Psi)", semidirect=c4.witnesses)
    return _pass()


def _one_plus_m_group(ctx) -> FiniteGroup:
    K = ctx.ring
    elems = []
    for mm in ctx.rs.m_indices:
        u = K.add(K.one, mm)
        if not K.is_unit[u]:
            raise TheoremViolationError("one-plus-M-not-units", witness=mm)
        elems.append(u)
    return FiniteGroup(sorted(elems), K.mul, K.one, label="1+M")


@check("Thm-6.3-2")
def _thm632(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    sp = ctx.rs.split
    if not (sp.nilpotence_degree is not None and sp.nilpotence_degree <= 2):
        return _na("M-square-zero")
    s = ctx.subs
    for gi, R in enumerate(ctx.component_rings):
        comp_autos = ctx.component_auts[gi]
        inner_keys = set(inner_automorphisms(R))
        if any(a.key not in inner_keys for a in comp_autos):
            return _na("component-automorphisms-all-inner")
    if s.ker_g is None or s.sigma_lift is None:
        return _fail(reason="block permutation machinery unavailable")
    if s.ker_g.key_set() != s.phi_grp.key_set():
        return _fail(reason="KerG differs from Phi")
    c1 = semidirect_verify(s.aut, s.phi_grp, s.sigma_lift)
    if not c1.valid:
        return _fail(stage="Aut=Phi.Sigma", semidirect=c1.witnesses)
    out = quotient(s.aut, s.aut.subgroup(s.inn.elements, "In"), label="Out")
    proj: Dict[tuple, tuple] = {}
    for g in s.aut.elements:
        proj[g] = tuple(
            sorted(s.aut.index[s.aut.op(g, h)] for h in s.inn.elements)
        )
    n_keys = sorted_keys({proj[k] for k in s.psi.elements})
    N = out.subgroup(n_keys, "Out(Psi)")
    e_keys = sorted_keys({proj[k] for k in s.sigma_lift.elements})
    E = out.subgroup(e_keys, "Out(Sigma)")
    cert = semidirect_verify(out, N, E)
    if not cert.valid:
        return _fail(stage="Out=N.E", semidirect=cert.witnesses)
    q_psi = quotient(s.psi, s.psi.subgroup(s.psi0.elements, "Psi0"))
    r1 = _iso(ctx, N, q_psi)
    r2 = _iso(ctx, E, s.sigma_lift)
    if r1.isomorphic and r2.isomorphic:
        return _pass(out=out.order)
    return _fail(first=r1.reason, second=r2.reason)


@check("Prop-7.1")
def _prop71(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    psi, _, psi0 = ctx.psi_bundle
    pred = psi_predicted(fmr)
    cu = _central_unit_group(fmr.base)
    if psi.order != pred.predicted_order:
        return _fail(predicted=pred.predicted_order, enumerated=psi.order)
    r1 = _iso(ctx, psi, direct_power(cu, pred.p))
    m = pred.m
    r2 = _iso(ctx, psi0, direct_power(cu, m - 1))
    q = quotient(psi, psi.subgroup(psi0.elements, "Psi0"))
    r3 = _iso(ctx, q, direct_power(cu, (m - 1) + pred.q))
    if r1.isomorphic and r2.isomorphic and r3.isomorphic:
        return _pass(p=pred.p, q=pred.q, predicted=pred.predicted_order)
    return _fail(psi=r1.reason, psi0=r2.reason, quotient=r3.reason)


@check("Cor-7.2")
def _cor72(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    sp = ctx.rs.split
    if not (sp.nilpotence_degree is not None and sp.nilpotence_degree <= 2):
        return _na("M-square-zero")
    psi, _, psi0 = ctx.psi_bundle
    cu = _central_unit_group(fmr.base)
    m = fmr.blocks.m
    r1 = _iso(ctx, psi, direct_power(cu, m * m - m))
    r2 = _iso(ctx, psi0, direct_power(cu, m - 1))
    q = quotient(psi, psi.subgroup(psi0.elements, "Psi0"))
    r3 = _iso(ctx, q, direct_power(cu, (m - 1) * (m - 1)))
    if r1.isomorphic and r2.isomorphic and r3.isomorphic:
        return _pass(m=m)
    return _fail(psi=r1.reason, psi0=r2.reason, quotient=r3.reason)


@check("Cor-7.3")
def _cor73(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    psi, reg, _ = ctx.psi_bundle
    pool = centralizer_units_of_l(ctx.rs)
    for key in psi.elements:
        phi = reg[key]
        system = multiplicative_profile(phi, ctx.rs)
        cocycle = is_inner_multiplicative(system)
        inner = find_conjugator(ctx.ring, phi, units=pool) is not None
        if cocycle != inner:
            return _fail(automorphism=key, cocycle=cocycle, inner=inner)
    return _pass(psi=psi.order)


@check("Cor-7.4")
def _cor74(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    rs = ctx.rs
    K = ctx.ring
    m = len(rs.groups)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                if i == j or j == k:
                    continue
                mij = ctx.group_cell_members(i, j)
                mjk = ctx.group_cell_members(j, k)
                if all(K.mul(x, y) == K.zero for x in mij for y in mjk):
                    return _na("block-products-nonzero")
    psi, _, psi0 = ctx.psi_bundle
    if psi.key_set() == psi0.key_set():
        return _pass(psi=psi.order)
    return _fail(psi=psi.order, psi0=psi0.order)


@check("Prop-8.1")
def _prop81(ctx):
    fmr = ctx.fmr
    if fmr.base is None:
        return _na("common-base-ring")
    rs = ctx.rs
    m = len(rs.groups)
    if m < 2:
        return _na("at-least-two-diagonal-blocks")
    sizes = [len(g) for g in rs.groups]
    pairs_checked = 0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            ctx_ij = lcm_block_context(fmr.base, sizes[i], sizes[j])
            for a in ctx.component_auts[i]:
                for g in ctx.component_auts[j]:
                    res = bimodule_iso_exists(a, g, ctx_ij)
                    pairs_checked += 1
                    if not res.agree:
                        return _fail(blocks=(i, j))
    return _pass(pairs=pairs_checked)


@check("Thm-8.2")
def _thm82(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    s = ctx.subs
    if s.omega1 is None or s.gamma_grp is None:
        return _na("condition-I")
    omega1_keys = s.omega1.key_set()
    for key in s.gamma_grp.elements:
        alpha = s.l_registry[key]
        comps = ctx.component_restriction(alpha)
        if comps is None:
            return _fail(automorphism=key, reason="not component-preserving")
        predicted = omega1_membership(comps, ctx.rs, cap=ctx.cap)
        actual = key in omega1_keys
        if predicted != actual:
            return _fail(automorphism=key, predicted=predicted, actual=actual)
    return _pass(gamma=s.gamma_grp.order)


@check("Cor-8.3")
def _cor83(ctx):
    fmr = ctx.fmr
    if fmr.kind != "sigma" or fmr.blocks is None:
        return _na("block-arranged-multiplier-instance")
    if not ctx.base_profile.factor_mod_radical_indecomposable:
        return _na("base-factor-ring-indecomposable")
    s = ctx.subs
    if s.omega1 is None or s.d_scalar is None:
        return _na("scalar-automorphisms-defined")
    sizes = [len(g) for g in ctx.rs.groups]
    ns = min(sizes)
    if any(sz % ns for sz in sizes):
        return _na("smallest-block-divides-all")
    prod = subgroup_from_product(s.aut_l, s.in_aut_l, s.d_scalar, "InAutL.D")
    if prod.key_set() != s.omega1.key_set():
        return _fail(product=prod.order, omega1=s.omega1.order)
    rs_ring = fmr.base if ns == 1 else matrix_ring(fmr.base, ns).underlying
    rs_autos = enumerate_automorphisms(rs_ring, cap=ctx.cap)
    reg = {a.key: a for a in rs_autos}

    def comp(a, b):
        fa, fb = reg[a].images, reg[b].images
        return tuple(fa[fb[g]] for g in rs_ring.gen_sequence)

    aut_rs = FiniteGroup(sorted(reg), comp, tuple(rs_ring.gen_sequence), "AutRs")
    inn_rs = aut_rs.subgroup(sorted(inner_automorphisms(rs_ring)), "InRs")
    out_rs = quotient(aut_rs, inn_rs)
    q = quotient(s.omega1, s.omega1.subgroup(s.in_aut_l.elements, "InAutL"))
    res = _iso(ctx, q, out_rs)
    if res.isomorphic:
        return _pass(omega1=s.omega1.order)
    return _fail(reason=res.reason)


@check("Thm-9.1")
def _thm91(ctx):
    if ctx.fmr.kind != "triangular":
        return _na("triangular-over-a-base-ring")
    s = ctx.subs
    count = 0
    for key, prof in s.profiles.items():
        if not prof.is_triangular:
            continue
        phi = s.registry[key]
        dec = decompose_inner_ring(phi, ctx.rs, cap=ctx.cap)
        if dec.inner.compose(dec.ring_part).images != phi.images:
            return _fail(automorphism=key)
        count += 1
    return _pass(decomposed=count)


@check("Cor-9.2")
def _cor92(ctx):
    if ctx.fmr.kind != "triangular":
        return _na("triangular-over-a-base-ring")
    R = ctx.fmr.base
    prof = ctx.base_profile
    if not (prof.strongly_indecomposable or prof.semiprime or is_normal_ring(R)):
        return _na("base-strongly-indecomposable-or-semiprime-or-normal")
    s = ctx.subs
    for key, p in s.profiles.items():
        if not p.is_triangular:
            return _fail(automorphism=key, reason="non-triangular automorphism")
        phi = s.registry[key]
        dec = decompose_inner_ring(phi, ctx.rs, cap=ctx.cap)
        if dec.inner.compose(dec.ring_part).images != phi.images:
            return _fail(automorphism=key)
    return _pass(count=s.aut.order)


@check("Cor-9.3")
def _cor93(ctx):
    if ctx.fmr.kind != "triangular":
        return _na("triangular-over-a-base-ring")
    if not is_commutative(ctx.fmr.base):
        return _na("commutative-base")
    s = ctx.subs
    if s.inn.key_set() == s.aut.key_set():
        return _pass(order=s.aut.order)
    outer = sorted_keys(s.aut.key_set() - s.inn.key_set())
    return _fail(outer=outer[:1])


@check("Cor-10.5")
def _cor105(ctx):
    if not ctx.is_plain_matrix_instance():
        return _na("plain-matrix-ring-instance")
    R = ctx.fmr.base
    if not is_local(R):
        return _na("base-ring-local")
    s = ctx.subs
    base_autos = enumerate_automorphisms(R, cap=ctx.cap)
    lifts = [ring_automorphism_from_base(ctx.fmr, a) for a in base_autos]
    for key in s.aut.elements:
        phi = s.registry[key]
        good = False
        for lift in lifts:
            residue = phi.compose(lift.inverse())
            residue = certify_automorphism(ctx.ring, residue.images)
            if find_conjugator(ctx.ring, residue) is not None:
                good = True
                break
        if not good:
            return _fail(automorphism=key)
    return _pass(count=s.aut.order)


# ---------------------------------------------------------------------------
# runner and report compilation
# ---------------------------------------------------------------------------

IN_SCOPE_RESULTS: Dict[str, List[str]] = {
    "relations (1)-(4)": ["Rel-2-1", "Rel-2-2", "Rel-2-3", "Rel-2-4"],
    "Theorem 2.1": [
        "Thm-2.1-a1",
        "Thm-2.1-a2",
        "Thm-2.1-a3",
        "Thm-2.1-b1",
        "Thm-2.1-b2",
        "Thm-2.1-c",
        "Thm-2.1-d",
        "Thm-2.1-e",
    ],
    "Corollary 2.2": ["Cor-2.2"],
    "Theorem 2.3": ["Thm-2.3"],
    "Proposition 3.2": ["Prop-3.2"],
    "Lemma 3.3": ["Lem-3.3"],
    "Corollary 3.4": ["Cor-3.4"],
    "Corollary 3.5": ["Cor-3.5"],
    "Corollary 3.6": ["Cor-3.6"],
    "Corollary 4.1": ["Cor-4.1"],
    "Corollary 4.2": ["Cor-4.2"],
    "Proposition 4.3": ["Prop-4.3"],
    "Corollary 4.4": ["Cor-4.4"],
    "Lemma 5.1": ["Lem-5.1"],
    "Lemma 5.2": ["Lem-5.2"],
    "Corollary 5.3": ["Cor-5.3"],
    "Lemma 6.1": ["Lem-6.1"],
    "Lemma 6.2": ["Lem-6.2"],
    "Theorem 6.3": ["Thm-6.3-1", "Thm-6.3-2"],
    "Proposition 7.1": ["Prop-7.1"],
    "Corollary 7.2": ["Cor-7.2"],
    "Corollary 7.3": ["Cor-7.3"],
    "Corollary 7.4": ["Cor-7.4"],
    "Proposition 8.1": ["Prop-8.1"],
    "Theorem 8.2": ["Thm-8.2"],
    "Corollary 8.3": ["Cor-8.3"],
    "Theorem 9.1": ["Thm-9.1"],
    "Corollary 9.2": ["Cor-9.2"],
    "Corollary 9.3": ["Cor-9.3"],
    "Corollary 10.5": ["Cor-10.5"],
}


def supported_ids() -> List[str]:
    return list(CHECK_IDS)


def run_checks(
    ctx: VerifyContext,
    ids: Optional[List[str]] = None,
    include_timings: bool = False,
) -> VerificationReport:
    if ids is None:
        ids = list(CHECK_IDS)
    unknown = [i for i in ids if i not in _REGISTRY]
    if unknown:
        raise InvalidInputError(
            f"unsupported check ids {unknown}; supported: {CHECK_IDS}"
        )
    ordered = [i for i in CHECK_IDS if i in set(ids)]
    checks: List[ResultCheck] = []
    for cid in ordered:
        t0 = time.monotonic()
        outcome, witnesses, unmet = _REGISTRY[cid](ctx)
        millis = int((time.monotonic() - t0) * 1000)
        if outcome == FAIL and not witnesses:
            raise FmrError(f"check {cid} failed without a witness")
        if outcome == NA and not unmet:
            raise FmrError(f"check {cid} not-applicable without a named precondition")
        checks.append(
            ResultCheck(
                id=cid,
                outcome=outcome,
                witnesses=witnesses,
                unmet=unmet,
                millis=millis if include_timings else None,
            )
        )
    summary = {
        "pass": sum(1 for c in checks if c.outcome == PASS),
        "fail": sum(1 for c in checks if c.outcome == FAIL),
        "not_applicable": sum(1 for c in checks if c.outcome == NA),
    }
    return VerificationReport(
        instance=ctx.fmr.label, checks=checks, summary=summary
    )


def compile_report(
    report: VerificationReport,
    fmt: str = "json",
    include_timings: bool = False,
) -> str:
    """Deterministic serialization; json round-trips losslessly."""
    if fmt == "json":
        doc = report.to_json_obj(include_timings)
        for check_obj, c in zip(doc["checks"], report.checks):
            check_obj["unmet"] = list(c.unmet)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        lines = [f"instance: {report.instance}"]
        for c in report.checks:
            extra = ""
            if c.outcome == NA:
                extra = f" (unmet: {', '.join(c.unmet)})"
            elif c.outcome == FAIL:
                extra = f" witnesses={_jsonable(c.witnesses)}"
            lines.append(f"{c.id}: {c.outcome}{extra}")
        s = report.summary
        lines.append(
            f"summary: pass={s['pass']} fail={s['fail']} "
            f"not-applicable={s['not_applicable']}"
        )
        return "\n".join(lines) + "\n"
    raise InvalidInputError(f"unknown report format {fmt!r}")


def report_from_json(text: str) -> VerificationReport:
    doc = json.loads(text)
    checks = [
        ResultCheck(
            id=c["id"],
            outcome=c["outcome"],
            witnesses=c.get("witnesses", {}),
            unmet=list(c.get("unmet", [])),
            millis=c.get("millis"),
        )
        for c in doc["checks"]
    ]
    return VerificationReport(
        instance=doc["instance"], checks=checks, summary=dict(doc["summary"])
    )
