"""Finite unital rings as explicit element sets with certified operations.

Elements are indices 0..order-1; operations are functions on indices. Small
rings carry full tables and get exhaustive law scans at construction. Large
structured rings (built in `formal`) certify the laws exhaustively at the
level of their defining data, which implies the global laws, and override
the quadratic cache computations with structured, re-certified routes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    AxiomViolationError,
    CenterMismatchError,
    FmrError,
    InvalidInputError,
)
from .groups import FiniteGroup

# Full n^3 associativity/distributivity scans are run below this order;
# larger rings rely on the structural certification of their constructor.
DIRECT_LAW_LIMIT = 300
# Brute O(n^2) unit and radical scans are run below this order.
DIRECT_SCAN_LIMIT = 2200
# Pairwise |U(R)|^2 verification of C(U(R)) = U(Z(R)) below this unit count.
UNIT_CENTER_SCAN_LIMIT = 1200


@dataclass(frozen=True)
class RingElement:
    """An element of a specific ring; operations only mix within one ring."""

    ring: "FiniteRing"
    index: int

    def _check(self, other: "RingElement") -> None:
        if self.ring is not other.ring:
            raise InvalidInputError("elements belong to different rings")

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.ring, self.ring.add(self.index, other.index))

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.ring, self.ring.mul(self.index, other.index))

    def __neg__(self) -> "RingElement":
        return RingElement(self.ring, self.ring.neg(self.index))

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __repr__(self):
        return f"<{self.ring.element_name(self.index)} in {self.ring.label}>"


class FiniteRing:
    """Base class: index arithmetic plus eagerly computed structural caches."""

    def __init__(self, order: int, zero: int, one: int, label: str):
        if order < 1:
            raise InvalidInputError("ring must be non-empty")
        self.order = order
        self.zero = zero
        self.one = one
        self.label = label

    # -- operations ---------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self._neg[b])

    def element(self, i: int) -> RingElement:
        return RingElement(self, i)

    def elements(self) -> range:
        return range(self.order)

    def element_name(self, i: int) -> str:
        return str(i)

    # -- finalization -------------------------------------------------------
    def _finalize(self, gen_hint: Optional[List[int]] = None) -> None:
        """Compute all caches once; instances are immutable afterwards."""
        self.add_orders = self._compute_add_orders()
        self._neg = self._compute_neg()
        self._build_closure(gen_hint)
        self.units, self.unit_inverse = self._compute_units()
        self.is_unit = [False] * self.order
        for u in self.units:
            self.is_unit[u] = True
        self.center = self._compute_center()
        self.is_central = [False] * self.order
        for c in self.center:
            self.is_central[c] = True
        self.central_units = [u for u in self.units if self.is_central[u]]
        self.idempotents = [x for x in range(self.order) if self.mul(x, x) == x]
        self.is_idempotent = [False] * self.order
        for x in self.idempotents:
            self.is_idempotent[x] = True
        self.radical = self._compute_radical()
        self.in_radical = [False] * self.order
        for x in self.radical:
            self.in_radical[x] = True
        self._square_zero = [self.mul(x, x) == self.zero for x in range(self.order)]
        self._profiles = [
            (
                self.add_orders[x],
                self.is_idempotent[x],
                self.is_unit[x],
                self.is_central[x],
                self._square_zero[x],
            )
            for x in range(self.order)
        ]

    def _compute_add_orders(self) -> List[int]:
        orders = [0] * self.order
        for x in range(self.order):
            k, cur = 1, x
            while cur != self.zero:
                cur = self.add(cur, x)
                k += 1
            orders[x] = k
        return orders

    def _compute_neg(self) -> List[int]:
        neg = [0] * self.order
        for x in range(self.order):
            d = self.add_orders[x]
            cur = self.zero
            for _ in range(d - 1):
                cur = self.add(cur, x)
            neg[x] = cur
            if self.add(x, cur) != self.zero:
                raise FmrError("negation bookkeeping failed")
        return neg

    # -- additive closure machinery ----------------------------------------
    def _build_closure(self, gen_hint: Optional[List[int]]) -> None:
        """Greedy additive generating sequence with replayable closure steps.

        Records, per generator, the first-visit steps (element, base, coeff)
        with element = base + coeff*gen, so any image assignment for the
        generators extends to the whole ring in O(order) additions.
        """
        coords: Dict[int, tuple] = {self.zero: ()}
        visit: List[int] = [self.zero]
        gens: List[int] = []
        quotient_orders: List[int] = []
        segments: List[List[Tuple[int, int, int]]] = []
        consistency: List[Tuple[int, int]] = []  # (d, element equal to d*gen)
        if gen_hint is not None:
            pool = list(gen_hint)
        else:
            pool = sorted(range(self.order), key=lambda x: (-self.add_orders[x], x))
        pi = 0
        while len(visit) < self.order:
            g = None
            while pi < len(pool):
                cand = pool[pi]
                if cand not in coords:
                    g = cand
                    break
                pi += 1
            if g is None:
                if gen_hint is not None:
                    gen_hint = None
                    pool = sorted(
                        range(self.order), key=lambda x: (-self.add_orders[x], x)
                    )
                    pi = 0
                    continue
                raise FmrError("additive closure failed to generate")
            k = len(gens)
            multiples = [self.zero]
            cur = self.zero
            d = None
            for c in range(1, self.add_orders[g] + 1):
                cur = self.add(cur, g)
                multiples.append(cur)
                if cur in coords:
                    d = c
                    break
            if d is None:
                raise FmrError("additive order bookkeeping failed")
            seg: List[Tuple[int, int, int]] = []
            base_list = list(visit)
            for c in range(1, d):
                mc = multiples[c]
                for b in base_list:
                    e = self.add(b, mc)
                    if e in coords:
                        continue
                    coords[e] = coords[b] + ((k, c),)
                    visit.append(e)
                    seg.append((e, b, c))
            gens.append(g)
            quotient_orders.append(d)
            segments.append(seg)
            consistency.append((d, multiples[d]))
        t = len(gens)
        dense: List[tuple] = [()] * self.order
        for e, sparse in coords.items():
            row = [0] * t
            for k, c in sparse:
                row[k] = c
            dense[e] = tuple(row)
        self.gen_sequence: List[int] = gens
        self.gen_quotient_orders: List[int] = quotient_orders
        self.gen_segments = segments
        self.gen_consistency = consistency
        self.coords: List[tuple] = dense
        step_of = [0] * self.order
        step_of[self.zero] = -1
        for k, seg in enumerate(segments):
            for (e, _b, _c) in seg:
                step_of[e] = k
        self.span_step: List[int] = step_of

    def apply_generator_images(self, images: Sequence[int]) -> List[int]:
        """Full image array of the additive map sending gen k to images[k]."""
        img = [0] * self.order
        img[self.zero] = self.zero
        add = self.add
        for k, seg in enumerate(self.gen_segments):
            h = images[k]
            d = self.gen_quotient_orders[k]
            mult = [self.zero]
            cur = self.zero
            for _ in range(d):
                cur = add(cur, h)
                mult.append(cur)
            for (e, b, c) in seg:
                img[e] = add(img[b], mult[c])
        return img

    def additive_span(self, seed: Sequence[int]) -> set:
        """Subgroup of (R,+) generated by the seed elements."""
        span = {self.zero}
        order_list = [self.zero]
        for g in seed:
            if g in span:
                continue
            multiples = []
            cur = g
            while cur not in span:
                multiples.append(cur)
                cur = self.add(cur, g)
            base = list(order_list)
            for m in multiples:
                for b in base:
                    e = self.add(b, m)
                    if e not in span:
                        span.add(e)
                        order_list.append(e)
        return span

    # -- cache computations (overridable with structured routes) ------------
    def _compute_units(self) -> Tuple[List[int], Dict[int, int]]:
        if self.order > DIRECT_SCAN_LIMIT:
            raise FmrError(
                f"ring of order {self.order} needs a structured unit route"
            )
        units, inv = [], {}
        for x in range(self.order):
            for y in range(self.order):
                if self.mul(x, y) == self.one and self.mul(y, x) == self.one:
                    units.append(x)
                    inv[x] = y
                    break
        return units, inv

    def _compute_center(self) -> List[int]:
        # commuting with the additive generators suffices by biadditivity
        gens = self.gen_sequence
        out = []
        for x in range(self.order):
            if all(self.mul(x, g) == self.mul(g, x) for g in gens):
                out.append(x)
        return out

    def verify_unit_center_equality(self) -> None:
        """Certify C(U(R)) = U(Z(R)) on this instance.

        Small unit groups get the direct pairwise scan. For larger ones the
        equality is forced whenever the units additively span the ring
        (commuting with every unit then means commuting with everything),
        which we certify by an additive closure. A mismatch is reported as
        an error rather than proceeding.
        """
        if len(self.units) <= UNIT_CENTER_SCAN_LIMIT:
            group_center = [
                u
                for u in self.units
                if all(self.mul(u, v) == self.mul(v, u) for v in self.units)
            ]
            if group_center != self.central_units:
                raise CenterMismatchError(
                    f"C(U({self.label})) = {group_center} but "
                    f"U(Z({self.label})) = {self.central_units}"
                )
            return
        span = self.additive_span(self.units)
        if len(span) != self.order:
            raise CenterMismatchError(
                f"cannot certify C(U({self.label})) = U(Z({self.label})): "
                "units do not span additively"
            )

    def _compute_radical(self) -> List[int]:
        """J(R) = {x : 1 - r*x invertible for all r}.

        Finite rings are Dedekind-finite, so one-sided invertibility would
        already suffice; the scan uses the cached two-sided units.
        """
        if self.order > DIRECT_SCAN_LIMIT:
            raise FmrError(
                f"ring of order {self.order} needs a structured radical route"
            )
        rad = []
        for x in range(self.order):
            ok = True
            for r in range(self.order):
                if not self.is_unit[self.sub(self.one, self.mul(r, x))]:
                    ok = False
                    break
            if ok:
                rad.append(x)
        return rad

    # -- laws ---------------------------------------------------------------
    def check_laws_exhaustively(self) -> None:
        """Abelian group, unitality, associativity, distributivity scans."""
        n = self.order
        add = getattr(self, "_add", None) or [
            [self.add(a, b) for b in range(n)] for a in range(n)
        ]
        mul = getattr(self, "_mul", None) or [
            [self.mul(a, b) for b in range(n)] for a in range(n)
        ]
        z, e = self.zero, self.one
        for a in range(n):
            if add[a][z] != a:
                raise AxiomViolationError("additive identity", (a,))
            if z not in add[a]:
                raise AxiomViolationError("additive inverse", (a,))
        for a in range(n):
            ra = add[a]
            for b in range(a + 1, n):
                if ra[b] != add[b][a]:
                    raise AxiomViolationError("additive commutativity", (a, b))
        for a in range(n):
            ra = add[a]
            for b in range(n):
                left = add[ra[b]]
                rb = add[b]
                for c in range(n):
                    if left[c] != ra[rb[c]]:
                        raise AxiomViolationError("additive associativity", (a, b, c))
        for a in range(n):
            if mul[a][e] != a or mul[e][a] != a:
                raise AxiomViolationError("multiplicative identity", (a,))
        for a in range(n):
            ma = mul[a]
            for b in range(n):
                left = mul[ma[b]]
                mb = mul[b]
                for c in range(n):
                    if left[c] != ma[mb[c]]:
                        raise AxiomViolationError("associativity", (a, b, c))
        for a in range(n):
            ma = mul[a]
            for b in range(n):
                mb = mul[b]
                sab = add[a][b]
                msab = mul[sab]
                for c in range(n):
                    if msab[c] != add[ma[c]][mb[c]]:
                        raise AxiomViolationError("right distributivity", (a, b, c))
                    mc = mul[c]
                    if mc[sab] != add[mc[a]][mc[b]]:
                        raise AxiomViolationError("left distributivity", (a, b, c))


class TableRing(FiniteRing):
    """Ring given by explicit addition and multiplication tables."""

    def __init__(
        self,
        add_table: Sequence[Sequence[int]],
        mul_table: Sequence[Sequence[int]],
        zero: int,
        one: int,
        label: str = "R",
        check: str = "full",
        element_names: Optional[Sequence[str]] = None,
        gen_hint: Optional[List[int]] = None,
    ):
        n = len(add_table)
        if n == 0 or len(mul_table) != n:
            raise InvalidInputError("tables must be square over one index set")
        for t, name in ((add_table, "add"), (mul_table, "mul")):
            for i, row in enumerate(t):
                if len(row) != n:
                    raise InvalidInputError(f"{name} table row {i} has wrong length")
                for v in row:
                    if not (0 <= v < n):
                        raise InvalidInputError(
                            f"{name} table entry {v} out of range at row {i}"
                        )
        if not (0 <= zero < n and 0 <= one < n):
            raise InvalidInputError("zero/one out of range")
        super().__init__(n, zero, one, label)
        self._add = [list(r) for r in add_table]
        self._mul = [list(r) for r in mul_table]
        self._names = list(element_names) if element_names else None
        self.certification = check
        if check == "full":
            self.check_laws_exhaustively()
        elif check != "trusted":
            raise InvalidInputError(f"unknown check mode {check!r}")
        self._finalize(gen_hint)

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def element_name(self, i: int) -> str:
        if self._names:
            return self._names[i]
        return str(i)


def construct_zmod(n: int) -> TableRing:
    """Z/n with canonical tables; all ring axioms certified exhaustively."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise InvalidInputError(f"invalid modulus {n!r}: need an integer >= 2")
    add = [[(a + b) % n for b in range(n)] for a in range(n)]
    mul = [[(a * b) % n for b in range(n)] for a in range(n)]
    return TableRing(add, mul, 0, 1, label=f"Z/{n}")


def construct_from_tables(
    add_table: Sequence[Sequence[int]],
    mul_table: Sequence[Sequence[int]],
    zero: int,
    one: int,
    label: str = "R",
) -> TableRing:
    """Ring from raw tables; succeeds if and only if every axiom holds."""
    return TableRing(add_table, mul_table, zero, one, label=label, check="full")


class ProductRing(TableRing):
    """Componentwise product with injections and projections exposed."""

    def __init__(self, factors: Sequence[FiniteRing], label: Optional[str] = None):
        if not factors:
            raise InvalidInputError("product of an empty family")
        self.factors = list(factors)
        sizes = [R.order for R in self.factors]
        total = 1
        for s in sizes:
            total *= s
        tuples = [()]
        for s in sizes:
            tuples = [t + (v,) for t in tuples for v in range(s)]
        self._tuples = tuples
        self._tuple_index = {t: i for i, t in enumerate(tuples)}
        add = [
            [
                self._tuple_index[
                    tuple(R.add(x, y) for R, x, y in zip(self.factors, ta, tb))
                ]
                for tb in tuples
            ]
            for ta in tuples
        ]
        mul = [
            [
                self._tuple_index[
                    tuple(R.mul(x, y) for R, x, y in zip(self.factors, ta, tb))
                ]
                for tb in tuples
            ]
            for ta in tuples
        ]
        zero = self._tuple_index[tuple(R.zero for R in self.factors)]
        one = self._tuple_index[tuple(R.one for R in self.factors)]
        check = "full" if total <= DIRECT_LAW_LIMIT else "trusted"
        super().__init__(
            add,
            mul,
            zero,
            one,
            label=label or " x ".join(R.label for R in self.factors),
            check=check,
        )

    def decode(self, i: int) -> tuple:
        return self._tuples[i]

    def encode(self, t: tuple) -> int:
        return self._tuple_index[tuple(t)]

    def inject(self, k: int, x: int) -> int:
        t = [R.zero for R in self.factors]
        t[k] = x
        return self._tuple_index[tuple(t)]

    def project(self, k: int, i: int) -> int:
        return self._tuples[i][k]

    def element_name(self, i: int) -> str:
        t = self._tuples[i]
        return "(" + ",".join(R.element_name(x) for R, x in zip(self.factors, t)) + ")"


def construct_product(factors: Sequence[FiniteRing]) -> ProductRing:
    return ProductRing(factors)


def subring(parent: FiniteRing, indices: Sequence[int], label: str) -> TableRing:
    """The subring of `parent` on the given closed index set, re-indexed.

    Closure under both operations is re-verified; the laws themselves are
    inherited from the certified parent.
    """
    idx = sorted(set(indices))
    pos = {p: i for i, p in enumerate(idx)}
    if parent.zero not in pos or parent.one not in pos:
        raise InvalidInputError("subring must contain 0 and 1")
    for a in idx:
        if parent.neg(a) not in pos:
            raise InvalidInputError(f"subring not closed under negation at {a}")
        for b in idx:
            if parent.add(a, b) not in pos or parent.mul(a, b) not in pos:
                raise InvalidInputError(f"subring not closed at pair ({a},{b})")
    add = [[pos[parent.add(a, b)] for b in idx] for a in idx]
    mul = [[pos[parent.mul(a, b)] for b in idx] for a in idx]
    names = [parent.element_name(a) for a in idx]
    ring = TableRing(
        add,
        mul,
        pos[parent.zero],
        pos[parent.one],
        label=label,
        check="full" if len(idx) <= DIRECT_LAW_LIMIT else "trusted",
        element_names=names,
    )
    ring.parent_indices = list(idx)
    ring.parent_position = pos
    return ring


# -- structural analyses -----------------------------------------------------

def units(R: FiniteRing) -> List[RingElement]:
    """The two-sided invertible elements, sorted by index."""
    return [R.element(u) for u in R.units]


def unit_group(R: FiniteRing) -> FiniteGroup:
    return FiniteGroup(list(R.units), R.mul, R.one, label=f"U({R.label})")


def center_and_central_units(R: FiniteRing) -> Tuple[TableRing, FiniteGroup]:
    """(Z(R) as a ring, the group of invertible central elements).

    Equates C(U(R)) with U(Z(R)): the equality is verified by brute force
    on this instance and a discrepancy raises rather than proceeding.
    """
    R.verify_unit_center_equality()
    Z = subring(R, R.center, label=f"Z({R.label})")
    grp = FiniteGroup(list(R.central_units), R.mul, R.one, label=f"C(U({R.label}))")
    return Z, grp


@dataclass
class RingConditionProfile:
    """Structural flags with counterexample witnesses.

    Invariant (checked property-style in the tests): factor-mod-radical
    indecomposable implies strongly indecomposable implies indecomposable,
    and strongly indecomposable implies condition4.
    """

    indecomposable: bool
    strongly_indecomposable: bool
    factor_mod_radical_indecomposable: bool
    condition4: bool
    semiprime: bool
    local: bool
    witnesses: dict = field(default_factory=dict)


@dataclass
class IdempotentAnalysis:
    idempotents: List[int]
    central_idempotents: List[int]
    semicentral_idempotents: List[int]
    indecomposable: bool
    strongly_indecomposable: bool
    condition4: bool
    witnesses: dict = field(default_factory=dict)


def idempotent_analysis(R: FiniteRing) -> IdempotentAnalysis:
    """All idempotents plus the three idempotent-based ring conditions.

    An idempotent e is semicentral when (1-e)Re = 0; by biadditivity it is
    enough to range r over the additive generators.
    """
    idems = list(R.idempotents)
    central = [e for e in idems if R.is_central[e]]
    gens = R.gen_sequence

    def right_annihilates(e: int) -> bool:
        ce = R.sub(R.one, e)
        return all(R.mul(R.mul(ce, g), e) == R.zero for g in gens)

    def left_annihilates(e: int) -> bool:
        ce = R.sub(R.one, e)
        return all(R.mul(R.mul(e, g), ce) == R.zero for g in gens)

    semicentral = [e for e in idems if right_annihilates(e)]
    witnesses: dict = {}
    indec = True
    for e in central:
        if e not in (R.zero, R.one):
            indec = False
            witnesses["central_idempotent"] = e
            break
    strong = True
    for e in semicentral:
        if e not in (R.zero, R.one):
            strong = False
            witnesses["semicentral_idempotent"] = e
            break
    cond4 = True
    for e in idems:
        if right_annihilates(e) and not left_annihilates(e):
            cond4 = False
            witnesses["condition4"] = e
            break
    return IdempotentAnalysis(
        idems, central, semicentral, indec, strong, cond4, witnesses
    )


@dataclass
class RadicalAnalysis:
    elements: List[int]
    nilpotence_degree: int
    semiprime: bool
    factor: FiniteRing
    projection: List[int]
    factor_indecomposable: bool


def _radical_nilpotence(R: FiniteRing, rad: List[int]) -> int:
    """Smallest k with J^k = 0, certified by iterated span products."""
    if rad == [R.zero]:
        return 1
    current = set(rad)
    k = 1
    while current != {R.zero}:
        prods = set()
        for a in current:
            for b in rad:
                prods.add(R.mul(a, b))
        current = R.additive_span(sorted(prods))
        k += 1
        if k > R.order + 1:
            raise FmrError("radical is not nilpotent (scan bug)")
    return k


def factor_ring(
    R: FiniteRing, ideal: Sequence[int], label: str
) -> Tuple[FiniteRing, List[int]]:
    """R modulo a verified two-sided ideal, with the projection map."""
    iset = set(ideal)
    if R.zero not in iset:
        raise InvalidInputError("ideal must contain 0")
    if iset == {R.zero}:
        return R, list(range(R.order))
    gens = R.gen_sequence
    for x in iset:
        if R.neg(x) not in iset:
            raise InvalidInputError("not an ideal: negation escapes")
        for g in gens:
            if R.mul(g, x) not in iset or R.mul(x, g) not in iset:
                raise InvalidInputError(f"not an ideal: absorption fails at ({g},{x})")
        for y in iset:
            if R.add(x, y) not in iset:
                raise InvalidInputError("not an ideal: addition escapes")
    coset_rep: Dict[int, int] = {}
    reps: List[int] = []
    for x in range(R.order):
        if x in coset_rep:
            continue
        members = sorted(R.add(x, j) for j in iset)
        rep = members[0]
        reps.append(rep)
        for m in members:
            coset_rep[m] = rep
    reps.sort()
    pos = {r: i for i, r in enumerate(reps)}
    add = [[pos[coset_rep[R.add(a, b)]] for b in reps] for a in reps]
    mul = [[pos[coset_rep[R.mul(a, b)]] for b in reps] for a in reps]
    names = [R.element_name(r) + "~" for r in reps]
    fac = TableRing(
        add,
        mul,
        pos[coset_rep[R.zero]],
        pos[coset_rep[R.one]],
        label=label,
        check="full" if len(reps) <= DIRECT_LAW_LIMIT else "trusted",
        element_names=names,
    )
    projection = [pos[coset_rep[x]] for x in range(R.order)]
    return fac, projection


def jacobson_radical(R: FiniteRing) -> RadicalAnalysis:
    """The radical with its factor ring; finite rings make P(R) = J(R)."""
    rad = list(R.radical)
    k = _radical_nilpotence(R, rad)
    fac, proj = factor_ring(R, rad, label=f"{R.label}/P")
    fac_idem = idempotent_analysis(fac)
    return RadicalAnalysis(
        elements=rad,
        nilpotence_degree=k,
        semiprime=(rad == [R.zero]),
        factor=fac,
        projection=proj,
        factor_indecomposable=fac_idem.indecomposable,
    )


def is_local(R: FiniteRing) -> bool:
    """Finite ring is local iff its non-units are closed under addition."""
    nonunits = [x for x in range(R.order) if not R.is_unit[x]]
    for a in nonunits:
        for b in nonunits:
            if R.is_unit[R.add(a, b)]:
                return False
    return True


def is_commutative(R: FiniteRing) -> bool:
    return len(R.center) == R.order


def is_normal_ring(R: FiniteRing) -> bool:
    """All idempotents central."""
    return all(R.is_central[e] for e in R.idempotents)


def ring_condition_profile(R: FiniteRing) -> RingConditionProfile:
    idem = idempotent_analysis(R)
    rad = jacobson_radical(R)
    return RingConditionProfile(
        indecomposable=idem.indecomposable,
        strongly_indecomposable=idem.strongly_indecomposable,
        factor_mod_radical_indecomposable=rad.factor_indecomposable,
        condition4=idem.condition4,
        semiprime=rad.semiprime,
        local=is_local(R),
        witnesses=dict(idem.witnesses),
    )
