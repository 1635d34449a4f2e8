"""Command-line surface: ingest instance spec files, build, enumerate, verify.

A spec file is one self-contained JSON document, so every run is
reproducible from a single file. Identical spec and options produce
byte-identical structured output; the FMR_THREADS environment variable is
accepted for interface compatibility and never influences output bytes
(evaluation is sequential and deterministic).

Exit codes: 0 success, 1 check failure, 2 invalid input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

from .errors import (
    AxiomViolationError,
    BudgetExceededError,
    InvalidInputError,
    LawViolationError,
    TheoremViolationError,
    UnsupportedMultiplierError,
)
from .finring import FiniteRing, construct_from_tables, construct_product, construct_zmod
from .formal import (
    BimoduleTable,
    FormalMatrixRing,
    GeneralFormalData,
    MultiplierSystem,
    build_formal_ring,
    build_general_formal,
    make_triangular,
    normalize_blocks,
    split_and_trace_ideals,
    validate_multiplier_system,
)
from .autgrp import canonical_subgroups
from .verify import VerifyContext, compile_report, run_checks

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_INVALID_INPUT = 2
EXIT_BUDGET = 3

DEFAULT_CAP = 10_000_000
DEFAULT_ISO_BUDGET = 2000


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

def _build_base(doc: dict) -> FiniteRing:
    kind = doc.get("kind")
    if kind == "zmod":
        return construct_zmod(int(doc["n"]))
    if kind == "tables":
        return construct_from_tables(
            doc["add"], doc["mul"], int(doc["zero"]), int(doc["one"]),
            label=doc.get("label", "R"),
        )
    if kind == "product":
        return construct_product([_build_base(f) for f in doc["factors"]])
    raise InvalidInputError(f"unknown base kind {kind!r}")


def _value_to_element(base: FiniteRing, value: int) -> int:
    if value == 0:
        return base.zero
    if value == 1:
        return base.one
    if 0 <= value < base.order:
        return value
    raise InvalidInputError(f"multiplier value {value} outside the base ring")


def _build_sigma(base: FiniteRing, doc: dict) -> MultiplierSystem:
    n = int(doc["n"])
    entries: Dict[tuple, int] = {}
    for item in doc.get("multipliers", []):
        key = (int(item["i"]), int(item["j"]), int(item["k"]))
        entries[key] = _value_to_element(base, int(item["value"]))
    default = _value_to_element(base, int(doc.get("default", 1)))
    return MultiplierSystem(n, base, entries, default=default)


def _build_general(base_doc: Optional[dict], doc: dict) -> GeneralFormalData:
    n = int(doc["n"])
    rings = [_build_base(r) for r in doc["rings"]]
    bimodules = {}
    for key, b in doc.get("bimodules", {}).items():
        i, j = (int(x) for x in key.split(","))
        bimodules[(i, j)] = BimoduleTable(
            size=int(b["size"]),
            add=b["add"],
            zero=int(b["zero"]),
            left=b["left"],
            right=b["right"],
        )
    products = {}
    for key, tab in doc.get("products", {}).items():
        i, j, k = (int(x) for x in key.split(","))
        products[(i, j, k)] = tab
    return GeneralFormalData(rings=rings, bimodules=bimodules, products=products)


class SpecFile:
    """Parsed instance description."""

    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise InvalidInputError("spec document must be a JSON object")
        self.name = doc.get("name", "instance")
        self.base_doc = doc.get("base")
        self.construction = doc.get("construction")
        if self.construction is None:
            raise InvalidInputError("spec needs a construction section")
        options = doc.get("options", {})
        self.cap = int(options.get("cap", DEFAULT_CAP))
        self.iso_budget = int(options.get("iso_budget", DEFAULT_ISO_BUDGET))
        self.threads = options.get("threads")

    @classmethod
    def load(cls, path: str) -> "SpecFile":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read spec file {path}: {exc}")
        return cls(doc)

    def base_ring(self) -> FiniteRing:
        if self.base_doc is None:
            raise InvalidInputError("spec needs a base section")
        return _build_base(self.base_doc)

    def sigma(self, base: FiniteRing) -> MultiplierSystem:
        if self.construction.get("kind") != "sigma":
            raise InvalidInputError("construction is not multiplier-based")
        return _build_sigma(base, self.construction)

    def build(self) -> FormalMatrixRing:
        kind = self.construction.get("kind")
        if kind == "sigma":
            base = self.base_ring()
            return build_formal_ring(base, self.sigma(base), label=self.name)
        if kind == "triangular":
            base = self.base_ring()
            return make_triangular(base, int(self.construction["n"]))
        if kind == "general":
            data = _build_general(self.base_doc, self.construction)
            return build_general_formal(data, label=self.name)
        raise InvalidInputError(f"unknown construction kind {kind!r}")


def _read_threads_env() -> Optional[int]:
    raw = os.environ.get("FMR_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InvalidInputError(f"FMR_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise InvalidInputError("FMR_THREADS must be positive")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(spec: SpecFile, args) -> int:
    base = spec.base_ring()
    sigma = spec.sigma(base)
    report = validate_multiplier_system(sigma)
    lines = []
    for (i, j, k, v) in report.unit_violations:
        lines.append(f"unit-violation s({i},{j},{k}) = {base.element_name(v)}")
    for (i, j, k, l, lhs, rhs) in report.identity_violations:
        lines.append(
            f"identity-violation ({i},{j},{k},{l}): "
            f"{base.element_name(lhs)} != {base.element_name(rhs)}"
        )
    if report.valid:
        print("valid")
        return EXIT_OK
    print("\n".join(lines))
    print(f"invalid: {len(lines)} violations")
    return EXIT_CHECK_FAILURE


def _cmd_normalize(spec: SpecFile, args) -> int:
    base = spec.base_ring()
    sigma = spec.sigma(base)
    blocks, tau_sigma = normalize_blocks(sigma)
    print("tau: " + " ".join(str(p) for p in blocks.tau))
    print(
        "classes: "
        + "; ".join("{" + ",".join(str(p) for p in cls) + "}" for cls in blocks.classes)
    )
    print("block-orders: " + " ".join(str(k) for k in blocks.block_orders))
    multipliers = []
    for (i, j, k), v in sorted(tau_sigma.table.items()):
        if i == j or j == k:
            continue
        multipliers.append(
            {"i": i, "j": j, "k": k, "value": 1 if v == base.one else 0}
        )
    doc = {
        "name": f"{spec.name}-normalized",
        "base": spec.base_doc,
        "construction": {
            "kind": "sigma",
            "n": sigma.n,
            "multipliers": multipliers,
            "default": 1,
        },
        "options": {"cap": spec.cap, "iso_budget": spec.iso_budget},
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_build(spec: SpecFile, args) -> int:
    fmr = spec.build()
    print(f"instance: {fmr.label}")
    print(f"kind: {fmr.kind}")
    print(f"order: {fmr.order}")
    if fmr.blocks is not None:
        print("block-orders: " + " ".join(str(k) for k in fmr.blocks.block_orders))
    split = split_and_trace_ideals(fmr, level="position")
    print(
        "trace-ideal-sizes: " + " ".join(str(len(t)) for t in split.trace_ideals)
    )
    print(f"zero-trace-ideals: {str(split.zero_trace).lower()}")
    chain_sizes = []
    for power in split.m_powers:
        chain_sizes.append(sum(len(v) - 1 for v in power.values()))
    print("m-power-chain-nonzero-generators: " + " ".join(str(c) for c in chain_sizes))
    print(
        "m-nilpotence-degree: "
        + (str(split.nilpotence_degree) if split.nilpotence_degree else "none")
    )
    if args.info:
        if fmr.underlying is None:
            print("units: not-computed (order exceeds materialization limit)")
            print("center: not-computed (order exceeds materialization limit)")
            print("radical: not-computed (order exceeds materialization limit)")
        else:
            K = fmr.underlying
            print(f"units: {len(K.units)}")
            print(f"center: {len(K.center)}")
            print(f"central-units: {len(K.central_units)}")
            print(f"radical: {len(K.radical)}")
            print(f"idempotents: {len(K.idempotents)}")
    return EXIT_OK


def _cmd_aut(spec: SpecFile, args) -> int:
    fmr = spec.build()
    cap = args.cap if args.cap is not None else spec.cap
    subs = canonical_subgroups(fmr, cap=cap)
    table = subs.order_table()
    for name in sorted(table):
        print(f"{name}: {table[name]}")
    return EXIT_OK


def _parse_results(arg: str) -> Optional[List[str]]:
    if arg == "all":
        return None
    ids = [x.strip() for x in arg.split(",") if x.strip()]
    if not ids:
        raise InvalidInputError("empty results selection")
    return ids


def _cmd_verify(spec: SpecFile, args) -> int:
    fmr = spec.build()
    cap = args.cap if args.cap is not None else spec.cap
    ctx = VerifyContext(fmr, cap=cap, iso_budget=spec.iso_budget)
    ids = _parse_results(args.results)
    report = run_checks(ctx, ids=ids, include_timings=args.timings)
    sys.stdout.write(
        compile_report(report, fmt=args.format, include_timings=args.timings)
    )
    return EXIT_OK if report.summary["fail"] == 0 else EXIT_CHECK_FAILURE


def _cmd_report(spec: SpecFile, args) -> int:
    fmr = spec.build()
    doc: dict = {
        "instance": fmr.label,
        "kind": fmr.kind,
        "order": fmr.order,
    }
    split = split_and_trace_ideals(fmr, level="position")
    doc["trace_ideal_sizes"] = [len(t) for t in split.trace_ideals]
    doc["zero_trace_ideals"] = split.zero_trace
    doc["m_nilpotence_degree"] = split.nilpotence_degree
    if fmr.kind == "sigma" and fmr.sigma.is_binary():
        blocks, _ = normalize_blocks(fmr.sigma)
        doc["normalization"] = {
            "tau": list(blocks.tau),
            "classes": [list(c) for c in blocks.classes],
            "block_orders": list(blocks.block_orders),
        }
    ctx = VerifyContext(fmr, cap=spec.cap, iso_budget=spec.iso_budget)
    try:
        subs = ctx.subs
        doc["subgroup_orders"] = subs.order_table()
    except BudgetExceededError:
        doc["subgroup_orders"] = "not-computed (budget)"
    report = run_checks(ctx)
    doc["verification"] = report.to_json_obj(include_timings=False)
    for check_obj, c in zip(doc["verification"]["checks"], report.checks):
        check_obj["unmet"] = list(c.unmet)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK if report.summary["fail"] == 0 else EXIT_CHECK_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmr",
        description="Formal matrix rings: construction, automorphisms, verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the multiplier identities")
    p.add_argument("spec")

    p = sub.add_parser("normalize", help="arrange equivalence classes contiguously")
    p.add_argument("spec")

    p = sub.add_parser("build", help="construct the ring and print structure")
    p.add_argument("spec")
    p.add_argument("--info", action="store_true", help="include unit/center/radical sizes")

    p = sub.add_parser("aut", help="enumerate the automorphism group")
    p.add_argument("spec")
    p.add_argument("--cap", type=int, default=None, help="search node budget")

    p = sub.add_parser("verify", help="run structural checks")
    p.add_argument("spec")
    p.add_argument("--results", default="all", help="comma-separated ids or 'all'")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--timings", action="store_true", help="include per-check millis")
    p.add_argument("--cap", type=int, default=None, help="search node budget")

    p = sub.add_parser("report", help="full pipeline document")
    p.add_argument("spec")
    return parser


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        _read_threads_env()
        spec = SpecFile.load(args.spec)
        handler = {
            "validate": _cmd_validate,
            "normalize": _cmd_normalize,
            "build": _cmd_build,
            "aut": _cmd_aut,
            "verify": _cmd_verify,
            "report": _cmd_report,
        }[args.command]
        return handler(spec, args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (
        InvalidInputError,
        AxiomViolationError,
        LawViolationError,
        UnsupportedMultiplierError,
    ) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except TheoremViolationError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILURE


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
