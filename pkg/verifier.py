"""Command-line verifier for hypergeometric closed forms."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from config import settings
from hypercheck.services.analysis import (
    EVALUATION_ERRORS,
    RankDeficient,
    ResidualNonzero,
    ResonantParameter,
    VerifyTask,
    build_basis,
    decompose,
    ensure_nonresonant,
    error_certificate,
    fg_consistency,
    format_branches,
    parse_branches,
    power_relation_check,
    rank_census,
    verify_all,
    verify_family,
)
from hypercheck.services.closedforms import FamilyFileError, FamilySpec, UnknownFamily, get_family, load_family_file
from hypercheck.services.scalars import parse_rational
from hypercheck.services.tables import FAMILY_ORDER
from report_client import FORMATS, ReportClient, render_series

logger = logging.getLogger(__name__)
logging.basicConfig(
    level=os.getenv("LOG_LEVEL", settings.log_level),
    format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
    stream=sys.stderr,
)

EXIT_PASS = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

# Larger FC instances checked by verify-all through the GKZ route.
FC_EXTRA_SIZES = (3, 4)
FC_EXTRA_R = Fraction(2, 5)


class UsageError(ValueError):
    """Raised for arguments that parse but cannot be acted on."""


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verifier", description=__doc__)
    parser.add_argument("--format", choices=FORMATS, default="text", help="report format")
    parser.add_argument("--family-file", default=settings.family_file, help="YAML file with extra families")
    sub = parser.add_subparsers(dest="command", required=True)

    def family_args(p: argparse.ArgumentParser, r: bool = True) -> None:
        p.add_argument("--family", required=True, help="family name, e.g. F4-2 or G3")
        p.add_argument("--n", type=int, default=2, help="number of variables for FC families")
        p.add_argument("--variant", default=None, help="named variant of the family")
        p.add_argument("--order", type=int, default=None, help="truncation order in grid units")
        if r:
            p.add_argument("--r", type=_rational, default=settings.r_values[0], help="parameter r as p/q")

    expand = sub.add_parser("expand", help="print the series of a closed-form recipe")
    family_args(expand)
    expand.add_argument("--branch", default="", help='branch assignment such as "s1=+,pm1=-"')
    expand.add_argument("--recipe", default=None, help="recipe name (defaults to the family target)")

    verify = sub.add_parser("verify", help="verify one family at one r")
    family_args(verify)
    verify.add_argument("--branch", default="auto", help='"auto" or an assignment such as "s1=+,pm1=-"')

    verify_all_parser = sub.add_parser("verify-all", help="run every family at every configured r")
    verify_all_parser.add_argument("--r-values", default=None, help="comma-separated r values")
    verify_all_parser.add_argument("--workers", type=int, default=settings.workers)
    verify_all_parser.add_argument("--order", type=int, default=None)

    dec = sub.add_parser("decompose", help="coefficients of the closed form in the Gamma-series basis")
    family_args(dec)
    dec.add_argument("--branch", default="", help="branch assignment")

    relation = sub.add_parser("relation", help="check Phi(r) Phi(s) = Phi((r+s)/2)^2")
    family_args(relation)
    relation.add_argument("--s", type=_rational, required=True, help="second parameter s as p/q")
    relation.add_argument("--route", choices=("closed", "basis"), default="closed")
    relation.add_argument("--branch", default="", help="branch assignment")

    extract = sub.add_parser("extract", help="empirical f and g from the Gamma-series basis")
    family_args(extract, r=False)
    extract.add_argument("--r", type=_rational, action="append", default=None, help="r values (repeatable)")

    census = sub.add_parser("census", help="volume and gamma-vector counts of a family")
    family_args(census, r=False)
    census.add_argument("--seed", type=int, default=0, help="seed for the random r used to check A*gamma = beta")
    return parser


def _extra_families(path: Optional[str]) -> List[FamilySpec]:
    return load_family_file(path) if path else []


def _resolve_family(args: argparse.Namespace) -> FamilySpec:
    return get_family(args.family, args.n, args.variant, _extra_families(args.family_file))


def default_order(family: FamilySpec) -> int:
    if family.name.startswith("FC") and family.nvars > 2:
        return settings.fc_order
    return settings.order


def _branches_for(family: FamilySpec, text: str) -> Dict[str, int]:
    """Explicit assignment for the declared slots; unnamed slots take +."""

    try:
        branches = parse_branches(text) if text else {}
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    unknown = set(branches) - set(family.slots())
    if unknown:
        raise UsageError(
            f"{family.label} has no branch slots {sorted(unknown)}; declared: {family.slots() or 'none'}"
        )
    return {slot: branches.get(slot, 1) for slot in family.slots()}


def _cmd_expand(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    order = args.order or default_order(family)
    branches = _branches_for(family, args.branch)
    if args.recipe and args.recipe not in family.compiled().nodes:
        raise UsageError(f"{family.label} has no recipe named {args.recipe!r}")
    payload: Dict[str, Any] = {
        "family": family.label,
        "recipe": args.recipe or family.target,
        "r": str(args.r),
        "order": order,
        "branch": format_branches(branches),
    }
    try:
        series = family.evaluate(args.r, order, branches, args.recipe)
    except EVALUATION_ERRORS as exc:
        logger.warning("%s does not expand at r = %s: %s", family.label, args.r, exc)
        payload.update(series=None, error=str(exc), certificate=error_certificate(exc))
        client.send_payload("expansion", payload, _failure_text(payload))
        return EXIT_MISMATCH
    payload.update(series=series.to_text(family.variables), expansion=series.to_json())
    client.send_payload("expansion", payload, render_series(payload))
    return EXIT_PASS


def _failure_text(payload: Dict[str, Any]) -> str:
    lines = [f"{payload['family']} at r = {payload['r']} (branch {payload['branch']}): FAIL {payload['error']}"]
    lines += [f"    {key}: {value}" for key, value in payload["certificate"].items()]
    return "\n".join(lines)


def _cmd_verify(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    ensure_nonresonant(args.r)
    order = args.order or default_order(family)
    branches = None if args.branch == "auto" else _branches_for(family, args.branch)
    pairs = _fallback_pairs()
    verdict = verify_family(family, args.r, order, branches, fallback_pairs=pairs)
    client.send_verdict(verdict.to_json())
    return EXIT_PASS if verdict.passed else EXIT_MISMATCH


def _fallback_pairs() -> List[tuple]:
    values = list(settings.r_values)
    return [(a, b) for i, a in enumerate(values) for b in values[i + 1:]]


def _cmd_verify_all(args: argparse.Namespace, client: ReportClient) -> int:
    r_values = [parse_rational(v) for v in args.r_values.split(",")] if args.r_values else list(settings.r_values)
    ensure_nonresonant(*r_values)
    pairs = tuple(_fallback_pairs())
    tasks: List[VerifyTask] = []
    for name in FAMILY_ORDER:
        for r in r_values:
            tasks.append(VerifyTask(name, r, args.order or settings.order, 2, None, args.family_file, pairs))
    for r in r_values:
        tasks.append(VerifyTask("G3", r, args.order or settings.order, 2, "plus-x", args.family_file))
    for n in FC_EXTRA_SIZES:
        for name in ("FC-1", "FC-2", "FC-3"):
            tasks.append(VerifyTask(name, FC_EXTRA_R, settings.fc_order, n, None, args.family_file))
    for extra in _extra_families(args.family_file):
        for r in r_values:
            tasks.append(VerifyTask(extra.name, r, args.order or settings.order, 2, None, args.family_file))

    verdicts = [v.to_json() for v in verify_all(tasks, args.workers)]
    for task, verdict in zip(tasks, verdicts):
        if task.fc_n != 2:
            verdict["family"] = f"{verdict['family']}(n={task.fc_n})"
    descriptions = {}
    for n in (2, *FC_EXTRA_SIZES):
        for name in FAMILY_ORDER:
            try:
                spec = get_family(name, n)
            except UnknownFamily:
                continue
            label = spec.label if n == 2 or not name.startswith("FC") else f"{name}(n={n})"
            descriptions.setdefault(label, spec.description)
    descriptions["G3[plus-x]"] = "G3 with the sign-flipped cubic, expected to fail"
    client.send_verdicts(verdicts, descriptions)
    return EXIT_PASS if all(v["passed"] == v["validated"] for v in verdicts) else EXIT_MISMATCH


def _cmd_decompose(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    ensure_nonresonant(args.r)
    order = args.order or default_order(family)
    branches = _branches_for(family, args.branch)
    expected = family.coefficient_values(args.r)
    payload: Dict[str, Any] = {
        "family": family.label,
        "r": str(args.r),
        "order": order,
        "branch": format_branches(branches),
        "expected": [c.to_text() for c in expected] if expected is not None else None,
    }
    try:
        phi = family.evaluate(args.r, order, branches)
        found = decompose(phi, build_basis(family, args.r, order))
    except (RankDeficient, ResidualNonzero, *EVALUATION_ERRORS) as exc:
        payload.update(coefficients=None, error=str(exc), certificate=error_certificate(exc))
        client.send_payload("decomposition", payload, _failure_text(payload))
        return EXIT_MISMATCH
    payload["coefficients"] = [c.to_text() for c in found]
    matches = expected is None or expected == found
    payload["matches_registry"] = matches
    text = f"{family.label} at r = {args.r}: " + ", ".join(payload["coefficients"])
    if expected is not None:
        text += f"  (registry: {', '.join(payload['expected'])})"
    client.send_payload("decomposition", payload, text)
    return EXIT_PASS if matches else EXIT_MISMATCH


def _cmd_relation(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    order = args.order or default_order(family)
    branches = _branches_for(family, args.branch)
    if args.route == "basis":
        ensure_nonresonant(args.r, args.s, (args.r + args.s) / 2)
    verdict = power_relation_check(family, args.r, args.s, order, branches, args.route)
    client.send_verdict(verdict.to_json())
    return EXIT_PASS if verdict.passed else EXIT_MISMATCH


def _cmd_extract(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    values = args.r or list(settings.r_values)
    if len(values) < 2:
        raise UsageError("extract needs at least two r values")
    ensure_nonresonant(*values)
    order = args.order or min(default_order(family), 10)
    pairs = [(a, b) for i, a in enumerate(values) for b in values[i + 1:]]
    report = fg_consistency(family, pairs, order)
    payload = report.to_json()
    text = "\n".join(
        [
            f"{family.label}: f, g {'consistent' if report.consistent else 'INCONSISTENT'} over {len(pairs)} pairs",
            f"  f = {report.f.to_text(family.variables)}",
            f"  g = {report.g.to_text(family.variables)}",
        ]
        + [f"  [{'ok  ' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in report.checks]
    )
    client.send_payload("extraction", payload, text)
    return EXIT_PASS if report.consistent else EXIT_MISMATCH


def _cmd_census(args: argparse.Namespace, client: ReportClient) -> int:
    family = _resolve_family(args)
    report = rank_census(family, seed=args.seed)
    payload = report.to_json()
    lines = [
        f"{family.label}: volume {report.volume}, gamma vectors {report.gamma_total}, Horn rank {report.horn_rank}",
    ]
    lines += [f"  simplex {list(s)}: det {det}, {count} gamma vectors" for s, det, count in report.per_simplex]
    lines += [
        f"  extra solution {e['index']}: offset {e['offset']}, Horn {'annihilated' if e['horn_annihilated'] else 'NOT annihilated'}"
        for e in report.extra_checks
    ]
    client.send_payload("census", payload, "\n".join(lines))
    return EXIT_PASS if report.gamma_checks and report.gamma_total == report.volume else EXIT_MISMATCH


COMMANDS = {
    "expand": _cmd_expand,
    "verify": _cmd_verify,
    "verify-all": _cmd_verify_all,
    "decompose": _cmd_decompose,
    "relation": _cmd_relation,
    "extract": _cmd_extract,
    "census": _cmd_census,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    client = ReportClient(args.format)
    try:
        return COMMANDS[args.command](args, client)
    except (UnknownFamily, ResonantParameter, FamilyFileError, UsageError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"verifier: error: {message}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return EXIT_USAGE
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
