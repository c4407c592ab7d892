"""Client for emitting verification reports."""

from __future__ import annotations

import json
import logging
import sys
from typing import Any, Dict, Iterable, List, Optional, TextIO

logger = logging.getLogger(__name__)

FORMATS = ("text", "json")


class ReportClient:
    """Writes reports to a stream as stable JSON or as plain text."""

    def __init__(self, fmt: str = "text", stream: Optional[TextIO] = None):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
        self.fmt = fmt
        self.stream = stream or sys.stdout
        logger.info("Initialized report client with format: %s", fmt)

    def _log_payload(self, kind: str, payload: Any) -> None:
        logger.info("=" * 80)
        logger.info("EMITTING %s REPORT", kind.upper())
        logger.info("=" * 80)
        try:
            logger.info("Full payload:\n%s", json.dumps(payload, indent=2, ensure_ascii=False))
        except (TypeError, ValueError) as exc:
            logger.warning("Could not format payload as JSON: %s", exc)
            logger.info("Raw payload: %s", payload)
        logger.info("=" * 80)

    def _write(self, text: str) -> None:
        self.stream.write(text if text.endswith("\n") else text + "\n")
        self.stream.flush()

    def _write_json(self, payload: Any) -> None:
        self._write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))

    def send_payload(self, kind: str, payload: Dict[str, Any], text: Optional[str] = None) -> None:
        """Emit one report; ``text`` is the human rendering used in text mode."""

        self._log_payload(kind, payload)
        if self.fmt == "json":
            self._write_json(payload)
        else:
            self._write(text if text is not None else json.dumps(payload, indent=2, sort_keys=True))
        logger.info("Emitted %s report", kind)

    def send_verdict(self, verdict: Dict[str, Any]) -> None:
        self.send_payload("verdict", verdict, render_verdict(verdict))

    def send_verdicts(self, verdicts: List[Dict[str, Any]], descriptions: Optional[Dict[str, str]] = None) -> None:
        payload = {
            "verdicts": verdicts,
            "all_as_expected": all(v["passed"] == v["validated"] for v in verdicts),
        }
        self.send_payload("verify-all", payload, render_matrix(verdicts, descriptions or {}))

    def close(self) -> None:
        """Flush the underlying stream."""
        self.stream.flush()
        logger.debug("Closed report client")


def _status(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def _certificate_lines(certificate: Optional[Dict[str, Any]], indent: str = "    ") -> List[str]:
    if not certificate:
        return []
    return [f"{indent}{key}: {certificate[key]}" for key in sorted(certificate)]


def render_verdict(verdict: Dict[str, Any]) -> str:
    lines = [
        f"family {verdict['family']}  r = {verdict['r']}  order {verdict['order']}  "
        f"{_status(verdict['passed'])}  branch {verdict['branch'] or '-'}"
    ]
    for check in verdict["checks"]:
        mark = "ok  " if check["passed"] else "FAIL"
        order = check["verified_order"] if check["verified_order"] is not None else "-"
        lines.append(f"  [{mark}] {check['name']:<20} order {order:<4} {check['detail']}")
    if verdict.get("coefficients") is not None:
        lines.append("  coefficients: " + ", ".join(verdict["coefficients"]))
    if verdict.get("certificate"):
        lines.append("  certificate:")
        lines.extend(_certificate_lines(verdict["certificate"]))
    if not verdict["passed"] and len(verdict.get("attempts", [])) > 1:
        lines.append(f"  branches tried: {', '.join(a['branch'] for a in verdict['attempts'])}")
    empirical = verdict.get("empirical")
    if empirical:
        state = empirical.get("consistent")
        lines.append(f"  empirical f, g: {'consistent' if state else 'inconsistent' if state is not None else 'unavailable'}")
    return "\n".join(lines)


def render_matrix(verdicts: Iterable[Dict[str, Any]], descriptions: Dict[str, str]) -> str:
    lines = [f"{'family':<10} {'r':<6} {'order':<6} {'result':<7} {'expected':<9} claim"]
    for v in verdicts:
        expected = "yes" if v["passed"] == v["validated"] else "NO"
        lines.append(
            f"{v['family']:<10} {v['r']:<6} {v['order']:<6} {_status(v['passed']):<7} {expected:<9} "
            f"{descriptions.get(v['family'], '')}"
        )
    return "\n".join(lines)


def render_series(payload: Dict[str, Any]) -> str:
    return f"{payload['family']} at r = {payload['r']} (branch {payload['branch']}):\n  {payload['series']}"
