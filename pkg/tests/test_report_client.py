import io
import json
import logging

import pytest

from report_client import ReportClient, render_matrix, render_verdict

VERDICT = {
    "family": "G3[plus-x]",
    "r": "1/3",
    "order": 6,
    "passed": False,
    "validated": False,
    "branch": None,
    "checks": [
        {"name": "evaluation", "passed": True, "verified_order": 6, "detail": "12 terms", "certificate": None},
        {
            "name": "horn-annihilation",
            "passed": False,
            "verified_order": 5,
            "detail": "operator does not annihilate the closed form",
            "certificate": {"monomial": ["1", "0"]},
        },
    ],
    "certificate": {"check": "horn-annihilation", "monomial": ["1", "0"], "branch": "s1=+"},
    "coefficients": None,
    "attempts": [{"branch": "s1=+"}, {"branch": "s1=-"}],
    "empirical": None,
}


def test_render_failing_verdict():
    text = render_verdict(VERDICT)
    assert text.splitlines()[0].startswith("family G3[plus-x]  r = 1/3  order 6  FAIL  branch -")
    assert "[FAIL] horn-annihilation" in text
    assert "    check: horn-annihilation" in text
    assert "branches tried: s1=+, s1=-" in text


def test_matrix_marks_expected_failures():
    passing = dict(VERDICT, family="F4-2", passed=True, validated=True)
    surprise = dict(VERDICT, family="H5", passed=False, validated=True)
    lines = render_matrix([passing, VERDICT, surprise], {"F4-2": "Lauricella"}).splitlines()
    assert lines[1].split()[:5] == ["F4-2", "1/3", "6", "PASS", "yes"]
    assert lines[1].endswith("Lauricella")
    assert lines[2].split()[4] == "yes"
    assert lines[3].split()[4] == "NO"


def test_json_client_writes_sorted_payload():
    stream = io.StringIO()
    client = ReportClient("json", stream)
    client.send_verdicts([VERDICT])
    payload = json.loads(stream.getvalue())
    assert payload["all_as_expected"] is True
    assert payload["verdicts"][0]["family"] == "G3[plus-x]"


def test_text_client_uses_rendering():
    stream = io.StringIO()
    ReportClient("text", stream).send_payload("census", {"volume": 3}, "G3: volume 3")
    assert stream.getvalue() == "G3: volume 3\n"


def test_unknown_format():
    with pytest.raises(ValueError):
        ReportClient("xml")


def test_payload_banner_logged_at_info(caplog):
    stream = io.StringIO()
    with caplog.at_level(logging.INFO, logger="report_client"):
        ReportClient("json", stream).send_verdict(VERDICT)
    messages = [record.getMessage() for record in caplog.records if record.levelno == logging.INFO]
    assert "EMITTING VERDICT REPORT" in messages
    assert any(message.startswith("Full payload:") and "G3[plus-x]" in message for message in messages)
