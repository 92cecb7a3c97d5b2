"""Handcrafted script-file corpus vs checked-in expected extractions.

The expected files were authored by hand (tests/fixtures/make_expected.py
records the per-declaration reasoning and line-number lookup); the parser was
not consulted when writing them. The comparison below is byte-for-byte after
normalizing source paths to be relative to the fixture directory.
"""

import dataclasses
import json
from pathlib import Path

from tacrec.script_parser import DeclForm, record_to_json, scan_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def _normalized_scan():
    records, report = scan_corpus(str(FIXTURES / "corpus"))
    root = FIXTURES / "corpus"
    records = [
        dataclasses.replace(r, source_path=str(Path(r.source_path).relative_to(root)))
        for r in records
    ]
    skips = [
        dataclasses.replace(s, source_path=str(Path(s.source_path).relative_to(root)))
        for s in report.skip_reasons
    ]
    return records, skips, report


def test_corpus_is_large_and_diverse():
    files = sorted((FIXTURES / "corpus").glob("*Script.sml"))
    assert len(files) >= 20
    records, _, _ = _normalized_scan()
    forms = {r.decl_form for r in records}
    assert forms == {
        DeclForm.THEOREM_PROOF_QED,
        DeclForm.TRIVIALITY,
        DeclForm.STORE_THM,
        DeclForm.PROVE,
    }


def test_records_match_expected_byte_for_byte():
    records, _, _ = _normalized_scan()
    got = "".join(record_to_json(r) + "\n" for r in records)
    want = (FIXTURES / "expected_records.jsonl").read_text(encoding="utf-8")
    assert got == want


def test_skips_match_expected_byte_for_byte():
    _, skips, _ = _normalized_scan()
    lines = [
        json.dumps({"path": s.source_path, "line": s.line, "reason": s.reason}, ensure_ascii=False)
        for s in sorted(skips, key=lambda s: (s.source_path, s.line, s.reason))
    ]
    got = "".join(line + "\n" for line in lines)
    want = (FIXTURES / "expected_skips.jsonl").read_text(encoding="utf-8")
    assert got == want


def test_report_counts_are_consistent():
    records, skips, report = _normalized_scan()
    assert report.proofs_extracted == len(records)
    assert report.proofs_skipped == len(skips)
    assert report.files_scanned == len(list((FIXTURES / "corpus").glob("*Script.sml")))


def test_scan_is_deterministic_across_runs():
    a_records, a_skips, _ = _normalized_scan()
    b_records, b_skips, _ = _normalized_scan()
    assert a_records == b_records
    assert a_skips == b_skips
