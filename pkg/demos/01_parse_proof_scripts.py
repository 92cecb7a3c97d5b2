"""Parsing theorem-prover proof scripts into tactic sequences.

A theory script interleaves definitions, comments, and proofs.  The
parser cares only about the proofs: each one is reduced to the flat
sequence of tactic names that would be applied in order, with the
combinator plumbing (THEN, THENL, ...) dissolved away.

Run top to bottom: python3 demos/01_parse_proof_scripts.py
"""

import tempfile
from pathlib import Path

from tacrec import extract_proofs, flatten_tactic_expr, scan_corpus

# ---------------------------------------------------------------------------
# Flattening a single tactic expression
# ---------------------------------------------------------------------------
# The combinator language composes tactics sequentially (THEN and its ASCII
# spelling >>), per-subgoal (THENL / >|), and with fallbacks (ORELSE).  The
# flattener walks the expression and emits base tactic names in application
# order.  Arguments in brackets/quotations are discarded, wrappers like rpt
# and TRY are stripped, and only the first ORELSE branch is kept.

examples = [
    "rw[foo_def] THEN metis_tac[bar_thm]",
    "rpt strip_tac >> fs[] >> simp[length_def]",
    "Induct THEN1 rw[] THEN metis_tac[]",
    "conj_tac >| [rw[], metis_tac[append_nil]]",
    "TRY (irule lemma1) ORELSE metis_tac[]",
    "Cases_on `xs` \\\\ fs[] \\\\ res_tac",
]
for src in examples:
    print(f"{src!r:58} -> {flatten_tactic_expr(src)}")

# ---------------------------------------------------------------------------
# Extracting proofs from a whole theory file
# ---------------------------------------------------------------------------
# Theory files declare proofs in a few surface forms.  The two most common:
# the block form (Theorem name: goal Proof tactics QED) and the older
# store_thm call.  Both yield the same record shape.

SCRIPT = '''\
(* listExtraScript.sml -- demo theory file *)
open HolKernel boolLib bossLib;

val _ = new_theory "listExtra";

Theorem append_assoc_again:
  !xs ys zs. xs ++ (ys ++ zs) = (xs ++ ys) ++ zs
Proof
  Induct >> rw[] >> metis_tac[APPEND_ASSOC]
QED

val rev_rev = store_thm("rev_rev",
  ``!xs. REVERSE (REVERSE xs) = xs``,
  rpt strip_tac >> fs[REVERSE_REVERSE]);

Triviality nil_len[simp]:
  LENGTH [] = 0
Proof
  rw[LENGTH]
QED

val _ = export_theory();
'''

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    (root / "listExtraScript.sml").write_text(SCRIPT)

    # extract_proofs handles one script's text; scan_corpus walks a directory
    # tree and gathers every *Script.sml it finds, in lexicographic order.
    records, skips = extract_proofs(SCRIPT, "listExtraScript.sml")
    print(f"\nextracted {len(records)} proofs, {len(skips)} skipped spans")
    for rec in records:
        print(f"  {rec.theory}.{rec.theorem_name}  [{rec.decl_form.value}]")
        print(f"    lines {rec.line_span[0]}-{rec.line_span[1]}: {list(rec.tactics)}")

    all_records, report = scan_corpus(root)
    print(
        f"\nscan_corpus: {report.files_scanned} file(s), "
        f"{report.proofs_extracted} proofs, {report.proofs_skipped} skips"
    )

# Note the forms: the Theorem block, the store_thm call, and the Triviality
# block (whose [simp] attribute is part of the declaration, not the name).
# Malformed spans never abort a scan -- they are reported as skips with a
# reason, and parsing resumes at the next declaration.
