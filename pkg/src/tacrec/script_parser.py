"""Extraction of tactic sequences from HOL4 theory script files.

A script file is lexed into a token stream in which comments ``(* ... *)``
(nested), string literals, and term quotations (backtick, double-backtick,
and the Unicode quote pairs) are opaque: keywords and combinators inside
them are never interpreted.  The token stream is then scanned for the four
recognized declaration forms and each proof's tactic expression is
flattened into a linear sequence of tactic head identifiers.

Input does not have to be a compilable script; lexing and declaration
scanning recover from unterminated spans and malformed expressions by
recording a skip and continuing.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import EmptyTactic, NoSuchDirectory, TacticParseFailure

TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")

# Infix combinators that concatenate left and right operand tokens.
SEQUENCERS = frozenset({"THEN", ">>", "\\\\", "THEN1", ">-"})
BRANCHERS = frozenset({"THENL", ">|"})
ALTERNATION = frozenset({"ORELSE"})
BY_OPS = frozenset({"by", "suffices_by"})
# Unary wrappers stripped in front of the tactic they wrap.
TRANSPARENT_WRAPPERS = frozenset({"rpt", "TRY", "REPEAT", "REVERSE"})

_INFIX_OPS = SEQUENCERS | BRANCHERS | ALTERNATION | BY_OPS

_IDENT_START = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_"
)
_IDENT_CHARS = _IDENT_START | frozenset("0123456789'")
_SYMBOLIC = frozenset("!%&$#+-/:<=>?@\\~^|*")
_DELIMS = frozenset("()[]{},;.")


class DeclForm(str, Enum):
    THEOREM_PROOF_QED = "TheoremProofQED"
    TRIVIALITY = "Triviality"
    STORE_THM = "StoreThm"
    PROVE = "Prove"


@dataclass(frozen=True)
class ProofRecord:
    """One theorem/lemma with its flattened tactic-token sequence."""

    theory: str
    theorem_name: str
    decl_form: DeclForm
    tactics: tuple[str, ...]
    source_path: str
    line_span: tuple[int, int]


@dataclass(frozen=True)
class SkipRecord:
    source_path: str
    line: int
    reason: str


@dataclass
class ParseReport:
    files_scanned: int = 0
    proofs_extracted: int = 0
    proofs_skipped: int = 0
    skip_reasons: list[SkipRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Lexer

IDENT, SYM, STRING, QUOTE, NUMBER, UNTERM = (
    "ident",
    "sym",
    "string",
    "quote",
    "number",
    "unterm",
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int


_QUOTE_PAIRS = {
    "“": "”",  # left/right double quotation mark
    "‘": "’",  # left/right single quotation mark
}


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def _lex(text: str) -> list[Tok]:
    """Tokenize; opaque spans become single tokens, comments vanish.

    An unterminated opaque span yields an ``unterm`` marker token and lexing
    resumes right after the opening delimiter so declarations written inside
    the dangling span are still discovered (best-effort recovery).
    """
    starts = _line_starts(text)

    def line_of(pos: int) -> int:
        return bisect.bisect_right(starts, pos)

    toks: list[Tok] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f\v":
            i += 1
            continue
        if ch == "(" and text.startswith("(*", i):
            end = _scan_comment(text, i + 2)
            if end is None:
                toks.append(Tok(UNTERM, "(*", line_of(i)))
                i += 2
            else:
                i = end
            continue
        if ch == '"':
            end = _scan_string(text, i + 1)
            if end is None:
                toks.append(Tok(UNTERM, '"', line_of(i)))
                i += 1
            else:
                toks.append(Tok(STRING, text[i + 1 : end - 1], line_of(i)))
                i = end
            continue
        if ch == "`":
            if text.startswith("``", i):
                close = text.find("``", i + 2)
                if close < 0:
                    toks.append(Tok(UNTERM, "``", line_of(i)))
                    i += 2
                else:
                    toks.append(Tok(QUOTE, text[i + 2 : close], line_of(i)))
                    i = close + 2
            else:
                close = text.find("`", i + 1)
                if close < 0:
                    toks.append(Tok(UNTERM, "`", line_of(i)))
                    i += 1
                else:
                    toks.append(Tok(QUOTE, text[i + 1 : close], line_of(i)))
                    i = close + 1
            continue
        if ch in _QUOTE_PAIRS:
            close = text.find(_QUOTE_PAIRS[ch], i + 1)
            if close < 0:
                toks.append(Tok(UNTERM, ch, line_of(i)))
                i += 1
            else:
                toks.append(Tok(QUOTE, text[i + 1 : close], line_of(i)))
                i = close + 1
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            # qualified long identifiers: Q.prove, bossLib.rw
            while j + 1 < n and text[j] == "." and text[j + 1] in _IDENT_START:
                j += 2
                while j < n and text[j] in _IDENT_CHARS:
                    j += 1
            toks.append(Tok(IDENT, text[i:j], line_of(i)))
            i = j
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "._"):
                j += 1
            toks.append(Tok(NUMBER, text[i:j], line_of(i)))
            i = j
            continue
        if ch in _SYMBOLIC:
            j = i + 1
            while j < n and text[j] in _SYMBOLIC:
                j += 1
            toks.append(Tok(SYM, text[i:j], line_of(i)))
            i = j
            continue
        if ch in _DELIMS:
            toks.append(Tok(SYM, ch, line_of(i)))
            i += 1
            continue
        i += 1  # anything else: skip (best effort)
    return toks


def _scan_comment(text: str, pos: int) -> int | None:
    """Scan past a nested ``(* ... *)``; returns index after the closer."""
    depth = 1
    i = pos
    while depth:
        open_at = text.find("(*", i)
        close_at = text.find("*)", i)
        if close_at < 0:
            return None
        if 0 <= open_at < close_at:
            depth += 1
            i = open_at + 2
        else:
            depth -= 1
            i = close_at + 2
    return i


def _scan_string(text: str, pos: int) -> int | None:
    i, n = pos, len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == '"':
            return i + 1
        i += 1
    return None


# ---------------------------------------------------------------------------
# Tactic-expression flattening


def _base_name(ident: str) -> str:
    return ident.rsplit(".", 1)[-1]


def _is_infix(tok: Tok) -> bool:
    name = _base_name(tok.text) if tok.kind == IDENT else tok.text
    return (tok.kind in (IDENT, SYM)) and name in _INFIX_OPS


class _Stream:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok


def _fail(tok: Tok | None, why: str) -> TacticParseFailure:
    at = f" at line {tok.line} near {tok.text!r}" if tok else " at end of expression"
    return TacticParseFailure(f"{why}{at}")


def _parse_expr(s: _Stream) -> list[str]:
    acc = _parse_operand(s)
    while True:
        tok = s.peek()
        if tok is None or not _is_infix(tok):
            return acc
        s.next()
        op = _base_name(tok.text) if tok.kind == IDENT else tok.text
        if op in SEQUENCERS:
            acc += _parse_operand(s)
        elif op in ALTERNATION:
            _parse_operand(s)  # alternative branch: author's fallback, dropped
        elif op in BRANCHERS:
            acc += _parse_branches(s)
        else:  # by / suffices_by in operator position: left side was a tactic
            raise _fail(tok, "misplaced infix")


def _parse_branches(s: _Stream) -> list[str]:
    tok = s.peek()
    if tok is None or tok.kind != SYM or tok.text != "[":
        raise _fail(tok, "branch list expected")
    s.next()
    out: list[str] = []
    tok = s.peek()
    if tok is not None and tok.kind == SYM and tok.text == "]":
        s.next()
        return out
    while True:
        out += _parse_expr(s)
        tok = s.peek()
        if tok is None:
            raise _fail(None, "unclosed branch list")
        s.next()
        if tok.kind == SYM and tok.text == "]":
            return out
        if not (tok.kind == SYM and tok.text == ","):
            raise _fail(tok, "expected ',' or ']' in branch list")


def _parse_operand(s: _Stream) -> list[str]:
    tok = s.peek()
    if tok is None:
        raise _fail(None, "tactic expected")
    if tok.kind == SYM and tok.text == "(":
        s.next()
        inner = _parse_expr(s)
        closer = s.peek()
        if closer is None or closer.kind != SYM or closer.text != ")":
            raise _fail(closer, "expected ')'")
        s.next()
        return inner
    if tok.kind == QUOTE:
        s.next()
        nxt = s.peek()
        if nxt is not None and nxt.kind == IDENT and _base_name(nxt.text) in BY_OPS:
            s.next()
            return [_base_name(nxt.text)] + _parse_operand(s)
        raise _fail(tok, "quotation without 'by'")
    if tok.kind == IDENT:
        name = _base_name(tok.text)
        if name in TRANSPARENT_WRAPPERS:
            s.next()
            return _parse_operand(s)
        if name in _INFIX_OPS:
            raise _fail(tok, "combinator where tactic expected")
        if not TOKEN_RE.match(name):
            raise _fail(tok, "bad tactic head")
        s.next()
        _consume_args(s)
        return [name]
    raise _fail(tok, "tactic expected")


def _consume_args(s: _Stream) -> None:
    """Discard the argument tokens of an atomic tactic."""
    while True:
        tok = s.peek()
        if tok is None or _is_infix(tok):
            return
        if tok.kind in (QUOTE, STRING, NUMBER):
            s.next()
            continue
        if tok.kind == IDENT:
            s.next()
            continue
        if tok.kind == SYM:
            if tok.text in (")", "]", "}", ","):
                return
            if tok.text in ("[", "(", "{"):
                _skip_group(s)
                continue
            s.next()  # stray operator used as argument (e.g. $)
            continue
        return


_CLOSER = {"(": ")", "[": "]", "{": "}"}


def _skip_group(s: _Stream) -> None:
    opener = s.next()
    want = _CLOSER[opener.text]
    depth = 1
    while depth:
        tok = s.peek()
        if tok is None:
            raise _fail(None, f"expected '{want}'")
        s.next()
        if tok.kind == SYM:
            if tok.text in ("(", "[", "{"):
                depth += 1
            elif tok.text in (")", "]", "}"):
                depth -= 1


def _flatten_tokens(toks: list[Tok]) -> list[str]:
    if not toks:
        raise EmptyTactic("empty tactic expression")
    for tok in toks:
        if tok.kind == UNTERM:
            raise TacticParseFailure("unterminated span inside tactic expression")
    s = _Stream(toks)
    out = _parse_expr(s)
    if s.peek() is not None:
        raise _fail(s.peek(), "trailing tokens")
    if not out:
        raise EmptyTactic("tactic expression flattened to nothing")
    return out


def flatten_tactic_expr(expr_text: str) -> list[str]:
    """Flatten raw tactic-expression text into its sequence of tactic heads.

    Sequencers concatenate, branch lists append each branch in order, the
    left alternative wins for ``ORELSE``, and ``by``/``suffices_by`` emit
    themselves followed by their right-hand tactic.  Raises ``EmptyTactic``
    or ``TacticParseFailure``.
    """
    return _flatten_tokens(_lex(expr_text))


# ---------------------------------------------------------------------------
# Declaration scanning


def theory_of_path(source_path: str) -> str:
    stem = Path(source_path).stem
    if stem.endswith("Script") and len(stem) > len("Script"):
        return stem[: -len("Script")]
    return stem


_DECL_KEYWORDS = {"Theorem": DeclForm.THEOREM_PROOF_QED, "Triviality": DeclForm.TRIVIALITY}


class _Unterminated(Exception):
    def __init__(self, resume: int):
        self.resume = resume


def extract_proofs(
    script_text: str, source_path: str
) -> tuple[list[ProofRecord], list[SkipRecord]]:
    """Extract every recognized proof declaration from one script's text.

    Returns records in source order plus a skip record for each declaration
    that had to be abandoned.  Never raises on malformed input.
    """
    toks = _lex(script_text)
    theory = theory_of_path(source_path)
    records: list[ProofRecord] = []
    skips: list[SkipRecord] = []

    def skip(line: int, reason: str) -> None:
        skips.append(SkipRecord(source_path, line, reason))

    i = 0
    n = len(toks)
    while i < n:
        tok = toks[i]
        if tok.kind != IDENT:
            i += 1
            continue
        name = tok.text
        if name in _DECL_KEYWORDS:
            i = _scan_theorem_decl(toks, i, theory, source_path, records, skip)
        elif name == "val":
            i = _scan_val_decl(toks, i, theory, source_path, records, skip)
        elif _base_name(name) == "prove":
            nxt = toks[i + 1] if i + 1 < n else None
            if nxt is not None and nxt.kind == SYM and nxt.text == "(":
                skip(tok.line, "anonymous-prove")
                try:
                    i = _skip_balanced(toks, i + 1)
                except _Unterminated as u:
                    i = u.resume
            else:
                i += 1
        else:
            i += 1

    _drop_duplicates(records, skips, source_path)
    return records, skips


def _drop_duplicates(
    records: list[ProofRecord], skips: list[SkipRecord], source_path: str
) -> None:
    seen: set[str] = set()
    kept: list[ProofRecord] = []
    for rec in records:
        if rec.theorem_name in seen:
            skips.append(
                SkipRecord(source_path, rec.line_span[0], f"duplicate-name:{rec.theorem_name}")
            )
        else:
            seen.add(rec.theorem_name)
            kept.append(rec)
    records[:] = kept


def _scan_theorem_decl(toks, i, theory, source_path, records, skip) -> int:
    """Parse ``Theorem|Triviality name[attrs]: ... Proof ... QED``."""
    n = len(toks)
    form = _DECL_KEYWORDS[toks[i].text]
    decl_line = toks[i].line
    j = i + 1
    if j >= n or toks[j].kind != IDENT:
        return i + 1  # keyword used as an ordinary identifier
    name = toks[j].text
    j += 1
    if j < n and toks[j].kind == SYM and toks[j].text == "[":
        try:
            j = _skip_balanced(toks, j)
        except _Unterminated as u:
            skip(decl_line, "unterminated-span")
            return u.resume
    if j >= n:
        return j
    sep = toks[j]
    if sep.kind == SYM and sep.text == "=":
        skip(decl_line, "no-proof-body")
        return j + 1
    if not (sep.kind == SYM and sep.text == ":"):
        return i + 1
    j += 1
    # statement runs until the Proof keyword
    while j < n:
        tok = toks[j]
        if tok.kind == UNTERM:
            skip(decl_line, "unterminated-span")
            return j + 1
        if tok.kind == IDENT:
            if tok.text == "Proof":
                break
            if tok.text in _DECL_KEYWORDS or tok.text == "val":
                skip(decl_line, "no-proof-body")
                return j
        j += 1
    else:
        skip(decl_line, "no-proof-body")
        return j
    j += 1
    body_start = j
    while j < n:
        tok = toks[j]
        if tok.kind == UNTERM:
            skip(decl_line, "unterminated-span")
            return j + 1
        if tok.kind == IDENT and tok.text == "QED":
            break
        j += 1
    else:
        skip(decl_line, "tactic-parse-failure")
        return j
    body = toks[body_start:j]
    end_line = toks[j].line
    try:
        tactics = _flatten_tokens(body)
    except (EmptyTactic, TacticParseFailure) as e:
        skip(decl_line, e.code)
        return j + 1
    records.append(
        ProofRecord(theory, name, form, tuple(tactics), source_path, (decl_line, end_line))
    )
    return j + 1


def _scan_val_decl(toks, i, theory, source_path, records, skip) -> int:
    """Parse ``val x = store_thm("name", tm, tac)`` / ``val x = prove(tm, tac)``."""
    n = len(toks)
    decl_line = toks[i].line
    if i + 3 >= n:
        return i + 1
    bound, eq, fn = toks[i + 1], toks[i + 2], toks[i + 3]
    if bound.kind != IDENT or eq.kind != SYM or eq.text != "=" or fn.kind != IDENT:
        return i + 1
    fn_name = _base_name(fn.text)
    if fn_name not in ("store_thm", "prove"):
        return i + 1
    j = i + 4
    if j >= n or toks[j].kind != SYM or toks[j].text != "(":
        return i + 1
    try:
        args, end = _split_call_args(toks, j)
    except _Unterminated as u:
        skip(decl_line, "unterminated-span")
        return u.resume
    except TacticParseFailure:
        skip(decl_line, "tactic-parse-failure")
        return j + 1
    end_line = toks[end - 1].line
    if fn_name == "store_thm":
        if len(args) != 3 or len(args[0]) != 1 or args[0][0].kind != STRING:
            skip(decl_line, "tactic-parse-failure")
            return end
        thm_name = args[0][0].text
        body = args[2]
        form = DeclForm.STORE_THM
    else:
        if len(args) != 2:
            skip(decl_line, "tactic-parse-failure")
            return end
        thm_name = bound.text
        body = args[1]
        form = DeclForm.PROVE
    try:
        tactics = _flatten_tokens(body)
    except (EmptyTactic, TacticParseFailure) as e:
        skip(decl_line, e.code)
        return end
    records.append(
        ProofRecord(theory, thm_name, form, tuple(tactics), source_path, (decl_line, end_line))
    )
    return end


def _skip_balanced(toks: list[Tok], i: int) -> int:
    """Skip a balanced bracket group starting at toks[i]; returns next index."""
    want = _CLOSER[toks[i].text]
    depth = 0
    n = len(toks)
    j = i
    while j < n:
        tok = toks[j]
        if tok.kind == UNTERM:
            raise _Unterminated(j + 1)
        if tok.kind == SYM:
            if tok.text in ("(", "[", "{"):
                depth += 1
            elif tok.text in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return j + 1
        j += 1
    raise _Unterminated(n)


def _split_call_args(toks: list[Tok], i: int) -> tuple[list[list[Tok]], int]:
    """Split ``( a, b, c )`` starting at the '(' into top-level comma groups."""
    args: list[list[Tok]] = []
    current: list[Tok] = []
    depth = 0
    n = len(toks)
    j = i
    while j < n:
        tok = toks[j]
        if tok.kind == UNTERM:
            raise _Unterminated(j + 1)
        if tok.kind == SYM and tok.text in ("(", "[", "{"):
            depth += 1
            if depth > 1:
                current.append(tok)
        elif tok.kind == SYM and tok.text in (")", "]", "}"):
            depth -= 1
            if depth == 0:
                args.append(current)
                return args, j + 1
            current.append(tok)
        elif tok.kind == SYM and tok.text == "," and depth == 1:
            args.append(current)
            current = []
        elif depth >= 1:
            current.append(tok)
        j += 1
    raise _Unterminated(n)


# ---------------------------------------------------------------------------
# Corpus scanning


def scan_corpus(
    root: str | Path, pattern: str = "*Script.sml"
) -> tuple[list[ProofRecord], ParseReport]:
    """Extract proofs from every matching file under ``root``.

    Files are processed in lexicographic path order so the result is
    deterministic regardless of filesystem traversal order.
    """
    root = Path(root)
    if not root.is_dir():
        raise NoSuchDirectory(f"not a directory: {root}")
    report = ParseReport()
    records: list[ProofRecord] = []
    paths = sorted(p for p in root.rglob(pattern) if p.is_file())
    for path in paths:
        report.files_scanned += 1
        try:
            text = path.read_bytes().decode("utf-8")
        except (OSError, UnicodeDecodeError) as e:
            report.skip_reasons.append(SkipRecord(str(path), 1, f"io-error:{e.__class__.__name__}"))
            continue
        recs, skips = extract_proofs(text, str(path))
        records.extend(recs)
        report.skip_reasons.extend(skips)
    report.proofs_extracted = len(records)
    report.proofs_skipped = len(report.skip_reasons)
    return records, report


# ---------------------------------------------------------------------------
# Record serialization (the `extract` CLI output format)


def record_to_json(rec: ProofRecord) -> str:
    return json.dumps(
        {
            "theory": rec.theory,
            "name": rec.theorem_name,
            "decl_form": rec.decl_form.value,
            "tactics": list(rec.tactics),
            "path": rec.source_path,
            "line_start": rec.line_span[0],
            "line_end": rec.line_span[1],
        },
        ensure_ascii=False,
    )


def record_from_json(line: str) -> ProofRecord:
    obj = json.loads(line)
    return ProofRecord(
        theory=obj["theory"],
        theorem_name=obj["name"],
        decl_form=DeclForm(obj["decl_form"]),
        tactics=tuple(obj["tactics"]),
        source_path=obj["path"],
        line_span=(obj["line_start"], obj["line_end"]),
    )


def write_records(records: list[ProofRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(record_to_json(rec) + "\n")


def read_records(path: str | Path) -> list[ProofRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(record_from_json(line))
    return out
