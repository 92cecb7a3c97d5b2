"""HTTP service exposing a loaded checkpoint to interactive clients.

Endpoints: ``POST /api/recommend``, ``GET /api/health``, ``GET /api/vocab``,
plus static file serving of the bundled web client at ``/``.  The model is
loaded once and never mutated; request handling is thread-per-connection
over that shared read-only state.
"""

from __future__ import annotations

import json
import os
import sys
import traceback
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .checkpoint import Checkpoint
from .corpus import Vocabulary
from .errors import TacrecError
from .predict import predict_topn

DEFAULT_ADDR = "127.0.0.1:7071"
ADDR_ENV_VAR = "TACREC_ADDR"
MAX_N = 50
MAX_BODY = 1 << 20

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
    ".png": "image/png",
}


def resolve_addr(explicit: str | None = None) -> tuple[str, int]:
    """Bind address: explicit flag, else TACREC_ADDR, else the default."""
    addr = explicit or os.environ.get(ADDR_ENV_VAR) or DEFAULT_ADDR
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


class _ValidationError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _parse_recommend_request(raw: bytes) -> tuple[list[str], int, int]:
    try:
        body = json.loads(raw)
    except ValueError as exc:
        raise _ValidationError("invalid-config", f"body is not valid JSON: {exc}")
    if not isinstance(body, dict):
        raise _ValidationError("invalid-config", "body must be an object")
    tactics = body.get("tactics")
    if tactics is None or not isinstance(tactics, list):
        raise _ValidationError("empty-context", "field 'tactics' must be a list")
    if not all(isinstance(t, str) for t in tactics):
        raise _ValidationError("invalid-config", "tactics must be strings")
    trimmed = [t.strip() for t in tactics]
    trimmed = [t for t in trimmed if t]
    if not trimmed:
        raise _ValidationError("empty-context", "tactics is empty after trimming")
    n = body.get("n", 7)
    k = body.get("k", 1)
    if not isinstance(n, int) or isinstance(n, bool) or not (1 <= n <= MAX_N):
        raise _ValidationError("invalid-config", f"n must be an integer in [1, {MAX_N}]")
    if k not in (1, 2):
        raise _ValidationError("invalid-config", "k must be 1 or 2")
    return trimmed, n, k


class RecommendHandler(BaseHTTPRequestHandler):
    # subclassed per server with these three set
    ckpt: Checkpoint = None
    vocab: Vocabulary = None
    webui: Path = None
    quiet = True

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # default logging is per-request noise
        if not self.quiet:
            sys.stderr.write(fmt % args + "\n")

    # -- helpers

    def _send_json(self, status: int, obj: dict) -> None:
        payload = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_error_obj(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"error": code, "message": message})

    # -- routes

    def do_POST(self):
        if self.path != "/api/recommend":
            self._send_error_obj(404, "not-found", f"no such endpoint: {self.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            if length > MAX_BODY:
                self._send_error_obj(400, "invalid-config", "request body too large")
                return
            raw = self.rfile.read(length)
            tactics, n, k = _parse_recommend_request(raw)
            warnings = []
            if len(tactics) < 3:
                warnings.append("context-shorter-than-3")
            seen = set()
            for t in tactics:
                if self.vocab.encode(t) == 1 and t not in seen:
                    seen.add(t)
                    warnings.append(f"unknown-token:{t}")
            rec = predict_topn(self.ckpt, tactics, n, k, vocab=self.vocab)
            self._send_json(
                200,
                {
                    "recommendations": [
                        {"tactics": list(tactics_), "score": score}
                        for tactics_, score in rec.items
                    ],
                    "model_digest": f"{self.ckpt.vocab_digest:016x}",
                    "warnings": warnings,
                },
            )
        except _ValidationError as exc:
            self._send_error_obj(400, exc.code, str(exc))
        except TacrecError as exc:
            self._send_error_obj(400, exc.code, str(exc))
        except Exception:
            err_id = uuid.uuid4().hex[:12]
            sys.stderr.write(f"[{err_id}] unhandled error\n{traceback.format_exc()}")
            self._send_error_obj(500, "internal", f"internal error (id {err_id})")

    def do_GET(self):
        try:
            if self.path == "/api/health":
                self._send_json(
                    200,
                    {
                        "status": "ok",
                        "model_digest": f"{self.ckpt.vocab_digest:016x}",
                        "vocab_size": len(self.vocab),
                        "config": self.ckpt.config.to_dict(),
                    },
                )
            elif self.path == "/api/vocab":
                self._send_json(200, {"tokens": list(self.vocab.tokens)})
            elif self.path.startswith("/api/"):
                self._send_error_obj(404, "not-found", f"no such endpoint: {self.path}")
            else:
                self._serve_static()
        except BrokenPipeError:
            pass
        except Exception:
            err_id = uuid.uuid4().hex[:12]
            sys.stderr.write(f"[{err_id}] unhandled error\n{traceback.format_exc()}")
            self._send_error_obj(500, "internal", f"internal error (id {err_id})")

    def _serve_static(self):
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        base = self.webui.resolve()
        target = (base / rel).resolve()
        if not str(target).startswith(str(base) + os.sep) and target != base:
            self._send_error_obj(404, "not-found", "no such file")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_error_obj(404, "not-found", f"no such file: /{rel}")
            return
        payload = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


def create_server(
    ckpt: Checkpoint,
    vocab: Vocabulary,
    addr: str | None = None,
    webui: Path | None = None,
    quiet: bool = True,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server for a loaded model."""
    ckpt.check_vocab(vocab)
    host, port = resolve_addr(addr)
    handler = type(
        "BoundRecommendHandler",
        (RecommendHandler,),
        {
            "ckpt": ckpt,
            "vocab": vocab,
            "webui": webui or Path(__file__).parent / "webui",
            "quiet": quiet,
        },
    )
    return ThreadingHTTPServer((host, port), handler)
