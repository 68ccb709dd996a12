"""HTTP service for scoring (premise, hypothesis) pairs.

Wire protocol:

* ``POST /nli`` with body ``{"pairs": [{"premise": "...",
  "hypothesis": "..."}, ...]}`` returns ``{"probs": [[e, c, n], ...]}``
  with ``probs[i]`` aligned to ``pairs[i]``. Errors: 400 malformed input,
  413 too many pairs, 503 model not loaded yet.
* ``GET /health`` returns ``{"model": "...", "ready": true|false}``.

Stdlib only: a ThreadingHTTPServer accepts requests concurrently while a
lock serializes inference, which is the right shape for one model per
process. The service is stateless beyond the loaded model, so more
throughput is more processes.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Sequence

Pair = tuple[str, str]

logger = logging.getLogger("nli_sidecar")

# hard cap on request body size so a runaway client cannot exhaust memory
MAX_BODY_BYTES = 64 * 1024 * 1024


class NliService:
    """Owns the model, its loading state, and the inference lock."""

    def __init__(self, model, *, max_request_pairs: int = 1024) -> None:
        if max_request_pairs < 1:
            raise ValueError("max_request_pairs must be >= 1")
        self.model = model
        self.max_request_pairs = max_request_pairs
        self._ready = threading.Event()
        self._lock = threading.Lock()
        self.load_error: str | None = None

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    def load(self) -> None:
        try:
            self.model.load()
        except Exception as exc:  # surface via /health, keep serving 503
            self.load_error = f"{type(exc).__name__}: {exc}"
            logger.error("model %s failed to load: %s", self.model.name,
                         self.load_error)
            return
        self._ready.set()
        logger.info("model %s ready", self.model.name)

    def start_loading(self) -> threading.Thread:
        thread = threading.Thread(target=self.load, name="model-load",
                                  daemon=True)
        thread.start()
        return thread

    def health(self) -> dict:
        payload = {"model": self.model.name, "ready": self.ready}
        if self.load_error is not None:
            payload["error"] = self.load_error
        return payload

    def score(self, pairs: Sequence[Pair]) -> list:
        with self._lock:
            return self.model.predict(pairs)


def parse_pairs(payload) -> list[Pair]:
    """Validate a decoded /nli body; raises ValueError on any shape problem."""
    if not isinstance(payload, dict):
        raise ValueError("body must be a JSON object")
    if "pairs" not in payload:
        raise ValueError("body must have a 'pairs' field")
    pairs = payload["pairs"]
    if not isinstance(pairs, list):
        raise ValueError("'pairs' must be a list")
    out: list[Pair] = []
    for i, entry in enumerate(pairs):
        if not isinstance(entry, dict):
            raise ValueError(f"pairs[{i}] must be an object")
        premise = entry.get("premise")
        hypothesis = entry.get("hypothesis")
        if not isinstance(premise, str) or not isinstance(hypothesis, str):
            raise ValueError(
                f"pairs[{i}] needs string 'premise' and 'hypothesis' fields"
            )
        if not premise.strip() or not hypothesis.strip():
            raise ValueError(f"pairs[{i}] has an empty premise or hypothesis")
        out.append((premise, hypothesis))
    return out


class NliRequestHandler(BaseHTTPRequestHandler):
    # bound to a concrete service by make_server
    service: NliService

    protocol_version = "HTTP/1.1"
    timeout = 30  # a stalled client releases its handler thread eventually

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _reply(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        if self.path == "/health":
            self._reply(200, self.service.health())
        else:
            self._reply(404, {"error": f"no such path: {self.path}"})

    def do_POST(self) -> None:
        # drain the body before any reply: an unread body desyncs keep-alive
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = -1
        if length > MAX_BODY_BYTES:
            self._reply(413, {"error": "request body too large"})
            self.close_connection = True
            return
        body = self.rfile.read(length) if length > 0 else b""
        if self.path != "/nli":
            self._reply(404, {"error": f"no such path: {self.path}"})
            return
        if length < 0:
            self._reply(400, {"error": "invalid Content-Length header"})
            return
        if not self.service.ready:
            self._reply(503, {"error": "model not ready"})
            return
        try:
            pairs = parse_pairs(json.loads(body.decode("utf-8")))
        except (ValueError, UnicodeDecodeError) as exc:
            self._reply(400, {"error": str(exc)})
            return
        if len(pairs) > self.service.max_request_pairs:
            self._reply(413, {
                "error": f"batch of {len(pairs)} pairs exceeds the limit of "
                         f"{self.service.max_request_pairs}"
            })
            return
        probs = self.service.score(pairs)
        self._reply(200, {"probs": [list(triple) for triple in probs]})


def make_server(service: NliService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    """Bind a threading HTTP server for the service (port 0 picks a free one)."""
    handler = type("BoundNliHandler", (NliRequestHandler,),
                   {"service": service})
    return ThreadingHTTPServer((host, port), handler)
