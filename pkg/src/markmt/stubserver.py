"""Stub MT server speaking the v1 wire protocol, for tests and demos.

Supports fault injection (a script of HTTP status codes served before
requests start succeeding) and records every wire call.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional


@dataclass
class StubState:
    translate: Callable[[str], str]
    fault_script: list[int] = field(default_factory=list)
    require_key: Optional[str] = None
    calls: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Handler(BaseHTTPRequestHandler):
    state: StubState  # set by make_server

    def log_message(self, *args):  # silence request logging
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        self._send_json(200, {"status": "ok"})

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
        except ValueError:
            self._send_json(400, {"error": "bad json"})
            return
        state = self.state
        with state.lock:
            state.calls.append(body)
            if state.fault_script:
                status = state.fault_script.pop(0)
                self._send_json(status, {"error": f"injected {status}"})
                return
        if state.require_key is not None:
            auth = self.headers.get("Authorization", "")
            if auth != f"Bearer {state.require_key}":
                self._send_json(401, {"error": "bad key"})
                return
        segments = body.get("segments", [])
        translations = [state.translate(s) for s in segments]
        payload = {"translations": translations}
        if body.get("want_alignment"):
            payload["alignments"] = [
                [[i, i] for i in range(len(s.split()))] for s in segments
            ]
        self._send_json(200, payload)


class StubServer:
    """Threaded stub server; use as a context manager."""

    def __init__(
        self,
        translate: Callable[[str], str] = lambda s: s,
        fault_script: Optional[list[int]] = None,
        require_key: Optional[str] = None,
        port: int = 0,
    ):
        self.state = StubState(
            translate=translate,
            fault_script=list(fault_script or []),
            require_key=require_key,
        )
        handler = type("BoundHandler", (_Handler,), {"state": self.state})
        self._server = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/translate"

    @property
    def calls(self) -> list[dict]:
        return self.state.calls

    def start(self) -> "StubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
