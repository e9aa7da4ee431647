"""Serve loop: read request lines, answer with response lines.

Transports: stdin/stdout (default) or a single-connection TCP port.
An optional shuffle window buffers responses and emits them in reverse
order, deliberately exercising the engine's request-id correlation.

The loop reads raw fds (select over a buffered stream would stall on
lines already sitting in the stream's internal buffer).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import select
import socket
import sys
from typing import Callable, Optional

from .protocol import RequestError, encode, error_response, ok_response, parse_request, request_id_of

log = logging.getLogger(__name__)

IDLE_FLUSH_SECONDS = 0.05

Handler = Callable[[dict], dict]


def echo_handler(request: dict) -> dict:
    """Protocol-conformance fitness: hash of the graph, no training."""
    blob = json.dumps(request["graph"], separators=(",", ":")).encode()
    fitness = (int(hashlib.sha256(blob).hexdigest(), 16) % 1000) / 1000.0
    return ok_response(request["request_id"], fitness)


def training_handler(datasets_dir: Optional[str], device: str) -> Handler:
    from .trainer import train_and_score  # deferred: torch import is slow

    def handle(request: dict) -> dict:
        try:
            fitness = train_and_score(request, datasets_dir=datasets_dir, device=device)
        except Exception as exc:  # training must not kill the server
            log.exception("training failed for %s", request["request_id"])
            return error_response(request["request_id"], f"training failed: {exc}")
        return ok_response(request["request_id"], fitness)

    return handle


def handle_line(line: str, handler: Handler) -> dict:
    try:
        request = parse_request(line)
    except RequestError as exc:
        return error_response(request_id_of(line), str(exc))
    return handler(request)


def pump(read_fd: int, write, handler: Handler, shuffle_window: int = 0) -> None:
    """Read newline-delimited requests from `read_fd` until EOF."""
    window = max(shuffle_window, 1)
    buffered: list[dict] = []
    pending = b""

    def flush():
        for response in reversed(buffered) if shuffle_window else buffered:
            write(encode(response))
        buffered.clear()

    while True:
        ready, _, _ = select.select([read_fd], [], [], IDLE_FLUSH_SECONDS)
        if not ready:
            flush()
            continue
        chunk = os.read(read_fd, 65536)
        if chunk == b"":
            flush()
            return
        pending += chunk
        while b"\n" in pending:
            raw, pending = pending.split(b"\n", 1)
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            buffered.append(handle_line(line, handler))
            if len(buffered) >= window:
                flush()


def serve_stdio(handler: Handler, shuffle_window: int = 0) -> None:
    def write(text: str) -> None:
        sys.stdout.write(text)
        sys.stdout.flush()

    pump(sys.stdin.fileno(), write, handler, shuffle_window)


def serve_tcp(handler: Handler, port: int, shuffle_window: int = 0) -> None:
    """Accept one engine connection and speak the same line protocol."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(("127.0.0.1", port))
        server.listen(1)
        conn, peer = server.accept()
        log.info("engine connected from %s", peer)
        with conn:
            def write(text: str) -> None:
                conn.sendall(text.encode("utf-8"))

            pump(conn.fileno(), write, handler, shuffle_window)
