"""Wire-protocol server: line-delimited JSON over stdio or TCP.

Requests:
    {"op": "hello"}
    {"op": "score_tokens", "task": t, "source": s, "prefix": [...], "allowed": [...]}
    {"op": "embed", "task": t, "text": s}

Responses mirror the engine's client expectations; failures are reported
as {"error": code, "message": text} without ever killing the stream.
"""

from __future__ import annotations

import json
import socketserver
import sys

from .model import ByteSeq2Seq

END_TOKEN = "</s>"


class ModelBackend:
    """Scores path tokens with the trained byte model."""

    def __init__(self, model: ByteSeq2Seq):
        self.model = model

    def hello(self) -> dict:
        return {
            "capabilities": ["score_tokens", "embed"],
            "embed_dim": self.model.config.d_model,
            "concurrent": False,
        }

    def score_tokens(self, task: str, source: str, prefix: list[str], allowed: list[str]) -> list[float]:
        model_input = f"{task}: {source}"
        prefix_text = "-".join(prefix)
        continuations = []
        for token in allowed:
            if token == END_TOKEN:
                continuations.append(b"")  # scored as end-of-sequence
            else:
                piece = ("-" + token) if prefix else token
                continuations.append(piece.encode("utf-8"))
        return self.model.score_continuations(model_input, prefix_text, continuations)

    def embed(self, task: str, text: str) -> list[float]:
        return self.model.embed_text(f"{task}: {text}")


class StubBackend:
    """Deterministic weight-free backend for protocol-level testing."""

    EMBED_DIM = 8

    def hello(self) -> dict:
        return {
            "capabilities": ["score_tokens", "embed"],
            "embed_dim": self.EMBED_DIM,
            "concurrent": False,
        }

    def score_tokens(self, task: str, source: str, prefix: list[str], allowed: list[str]) -> list[float]:
        return [
            float(len(token)) + (0.25 if token and token in source else 0.0)
            for token in allowed
        ]

    def embed(self, task: str, text: str) -> list[float]:
        raw = [0.0] * self.EMBED_DIM
        for i, byte in enumerate(text.encode("utf-8")):
            raw[i % self.EMBED_DIM] += float(byte)
        norm = sum(v * v for v in raw) ** 0.5
        return [v / norm if norm else 0.0 for v in raw]


def handle_request(backend, line: str) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        return {"error": "bad_request", "message": "request is not valid JSON"}
    if not isinstance(request, dict):
        return {"error": "bad_request", "message": "request must be an object"}
    op = request.get("op")
    try:
        if op == "hello":
            return backend.hello()
        if op == "score_tokens":
            allowed = request.get("allowed")
            prefix = request.get("prefix", [])
            if not isinstance(allowed, list) or not allowed:
                return {"error": "bad_request", "message": "allowed tokens missing"}
            scores = backend.score_tokens(
                str(request.get("task", "")),
                str(request.get("source", "")),
                [str(p) for p in prefix],
                [str(t) for t in allowed],
            )
            return {"scores": [float(s) for s in scores]}
        if op == "embed":
            vector = backend.embed(
                str(request.get("task", "")), str(request.get("text", ""))
            )
            return {"vector": [float(v) for v in vector]}
        return {"error": "unknown_op", "message": f"unsupported op {op!r}"}
    except Exception as exc:  # never crash the stream
        return {"error": "backend_failure", "message": str(exc)}


def _dumps(response: dict) -> str:
    return json.dumps(response, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def serve_stdio(backend) -> None:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        sys.stdout.write(_dumps(handle_request(backend, line)) + "\n")
        sys.stdout.flush()


def serve_tcp(backend, host: str, port: int) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            for raw in self.rfile:
                line = raw.decode("utf-8").strip()
                if not line:
                    continue
                payload = _dumps(handle_request(backend, line)) + "\n"
                self.wfile.write(payload.encode("utf-8"))
                self.wfile.flush()

    with socketserver.ThreadingTCPServer((host, port), Handler) as server:
        print(f"listening on {server.server_address[0]}:{server.server_address[1]}", file=sys.stderr)
        server.serve_forever()
