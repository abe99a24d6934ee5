"""Translator backends that score path tokens and embed descriptions.

A translator answers two queries: ``score_tokens`` (one finite score per
allowed next token, given a source text and the token prefix decoded so
far) and ``embed`` (a fixed-dimension vector per text). The decoder is
backend-agnostic; anything implementing this interface can be driven
through the trie, including external models over the line-delimited JSON
wire protocol.

Wire protocol (one JSON object per line, requests answered in order):

    {"op": "hello"}                                   -> {"capabilities": [...], "embed_dim": int, ...}
    {"op": "score_tokens", "task": t, "source": s,
     "prefix": [...], "allowed": [...]}               -> {"scores": [float, ...]}
    {"op": "embed", "task": t, "text": s}             -> {"vector": [float, ...]}

Errors come back as {"error": code, "message": text}.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import zlib
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from .errors import TranslatorError
from .ontology import OntologyGraph, description_set
from .smartids import PathTrie, SmartIdTable, TrieNode
from .text import edit_similarity, normalize_term

# Stop marker offered as an extra allowed token at nodes that carry a class.
END_TOKEN = "</s>"


class Translator(ABC):
    """Scoring/embedding backend contract used by the decoder."""

    @abstractmethod
    def capabilities(self) -> frozenset[str]:
        ...

    @abstractmethod
    def score_tokens(
        self,
        task: str,
        source_text: str,
        prefix: Sequence[str],
        allowed: Sequence[str],
    ) -> list[float]:
        """One finite score per allowed token, same order as ``allowed``."""

    @abstractmethod
    def embed(self, task: str, text: str) -> np.ndarray:
        """Fixed-dimension vector; identical text gives an identical vector."""

    def close(self) -> None:
        pass

    def __enter__(self) -> "Translator":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class EditSimilarityTranslator(Translator):
    """Deterministic surrogate backend based on normalized edit similarity.

    A token is scored by the best edit similarity between the source text
    and any description of any class in the subtree that the token leads
    into (the stop marker scores the class at the current node). Scoring
    whole subtrees makes greedy decoding land on the same class as a
    brute-force scan over all target classes.

    Embeddings are hashed character-trigram count vectors, L2-normalized.
    """

    def __init__(
        self,
        graph: OntologyGraph,
        table: SmartIdTable,
        trie: PathTrie,
        singularize: bool = False,
        embed_dim: int = 512,
    ):
        self._trie = trie
        self._embed_dim = embed_dim
        self._descriptions: dict[str, tuple[str, ...]] = {
            cid: tuple(sorted(description_set(graph, cid, singularize).terms))
            for cid in table.smart_of
        }
        self._subtree: dict[int, tuple[str, ...]] = {}
        self._collect(trie.root)
        self._memo_source: str | None = None
        self._memo: dict[str, float] = {}
        self._embed_cache: dict[str, np.ndarray] = {}

    def _collect(self, node: TrieNode) -> set[str]:
        terms: set[str] = set()
        if node.class_id is not None:
            terms.update(self._descriptions[node.class_id])
        for child in node.children.values():
            terms.update(self._collect(child))
        self._subtree[node.idx] = tuple(sorted(terms))
        return terms

    def capabilities(self) -> frozenset[str]:
        return frozenset({"score_tokens", "embed"})

    def _best_similarity(self, source: str, terms: tuple[str, ...]) -> float:
        if self._memo_source != source:
            self._memo_source = source
            self._memo = {}
        memo = self._memo
        source_len = len(source)
        best = 0.0
        for term in terms:
            sim = memo.get(term)
            if sim is None:
                # Edit distance is at least the length gap, so terms whose
                # length bound cannot beat the incumbent are skipped.
                longest = max(source_len, len(term)) or 1
                if 1.0 - abs(source_len - len(term)) / longest <= best:
                    continue
                sim = edit_similarity(source, term)
                memo[term] = sim
            if sim > best:
                best = sim
                if best == 1.0:
                    break
        return best

    def score_tokens(
        self,
        task: str,
        source_text: str,
        prefix: Sequence[str],
        allowed: Sequence[str],
    ) -> list[float]:
        node = self._trie.node_at(prefix)
        if node is None:
            raise TranslatorError(f"prefix {list(prefix)!r} is not a valid trie prefix")
        source = normalize_term(source_text)
        scores = []
        for token in allowed:
            if token == END_TOKEN:
                if node.class_id is None:
                    raise TranslatorError("stop token offered at a non-terminal node")
                terms = self._descriptions[node.class_id]
            else:
                child = node.children.get(token)
                if child is None:
                    raise TranslatorError(f"token {token!r} does not extend prefix {list(prefix)!r}")
                terms = self._subtree[child.idx]
            scores.append(self._best_similarity(source, terms))
        return scores

    def embed(self, task: str, text: str) -> np.ndarray:
        normalized = normalize_term(text)
        cached = self._embed_cache.get(normalized)
        if cached is not None:
            return cached
        vector = np.zeros(self._embed_dim, dtype=np.float64)
        if len(normalized) < 3:
            features = [normalized] if normalized else []
        else:
            features = [normalized[i : i + 3] for i in range(len(normalized) - 2)]
        for feature in features:
            vector[zlib.crc32(feature.encode("utf-8")) % self._embed_dim] += 1.0
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector /= norm
        self._embed_cache[normalized] = vector
        return vector


class _LineChannel:
    """One request/response line pair over a subprocess or TCP socket."""

    def __init__(self, write_line, read_line, close):
        self._write_line = write_line
        self._read_line = read_line
        self._close = close

    def request(self, message: dict) -> dict:
        try:
            self._write_line(json.dumps(message, ensure_ascii=False) + "\n")
            line = self._read_line()
        except (OSError, ValueError, BrokenPipeError) as exc:
            raise TranslatorError(f"wire channel failed: {exc}") from None
        if not line:
            raise TranslatorError("wire channel closed by peer")
        try:
            response = json.loads(line)
        except json.JSONDecodeError:
            raise TranslatorError(f"invalid wire response: {line[:200]!r}") from None
        if not isinstance(response, dict):
            raise TranslatorError("wire response is not an object")
        if "error" in response:
            raise TranslatorError(
                f"{response.get('error')}: {response.get('message', '')}"
            )
        return response

    def close(self) -> None:
        self._close()


def _spawn_channel(command: str) -> _LineChannel:
    try:
        proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except OSError as exc:
        raise TranslatorError(f"cannot spawn translator {command!r}: {exc}") from None

    def write_line(line: str) -> None:
        assert proc.stdin is not None
        proc.stdin.write(line)
        proc.stdin.flush()

    def read_line() -> str:
        assert proc.stdout is not None
        return proc.stdout.readline()

    def close() -> None:
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                proc.kill()

    return _LineChannel(write_line, read_line, close)


def _tcp_channel(host: str, port: int) -> _LineChannel:
    try:
        sock = socket.create_connection((host, port), timeout=30)
    except OSError as exc:
        raise TranslatorError(f"cannot connect to {host}:{port}: {exc}") from None
    reader = sock.makefile("r", encoding="utf-8")
    writer = sock.makefile("w", encoding="utf-8")

    def write_line(line: str) -> None:
        writer.write(line)
        writer.flush()

    def close() -> None:
        for stream in (reader, writer):
            try:
                stream.close()
            except OSError:
                pass
        sock.close()

    return _LineChannel(write_line, reader.readline, close)


class WireTranslator(Translator):
    """Client for an external translator speaking the wire protocol.

    Address forms accepted by :meth:`from_spec`:

    * ``host:port``  - TCP connection
    * anything else  - command line to spawn, spoken to over stdio
    """

    def __init__(self, channel: _LineChannel):
        self._channel = channel
        hello = self._channel.request({"op": "hello"})
        caps = hello.get("capabilities")
        if not isinstance(caps, list):
            raise TranslatorError("hello response missing capabilities")
        self._capabilities = frozenset(str(c) for c in caps)
        self.embed_dim = int(hello.get("embed_dim", 0))
        self.concurrent = bool(hello.get("concurrent", False))

    @classmethod
    def from_spec(cls, address: str) -> "WireTranslator":
        host, sep, port = address.rpartition(":")
        if sep and host and port.isdigit() and "/" not in host and " " not in host:
            return cls(_tcp_channel(host, int(port)))
        return cls(_spawn_channel(address))

    def capabilities(self) -> frozenset[str]:
        return self._capabilities

    def score_tokens(
        self,
        task: str,
        source_text: str,
        prefix: Sequence[str],
        allowed: Sequence[str],
    ) -> list[float]:
        response = self._channel.request(
            {
                "op": "score_tokens",
                "task": task,
                "source": source_text,
                "prefix": list(prefix),
                "allowed": list(allowed),
            }
        )
        scores = response.get("scores")
        if not isinstance(scores, list) or len(scores) != len(allowed):
            raise TranslatorError("score_tokens response must score every allowed token")
        values = [float(s) for s in scores]
        if not all(np.isfinite(values)):
            raise TranslatorError("score_tokens returned a non-finite score")
        return values

    def embed(self, task: str, text: str) -> np.ndarray:
        response = self._channel.request({"op": "embed", "task": task, "text": text})
        vector = response.get("vector")
        if not isinstance(vector, list) or not vector:
            raise TranslatorError("embed response missing vector")
        array = np.asarray(vector, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise TranslatorError("embed returned a non-finite value")
        return array

    def close(self) -> None:
        self._channel.close()
