"""Zero-shot matching: constrained decoding plus validation scoring.

Prediction walks the target trie from its root. At every node the
translator scores only the tokens the trie allows (children of the node,
plus the stop marker when the node carries a class), so the decoder can
only ever emit valid target paths. The path score is the product of the
per-step softmax probabilities, computed over the allowed tokens with
temperature scaling.

Validation scores a (source, predicted) pair: 1.0 when the normalized
description sets intersect, otherwise the maximum cosine similarity between
description embeddings, clamped to [0, 1].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTargetSpace, TranslatorError, UnknownClass
from .ontology import DescriptionSet, OntologyGraph, description_set
from .smartids import PathTrie, SmartIdTable, TrieNode
from .translators import END_TOKEN, Translator

logger = logging.getLogger(__name__)

TM1 = "tm1"
TM2 = "tm2"


@dataclass(frozen=True)
class TaskId:
    """One alignment task: a named source/target ontology pairing."""

    name: str
    source_ontology_id: str
    target_ontology_id: str


class TaskRegistry:
    """Known alignment tasks, keyed by name."""

    def __init__(self):
        self._tasks: dict[str, TaskId] = {}

    def register(self, task: TaskId) -> TaskId:
        self._tasks[task.name] = task
        return task

    def get(self, name: str) -> TaskId:
        try:
            return self._tasks[name]
        except KeyError:
            raise UnknownClass(f"task {name!r} is not registered") from None


@dataclass(frozen=True)
class DecodeConfig:
    mode: str = "greedy"
    beam_width: int = 1
    temperature: float = 1.0
    max_depth: int = 128

    def __post_init__(self):
        if self.mode not in ("greedy", "beam"):
            raise ValueError(f"unknown decode mode {self.mode!r}")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class ScoredMapping:
    """One output mapping: source class, predicted target class, confidence."""

    source_id: str
    target_id: str
    score: float
    method: str  # exact | similarity | greedy


def _softmax(scores: list[float], temperature: float) -> list[float]:
    scaled = [s / temperature for s in scores]
    peak = max(scaled)
    exps = [math.exp(s - peak) for s in scaled]
    total = sum(exps)
    return [e / total for e in exps]


def _options_at(node: TrieNode) -> list[str]:
    options = node.sorted_tokens()
    if node.class_id is not None:
        options.append(END_TOKEN)
    return options


def decode(
    translator: Translator,
    trie: PathTrie,
    task: TaskId,
    source_text: str,
    config: DecodeConfig,
) -> list[tuple[str, float]]:
    """Candidate target classes for one source text, best first.

    Greedy mode follows the per-step argmax and returns a single candidate;
    beam mode keeps ``beam_width`` prefixes and returns the finished
    candidates deduplicated by class. Every returned class was reached
    through a full trie-accepted path. A forced stop (the stop marker being
    the only option) consumes no translator call and has probability 1.
    """
    if not source_text:
        raise ValueError("source_text must be non-empty")
    if not trie.root.children:
        raise EmptyTargetSpace(f"{trie.ontology_id}: no target paths to decode into")
    if config.mode == "greedy":
        return _decode_greedy(translator, trie, task, source_text, config)
    return _decode_beam(translator, trie, task, source_text, config)


def _decode_greedy(
    translator: Translator,
    trie: PathTrie,
    task: TaskId,
    source_text: str,
    config: DecodeConfig,
) -> list[tuple[str, float]]:
    node = trie.root
    prefix: list[str] = []
    log_prob = 0.0
    while True:
        options = _options_at(node)
        if options == [END_TOKEN]:
            break
        if len(prefix) >= config.max_depth:
            if node.class_id is None:
                return []
            break
        scores = translator.score_tokens(task.name, source_text, tuple(prefix), tuple(options))
        probs = _softmax(scores, config.temperature)
        best = min(range(len(options)), key=lambda i: (-probs[i], options[i]))
        log_prob += math.log(max(probs[best], 1e-300))
        token = options[best]
        if token == END_TOKEN:
            break
        prefix.append(token)
        node = node.children[token]
    assert node.class_id is not None
    return [(node.class_id, math.exp(log_prob))]


def _decode_beam(
    translator: Translator,
    trie: PathTrie,
    task: TaskId,
    source_text: str,
    config: DecodeConfig,
) -> list[tuple[str, float]]:
    frontier: list[tuple[float, tuple[str, ...], TrieNode]] = [(0.0, (), trie.root)]
    finished: list[tuple[float, str]] = []
    depth = 0
    while frontier and depth < config.max_depth:
        extensions: list[tuple[float, tuple[str, ...], TrieNode]] = []
        for log_prob, prefix, node in frontier:
            options = _options_at(node)
            if options == [END_TOKEN]:
                finished.append((log_prob, node.class_id))
                continue
            scores = translator.score_tokens(task.name, source_text, prefix, tuple(options))
            probs = _softmax(scores, config.temperature)
            for token, prob in zip(options, probs):
                step = log_prob + math.log(max(prob, 1e-300))
                if token == END_TOKEN:
                    finished.append((step, node.class_id))
                else:
                    extensions.append((step, prefix + (token,), node.children[token]))
        extensions.sort(key=lambda item: (-item[0], item[1]))
        frontier = extensions[: config.beam_width]
        depth += 1
    for log_prob, prefix, node in frontier:
        if node.class_id is not None:
            finished.append((log_prob, node.class_id))
    finished.sort(key=lambda item: (-item[0], item[1]))
    results: list[tuple[str, float]] = []
    seen: set[str] = set()
    for log_prob, class_id in finished:
        if class_id not in seen:
            seen.add(class_id)
            results.append((class_id, math.exp(log_prob)))
    return results


def exact_match(o1_descriptions: DescriptionSet, o2_descriptions: DescriptionSet) -> float | None:
    """1.0 when the normalized description sets share a term, else None."""
    if o1_descriptions.terms & o2_descriptions.terms:
        return 1.0
    return None


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


def similarity_score(
    translator: Translator,
    task: TaskId,
    o1_descriptions: DescriptionSet,
    o2_descriptions: DescriptionSet,
    embed_cache: dict[str, np.ndarray] | None = None,
) -> float:
    """Maximum pairwise cosine similarity between the two sets, clamped to [0, 1]."""
    cache = embed_cache if embed_cache is not None else {}

    def vector(text: str) -> np.ndarray:
        vec = cache.get(text)
        if vec is None:
            vec = translator.embed(task.name, text)
            cache[text] = vec
        return vec

    best = 0.0
    for t1 in sorted(o1_descriptions.terms):
        v1 = vector(t1)
        for t2 in sorted(o2_descriptions.terms):
            sim = cosine(v1, vector(t2))
            if sim > best:
                best = sim
    return min(max(best, 0.0), 1.0)


def score_mapping(
    translator: Translator,
    task: TaskId,
    source_class: str,
    predicted_class: str,
    source_graph: OntologyGraph,
    target_graph: OntologyGraph,
    singularize: bool = True,
    embed_cache: dict[str, np.ndarray] | None = None,
) -> ScoredMapping:
    """Validation score for a predicted pair: exact-match override, else cosine."""
    omega1 = description_set(source_graph, source_class, singularize)
    omega2 = description_set(target_graph, predicted_class, singularize)
    exact = exact_match(omega1, omega2)
    if exact is not None:
        return ScoredMapping(source_class, predicted_class, exact, "exact")
    score = similarity_score(translator, task, omega1, omega2, embed_cache)
    return ScoredMapping(source_class, predicted_class, score, "similarity")


@dataclass
class MatchOutcome:
    """Mappings that cleared the threshold, plus per-source failures."""

    mappings: list[ScoredMapping] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)


def match_ontologies(
    source_graph: OntologyGraph,
    target_graph: OntologyGraph,
    table: SmartIdTable,
    trie: PathTrie,
    translator: Translator,
    task: TaskId,
    config: DecodeConfig,
    threshold: float = 0.8,
    scoring: str = TM1,
    singularize: bool = True,
) -> MatchOutcome:
    """Match every source class against the target ontology.

    Each source class is decoded once from its label; the top candidate is
    scored either by validation (``tm1``: exact-match override, else
    embedding similarity) or by the decode path score (``tm2``) and
    kept when the score exceeds the threshold. Output is sorted by
    (source id, target id). Translator failures on individual sources are
    recorded and skipped, never fatal.
    """
    if scoring not in (TM1, TM2):
        raise ValueError(f"unknown scoring mode {scoring!r}")
    outcome = MatchOutcome()
    embed_cache: dict[str, np.ndarray] = {}
    for source_id in sorted(source_graph.classes):
        label = source_graph.classes[source_id].label
        try:
            candidates = decode(translator, trie, task, label, config)
            if not candidates:
                continue
            predicted, path_score = candidates[0]
            if scoring == TM2:
                mapping = ScoredMapping(source_id, predicted, path_score, "greedy")
            else:
                mapping = score_mapping(
                    translator,
                    task,
                    source_id,
                    predicted,
                    source_graph,
                    target_graph,
                    singularize,
                    embed_cache,
                )
        except TranslatorError as exc:
            logger.warning("translator failed for %s: %s", source_id, exc)
            outcome.failures.append((source_id, str(exc)))
            continue
        if mapping.score > threshold:
            outcome.mappings.append(mapping)
    outcome.mappings.sort(key=lambda m: (m.source_id, m.target_id))
    return outcome
