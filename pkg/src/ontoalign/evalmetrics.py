"""Alignment evaluation: global set metrics and local ranking metrics.

Global metrics compare an output mapping set against a reference set
(precision, recall, F-beta). Local metrics rank a reference target among a
fixed pool of negative candidates per source (Hits@K, mean reciprocal
rank), plus plain top-1 accuracy. All functions are pure and operate on
in-memory structures; the file helpers parse the tab-separated formats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from .errors import (
    IncompleteScores,
    NoCases,
    ParseError,
    PrecisionUndefined,
    RecallUndefined,
)

MAPPING_HEADER = "SrcEntity\tTgtEntity\tScore"
RANKING_HEADER = "SrcEntity\tTgtEntity\tTgtCandidates"
CANDIDATE_SEPARATOR = ";"


@dataclass
class MappingSet:
    """A set of (source, target) pairs with optional per-pair scores."""

    pairs: set[tuple[str, str]] = field(default_factory=set)
    scores: dict[tuple[str, str], float] = field(default_factory=dict)

    def add(self, source: str, target: str, score: float | None = None) -> None:
        pair = (source, target)
        self.pairs.add(pair)
        if score is not None:
            current = self.scores.get(pair)
            if current is None or score > current:
                self.scores[pair] = score

    def __len__(self) -> int:
        return len(self.pairs)

    def predictions(self) -> dict[str, str]:
        """Best-scored target per source (ties broken by target id)."""
        best: dict[str, tuple[float, str]] = {}
        for source, target in sorted(self.pairs):
            score = self.scores.get((source, target), 0.0)
            incumbent = best.get(source)
            if incumbent is None or (-score, target) < (-incumbent[0], incumbent[1]):
                best[source] = (score, target)
        return {source: target for source, (_, target) in best.items()}


@dataclass(frozen=True)
class RankingCase:
    """A reference pair plus its negative candidate pool."""

    source_id: str
    reference_target_id: str
    negative_targets: tuple[str, ...]
    scores: Mapping[str, float] | None = None

    def with_scores(self, scores: Mapping[str, float]) -> "RankingCase":
        return RankingCase(self.source_id, self.reference_target_id, self.negative_targets, scores)


def precision_recall_f(
    m_out: MappingSet, m_ref: MappingSet, beta: float = 1.0
) -> tuple[float, float, float]:
    """Precision, recall and the weighted harmonic F over the two sets."""
    if not m_out.pairs:
        raise PrecisionUndefined("output mapping set is empty")
    if not m_ref.pairs:
        raise RecallUndefined("reference mapping set is empty")
    hits = len(m_out.pairs & m_ref.pairs)
    precision = hits / len(m_out.pairs)
    recall = hits / len(m_ref.pairs)
    denom = beta * beta * precision + recall
    f_score = 0.0 if denom == 0 else (1 + beta * beta) * precision * recall / denom
    return precision, recall, f_score


def rank_of(case: RankingCase) -> int:
    """Position of the reference among all candidates, best score first.

    Ties are resolved deterministically: equal-scored candidates whose id
    sorts lexicographically before the reference id rank ahead of it.
    """
    if case.scores is None:
        raise IncompleteScores(f"{case.source_id}: case has no scores")
    candidates = (case.reference_target_id, *case.negative_targets)
    missing = [c for c in candidates if c not in case.scores]
    if missing:
        raise IncompleteScores(f"{case.source_id}: unscored candidates {missing[:3]}")
    reference_score = case.scores[case.reference_target_id]
    rank = 1
    for target in case.negative_targets:
        score = case.scores[target]
        if score > reference_score:
            rank += 1
        elif score == reference_score and target < case.reference_target_id:
            rank += 1
    return rank


def hits_at_k(cases: list[RankingCase], k: int) -> float:
    if not cases:
        raise NoCases("no ranking cases")
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(1 for case in cases if rank_of(case) <= k) / len(cases)


def mrr(cases: list[RankingCase]) -> float:
    if not cases:
        raise NoCases("no ranking cases")
    return sum(1.0 / rank_of(case) for case in cases) / len(cases)


def accuracy(predictions: Mapping[str, str], m_ref: MappingSet) -> float:
    """Fraction of reference pairs whose source is predicted exactly.

    Sources without a prediction count as wrong; the denominator is always
    the reference size.
    """
    if not m_ref.pairs:
        raise RecallUndefined("reference mapping set is empty")
    correct = sum(1 for source, target in m_ref.pairs if predictions.get(source) == target)
    return correct / len(m_ref.pairs)


def _data_lines(source: IO[str] | Iterable[str]) -> Iterator[tuple[int, str]]:
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line or line.startswith("#"):
            continue
        yield line_no, line


def read_mapping_file(source: IO[str] | Iterable[str]) -> MappingSet:
    """Parse the SrcEntity/TgtEntity/Score format (single header line)."""
    mapping = MappingSet()
    saw_header = False
    for line_no, line in _data_lines(source):
        if not saw_header:
            if line != MAPPING_HEADER:
                raise ParseError(f"expected header {MAPPING_HEADER!r}", line_no)
            saw_header = True
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line_no)
        source_id, target_id, score_text = parts
        if not source_id or not target_id:
            raise ParseError("empty entity id", line_no)
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"invalid score {score_text!r}", line_no) from None
        mapping.add(source_id, target_id, score)
    if not saw_header:
        raise ParseError(f"missing header {MAPPING_HEADER!r}", 1)
    return mapping


def write_mapping_file(
    handle: IO[str], mappings: Iterable[tuple[str, str, float]], provenance: str | None = None
) -> None:
    if provenance:
        handle.write(f"# {provenance}\n")
    handle.write(MAPPING_HEADER + "\n")
    for source_id, target_id, score in mappings:
        handle.write(f"{source_id}\t{target_id}\t{score:.6f}\n")


def read_ranking_file(source: IO[str] | Iterable[str]) -> list[RankingCase]:
    """Parse the SrcEntity/TgtEntity/TgtCandidates format.

    Candidates are separated by ``;`` and must not repeat the reference.
    """
    cases: list[RankingCase] = []
    saw_header = False
    for line_no, line in _data_lines(source):
        if not saw_header:
            if line != RANKING_HEADER:
                raise ParseError(f"expected header {RANKING_HEADER!r}", line_no)
            saw_header = True
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line_no)
        source_id, reference, raw_candidates = parts
        negatives = tuple(c for c in raw_candidates.split(CANDIDATE_SEPARATOR) if c)
        if reference in negatives:
            raise ParseError(f"reference {reference!r} appears among candidates", line_no)
        cases.append(RankingCase(source_id, reference, negatives))
    if not saw_header:
        raise ParseError(f"missing header {RANKING_HEADER!r}", 1)
    return cases


def pr_curve(
    m_out: MappingSet, m_ref: MappingSet, beta: float = 1.0
) -> list[tuple[float, float, float, float]]:
    """(threshold, precision, recall, f) sweeping the observed score levels.

    At each threshold t the surviving set is {pairs with score > t}; the
    sweep starts below the minimum score so the full set is included.
    """
    if not m_out.pairs or not m_ref.pairs:
        return []
    scored = [(m_out.scores.get(pair, 0.0), pair) for pair in sorted(m_out.pairs)]
    levels = sorted({score for score, _ in scored})
    thresholds = [min(levels) - 1.0] + levels
    points = []
    for threshold in thresholds:
        surviving = {pair for score, pair in scored if score > threshold}
        if not surviving:
            continue
        hits = len(surviving & m_ref.pairs)
        precision = hits / len(surviving)
        recall = hits / len(m_ref.pairs)
        denom = beta * beta * precision + recall
        f_score = 0.0 if denom == 0 else (1 + beta * beta) * precision * recall / denom
        points.append((threshold, precision, recall, f_score))
    return points


def render_report(
    sections: list[tuple[str, object]],
    provenance: str | None = None,
) -> str:
    """Fixed-layout key=value report; floats use 6 decimals for stability."""
    lines = []
    if provenance:
        lines.append(f"# {provenance}")
    for key, value in sections:
        if isinstance(value, float):
            lines.append(f"{key}={value:.6f}")
        else:
            lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def write_manifest(handle: IO[str], payload: dict) -> None:
    json.dump(payload, handle, indent=2, sort_keys=True, ensure_ascii=False)
    handle.write("\n")
