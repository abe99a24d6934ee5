"""Training-corpus generation: masked structure records and translation pairs.

Structure pre-training serializes graph relations into flat unit lists
("child: Enzyme | parent: Substance" style) and masks whole units with
sentinel markers. The masking fraction ramps linearly from the schedule's
start ratio on the first instance to its end ratio on the last.

Fine-tuning emits one (description -> path id) pair per label and synonym
of every target class, optionally augmented with descriptions borrowed
from other subset ontologies (matched by normalized exact term equality)
and from prior versions of the same ontology (matched by class id).
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import EmptyInstance, StepOutOfRange
from .ontology import OntologyGraph
from .smartids import SmartIdTable
from .text import normalize_term

SENTINEL = "<m{}>"

# Relation templates in emission order: (name, unit-list builder inputs).
PRETRAIN_TEMPLATES = (
    "child_parent",
    "definition_smartid",
    "label_smartid",
    "label_synonym",
    "smartid_synonymid",
    "synonym_smartid",
)


@dataclass(frozen=True)
class CorpusInstance:
    task_tag: str
    input_text: str
    target_text: str


@dataclass(frozen=True)
class MaskingSchedule:
    start_ratio: float = 0.10
    end_ratio: float = 0.35
    total_steps: int = 1

    def __post_init__(self):
        if not (0 < self.start_ratio <= self.end_ratio < 1):
            raise ValueError("need 0 < start_ratio <= end_ratio < 1")
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")


@dataclass
class AugmentationConfig:
    """Extra description sources for fine-tuning."""

    cross_subset_sources: list[OntologyGraph] = field(default_factory=list)
    prior_versions: list[OntologyGraph] = field(default_factory=list)


def masking_ratio(step: int, schedule: MaskingSchedule) -> float:
    """Linear ramp from start to end ratio across the schedule's steps."""
    if not 0 <= step < schedule.total_steps:
        raise StepOutOfRange(f"step {step} outside [0, {schedule.total_steps})")
    if schedule.total_steps == 1:
        return schedule.start_ratio
    span = schedule.end_ratio - schedule.start_ratio
    return schedule.start_ratio + span * step / (schedule.total_steps - 1)


def mask_instance(units: list[str], ratio: float, seed: int) -> tuple[str, str]:
    """Replace ``max(1, round(ratio * n))`` units with sentinel markers.

    Returns (masked input, reconstruction target). Sentinels are numbered in
    order of appearance; the target lists each sentinel followed by the unit
    it hides. Deterministic for a given seed.
    """
    if not units:
        raise EmptyInstance("cannot mask an empty unit list")
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    count = max(1, round(ratio * len(units)))
    count = min(count, len(units))
    rng = random.Random(seed)
    positions = sorted(rng.sample(range(len(units)), count))
    masked = list(units)
    target_parts = []
    for sentinel_no, pos in enumerate(positions):
        marker = SENTINEL.format(sentinel_no)
        target_parts.append(f"{marker} {units[pos]}")
        masked[pos] = marker
    return " ".join(masked), " ".join(target_parts)


def _instance_seed(seed: int, *parts: object) -> int:
    digest = hashlib.sha256(
        ("\x1f".join(str(p) for p in (seed, *parts))).encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def _pretrain_units(
    graph: OntologyGraph, table: SmartIdTable, class_id: str
) -> Iterator[tuple[str, int, list[str]]]:
    """(template, description index, units) for one class, deterministic order."""
    record = graph.classes[class_id]
    smart = table.smart_of.get(class_id)
    for template in PRETRAIN_TEMPLATES:
        if template == "child_parent":
            for i, parent in enumerate(sorted(record.parents)):
                parent_label = graph.classes[parent].label
                yield template, i, ["child:", record.label, "|", "parent:", parent_label]
        elif template == "definition_smartid" and smart is not None:
            for i, definition in enumerate(record.definitions):
                yield template, i, ["definition:", definition, "|", "smart_id:", smart]
        elif template == "label_smartid" and smart is not None:
            yield template, 0, ["label:", record.label, "|", "smart_id:", smart]
        elif template == "label_synonym":
            for i, synonym in enumerate(record.synonyms):
                yield template, i, ["label:", record.label, "|", "synonym:", synonym]
        elif template == "smartid_synonymid" and smart is not None:
            for i, synonym_id in enumerate(table.synonyms_of.get(class_id, ())):
                yield template, i, ["smart_id:", smart, "|", "synonym_id:", synonym_id]
        elif template == "synonym_smartid" and smart is not None:
            for i, synonym in enumerate(record.synonyms):
                yield template, i, ["synonym:", synonym, "|", "smart_id:", smart]


def build_pretrain_corpus(
    graphs: list[OntologyGraph],
    tables: list[SmartIdTable],
    schedule: MaskingSchedule,
    seed: int,
) -> Iterator[CorpusInstance]:
    """Masked structure-learning instances over one or more ontologies.

    Instances are enumerated in sorted (ontology, class, template, index)
    order; instance ``i`` of ``n`` is masked at the linear schedule ratio
    for step ``i`` over ``n`` steps, so the realized masking fraction ramps
    from the start ratio to the end ratio across the emitted corpus.
    Byte-deterministic for a fixed seed.
    """
    if len(graphs) != len(tables):
        raise ValueError("need exactly one table per graph")
    specs: list[tuple[str, str, str, int, list[str]]] = []
    for graph, table in sorted(zip(graphs, tables), key=lambda gt: gt[0].ontology_id):
        for class_id in sorted(graph.classes):
            for template, index, units in _pretrain_units(graph, table, class_id):
                specs.append((graph.ontology_id, class_id, template, index, units))

    total = len(specs)
    ramp = MaskingSchedule(schedule.start_ratio, schedule.end_ratio, max(total, 1))
    for step, (ontology_id, class_id, template, index, units) in enumerate(specs):
        ratio = masking_ratio(step, ramp)
        instance_seed = _instance_seed(seed, ontology_id, class_id, template, index)
        masked, target = mask_instance(units, ratio, instance_seed)
        yield CorpusInstance(
            task_tag=f"pretrain:{template}:{ontology_id}",
            input_text=masked,
            target_text=target,
        )


def _raw_descriptions(graph: OntologyGraph, class_id: str) -> list[str]:
    record = graph.classes[class_id]
    return [record.label, *record.synonyms]


def _term_index(graph: OntologyGraph) -> dict[str, list[str]]:
    """Normalized term -> sorted class ids carrying it."""
    index: dict[str, set[str]] = {}
    for class_id in graph.classes:
        for term in _raw_descriptions(graph, class_id):
            index.setdefault(normalize_term(term), set()).add(class_id)
    return {term: sorted(cids) for term, cids in index.items()}


def build_finetune_corpus(
    target_graphs: list[OntologyGraph],
    tables: list[SmartIdTable],
    augmentation: AugmentationConfig | None = None,
) -> tuple[list[CorpusInstance], list[str]]:
    """(description -> path id) pairs per target class, plus augmentation.

    Returns the instances and a list of non-fatal warnings (for example
    prior-version classes that no longer exist). Every instance references a
    single target ontology; no cross-ontology alignment labels are used.
    """
    if len(target_graphs) != len(tables):
        raise ValueError("need exactly one table per graph")
    augmentation = augmentation or AugmentationConfig()
    cross_indexes = [(g, _term_index(g)) for g in augmentation.cross_subset_sources]

    instances: list[CorpusInstance] = []
    warnings: list[str] = []
    for graph, table in sorted(zip(target_graphs, tables), key=lambda gt: gt[0].ontology_id):
        tag = f"finetune:{graph.ontology_id}"
        prior_missing: dict[str, int] = {}
        for class_id in sorted(graph.classes):
            smart = table.smart_of.get(class_id)
            if smart is None:
                continue
            descriptions = list(_raw_descriptions(graph, class_id))
            base_terms = sorted({normalize_term(d) for d in descriptions})
            seen = set(base_terms)

            def add_new(terms: Iterable[str]) -> None:
                for term in terms:
                    normalized = normalize_term(term)
                    if normalized not in seen:
                        seen.add(normalized)
                        descriptions.append(term)

            for other, index in cross_indexes:
                if other.ontology_id == graph.ontology_id:
                    continue
                matched = sorted({cid for term in base_terms for cid in index.get(term, ())})
                for other_id in matched:
                    add_new(_raw_descriptions(other, other_id))

            # Prior versions are matched by class id; ids are namespaced per
            # ontology so a prior graph only ever matches its own successor.
            for prior in augmentation.prior_versions:
                if class_id in prior.classes:
                    add_new(_raw_descriptions(prior, class_id))
                else:
                    prior_missing[prior.ontology_id] = prior_missing.get(prior.ontology_id, 0) + 1

            for description in descriptions:
                if description.strip():
                    instances.append(CorpusInstance(tag, description, smart))
        for prior_id, missing in sorted(prior_missing.items()):
            warnings.append(
                f"{graph.ontology_id}: {missing} class ids not found in prior version {prior_id}"
            )
    return instances, warnings


def write_corpus(instances: Iterable[CorpusInstance], handle: IO[str]) -> dict[str, int]:
    """Write line-delimited records and return per-tag counts."""
    counts: dict[str, int] = {}
    for instance in instances:
        counts[instance.task_tag] = counts.get(instance.task_tag, 0) + 1
        handle.write(
            json.dumps(
                {
                    "task_tag": instance.task_tag,
                    "input": instance.input_text,
                    "target": instance.target_text,
                },
                ensure_ascii=False,
            )
            + "\n"
        )
    return counts


def read_corpus(source: IO[str] | Iterable[str]) -> Iterator[CorpusInstance]:
    for line in source:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        obj = json.loads(line)
        yield CorpusInstance(obj["task_tag"], obj["input"], obj["target"])
