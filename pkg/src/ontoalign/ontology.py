"""Loading, validation and query of immutable ontology class graphs.

The on-disk format is line-delimited JSON, one class per line:

    {"id": "...", "label": "...", "synonyms": [...], "definitions": [...], "parents": [...]}

``id`` and ``label`` are required; the list fields are optional. Lines that
are blank or start with ``#`` are skipped, so provenance comments survive a
round trip. Graphs are treated as immutable after loading and are safe to
share between threads.
"""

from __future__ import annotations

import graphlib
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import (
    CyclicOntology,
    DanglingParent,
    DuplicateClass,
    ParseError,
    UnknownClass,
)
from .text import normalize_term, singular_closure


@dataclass(frozen=True)
class ClassRecord:
    """One ontology class: identifier, descriptions, and parent links."""

    class_id: str
    label: str
    synonyms: tuple[str, ...] = ()
    definitions: tuple[str, ...] = ()
    parents: tuple[str, ...] = ()


@dataclass(frozen=True)
class OntologyGraph:
    """A validated, acyclic class graph.

    ``roots`` and each ``child_index`` entry are sorted lexicographically by
    class id so that everything derived from the graph is deterministic.
    """

    ontology_id: str
    classes: dict[str, ClassRecord]
    roots: tuple[str, ...]
    child_index: dict[str, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.classes)

    def require(self, class_id: str) -> ClassRecord:
        try:
            return self.classes[class_id]
        except KeyError:
            raise UnknownClass(f"{self.ontology_id}: unknown class {class_id!r}") from None


@dataclass(frozen=True)
class DescriptionSet:
    """Normalized label + synonym terms of one class."""

    owner: str
    terms: frozenset[str]


@dataclass
class ValidationReport:
    classes: int = 0
    roots: int = 0
    multi_parent: int = 0
    max_depth: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _parse_record(obj: object, line_no: int) -> ClassRecord:
    if not isinstance(obj, dict):
        raise ParseError("record is not an object", line_no)
    class_id = obj.get("id")
    if not isinstance(class_id, str) or not class_id:
        raise ParseError("missing or invalid 'id'", line_no)
    label = obj.get("label")
    if not isinstance(label, str) or not label.strip():
        raise ParseError(f"class {class_id!r}: missing or empty 'label'", line_no)

    def str_list(key: str) -> tuple[str, ...]:
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ParseError(f"class {class_id!r}: '{key}' must be a list of strings", line_no)
        return tuple(value)

    parents = str_list("parents")
    if len(set(parents)) != len(parents):
        raise ParseError(f"class {class_id!r}: duplicate parent ids", line_no)
    if class_id in parents:
        raise ParseError(f"class {class_id!r}: lists itself as parent", line_no)
    return ClassRecord(
        class_id=class_id,
        label=label,
        synonyms=str_list("synonyms"),
        definitions=str_list("definitions"),
        parents=parents,
    )


def _iter_lines(source: IO[bytes] | IO[str] | Iterable[str]) -> Iterator[str]:
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def load_ontology(source: IO[bytes] | IO[str] | Iterable[str], ontology_id: str) -> OntologyGraph:
    """Parse the line-delimited class format and return a validated graph.

    Raises :class:`ParseError` (with line number) for malformed records,
    :class:`DuplicateClass`, :class:`DanglingParent`, or
    :class:`CyclicOntology` for structural violations. The order of records
    in the file does not affect the result.
    """
    classes: dict[str, ClassRecord] = {}
    for line_no, line in enumerate(_iter_lines(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line_no) from None
        record = _parse_record(obj, line_no)
        if record.class_id in classes:
            raise DuplicateClass(f"duplicate class id {record.class_id!r} (line {line_no})")
        classes[record.class_id] = record
    return build_graph(ontology_id, classes.values())


def load_ontology_path(path: str, ontology_id: str) -> OntologyGraph:
    with io.open(path, "rb") as handle:
        return load_ontology(handle, ontology_id)


def build_graph(ontology_id: str, records: Iterable[ClassRecord]) -> OntologyGraph:
    """Assemble and validate a graph from in-memory records."""
    classes: dict[str, ClassRecord] = {}
    for record in records:
        if record.class_id in classes:
            raise DuplicateClass(f"duplicate class id {record.class_id!r}")
        classes[record.class_id] = record

    children: dict[str, list[str]] = {cid: [] for cid in classes}
    for record in classes.values():
        for parent in record.parents:
            if parent not in classes:
                raise DanglingParent(
                    f"class {record.class_id!r} references unknown parent {parent!r}"
                )
            children[parent].append(record.class_id)

    # graphlib validates acyclicity; the order itself is discarded.
    sorter = graphlib.TopologicalSorter({cid: rec.parents for cid, rec in classes.items()})
    try:
        list(sorter.static_order())
    except graphlib.CycleError as exc:
        cycle = exc.args[1]
        raise CyclicOntology(f"cycle detected: {' -> '.join(cycle)}") from None

    roots = tuple(sorted(cid for cid, rec in classes.items() if not rec.parents))
    child_index = {cid: tuple(sorted(kids)) for cid, kids in children.items()}
    return OntologyGraph(
        ontology_id=ontology_id, classes=classes, roots=roots, child_index=child_index
    )


def dump_ontology(graph: OntologyGraph) -> Iterator[str]:
    """Serialize back to the class file format, one JSON line per class.

    Classes are emitted sorted by id, so a load/dump/load round trip yields
    an identical graph.
    """
    for cid in sorted(graph.classes):
        record = graph.classes[cid]
        obj: dict[str, object] = {"id": record.class_id, "label": record.label}
        if record.synonyms:
            obj["synonyms"] = list(record.synonyms)
        if record.definitions:
            obj["definitions"] = list(record.definitions)
        if record.parents:
            obj["parents"] = list(record.parents)
        yield json.dumps(obj, ensure_ascii=False, sort_keys=False)


def description_set(graph: OntologyGraph, class_id: str, singularize: bool = False) -> DescriptionSet:
    """Normalized label and synonyms of a class.

    With ``singularize`` the set is closed under the singularization rules,
    so plural and singular spellings both participate in exact matching.
    """
    record = graph.require(class_id)
    terms = {normalize_term(record.label)}
    terms.update(normalize_term(s) for s in record.synonyms)
    terms.discard("")
    if singularize:
        terms = singular_closure(terms)
    return DescriptionSet(owner=class_id, terms=frozenset(terms))


def class_depths(graph: OntologyGraph) -> dict[str, int]:
    """Shortest distance from any root per class (roots are depth 0).

    Nodes unreachable from the roots (possible only on invalid graphs) are
    omitted.
    """
    depths: dict[str, int] = {r: 0 for r in graph.roots}
    queue = deque(graph.roots)
    while queue:
        cid = queue.popleft()
        for child in graph.child_index.get(cid, ()):
            if child not in depths:
                depths[child] = depths[cid] + 1
                queue.append(child)
    return depths


def validate_graph(graph: OntologyGraph) -> ValidationReport:
    """Check all graph invariants, reporting problems instead of raising."""
    report = ValidationReport(classes=len(graph.classes), roots=len(graph.roots))
    if not graph.classes:
        report.errors.append("EmptyOntology: graph has no classes")
        return report

    for cid, record in graph.classes.items():
        if not record.label.strip():
            report.errors.append(f"EmptyLabel: class {cid!r}")
        if len(set(record.parents)) != len(record.parents):
            report.errors.append(f"DuplicateParents: class {cid!r}")
        if cid in record.parents:
            report.errors.append(f"SelfParent: class {cid!r}")
        for parent in record.parents:
            if parent not in graph.classes:
                report.errors.append(f"DanglingParent: {cid!r} -> {parent!r}")
            elif cid not in graph.child_index.get(parent, ()):
                report.errors.append(f"ChildIndexMismatch: {parent!r} is missing child {cid!r}")
        if len(record.parents) > 1:
            report.multi_parent += 1

    for parent, kids in graph.child_index.items():
        for child in kids:
            if child not in graph.classes or parent not in graph.classes[child].parents:
                report.errors.append(f"ChildIndexMismatch: spurious edge {parent!r} -> {child!r}")

    expected_roots = tuple(sorted(c for c, r in graph.classes.items() if not r.parents))
    if graph.roots != expected_roots:
        report.errors.append("RootsMismatch: roots list does not match parentless classes")
    if not graph.roots:
        report.errors.append("NoRoots: non-empty graph has no parentless class")

    sorter = graphlib.TopologicalSorter(
        {cid: tuple(p for p in rec.parents if p in graph.classes) for cid, rec in graph.classes.items()}
    )
    try:
        list(sorter.static_order())
    except graphlib.CycleError as exc:
        report.errors.append(f"CyclicOntology: {' -> '.join(exc.args[1])}")
        return report

    depths = class_depths(graph)
    report.max_depth = max(depths.values(), default=0)
    return report
