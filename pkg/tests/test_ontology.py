"""Ontology loading, validation, description sets, and round-trip behaviour."""

import io
import json
import random

import pytest

from ontoalign.errors import (
    CyclicOntology,
    DanglingParent,
    DuplicateClass,
    ParseError,
    UnknownClass,
)
from ontoalign.ontology import (
    build_graph,
    class_depths,
    description_set,
    dump_ontology,
    load_ontology,
    validate_graph,
)

from support import graph_from_spec, random_dag


def _lines(*objs):
    return [json.dumps(o) for o in objs]


class TestLoadOntology:
    def test_diamond_file(self):
        lines = _lines(
            {"id": "R", "label": "root"},
            {"id": "A", "label": "a", "parents": ["R"]},
            {"id": "B", "label": "b", "parents": ["R"]},
            {"id": "D", "label": "d", "parents": ["A", "B"]},
        )
        graph = load_ontology(lines, "diamond")
        assert graph.roots == ("R",)
        assert graph.child_index["R"] == ("A", "B")
        assert graph.child_index["A"] == ("D",)
        assert graph.child_index["B"] == ("D",)

    def test_order_independent(self):
        objs = [
            {"id": "R", "label": "root"},
            {"id": "A", "label": "a", "parents": ["R"]},
            {"id": "B", "label": "b", "parents": ["R"]},
            {"id": "D", "label": "d", "parents": ["A", "B"]},
        ]
        forward = load_ontology(_lines(*objs), "x")
        backward = load_ontology(_lines(*reversed(objs)), "x")
        assert forward == backward

    def test_two_cycle_rejected(self):
        lines = _lines(
            {"id": "X", "label": "x", "parents": ["Y"]},
            {"id": "Y", "label": "y", "parents": ["X"]},
        )
        with pytest.raises(CyclicOntology):
            load_ontology(lines, "cyclic")

    def test_duplicate_id_rejected(self):
        lines = _lines(
            {"id": "A", "label": "first"},
            {"id": "A", "label": "second"},
        )
        with pytest.raises(DuplicateClass):
            load_ontology(lines, "dup")

    def test_dangling_parent_rejected(self):
        lines = _lines({"id": "A", "label": "a", "parents": ["missing"]})
        with pytest.raises(DanglingParent):
            load_ontology(lines, "dangling")

    def test_malformed_json_reports_line(self):
        lines = [json.dumps({"id": "A", "label": "a"}), "{not json"]
        with pytest.raises(ParseError) as exc_info:
            load_ontology(lines, "bad")
        assert exc_info.value.line_no == 2

    def test_missing_label_reports_line(self):
        with pytest.raises(ParseError) as exc_info:
            load_ontology(_lines({"id": "A", "label": "  "}), "bad")
        assert exc_info.value.line_no == 1

    def test_self_parent_rejected(self):
        with pytest.raises(ParseError):
            load_ontology(_lines({"id": "A", "label": "a", "parents": ["A"]}), "bad")

    def test_comments_and_blank_lines_skipped(self):
        lines = ["# provenance", "", json.dumps({"id": "A", "label": "a"})]
        graph = load_ontology(lines, "x")
        assert len(graph) == 1

    def test_bytes_stream(self):
        payload = json.dumps({"id": "A", "label": "a"}).encode() + b"\n"
        graph = load_ontology(io.BytesIO(payload), "x")
        assert "A" in graph.classes


class TestDescriptionSet:
    def test_label_plus_synonyms_normalized(self):
        graph = graph_from_spec(
            "o",
            {"c": {"label": "Chest Wall Structure", "synonyms": ["Thoracic Wall", "Chest Wall"]}},
        )
        terms = description_set(graph, "c").terms
        assert terms == {"chest wall structure", "thoracic wall", "chest wall"}

    def test_singular_augmentation(self):
        graph = graph_from_spec("o", {"c": {"label": "Enzymes"}})
        assert description_set(graph, "c", singularize=True).terms == {"enzymes", "enzyme"}

    def test_single_element(self):
        graph = graph_from_spec("o", {"c": {"label": "X"}})
        assert description_set(graph, "c").terms == {"x"}

    def test_unknown_class(self):
        graph = graph_from_spec("o", {"c": {}})
        with pytest.raises(UnknownClass):
            description_set(graph, "nope")

    def test_deterministic_and_idempotent(self):
        graph = graph_from_spec(
            "o", {"c": {"label": "Cells", "synonyms": ["Cell bodies", "CELLS"]}}
        )
        first = description_set(graph, "c", singularize=True)
        second = description_set(graph, "c", singularize=True)
        assert first == second


class TestValidateGraph:
    def test_diamond_counts(self, diamond_graph):
        report = validate_graph(diamond_graph)
        assert report.classes == 4
        assert report.roots == 1
        assert report.multi_parent == 1
        assert report.max_depth == 2
        assert report.errors == []

    def test_empty_graph(self):
        report = validate_graph(build_graph("empty", []))
        assert report.classes == 0
        assert report.roots == 0
        assert any(e.startswith("EmptyOntology") for e in report.errors)

    def test_dangling_parent_reported(self, diamond_graph):
        # Hand-build an invalid graph; the loader would have refused it.
        broken = diamond_graph.classes["A"]
        classes = dict(diamond_graph.classes)
        classes["A"] = type(broken)(
            class_id="A", label="a", parents=("ghost",)
        )
        from ontoalign.ontology import OntologyGraph

        graph = OntologyGraph("broken", classes, diamond_graph.roots, diamond_graph.child_index)
        report = validate_graph(graph)
        assert any(e.startswith("DanglingParent") for e in report.errors)


class TestRoundTrip:
    def test_dump_then_load_identical(self):
        rng = random.Random(7)
        for _ in range(20):
            graph = random_dag(rng, rng.randint(2, 60), with_synonyms=True)
            dumped = list(dump_ontology(graph))
            reloaded = load_ontology(dumped, graph.ontology_id)
            assert reloaded == graph

    def test_parent_child_inverse(self):
        rng = random.Random(11)
        for _ in range(20):
            graph = random_dag(rng, rng.randint(2, 80))
            for cid, record in graph.classes.items():
                for parent in record.parents:
                    assert cid in graph.child_index[parent]
            for parent, kids in graph.child_index.items():
                for kid in kids:
                    assert parent in graph.classes[kid].parents

    def test_accepted_graphs_are_acyclic(self):
        import graphlib

        rng = random.Random(13)
        for _ in range(20):
            graph = random_dag(rng, rng.randint(2, 80))
            order = list(
                graphlib.TopologicalSorter(
                    {c: r.parents for c, r in graph.classes.items()}
                ).static_order()
            )
            position = {cid: i for i, cid in enumerate(order)}
            for cid, record in graph.classes.items():
                for parent in record.parents:
                    assert position[parent] < position[cid]
            depths = class_depths(graph)
            assert set(depths) == set(graph.classes)
