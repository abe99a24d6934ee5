"""Shared pytest fixtures for the engine test suite."""

from __future__ import annotations

import pytest

from ontoalign.ontology import OntologyGraph

from support import graph_from_spec


@pytest.fixture
def diamond_graph() -> OntologyGraph:
    """R -> {A, B}, both -> D (the 4-class multi-parent diamond)."""
    return graph_from_spec(
        "diamond",
        {
            "R": {},
            "A": {"parents": ["R"]},
            "B": {"parents": ["R"]},
            "D": {"parents": ["A", "B"]},
        },
    )


@pytest.fixture
def toy_graph() -> OntologyGraph:
    """R -> {A, B}; A -> {C, D}; B -> {D} with medical-flavoured labels."""
    return graph_from_spec(
        "toy",
        {
            "R": {"label": "Anatomy Root"},
            "A": {"label": "Torso Structure", "parents": ["R"]},
            "B": {"label": "Body Wall", "parents": ["R"]},
            "C": {"label": "Abdominal Wall", "parents": ["A"]},
            "D": {
                "label": "Chest Wall Structure",
                "synonyms": ["Thoracic Wall", "Chest Wall"],
                "parents": ["A", "B"],
            },
        },
    )
