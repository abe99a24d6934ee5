"""Ontology alignment via hierarchical path ids and trie-constrained decoding."""

__version__ = "0.1.0"

from .engine import (
    DecodeConfig,
    ScoredMapping,
    TaskId,
    decode,
    exact_match,
    match_ontologies,
    score_mapping,
    similarity_score,
)
from .ontology import (
    ClassRecord,
    DescriptionSet,
    OntologyGraph,
    description_set,
    load_ontology,
    validate_graph,
)
from .smartids import (
    PathTrie,
    SmartIdTable,
    assign_smartids,
    build_trie,
    enumerate_paths,
    resolve,
)
from .text import edit_similarity, normalize_term, singularize
from .translators import EditSimilarityTranslator, Translator, WireTranslator

__all__ = [
    "ClassRecord",
    "DecodeConfig",
    "DescriptionSet",
    "EditSimilarityTranslator",
    "OntologyGraph",
    "PathTrie",
    "ScoredMapping",
    "SmartIdTable",
    "TaskId",
    "Translator",
    "WireTranslator",
    "assign_smartids",
    "build_trie",
    "decode",
    "description_set",
    "edit_similarity",
    "enumerate_paths",
    "exact_match",
    "load_ontology",
    "match_ontologies",
    "normalize_term",
    "resolve",
    "score_mapping",
    "similarity_score",
    "singularize",
    "validate_graph",
]
