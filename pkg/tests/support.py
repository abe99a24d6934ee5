"""Test helpers: toy graph builders, random DAG generators, independent oracles.

The oracles here are deliberately naive re-implementations (DFS path
enumeration, all-pairs scans) kept independent of the package's search
structures so tests check two different routes to the same answer.
"""

from __future__ import annotations

import random

from ontoalign.ontology import ClassRecord, OntologyGraph, build_graph
from ontoalign.text import edit_similarity, normalize_term

_DIGITS36 = "0123456789abcdefghijklmnopqrstuvwxyz"

_WORDS = (
    "wall thorax chest organ tissue cell nerve duct lobe cortex vessel bone "
    "muscle gland node fossa canal ridge plate joint fold crest valve root "
    "tract bulb horn disc arch limb"
).split()

_MODIFIERS = (
    "left right upper lower anterior posterior medial lateral deep superficial "
    "primary secondary accessory proper minor major distal proximal central"
).split()


def graph_from_spec(ontology_id: str, spec: dict[str, dict]) -> OntologyGraph:
    """Build a graph from {class_id: {label?, synonyms?, definitions?, parents?}}."""
    records = []
    for cid, fields in spec.items():
        records.append(
            ClassRecord(
                class_id=cid,
                label=fields.get("label", cid),
                synonyms=tuple(fields.get("synonyms", ())),
                definitions=tuple(fields.get("definitions", ())),
                parents=tuple(fields.get("parents", ())),
            )
        )
    return build_graph(ontology_id, records)






def random_dag(
    rng: random.Random,
    n_classes: int,
    multi_parent_density: float = 0.3,
    root_fraction: float = 0.05,
    with_synonyms: bool = False,
) -> OntologyGraph:
    """A random labelled DAG; edges always point from lower to higher index."""
    records = []
    for i in range(n_classes):
        cid = f"c{i:05d}"
        if i == 0 or rng.random() < root_fraction:
            parents: tuple[str, ...] = ()
        else:
            chosen = {rng.randrange(i)}
            if rng.random() < multi_parent_density:
                for _ in range(rng.choice((1, 1, 2))):
                    chosen.add(rng.randrange(i))
            parents = tuple(sorted(f"c{p:05d}" for p in chosen))
        label = " ".join(
            (rng.choice(_MODIFIERS), rng.choice(_WORDS), rng.choice(_WORDS))
        )
        synonyms: tuple[str, ...] = ()
        if with_synonyms and rng.random() < 0.5:
            synonyms = tuple(
                " ".join((rng.choice(_MODIFIERS), rng.choice(_WORDS)))
                for _ in range(rng.randint(1, 2))
            )
        records.append(ClassRecord(cid, label, synonyms=synonyms, parents=parents))
    return build_graph(f"rand{n_classes}", records)


def _base36(n: int) -> str:
    if n == 0:
        return "0"
    out = ""
    while n:
        n, rem = divmod(n, 36)
        out = _DIGITS36[rem] + out
    return out


def oracle_all_paths(graph: OntologyGraph, path_limit: int = 200_000) -> dict[str, list[str]]:
    """Every rendered root path per class, by plain DFS over parent edges.

    Independent oracle: re-derives sibling tokens from the documented rule
    (base-36 ordinal among the parent's children sorted by class id) and
    enumerates paths without any trie or k-best machinery.
    """
    single_root = graph.roots[0] if len(graph.roots) == 1 else None
    if single_root is not None:
        origin_children = graph.child_index[single_root]
    else:
        origin_children = graph.roots

    token: dict[tuple[str | None, str], str] = {}
    for ordinal, child in enumerate(origin_children):
        token[(None, child)] = _base36(ordinal)
    for parent, children in graph.child_index.items():
        if parent == single_root:
            continue
        for ordinal, child in enumerate(children):
            token[(parent, child)] = _base36(ordinal)

    paths: dict[str, list[str]] = {cid: [] for cid in graph.classes}
    budget = [path_limit]

    def walk(cid: str, acc: list[str]) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError("path enumeration exceeded the oracle budget")
        if acc:
            paths[cid].append("-".join(acc))
        for child in graph.child_index[cid]:
            acc.append(token[(cid if cid is not None else None, child)])
            walk(child, acc)
            acc.pop()

    if single_root is not None:
        for child in origin_children:
            walk(child, [token[(None, child)]])
    else:
        for root in origin_children:
            walk(root, [token[(None, root)]])
    return paths


def oracle_best_match(
    source_text: str, target_descriptions: dict[str, list[str]]
) -> tuple[str, float]:
    """All-pairs scan: class with the best max-description edit similarity.

    Ties go to the lexicographically smallest class id; callers comparing
    against the decoder should compare achieved scores, not identities,
    when ties are possible.
    """
    source = normalize_term(source_text)
    best_cid, best_score = "", -1.0
    for cid in sorted(target_descriptions):
        score = max(edit_similarity(source, d) for d in target_descriptions[cid])
        if score > best_score:
            best_cid, best_score = cid, score
    return best_cid, best_score


def balanced_tree_graph(branching: int, n_classes: int, ontology_id: str) -> OntologyGraph:
    """A b-ary tree of ``n_classes`` decodable classes under one root.

    Node ``i`` (1-based over classes) hangs under node ``(i - 1) // b`` in a
    heap layout, so the tree fills level by level. Labels are globally
    unique so exact-label queries have a single best match.
    """
    records = [ClassRecord("t00000", "origin root")]
    for i in range(1, n_classes + 1):
        parent = (i - 1) // branching
        records.append(
            ClassRecord(
                f"t{i:05d}",
                f"{_WORDS[i % len(_WORDS)]} {i:05d}",
                parents=(f"t{parent:05d}",),
            )
        )
    return build_graph(ontology_id, records)


def perturb(rng: random.Random, text: str) -> str:
    """A small lexical edit: drop, double, or swap a character, or pluralize."""
    op = rng.randrange(4)
    if op == 0 and len(text) > 3:
        i = rng.randrange(len(text))
        return text[:i] + text[i + 1 :]
    if op == 1:
        i = rng.randrange(len(text))
        return text[:i] + text[i] + text[i:]
    if op == 2 and len(text) > 3:
        i = rng.randrange(len(text) - 1)
        return text[:i] + text[i + 1] + text[i] + text[i + 2 :]
    return text + "s"


def source_texts_for(rng: random.Random, graph: OntologyGraph, count: int) -> list[str]:
    """Query texts: exact descriptions, perturbed descriptions, random noise."""
    descriptions = []
    for record in graph.classes.values():
        descriptions.append(record.label)
        descriptions.extend(record.synonyms)
    texts = []
    for _ in range(count):
        kind = rng.random()
        if kind < 0.4:
            texts.append(rng.choice(descriptions))
        elif kind < 0.8:
            texts.append(perturb(rng, rng.choice(descriptions)))
        else:
            texts.append(
                " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, 3)))
            )
    return texts


def oracle_ancestors(graph: OntologyGraph, class_id: str) -> set[str]:
    """Transitive parents, computed by plain BFS."""
    seen: set[str] = set()
    frontier = list(graph.classes[class_id].parents)
    while frontier:
        parent = frontier.pop()
        if parent not in seen:
            seen.add(parent)
            frontier.extend(graph.classes[parent].parents)
    return seen
