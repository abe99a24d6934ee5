"""Hierarchical path identifiers and the token trie built over them.

Every class is identified by root-to-node paths rendered as hyphen-joined
tokens, one token per hierarchy level. A node's token under a given parent
is the base-36 rendering of its ordinal among that parent's children
(children sorted lexicographically by class id). Multi-parent classes have
several paths; the shortest one (ties broken by lexicographically smallest
rendered form) becomes the class's canonical id, the others are kept as
synonym ids.

Path origin: a single root class acts as the origin and carries no token
(its children render as one-token ids). With multiple roots a virtual
origin is added above them, so every real class gets an id.
"""

from __future__ import annotations

import graphlib
import heapq
import json
from dataclasses import dataclass, field
from itertools import islice
from typing import IO, Iterable, Iterator

from .errors import ParseError, TokenOverflow, UnknownPathId
from .ontology import OntologyGraph

_BASE36 = "0123456789abcdefghijklmnopqrstuvwxyz"

SEPARATOR = "-"


def base36(n: int) -> str:
    """Render a non-negative ordinal in base 36 (lowercase)."""
    if n < 0:
        raise ValueError("ordinal must be non-negative")
    if n == 0:
        return "0"
    digits = []
    while n:
        n, rem = divmod(n, 36)
        digits.append(_BASE36[rem])
    return "".join(reversed(digits))


def render(tokens: Iterable[str]) -> str:
    return SEPARATOR.join(tokens)


def tokens_of(rendered: str) -> tuple[str, ...]:
    return tuple(rendered.split(SEPARATOR))


@dataclass(frozen=True)
class SmartIdTable:
    """Bidirectional map between classes and their path identifiers."""

    ontology_id: str
    smart_of: dict[str, str]
    synonyms_of: dict[str, tuple[str, ...]]
    node_of: dict[str, str]

    def paths_of(self, class_id: str) -> tuple[str, ...]:
        smart = self.smart_of.get(class_id)
        if smart is None:
            return ()
        return (smart, *self.synonyms_of.get(class_id, ()))

    def all_paths(self) -> Iterator[tuple[str, str]]:
        """Yield (rendered path id, class id) over smart and synonym ids."""
        for cid in self.smart_of:
            for rendered in self.paths_of(cid):
                yield rendered, cid


def resolve(table: SmartIdTable, rendered: str) -> str:
    """Class owning the given rendered path id (smart or synonym)."""
    try:
        return table.node_of[rendered]
    except KeyError:
        raise UnknownPathId(f"{table.ontology_id}: unknown path id {rendered!r}") from None


def _origin_children(graph: OntologyGraph) -> tuple[str, ...]:
    """Classes sitting directly under the path origin.

    A single root is itself the origin; multiple roots hang under a virtual
    origin and all receive ids.
    """
    if len(graph.roots) == 1:
        return graph.child_index[graph.roots[0]]
    return graph.roots


def _sibling_tokens(
    graph: OntologyGraph, max_token_len: int | None
) -> dict[tuple[str | None, str], str]:
    """Token of each (parent, child) edge, origin edges keyed by parent=None."""
    single_root = graph.roots[0] if len(graph.roots) == 1 else None
    tokens: dict[tuple[str | None, str], str] = {}

    def assign(parent_key: str | None, siblings: tuple[str, ...]) -> None:
        if max_token_len is not None and len(siblings) > 36**max_token_len:
            raise TokenOverflow(
                f"{len(siblings)} siblings exceed token space 36^{max_token_len}"
            )
        for ordinal, child in enumerate(siblings):
            tokens[(parent_key, child)] = base36(ordinal)

    assign(None, _origin_children(graph))
    for parent, children in graph.child_index.items():
        if parent == single_root or not children:
            continue
        assign(parent, children)
    return tokens


def _topological(graph: OntologyGraph) -> list[str]:
    sorter = graphlib.TopologicalSorter(
        {cid: rec.parents for cid, rec in graph.classes.items()}
    )
    return list(sorter.static_order())


def _k_best_paths(
    graph: OntologyGraph, path_cap: int, max_token_len: int | None
) -> dict[str, list[tuple[int, str]]]:
    """Up to ``path_cap`` best (token count, rendered) paths per class.

    Dynamic program in topological order. Appending a fixed suffix preserves
    the (length, rendered) order among equal-length paths, so each class's
    best paths always extend its parents' best paths; the per-class lists
    stay globally optimal and every kept path's prefix is a kept path of an
    ancestor.
    """
    single_root = graph.roots[0] if len(graph.roots) == 1 else None
    tokens = _sibling_tokens(graph, max_token_len)
    origin_children = set(_origin_children(graph))
    best: dict[str, list[tuple[int, str]]] = {}

    for cid in _topological(graph):
        if cid == single_root:
            best[cid] = []
            continue
        sources: list[Iterable[tuple[int, str]]] = []
        if cid in origin_children:
            sources.append([(1, tokens[(None, cid)])])
        for parent in graph.classes[cid].parents:
            if parent == single_root:
                continue
            suffix = SEPARATOR + tokens[(parent, cid)]
            sources.append(
                [(length + 1, rendered + suffix) for length, rendered in best[parent]]
            )
        best[cid] = list(islice(heapq.merge(*sources), path_cap))
    return best


def enumerate_paths(graph: OntologyGraph, class_id: str, path_cap: int = 64) -> list[str]:
    """Up to ``path_cap`` distinct path ids of a class, shortest first.

    Ordered by (token count, rendered form); shorter paths are always found
    before the cap truncates. The origin root of a single-root graph has no
    paths and yields an empty list.
    """
    if path_cap < 1:
        raise ValueError("path_cap must be >= 1")
    graph.require(class_id)
    best = _k_best_paths(graph, path_cap, None)
    return [rendered for _, rendered in best[class_id]]


def assign_smartids(
    graph: OntologyGraph, path_cap: int = 64, max_token_len: int | None = None
) -> SmartIdTable:
    """Give every class its canonical path id plus up to ``path_cap - 1`` synonyms.

    Deterministic across runs: all orderings derive from sorted class ids.
    The origin root of a single-root graph receives no id.
    """
    if path_cap < 1:
        raise ValueError("path_cap must be >= 1")
    best = _k_best_paths(graph, path_cap, max_token_len)
    smart_of: dict[str, str] = {}
    synonyms_of: dict[str, tuple[str, ...]] = {}
    node_of: dict[str, str] = {}
    for cid in sorted(graph.classes):
        paths = best[cid]
        if not paths:
            continue
        smart_of[cid] = paths[0][1]
        synonyms_of[cid] = tuple(rendered for _, rendered in paths[1:])
        for _, rendered in paths:
            node_of[rendered] = cid
    return SmartIdTable(
        ontology_id=graph.ontology_id,
        smart_of=smart_of,
        synonyms_of=synonyms_of,
        node_of=node_of,
    )


@dataclass
class TrieNode:
    children: dict[str, "TrieNode"] = field(default_factory=dict)
    class_id: str | None = None
    idx: int = -1

    def sorted_tokens(self) -> list[str]:
        return sorted(self.children)


class PathTrie:
    """Token trie accepting exactly the path ids of one table.

    Prefix queries cost time proportional to prefix length; the per-node
    child lookup is a dict access independent of ontology size.
    """

    def __init__(self, ontology_id: str):
        self.ontology_id = ontology_id
        self.root = TrieNode(idx=0)
        self.size = 1

    def _insert(self, tokens: tuple[str, ...], class_id: str) -> None:
        node = self.root
        for token in tokens:
            nxt = node.children.get(token)
            if nxt is None:
                nxt = TrieNode(idx=self.size)
                self.size += 1
                node.children[token] = nxt
            node = nxt
        node.class_id = class_id

    def node_at(self, prefix: Iterable[str]) -> TrieNode | None:
        node = self.root
        for token in prefix:
            node = node.children.get(token)
            if node is None:
                return None
        return node

    def children_of(self, prefix: Iterable[str]) -> list[str]:
        node = self.node_at(prefix)
        return node.sorted_tokens() if node is not None else []

    def terminal(self, prefix: Iterable[str]) -> str | None:
        node = self.node_at(prefix)
        return node.class_id if node is not None else None

    def lookup(self, rendered: str) -> str:
        class_id = self.terminal(tokens_of(rendered))
        if class_id is None:
            raise UnknownPathId(f"{self.ontology_id}: unknown path id {rendered!r}")
        return class_id

    def iter_paths(self) -> Iterator[tuple[str, str]]:
        """All accepted (rendered path, class id) pairs, lexicographic walk."""

        def walk(node: TrieNode, parts: list[str]) -> Iterator[tuple[str, str]]:
            if node.class_id is not None and parts:
                yield render(parts), node.class_id
            for token in node.sorted_tokens():
                parts.append(token)
                yield from walk(node.children[token], parts)
                parts.pop()

        yield from walk(self.root, [])


def build_trie(table: SmartIdTable) -> PathTrie:
    """Trie over every smart and synonym id of the table."""
    trie = PathTrie(table.ontology_id)
    for rendered, cid in table.all_paths():
        trie._insert(tokens_of(rendered), cid)
    return trie


def export_table(table: SmartIdTable) -> Iterator[str]:
    """Line-delimited table export, sorted by class id, byte-stable."""
    for cid in sorted(table.smart_of):
        yield json.dumps(
            {
                "class_id": cid,
                "smart_id": table.smart_of[cid],
                "synonym_ids": list(table.synonyms_of.get(cid, ())),
            },
            ensure_ascii=False,
        )


def load_table(source: IO[str] | Iterable[str], ontology_id: str) -> SmartIdTable:
    """Parse an exported table back into a :class:`SmartIdTable`."""
    smart_of: dict[str, str] = {}
    synonyms_of: dict[str, tuple[str, ...]] = {}
    node_of: dict[str, str] = {}
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
            cid = obj["class_id"]
            smart = obj["smart_id"]
            synonyms = tuple(obj.get("synonym_ids", []))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"invalid table record ({exc})", line_no) from None
        smart_of[cid] = smart
        synonyms_of[cid] = synonyms
        node_of[smart] = cid
        for synonym in synonyms:
            node_of[synonym] = cid
    return SmartIdTable(
        ontology_id=ontology_id,
        smart_of=smart_of,
        synonyms_of=synonyms_of,
        node_of=node_of,
    )
