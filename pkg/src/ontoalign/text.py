"""String primitives: term normalization, singularization, edit similarity.

These are the building blocks for description-set matching. Terms must be
normalized identically on both sides of any comparison, so every caller goes
through :func:`normalize_term`.
"""

from __future__ import annotations

import unicodedata

_VOWELS = "aeiou"

# Suffixes whose trailing "es" is an affixed plural marker.
_ES_SUFFIXES = ("ses", "xes", "zes", "ches", "shes")

# Words ending in these never lose their final "s".
_S_EXEMPT = ("ss", "us", "is")


def normalize_term(term: str) -> str:
    """Canonical form used for set membership: NFC, collapsed whitespace, casefolded."""
    term = unicodedata.normalize("NFC", term)
    term = " ".join(term.split())
    return term.casefold()


def singularize(term: str) -> str:
    """Heuristic per-word English singularization.

    Rule table, applied independently to each whitespace-separated word of
    at least 4 characters (checks are case-insensitive, the surviving stem
    keeps its original characters):

    1. ``...ies`` (5+ chars) -> ``...y``
    2. ``...ses | ...xes | ...zes | ...ches | ...shes`` -> drop ``es``
    3. ``...s`` -> drop ``s``, except ``...ss``, ``...us``, ``...is`` and
       ``...as`` when the ``as`` follows a vowel (keeps e.g. "pancreas")

    Idempotent on already-singular words.
    """
    return " ".join(_singularize_word(w) for w in term.split(" "))


def _singularize_word(word: str) -> str:
    low = word.casefold()
    if len(low) < 4 or not low.endswith("s"):
        return word
    if low.endswith("ies") and len(low) >= 5:
        return word[:-3] + "y"
    if low.endswith(_ES_SUFFIXES):
        return word[:-2]
    if low.endswith(_S_EXEMPT):
        return word
    if low.endswith("as") and low[-3] in _VOWELS:
        return word
    return word[:-1]


def singular_closure(terms: set[str]) -> set[str]:
    """Smallest superset of ``terms`` closed under :func:`singularize`."""
    closed = set(terms)
    frontier = closed
    while frontier:
        added = {singularize(t) for t in frontier} - closed
        closed |= added
        frontier = added
    return closed


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs, two-row dynamic program."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        append = current.append
        for j, cb in enumerate(b, start=1):
            cost_sub = previous[j - 1] + (ca != cb)
            cost_del = previous[j] + 1
            cost_ins = current[j - 1] + 1
            best = cost_sub if cost_sub < cost_del else cost_del
            append(best if best < cost_ins else cost_ins)
        previous = current
    return previous[-1]


def edit_similarity(a: str, b: str) -> float:
    """Normalized edit similarity: ``1 - dist(a, b) / max(|a|, |b|)``.

    Equals 1.0 iff the strings are equal (two empty strings score 1.0).
    """
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - levenshtein(a, b) / longest
