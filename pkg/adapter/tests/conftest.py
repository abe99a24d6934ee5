"""Adapter test fixtures: a tiny ontology whose corpus a small model can memorize."""

from __future__ import annotations

import json
import random
import warnings
from pathlib import Path

import pytest

warnings.filterwarnings("ignore", category=UserWarning, module="torch")

WORDS = "alpha beta gamma delta epsilon zeta theta kappa sigma omega".split()


def write_tiny_ontology(path: Path, n_groups: int = 4, per_group: int = 5) -> int:
    """Two-level ontology with unique labels and one synonym per leaf."""
    rng = random.Random(5)
    rows = [{"id": "t:root", "label": "root concept"}]
    groups = []
    for i in range(n_groups):
        cid = f"t:g{i}"
        rows.append({"id": cid, "label": f"{WORDS[i]} group", "parents": ["t:root"]})
        groups.append(cid)
    n = 0
    for parent in groups:
        for _ in range(per_group):
            label = f"{WORDS[rng.randrange(10)]} {WORDS[rng.randrange(10)]} {n:02d}"
            synonym = f"{WORDS[rng.randrange(10)]} form {n:02d}"
            rows.append(
                {
                    "id": f"t:c{n:02d}",
                    "label": label,
                    "synonyms": [synonym],
                    "parents": [parent],
                }
            )
            n += 1
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    return len(rows)


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Ontology file + fine-tune corpus produced by the engine CLI."""
    import subprocess
    import sys

    base = tmp_path_factory.mktemp("tinycorpus")
    ontology = base / "tiny_tgt.jsonl"
    write_tiny_ontology(ontology)
    out_dir = base / "corp"
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "ontoalign.cli",
            "corpus",
            "--split",
            "finetune",
            "--graph",
            str(ontology),
            "--out-dir",
            str(out_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    return ontology, out_dir / "finetune.jsonl", out_dir / "manifest.json"
