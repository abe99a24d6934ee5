"""Corpus file access: line-delimited records plus manifest verification.

The corpus format is the engine's external interface: one JSON object per
line with ``task_tag``, ``input`` and ``target`` fields, and a sibling
``manifest.json`` recording per-tag counts. Training refuses corpora whose
contents no longer match their manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class AdapterError(Exception):
    pass


class EmptyCorpus(AdapterError):
    pass


class ManifestMismatch(AdapterError):
    pass


@dataclass(frozen=True)
class Sample:
    task_tag: str
    input_text: str
    target_text: str

    @property
    def model_input(self) -> str:
        # The task tag rides along in the input so one model can serve
        # several translation tasks.
        return f"{self.task_tag}: {self.input_text}"


def read_samples(corpus_path: str | Path) -> list[Sample]:
    samples: list[Sample] = []
    with open(corpus_path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            obj = json.loads(line)
            samples.append(Sample(obj["task_tag"], obj["input"], obj["target"]))
    if not samples:
        raise EmptyCorpus(f"{corpus_path}: no training samples")
    return samples


def check_manifest(samples: list[Sample], manifest_path: str | Path) -> dict:
    """Verify per-tag counts against the manifest; returns the manifest."""
    with open(manifest_path, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    counts: dict[str, int] = {}
    for sample in samples:
        counts[sample.task_tag] = counts.get(sample.task_tag, 0) + 1
    declared = manifest.get("counts")
    if declared != counts:
        raise ManifestMismatch(
            f"{manifest_path}: manifest counts {declared} != corpus counts {counts}"
        )
    return manifest
