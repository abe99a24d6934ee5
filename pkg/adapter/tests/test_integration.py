"""End-to-end: engine CLI driving the served adapter over the wire protocol.

This is the adapter's acceptance: the model memorizes the toy fine-tune
corpus, and constrained decoding through the engine then maps every
memorized description to its class (accuracy 1.0). The adapter touches the
engine only through its external interfaces: the corpus files it trains on
and the wire protocol it serves.
"""

import json
import subprocess
import sys
import time

import pytest

from ontoalign_adapter.model import AdapterConfig
from ontoalign_adapter.training import train


def _run_engine(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "ontoalign.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="module")
def memorized_checkpoint(tiny_corpus, tmp_path_factory):
    _, corpus, manifest = tiny_corpus
    out = tmp_path_factory.mktemp("integration") / "ckpt"
    result = train(corpus, manifest, out, AdapterConfig(epochs=150, seed=0), log=lambda _: None)
    assert result["train_accuracy"] >= 0.90
    return corpus, out


def test_engine_plus_adapter_reach_full_accuracy(tiny_corpus, memorized_checkpoint, tmp_path):
    started = time.monotonic()
    ontology, _, _ = tiny_corpus
    corpus, checkpoint = memorized_checkpoint

    # Source ontology: one class per memorized description; the reference
    # maps it to the class owning that description's path id.
    targets: dict[str, str] = {}
    task_tag = None
    with open(corpus, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                continue
            obj = json.loads(line)
            targets.setdefault(obj["input"], obj["target"])
            task_tag = obj["task_tag"]
    assert task_tag is not None

    table_file = tmp_path / "table.jsonl"
    result = _run_engine("smartids", "--input", str(ontology), "--out", str(table_file))
    assert result.returncode == 0, result.stderr
    id_of = {}
    for line in table_file.read_text().splitlines():
        if line.startswith("#"):
            continue
        row = json.loads(line)
        id_of[row["smart_id"]] = row["class_id"]

    source_file = tmp_path / "wire_src.jsonl"
    reference_file = tmp_path / "wire_ref.tsv"
    with open(source_file, "w", encoding="utf-8") as src, open(
        reference_file, "w", encoding="utf-8"
    ) as ref:
        ref.write("SrcEntity\tTgtEntity\tScore\n")
        for i, (description, smart_id) in enumerate(sorted(targets.items())):
            src.write(json.dumps({"id": f"s:{i:03d}", "label": description}) + "\n")
            ref.write(f"s:{i:03d}\t{id_of[smart_id]}\t1.000000\n")

    mapping_file = tmp_path / "mapping.tsv"
    serve_command = f"{sys.executable} -m ontoalign_adapter.cli serve --checkpoint {checkpoint} --stdio"
    result = _run_engine(
        "match",
        "--source", str(source_file),
        "--target", str(ontology),
        "--task", task_tag,  # the model was trained under this identifier
        "--mode", "tm2",
        "--threshold", "0.0",
        "--translator", f"wire:{serve_command}",
        "--out", str(mapping_file),
    )
    assert result.returncode == 0, result.stderr

    report_file = tmp_path / "report.txt"
    result = _run_engine(
        "eval",
        "--mappings", str(mapping_file),
        "--reference", str(reference_file),
        "--out", str(report_file),
    )
    assert result.returncode == 0, result.stderr
    report = {
        line.split("=")[0]: line.split("=")[1]
        for line in report_file.read_text().splitlines()
        if "=" in line and not line.startswith("#")
    }
    assert float(report["accuracy"]) == 1.0
    assert float(report["precision"]) == 1.0
    assert float(report["recall"]) == 1.0
    print(
        f"\nACCEPTANCE engine+adapter memorization: PASS "
        f"({len(targets)} descriptions decoded to their classes, "
        f"{time.monotonic() - started:.1f}s)"
    )


def test_served_checkpoint_answers_hello(memorized_checkpoint):
    _, checkpoint = memorized_checkpoint
    serve = subprocess.Popen(
        [sys.executable, "-m", "ontoalign_adapter.cli", "serve", "--checkpoint", str(checkpoint), "--stdio"],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )
    try:
        serve.stdin.write('{"op": "hello"}\n')
        serve.stdin.flush()
        hello = json.loads(serve.stdout.readline())
        assert hello["capabilities"] == ["score_tokens", "embed"]
        assert hello["embed_dim"] == 128
        serve.stdin.write(json.dumps({"op": "embed", "task": "t", "text": "x"}) + "\n")
        serve.stdin.flush()
        vector = json.loads(serve.stdout.readline())["vector"]
        assert len(vector) == 128
    finally:
        serve.terminate()
        serve.wait(timeout=5)
