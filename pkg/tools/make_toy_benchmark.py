"""Generate the bundled toy benchmark pair under tests/data/.

Deterministic (fixed seed). The target ontology has ~200 classes in a
three-level hierarchy with occasional multi-parent links and synonyms; the
source ontology mirrors 120 of those classes under controlled lexical
noise (exact copies, plural forms, typos, word swaps) plus 80 distractors.
The 120 mirrored classes form the reference mapping.

Run from the repository root:

    python3 tools/make_toy_benchmark.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

SEED = 20240817
OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

ANATOMY = (
    "wall cavity membrane lobe duct vessel nerve muscle bone joint gland "
    "cortex canal fossa ridge plate fold crest valve bulb horn disc arch "
    "septum sinus plexus tract node capsule sheath"
).split()

REGIONS = (
    "thoracic abdominal cranial cervical lumbar pelvic femoral brachial "
    "cardiac hepatic renal gastric pulmonary dermal neural ocular oral "
    "nasal aortic venous"
).split()

QUALIFIERS = (
    "left right upper lower anterior posterior medial lateral deep "
    "superficial proper accessory"
).split()


def _title(words: list[str]) -> str:
    return " ".join(w.capitalize() for w in words)


def build_target(rng: random.Random):
    classes = [{"id": "tgt:0000", "label": "Anatomical Entity"}]
    level1: list[str] = []
    level2: list[str] = []
    used_labels: set[str] = set()

    def fresh_label(words: list[str]) -> str:
        label = _title(words)
        n = 2
        while label.lower() in used_labels:
            label = _title(words) + f" {n}"
            n += 1
        used_labels.add(label.lower())
        return label

    next_id = 1

    def add(label: str, parents: list[str], synonyms: list[str]):
        nonlocal next_id
        cid = f"tgt:{next_id:04d}"
        next_id += 1
        obj = {"id": cid, "label": label, "parents": parents}
        if synonyms:
            obj["synonyms"] = synonyms
        classes.append(obj)
        return cid

    for region in rng.sample(REGIONS, 8):
        cid = add(fresh_label([region, "region"]), ["tgt:0000"], [])
        level1.append((cid, region))

    for cid, region in level1:
        for part in rng.sample(ANATOMY, 6):
            label = fresh_label([region, part])
            synonyms = []
            if rng.random() < 0.5:
                synonyms.append(_title([part, "of", region, "region"]))
            kid = add(label, [cid], synonyms)
            level2.append((kid, region, part))

    count_level3 = 0
    for kid, region, part in level2:
        for qualifier in rng.sample(QUALIFIERS, rng.randint(2, 4)):
            if count_level3 >= 143:
                break
            label = fresh_label([qualifier, region, part])
            synonyms = []
            if rng.random() < 0.4:
                synonyms.append(_title([region, part, qualifier, "segment"]))
            parents = [kid]
            if rng.random() < 0.12:
                other = rng.choice(level2)[0]
                if other != kid:
                    parents.append(other)
            add(label, sorted(parents), synonyms)
            count_level3 += 1
    return classes


def perturb(rng: random.Random, text: str) -> str:
    kind = rng.random()
    if kind < 0.45:
        # plural form
        return text + "s" if not text.endswith("s") else text
    if kind < 0.8:
        # one-character typo
        i = rng.randrange(1, len(text) - 1)
        return text[:i] + text[i + 1 :]
    # word swap keeps the vocabulary but reorders it
    words = text.split()
    if len(words) >= 2:
        words = words[1:] + words[:1]
        return " ".join(words)
    return text + "x"


def build_source(rng: random.Random, target_classes):
    matchable = [c for c in target_classes if c["id"] != "tgt:0000"]
    mirrored = rng.sample(matchable, 120)
    classes = [{"id": "src:0000", "label": "Source Entity Root"}]
    reference: list[tuple[str, str]] = []
    for i, target in enumerate(mirrored, start=1):
        descriptions = [target["label"], *target.get("synonyms", [])]
        base = rng.choice(descriptions)
        roll = rng.random()
        if roll < 0.4:
            label = base  # exact description copy
        elif roll < 0.8:
            label = perturb(rng, base)
        else:
            label = perturb(rng, perturb(rng, base))
        cid = f"src:{i:04d}"
        obj = {"id": cid, "label": label, "parents": ["src:0000"]}
        if rng.random() < 0.3:
            obj["synonyms"] = [target["label"]]
        classes.append(obj)
        reference.append((cid, target["id"]))

    for i in range(121, 201):
        words = [rng.choice(QUALIFIERS), rng.choice(("cosmic", "digital", "abstract")), rng.choice(("token", "matrix", "cluster"))]
        classes.append(
            {
                "id": f"src:{i:04d}",
                "label": _title(words) + f" {i}",
                "parents": ["src:0000"],
            }
        )
    return classes, reference


def main() -> None:
    rng = random.Random(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    target = build_target(rng)
    source, reference = build_source(rng, target)

    with open(OUT_DIR / "toybench_tgt.jsonl", "w", encoding="utf-8") as handle:
        for obj in target:
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
    with open(OUT_DIR / "toybench_src.jsonl", "w", encoding="utf-8") as handle:
        for obj in source:
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
    with open(OUT_DIR / "toybench_reference.tsv", "w", encoding="utf-8") as handle:
        handle.write("SrcEntity\tTgtEntity\tScore\n")
        for source_id, target_id in sorted(reference):
            handle.write(f"{source_id}\t{target_id}\t1.000000\n")
    print(f"target classes: {len(target)}")
    print(f"source classes: {len(source)}")
    print(f"reference pairs: {len(reference)}")


if __name__ == "__main__":
    main()
