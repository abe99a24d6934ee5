"""Training loop and checkpoint management for the byte translator."""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

import torch
from torch import nn

from .data import Sample, check_manifest, read_samples
from .model import AdapterConfig, BOS, EOS, PAD, ByteSeq2Seq, encode_text


def corpus_hash(corpus_path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(corpus_path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _batches(samples: list[Sample], config: AdapterConfig, rng: random.Random):
    order = list(range(len(samples)))
    rng.shuffle(order)
    for start in range(0, len(order), config.batch_size):
        chunk = [samples[i] for i in order[start : start + config.batch_size]]
        src_ids = [encode_text(s.model_input, config.max_source_len) or [EOS] for s in chunk]
        tgt_ids = [
            [BOS] + encode_text(s.target_text, config.max_target_len - 2) + [EOS]
            for s in chunk
        ]
        src_len = max(len(x) for x in src_ids)
        tgt_len = max(len(x) for x in tgt_ids)
        src = torch.full((len(chunk), src_len), PAD, dtype=torch.long)
        tgt = torch.full((len(chunk), tgt_len), PAD, dtype=torch.long)
        for i, (s_row, t_row) in enumerate(zip(src_ids, tgt_ids)):
            src[i, : len(s_row)] = torch.tensor(s_row)
            tgt[i, : len(t_row)] = torch.tensor(t_row)
        yield src, tgt


def exact_sequence_accuracy(model: ByteSeq2Seq, samples: list[Sample]) -> float:
    """Fraction of samples whose free-running greedy output equals the target."""
    correct = 0
    for sample in samples:
        if model.greedy_generate(sample.model_input) == sample.target_text:
            correct += 1
    return correct / len(samples)


def train(
    corpus_path: str | Path,
    manifest_path: str | Path,
    out_dir: str | Path,
    config: AdapterConfig,
    target_accuracy: float = 1.0,
    resume_from: str | Path | None = None,
    log=print,
) -> dict:
    """Train (or resume) on one corpus file and write a checkpoint directory.

    Returns a result summary with per-epoch losses and the final
    exact-sequence accuracy on the training set. Training stops early once
    ``target_accuracy`` is reached.
    """
    samples = read_samples(corpus_path)
    manifest = check_manifest(samples, manifest_path)

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    model = ByteSeq2Seq(config)
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=config.learning_rate,
        weight_decay=config.weight_decay,
        eps=config.adam_eps,
    )
    steps_per_epoch = max(1, (len(samples) + config.batch_size - 1) // config.batch_size)
    total_steps = max(1, config.epochs * steps_per_epoch)
    warmup_steps = max(1, int(config.warmup_epochs * steps_per_epoch))

    def lr_lambda(step: int) -> float:
        if step < warmup_steps:
            return (step + 1) / warmup_steps
        remaining = max(1, total_steps - warmup_steps)
        return max(0.05, 1.0 - (step - warmup_steps) / remaining)

    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
    start_epoch = 0
    if resume_from is not None:
        start_epoch = _load_state(resume_from, model, optimizer, scheduler, rng)

    criterion = nn.CrossEntropyLoss(ignore_index=PAD)
    epoch_losses: list[float] = []
    accuracy = 0.0
    for epoch in range(start_epoch, config.epochs):
        model.train()
        total_loss, batches = 0.0, 0
        for src, tgt in _batches(samples, config, rng):
            optimizer.zero_grad()
            logits = model(src, tgt[:, :-1])
            loss = criterion(logits.reshape(-1, logits.size(-1)), tgt[:, 1:].reshape(-1))
            loss.backward()
            optimizer.step()
            scheduler.step()
            total_loss += float(loss.detach())
            batches += 1
        epoch_losses.append(total_loss / batches)
        if (epoch + 1) % 10 == 0 or epoch + 1 == config.epochs:
            accuracy = exact_sequence_accuracy(model, samples)
            log(
                f"epoch {epoch + 1}/{config.epochs} loss {epoch_losses[-1]:.4f} "
                f"train exact-seq acc {accuracy:.3f}"
            )
            if accuracy >= target_accuracy:
                break

    if accuracy == 0.0:
        accuracy = exact_sequence_accuracy(model, samples)

    result = {
        "epochs_run": len(epoch_losses) + start_epoch,
        "losses": epoch_losses,
        "train_accuracy": accuracy,
        "samples": len(samples),
    }
    _save_checkpoint(out_dir, model, optimizer, scheduler, rng, config, manifest,
                     corpus_hash(corpus_path), result)
    return result


def _save_checkpoint(out_dir, model, optimizer, scheduler, rng, config, manifest,
                     corpus_digest, result) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", encoding="utf-8") as handle:
        json.dump(
            {
                "config": config.to_dict(),
                "corpus_hash": corpus_digest,
                "manifest": manifest,
                "result": {k: v for k, v in result.items() if k != "losses"},
            },
            handle,
            indent=2,
            sort_keys=True,
        )
    torch.save(model.state_dict(), out / "model.pt")
    torch.save(
        {
            "optimizer": optimizer.state_dict(),
            "scheduler": scheduler.state_dict(),
            "torch_rng": torch.get_rng_state(),
            "shuffle_rng": rng.getstate(),
            "epochs_run": result["epochs_run"],
        },
        out / "trainer.pt",
    )
    with open(out / "result.json", "w", encoding="utf-8") as handle:
        json.dump(result, handle, indent=2, sort_keys=True)


def _load_state(checkpoint_dir, model, optimizer, scheduler, rng) -> int:
    ckpt = Path(checkpoint_dir)
    model.load_state_dict(torch.load(ckpt / "model.pt", weights_only=True))
    trainer = torch.load(ckpt / "trainer.pt", weights_only=False)
    optimizer.load_state_dict(trainer["optimizer"])
    scheduler.load_state_dict(trainer["scheduler"])
    torch.set_rng_state(trainer["torch_rng"])
    rng.setstate(trainer["shuffle_rng"])
    return int(trainer["epochs_run"])


def load_model(checkpoint_dir: str | Path) -> ByteSeq2Seq:
    ckpt = Path(checkpoint_dir)
    with open(ckpt / "config.json", "r", encoding="utf-8") as handle:
        config = AdapterConfig.from_dict(json.load(handle)["config"])
    model = ByteSeq2Seq(config)
    model.load_state_dict(torch.load(ckpt / "model.pt", weights_only=True))
    model.eval()
    return model
