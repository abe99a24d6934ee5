"""Adapter commands: train a checkpoint, serve it over the wire protocol."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import AdapterError
from .model import AdapterConfig
from .server import ModelBackend, StubBackend, serve_stdio, serve_tcp
from .training import load_model, train


def cmd_train(args: argparse.Namespace) -> int:
    manifest = args.manifest or str(Path(args.corpus).parent / "manifest.json")
    config = AdapterConfig(
        d_model=args.d_model,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
    )
    result = train(
        args.corpus,
        manifest,
        args.out,
        config,
        target_accuracy=args.target_accuracy,
        resume_from=args.resume,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    print(f"train_accuracy={result['train_accuracy']:.4f}")
    print(f"epochs_run={result['epochs_run']}")
    print(f"checkpoint={args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    if args.stub:
        backend = StubBackend()
    else:
        if not args.checkpoint:
            print("error: serve needs --checkpoint (or --stub)", file=sys.stderr)
            return 1
        backend = ModelBackend(load_model(args.checkpoint))
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        serve_tcp(backend, host or "127.0.0.1", int(port))
    else:
        serve_stdio(backend)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontoalign-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a checkpoint on a corpus file")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--manifest", default=None, help="defaults to manifest.json beside the corpus")
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--resume", default=None, help="checkpoint directory to resume from")
    p_train.add_argument("--epochs", type=int, default=300)
    p_train.add_argument("--batch-size", type=int, default=20)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--d-model", type=int, default=128)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--target-accuracy", type=float, default=1.0)
    p_train.set_defaults(func=cmd_train)

    p_serve = sub.add_parser("serve", help="answer wire-protocol requests")
    p_serve.add_argument("--checkpoint", default=None)
    p_serve.add_argument("--stub", action="store_true", help="deterministic weight-free backend")
    p_serve.add_argument("--stdio", action="store_true", help="serve over stdin/stdout (default)")
    p_serve.add_argument("--tcp", default=None, help="serve on host:port instead of stdio")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
