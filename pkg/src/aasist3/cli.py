"""Command-line entry point: ``aasist3 <command> ...``.

Results go to stdout, diagnostics to stderr.  Exit status is 0 on success,
1 on a runtime error or a failed check and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import DEFAULT_CONFIG_TEXT, POCKET_CONFIG_TEXT, Config, load_config
from .corpus import SPLITS, load_trials, split_protocol_path, write_toy_corpus
from .errors import Aasist3Error
from .eval.metrics import compute_eer, compute_min_dcf
from .eval.protocol import ScoreRecord, parse_protocol, read_scores, split_by_label, write_scores
from .model import Aasist3Model, fuse_scores, score_utterance


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def cmd_make_toy_data(args) -> int:
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise Aasist3Error(f"{out} exists and is not empty (use --force to overwrite)")
    trials = write_toy_corpus(out, args.n, args.seed)
    print(json.dumps({"out": str(out), "utterances": len(trials), "seed": args.seed}))
    return 0


def cmd_train(args) -> int:
    from .train import train_loop

    config = load_config(args.config) if args.config else Config()
    data = Path(args.data)
    if not data.is_dir():
        raise Aasist3Error(f"data directory {data} does not exist")
    train_protocol = split_protocol_path(data, "train")
    if not train_protocol.is_file():
        train_protocol = data / "protocol.txt"
    _, train_set = load_trials(train_protocol)
    dev_protocol = split_protocol_path(data, "dev")
    dev_set = load_trials(dev_protocol)[1] if dev_protocol.is_file() else None
    out = Path(args.out)
    log_path = Path(args.log) if args.log else out.with_name(out.name + ".metrics.jsonl")
    with log_path.open("w") as log_file:

        def emit(record):
            line = json.dumps(record)
            print(line, flush=True)
            log_file.write(line + "\n")
            log_file.flush()

        model = Aasist3Model(config.model)
        train_loop(model, train_set, config.train, dev_set, [emit], checkpoint_path=out)
    save_checkpoint(model, out)
    return 0


def cmd_score(args) -> int:
    if len(args.ckpt) > 1 and not args.fuse:
        raise Aasist3Error("several checkpoints given; pass --fuse to average them")
    config = load_config(args.config).model if args.config else None
    models = [load_checkpoint(path, config) for path in args.ckpt]
    trials, items = load_trials(args.protocol)
    records = [ScoreRecord(u.utterance_id, fuse_scores(score_utterance(u.signal, m) for m in models)) for u in items]
    write_scores(args.out, records)
    print(json.dumps({"scored": len(records), "out": str(args.out), "models": len(models)}))
    return 0


def cmd_eval(args) -> int:
    metrics = load_config(args.config).metrics if args.config else None
    p_target = args.p_target if args.p_target is not None else (metrics.p_target if metrics else 0.05)
    c_miss = args.c_miss if args.c_miss is not None else (metrics.c_miss if metrics else 1.0)
    c_fa = args.c_fa if args.c_fa is not None else (metrics.c_fa if metrics else 10.0)
    bona, spoof = split_by_label(read_scores(args.scores), parse_protocol(args.protocol))
    eer = compute_eer(bona, spoof, args.eer_method)
    dcf = compute_min_dcf(bona, spoof, p_target, c_miss, c_fa)
    print(f"EER {100 * eer.eer:.4f}%")
    print(f"minDCF {dcf.min_dcf:.4f}")
    return 0


def cmd_gradcheck(args) -> int:
    from .diagnostics import run_gradcheck_suite

    config = load_config(args.config).model if args.config else None
    results = run_gradcheck_suite(args.module or None, seed=args.seed, config=config)
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.name:<16} max_rel_err {r.error:.3e}  tol {r.tolerance:.0e}  {status}")
    return 0 if all(r.passed for r in results) else 1


def cmd_default_config(args) -> int:
    sys.stdout.write(POCKET_CONFIG_TEXT if args.pocket else DEFAULT_CONFIG_TEXT)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aasist3", description="Audio anti-spoofing with KAN graph attention.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-toy-data", help="write a synthetic bona fide / spoof corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=_positive_int, required=True, help="utterances per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="allow writing into a non-empty directory")
    p.set_defaults(func=cmd_make_toy_data)

    p = sub.add_parser("train", help="train a model on a corpus directory")
    p.add_argument("--config", help="YAML configuration document (defaults to the full-size model)")
    p.add_argument("--data", required=True, help=f"corpus directory with protocol_{{{','.join(SPLITS)}}}.txt or protocol.txt")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", help="metrics log (JSON lines); default <out>.metrics.jsonl")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score every trial of a protocol")
    p.add_argument("--ckpt", required=True, nargs="+")
    p.add_argument("--protocol", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fuse", action="store_true", help="average the scores of all checkpoints")
    p.add_argument("--config", help="require checkpoints to match this configuration")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="EER and minDCF of a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--protocol", required=True)
    p.add_argument("--config", help="take metric parameters from this configuration")
    p.add_argument("--p-target", type=float)
    p.add_argument("--c-miss", type=float)
    p.add_argument("--c-fa", type=float)
    p.add_argument("--eer-method", choices=["rocch", "crossing"], default="rocch")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--config", help="model configuration for the full-model check (default: pocket)")
    p.add_argument("--module", action="append", help="restrict to a layer (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("default-config", help="print a commented configuration document")
    p.add_argument("--pocket", action="store_true", help="the tiny test configuration")
    p.set_defaults(func=cmd_default_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Aasist3Error, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
