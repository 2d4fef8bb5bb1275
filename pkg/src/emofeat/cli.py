"""``emofeat`` command line.

Exit codes: 0 success, 1 usage, 2 invalid input data, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .pipeline import commands
from .pipeline.manifest import MODALITIES, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; route it to our usage code instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="emofeat", description="Feature extraction, training and attention lab.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic dataset with a manifest")
    s.add_argument("--modality", choices=MODALITIES, required=True)
    s.add_argument("--subjects", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    e = sub.add_parser("extract", help="turn manifest trials into a feature file")
    e.add_argument("--manifest", required=True)
    e.add_argument("--modality", choices=MODALITIES, required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--tag-index", action="store_true", help=argparse.SUPPRESS)

    t = sub.add_parser("train-eval", help="per-subject 70/30 training and evaluation")
    t.add_argument("--features", required=True)
    t.add_argument("--manifest", required=True)
    t.add_argument("--train-frac", type=float, default=0.7)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--config", default=None)
    t.add_argument("--report", required=True)
    t.add_argument("--modality", choices=MODALITIES, default=None)
    t.add_argument("--workers", type=int, default=1)

    a = sub.add_parser("attnlab", help="gradient checks and attention cost")
    asub = a.add_subparsers(dest="lab", required=True, parser_class=_Parser)
    g = asub.add_parser("gradcheck")
    g.add_argument("--seed", type=int, default=1)
    c = asub.add_parser("cost")
    c.add_argument("--frames", type=int, default=25)
    c.add_argument("--patches", type=int, default=196)
    return p


def _dispatch(args) -> dict:
    if args.command == "synth":
        return commands.cmd_synth(args.out, args.modality, args.subjects, args.trials, args.seed)
    if args.command == "extract":
        return commands.cmd_extract(args.manifest, args.modality, args.out, args.workers, args.tag_index)
    if args.command == "train-eval":
        rep = commands.cmd_train_eval(args.features, args.manifest, args.train_frac, args.seed,
                                      args.config, args.report, args.modality, args.workers)
        return {k: rep[k] for k in ("mean_accuracy", "std_accuracy", "mean_weighted_f1", "std_weighted_f1")}
    if args.lab == "gradcheck":
        return commands.cmd_attnlab("gradcheck", seed=args.seed)
    return commands.cmd_attnlab("cost", frames=args.frames, patches=args.patches)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        out = _dispatch(args)
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(out, sort_keys=True))
    if args.command == "attnlab" and args.lab == "gradcheck" and not out["passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
