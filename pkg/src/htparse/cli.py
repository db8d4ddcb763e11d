"""Command-line front end: ``htparse {train,parse,eval,sample}``.

Exit codes: 0 success, 2 unreadable input, 3 invalid configuration or a
model whose dimensions disagree with the requested ones, 4 gold/prediction
misalignment.  Log verbosity comes from ``HTPARSE_LOG_LEVEL``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError, ModelConfig, TrainConfig
from .corpus import ConllError, build_vocab, is_projective, read_conll, write_conll
from .evaluation import AlignmentError, evaluate
from .model import ParserModel
from .nn.serialize import ModelFileError, ShapeMismatchError
from .sample import write_sample
from .training import train

log = logging.getLogger("htparse")

EXIT_INPUT, EXIT_CONFIG, EXIT_ALIGN = 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_config_flags(p: argparse.ArgumentParser, cls, skip=()) -> None:
    """One flag per config field; defaults stay None so only explicit flags override."""
    group = p.add_argument_group(f"{cls.__name__} overrides")
    for f in fields(cls):
        if f.name in skip:
            continue
        if f.type == "bool":
            group.add_argument(_flag(f.name), dest=f.name, action=argparse.BooleanOptionalAction,
                               default=None, help=f"default {f.default}")
        else:
            kind = int if f.type == "int" else float
            group.add_argument(_flag(f.name), dest=f.name, type=kind, default=None,
                               help=f"default {f.default}")


def _overrides(args, cls) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(cls)
            if getattr(args, f.name, None) is not None}


def _load_config_file(path) -> tuple[dict, dict]:
    """Split a JSON config into model and training keys; unknown keys are errors."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}", EXIT_INPUT)
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", EXIT_CONFIG)
    if not isinstance(raw, dict):
        raise CliError(f"config {path} must hold a JSON object", EXIT_CONFIG)
    model_keys = {f.name for f in fields(ModelConfig)}
    train_keys = {f.name for f in fields(TrainConfig)}
    unknown = sorted(set(raw) - model_keys - train_keys)
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(unknown)}", EXIT_CONFIG)
    return ({k: v for k, v in raw.items() if k in model_keys},
            {k: v for k, v in raw.items() if k in train_keys})


def _read(path, pos_column="cpos"):
    try:
        return read_conll(path, pos_column=pos_column)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT)
    except ConllError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT)


def cmd_train(args) -> int:
    model_kw, train_kw = _load_config_file(args.config) if args.config else ({}, {})
    model_kw.update(_overrides(args, ModelConfig))
    train_kw.update(_overrides(args, TrainConfig))
    try:
        model_config = ModelConfig(**model_kw)
        train_config = TrainConfig(**train_kw)
    except (ConfigError, TypeError) as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_CONFIG)
    sentences = _read(args.train, args.pos_column)
    dev = _read(args.dev, args.pos_column) if args.dev else None
    usable = [s for s in sentences if s.arcs is not None and is_projective(s)]
    if not usable:
        raise CliError(f"{args.train}: no projective annotated sentences", EXIT_INPUT)
    skipped = len(sentences) - len(usable)
    if skipped:
        log.info("skipped=%d reason=non-projective-or-unannotated", skipped)
    vocab = build_vocab(usable, unlabeled=None if model_config.labeled else "dep")
    model = ParserModel(model_config, vocab, seed=train_config.seed)
    if args.embeddings:
        try:
            hits = model.load_embeddings(args.embeddings)
        except OSError as exc:
            raise CliError(f"cannot read {args.embeddings}: {exc.strerror}", EXIT_INPUT)
        except ValueError as exc:
            raise CliError(f"{args.embeddings}: {exc}", EXIT_CONFIG)
        log.info("embeddings=%s hits=%d", args.embeddings, hits)
    train(usable, model_config, train_config, dev=dev, model=model)
    model.save(args.model, extra={"train_config": train_config.to_dict()})
    log.info("model=%s parameters=%d", args.model, sum(p.value.size for p in model.store))
    return 0


def _load_model(path) -> ParserModel:
    try:
        model, _ = ParserModel.load(path)
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc.strerror}", EXIT_INPUT)
    except ShapeMismatchError as exc:
        raise CliError(f"model {path}: {exc}", EXIT_CONFIG)
    except ModelFileError as exc:
        raise CliError(f"model {path}: {exc}", EXIT_INPUT)
    return model


def cmd_parse(args) -> int:
    model = _load_model(args.model)
    requested = _overrides(args, ModelConfig)
    embedded = model.config.to_dict()
    clash = {k: (v, embedded[k]) for k, v in requested.items() if embedded[k] != v}
    if clash:
        detail = ", ".join(f"{k}: requested {a}, model has {b}" for k, (a, b) in sorted(clash.items()))
        raise CliError(f"model {args.model} disagrees with requested dimensions ({detail})", EXIT_CONFIG)
    sentences = _read(args.input, args.pos_column)
    parsed = model.parse_all(sentences)
    write_conll(parsed, args.output)
    if any(s.arcs is not None for s in sentences):
        gold_path = Path(str(args.output) + ".gold")
        write_conll(sentences, gold_path)
        log.info("gold=%s", gold_path)
    log.info("parsed=%d output=%s", len(parsed), args.output)
    return 0


def cmd_eval(args) -> int:
    gold = _read(args.gold, args.pos_column)
    pred = _read(args.pred, args.pos_column)
    kw = {}
    if args.include_punct:
        kw["punct_tags"] = None
    elif args.punct_tags:
        kw["punct_tags"] = args.punct_tags.split(",")
    try:
        report = evaluate(gold, pred, **kw)
    except AlignmentError as exc:
        raise CliError(f"cannot align {args.gold} and {args.pred}: {exc}", EXIT_ALIGN)
    print(report.text())
    print(report.keyvalues())
    return 0


def cmd_sample(args) -> int:
    train_path, dev_path = write_sample(args.out, args.size, args.seed, args.dev_size)
    log.info("train=%s dev=%s", train_path, dev_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htparse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a parser on a CoNLL treebank")
    p.add_argument("--train", required=True, help="training treebank (CoNLL)")
    p.add_argument("--dev", help="development treebank; keeps the best-UAS epoch")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--config", help="JSON file with model and training settings")
    p.add_argument("--embeddings", help="pre-trained word vectors (word v1 v2 ... per line)")
    p.add_argument("--pos-column", choices=["cpos", "pos"], default="cpos")
    _add_config_flags(p, ModelConfig)
    _add_config_flags(p, TrainConfig)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse a CoNLL file with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--pos-column", choices=["cpos", "pos"], default="cpos")
    _add_config_flags(p, ModelConfig)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="attachment scores of a prediction against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--pos-column", choices=["cpos", "pos"], default="cpos")
    p.add_argument("--punct-tags", help="comma-separated gold POS tags to exclude")
    p.add_argument("--include-punct", action="store_true", help="score every token")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="write a synthetic train/dev treebank")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--dev-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_sample)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("HTPARSE_LOG_LEVEL", "INFO").upper()
    root = logging.getLogger("htparse")
    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.INFO))
    root.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"htparse {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
