"""Command-line entry point: ingest, featurize, train, predict, evaluate, synth.

Exit status: 0 on success, 1 on runtime failure, 2 on usage or input errors.
Every option can also come from a YAML or JSON file given with ``--config``;
options on the command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import ccm
from .arff import to_arff
from .content import build_codebook
from .corpus import CorpusError, build_corpus, clean_email, load_corpus, write_jsonl
from .evaluation import (EXPERIMENTS, EvaluationError, InconclusiveError, KwReference, format_table,
                         kruskal_wallis_unknown, plot_rows, reports_json, run_experiment_suite)
from .stylometry import GROUPS, SchemaError, StyleConfig, build_schema, feature_matrix, read_lexicon
from .synthetic import generate_raw_emails

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flag values or unreadable/malformed inputs (exit 2)."""


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- argument handling --------------------------------------------------------

def _corpus_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--corpus", required=required, help="corpus path (JSON lines file or author directory tree)")
    p.add_argument("--format", choices=("jsonl", "author-dirs"), default="jsonl", help="corpus layout")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="top-level cluster count (default ceil(sqrt(#authors)))")
    p.add_argument("--min-term-freq", type=int, default=3, help="minimum total corpus frequency of a content term")
    p.add_argument("--top-terms", type=int, default=1000, help="number of IG-ranked content terms kept")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--C", type=float, default=1.0, dest="C", help="SVM regularization constant")
    p.add_argument("--function-words", default=None, help="function-word list file (one per line)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emailauthor", description="Email authorship attribution")
    parser.add_argument("--config", default=None, help="YAML/JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean a raw corpus and write it as JSON lines")
    _corpus_args(p)
    p.add_argument("--output", required=True)

    p = sub.add_parser("featurize", help="export the assembled feature matrix")
    _corpus_args(p)
    _model_args(p)
    p.add_argument("--model", default=None, help="reuse this model's schema and codebook")
    p.add_argument("--groups", default=",".join(GROUPS), help="feature groups to include")
    p.add_argument("--output", default=None, help="CSV output (id, author, features...)")
    p.add_argument("--arff", default=None, help="ARFF output")
    p.add_argument("--codebook-dump", default=None, help="plain-text codebook listing")

    p = sub.add_parser("train", help="train a cluster-based model")
    _corpus_args(p)
    _model_args(p)
    p.add_argument("--model", required=True, help="output model file")

    p = sub.add_parser("predict", help="attribute emails with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="emails to attribute (author field optional)")
    p.add_argument("--format", choices=("jsonl", "author-dirs"), default="jsonl")
    p.add_argument("--output", default=None, help="TSV output (default stdout)")
    p.add_argument("--check-unknown", action="store_true", help="add the Kruskal-Wallis Known/Unknown flag")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--kw-method", choices=("reference", "chi2"), default="reference")

    p = sub.add_parser("evaluate", help="run the cross-validated experiment suite")
    _corpus_args(p)
    _model_args(p)
    p.add_argument("--experiments", default="1,2,3,4,5", help="comma-separated experiment ids (1-5)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--output", default=None, help="JSON report file")
    p.add_argument("--plot-data", default=None, help="TSV of (n_authors, experiment, accuracy)")

    p = sub.add_parser("synth", help="write a synthetic corpus")
    p.add_argument("--authors", type=int, default=10)
    p.add_argument("--emails-per-author", type=int, default=600)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", required=True)
    for p in sub.choices.values():
        p.add_argument("--config", default=argparse.SUPPRESS, help="YAML/JSON file of option defaults")
    return parser


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise UsageError(f"config file {path} is not valid: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a mapping of option names to values")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known_args, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known_args.config:
        values = _load_config(known_args.config)
        subparsers = parser._subparsers._group_actions[0].choices
        recognised = set()
        for subparser in subparsers.values():
            dests = {a.dest for a in subparser._actions}
            recognised |= dests
            for action in subparser._actions:
                if action.dest in values:
                    action.required = False
            subparser.set_defaults(**{k: v for k, v in values.items() if k in dests})
        unknown = sorted(set(values) - recognised)
        if unknown:
            raise UsageError(f"unknown option(s) in config file: {', '.join(unknown)}")
    args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args: argparse.Namespace) -> None:
    def check(cond: bool, message: str) -> None:
        if not cond:
            raise UsageError(message)

    if hasattr(args, "k") and args.k is not None:
        check(args.k >= 1, "--k must be >= 1")
    if hasattr(args, "min_term_freq"):
        check(args.min_term_freq >= 1, "--min-term-freq must be >= 1")
        check(args.top_terms >= 0, "--top-terms must be >= 0")
        check(args.max_depth >= 0, "--max-depth must be >= 0")
        check(args.C > 0, "--C must be > 0")
    if hasattr(args, "folds"):
        check(args.folds >= 2, "--folds must be >= 2")
    if hasattr(args, "alpha"):
        check(0 < args.alpha < 1, "--alpha must lie in (0, 1)")
    if args.command == "synth":
        check(args.authors >= 1, "--authors must be >= 1")
        check(args.emails_per_author >= 1, "--emails-per-author must be >= 1")
    if args.command == "evaluate":
        raw = args.experiments
        parts = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
        try:
            ids = [int(x) for x in parts if str(x).strip()]
        except ValueError:
            raise UsageError(f"--experiments must be comma-separated integers, got {args.experiments!r}") from None
        bad = [i for i in ids if i not in EXPERIMENTS]
        check(not bad and bool(ids), f"experiment ids must be in 1-5, got {args.experiments!r}")
        args.experiments = ids
    for attr in ("corpus", "input"):
        path = getattr(args, attr, None)
        if path is not None:
            check(Path(path).exists(), f"{attr} path does not exist: {path}")
    if getattr(args, "model", None) and args.command == "predict":
        check(Path(args.model).exists(), f"model file does not exist: {args.model}")


# -- helpers ------------------------------------------------------------------

def _read_corpus(args):
    try:
        raws = load_corpus(args.corpus, args.format)
    except (CorpusError, OSError) as exc:
        raise UsageError(str(exc)) from None
    corpus = build_corpus(raws)
    if len(corpus) == 0:
        raise UsageError(f"corpus {args.corpus} holds no usable emails")
    return raws, corpus


def _style_config(args) -> StyleConfig:
    if getattr(args, "function_words", None):
        try:
            return StyleConfig(function_words=read_lexicon(args.function_words))
        except OSError as exc:
            raise UsageError(f"cannot read function-word list: {exc}") from None
    return StyleConfig()


def _params(args) -> ccm.CcmParams:
    return ccm.CcmParams(k=args.k, max_depth=args.max_depth, seed=args.seed, C=args.C)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def tree_summary(model: ccm.CcmModel) -> str:
    lines = [f"{'leaf':<16} {'depth':>5} {'kind':<10} {'emails':>6} {'authors':>7} {'ac':>7}"]
    for root in model.roots:
        for leaf in root.leaves():
            ac = f"{leaf.classifier.validation_accuracy:.3f}" if leaf.classifier is not None else "1.000"
            lines.append(f"{leaf.node_id:<16} {leaf.depth:>5} {leaf.kind:<10} {len(leaf.members):>6} "
                         f"{len(leaf.author_set):>7} {ac:>7}")
    return "\n".join(lines) + "\n"


# -- subcommands --------------------------------------------------------------

def cmd_ingest(args) -> int:
    try:
        raws = load_corpus(args.corpus, args.format)
    except (CorpusError, OSError) as exc:
        raise UsageError(str(exc)) from None
    cleaned = [c for c in (clean_email(r) for r in raws) if c is not None]
    buf = io.StringIO()
    for e in cleaned:
        buf.write(json.dumps({"id": e.id, "author": e.author, "body": e.body}, ensure_ascii=False) + "\n")
    write_atomic(args.output, buf.getvalue())
    print(f"read {len(raws)} emails, kept {len(cleaned)}, deleted {len(raws) - len(cleaned)}")
    return EXIT_OK


def cmd_featurize(args) -> int:
    _, corpus = _read_corpus(args)
    if args.model:
        model = ccm.load_model(args.model)
        schema, codebook, config = model.schema, model.codebook, model.config
    else:
        groups = [g.strip() for g in args.groups.split(",") if g.strip()]
        bad = [g for g in groups if g not in GROUPS]
        if bad or not groups:
            raise UsageError(f"--groups must be drawn from {','.join(GROUPS)}")
        config = _style_config(args)
        codebook = build_codebook(corpus, args.top_terms, args.min_term_freq) if "content" in groups else None
        schema = build_schema(config, codebook, groups)
    X = feature_matrix(corpus.emails, schema, codebook, config)
    if args.output:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "author", *schema.names])
        for e, row in zip(corpus.emails, X):
            w.writerow([e.id, e.author, *(repr(float(v)) for v in row)])
        write_atomic(args.output, buf.getvalue())
    if args.arff:
        write_atomic(args.arff, to_arff(X, schema.names, corpus.labels, classes=corpus.authors))
    if args.codebook_dump and codebook is not None:
        write_atomic(args.codebook_dump, codebook.dump())
    print(f"{X.shape[0]} emails x {X.shape[1]} features")
    return EXIT_OK


def cmd_train(args) -> int:
    _, corpus = _read_corpus(args)
    config = _style_config(args)
    codebook = build_codebook(corpus, args.top_terms, args.min_term_freq)
    schema = build_schema(config, codebook)
    model = ccm.train_ccm(corpus, schema, codebook, _params(args), config)
    ccm.save_model(model, args.model)
    print(f"trained on {len(corpus)} emails from {len(corpus.authors)} authors; "
          f"{len(schema)} features ({len(codebook.terms)} content terms)")
    sys.stdout.write(tree_summary(model))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = ccm.load_model(args.model)
    try:
        raws = load_corpus(args.input, args.format, require_author=False)
    except (CorpusError, OSError) as exc:
        raise UsageError(str(exc)) from None
    header = ["id", "author", "leaf", "score"]
    if args.check_unknown:
        header += ["unknown_check", "kw_h", "kw_p"]
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(header)
    references: dict[str, KwReference] = {}
    for raw in raws:
        email = clean_email(raw)
        if email is None:
            w.writerow([raw.id, "", "", ""] + (["deleted", "", ""] if args.check_unknown else []))
            continue
        author, leaf, score = model.predict_matrix(model.vectorize([email]))[0]
        row = [raw.id, author, leaf, f"{score:.6f}"]
        if args.check_unknown:
            try:
                if author not in references:
                    references[author] = KwReference.build(model.reference_content(author))
                res = kruskal_wallis_unknown(model, None, email, args.alpha, args.kw_method,
                                             reference=references[author])
                row += [res.verdict, f"{res.h:.6f}", f"{res.p_value:.6f}"]
            except InconclusiveError:
                row += ["Inconclusive", "", ""]
        w.writerow(row)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    _, corpus = _read_corpus(args)
    if args.folds > len(corpus):
        raise UsageError(f"--folds {args.folds} exceeds the {len(corpus)} emails in the corpus")
    reports = run_experiment_suite(corpus, args.experiments, seed=args.seed, folds=args.folds,
                                   top_k=args.top_terms, min_corpus_freq=args.min_term_freq,
                                   params=_params(args), config=_style_config(args))
    sys.stdout.write(format_table(reports))
    if args.output:
        write_atomic(args.output, reports_json(reports))
    if args.plot_data:
        write_atomic(args.plot_data, plot_rows(reports))
    return EXIT_OK


def cmd_synth(args) -> int:
    raws = generate_raw_emails(args.authors, args.emails_per_author, args.seed)
    path = Path(args.output)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write_jsonl(raws, tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    print(f"wrote {len(raws)} emails from {args.authors} authors to {args.output}")
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "featurize": cmd_featurize, "train": cmd_train, "predict": cmd_predict,
            "evaluate": cmd_evaluate, "synth": cmd_synth}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"emailauthor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"emailauthor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ccm.ModelError, SchemaError, EvaluationError, OSError, ValueError) as exc:
        print(f"emailauthor: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
