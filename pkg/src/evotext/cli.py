"""Command-line entry point: train-victim, attack, evaluate, report."""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import hashlib
import json
import logging
import multiprocessing
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import yaml

from evotext import __version__, assets
from evotext.embeddings import EmbeddingFormatError, SynonymIndex, load_table
from evotext.engine import AttackConfig, AttackDeps, NoAttackableWordsError, run_attack
from evotext.evaluation import transferability
from evotext.perturb import QwertyMap, RemoteSequenceMutator
from evotext.remote import MalformedResponse, TransportError
from evotext.report import aggregate, attack_record, render_figures, skip_record, summary_table, write_summary_csv
from evotext.scorers import MeanEmbeddingEncoder, RemoteEncoder, RemoteLM, read_lines, train_ngram_lm
from evotext.text import preprocess
from evotext.victim import (
    CorpusError,
    DistributionError,
    NaiveBayesVictim,
    RemoteVictim,
    read_labeled_csv,
    train_bow,
)

log = logging.getLogger("evotext")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3
BUNDLED = "bundled"


class ValidationError(Exception):
    pass


@dataclass
class RunManifest:
    config: AttackConfig
    victim: str
    inputs: list  # [(raw, label-or-None)]
    general: str = BUNDLED
    counterfitted: str = BUNDLED
    qwerty: str = BUNDLED
    lm_corpus: str = BUNDLED
    lm_order: int = 3
    plugins: dict = field(default_factory=dict)
    out_dir: str = "evotext-out"
    parallel_sentences: int = 1


# -- manifest ----------------------------------------------------------------


def _resolve(base, path):
    if path in (None, BUNDLED):
        return BUNDLED
    path = os.path.expanduser(str(path))
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base, path))


def _read_inputs(spec, base):
    if not isinstance(spec, dict):
        raise ValidationError("'inputs' must be a mapping with 'csv' or 'text' (+ optional 'labels')")
    if "csv" in spec:
        path = _resolve(base, spec["csv"])
        if not os.path.isfile(path):
            raise ValidationError(f"inputs file not found: {path}")
        try:
            return [(text, label) for label, text in read_labeled_csv(path)]
        except CorpusError as exc:
            raise ValidationError(str(exc)) from None
    if "text" in spec:
        path = _resolve(base, spec["text"])
        if not os.path.isfile(path):
            raise ValidationError(f"inputs file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        labels = [None] * len(lines)
        if spec.get("labels"):
            lpath = _resolve(base, spec["labels"])
            if not os.path.isfile(lpath):
                raise ValidationError(f"labels file not found: {lpath}")
            with open(lpath, encoding="utf-8") as fh:
                labels = [ln.strip() for ln in fh if ln.strip()]
            if len(labels) != len(lines):
                raise ValidationError(f"{len(lines)} inputs but {len(labels)} labels")
        return list(zip(lines, labels))
    raise ValidationError("'inputs' needs a 'csv' or 'text' entry")


def load_manifest(path, overrides=None) -> RunManifest:
    """Read a YAML/JSON manifest; ``overrides`` (from CLI flags) win over it."""
    overrides = overrides or {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ValidationError(f"cannot read manifest: {exc}") from None
    except yaml.YAMLError as exc:
        raise ValidationError(f"manifest is not valid YAML/JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("manifest must be a mapping")
    base = os.path.dirname(os.path.abspath(path))

    attack = dict(doc.get("attack") or {})
    unknown = set(attack) - {f.name for f in dataclasses.fields(AttackConfig)}
    if unknown:
        raise ValidationError(f"unknown attack keys: {sorted(unknown)}")
    if "seed" not in attack and "EVOTEXT_SEED" in os.environ:
        attack["seed"] = os.environ["EVOTEXT_SEED"]
    attack.update({k: v for k, v in overrides.items() if k in {f.name for f in dataclasses.fields(AttackConfig)} and v is not None})
    try:
        if "seed" in attack:
            attack["seed"] = int(attack["seed"])
        config = AttackConfig(**attack)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid attack configuration: {exc}") from None

    victim = overrides.get("victim") or doc.get("victim")
    if not victim:
        raise ValidationError("manifest needs a 'victim' (builtin:<file> or remote:<url>)")
    kind, _, target = str(victim).partition(":")
    if kind == "builtin":
        victim = "builtin:" + _resolve(base, target)
    elif kind != "remote" or not target:
        raise ValidationError(f"victim must be builtin:<file> or remote:<url>, got {victim!r}")

    asset_doc = doc.get("assets") or {}
    out_dir = overrides.get("out") or doc.get("output") or "evotext-out"
    return RunManifest(
        config=config,
        victim=str(victim),
        inputs=_read_inputs(doc.get("inputs"), base),
        general=_resolve(base, asset_doc.get("general")),
        counterfitted=_resolve(base, asset_doc.get("counterfitted")),
        qwerty=_resolve(base, asset_doc.get("qwerty")),
        lm_corpus=_resolve(base, asset_doc.get("lm_corpus")),
        lm_order=int(asset_doc.get("lm_order", 3)),
        plugins={k: v for k, v in (doc.get("plugins") or {}).items() if v},
        out_dir=_resolve(os.getcwd(), out_dir) if overrides.get("out") else _resolve(base, out_dir),
        parallel_sentences=int(overrides.get("parallel_sentences") or doc.get("parallel_sentences") or 1),
    )


def build_deps(m: RunManifest) -> AttackDeps:
    """Load and validate every asset; issues no victim query."""
    try:
        general = assets.general_table() if m.general == BUNDLED else load_table(m.general)
        counter = assets.counterfitted_table() if m.counterfitted == BUNDLED else load_table(m.counterfitted)
        qwerty = QwertyMap.load(None if m.qwerty == BUNDLED else m.qwerty)
        sents = assets.lm_sentences() if m.lm_corpus == BUNDLED else read_lines(m.lm_corpus)
        kind, _, target = m.victim.partition(":")
        victim = NaiveBayesVictim.load(target) if kind == "builtin" else RemoteVictim(target)
    except (OSError, EmbeddingFormatError, ValueError, KeyError) as exc:
        raise ValidationError(f"asset validation failed: {exc}") from None
    if m.config.mutator == "sequence" and "mutator" not in m.plugins:
        raise ValidationError("mutator 'sequence' needs plugins.mutator endpoint")
    encoder = RemoteEncoder(m.plugins["encoder"]) if "encoder" in m.plugins else MeanEmbeddingEncoder(general)
    try:
        lm = RemoteLM(m.plugins["lm"]) if "lm" in m.plugins else train_ngram_lm(sents, order=m.lm_order)
    except ValueError as exc:
        raise ValidationError(f"language model: {exc}") from None
    return AttackDeps(
        victim=victim,
        synonyms=SynonymIndex(general, counter, m.config.delta, m.config.k_nn),
        encoder=encoder,
        lm=lm,
        qwerty=qwerty,
        seq_mutator=RemoteSequenceMutator(m.plugins["mutator"]) if "mutator" in m.plugins else None,
    )


def derive_seed(root: int, index: int) -> int:
    digest = hashlib.sha256(f"{root}:{index}".encode()).hexdigest()
    return int(digest[:12], 16)


# -- attack ------------------------------------------------------------------

_WORKER = {}


def attack_one(idx, raw, label, config, deps, table):
    """Attack one input; returns (record, trace records)."""
    toks = preprocess(raw).tokens
    if len(toks) < 2:
        return skip_record(idx, raw, label, "too-short"), []
    base = deps.victim.classify(toks)
    if label is not None and base.label != label:
        return skip_record(idx, raw, label, "misclassified", base.label), []
    cfg = dataclasses.replace(config, seed=derive_seed(config.seed, idx))
    try:
        outcome = run_attack(raw, cfg, deps, attack_id=idx)
    except NoAttackableWordsError:
        rec = {"id": idx, "status": "failure", "reason": "no-attackable-words", "raw": raw,
               "original": " ".join(toks), "label": base.label, "adversary": None, "queries": 1}
        return rec, []
    return attack_record(outcome, table), outcome.trace


def _attack_in_worker(args):
    idx, raw, label = args
    return attack_one(idx, raw, label, _WORKER["config"], _WORKER["deps"], _WORKER["table"])


def run_manifest(m: RunManifest, deps: AttackDeps):
    table = deps.encoder.table if isinstance(deps.encoder, MeanEmbeddingEncoder) else deps.synonyms.general
    jobs = [(i, raw, label) for i, (raw, label) in enumerate(m.inputs)]
    if m.parallel_sentences > 1 and len(jobs) > 1:
        _WORKER.update(config=m.config, deps=deps, table=table)
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(m.parallel_sentences, mp_context=ctx) as pool:
            results = list(pool.map(_attack_in_worker, jobs))
    else:
        results = [attack_one(i, raw, label, m.config, deps, table) for i, raw, label in jobs]
    records = [r for r, _ in results]
    trace = [t for _, tr in results for t in tr]
    return records, trace


def write_outputs(m: RunManifest, records, trace):
    os.makedirs(m.out_dir, exist_ok=True)
    body = {
        "version": __version__,
        "config": dataclasses.asdict(m.config),
        "victim": m.victim,
        "records": records,
        "aggregate": aggregate(records),
    }
    report = {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(), "body": body}
    rpath = os.path.join(m.out_dir, "report.json")
    with open(rpath, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    tpath = os.path.join(m.out_dir, "trace.jsonl")
    with open(tpath, "w", encoding="utf-8") as fh:
        for rec in trace:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    return rpath, tpath, body["aggregate"]


def cmd_attack(args) -> int:
    overrides = {
        "mode": args.mode, "mutator": args.mutator, "popsize": args.popsize, "delta": args.delta,
        "alpha": args.alpha, "max_iters": args.max_iters, "seed": args.seed, "victim": args.victim,
        "out": args.out, "parallel_sentences": args.parallel_sentences,
    }
    try:
        m = load_manifest(args.manifest, overrides)
        deps = build_deps(m)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        records, trace = run_manifest(m, deps)
    except (TransportError, MalformedResponse, DistributionError) as exc:
        print(f"error: attack aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    rpath, tpath, agg = write_outputs(m, records, trace)
    print(summary_table(agg))
    print(f"report: {rpath}\ntrace:  {tpath}")
    return EXIT_OK


# -- train-victim ------------------------------------------------------------


def cmd_train_victim(args) -> int:
    try:
        rows = assets.corpus() if args.corpus == BUNDLED else read_labeled_csv(args.corpus)
    except (CorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    train, test = assets.holdout_split(rows)
    try:
        model = train_bow(train, smoothing=args.smoothing)
    except (CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    model.save(args.out)
    if test:
        correct = sum(1 for label, text in test if preprocess(text).tokens and model.classify(text).label == label)
        print(f"holdout accuracy: {100.0 * correct / len(test):.2f}% ({correct}/{len(test)})")
    print(f"model: {args.out}")
    return EXIT_OK


# -- evaluate ----------------------------------------------------------------


def _load_report(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return doc.get("body", doc)


def cmd_evaluate(args) -> int:
    try:
        body = _load_report(args.report)
        kind, _, target = args.victim.partition(":")
        if kind == "builtin":
            model_b = NaiveBayesVictim.load(target)
        elif kind == "remote" and target:
            model_b = RemoteVictim(target)
        else:
            raise ValueError(f"bad victim spec {args.victim!r}")
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    wins = [r for r in body.get("records", []) if r.get("status") == "success"]
    if not wins:
        print("error: report contains no successful adversaries", file=sys.stderr)
        return EXIT_VALIDATION
    pairs = [(preprocess(r["original"]).tokens, preprocess(r["adversary"]).tokens, r["label"]) for r in wins]
    try:
        pct, flags = transferability(pairs, model_b)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TransportError, MalformedResponse, DistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = {
        "source_report": os.path.abspath(args.report),
        "victim": args.victim,
        "transferability": pct,
        "samples": [{"id": r["id"], "transferred": f} for r, f in zip(wins, flags)],
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=1, sort_keys=True)
    kept = sum(f is not None for f in flags)
    print(f"transferability: {pct:.2f}% ({sum(bool(f) for f in flags)}/{kept} adversaries)")
    return EXIT_OK


# -- report ------------------------------------------------------------------


def cmd_report(args) -> int:
    try:
        body = _load_report(args.report)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    records = body.get("records", [])
    agg = aggregate(records)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.report))
    os.makedirs(out_dir, exist_ok=True)
    trace = None
    tpath = args.trace or os.path.join(os.path.dirname(os.path.abspath(args.report)), "trace.jsonl")
    if os.path.isfile(tpath):
        with open(tpath, encoding="utf-8") as fh:
            trace = [json.loads(line) for line in fh if line.strip()]
    csv_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(records, csv_path)
    figs = render_figures(records, out_dir, trace)
    print(summary_table(agg))
    print(f"summary: {csv_path}")
    for p in figs:
        print(f"figure:  {p}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evotext", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train-victim", help="train the built-in naive-Bayes victim")
    t.add_argument("--corpus", default=BUNDLED, help="label,text CSV (default: bundled mini corpus)")
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--smoothing", type=float, default=1.0)
    t.set_defaults(func=cmd_train_victim)

    a = sub.add_parser("attack", help="attack every input listed in a manifest")
    a.add_argument("manifest")
    a.add_argument("--mode", choices=["single", "combined"])
    a.add_argument("--mutator", choices=["glove", "sequence"])
    a.add_argument("--popsize", type=int)
    a.add_argument("--delta", type=float)
    a.add_argument("--alpha", type=float)
    a.add_argument("--max-iters", type=int)
    a.add_argument("--seed", type=int)
    a.add_argument("--victim", help="builtin:<model-file> or remote:<url>")
    a.add_argument("--out", help="output directory")
    a.add_argument("--parallel-sentences", type=int, metavar="N")
    a.set_defaults(func=cmd_attack)

    e = sub.add_parser("evaluate", help="transferability of a report's adversaries to another victim")
    e.add_argument("--report", required=True)
    e.add_argument("--victim", required=True, help="builtin:<model-file> or remote:<url>")
    e.add_argument("--out", help="JSON file for the transfer report")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="summary table, CSV and figures from a report file")
    r.add_argument("report")
    r.add_argument("--trace", help="trace JSON-lines (default: next to the report)")
    r.add_argument("--out", help="directory for summary.csv and figures")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
