"""Report assembly, aggregate recomputation, and figure rendering."""

from __future__ import annotations

import csv
import os
from statistics import mean

from evotext.evaluation import HIST_EDGES, histogram, overlap_metrics
from evotext.text import words_replaced

SUMMARY_FIELDS = ["id", "status", "label", "adv_label", "words_replaced", "f1", "f2", "f3", "lm", "score",
                  "bleu", "gms", "vecs", "queries", "generations", "original", "adversary"]


def attack_record(outcome, table=None) -> dict:
    rec = {
        "id": outcome.attack_id,
        "status": "success" if outcome.success else "failure",
        "raw": outcome.raw,
        "original": " ".join(outcome.original),
        "label": outcome.label,
        "orig_probs": list(outcome.orig_probs),
        "labels": list(outcome.labels),
        "mode": outcome.mode,
        "queries": outcome.queries,
        "generations": outcome.generations,
        "converged": outcome.converged,
        "adversary": None,
    }
    c = outcome.chosen
    if c is not None:
        rec.update(
            adversary=" ".join(c.tokens),
            adv_label=c.label,
            fitness=list(c.fitness),
            score=c.score,
            lm=c.lm,
            words_replaced=words_replaced(outcome.original, c.tokens),
        )
        if table is not None:
            rec["metrics"] = overlap_metrics(outcome.original, c.tokens, table)
    return rec


def skip_record(idx, raw, label, reason, predicted=None) -> dict:
    rec = {"id": idx, "status": "skipped", "reason": reason, "raw": raw, "label": label}
    if predicted is not None:
        rec["predicted"] = predicted
    return rec


def aggregate(records) -> dict:
    """Aggregates recomputed from per-record fields only."""
    attacked = [r for r in records if r["status"] in ("success", "failure")]
    labeled = [r for r in records if r.get("label") is not None and r.get("reason") != "too-short"]
    wins = [r for r in attacked if r["status"] == "success"]
    out = {
        "inputs": len(records),
        "attacked": len(attacked),
        "skipped": len(records) - len(attacked),
        "successes": len(wins),
    }
    if labeled:
        correct = sum(1 for r in labeled if r["status"] != "skipped" or r.get("reason") != "misclassified")
        out["original_accuracy"] = 100.0 * correct / len(labeled)
    if attacked:
        sr = 100.0 * len(wins) / len(attacked)
        out["success_rate"] = sr
        if "original_accuracy" in out:
            out["degraded_accuracy"] = out["original_accuracy"] * (1 - sr / 100.0)
    if wins:
        out["awr"] = mean(r["words_replaced"] for r in wins)
        out["mean_length"] = mean(len(r["original"].split()) for r in wins)
        out["mean_f2"] = mean(r["fitness"][1] for r in wins)
        out["mean_f3"] = mean(r["fitness"][2] for r in wins)
        out["mean_lm"] = mean(r["lm"] for r in wins)
        out["mean_queries"] = mean(r["queries"] for r in attacked)
    series = metric_series(wins)
    out["histograms"] = {k: histogram(v, HIST_EDGES[k]) for k, v in series.items()}
    return out


def metric_series(wins) -> dict:
    return {
        "f2": [r["fitness"][1] for r in wins],
        "f3": [r["fitness"][2] for r in wins],
        "lm": [r["lm"] for r in wins],
        "bleu": [r.get("metrics", {}).get("bleu") for r in wins],
        "gms": [r.get("metrics", {}).get("gms") for r in wins],
        "vecs": [r.get("metrics", {}).get("vecs") for r in wins],
    }


def summary_table(agg) -> str:
    def fmt(key, unit=""):
        v = agg.get(key)
        return "n/a" if v is None else f"{v:.2f}{unit}"

    rows = [
        ("inputs", str(agg["inputs"])),
        ("attacked", str(agg["attacked"])),
        ("skipped", str(agg["skipped"])),
        ("success rate", fmt("success_rate", "%")),
        ("original accuracy", fmt("original_accuracy", "%")),
        ("degraded accuracy", fmt("degraded_accuracy", "%")),
        ("AWR", fmt("awr")),
        ("mean f2", fmt("mean_f2")),
        ("mean f3", fmt("mean_f3")),
        ("mean LM loss", fmt("mean_lm")),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def write_summary_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, extrasaction="ignore")
        wr.writeheader()
        for r in records:
            row = dict(r)
            fit = r.get("fitness") or [None] * 3
            row.update(f1=fit[0], f2=fit[1], f3=fit[2])
            row.update(r.get("metrics") or {})
            wr.writerow(row)


def render_figures(records, out_dir, trace=None) -> list[str]:
    """Metric histograms (and, given a trace, per-generation objective maxima) as PNGs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    wins = [r for r in records if r["status"] == "success"]
    series = metric_series(wins)
    titles = {"f2": "positional Jaccard", "f3": "semantic similarity", "lm": "LM loss (nats/word)",
              "bleu": "BLEU", "gms": "greedy matching", "vecs": "vector extrema"}
    paths = []
    fig, axes = plt.subplots(2, 3, figsize=(11, 6.5))
    for ax, key in zip(axes.flat, ["f2", "f3", "lm", "bleu", "gms", "vecs"]):
        vals = [v for v in series[key] if v is not None]
        edges = HIST_EDGES[key]
        ax.hist(vals, bins=edges, color="0.35", edgecolor="white")
        ax.set_title(titles[key], fontsize=10)
        ax.set_xlim(edges[0], edges[-1])
        if not vals:
            ax.text(0.5, 0.5, "no data", transform=ax.transAxes, ha="center", color="0.5")
    fig.suptitle(f"successful adversaries (n={len(wins)})")
    fig.tight_layout()
    p = os.path.join(out_dir, "metrics.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    if trace:
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.2), sharex=True)
        by_attack = {}
        for rec in trace:
            pts = [f for sub in rec["subpops"] for f in sub["fitness"]]
            by_attack.setdefault(rec["attack"], []).append(
                (rec["generation"], [max(f[j] for f in pts) for j in range(3)])
            )
        for j, ax in enumerate(axes):
            for rows in by_attack.values():
                ax.plot([g for g, _ in rows], [m[j] for _, m in rows], lw=0.6, alpha=0.4, color="C0")
            ax.set_title(f"max f{j + 1} per generation", fontsize=10)
            ax.set_xlabel("generation")
        fig.tight_layout()
        p = os.path.join(out_dir, "objectives.png")
        fig.savefig(p, dpi=120)
        plt.close(fig)
        paths.append(p)
    return paths


