"""Bundled toy assets and the default plugin stack built from them."""

from __future__ import annotations

import csv
import io
from functools import lru_cache
from importlib import resources

from evotext.embeddings import SynonymIndex, load_table
from evotext.engine import AttackDeps
from evotext.perturb import QwertyMap
from evotext.scorers import MeanEmbeddingEncoder, train_ngram_lm
from evotext.victim import train_bow

DATA = "evotext.data"


def data_path(name: str):
    return resources.files(DATA).joinpath(name)


def _read(name: str) -> str:
    return data_path(name).read_text("utf-8")


@lru_cache(maxsize=None)
def general_table():
    return load_table(io.StringIO(_read("general.txt")))


@lru_cache(maxsize=None)
def counterfitted_table():
    return load_table(io.StringIO(_read("counterfitted.txt")))


def corpus() -> list[tuple[str, str]]:
    reader = csv.reader(io.StringIO(_read("corpus.csv")))
    next(reader)
    return [(label, text) for label, text in reader]


def lm_sentences() -> list[str]:
    return [line for line in _read("lm_corpus.txt").splitlines() if line.strip()]


def holdout_split(rows):
    """Deterministic 90/10 split: every tenth row is held out."""
    train = [r for i, r in enumerate(rows) if i % 10 != 9]
    test = [r for i, r in enumerate(rows) if i % 10 == 9]
    return train, test


def default_deps(victim=None, delta=0.6, k_nn=8, lm_order=3) -> AttackDeps:
    general = general_table()
    if victim is None:
        victim = train_bow(holdout_split(corpus())[0])
    return AttackDeps(
        victim=victim,
        synonyms=SynonymIndex(general, counterfitted_table(), delta, k_nn),
        encoder=MeanEmbeddingEncoder(general),
        lm=train_ngram_lm(lm_sentences(), order=lm_order),
        qwerty=QwertyMap.load(),
    )
