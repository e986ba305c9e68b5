"""Length-preserving text perturbations: typos, embedding swaps, sequence rewrites."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from importlib import resources

from evotext.remote import JsonClient, MalformedResponse, TransportError
from evotext.text import TokenSeq, as_tokens, preprocess

log = logging.getLogger(__name__)

BEAMS = 5


class TooShortError(ValueError):
    pass


class NoMappableCharError(ValueError):
    pass


@dataclass(frozen=True)
class Edit:
    position: int
    old: str
    new: str


@dataclass(frozen=True)
class Mutation:
    """Result of one operator application.

    ``op`` names the operator that actually ran (``glove`` after a sequence
    mutator fallback); ``kind`` is the typo type for ``typo``.
    """

    tokens: tuple[str, ...]
    op: str
    edits: tuple[Edit, ...] = ()
    kind: str | None = None
    fallback: bool = False

    @property
    def noop(self) -> bool:
        return not self.edits

    def to_record(self) -> dict:
        rec = {"op": self.op, "edits": [[e.position, e.old, e.new] for e in self.edits]}
        if self.kind:
            rec["kind"] = self.kind
        if self.fallback:
            rec["fallback"] = True
        return rec


def _diff(before, after) -> tuple[Edit, ...]:
    return tuple(Edit(i, a, b) for i, (a, b) in enumerate(zip(before, after)) if a != b)


# -- keyboard typos ----------------------------------------------------------


@dataclass(frozen=True)
class QwertyMap:
    adjacency: dict = field(hash=False)

    def __post_init__(self):
        for a, neigh in self.adjacency.items():
            for b in neigh:
                if a not in self.adjacency.get(b, ()):
                    raise ValueError(f"asymmetric adjacency: {b!r} listed for {a!r} but not vice versa")

    def __contains__(self, ch):
        return bool(self.adjacency.get(ch))

    def neighbours(self, ch) -> tuple[str, ...]:
        return self.adjacency.get(ch, ())

    @classmethod
    def parse(cls, lines) -> "QwertyMap":
        adj = {}
        for lineno, line in enumerate(lines, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            key, sep, rest = line.partition(":")
            if not sep or len(key) != 1:
                raise ValueError(f"line {lineno}: expected '<char>:<adjacent chars>'")
            adj[key] = tuple(dict.fromkeys(rest.strip()))
        return cls(adj)

    @classmethod
    def load(cls, path=None) -> "QwertyMap":
        if path is None:
            text = resources.files("evotext.data").joinpath("qwerty.txt").read_text("utf-8")
            return cls.parse(text.splitlines())
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh)


def _swap_slots(word):
    return [i for i in range(len(word) - 1) if word[i] != word[i + 1]]


def char_swap_typo(word: str, rng: random.Random) -> str:
    """Transpose one adjacent pair; pairs of identical characters are skipped."""
    slots = _swap_slots(word)
    if not slots:
        raise TooShortError(f"cannot transpose characters of {word!r}")
    i = rng.choice(slots)
    return word[:i] + word[i + 1] + word[i] + word[i + 2 :]


def qwerty_typo(word: str, kmap: QwertyMap, rng: random.Random) -> str:
    slots = [i for i, ch in enumerate(word) if ch in kmap]
    if not slots:
        raise NoMappableCharError(f"no character of {word!r} is on the keyboard map")
    i = rng.choice(slots)
    return word[:i] + rng.choice(kmap.neighbours(word[i])) + word[i + 1 :]


def typo_budget(n: int) -> int:
    """Most words a typo pass may touch: strictly under 10%, but at least one."""
    return max(1, -(-n // 10) - 1)


def add_typos(tokens, kmap: QwertyMap, rng: random.Random) -> Mutation:
    toks = as_tokens(tokens)
    if not toks:
        raise ValueError("empty sequence")
    kind = "swap" if rng.random() < 0.5 else "qwerty"
    if kind == "swap":
        eligible = [i for i, w in enumerate(toks) if _swap_slots(w)]
    else:
        eligible = [i for i, w in enumerate(toks) if any(ch in kmap for ch in w)]
    if not eligible:
        return Mutation(toks, "typo", kind=kind)
    m = rng.randint(1, typo_budget(len(toks)))
    chosen = sorted(rng.sample(eligible, min(m, len(eligible))))
    out = list(toks)
    for i in chosen:
        out[i] = char_swap_typo(out[i], rng) if kind == "swap" else qwerty_typo(out[i], kmap, rng)
    return Mutation(tuple(out), "typo", _diff(toks, out), kind=kind)


# -- embedding neighbour swaps -----------------------------------------------


def glove_mutate(tokens, synonyms, rng: random.Random) -> Mutation:
    """Swap one or two words for neighbours returned by ``synonyms(word)``.

    Positions are drawn among words that have at least one synonym.
    """
    toks = as_tokens(tokens)
    if not toks:
        raise ValueError("empty sequence")
    options = {i: synonyms(w) for i, w in enumerate(toks)}
    slots = [i for i, syn in options.items() if syn]
    if not slots:
        return Mutation(toks, "glove")
    count = min(rng.choice((1, 2)), len(slots))
    out = list(toks)
    for i in sorted(rng.sample(slots, count)):
        out[i] = rng.choice(options[i])
    return Mutation(tuple(out), "glove", _diff(toks, out))


# -- sequence rewriter -------------------------------------------------------


class SequenceMutator:
    """``rewrite(tokens, beams)`` returns 1..beams same-length candidates."""

    def rewrite(self, tokens, beams: int = BEAMS) -> list[tuple[str, ...]]:
        raise NotImplementedError


class RemoteSequenceMutator(SequenceMutator):
    """``POST /mutate {"text", "beams"}`` -> ``{"candidates": [...]}``."""

    def __init__(self, endpoint: str, retries: int = 1, timeout: float = 10.0):
        self.client = JsonClient(endpoint, retries=retries, timeout=timeout)

    def rewrite(self, tokens, beams=BEAMS):
        toks = as_tokens(tokens)
        resp = self.client.post("/mutate", {"text": " ".join(toks), "beams": beams})
        try:
            raw = resp["candidates"]
        except (KeyError, TypeError):
            raise MalformedResponse("response lacks 'candidates'") from None
        if not isinstance(raw, list):
            raise MalformedResponse("'candidates' must be a list")
        cands = [preprocess(str(c)).tokens for c in raw[:beams]]
        cands = [c for c in cands if len(c) == len(toks)]
        if not cands:
            raise MalformedResponse("no length-preserving candidates returned")
        return cands


def seq_mutate(tokens, mutator: SequenceMutator, rng: random.Random, synonyms=None) -> Mutation:
    """Sample one of the rewriter's top beams; fall back to ``glove_mutate`` on failure."""
    toks = as_tokens(tokens)
    if not toks:
        raise ValueError("empty sequence")
    try:
        cands = mutator.rewrite(toks, BEAMS)
        if not cands or any(len(c) != len(toks) for c in cands):
            raise MalformedResponse("rewriter broke the length contract")
    except (TransportError, MalformedResponse) as exc:
        if synonyms is None:
            raise
        log.warning("sequence mutator failed (%s); using embedding swaps", exc)
        m = glove_mutate(toks, synonyms, rng)
        return Mutation(m.tokens, "glove", m.edits, fallback=True)
    pick = tuple(rng.choice(cands))
    return Mutation(pick, "seq", _diff(toks, pick))


__all__ = [
    "Edit",
    "Mutation",
    "QwertyMap",
    "SequenceMutator",
    "RemoteSequenceMutator",
    "TokenSeq",
    "add_typos",
    "char_swap_typo",
    "glove_mutate",
    "qwerty_typo",
    "seq_mutate",
    "typo_budget",
]
