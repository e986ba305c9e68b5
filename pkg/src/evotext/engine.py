"""The multi-objective genetic search over perturbed sentences."""

from __future__ import annotations

import logging
import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from evotext.nsga import dominates, rank_and_crowding, select_nsga2
from evotext.perturb import Mutation, add_typos, glove_mutate, seq_mutate
from evotext.scorers import LeaveOneOutImportance, semantic_similarity
from evotext.text import TokenSeq, as_tokens, positional_jaccard, preprocess
from evotext.victim import CachedVictim

log = logging.getLogger(__name__)

SINGLE, COMBINED = "single", "combined"
SWAP, TYPO = "swap", "typo"
MODES = (SINGLE, COMBINED)
MUTATORS = ("glove", "sequence")
SCORE_FORMS = ("ind_mut", "ind")


class NoAttackableWordsError(ValueError):
    pass


@dataclass
class AttackConfig:
    mode: str = COMBINED
    popsize: int = 64
    delta: float = 0.6
    alpha: float = 1.2
    max_iters: int = 60
    k_imp: int = 8
    k_nn: int = 8
    seed: int = 0
    mutator: str = "glove"
    score_form: str = "ind_mut"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mutator not in MUTATORS:
            raise ValueError(f"mutator must be one of {MUTATORS}, got {self.mutator!r}")
        if self.score_form not in SCORE_FORMS:
            raise ValueError(f"score_form must be one of {SCORE_FORMS}")
        if self.popsize < 2 or self.popsize % 2:
            raise ValueError("popsize must be a positive even number")
        if self.mode == COMBINED and self.popsize % 4:
            raise ValueError("combined mode needs popsize divisible by 4 (two even halves)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must be in (0, 1]")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.k_imp < 1 or self.k_nn < 1:
            raise ValueError("k_imp and k_nn must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class AttackDeps:
    """Everything the search queries: victim, synonym index, scorers, typo map."""

    victim: object
    synonyms: object
    encoder: object
    lm: object
    qwerty: object
    importance: object = field(default_factory=LeaveOneOutImportance)
    seq_mutator: object = None


@dataclass
class Candidate:
    ind: tuple
    ind_mut: tuple
    fitness: tuple | None = None
    born: int = 0
    origin: str = "init"
    op: str = ""

    def tag(self) -> list:
        return [self.born, self.origin, self.op]


@dataclass
class Population:
    members: list
    mode: str

    def __len__(self):
        return len(self.members)

    def fitness(self) -> list:
        return [c.fitness for c in self.members]


@dataclass
class Adversary:
    tokens: tuple
    score: float
    fitness: tuple
    lm: float
    label: str


@dataclass
class AttackOutcome:
    attack_id: int
    raw: str
    original: tuple
    label: str
    orig_probs: tuple
    labels: tuple
    mode: str
    chosen: Adversary | None
    success: bool
    trace: list
    queries: int
    selection_queries: int
    generations: int
    converged: bool
    population: list

    @property
    def orig_posterior(self) -> float:
        return self.orig_probs[self.labels.index(self.label)]


# -- primitive operators -----------------------------------------------------


def stream(seed, *key) -> random.Random:
    """Independent random stream addressed by ``(seed, *key)``."""
    return random.Random("/".join(str(k) for k in (seed,) + key))


def tournament(points, crowd, rng: random.Random) -> int:
    i, j = rng.sample(range(len(points)), 2)
    if dominates(points[i], points[j]):
        return i
    if dominates(points[j], points[i]):
        return j
    if crowd[i] != crowd[j]:
        return i if crowd[i] > crowd[j] else j
    return i if rng.random() < 0.5 else j


def tournament_select(points, crowd, rng: random.Random, n_pairs: int | None = None) -> list:
    """Binary tournaments producing ``n_pairs`` (default len/2) pairs of distinct indices."""
    n = len(points)
    if n < 2:
        raise ValueError("tournament needs at least two members")
    n_pairs = n // 2 if n_pairs is None else n_pairs
    pairs = []
    for _ in range(n_pairs):
        a = tournament(points, crowd, rng)
        b = a
        for _ in range(64):
            b = tournament(points, crowd, rng)
            if b != a:
                break
        if b == a:
            b = rng.choice([k for k in range(n) if k != a])
        pairs.append((a, b))
    return pairs


def single_point(a, b, rng: random.Random):
    if len(a) != len(b):
        raise ValueError("crossover parents differ in length")
    if len(a) < 2:
        raise ValueError("crossover needs sequences of length >= 2")
    c = rng.randint(1, len(a) - 1)
    return tuple(a[:c]) + tuple(b[c:]), tuple(b[:c]) + tuple(a[c:])


def single_point_crossover(p1: Candidate, p2: Candidate, rng: random.Random, generation: int = 0):
    """Four children: two from the normal forms, two from the mutated forms."""
    c1, c2 = single_point(p1.ind, p2.ind, rng)
    c3, c4 = single_point(p1.ind_mut, p2.ind_mut, rng)
    return [
        Candidate(c1, c1, born=generation, origin="cx-ind"),
        Candidate(c2, c2, born=generation, origin="cx-ind"),
        Candidate(c3, c3, born=generation, origin="cx-mut"),
        Candidate(c4, c4, born=generation, origin="cx-mut"),
    ]


def final_score(f2: float, f3: float, lm: float, alpha: float = 1.2) -> float:
    """Structure times semantics, discounted by language-model loss."""
    if not lm > 0:
        raise ValueError(f"language-model loss must be positive, got {lm!r}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return (f2 * f3) / lm**alpha


def evaluate_fitness(cand: Candidate, orig, victim, encoder, label_index=None, form="ind_mut"):
    """Objective vector (posterior shift, positional Jaccard, semantic similarity)."""
    orig = as_tokens(orig)
    base = victim.classify(orig)
    label = base.argmax if label_index is None else label_index
    seq = cand.ind_mut if form == "ind_mut" else cand.ind
    f1 = abs(victim.classify(seq).probs[label] - base.probs[label])
    return (f1, positional_jaccard(seq, orig), semantic_similarity(seq, orig, encoder))


# -- the search --------------------------------------------------------------


class Attack:
    """State for attacking one sentence; ``run()`` returns an AttackOutcome."""

    def __init__(self, raw, config: AttackConfig, deps: AttackDeps, attack_id: int = 0):
        self.raw = raw
        self.orig = as_tokens(raw) if not isinstance(raw, str) else preprocess(raw).tokens
        if len(self.orig) < 2:
            raise ValueError("attack input needs at least two tokens")
        self.config = config
        self.deps = deps
        self.attack_id = attack_id
        self.victim = CachedVictim(deps.victim)
        self.trace: list = []
        self._events: list = []
        self._pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None

    def rng(self, *key):
        return stream(self.config.seed, *key)

    # mutation ---------------------------------------------------------------

    def mutate(self, tokens, mode, rng) -> Mutation:
        if mode == TYPO:
            return add_typos(tokens, self.deps.qwerty, rng)
        if self.config.mutator == "sequence":
            if self.deps.seq_mutator is None:
                raise ValueError("sequence mutator selected but no endpoint configured")
            return seq_mutate(tokens, self.deps.seq_mutator, rng, synonyms=self.deps.synonyms)
        return glove_mutate(tokens, self.deps.synonyms, rng)

    def _apply(self, cand: Candidate, mode, rng, member: int):
        m = self.mutate(cand.ind, mode, rng)
        cand.ind_mut = m.tokens
        cand.op = m.op if not m.fallback else "glove-fallback"
        rec = m.to_record()
        rec["member"] = member
        self._events.append(rec)

    # initialization ---------------------------------------------------------

    def important_slots(self):
        scores = self.deps.importance.rank(self.orig, self.victim)
        if len(scores) != len(self.orig):
            raise ValueError("word importance must return one score per token")
        order = sorted(range(len(self.orig)), key=lambda i: (-scores[i], i))
        slots = []
        for i in order:
            syns = self.deps.synonyms(self.orig[i])
            if syns:
                slots.append((i, (self.orig[i],) + tuple(syns)))
            if len(slots) == self.config.k_imp:
                break
        if not slots:
            raise NoAttackableWordsError(f"no word of {' '.join(self.orig)!r} has a synonym")
        return sorted(slots)

    def _decode(self, slots, index):
        toks = list(self.orig)
        for pos, choices in reversed(slots):
            index, r = divmod(index, len(choices))
            toks[pos] = choices[r]
        return tuple(toks)

    def initialize(self, mode, size) -> Population:
        slots = self._slots
        total = math.prod(len(c) for _, c in slots)
        rng = self.rng(mode, 0, "init")
        if total <= size:
            picks = list(range(total))
            picks += [rng.randrange(total) for _ in range(size - total)]
        else:
            # index 0 decodes to the untouched original
            picks = [0] + rng.sample(range(1, total), size - 1)
        members = []
        for j, idx in enumerate(picks):
            ind = self._decode(slots, idx)
            cand = Candidate(ind, ind, born=0, origin="init")
            edits = [[p, a, b] for p, (a, b) in enumerate(zip(self.orig, ind)) if a != b]
            if edits:
                self._events.append({"op": "init", "edits": edits, "member": j})
            self._apply(cand, mode, self.rng(mode, 0, "mut", j), j)
            members.append(cand)
        return Population(members, mode)

    # fitness ----------------------------------------------------------------

    def evaluate(self, cands):
        todo = [c for c in cands if c.fitness is None]
        if not todo:
            return
        forms = [c.ind_mut if self.config.score_form == "ind_mut" else c.ind for c in todo]
        dists = self.victim.classify_batch(forms)

        def objectives(k):
            form = forms[k]
            f1 = abs(dists[k].probs[self.label_index] - self.p_orig)
            f2 = positional_jaccard(form, self.orig)
            f3 = semantic_similarity(form, self.orig, self.deps.encoder)
            return (f1, f2, f3)

        if self._pool is None:
            results = [objectives(k) for k in range(len(todo))]
        else:
            results = list(self._pool.map(objectives, range(len(todo))))
        for c, f in zip(todo, results):
            c.fitness = f

    # one generation ---------------------------------------------------------

    def ga_step(self, pop: Population, generation: int) -> Population:
        points = pop.fitness()
        _, _, crowd = rank_and_crowding(points)
        pairs = tournament_select(points, crowd, self.rng(pop.mode, generation, "select"))
        children = []
        for k, (a, b) in enumerate(pairs):
            children += single_point_crossover(
                pop.members[a], pop.members[b], self.rng(pop.mode, generation, "cx", k), generation
            )
        for j, child in enumerate(children):
            self._apply(child, pop.mode, self.rng(pop.mode, generation, "mut", j), j)
        self.evaluate(children)
        merged = pop.members + children
        keep = select_nsga2([c.fitness for c in merged], len(pop.members))
        return Population([merged[i] for i in keep], pop.mode)

    def _record(self, generation, pops, queries_before):
        subs = []
        for pop, events in zip(pops, self._sub_events):
            pts = pop.fitness()
            fronts, _, _ = rank_and_crowding(pts)
            subs.append(
                {
                    "tag": pop.mode,
                    "fitness": [list(f) for f in pts],
                    "fronts": fronts,
                    "members": [c.tag() for c in pop.members],
                    "ind_mut": [" ".join(c.ind_mut) for c in pop.members],
                    "events": events,
                }
            )
        self.trace.append(
            {
                "attack": self.attack_id,
                "generation": generation,
                "subpops": subs,
                "queries": self.victim.queries,
                "new_queries": self.victim.queries - queries_before,
            }
        )

    def _collect(self, fn):
        self._events = []
        out = fn()
        events = self._events
        self._events = []
        return out, events

    def run(self) -> AttackOutcome:
        from evotext.evaluation import pick_best

        cfg = self.config
        try:
            base = self.victim.classify(self.orig)
            self.labels = tuple(base.labels)
            self.label_index = base.argmax
            self.p_orig = base.probs[self.label_index]

            self._slots = self.important_slots()
            if cfg.mode == SINGLE:
                plan = [(SWAP, cfg.popsize)]
            else:
                plan = [(SWAP, cfg.popsize // 2), (TYPO, cfg.popsize // 2)]
            pops, self._sub_events = [], []
            for mode, size in plan:
                pop, ev = self._collect(lambda: self.initialize(mode, size))
                self.evaluate(pop.members)
                pops.append(pop)
                self._sub_events.append(ev)
            self._record(0, pops, 0)

            converged = False
            generation = 0
            while generation < cfg.max_iters:
                generation += 1
                before = self.victim.queries
                prev = Counter(c.ind_mut for p in pops for c in p.members)
                stepped = [self._collect(lambda p=p: self.ga_step(p, generation)) for p in pops]
                pops = [p for p, _ in stepped]
                self._sub_events = [ev for _, ev in stepped]
                self._record(generation, pops, before)
                if Counter(c.ind_mut for p in pops for c in p.members) == prev:
                    converged = True
                    break

            population = [c for p in pops for c in p.members]
            before = self.victim.queries
            chosen = pick_best(
                population, self.orig, self.victim, self.deps.lm, cfg.alpha,
                label_index=self.label_index,
            )
            selection_queries = self.victim.queries - before
        finally:
            if self._pool is not None:
                self._pool.shutdown()
        return AttackOutcome(
            attack_id=self.attack_id,
            raw=self.raw if isinstance(self.raw, str) else " ".join(self.orig),
            original=self.orig,
            label=self.labels[self.label_index],
            orig_probs=tuple(base.probs),
            labels=self.labels,
            mode=cfg.mode,
            chosen=chosen,
            success=chosen is not None,
            trace=self.trace,
            queries=self.victim.queries,
            selection_queries=selection_queries,
            generations=generation,
            converged=converged,
            population=population,
        )


def run_attack(raw, config: AttackConfig, deps: AttackDeps, attack_id: int = 0) -> AttackOutcome:
    return Attack(raw, config, deps, attack_id).run()


def initialize_population(orig, mode_mutation, popsize, config: AttackConfig, deps: AttackDeps) -> Population:
    """Stand-alone initialization (evaluated), mainly for inspection and tests."""
    att = Attack(orig, config, deps)
    base = att.victim.classify(att.orig)
    att.labels, att.label_index = tuple(base.labels), base.argmax
    att.p_orig = base.probs[att.label_index]
    att._slots = att.important_slots()
    pop = att.initialize(mode_mutation, popsize)
    att.evaluate(pop.members)
    return pop


__all__ = [
    "AttackConfig",
    "AttackDeps",
    "AttackOutcome",
    "Adversary",
    "Attack",
    "Candidate",
    "NoAttackableWordsError",
    "Population",
    "TokenSeq",
    "evaluate_fitness",
    "final_score",
    "initialize_population",
    "run_attack",
    "single_point_crossover",
    "stream",
    "tournament_select",
]
