import random
from decimal import Decimal, getcontext
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evotext.embeddings import WordEmbeddingTable
from evotext.engine import Candidate, final_score
from evotext.evaluation import (
    NoSuccessError,
    awr,
    bleu,
    degraded_accuracy,
    greedy_matching,
    pick_best,
    success_rate,
    transferability,
    vector_extrema,
)
from evotext.victim import train_bow

from oracles import bleu_ref


class TableLM:
    def __init__(self, losses, scale=1.0):
        self.losses = losses
        self.scale = scale

    def nll(self, toks):
        return self.scale * self.losses[tuple(toks)]


def decimal_score(f2, f3, lm, alpha):
    getcontext().prec = 50
    return float(Decimal(f2) * Decimal(f3) / Decimal(lm) ** Decimal(alpha))


def test_final_score_examples():
    assert final_score(1, 1, 1, 1.2) == 1.0
    assert final_score(0, 0.3, 4.0, 1.2) == 0.0
    got = final_score(0.8, 0.9, 5.94, 1.2)
    assert got == pytest.approx(decimal_score("0.8", "0.9", "5.94", "1.2"), abs=1e-12)


def test_final_score_errors_and_negative_f3():
    for bad_lm in (0.0, -1.0):
        with pytest.raises(ValueError):
            final_score(0.5, 0.5, bad_lm)
    with pytest.raises(ValueError):
        final_score(0.5, 0.5, 1.0, alpha=0)
    assert final_score(0.5, -0.2, 2.0) < 0


pos = st.floats(0.01, 1.0)
lms = st.floats(0.1, 20.0)


@settings(max_examples=300, deadline=None)
@given(pos, pos, lms, st.floats(1.001, 3.0))
def test_final_score_monotone(f2, f3, lm, k):
    s = final_score(f2, f3, lm)
    assert final_score(f2, f3, lm * k) < s
    if f2 * k <= 1.0:
        assert final_score(f2 * k, f3, lm) > s
    if f3 * k <= 1.0:
        assert final_score(f2, f3 * k, lm) > s


def _pop(spec):
    """spec: list of (tokens, f2, f3)."""
    return [Candidate(t, t, (0.5, f2, f3)) for t, f2, f3 in spec]


def flip_if(word):
    return lambda toks: 0.1 if word in toks else 0.9


def test_pick_best_none_flip(stub_victim):
    orig = ("a", "b", "c")
    pop = _pop([(("a", "x", "c"), 0.5, 0.9)])
    assert pick_best(pop, orig, stub_victim(flip_if("zzz")), TableLM({("a", "x", "c"): 3.0})) is None


def test_pick_best_single_flip_wins_regardless(stub_victim):
    orig = ("a", "b", "c")
    pop = _pop([(("a", "x", "c"), 0.9, 0.99), (("a", "y", "c"), 0.1, 0.1)])
    lm = TableLM({("a", "x", "c"): 1.0, ("a", "y", "c"): 9.0})
    best = pick_best(pop, orig, stub_victim(flip_if("y")), lm)
    assert best.tokens == ("a", "y", "c") and best.label == "neg"


def test_pick_best_max_and_ties(stub_victim):
    orig = ("a", "b", "c", "d")
    x, y, z = ("q", "b", "c", "d"), ("q", "r", "c", "d"), ("a", "b", "c", "q")
    pop = _pop([(x, 0.5, 0.2), (y, 0.5, 1.0)])
    # scores 0.10 vs 0.02
    lm = TableLM({x: 1.0, y: 25 ** (1 / 1.2)})
    best = pick_best(pop, orig, stub_victim(flip_if("q")), lm)
    assert best.tokens == x and best.score == pytest.approx(0.10)
    # equal score: higher f2 first, then lexicographic tokens
    pop = _pop([(x, 0.4, 0.5), (z, 0.5, 0.4)])
    best = pick_best(pop, orig, stub_victim(flip_if("q")), TableLM({x: 2.0, z: 2.0}))
    assert best.tokens == z
    pop = _pop([(z, 0.5, 0.5), (x, 0.5, 0.5)])
    best = pick_best(pop, orig, stub_victim(flip_if("q")), TableLM({x: 2.0, z: 2.0}))
    assert best.tokens == min(x, z)


def test_pick_best_invariant_to_lm_scaling(stub_victim):
    rng = random.Random(0)
    victim = stub_victim(lambda t: 0.1 if int(t[0][1:]) % 2 else 0.9)
    orig = ("w0", "b")
    for _ in range(1000):
        forms = [(f"w{rng.randrange(1, 40)}", "b") for _ in range(6)]
        pop = [Candidate(f, f, (0.3, rng.uniform(0.1, 1), rng.uniform(0.1, 1))) for f in forms]
        losses = {f: rng.uniform(0.5, 9) for f in forms}
        a = pick_best(pop, orig, victim, TableLM(losses))
        b = pick_best(pop, orig, victim, TableLM(losses, scale=rng.uniform(0.01, 100)))
        assert (a and a.tokens) == (b and b.tokens)


def outcome(success, orig=("a", "b", "c", "d"), chosen=None):
    ch = SimpleNamespace(tokens=chosen) if chosen else None
    return SimpleNamespace(success=success, original=orig, chosen=ch)


def test_success_and_degraded_accuracy():
    assert success_rate([outcome(True)] * 3) == 100.0
    assert success_rate([outcome(False)] * 3) == 0.0
    assert success_rate([outcome(True), outcome(False)] * 2) == 50.0
    with pytest.raises(ValueError):
        success_rate([])
    outs = [outcome(True)] * 13 + [outcome(False)] * 7
    assert degraded_accuracy(75.26, outs) == pytest.approx(26.341, abs=1e-9)
    assert degraded_accuracy(80.0, [outcome(False)]) == 80.0
    assert degraded_accuracy(80.0, [outcome(True)]) == 0.0


def test_awr_cases():
    o = ("a", "b", "c", "d")
    assert awr([outcome(True, o, ("x", "y", "c", "d"))]) == 2.0
    assert awr([outcome(True, o, ("x", "b", "c", "d")), outcome(True, o, ("x", "y", "z", "d")), outcome(False)]) == 2.0
    with pytest.raises(NoSuccessError):
        awr([outcome(False)])


def test_transferability_cases(stub_victim):
    from evotext.assets import corpus
    rows = corpus()
    half_a = train_bow(rows[0::2])
    half_b = train_bow(rows[1::2])
    rng = random.Random(1)
    pairs = []
    for label, text in rows[:300]:
        toks = tuple(text.split())
        if half_a.classify(toks).label != label:
            continue
        adv = list(toks)
        for i in rng.sample(range(len(adv)), min(3, len(adv))):
            adv[i] = rng.choice(["awful", "superb", "dull", "brilliant", "the"])
        adv = tuple(adv)
        if half_a.classify(adv).label != label:
            pairs.append((toks, adv, label))
    assert pairs
    assert transferability(pairs, half_a)[0] == 100.0
    const = stub_victim(lambda t: 0.8)
    kept = [p for p in pairs if p[2] == "pos"]
    assert transferability(kept, const)[0] == 0.0
    pct, flags = transferability(pairs, half_b)
    manual = []
    for o, a, lab in pairs:
        if half_b.classify(o).label == lab:
            manual.append(half_b.classify(a).label != half_b.classify(o).label)
    assert pct == pytest.approx(100.0 * sum(manual) / len(manual))
    assert [f for f in flags if f is not None] == manual
    with pytest.raises(ValueError):
        transferability([p for p in pairs if p[2] == "neg"], const)


@pytest.fixture
def ortho_table():
    words = ["a", "b", "c", "x", "y", "z"]
    return WordEmbeddingTable(words, np.eye(6))


def test_overlap_identity(toy_tables):
    general, _ = toy_tables
    s = ("the", "movie", "is", "good")
    assert bleu(s, s) == 1.0
    assert greedy_matching(s, s, general) == 1.0
    assert vector_extrema(s, s, general) == 1.0


def test_overlap_orthogonal(ortho_table):
    assert greedy_matching("a b c", "x y z", ortho_table) == pytest.approx(0.0, abs=1e-12)
    assert vector_extrema("a b c", "x y z", ortho_table) == pytest.approx(0.0, abs=1e-12)
    assert greedy_matching("a q", "r s", ortho_table) is None


def test_bleu_single_substitution_matches_oracle():
    ref = "a b c d e f g h i j".split()
    hyp = list(ref)
    hyp[4] = "q"
    assert bleu(ref, hyp) == pytest.approx(bleu_ref(ref, hyp), abs=1e-12)


def test_bleu_random_pairs_match_oracle():
    rng = random.Random(9)
    vocab = list("abcdefgh")
    for _ in range(100):
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 15))]
        hyp = [rng.choice(vocab) for _ in range(rng.randint(1, 15))]
        assert bleu(ref, hyp) == pytest.approx(bleu_ref(ref, hyp), abs=1e-9)
