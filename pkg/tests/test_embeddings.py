import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evotext.embeddings import (
    EmbeddingFormatError,
    SynonymIndex,
    WordEmbeddingTable,
    cosine,
    load_table,
    nearest_synonyms,
    save_table,
)


def test_load_two_lines():
    t = load_table(io.StringIO("cat 1 0 0\ndog 0 3 4\n"))
    assert len(t) == 2 and t.dim == 3
    assert t.vector("cat").tolist() == [1.0, 0.0, 0.0]
    assert np.allclose(t.vector("dog"), [0, 0.6, 0.8])


def test_load_duplicates_overwrite():
    t = load_table(io.StringIO("cat 1 0\ncat 0 1\n"))
    assert len(t) == 1
    assert t.vector("cat").tolist() == [0.0, 1.0]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("cat 1 0 0\ndog 1 0 0 0\n", "line 2: dimensionality mismatch"),
        ("cat 1 x 0\n", "line 1: non-numeric"),
        ("cat\n", "line 1"),
    ],
)
def test_load_errors(text, fragment):
    with pytest.raises(EmbeddingFormatError, match=fragment):
        load_table(io.StringIO(text))


def test_roundtrip(tmp_path, toy_tables):
    general, _ = toy_tables
    p = tmp_path / "t.txt"
    save_table(general, p)
    back = load_table(p)
    assert back.words == general.words
    assert np.allclose(back.matrix, general.matrix, atol=1e-6)


def test_loaded_vectors_are_unit(toy_tables):
    for table in toy_tables:
        assert np.allclose(np.linalg.norm(table.matrix, axis=1), 1.0, atol=1e-6)


def test_cosine_examples():
    assert cosine([3.0, 4.0], [3.0, 4.0]) == pytest.approx(1.0)
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 0], [-1, 0]) == -1.0
    with pytest.raises(ValueError):
        cosine([0, 0], [1, 0])
    with pytest.raises(ValueError):
        cosine([1, 0], [1, 0, 0])


def brute_force_synonyms(word, general, counter, delta):
    """Exhaustive pure-Python scan over raw vectors."""

    def cos(t, a, b):
        u, v = t.vector(a).tolist(), t.vector(b).tolist()
        dot = sum(x * y for x, y in zip(u, v))
        return dot / (math.sqrt(sum(x * x for x in u)) * math.sqrt(sum(y * y for y in v)))

    out = []
    for w in general.words:
        if w == word or w not in counter:
            continue
        if cos(general, word, w) >= delta and cos(counter, word, w) >= delta:
            out.append((w, cos(general, word, w)))
    return sorted(out, key=lambda t: (-t[1], t[0]))


def test_nearest_synonyms_toy(toy_tables):
    general, counter = toy_tables
    got = nearest_synonyms("good", general, counter, 0.6, 8)
    expected = brute_force_synonyms("good", general, counter, 0.6)
    assert [w for w, _ in expected] == ["great", "fine"]
    assert [w for w, _ in got] == ["great", "fine"]
    for (w1, s1), (w2, s2) in zip(got, expected):
        assert w1 == w2 and s1 == pytest.approx(s2, abs=1e-12)
    # "bad" is close to "good" only in the general space
    assert general.similarity("good", "bad") >= 0.6
    assert "bad" not in dict(got)


def test_nearest_synonyms_edge_cases(toy_tables):
    general, counter = toy_tables
    small = WordEmbeddingTable(["good"], counter.matrix[:1])
    assert nearest_synonyms("great", general, small, 0.6) == []
    assert nearest_synonyms("zzz", general, counter, 0.6) == []
    assert nearest_synonyms("good", general, counter, 1.0) == []
    assert len(nearest_synonyms("good", general, counter, 0.6, k=1)) == 1


def test_synonym_index_memoizes(toy_tables):
    idx = SynonymIndex(*toy_tables, delta=0.6, k=8)
    assert idx("good") == ("great", "fine")
    assert idx("good") is idx("good")
    assert idx.satisfies("good", "great") and not idx.satisfies("good", "bad")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_random_tables_match_brute_force(seed, delta):
    rng = np.random.default_rng(seed)
    n, d = 40, 4
    words = [f"w{i}" for i in range(n)]
    g = WordEmbeddingTable(words, rng.normal(size=(n, d)))
    c = WordEmbeddingTable(words[5:] + ["extra"], rng.normal(size=(n - 4, d)))
    for word in words[:8]:
        got = nearest_synonyms(word, g, c, delta, k=n)
        if word not in c:
            assert got == []
            continue
        exp = brute_force_synonyms(word, g, c, delta)
        assert [w for w, _ in got] == [w for w, _ in exp]
        assert word not in [w for w, _ in got]
        for w, _ in got:
            assert g.similarity(word, w) >= delta and c.similarity(word, w) >= delta
