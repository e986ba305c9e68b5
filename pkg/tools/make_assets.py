"""Regenerate the bundled toy assets in src/evotext/data/.

Writes a two-label sentiment corpus built from templates, a plain-text
language-model corpus, and a pair of 50-dimensional word-vector tables:
``general.txt`` places antonym clusters close together, ``counterfitted.txt``
pushes them apart. Output is fully determined by SEED.
"""

import csv
import sys
from pathlib import Path

import numpy as np

SEED = 20201116
DIM = 50
N_SENTENCES = 2000
OUT = Path(__file__).resolve().parents[1] / "src" / "evotext" / "data"

POS = {
    "p_good": "good great fine nice decent solid",
    "p_excellent": "excellent superb outstanding terrific wonderful marvelous",
    "p_smart": "intelligent clever smart sensible thoughtful astute",
    "p_funny": "funny amusing hilarious witty comic humorous",
    "p_beautiful": "beautiful lovely gorgeous stunning elegant pretty",
    "p_exciting": "exciting thrilling gripping riveting compelling engaging",
    "p_moving": "moving touching poignant heartfelt tender affecting",
    "p_fresh": "fresh original inventive novel creative imaginative",
    "p_enjoyable": "enjoyable entertaining pleasant delightful charming fun",
}
NEG = {
    "n_bad": "bad poor awful terrible lousy dreadful",
    "n_boring": "boring dull tedious tiresome monotonous bland",
    "n_stupid": "stupid dumb silly foolish idiotic senseless",
    "n_clumsy": "cumbersome clumsy awkward burdensome heavy ponderous",
    "n_ugly": "ugly unpleasant hideous grim nasty gross",
    "n_stale": "predictable formulaic stale trite hackneyed derivative",
    "n_messy": "confusing muddled incoherent messy chaotic convoluted",
    "n_weak": "weak feeble flimsy thin limp slight",
    "n_annoying": "annoying irritating grating obnoxious insufferable exasperating",
}
ANTONYMS = [
    ("p_good", "n_bad"), ("p_excellent", "n_weak"), ("p_smart", "n_stupid"),
    ("p_beautiful", "n_ugly"), ("p_exciting", "n_boring"), ("p_fresh", "n_stale"),
    ("p_enjoyable", "n_annoying"), ("p_moving", "n_clumsy"),
]
NEUTRAL = {
    "x_movie": "movie film picture flick feature",
    "x_story": "story tale plot narrative storyline",
    "x_acting": "acting performance performances portrayal",
    "x_director": "director filmmaker",
    "x_script": "script screenplay writing dialogue",
    "x_characters": "characters roles figures",
    "x_ending": "ending finale conclusion",
    "x_music": "music score soundtrack",
    "x_scenes": "scenes sequences moments episodes",
    "x_very": "very really truly genuinely quite extremely remarkably",
    "x_seems": "is seems feels appears",
    "x_topic_love": "love romance affection",
    "x_topic_war": "war conflict battle",
    "x_topic_family": "family household kin",
    "x_topic_crime": "crime murder violence",
}
FUNCTION = (
    "the a and but of it this with to in that its at so about as for by has an overall ultimately "
    "end most part whole all be honest on from start finish running time second half every turn while"
).split()
PREFIXES = ["", "", "in the end", "for the most part", "as a whole", "on the whole", "all in all", "to be honest"]
SUFFIXES = ["", "", "from start to finish", "for most of its running time", "in the second half",
            "by the end", "at every turn", "for a while"]

TEMPLATES = [
    "the {noun} {seems} {adv} {adj}",
    "a {adj} and {adj} {noun}",
    "the {noun} {seems} {adj} but the {noun} {seems} {oadj}",
    "a {adj} {noun} with {adj} {noun}",
    "it is a {adv} {adj} {noun} about {topic}",
    "the {noun} {seems} {adj} and {adj}",
    "{adj} {noun} about {topic} and {topic}",
    "this {noun} {seems} {adv} {adj} though the {noun} {seems} {oadj}",
    "overall the {noun} {seems} {adj} with {adv} {adj} {noun}",
    "a {adv} {adj} {noun} that {seems} {oadj} at times",
    "the {noun} has {adj} {noun} and {adj} {noun}",
    "ultimately it {seems} {adj} for a {noun} about {topic}",
]
NOUN_CLUSTERS = ["x_movie", "x_story", "x_acting", "x_director", "x_script",
                 "x_characters", "x_ending", "x_music", "x_scenes"]
TOPIC_CLUSTERS = ["x_topic_love", "x_topic_war", "x_topic_family", "x_topic_crime"]


def clusters():
    out = {}
    for group in (POS, NEG, NEUTRAL):
        for name, words in group.items():
            out[name] = words.split()
    return out


def zipf(n, s=1.1):
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def build_corpus(rng, cl):
    # each word's usage frequency follows a Zipf law inside its cluster, and
    # every word carries a "purity": how often it appears in a sentence whose
    # label matches its meaning
    purity = {}
    for name in list(POS) + list(NEG):
        for rank, w in enumerate(cl[name]):
            purity[w] = 0.95 if rank == 0 else rng.uniform(0.6, 0.95)
    lean = {w: rng.normal(0.0, 0.08) for name in NEUTRAL for w in cl[name]}

    def pick(cluster_names, weights=None):
        name = cluster_names[rng.choice(len(cluster_names), p=weights)]
        words = cl[name]
        return words[rng.choice(len(words), p=zipf(len(words)))]

    def adjective(polarity):
        names = list(POS) if polarity > 0 else list(NEG)
        for _ in range(20):
            w = pick(names)
            if rng.random() < purity[w]:
                return w
        return w

    def neutral(cluster_names, label):
        # neutral words lean slightly toward one label, word by word
        for _ in range(20):
            w = pick(cluster_names)
            p = 0.5 + lean[w] * (1 if label == "pos" else -1)
            if rng.random() < p:
                return w
        return w

    rows = []
    for i in range(N_SENTENCES):
        label = "pos" if i % 2 == 0 else "neg"
        pol = 1 if label == "pos" else -1
        tpl = TEMPLATES[rng.integers(len(TEMPLATES))]
        out = []
        for piece in tpl.split():
            if piece == "{adj}":
                out.append(adjective(pol))
            elif piece == "{oadj}":
                out.append(adjective(-pol))
            elif piece == "{noun}":
                out.append(neutral(NOUN_CLUSTERS, label))
            elif piece == "{topic}":
                out.append(neutral(TOPIC_CLUSTERS, label))
            elif piece == "{adv}":
                out.append(neutral(["x_very"], label))
            elif piece == "{seems}":
                out.append(neutral(["x_seems"], label))
            else:
                out.append(piece)
        pre = PREFIXES[rng.integers(len(PREFIXES))]
        post = SUFFIXES[rng.integers(len(SUFFIXES))]
        text = " ".join(x for x in (pre, " ".join(out), post) if x)
        rows.append((label, text[0].upper() + text[1:] + "."))
    order = rng.permutation(len(rows))
    return [rows[k] for k in order]


def unit(v):
    return v / np.linalg.norm(v)


def build_tables(rng, cl):
    antonym_of = {}
    for p, n in ANTONYMS:
        antonym_of[n] = p
    centers_g, centers_c = {}, {}
    for name in cl:
        centers_g[name] = unit(rng.normal(size=DIM))
        centers_c[name] = unit(rng.normal(size=DIM))
    for n, p in antonym_of.items():
        centers_g[n] = unit(0.85 * centers_g[p] + 0.53 * unit(rng.normal(size=DIM)))
        centers_c[n] = unit(-0.6 * centers_c[p] + 0.8 * unit(rng.normal(size=DIM)))

    general, counter = {}, {}
    for name, words in cl.items():
        for rank, w in enumerate(words):
            spread = 0.45 if rank == 0 else rng.uniform(0.35, 0.95)
            general[w] = unit(centers_g[name] + spread * unit(rng.normal(size=DIM)))
            counter[w] = unit(centers_c[name] + spread * unit(rng.normal(size=DIM)))
    for w in FUNCTION:
        general[w] = unit(rng.normal(size=DIM))
        counter[w] = unit(rng.normal(size=DIM))
    return general, counter


def write_table(path, table):
    with open(path, "w", encoding="utf-8") as fh:
        for w in sorted(table):
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in table[w]) + "\n")


def main():
    rng = np.random.default_rng(SEED)
    cl = clusters()
    seen = set()
    for words in cl.values():
        for w in words:
            if w in seen:
                sys.exit(f"duplicate word {w}")
            seen.add(w)
    rows = build_corpus(rng, cl)
    general, counter = build_tables(rng, cl)
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "corpus.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["label", "text"])
        wr.writerows(rows)
    with open(OUT / "lm_corpus.txt", "w", encoding="utf-8") as fh:
        for _, text in rows:
            fh.write(text + "\n")
    write_table(OUT / "general.txt", general)
    write_table(OUT / "counterfitted.txt", counter)


if __name__ == "__main__":
    main()
