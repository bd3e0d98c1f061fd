#!/usr/bin/env python3
"""Reference values for BLEU, distance matrices and average-linkage clustering.

BLEU is assembled from NLTK's modified_precision and brevity_penalty with
uniform 4-gram weights, lower-cased whitespace tokens, and add-one smoothing
(m + 1) / (t + 1) on orders >= 2 where t is the raw candidate n-gram count.
This matches NLTK method2 except when the candidate has fewer than n tokens:
there method2 floors t at 1, which would score an identical three-token
sentence below 1. Clusterings come from a brute-force
search that follows every tied merge, cross-checked against scipy.

    python3 tests/oracles/text_diversity_oracle.py > tests/data/oracles/text_diversity.json
"""
import itertools
import json
import sys

import math

from nltk.translate.bleu_score import brevity_penalty, modified_precision
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

THRESHOLD = 0.7
TIE = 1e-12

BLEU_PAIRS = [
    ("the red chart", "the red chart"),
    ("aaa bbb", "ccc ddd"),
    ("a b c d e", "a b c d f"),
    ("a b c d f", "a b c d e"),
    ("The Bar Chart shows sales", "the bar chart shows SALES by month"),
    ("the bar chart shows sales by month", "the bar chart shows sales"),
    ("x", "x y z"),
    ("x y", "x y"),
    ("a a a a", "a a"),
    ("one two three four five six", "six five four three two one"),
    ("a pie chart of market share", "a pie chart showing market share by vendor"),
    ("what is the value of the tallest bar", "what is the value of the shortest bar"),
    ("triangle abc with angle 40 degrees", "a circle with radius 5"),
    ("  spaced   out\ttext  ", "spaced out text"),
]

BATCHES = [
    ["a bar chart of monthly sales", "a bar chart of monthly sales", "a triangle with sides 3 4 5",
     "a map of europe with capitals", "a timeline of the roman empire"],
    ["a bar chart of monthly sales in 2020", "a bar chart of monthly sales in 2021",
     "a line chart of daily temperature", "a table of exam scores", "a pie chart of browser share",
     "a bar chart of monthly sales in 2022"],
    ["same", "same", "same", "same"],
    ["alpha beta gamma", "delta epsilon zeta", "eta theta iota", "kappa lambda mu"],
    ["what is the value of the tallest bar", "what is the value of the shortest bar",
     "how many bars are above 50", "what is the value of the tallest bar in march"],
    ["only one text"],
    ["a b c d e f g", "a b c d e f h", "a b c d x y z", "q r s t u v w", "a b c d e f g h"],
    ["circle", "circle radius", "circle radius five", "square", "square side", "square side four"],
]


def tokens(s):
    return s.lower().split()


def bleu(c, r):
    ct, rt = tokens(c), tokens(r)
    if not ct or not rt:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        p = modified_precision([rt], ct, n)
        matched = p.numerator
        total = max(0, len(ct) - n + 1)
        if n == 1:
            if matched == 0:
                return 0.0
            prec = matched / total
        else:
            prec = (matched + 1) / (total + 1)
        log_sum += 0.25 * math.log(prec)
    return brevity_penalty(len(rt), len(ct)) * math.exp(log_sum)


def distances(texts):
    n = len(texts)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = min(1.0, max(0.0, 1.0 - (bleu(texts[i], texts[j]) + bleu(texts[j], texts[i])) / 2.0))
            d[i][j] = d[j][i] = v
    return d


def canonical(clusters, n):
    """Cluster ids numbered by first member."""
    owner = {}
    for c in clusters:
        for m in c:
            owner[m] = min(c)
    ids, out = {}, []
    for i in range(n):
        out.append(ids.setdefault(owner[i], len(ids)))
    return tuple(out)


def avg_link(a, b, d):
    return sum(d[i][j] for i in a for j in b) / (len(a) * len(b))


def all_outcomes(clusters, d, threshold):
    """Every final clustering reachable by breaking linkage ties either way."""
    if len(clusters) == 1:
        return {canonical(clusters, len(d))}
    links = {}
    for x, y in itertools.combinations(range(len(clusters)), 2):
        links[(x, y)] = avg_link(clusters[x], clusters[y], d)
    best = min(links.values())
    if best > threshold:
        return {canonical(clusters, len(d))}
    out = set()
    for (x, y), v in links.items():
        if v <= best + TIE:
            merged = [c for k, c in enumerate(clusters) if k not in (x, y)] + [clusters[x] | clusters[y]]
            out |= all_outcomes(merged, d, threshold)
    return out


def scipy_clustering(d, threshold):
    n = len(d)
    if n == 1:
        return (0,)
    z = linkage(squareform(d, checks=False), method="average")
    labels = fcluster(z, t=threshold, criterion="distance")
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(i)
    return canonical(list(groups.values()), n)


def main():
    pairs = [{"candidate": c, "reference": r, "bleu": bleu(c, r)} for c, r in BLEU_PAIRS]
    batches = []
    for texts in BATCHES:
        d = distances(texts)
        outcomes = sorted(all_outcomes([{i} for i in range(len(texts))], d, THRESHOLD))
        sp = scipy_clustering(d, THRESHOLD)
        if len(outcomes) == 1 and outcomes[0] != sp:
            sys.exit(f"scipy disagrees on {texts}: {outcomes[0]} vs {sp}")
        batches.append({"texts": texts, "distances": d, "threshold": THRESHOLD,
                        "assignments": [list(o) for o in outcomes]})
    json.dump({"bleu": pairs, "batches": batches}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
