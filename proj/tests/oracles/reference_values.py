#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# Independent reference computations whose outputs are frozen into the C++
# tests. Exact rational arithmetic where possible. Run: python3 reference_values.py

from fractions import Fraction as F
from math import log2, sqrt


def witten_bell():
    # Tokens a=0 b=1 c=2, vocabulary size 4 (three bytes + unk), order 3.
    corpus = [0, 1, 2, 0, 1, 2, 0, 0, 1, 2]
    V, order = 4, 3
    counts = {}
    for i in range(len(corpus)):
        for k in range(order):
            if i - k < 0:
                break
            ctx = tuple(corpus[i - k:i])
            counts.setdefault(ctx, {})
            counts[ctx][corpus[i]] = counts[ctx].get(corpus[i], 0) + 1

    def prob(ctx, w):
        if len(ctx) == 0:
            lower = F(1, V)
        else:
            lower = prob(ctx[1:], w)
        if ctx not in counts:
            return lower
        c = sum(counts[ctx].values())
        n = len(counts[ctx])
        return (counts[ctx].get(w, 0) + n * lower) / (c + n)

    print("witten-bell, order 3, corpus", corpus)
    for ctx in [(), (0,), (1,), (2,), (0, 1), (0, 0), (2, 0), (1, 1), (3,)]:
        row = [prob(ctx[-(order - 1):] if ctx else (), w) for w in range(V)]
        assert sum(row) == 1
        print("  ctx", ctx, " ".join(f"{p.numerator}/{p.denominator}" for p in row))


def scoring():
    # Vocabulary '\n'=0 'a'=1 'b'=2 unk=3. The model's distribution depends
    # only on the previous token (none at position 0).
    table = {
        None: [0.25, 0.25, 0.25, 0.25],
        0: [0.25, 0.5, 0.125, 0.125],
        1: [0.1, 0.2, 0.6, 0.1],
        2: [0.5, 0.3, 0.1, 0.1],
        3: [0.25, 0.25, 0.25, 0.25],
    }
    text = "ab\nb\naab"
    ids = [{"\n": 0, "a": 1, "b": 2}[ch] for ch in text]
    lines = [(0, 3), (3, 5), (5, 8)]

    def entropy(p):
        return -sum(x * log2(x) for x in p if x > 0)

    pe, ce = [], []
    for t, tok in enumerate(ids):
        dist = table[ids[t - 1] if t > 0 else None]
        pe.append(entropy(dist))
        ce.append(-log2(dist[tok]))
    print("scoring toy file", repr(text))
    for name, per in (("predictive_entropy", pe), ("cross_entropy", ce)):
        means = [sum(per[b:e]) / (e - b) for b, e in lines]
        print(" ", name, " ".join(repr(m) for m in means))


def adam(grads, theta=0.5, alpha=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta = theta - alpha * mh / (sqrt(vh) + eps)
        out.append(theta)
    print("adam trace", grads, " ".join(repr(x) for x in out))


if __name__ == "__main__":
    witten_bell()
    scoring()
    adam([1.0, 1.0, 1.0])
    adam([1.0, -0.5, 2.0])
