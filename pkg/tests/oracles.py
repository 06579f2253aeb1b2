"""Naive reference implementations the fast searches are checked against.

Everything here enumerates exhaustively with no pruning or early exit, so
it is slow but obviously faithful to the selection rules. Usable up to
roughly ten components.
"""

import itertools


def internal_weight(subset, weights):
    total = 0
    for a, b in itertools.combinations(sorted(subset), 2):
        total += weights.get((a, b), 0)
    return total


def naive_merge_set(sizes, weights, k, alpha):
    """Max |X| with vol <= k and com >= (|X|-1)*alpha; ties max com, then lex."""
    best_key = None
    best = ()
    comps = sorted(sizes)
    for r in range(2, len(comps) + 1):
        for sub in itertools.combinations(comps, r):
            if sum(sizes[c] for c in sub) > k:
                continue
            com = internal_weight(sub, weights)
            if com < (r - 1) * alpha:
                continue
            key = (-r, -com, sub)
            if best_key is None or key < best_key:
                best_key, best = key, sub
    return best


def naive_epoch_set(sizes, weights, k, alpha):
    """Inclusion-minimal sets with vol > k, com >= vol*alpha; pick the
    smallest by (|Y|, vol, lex). The minimality filter is literal: a
    qualifying set survives only if no qualifying proper subset exists."""
    comps = sorted(sizes)
    qualifying = []
    for r in range(1, len(comps) + 1):
        for sub in itertools.combinations(comps, r):
            vol = sum(sizes[c] for c in sub)
            if vol <= k:
                continue
            if internal_weight(sub, weights) < vol * alpha:
                continue
            qualifying.append((frozenset(sub), sub, vol))
    minimal = [q for q in qualifying
               if not any(other[0] < q[0] for other in qualifying)]
    if not minimal:
        return ()
    return min(minimal, key=lambda q: (len(q[1]), q[2], q[1]))[1]


def random_component_graph(rng, k):
    """Sparse weighted graph on 2..8 components with gappy, unordered ids."""
    count = rng.randint(2, 8)
    ids = rng.sample(range(30), count)
    sizes = {c: rng.randint(1, max(2, k)) for c in ids}
    weights = {}
    for a, b in itertools.combinations(sorted(ids), 2):
        if rng.random() < 0.45:
            weights[(a, b)] = rng.randint(1, 3 * k)
    return sizes, weights
