"""Greedy rematcher for clusters of size two.

Every split request feeds an outgoing counter on both endpoint clusters
and a counter on the node pair. When a cluster's outgoing counter reaches
lam * alpha it picks the cluster it talked to most, collocates the hottest
pair across the two by one swap (cost 2 * alpha), and resets every counter
touching the four nodes involved. The swap lands after the triggering
request is served, so the full quantum of lam * alpha requests is paid
remotely between swaps touching a cluster.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

from .core import Configuration, GeometryError, Params, Request

DEFAULT_LAM = 3


class GreedyMatcher:
    def __init__(self, params: Params, lam: int = DEFAULT_LAM):
        if params.k != 2:
            raise GeometryError("greedy rematcher requires k=2, got k=%d" % params.k)
        if params.delta != 1:
            raise GeometryError("greedy rematcher is unaugmented (delta=1)")
        if lam < 1:
            raise GeometryError("lam must be >= 1")
        self.params = params
        self.lam = lam
        self.out_counts: Dict[int, int] = {}
        self.pair_counts: Dict[Tuple[int, int], int] = {}

    def _pair_sum(self, config: Configuration, c1: int, c2: int) -> int:
        total = 0
        for x in config.nodes_in(c1):
            for y in config.nodes_in(c2):
                total += self.pair_counts.get((min(x, y), max(x, y)), 0)
        return total

    def step(self, config: Configuration, request: Request):
        u, v = request.u, request.v
        cu, cv = config.cluster_of(u), config.cluster_of(v)
        if cu == cv:
            return [], []
        key = (min(u, v), max(u, v))
        self.pair_counts[key] = self.pair_counts.get(key, 0) + 1
        self.out_counts[cu] = self.out_counts.get(cu, 0) + 1
        self.out_counts[cv] = self.out_counts.get(cv, 0) + 1
        threshold = self.lam * self.params.alpha
        hot = [c for c in (min(cu, cv), max(cu, cv))
               if self.out_counts.get(c, 0) >= threshold]
        if not hot:
            return [], []
        c1 = hot[0]
        if len(hot) == 2:
            # both endpoint clusters tripped; one swap must reset both
            c2 = hot[1]
        else:
            c2 = max((c for c in range(config.cluster_count) if c != c1),
                     key=lambda c: (self._pair_sum(config, c1, c), -c))
        best_pair = None
        best_count = -1
        for x in config.nodes_in(c1):
            for y in config.nodes_in(c2):
                cnt = self.pair_counts.get((min(x, y), max(x, y)), 0)
                if cnt > best_count:
                    best_count = cnt
                    best_pair = (x, y)
        x, y = best_pair
        mate = next(w for w in config.nodes_in(c1) if w != x)
        touched = set(config.nodes_in(c1)) | set(config.nodes_in(c2))
        for k in list(self.pair_counts):
            if k[0] in touched or k[1] in touched:
                del self.pair_counts[k]
        self.out_counts.pop(c1, None)
        self.out_counts.pop(c2, None)
        # y joins x; x's mate takes y's slot. Applied after the serve.
        return [], [(y, c1), (mate, c2)]
