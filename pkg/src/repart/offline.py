"""Exact offline optima on small instances.

Partitions are label-free: a state is a set partition of the nodes into
ell blocks of size k, canonicalized as blocks sorted by least member.
Transition costs between states come from core.min_migration_cost, so two
partitions that differ only by cluster labels are the same state at
distance zero.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    Configuration,
    Params,
    Request,
    TooLarge,
    min_migration_cost,
)

PARTITION_CAP = 100_000

Partition = Tuple[Tuple[int, ...], ...]


class MalformedProfile(Exception):
    pass


def partition_count(n: int, k: int, ell: int) -> int:
    return math.factorial(n) // (math.factorial(k) ** ell * math.factorial(ell))


def enumerate_partitions(n: int, k: int, ell: int) -> List[Partition]:
    """All partitions of range(n) into ell unordered blocks of size k."""
    if n != k * ell:
        raise TooLarge("n must equal k * ell")
    if partition_count(n, k, ell) > PARTITION_CAP:
        raise TooLarge("partition space above %d states" % PARTITION_CAP)

    out: List[Partition] = []

    def build(remaining: Tuple[int, ...], acc: Tuple[Tuple[int, ...], ...]):
        if not remaining:
            out.append(acc)
            return
        head = remaining[0]
        rest = remaining[1:]
        # head always anchors the next block, so each partition appears once
        for mates in itertools.combinations(rest, k - 1):
            block = (head,) + mates
            left = tuple(x for x in rest if x not in mates)
            build(left, acc + (block,))

    build(tuple(range(n)), ())
    return out


def partition_of_configuration(config: Configuration) -> Partition:
    blocks = [tuple(config.nodes_in(c)) for c in range(config.cluster_count)]
    blocks = [b for b in blocks if b]
    return tuple(sorted(blocks, key=lambda b: b[0]))


def _configuration_of_partition(p: Partition, k: int, ell: int) -> Configuration:
    assignment = {}
    for c, block in enumerate(p):
        for v in block:
            assignment[v] = c
    n = k * ell
    return Configuration([assignment[v] for v in range(n)], ell, k)


class PartitionSpace:
    """Enumerated partition states with cached pairwise transition costs."""

    def __init__(self, params: Params):
        self.params = params
        self.partitions = enumerate_partitions(params.n, params.k, params.ell)
        self.index: Dict[Partition, int] = {p: i for i, p in enumerate(self.partitions)}
        self._configs = [_configuration_of_partition(p, params.k, params.ell)
                         for p in self.partitions]
        # node -> block index, for O(1) serve checks
        self._block_of = [c.assignment for c in self._configs]
        self._trans: Optional[List[List[int]]] = None

    def __len__(self):
        return len(self.partitions)

    def state_of(self, config: Configuration) -> int:
        p = partition_of_configuration(config)
        if p not in self.index:
            raise TooLarge("configuration is not a balanced ell x k placement")
        return self.index[p]

    def serves(self, request: Request, state: int) -> int:
        b = self._block_of[state]
        return 1 if b[request.u] != b[request.v] else 0

    def transitions(self) -> List[List[int]]:
        if self._trans is None:
            m = len(self.partitions)
            alpha = self.params.alpha
            t = [[0] * m for _ in range(m)]
            for i in range(m):
                for j in range(i + 1, m):
                    c = min_migration_cost(self._configs[i], self._configs[j], alpha)
                    t[i][j] = c
                    t[j][i] = c
            self._trans = t
        return self._trans


def optimal_cost(requests: Sequence[Request], params: Params,
                 initial: Configuration,
                 space: Optional[PartitionSpace] = None
                 ) -> Tuple[int, List[Partition]]:
    """Dynamic program over partition states.

    Per step the offline player first moves (paying the transition), then
    serves. Returns the optimal total and one optimal state schedule
    (initial state first), ties resolved toward the lowest state index.
    """
    if space is None:
        space = PartitionSpace(params)
    trans = space.transitions()
    m = len(space)
    start = space.state_of(initial)
    dist = [None] * m
    dist[start] = 0
    parents: List[List[int]] = []
    for req in requests:
        ndist = [None] * m
        parent = [0] * m
        for s in range(m):
            best = None
            arg = 0
            for sp in range(m):
                d = dist[sp]
                if d is None:
                    continue
                c = d + trans[sp][s]
                if best is None or c < best:
                    best = c
                    arg = sp
            ndist[s] = best + space.serves(req, s)
            parent[s] = arg
        dist = ndist
        parents.append(parent)
    end = min(range(m),
              key=lambda s: (math.inf if dist[s] is None else dist[s], s))
    total = dist[end] or 0
    path = [end]
    for parent in reversed(parents):
        path.append(parent[path[-1]])
    path.reverse()
    return total, [space.partitions[s] for s in path]


def static_optimal(requests: Sequence[Request], params: Params,
                   initial: Configuration,
                   space: Optional[PartitionSpace] = None
                   ) -> Tuple[int, Partition]:
    """Best single partition: pay once to reach it, then never move."""
    if space is None:
        space = PartitionSpace(params)
    trans = space.transitions()
    start = space.state_of(initial)
    best = None
    best_state = 0
    for s in range(len(space)):
        c = trans[start][s] + sum(space.serves(r, s) for r in requests)
        if best is None or c < best:
            best = c
            best_state = s
    return best, space.partitions[best_state]


def exhaustive_optimal(requests: Sequence[Request], params: Params,
                       initial: Configuration,
                       space: Optional[PartitionSpace] = None) -> int:
    """Brute force over every state sequence. Tiny instances only."""
    if space is None:
        space = PartitionSpace(params)
    if len(requests) > 8:
        raise TooLarge("exhaustive search capped at 8 requests")
    if len(space) > 30:
        raise TooLarge("exhaustive search capped at 30 partitions")
    trans = space.transitions()
    start = space.state_of(initial)
    best = None
    for seq in itertools.product(range(len(space)), repeat=len(requests)):
        cost = 0
        prev = start
        for req, s in zip(requests, seq):
            cost += trans[prev][s] + space.serves(req, s)
            prev = s
        if best is None or cost < best:
            best = cost
    return 0 if best is None else best


def reference_strategies_k2(profile: Sequence[int], alpha: int) -> Tuple[int, int, int]:
    """Offline reference costs against a k=2 phase-chase profile.

    profile[p] is the number of requests the adversary issued in phase p+1.
    Three fixed strategies bracket the offline optimum: never move (pays the
    odd phases), move once before phase 1 (pays the even phases plus one
    swap), or re-collocate every phase (one swap each).
    """
    if not profile:
        raise MalformedProfile("empty phase profile")
    if any(w < 1 for w in profile):
        raise MalformedProfile("every phase must contain at least one request")
    cost_never = sum(w for i, w in enumerate(profile) if i % 2 == 0)
    cost_first = sum(w for i, w in enumerate(profile) if i % 2 == 1) + 2 * alpha
    cost_each = 2 * alpha * len(profile)
    return cost_never, cost_first, cost_each
