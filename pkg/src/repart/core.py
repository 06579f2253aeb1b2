"""Cost model primitives shared by every algorithm and oracle.

Nodes live in fixed-capacity clusters. A request between two nodes costs 1
when they sit in different clusters and 0 otherwise; moving a node between
clusters costs alpha. Everything here is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union


class RepartError(Exception):
    pass


class GeometryError(RepartError):
    pass


class CapacityExceeded(RepartError):
    pass


class DuplicateNode(RepartError):
    pass


class UnknownCluster(RepartError):
    pass


class UnknownNode(RepartError):
    pass


class ShapeMismatch(RepartError):
    pass


class TooLarge(RepartError):
    pass


@dataclass(frozen=True)
class Params:
    """Instance shape: n nodes, ell clusters of k slots, integer costs."""

    n: int
    k: int
    ell: int
    alpha: int = 1
    delta: int = 1  # capacity factor granted to the online side

    def __post_init__(self):
        if self.n != self.k * self.ell:
            raise GeometryError("n must equal k * ell, got n=%d k=%d ell=%d"
                                % (self.n, self.k, self.ell))
        if self.k < 1 or self.ell < 1:
            raise GeometryError("k and ell must be positive")
        if not isinstance(self.alpha, int) or self.alpha < 1:
            raise GeometryError("alpha must be an integer >= 1")
        if not isinstance(self.delta, int) or self.delta < 1:
            raise GeometryError("delta must be an integer >= 1")


@dataclass(frozen=True)
class Request:
    u: int
    v: int
    t: int = 0  # 1-based step index, 0 when not yet scheduled

    def __post_init__(self):
        if self.u == self.v:
            raise GeometryError("request endpoints must differ, got %d" % self.u)
        if self.u < 0 or self.v < 0:
            raise UnknownNode("negative node id in request")


class Configuration:
    """Immutable node -> cluster assignment with fixed capacities."""

    def __init__(self, assignment: Sequence[int], cluster_count: int,
                 cluster_capacity: int):
        self.assignment: Tuple[int, ...] = tuple(assignment)
        self.cluster_count = cluster_count
        self.cluster_capacity = cluster_capacity
        counts = [0] * cluster_count
        for v, c in enumerate(self.assignment):
            if not 0 <= c < cluster_count:
                raise UnknownCluster("node %d assigned to cluster %d" % (v, c))
            counts[c] += 1
            if counts[c] > cluster_capacity:
                raise CapacityExceeded("cluster %d over capacity %d"
                                       % (c, cluster_capacity))
        self._counts = tuple(counts)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def cluster_of(self, v: int) -> int:
        if not 0 <= v < len(self.assignment):
            raise UnknownNode("node %d outside [0, %d)" % (v, len(self.assignment)))
        return self.assignment[v]

    def nodes_in(self, c: int) -> List[int]:
        if not 0 <= c < self.cluster_count:
            raise UnknownCluster("cluster %d outside [0, %d)" % (c, self.cluster_count))
        return [v for v, cc in enumerate(self.assignment) if cc == c]

    def occupancy(self, c: int) -> int:
        if not 0 <= c < self.cluster_count:
            raise UnknownCluster("cluster %d outside [0, %d)" % (c, self.cluster_count))
        return self._counts[c]

    def canonical(self) -> str:
        return "%d/%d:%s" % (self.cluster_count, self.cluster_capacity,
                             ",".join(str(c) for c in self.assignment))

    def __eq__(self, other):
        return (isinstance(other, Configuration)
                and self.assignment == other.assignment
                and self.cluster_count == other.cluster_count
                and self.cluster_capacity == other.cluster_capacity)

    def __hash__(self):
        return hash((self.assignment, self.cluster_count, self.cluster_capacity))

    def __repr__(self):
        return "Configuration(%s)" % self.canonical()


AssignmentLike = Union[Mapping[int, int], Sequence[int]]


def new_configuration(assignment: AssignmentLike, cluster_count: int,
                      cluster_capacity: int) -> Configuration:
    """Build a validated configuration from a node->cluster mapping."""
    if isinstance(assignment, Mapping):
        n = len(assignment)
        flat = [-1] * n
        for v, c in assignment.items():
            if not 0 <= v < n:
                raise UnknownNode("node id %d outside [0, %d)" % (v, n))
            flat[v] = c
        assignment = flat
    return Configuration(assignment, cluster_count, cluster_capacity)


def configuration_from_clusters(clusters: Mapping[int, Iterable[int]],
                                cluster_count: int,
                                cluster_capacity: int) -> Configuration:
    """Inverse form: cluster -> nodes. Duplicate node placements are rejected."""
    seen: Dict[int, int] = {}
    for c, nodes in clusters.items():
        for v in nodes:
            if v in seen:
                raise DuplicateNode("node %d placed in clusters %d and %d"
                                    % (v, seen[v], c))
            seen[v] = c
    if not seen:
        raise GeometryError("empty cluster map")
    n = max(seen) + 1
    if len(seen) != n:
        raise UnknownNode("cluster map must cover node ids 0..%d" % (n - 1))
    return new_configuration(seen, cluster_count, cluster_capacity)


def contiguous_configuration(params: Params) -> Configuration:
    """Canonical initial placement: node i sits in cluster i // k."""
    return Configuration([v // params.k for v in range(params.n)],
                         params.ell, params.k)


def serve_cost(config: Configuration, request: Request) -> int:
    """1 if the endpoints are split across clusters, else 0. Symmetric."""
    return 1 if config.cluster_of(request.u) != config.cluster_of(request.v) else 0


def apply_moves(config: Configuration, moves: Sequence[Tuple[int, int]],
                alpha: int) -> Tuple[Configuration, int]:
    """Apply a batch of (node, target cluster) moves atomically.

    Cost is alpha per node whose cluster actually changed; moves onto the
    current cluster are free. Capacity is validated on the final placement
    only, so batches may pass through transient overfull states.
    """
    if not moves:
        return config, 0
    new_assignment = list(config.assignment)
    for v, c in moves:
        if not 0 <= v < config.n:
            raise UnknownNode("move for unknown node %d" % v)
        if not 0 <= c < config.cluster_count:
            raise UnknownCluster("move to unknown cluster %d" % c)
        new_assignment[v] = c
    changed = sum(1 for v in range(config.n)
                  if new_assignment[v] != config.assignment[v])
    out = Configuration(new_assignment, config.cluster_count,
                        config.cluster_capacity)
    return out, alpha * changed


def _overlap_matrix(a: Configuration, b: Configuration) -> List[List[int]]:
    m = [[0] * b.cluster_count for _ in range(a.cluster_count)]
    for v in range(a.n):
        m[a.assignment[v]][b.assignment[v]] += 1
    return m


def min_migration_cost(a: Configuration, b: Configuration, alpha: int) -> int:
    """Cheapest node-move cost turning a into b up to cluster relabeling.

    Equals alpha * (n - best overlap) where the best overlap maximizes the
    number of nodes whose cluster label can be matched under some bijection
    of cluster ids. Exhaustive over label permutations for up to 8 clusters,
    assignment solving beyond that.
    """
    if (a.n != b.n or a.cluster_count != b.cluster_count
            or a.cluster_capacity != b.cluster_capacity):
        raise ShapeMismatch("configurations disagree on n, cluster count, or capacity")
    m = _overlap_matrix(a, b)
    ell = a.cluster_count
    if ell <= 8:
        best = max(sum(m[i][p[i]] for i in range(ell))
                   for p in itertools.permutations(range(ell)))
    else:
        from scipy.optimize import linear_sum_assignment

        rows, cols = linear_sum_assignment([[-x for x in row] for row in m])
        best = sum(m[i][j] for i, j in zip(rows, cols))
    return alpha * (a.n - best)


@dataclass
class CostLedger:
    """Running totals plus the per-step trail behind them."""

    comm_total: int = 0
    mig_total: int = 0
    per_step: List[Tuple[int, int]] = field(default_factory=list)  # (comm_t, mig_t)

    def record(self, comm_t: int, mig_t: int):
        self.comm_total += comm_t
        self.mig_total += mig_t
        self.per_step.append((comm_t, mig_t))

    @property
    def total(self) -> int:
        return self.comm_total + self.mig_total
