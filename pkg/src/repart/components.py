"""Component-based online repartitioning under doubled capacity.

Nodes that keep communicating are merged into components; a component always
lives inside one cluster. The algorithm runs on 2*ell clusters of capacity
2*k (the 4x augmentation it requires), reserving headroom in a cluster every
time a component lands there so the component can keep growing in place.
When a component set's traffic exceeds its volume times alpha, that part of
the partition has become too expensive to keep collocated: the epoch for
those components ends and they break back into singletons.

Weight bookkeeping is per unordered component pair. Remote-served requests
are tracked separately from raw weights because two distinct components can
share a cluster (their requests cost nothing but still count as weight).
"""

import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .core import Configuration, GeometryError, Params, Request, new_configuration

Move = Tuple[int, int]
PairKey = Tuple[int, int]


class InsufficientAugmentation(Exception):
    """The algorithm needs at least 4x capacity augmentation."""


class NoEligibleCluster(Exception):
    """No cluster can host a merged component.

    Unreachable when the invariants hold (some cluster always keeps k spare
    slots); raised loudly instead of silently corrupting the placement.
    """


def _pair(a: int, b: int) -> PairKey:
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# Subset searches over a weighted component graph.
#
# Both searches enumerate subsets of the component ids in ascending id order
# (include/exclude DFS). That order plus a full-key comparison gives the
# deterministic tie-breaks. Prunes only ever discard subsets that provably
# cannot beat the incumbent, so results match naive enumeration exactly.


def _weight_degrees(comps: Sequence[int],
                    weights: Dict[PairKey, int]) -> Dict[int, int]:
    deg = {c: 0 for c in comps}
    for (a, b), w in weights.items():
        if w <= 0:
            continue
        if a in deg:
            deg[a] += w
        if b in deg:
            deg[b] += w
    return deg


def find_merge_set(sizes: Dict[int, int], weights: Dict[PairKey, int],
                   k: int, alpha: int,
                   seed: Sequence[int] = ()) -> Tuple[int, ...]:
    """Largest component set X with vol(X) <= k and com(X) >= (|X|-1)*alpha.

    Ties: maximum com(X), then lexicographically smallest sorted id tuple.
    Returns () when nothing with |X| > 1 qualifies. `seed` restricts the
    search to supersets of the given ids (callers must know every qualifying
    set contains them; the empty seed searches everything).
    """
    comps = sorted(c for c in sizes if c not in seed)
    seed = tuple(sorted(seed))
    vol0 = sum(sizes[c] for c in seed)
    if vol0 > k:
        return ()
    com0 = 0
    for i, a in enumerate(seed):
        for b in seed[i + 1:]:
            com0 += weights.get((a, b), 0)
    # deg counts a component's edges to everyone, seed included, so it
    # upper-bounds the com a future pick can add.
    deg = _weight_degrees(comps, weights)
    m = len(comps)
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + deg[comps[i]]

    best_key: Optional[Tuple[int, int, Tuple[int, ...]]] = None
    best: Tuple[int, ...] = ()

    def consider(chosen: Tuple[int, ...], com: int):
        nonlocal best_key, best
        card = len(chosen)
        if card < 2 or com < (card - 1) * alpha:
            return
        key = (-card, -com, chosen)
        if best_key is None or key < best_key:
            best_key, best = key, chosen

    def dfs(i: int, chosen: Tuple[int, ...], vol: int, com: int):
        if i == m:
            return
        card = len(chosen)
        if best_key is not None and card + (k - vol) < -best_key[0]:
            return
        if com + suffix[i] < (max(card + 1, 2) - 1) * alpha:
            return
        c = comps[i]
        if vol + sizes[c] <= k:
            gained = sum(weights.get(_pair(c, d), 0) for d in chosen)
            new = tuple(sorted(chosen + (c,)))
            consider(new, com + gained)
            dfs(i + 1, new, vol + sizes[c], com + gained)
        dfs(i + 1, chosen, vol, com)

    consider(seed, com0)
    dfs(0, seed, vol0, com0)
    return best


def find_epoch_set(sizes: Dict[int, int], weights: Dict[PairKey, int],
                   k: int, alpha: int,
                   seed: Sequence[int] = ()) -> Tuple[int, ...]:
    """Minimal component set Y with vol(Y) > k and com(Y) >= vol(Y)*alpha.

    Smallest |Y| first, then smallest vol(Y), then lexicographic ids; a
    minimum-cardinality qualifying set never contains a qualifying proper
    subset, so this realizes inclusion-minimality. Returns () when no set
    qualifies.
    """
    total = sum(w for w in weights.values() if w > 0)
    if total < (k + 1) * alpha:
        return ()
    comps = sorted(c for c in sizes if c not in seed)
    seed = tuple(sorted(seed))
    vol0 = sum(sizes[c] for c in seed)
    com0 = 0
    for i, a in enumerate(seed):
        for b in seed[i + 1:]:
            com0 += weights.get((a, b), 0)
    deg = _weight_degrees(comps, weights)
    m = len(comps)
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + deg[comps[i]]

    best_key: Optional[Tuple[int, int, Tuple[int, ...]]] = None
    best: Tuple[int, ...] = ()

    def consider(chosen: Tuple[int, ...], vol: int, com: int):
        nonlocal best_key, best
        if not chosen or vol <= k or com < vol * alpha:
            return
        key = (len(chosen), vol, chosen)
        if best_key is None or key < best_key:
            best_key, best = key, chosen

    def dfs(i: int, chosen: Tuple[int, ...], vol: int, com: int):
        if i == m:
            return
        card = len(chosen)
        if best_key is not None and card >= best_key[0]:
            return
        if com + suffix[i] < alpha * max(vol + 1, k + 1):
            return
        c = comps[i]
        gained = sum(weights.get(_pair(c, d), 0) for d in chosen)
        new = tuple(sorted(chosen + (c,)))
        consider(new, vol + sizes[c], com + gained)
        dfs(i + 1, new, vol + sizes[c], com + gained)
        dfs(i + 1, chosen, vol, com)

    consider(seed, vol0, com0)
    dfs(0, seed, vol0, com0)
    return best


# ---------------------------------------------------------------------------
# The online algorithm proper.


class ComponentRepartitioner:
    """Merge-and-reset repartitioner; needs delta >= 4.

    Conforms to the engine's step protocol with all moves in the pre slot:
    a request that triggers a merge is then served inside the new cluster.
    """

    def __init__(self, params: Params, initial: Configuration):
        if params.delta < 4:
            raise InsufficientAugmentation(
                "need delta >= 4, got %d" % params.delta)
        if (initial.cluster_count != params.ell
                or initial.cluster_capacity != params.k):
            raise GeometryError("initial placement must be ell clusters of k")
        self.params = params
        self.n, self.k, self.alpha = params.n, params.k, params.alpha
        self.clusters = 2 * params.ell
        self.capacity = 2 * params.k

        # Singleton components; component id of a singleton is its node id,
        # merged components draw fresh ids from next_cid.
        self.comp_of: List[int] = list(range(self.n))
        self.comp_nodes: Dict[int, List[int]] = {v: [v] for v in range(self.n)}
        self.comp_cluster: Dict[int, int] = {
            v: initial.cluster_of(v) for v in range(self.n)}
        self.comp_reserved: Dict[int, int] = {
            v: min(1, self.k - 1) for v in range(self.n)}
        self.next_cid = self.n

        self.weights: Dict[PairKey, int] = {}
        self.pair_remote: Dict[PairKey, int] = {}
        self.comm_paid: Dict[int, int] = {v: 0 for v in range(self.n)}
        self.move_count: Dict[int, int] = {v: 0 for v in range(self.n)}
        self.violations: List[str] = []    # audit failures at epoch ends

        self.start = new_configuration(
            {v: initial.cluster_of(v) for v in range(self.n)},
            self.clusters, self.capacity)

    # -- ledger -------------------------------------------------------------

    def occupancy(self) -> List[int]:
        occ = [0] * self.clusters
        for cid, nodes in self.comp_nodes.items():
            occ[self.comp_cluster[cid]] += len(nodes)
        return occ

    def reserved_space(self) -> List[int]:
        res = [0] * self.clusters
        for cid, r in self.comp_reserved.items():
            res[self.comp_cluster[cid]] += r
        return res

    def spare(self) -> List[int]:
        occ, res = self.occupancy(), self.reserved_space()
        return [self.capacity - occ[s] - res[s] for s in range(self.clusters)]

    def sizes(self) -> Dict[int, int]:
        return {cid: len(nodes) for cid, nodes in self.comp_nodes.items()}

    # -- step ---------------------------------------------------------------

    def step(self, config: Configuration, req: Request) -> Tuple[List[Move], List[Move]]:
        u, v = req.u, req.v
        cu, cv = self.comp_of[u], self.comp_of[v]
        moves: List[Move] = []
        epoch_fired = False
        if cu != cv:
            key = _pair(cu, cv)
            self.weights[key] = self.weights.get(key, 0) + 1
            merge_set = find_merge_set(
                self.sizes(), self.weights, self.k, self.alpha, seed=(cu, cv))
            if len(merge_set) > 1:
                moves += self._merge(merge_set)
            seeds = {self.comp_of[u], self.comp_of[v]}
            epoch_set = find_epoch_set(
                self.sizes(), self.weights, self.k, self.alpha,
                seed=tuple(seeds))
            if epoch_set:
                moves += self._end_epoch(epoch_set)
                epoch_fired = True
        fu, fv = self.comp_of[u], self.comp_of[v]
        # the serve that closes an epoch is charged to the epoch it closed,
        # so the new epoch's counters stay at zero
        if not epoch_fired and self.comp_cluster[fu] != self.comp_cluster[fv]:
            pk = _pair(fu, fv)
            self.pair_remote[pk] = self.pair_remote.get(pk, 0) + 1
        return moves, []

    # -- merging ------------------------------------------------------------

    def _merge(self, merge_set: Sequence[int]) -> List[Move]:
        members = list(merge_set)
        vol = sum(len(self.comp_nodes[c]) for c in members)
        anchor = max(members, key=lambda c: (
            self.comp_reserved[c], len(self.comp_nodes[c]), -c))
        if self.comp_reserved[anchor] >= vol - len(self.comp_nodes[anchor]):
            target = self.comp_cluster[anchor]
            new_reserved = self.comp_reserved[anchor] - (
                vol - len(self.comp_nodes[anchor]))
        else:
            need = min(self.k, 2 * vol)
            spare = self.spare()
            residents = [0] * self.clusters
            for c in members:
                residents[self.comp_cluster[c]] += len(self.comp_nodes[c])
            eligible = [s for s in range(self.clusters) if spare[s] >= need]
            if not eligible:
                raise NoEligibleCluster(
                    "no cluster with %d spare for a merge of volume %d"
                    % (need, vol))
            target = max(eligible, key=lambda s: (residents[s], -s))
            new_reserved = min(self.k - vol, vol)

        moves = []
        nodes: List[int] = []
        for c in members:
            for node in self.comp_nodes[c]:
                nodes.append(node)
                if self.comp_cluster[c] != target:
                    moves.append((node, target))
                    self.move_count[node] += 1
        nodes.sort()

        cid = self.next_cid
        self.next_cid += 1
        inside = set(members)
        paid = sum(self.comm_paid.pop(c) for c in members)
        new_weights: Dict[PairKey, int] = {}
        for (a, b), w in self.weights.items():
            a_in, b_in = a in inside, b in inside
            if a_in and b_in:
                continue
            if a_in or b_in:
                other = b if a_in else a
                nk = _pair(cid, other)
                new_weights[nk] = new_weights.get(nk, 0) + w
            else:
                new_weights[(a, b)] = new_weights.get((a, b), 0) + w
        self.weights = {key: w for key, w in new_weights.items() if w > 0}
        new_remote: Dict[PairKey, int] = {}
        for (a, b), w in self.pair_remote.items():
            a_in, b_in = a in inside, b in inside
            if a_in and b_in:
                paid += w
            elif a_in or b_in:
                other = b if a_in else a
                nk = _pair(cid, other)
                new_remote[nk] = new_remote.get(nk, 0) + w
            else:
                new_remote[(a, b)] = new_remote.get((a, b), 0) + w
        self.pair_remote = new_remote
        self.comm_paid[cid] = paid

        for c in members:
            del self.comp_nodes[c]
            del self.comp_cluster[c]
            del self.comp_reserved[c]
        self.comp_nodes[cid] = nodes
        self.comp_cluster[cid] = target
        self.comp_reserved[cid] = new_reserved
        for node in nodes:
            self.comp_of[node] = cid
        return moves

    # -- epoch end ----------------------------------------------------------

    def _end_epoch(self, epoch_set: Sequence[int]) -> List[Move]:
        members = list(epoch_set)
        vol = sum(len(self.comp_nodes[c]) for c in members)
        self._audit_epoch(members, vol)

        inside = set(members)
        new_singletons: List[int] = []
        for c in members:
            cluster = self.comp_cluster[c]
            for node in self.comp_nodes[c]:
                self.comp_of[node] = node
                self.comp_nodes[node] = [node]
                self.comp_cluster[node] = cluster
                self.comp_reserved[node] = min(1, self.k - 1)
                self.comm_paid[node] = 0
                self.move_count[node] = 0
                new_singletons.append(node)
            if c >= self.n:
                del self.comp_nodes[c]
                del self.comp_cluster[c]
                del self.comp_reserved[c]
                del self.comm_paid[c]
        # Splitting reuses node ids as component ids, so node-id keys that
        # survive in the weight maps would alias the new singletons; edges
        # touching the epoch set reset to zero.
        self.weights = {
            key: w for key, w in self.weights.items()
            if key[0] not in inside and key[1] not in inside}
        self.pair_remote = {
            key: w for key, w in self.pair_remote.items()
            if key[0] not in inside and key[1] not in inside}

        moves: List[Move] = []
        evicted = 0
        while True:
            occ, res = self.occupancy(), self.reserved_space()
            over = [occ[s] + res[s] - self.capacity for s in range(self.clusters)]
            worst = max(range(self.clusters), key=lambda s: (over[s], -s))
            if over[worst] <= 0:
                break
            singles = sorted(
                cid for cid, nodes in self.comp_nodes.items()
                if len(nodes) == 1 and self.comp_cluster[cid] == worst)
            if not singles:
                raise NoEligibleCluster(
                    "over-committed cluster %d has no singleton to move" % worst)
            mover = singles[0]
            spare = [self.capacity - occ[s] - res[s] for s in range(self.clusters)]
            target = max(range(self.clusters), key=lambda s: (spare[s], -s))
            self.comp_cluster[mover] = target
            moves.append((mover, target))
            evicted += 1
        if 2 * evicted > vol + 2:
            self.violations.append(
                "epoch end moved %d singletons, cap %.1f" % (evicted, vol / 2 + 1))
        return moves

    def _audit_epoch(self, members: Sequence[int], vol: int):
        migrations = sum(self.move_count[node]
                         for c in members for node in self.comp_nodes[c])
        cap = vol * math.ceil(math.log2(self.k)) if self.k > 1 else 0
        if migrations > cap:
            self.violations.append(
                "epoch migrations %d exceed %d" % (migrations, cap))
        paid = sum(self.comm_paid[c] for c in members)
        inside = set(members)
        for (a, b), w in self.pair_remote.items():
            if a in inside and b in inside:
                paid += w
        if paid > 2 * vol * self.alpha:
            self.violations.append(
                "epoch remote serves %d exceed %d" % (paid, 2 * vol * self.alpha))

    # -- inspection ---------------------------------------------------------

    def residual_merge_set(self) -> Tuple[int, ...]:
        """Generic merge search restricted to weight-bearing components.

        Isolated components only raise the cardinality requirement without
        adding traffic, so a qualifying set exists iff one exists among
        components with positive weight degree. Empty means the state is
        merge-exhausted, as it must be after every completed step.
        """
        sizes = self.sizes()
        deg = _weight_degrees(sorted(sizes), self.weights)
        live = {c: s for c, s in sizes.items() if deg[c] > 0}
        return find_merge_set(live, self.weights, self.k, self.alpha)

    def check_invariants(self, config: Optional[Configuration] = None) -> List[str]:
        errs = list(self.violations)
        sizes = self.sizes()
        seen: Set[int] = set()
        for cid, nodes in self.comp_nodes.items():
            for node in nodes:
                if self.comp_of[node] != cid:
                    errs.append("node %d not mapped to component %d" % (node, cid))
                seen.add(node)
        if seen != set(range(self.n)):
            errs.append("components do not partition the node set")
        occ, res = self.occupancy(), self.reserved_space()
        if sum(occ) != self.n:
            errs.append("occupancy sums to %d, not %d" % (sum(occ), self.n))
        for s in range(self.clusters):
            if occ[s] + res[s] > self.capacity:
                errs.append("cluster %d over capacity: o=%d r=%d"
                            % (s, occ[s], res[s]))
        if max(self.capacity - occ[s] - res[s]
               for s in range(self.clusters)) < self.k:
            errs.append("no cluster keeps k spare slots")
        for cid, r in self.comp_reserved.items():
            if not 0 <= r <= max(self.k - 1, 0) or r > sizes[cid]:
                errs.append("component %d reserved %d out of range" % (cid, r))
        for (a, b), w in self.weights.items():
            if a not in sizes or b not in sizes:
                errs.append("weight %r keyed to a dead component" % ((a, b),))
                continue
            if w <= 0:
                errs.append("weight %r not positive" % ((a, b),))
            bound = self.alpha if sizes[a] + sizes[b] <= self.k else (
                sizes[a] + sizes[b]) * self.alpha
            if w >= bound:
                errs.append("edge %r weight %d breaches %d" % ((a, b), w, bound))
        for cid, paid in self.comm_paid.items():
            if paid > (sizes[cid] - 1) * self.alpha:
                errs.append("component %d paid %d remote serves, cap %d"
                            % (cid, paid, (sizes[cid] - 1) * self.alpha))
        for cid, nodes in self.comp_nodes.items():
            per_node_cap = math.ceil(math.log2(max(2, len(nodes))))
            total = 0
            for node in nodes:
                total += self.move_count[node]
                if self.move_count[node] > per_node_cap:
                    errs.append("node %d moved %d times in component of %d"
                                % (node, self.move_count[node], len(nodes)))
            size = len(nodes)
            comp_cap = size * math.ceil(math.log2(size)) if size > 1 else 0
            if total > comp_cap:
                errs.append("component %d total moves %d exceed %d"
                            % (cid, total, comp_cap))
        if config is not None:
            for node in range(self.n):
                if config.cluster_of(node) != self.comp_cluster[self.comp_of[node]]:
                    errs.append("node %d placement disagrees with engine" % node)
        return errs

    def dump_state(self) -> str:
        lines = []
        for cid in sorted(self.comp_nodes):
            lines.append("component %d: nodes=%s cluster=%d reserved=%d paid=%d"
                         % (cid,
                            ",".join(str(x) for x in self.comp_nodes[cid]),
                            self.comp_cluster[cid], self.comp_reserved[cid],
                            self.comm_paid[cid]))
        for (a, b) in sorted(self.weights):
            lines.append("weight %d-%d: %d" % (a, b, self.weights[(a, b)]))
        occ, res = self.occupancy(), self.reserved_space()
        for s in range(self.clusters):
            lines.append("cluster %d: o=%d r=%d f=%d"
                         % (s, occ[s], res[s], self.capacity - occ[s] - res[s]))
        return "\n".join(lines)
