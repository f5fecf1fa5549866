"""Cluster partitions of the stock universe and cluster pairing rules.

A ClusterAssignment maps every ticker to a cluster id in 1..k. Pairings mark
which clusters are treated as mutually most distant when portfolios draw
from paired clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .correlation import DistanceMatrix


class ClusterError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterAssignment:
    assignment: dict[str, int]  # ticker -> cluster id in 1..k
    method: str  # HCT | MST | NN | INDUSTRY

    def __post_init__(self) -> None:
        ids = sorted(set(self.assignment.values()))
        if not self.assignment:
            raise ClusterError("empty assignment")
        if ids != list(range(1, len(ids) + 1)):
            raise ClusterError(f"cluster ids must be 1..k, got {ids}")

    @property
    def k(self) -> int:
        return max(self.assignment.values())

    def members(self, cluster_id: int) -> tuple[str, ...]:
        return tuple(sorted(t for t, c in self.assignment.items() if c == cluster_id))

    def clusters(self) -> dict[int, tuple[str, ...]]:
        return {c: self.members(c) for c in range(1, self.k + 1)}

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(self.members(c)) for c in range(1, self.k + 1))


@dataclass(frozen=True)
class ClusterPairing:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for a, b in self.pairs:
            if a == b or a in seen or b in seen:
                raise ClusterError("each cluster may appear in at most one pair")
            seen.update((a, b))


def renumber(groups: list[tuple[str, ...]], method: str) -> ClusterAssignment:
    """Number groups 1..k by lexicographically smallest member for determinism."""
    ordered = sorted(groups, key=lambda g: min(g))
    mapping = {t: i + 1 for i, g in enumerate(ordered) for t in g}
    return ClusterAssignment(mapping, method)


def pair_by_size(assignment: ClusterAssignment) -> ClusterPairing:
    """Pair the largest cluster with the smallest, second largest with second
    smallest, and so on (the rule used for unbalanced dendrogram clusters)."""
    if assignment.k % 2 != 0:
        raise ClusterError("size pairing requires an even cluster count")
    by_size = sorted(range(1, assignment.k + 1), key=lambda c: (len(assignment.members(c)), c))
    pairs = []
    for i in range(assignment.k // 2):
        pairs.append(tuple(sorted((by_size[i], by_size[-1 - i]))))
    return ClusterPairing(tuple(sorted(pairs)))


def mean_intercluster_distance(assignment: ClusterAssignment, dist: DistanceMatrix, a: int, b: int) -> float:
    ia = [dist.ticker_index(t) for t in assignment.members(a)]
    ib = [dist.ticker_index(t) for t in assignment.members(b)]
    return float(np.mean(dist.d[np.ix_(ia, ib)]))


def pair_by_distance(assignment: ClusterAssignment, dist: DistanceMatrix) -> ClusterPairing:
    """Perfect matching of clusters maximizing total mean inter-cluster distance."""
    if assignment.k % 2 != 0:
        raise ClusterError("distance pairing requires an even cluster count")
    ids = list(range(1, assignment.k + 1))
    gap = {
        (a, b): mean_intercluster_distance(assignment, dist, a, b)
        for a, b in combinations(ids, 2)
    }

    best_pairs: tuple[tuple[int, int], ...] | None = None
    best_total = -np.inf

    def matchings(remaining: list[int], chosen: list[tuple[int, int]], total: float) -> None:
        nonlocal best_pairs, best_total
        if not remaining:
            if total > best_total:
                best_total, best_pairs = total, tuple(sorted(chosen))
            return
        first = remaining[0]
        for other in remaining[1:]:
            rest = [c for c in remaining if c not in (first, other)]
            matchings(rest, chosen + [(first, other)], total + gap[(first, other)])

    matchings(ids, [], 0.0)
    assert best_pairs is not None
    return ClusterPairing(best_pairs)
