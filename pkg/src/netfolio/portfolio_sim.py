"""Portfolio selection strategies and the Monte Carlo replication harness.

Five strategies: uniform random, industry super-groups, and correlation
clusters from each network method. Portfolios are equal-weight buy-and-hold;
a draw's return is the arithmetic mean of its constituents' period returns.
Replication rng streams derive from (seed, replication index), so results
are identical regardless of execution order or parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import reference
from .clusters import ClusterAssignment, ClusterPairing
from .market_data import ReturnPanel


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class IndustryMap:
    groups: dict[str, int]  # ticker -> super-group id

    def __post_init__(self) -> None:
        if len(set(self.groups.values())) < 2:
            raise SimulationError("need at least 2 industry groups")

    def group_members(self) -> dict[int, tuple[str, ...]]:
        out: dict[int, list[str]] = {}
        for t, g in sorted(self.groups.items()):
            out.setdefault(g, []).append(t)
        return {g: tuple(ms) for g, ms in sorted(out.items())}


def default_industry_map() -> IndustryMap:
    return IndustryMap(dict(reference.SUPER_GROUPS))


@dataclass(frozen=True)
class PortfolioDraw:
    replication: int
    tickers: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.tickers)) != len(self.tickers):
            raise SimulationError("portfolio tickers must be distinct")

    @property
    def m(self) -> int:
        return len(self.tickers)


@dataclass(frozen=True)
class SimulationRun:
    strategy: str
    m: int
    seed: int
    period: str
    returns: np.ndarray  # per-replication portfolio returns, percent

    @property
    def replications(self) -> int:
        return len(self.returns)


def select_random(universe: tuple[str, ...], m: int, rng: np.random.Generator,
                  replication: int = 0) -> PortfolioDraw:
    """m distinct tickers, uniform without replacement."""
    if m > len(universe):
        raise SimulationError(f"cannot draw {m} from {len(universe)} tickers")
    picks = rng.choice(sorted(universe), size=m, replace=False)
    return PortfolioDraw(replication, tuple(str(t) for t in picks))


def _grouped_draw(groups: dict[int, tuple[str, ...]], m: int, rng: np.random.Generator,
                  pairing: ClusterPairing | None = None) -> tuple[str, ...]:
    """One stock from each of m groups when m <= group count, else an even
    number per group; for m=2 over four groups, restrict to a mutually
    distant pair when a pairing is supplied."""
    ids = sorted(groups)
    c = len(ids)
    if m <= 4 and m <= c:
        if m < c and pairing is not None and pairing.pairs and m == 2:
            pair = pairing.pairs[int(rng.integers(len(pairing.pairs)))]
            chosen = list(pair)
        else:
            chosen = list(rng.choice(ids, size=m, replace=False))
        return tuple(str(rng.choice(groups[g])) for g in chosen)
    if m >= c and m % c == 0:
        per = m // c
        picks: list[str] = []
        for g in ids:
            if len(groups[g]) < per:
                raise SimulationError(
                    f"group {g} has {len(groups[g])} stocks; cannot take {per} distinct"
                )
            picks.extend(str(t) for t in rng.choice(groups[g], size=per, replace=False))
        return tuple(picks)
    raise SimulationError(f"portfolio size {m} incompatible with {c} groups")


def select_industry(industry: IndustryMap, m: int, rng: np.random.Generator,
                    replication: int = 0) -> PortfolioDraw:
    """Uniform group-stratified draw over the industry super-groups."""
    if m > 4 and m != 8:
        raise SimulationError("industry selection supports m <= 4 or m = 8")
    groups = industry.group_members()
    if m == 8 and len(groups) != 4:
        raise SimulationError("m=8 industry selection needs exactly 4 groups")
    return PortfolioDraw(replication, _grouped_draw(groups, m, rng))


def select_cluster(assignment: ClusterAssignment, pairing: ClusterPairing | None,
                   m: int, rng: np.random.Generator, replication: int = 0) -> PortfolioDraw:
    """Industry-style stratified draw over correlation clusters.

    With more clusters than stocks wanted (m=2, c=4) the two clusters come
    from one uniformly chosen entry of the pairing when one is given.
    """
    if m > 4 and m != 8:
        raise SimulationError("cluster selection supports m <= 4 or m = 8")
    c = assignment.k
    if c not in (2, 4):
        raise SimulationError("cluster selection expects 2 or 4 clusters")
    groups = assignment.clusters()
    return PortfolioDraw(replication, _grouped_draw(groups, m, rng, pairing))


def portfolio_return(draw: PortfolioDraw, returns: ReturnPanel, period: str) -> float:
    """Equal-weight buy-and-hold period return (%), exact for simple returns."""
    row = returns.returns_for(period)
    idx = []
    for t in draw.tickers:
        if t not in returns.tickers:
            raise SimulationError(f"unknown ticker {t!r} in draw")
        idx.append(returns.tickers.index(t))
    return float(np.mean(row[idx]))


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one replication."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(replication,)))


@dataclass(frozen=True)
class Strategy:
    """A named selection rule bound to its inputs."""

    name: str
    kind: str  # random | industry | cluster
    universe: tuple[str, ...] = ()
    industry: IndustryMap | None = None
    assignment: ClusterAssignment | None = None
    pairing: ClusterPairing | None = None

    def draw(self, m: int, rng: np.random.Generator, replication: int = 0) -> PortfolioDraw:
        if self.kind == "random":
            return select_random(self.universe, m, rng, replication)
        if self.kind == "industry":
            assert self.industry is not None
            return select_industry(self.industry, m, rng, replication)
        if self.kind == "cluster":
            assert self.assignment is not None
            return select_cluster(self.assignment, self.pairing, m, rng, replication)
        raise SimulationError(f"unknown strategy kind {self.kind!r}")


def run_simulation(
    strategy: Strategy,
    returns: ReturnPanel,
    period: str,
    m: int,
    reps: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> SimulationRun:
    """reps independent draws scored by portfolio_return.

    Deterministic for fixed (seed, strategy, m) at any worker count.
    """

    def one(rep: int) -> float:
        draw = strategy.draw(m, replication_rng(seed, rep), rep)
        return portfolio_return(draw, returns, period)

    if workers <= 1:
        values = [one(rep) for rep in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, range(reps)))
    return SimulationRun(strategy.name, m, seed, period, np.array(values))


def cluster_mean_returns(
    assignment: ClusterAssignment, returns: ReturnPanel, period: str
) -> list[tuple[int, float, int]]:
    """Per-cluster (id, mean member return %, size)."""
    out = []
    for cid, members in assignment.clusters().items():
        vals = [portfolio_return(PortfolioDraw(0, (t,)), returns, period) for t in members]
        out.append((cid, float(np.mean(vals)), len(members)))
    return out
