"""Monte Carlo campaigns over seeded episodes."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..pond_sim.config import ScenarioConfig
from ..pond_sim.episode import Outcome, run_episode
from ..rule_dsl.ast import RuleSet
from .stats import wilson_interval

log = logging.getLogger(__name__)

THREADS_ENV = "PONDGUARD_THREADS"


def derive_seed(root_seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{root_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class EpisodeSummary:
    index: int
    seed: int
    outcome: Outcome
    demand_count: int
    escalations: int
    ticks: int


@dataclass(frozen=True)
class CampaignResult:
    episodes: int
    collisions: int
    guard_demands: int
    wdt_escalations: int
    p_collision_hat: float
    ci95: tuple[float, float]
    root_seed: int
    ruleset_hash: str
    scenario_hash: str
    outcome_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        low, high = self.ci95
        if not 0 <= self.collisions <= self.episodes:
            raise ValueError("collisions outside [0, episodes]")
        if not 0 <= low <= self.p_collision_hat <= high <= 1:
            raise ValueError("confidence interval does not bracket the estimate")

    def to_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "collisions": self.collisions,
            "guard_demands": self.guard_demands,
            "wdt_escalations": self.wdt_escalations,
            "p_collision_hat": self.p_collision_hat,
            "ci95": list(self.ci95),
            "root_seed": self.root_seed,
            "ruleset_hash": self.ruleset_hash,
            "scenario_hash": self.scenario_hash,
            "outcome_counts": dict(sorted(self.outcome_counts.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignResult":
        return cls(**{**d, "ci95": tuple(d["ci95"])})


def _run_one(args: tuple[ScenarioConfig, RuleSet, int, int]) -> EpisodeSummary:
    cfg, rs, index, seed = args
    res = run_episode(cfg.with_seed(seed), rs)
    return EpisodeSummary(index, seed, res.outcome, res.demand_count, res.escalations, res.ticks)


def aggregate(
    summaries: Iterable[EpisodeSummary], root_seed: int, ruleset_hash: str, scenario_hash: str
) -> CampaignResult:
    """Order-independent reduction of per-episode summaries."""
    items: Sequence[EpisodeSummary] = sorted(summaries, key=lambda s: s.index)
    n = len(items)
    outcomes = Counter(s.outcome.value for s in items)
    collisions = outcomes.get(Outcome.COLLISION.value, 0)
    return CampaignResult(
        episodes=n,
        collisions=collisions,
        guard_demands=sum(s.demand_count for s in items),
        wdt_escalations=sum(s.escalations for s in items),
        p_collision_hat=collisions / n,
        ci95=wilson_interval(collisions, n),
        root_seed=root_seed,
        ruleset_hash=ruleset_hash,
        scenario_hash=scenario_hash,
        outcome_counts=dict(outcomes),
    )


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def run_episodes(
    cfg: ScenarioConfig, rs: RuleSet, episodes: int, root_seed: int, threads: int | None = None
) -> list[EpisodeSummary]:
    if episodes < 1:
        raise ValueError("a campaign needs at least one episode")
    jobs = [(cfg, rs, i, derive_seed(root_seed, i)) for i in range(episodes)]
    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1:
        return [_run_one(j) for j in jobs]
    log.info("running %d episodes on %d workers", episodes, threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, episodes // (threads * 8))))


def run_campaign(
    cfg: ScenarioConfig, rs: RuleSet, episodes: int, root_seed: int, threads: int | None = None
) -> CampaignResult:
    summaries = run_episodes(cfg, rs, episodes, root_seed, threads)
    return aggregate(summaries, root_seed, rs.source_hash, cfg.content_hash())
