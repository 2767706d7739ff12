"""Campaign statistics, ALARP banding and the claims-arguments-evidence graph."""

from .cae import (
    CaeError,
    CaeGraph,
    CaeNode,
    EvidencePayload,
    HashConflict,
    HazardGroup,
    InvalidGraph,
    NodeKind,
    NodeNotFound,
    NotEvidenceNode,
    attach_evidence,
    default_cae_skeleton,
    load_graph,
)
from .campaign import (
    THREADS_ENV,
    CampaignResult,
    EpisodeSummary,
    aggregate,
    default_threads,
    derive_seed,
    run_campaign,
    run_episodes,
)
from .stats import Z95, AlarpBand, ConsequenceProfile, NegativeDose, alarp_band, wilson_interval

__all__ = [
    "AlarpBand", "CaeError", "CaeGraph", "CaeNode", "CampaignResult", "ConsequenceProfile",
    "EpisodeSummary", "EvidencePayload", "HashConflict", "HazardGroup", "InvalidGraph",
    "NegativeDose", "NodeKind", "NodeNotFound", "NotEvidenceNode", "THREADS_ENV", "Z95",
    "aggregate", "alarp_band", "attach_evidence", "default_cae_skeleton", "default_threads",
    "derive_seed", "load_graph", "run_campaign", "run_episodes", "wilson_interval",
]
