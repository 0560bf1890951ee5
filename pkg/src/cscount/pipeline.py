"""End-to-end estimation: filter, tree-sample, and fall back to graph sampling."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .candidate_space import RefinementConfig, build_initial_cs, refine_candidate_space
from .graph import DEFAULT_CYCLE_CAP, CycleIndex, LabeledGraph, build_cycle_index
from .graph_sampler import DEFAULT_K, DEFAULT_SUBSET_DIVISOR, candidate_graph_sampling
from .tree_sampler import StoppingConfig, ZeroEmbeddings, candidate_tree_sampling, choose_spanning_tree

MODES = ("auto", "tree-only", "graph-only")


class DisconnectedQueryError(ValueError):
    pass


@dataclass
class EstimatorConfig:
    alpha: float = 0.05
    c: float = 1.25
    tau: float = 0.9
    R: float = 5.0
    phi: float = 2 / 3
    K: float = DEFAULT_K
    k_frac: int = DEFAULT_SUBSET_DIVISOR
    tri_cap: int = DEFAULT_CYCLE_CAP
    quad_cap: int = DEFAULT_CYCLE_CAP
    early_fail_trials: int = 50_000
    early_fail_successes: int = 10
    trial_cap: int = 400_000
    seed: int | None = None
    mode: str = "auto"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.k_frac < 1:
            raise ValueError("k_frac must be at least 1")
        if self.K <= 0:
            raise ValueError("K must be positive")
        # delegate remaining range checks
        self.refinement()
        self.stopping()

    def refinement(self) -> RefinementConfig:
        return RefinementConfig(phi=self.phi, tau=self.tau, R=self.R)

    def stopping(self) -> StoppingConfig:
        return StoppingConfig(
            alpha=self.alpha,
            c=self.c,
            early_fail_trials=self.early_fail_trials,
            early_fail_successes=self.early_fail_successes,
            trial_cap=self.trial_cap,
        )


@dataclass
class EstimateResult:
    estimate: float
    method: str  # "tree", "graph" or "zero-shortcut"
    tree_trials: int = 0
    tree_successes: int = 0
    graph_samples_used: int = 0
    timings: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    candidate_trees: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def q_error(estimate: float, truth: float) -> float:
    if estimate < 0 or truth < 0:
        raise ValueError("q-error needs non-negative inputs")
    e, t = max(1.0, estimate), max(1.0, truth)
    return max(t / e, e / t)


def signed_log_q_error(estimate: float, truth: float) -> float:
    """log10 q-error, positive for overestimates."""
    e, t = max(1.0, estimate), max(1.0, truth)
    return math.log10(e / t)


def estimate(
    q: LabeledGraph,
    g: LabeledGraph,
    config: EstimatorConfig | None = None,
    cycle_g: CycleIndex | None = None,
    cycle_q: CycleIndex | None = None,
) -> EstimateResult:
    """Estimate the number of embeddings of ``q`` in ``g``.

    ``cycle_g`` should be built once per data graph and shared across queries.
    """
    config = config or EstimatorConfig()
    if q.vertex_count == 0 or not q.is_connected():
        raise DisconnectedQueryError("query graph must be non-empty and connected")
    rng = np.random.default_rng(config.seed)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    if cycle_g is None:
        cycle_g = build_cycle_index(g, config.tri_cap, config.quad_cap)
    if cycle_q is None:
        cycle_q = build_cycle_index(q, config.tri_cap, config.quad_cap)
    timings["index"] = time.perf_counter() - t0

    def zero() -> EstimateResult:
        timings["total"] = time.perf_counter() - t0
        return EstimateResult(0.0, "zero-shortcut", timings=timings, seed=config.seed)

    t = time.perf_counter()
    cs = build_initial_cs(q, g)
    if not cs.empty:
        refine_candidate_space(cs, cycle_q, cycle_g, config.refinement())
    timings["filter"] = time.perf_counter() - t
    if cs.empty:
        return zero()

    t = time.perf_counter()
    try:
        tree = choose_spanning_tree(cs)
    except ZeroEmbeddings:
        return zero()

    result = EstimateResult(0.0, "tree", timings=timings, seed=config.seed)
    successes = 0
    if config.mode != "graph-only":
        tr = candidate_tree_sampling(cs, config.stopping(), rng, tree=tree)
        timings["tree_sampling"] = time.perf_counter() - t
        if tr.total == 0:
            return zero()
        result.tree_trials, result.tree_successes = tr.trials, tr.successes
        result.candidate_trees = tr.total
        result.estimate = tr.estimate
        successes = tr.successes
        if not tr.early_fail or config.mode == "tree-only":
            timings["total"] = time.perf_counter() - t0
            return result

    t = time.perf_counter()
    est, used = candidate_graph_sampling(cs, successes, rng, K=config.K, k=config.k_frac)
    timings["graph_sampling"] = time.perf_counter() - t
    result.estimate = est
    result.method = "graph"
    result.graph_samples_used = used
    timings["total"] = time.perf_counter() - t0
    return result
