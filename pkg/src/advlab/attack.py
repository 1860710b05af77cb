"""End-to-end concept-based attack: draw M candidates from the adversarial
product distribution, filter/select them, and score white-box plus
holdout-transfer success.

Candidates come from M independent Langevin chains with distinct stream ids;
grids over M reuse chain prefixes (the first M of max(M) chains), so success
metrics are measured on common candidates across M values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .netgrad import Classifier
from .sampler import GibbsTarget, LangevinConfig, default_init_for, run_chain
from .victim import VictimDistribution, target_rank

STRATEGIES = ("CONS", "AGGR")


@dataclass(frozen=True)
class AttackConfig:
    m: int
    strategy: str
    langevin: LangevinConfig
    k_list: tuple = (1,)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError("candidate count m must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"strategy must be one of {STRATEGIES}")
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        if any(k < 1 for k in self.k_list):
            raise ConfigurationError("top-k values must be >= 1")


@dataclass
class AttackResult:
    candidates: np.ndarray  # (M, d)
    target_ranks: list
    target_probs: list
    selected_index: int | None
    whitebox_top1: bool
    holdout_topk: list  # one {k: bool} dict per holdout model


def sample_adversarial_batch(dist, vic, config: AttackConfig, stream_offset: int = 0) -> np.ndarray:
    """Final states of M independent chains on the product target."""
    target = GibbsTarget(dist, vic)
    finals = [
        run_chain(target, config.langevin, stream_id=stream_offset + m)[-1]
        for m in range(config.m)
    ]
    return np.array(finals)


def select_candidate(ranks, probs, strategy: str) -> int:
    """Best (smallest) target rank; ties broken by smallest target softmax
    probability (CONS) or largest (AGGR); remaining ties by smallest index."""
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    ranks = list(ranks)
    probs = list(probs)
    if not ranks or len(ranks) != len(probs):
        raise ValueError("need non-empty rank/prob lists of equal length")
    best = 0
    for i in range(1, len(ranks)):
        if ranks[i] < ranks[best]:
            best = i
        elif ranks[i] == ranks[best]:
            if strategy == "CONS" and probs[i] < probs[best]:
                best = i
            elif strategy == "AGGR" and probs[i] > probs[best]:
                best = i
    return best


def rejection_filter(candidates, vic: VictimDistribution) -> list:
    """Indices whose white-box target rank is exactly 1."""
    return [
        i for i, x in enumerate(candidates)
        if target_rank(vic.model, x, vic.target) == 1
    ]


def evaluate_attack(selected, vic_model: Classifier, holdout_models, y_tar: int, k_list):
    """White-box top-1 flag plus per-holdout-model top-k flags."""
    for m in holdout_models:
        if m.n_classes != vic_model.n_classes or m.input_dim != vic_model.input_dim:
            raise ConfigurationError("holdout models must match the victim's shape")
    whitebox = target_rank(vic_model, selected, y_tar) == 1
    holdout_flags = []
    for m in holdout_models:
        rank = target_rank(m, selected, y_tar)
        holdout_flags.append({int(k): rank <= int(k) for k in k_list})
    return whitebox, holdout_flags


def run_attack(dist, vic: VictimDistribution, holdout_models, config: AttackConfig,
               stream_offset: int = 0) -> AttackResult:
    candidates = sample_adversarial_batch(dist, vic, config, stream_offset)
    ranks = [target_rank(vic.model, x, vic.target) for x in candidates]
    probs = [float(vic.target_prob(x)) for x in candidates]
    sel = select_candidate(ranks, probs, config.strategy)
    whitebox, holdout_flags = evaluate_attack(
        candidates[sel], vic.model, holdout_models, vic.target, config.k_list
    )
    return AttackResult(
        candidates=candidates,
        target_ranks=ranks,
        target_probs=probs,
        selected_index=sel,
        whitebox_top1=whitebox,
        holdout_topk=holdout_flags,
    )


@dataclass(frozen=True)
class AttackCase:
    """One (concept, target, setting) cell of a comparison grid."""

    concept_id: str
    target: int
    setting: str
    dist: object
    vic: VictimDistribution


@dataclass
class CaseScores:
    case: AttackCase
    candidates: np.ndarray  # (max_m, d)
    ranks: list
    probs: list
    holdout_ranks: np.ndarray  # (n_holdouts, max_m)


def score_case(case: AttackCase, holdout_models, langevin: LangevinConfig,
               max_m: int, stream_offset: int) -> CaseScores:
    cfg = AttackConfig(
        m=max_m,
        strategy="CONS",
        langevin=replace(langevin, init=default_init_for(case.dist)),
        k_list=(1,),
    )
    candidates = sample_adversarial_batch(case.dist, case.vic, cfg, stream_offset)
    ranks = [target_rank(case.vic.model, x, case.vic.target) for x in candidates]
    probs = [float(case.vic.target_prob(x)) for x in candidates]
    holdout_ranks = np.array(
        [[target_rank(m, x, case.vic.target) for x in candidates] for m in holdout_models],
        dtype=np.int64,
    ).reshape(len(holdout_models), len(candidates))
    return CaseScores(case, candidates, ranks, probs, holdout_ranks)


def score_cases(cases, holdout_models, langevin: LangevinConfig, max_m: int,
                mapper=map) -> list:
    """Score every case; chains get globally distinct stream ids."""
    jobs = [
        (case, holdout_models, langevin, max_m, j * max_m) for j, case in enumerate(cases)
    ]
    return list(mapper(_score_case_star, jobs))


def _score_case_star(args):
    return score_case(*args)


def comparison_rows(scores, m_grid, strategy: str, k_list) -> list:
    """One row per (concept, target, setting, M); candidates for M are the
    first M chains, so metrics are nested across the M grid."""
    rows = []
    for sc in scores:
        for m in m_grid:
            m = int(m)
            if not 1 <= m <= len(sc.ranks):
                raise ConfigurationError("M grid entry exceeds sampled candidates")
            sel = select_candidate(sc.ranks[:m], sc.probs[:m], strategy)
            row = {
                "concept_id": sc.case.concept_id,
                "target_class": sc.case.target,
                "setting": sc.case.setting,
                "m": m,
                "strategy": strategy,
                "whitebox_top1": bool(sc.ranks[sel] == 1),
                "selected_rank": int(sc.ranks[sel]),
                "selected_prob": float(sc.probs[sel]),
                "mean_rank": float(np.mean(sc.ranks[:m])),
            }
            sel_holdout = sc.holdout_ranks[:, sel] if sc.holdout_ranks.size else np.array([])
            for k in k_list:
                flags = sel_holdout <= int(k)
                row[f"holdout_top{int(k)}"] = float(flags.mean()) if flags.size else 0.0
            rows.append(row)
    return rows


def run_comparison(cases, holdout_models, langevin: LangevinConfig, m_grid,
                   strategy: str, k_list, mapper=map) -> list:
    """Attack every case at every M in the grid and tabulate the metrics."""
    if not cases:
        raise ValueError("need at least one attack case")
    scores = score_cases(cases, holdout_models, langevin, max(int(m) for m in m_grid), mapper)
    return comparison_rows(scores, m_grid, strategy, k_list)


def aggregate_comparison(rows, k_list) -> dict:
    """Per (setting, M): white-box success rate, mean target rank, and
    holdout top-k rates averaged over pairs and models."""
    keys = sorted({(r["setting"], r["m"]) for r in rows})
    out = {}
    for setting, m in keys:
        group = [r for r in rows if r["setting"] == setting and r["m"] == m]
        entry = {
            "n_pairs": len(group),
            "whitebox_top1_rate": float(np.mean([r["whitebox_top1"] for r in group])),
            "mean_rank": float(np.mean([r["mean_rank"] for r in group])),
        }
        for k in k_list:
            entry[f"holdout_top{int(k)}_rate"] = float(
                np.mean([r[f"holdout_top{int(k)}"] for r in group])
            )
        out[(setting, int(m))] = entry
    return out
