"""Command-line entry point.

Subcommands (each takes --config PATH plus optional --out, --seed, --jobs):

    train-victim    synthesize blobs, train victim + holdouts, save models
    fit-concept     synthesize concepts, fit kernel mixtures, save concepts
    estimate-delta  KL-difference estimates for every (concept, target) pair
    attack          one concept-based attack with per-candidate metrics
    compare         concept vs single-member benchmark over the M grid
    sweep-m         the same benchmark over the sweep M grid
    verify-theory   closed-form / oracle KL consistency checks

Every run is a pure function of the effective config document: outputs are
byte-identical across re-runs. Exit codes: 0 success, 2 usage/config error,
1 runtime failure; failures also print a JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from ..attack import (
    AttackCase,
    AttackConfig,
    aggregate_comparison,
    rejection_filter,
    run_attack,
    run_comparison,
)
from ..distributions import Concept, IsotropicGaussianDist, fit_concept_kde, save_concept
from ..errors import ConfigurationError
from ..kldiv import DELTA_CSV_COLUMNS, estimate_delta, grid_kl_oracle, kl_gaussians_closed_form, kl_vs_variance_sweep, padded_grid
from ..netgrad import accuracy, mean_loss, save_model
from ..numerics import GENERATOR_ID, RngStream
from ..sampler import LangevinConfig, default_init_for
from ..victim import VictimDistribution
from .config import (
    STREAM_DELTA_BASE,
    ExperimentConfig,
    config_hash,
    load_config,
    parse_config,
)
from .reports import ReportBundle, emit_report, render_scatter_svg
from .synth import build_concepts, build_dataset, build_models


@dataclass
class RunContext:
    cfg: ExperimentConfig
    hash: str
    out: Path
    jobs: int = 1

    @property
    def metadata(self) -> dict:
        return {"generator": GENERATOR_ID, "seed": self.cfg.seed, "config_hash": self.hash}

    @property
    def mapper(self):
        return make_mapper(self.jobs)


def make_mapper(jobs: int):
    if jobs <= 1:
        return map

    def mapper(fn, items):
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))

    return mapper


def _error_record(kind: str, message: str) -> None:
    print(json.dumps({"status": "error", "kind": kind, "message": message}), file=sys.stderr)


def _langevin_config(cfg: ExperimentConfig, init: str) -> LangevinConfig:
    lv = cfg.attack.langevin
    return LangevinConfig(
        step_size=lv.step_size,
        steps=lv.steps,
        burn_in=lv.burn_in,
        thinning=lv.thinning,
        init=init,
        seed=cfg.seed,
    )


def _single_member_dist(concept: Concept, bandwidth) -> IsotropicGaussianDist:
    if bandwidth == "scott":
        single = Concept(concept.id + "/single", concept.members[:1])
        h = fit_concept_kde(single, "scott").bandwidth
    else:
        h = float(bandwidth)
    return IsotropicGaussianDist(concept.members[0], h * h)


def cmd_train_victim(ctx: RunContext) -> int:
    cfg = ctx.cfg
    data = build_dataset(cfg)
    victim_model, holdout_models = build_models(cfg, data)

    models_dir = ctx.out / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    extra = {"config_hash": ctx.hash}
    save_model(victim_model, models_dir / "victim.json", extra=extra)
    rows = [
        [
            "victim",
            "x".join(str(h) for h in cfg.victim.hidden) or "-",
            cfg.victim.epochs,
            cfg.victim.learning_rate,
            accuracy(victim_model, data),
            mean_loss(victim_model, data),
        ]
    ]
    holdout_acc = []
    for i, model in enumerate(holdout_models):
        save_model(model, models_dir / f"holdout-{i}.json", extra=extra)
        acc = accuracy(model, data)
        holdout_acc.append(acc)
        rows.append(
            [
                f"holdout-{i}",
                "x".join(str(h) for h in cfg.holdouts.hidden[i]) or "-",
                cfg.holdouts.epochs,
                cfg.holdouts.learning_rate,
                acc,
                mean_loss(model, data),
            ]
        )

    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table(
        "training", ["model", "hidden", "epochs", "learning_rate", "train_accuracy", "mean_loss"], rows
    )
    bundle.summary = {
        "victim_accuracy": accuracy(victim_model, data),
        "holdout_accuracies": holdout_acc,
        "n_points": len(data),
    }
    emit_report(bundle, ctx.out)
    return 0


def cmd_fit_concept(ctx: RunContext) -> int:
    cfg = ctx.cfg
    concepts = build_concepts(cfg)
    concepts_dir = ctx.out / "concepts"
    concepts_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for concept in concepts:
        save_concept(concept, concepts_dir / f"{concept.id}.json", extra={"config_hash": ctx.hash})
        kde = fit_concept_kde(concept, cfg.attack.bandwidth)
        rows.append([concept.id, concept.size, concept.dim, kde.bandwidth])

    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table("concepts", ["concept_id", "members", "dimension", "bandwidth"], rows)
    bundle.summary = {"n_concepts": len(concepts)}
    emit_report(bundle, ctx.out)
    return 0


def _delta_pair(job):
    d1, d2, vic, n, seed, stream_id, crn, p_share = job
    return estimate_delta(d1, d2, vic, n, RngStream(seed, stream_id), crn=crn, p_share=p_share)


def cmd_estimate_delta(ctx: RunContext) -> int:
    cfg = ctx.cfg
    victim_model, _ = build_models(cfg)
    concepts = build_concepts(cfg)
    d = cfg.delta

    p_share = None
    if d.corrected:
        p_share = IsotropicGaussianDist(np.full(cfg.dimension, 0.5), d.share_sigma**2)

    jobs = []
    pairs = list(product(concepts, cfg.targets))
    for p_idx, (concept, target) in enumerate(pairs):
        d1 = fit_concept_kde(concept, d.bandwidth)
        d2 = _single_member_dist(concept, d.single_member_bandwidth)
        vic = VictimDistribution(victim_model, target, cfg.victim_c)
        jobs.append((d1, d2, vic, d.n, cfg.seed, STREAM_DELTA_BASE + p_idx, d.crn, p_share))
    estimates = list(ctx.mapper(_delta_pair, jobs))

    rows, negative, excludes_zero = [], 0, 0
    for (concept, target), est in zip(pairs, estimates):
        rows.append([concept.id, target, est.n, est.crn, est.corrected, est.value, est.std_err])
        lo, hi = est.interval95()
        negative += est.value < 0
        excludes_zero += est.value < 0 and hi < 0

    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table("delta", DELTA_CSV_COLUMNS, rows)
    bundle.summary = {
        "n_pairs": len(rows),
        "frac_negative": negative / len(rows),
        "frac_negative_excluding_zero": excludes_zero / len(rows),
        "mean_delta": float(np.mean([e.value for e in estimates])),
    }
    emit_report(bundle, ctx.out)
    return 0


def cmd_attack(ctx: RunContext) -> int:
    cfg = ctx.cfg
    data = build_dataset(cfg)
    victim_model, holdout_models = build_models(cfg, data)
    concepts = build_concepts(cfg)
    if not 0 <= cfg.attack.concept_index < len(concepts):
        raise ConfigurationError("attack concept_index out of range")
    if not 0 <= cfg.attack.target_index < len(cfg.targets):
        raise ConfigurationError("attack target_index out of range")
    concept = concepts[cfg.attack.concept_index]
    target = cfg.targets[cfg.attack.target_index]

    dist = fit_concept_kde(concept, cfg.attack.bandwidth)
    vic = VictimDistribution(victim_model, target, cfg.victim_c)
    attack_cfg = AttackConfig(
        m=max(cfg.attack.m_grid),
        strategy=cfg.attack.strategy,
        langevin=_langevin_config(cfg, default_init_for(dist)),
        k_list=cfg.attack.k_list,
    )
    result = run_attack(dist, vic, holdout_models, attack_cfg)
    kept = set(rejection_filter(result.candidates, vic))

    rows = []
    for i, x in enumerate(result.candidates):
        rows.append(
            [i, result.target_ranks[i], result.target_probs[i], i == result.selected_index, i in kept]
            + [float(v) for v in x]
        )
    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table(
        "attack_candidates",
        ["candidate", "target_rank", "target_prob", "selected", "rejection_kept"]
        + [f"x{i}" for i in range(cfg.dimension)],
        rows,
    )
    bundle.summary = {
        "concept_id": concept.id,
        "target_class": int(target),
        "strategy": cfg.attack.strategy,
        "m": attack_cfg.m,
        "whitebox_top1": bool(result.whitebox_top1),
        "selected_index": int(result.selected_index),
        "holdout_topk": [
            {str(k): bool(v) for k, v in flags.items()} for flags in result.holdout_topk
        ],
        "rejection_kept": sorted(kept),
    }
    if cfg.dimension == 2:
        bundle.svgs["attack_scatter"] = render_scatter_svg(
            ctx.metadata,
            blob_means=np.asarray(cfg.blobs.means),
            concept_members=concept.members,
            candidates=result.candidates,
            selected=result.candidates[result.selected_index],
        )
    else:
        bundle.note(f"svg skipped: dimension {cfg.dimension} != 2")
    emit_report(bundle, ctx.out)
    return 0


def _comparison_cases(cfg: ExperimentConfig, victim_model, concepts) -> list:
    cases = []
    for concept in concepts:
        d_full = fit_concept_kde(concept, cfg.attack.bandwidth)
        d_single = IsotropicGaussianDist(
            concept.members[0], cfg.attack.single_member_sigma**2
        )
        for target in cfg.targets:
            vic = VictimDistribution(victim_model, target, cfg.victim_c)
            cases.append(AttackCase(concept.id, int(target), "concept", d_full, vic))
            cases.append(AttackCase(concept.id, int(target), "single", d_single, vic))
    return cases


def _run_benchmark(ctx: RunContext, m_grid, table_name: str) -> int:
    cfg = ctx.cfg
    data = build_dataset(cfg)
    victim_model, holdout_models = build_models(cfg, data)
    concepts = build_concepts(cfg)
    cases = _comparison_cases(cfg, victim_model, concepts)

    rows = run_comparison(
        cases,
        holdout_models,
        _langevin_config(cfg, "uniform-box"),
        m_grid,
        cfg.attack.strategy,
        cfg.attack.k_list,
        mapper=ctx.mapper,
    )
    columns = [
        "concept_id", "target_class", "setting", "m", "strategy",
        "whitebox_top1", "selected_rank", "selected_prob", "mean_rank",
    ] + [f"holdout_top{k}" for k in cfg.attack.k_list]
    table_rows = [[row[col] for col in columns] for row in rows]

    aggregates = aggregate_comparison(rows, cfg.attack.k_list)
    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table(table_name, columns, table_rows)
    bundle.summary = {
        f"{setting},m={m}": stats for (setting, m), stats in sorted(aggregates.items())
    }
    emit_report(bundle, ctx.out)
    return 0


def cmd_compare(ctx: RunContext) -> int:
    return _run_benchmark(ctx, ctx.cfg.attack.m_grid, "comparison")


def cmd_sweep_m(ctx: RunContext) -> int:
    return _run_benchmark(ctx, ctx.cfg.sweep_m_grid, "sweep_m")


def cmd_verify_theory(ctx: RunContext) -> int:
    rows = []

    def check(name, value, reference, tol):
        ok = bool(abs(value - reference) <= tol)
        rows.append([name, value, reference, tol, ok])
        return ok

    p = IsotropicGaussianDist([0.0], 4.0)
    sweep, threshold = kl_vs_variance_sweep(p, 0.0, [0.5, 1.0, 2.0, 3.0, 4.0])
    kls = [kl for _, kl in sweep]
    decreasing = all(a > b for a, b in zip(kls, kls[1:]))
    rows.append(["variance_sweep_strictly_decreasing", float(decreasing), 1.0, 0.0, decreasing])
    rows.append(["variance_sweep_threshold", threshold, 4.0, 1e-12, abs(threshold - 4.0) <= 1e-12])
    expected = {1.0: 0.8068528194400546, 2.0: 0.1534264097200274, 4.0: 0.0}
    for s2, kl in sweep:
        if s2 in expected:
            check(f"kl_at_variance_{s2}", kl, expected[s2], 1e-6)
    kl8 = kl_gaussians_closed_form(p, IsotropicGaussianDist([0.0], 8.0))
    kl4 = kl_gaussians_closed_form(p, IsotropicGaussianDist([0.0], 4.0))
    rows.append(["kl_rises_past_threshold", kl8, kl4, 0.0, bool(kl8 > kl4)])

    q = IsotropicGaussianDist([0.0], 4.0)
    for mu in (-1.0, -0.5, 0.0, 0.5, 1.0):
        for v in (0.25, 0.5, 1.0, 2.0, 4.0):
            pp = IsotropicGaussianDist([mu], v)
            closed = kl_gaussians_closed_form(pp, q)
            grid = padded_grid(q, resolution=64)
            numeric = grid_kl_oracle(pp, q, grid)
            check(f"oracle_agreement_mu={mu}_var={v}", numeric, closed, 1e-4)

    all_pass = all(r[-1] for r in rows)
    bundle = ReportBundle(metadata=ctx.metadata)
    bundle.add_table("theory_checks", ["check", "value", "reference", "tolerance", "pass"], rows)
    bundle.summary = {"all_pass": all_pass, "n_checks": len(rows)}
    emit_report(bundle, ctx.out)
    return 0 if all_pass else 1


COMMANDS = {
    "train-victim": cmd_train_victim,
    "fit-concept": cmd_fit_concept,
    "estimate-delta": cmd_estimate_delta,
    "attack": cmd_attack,
    "compare": cmd_compare,
    "sweep-m": cmd_sweep_m,
    "verify-theory": cmd_verify_theory,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advlab",
        description="Desk-scale lab for concept-based probabilistic attacks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to the JSON config")
        sp.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else 2
        if code != 0:
            _error_record("usage", "invalid arguments (see usage above)")
        return code

    try:
        cfg, raw = load_config(args.config)
        if args.seed is not None:
            raw = dict(raw)
            raw["seed"] = int(args.seed)
            cfg = parse_config(raw)
        ctx = RunContext(
            cfg=cfg,
            hash=config_hash(raw),
            out=Path(args.out) if args.out else Path(cfg.output_dir),
            jobs=max(1, int(args.jobs)),
        )
    except ConfigurationError as e:
        _error_record("usage", str(e))
        return 2

    try:
        return COMMANDS[args.command](ctx)
    except ConfigurationError as e:
        _error_record("usage", str(e))
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary, report and fail
        _error_record("runtime", f"{type(e).__name__}: {e}")
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
