"""Experiment configuration: a single JSON document fully determines a run.

No environment overrides exist, so the SHA-256 of the canonical JSON form
(the config hash) is a complete fingerprint of what was requested. A master
seed plus fixed stream-id ranges derive every random stream in a run:

    0 .. 9_999      Langevin chains (case index * max_M + chain index)
    10_000          dataset synthesis
    10_001          concept synthesis
    10_002          victim initialization
    10_100 + i      holdout classifier i
    20_000 + p      KL-difference estimation for pair p
    30_000 + i      augmentation of concept i
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError

STREAM_DATASET = 10_000
STREAM_CONCEPTS = 10_001
STREAM_VICTIM = 10_002
STREAM_HOLDOUT_BASE = 10_100
STREAM_DELTA_BASE = 20_000
STREAM_AUGMENT_BASE = 30_000


@dataclass(frozen=True)
class BlobSpec:
    means: tuple
    spread: float
    samples_per_class: int


@dataclass(frozen=True)
class ConceptSpec:
    count: int
    members: int
    spread: float
    min_target_distance: float = 0.2
    augment_n: int = 0
    augment_jitter: float = 0.0


@dataclass(frozen=True)
class TrainSpec:
    hidden: tuple
    epochs: int
    learning_rate: float


@dataclass(frozen=True)
class HoldoutSpec:
    hidden: tuple  # one hidden-layer tuple per holdout model
    epochs: int
    learning_rate: float


@dataclass(frozen=True)
class LangevinSpec:
    step_size: float
    steps: int
    burn_in: int = 0
    thinning: int = 1


@dataclass(frozen=True)
class AttackSpec:
    m_grid: tuple
    strategy: str
    k_list: tuple
    bandwidth: object  # "scott" or a fixed float
    single_member_sigma: float
    langevin: LangevinSpec
    concept_index: int = 0
    target_index: int = 0


@dataclass(frozen=True)
class DeltaSpec:
    n: int
    crn: bool = True
    corrected: bool = False
    bandwidth: object = "scott"
    single_member_bandwidth: object = "scott"
    share_sigma: float = 5.0


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    class_count: int
    seed: int
    output_dir: str
    targets: tuple
    blobs: BlobSpec
    concepts: ConceptSpec
    victim: TrainSpec
    victim_c: float
    holdouts: HoldoutSpec
    attack: AttackSpec
    delta: DeltaSpec
    sweep_m_grid: tuple = field(default=())


def _positive(value, name):
    if value <= 0:
        raise ConfigurationError(f"{name} must be positive")
    return value


def _bandwidth(value, name):
    if value == "scott":
        return "scott"
    try:
        h = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be 'scott' or a positive number") from None
    return _positive(h, name)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw JSON document into an ExperimentConfig."""
    try:
        dimension = int(raw["dimension"])
        class_count = int(raw["class_count"])
        seed = int(raw["seed"])
        targets = tuple(int(t) for t in raw["targets"])
        b, c, v, h, a, d = (raw[k] for k in ("blobs", "concepts", "victim", "holdouts", "attack", "delta"))
    except KeyError as e:
        raise ConfigurationError(f"missing config key: {e.args[0]}") from None

    _positive(dimension, "dimension")
    _positive(class_count, "class_count")
    if not targets:
        raise ConfigurationError("need at least one target class")
    if any(not 0 <= t < class_count for t in targets):
        raise ConfigurationError("target classes must lie in [0, class_count)")

    means = tuple(tuple(float(x) for x in row) for row in b["means"])
    if len(means) != class_count or any(len(row) != dimension for row in means):
        raise ConfigurationError("blob means must be class_count rows of dimension entries")
    blobs = BlobSpec(
        means=means,
        spread=_positive(float(b["spread"]), "blob spread"),
        samples_per_class=_positive(int(b["samples_per_class"]), "samples_per_class"),
    )

    concepts = ConceptSpec(
        count=_positive(int(c["count"]), "concept count"),
        members=_positive(int(c["members"]), "concept members"),
        spread=_positive(float(c["spread"]), "concept spread"),
        min_target_distance=float(c.get("min_target_distance", 0.2)),
        augment_n=int(c.get("augment_n", 0)),
        augment_jitter=float(c.get("augment_jitter", 0.0)),
    )
    if concepts.augment_n < 0 or concepts.augment_jitter < 0:
        raise ConfigurationError("augmentation settings must be nonnegative")

    victim = TrainSpec(
        hidden=tuple(int(x) for x in v.get("hidden", [16])),
        epochs=int(v["epochs"]),
        learning_rate=_positive(float(v["learning_rate"]), "victim learning_rate"),
    )
    if victim.epochs < 0:
        raise ConfigurationError("victim epochs must be >= 0")
    victim_c = _positive(float(v.get("c", 1.0)), "victim c")

    holdouts = HoldoutSpec(
        hidden=tuple(tuple(int(x) for x in row) for row in h.get("hidden", [])),
        epochs=int(h.get("epochs", victim.epochs)),
        learning_rate=_positive(float(h.get("learning_rate", victim.learning_rate)), "holdout learning_rate"),
    )

    lv = a["langevin"]
    langevin = LangevinSpec(
        step_size=_positive(float(lv["step_size"]), "step_size"),
        steps=_positive(int(lv["steps"]), "steps"),
        burn_in=int(lv.get("burn_in", 0)),
        thinning=int(lv.get("thinning", 1)),
    )
    k_list = tuple(int(k) for k in a.get("k_list", [1]))
    if any(not 1 <= k <= class_count for k in k_list):
        raise ConfigurationError("k_list entries must lie in [1, class_count]")
    attack = AttackSpec(
        m_grid=tuple(_positive(int(m), "m") for m in a["m_grid"]),
        strategy=str(a.get("strategy", "CONS")),
        k_list=k_list,
        bandwidth=_bandwidth(a.get("bandwidth", "scott"), "attack bandwidth"),
        single_member_sigma=_positive(float(a.get("single_member_sigma", 0.05)), "single_member_sigma"),
        langevin=langevin,
        concept_index=int(a.get("concept_index", 0)),
        target_index=int(a.get("target_index", 0)),
    )
    if attack.strategy not in ("CONS", "AGGR"):
        raise ConfigurationError("attack strategy must be CONS or AGGR")

    delta = DeltaSpec(
        n=_positive(int(d["n"]), "delta n"),
        crn=bool(d.get("crn", True)),
        corrected=bool(d.get("corrected", False)),
        bandwidth=_bandwidth(d.get("bandwidth", "scott"), "delta bandwidth"),
        single_member_bandwidth=_bandwidth(
            d.get("single_member_bandwidth", "scott"), "single_member_bandwidth"
        ),
        share_sigma=_positive(float(d.get("share_sigma", 5.0)), "share_sigma"),
    )

    return ExperimentConfig(
        dimension=dimension,
        class_count=class_count,
        seed=seed,
        output_dir=str(raw.get("output_dir", "out")),
        targets=targets,
        blobs=blobs,
        concepts=concepts,
        victim=victim,
        victim_c=victim_c,
        holdouts=holdouts,
        attack=attack,
        delta=delta,
        sweep_m_grid=tuple(int(m) for m in raw.get("sweep_m_grid", a["m_grid"])),
    )


def load_config(path) -> tuple[ExperimentConfig, dict]:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    return parse_config(raw), raw


def config_hash(raw: dict) -> str:
    """SHA-256 of the canonical (sorted, compact) JSON form."""
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def toy_benchmark_config(seed: int = 20240601) -> dict:
    """Default desk benchmark: 2-D, 6 blob classes, 10 concepts, 5 targets."""
    import numpy as np

    angles = np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
    means = [
        [0.5 + 0.33 * float(np.cos(t)), 0.5 + 0.33 * float(np.sin(t))] for t in angles
    ]
    return {
        "dimension": 2,
        "class_count": 6,
        "seed": seed,
        "output_dir": "out",
        "targets": [0, 1, 2, 3, 4],
        "blobs": {"means": means, "spread": 0.045, "samples_per_class": 300},
        "concepts": {
            "count": 10,
            "members": 30,
            "spread": 0.05,
            "min_target_distance": 0.22,
        },
        "victim": {"hidden": [24], "epochs": 400, "learning_rate": 0.8, "c": 40.0},
        "holdouts": {"hidden": [[16], [32], [24, 12]], "epochs": 400, "learning_rate": 0.8},
        "attack": {
            "m_grid": [1, 5, 10],
            "strategy": "CONS",
            "k_list": [1, 3],
            "bandwidth": "scott",
            "single_member_sigma": 0.05,
            "langevin": {"step_size": 5e-4, "steps": 800, "burn_in": 0, "thinning": 1},
        },
        "delta": {"n": 10000, "crn": True, "corrected": False},
    }
