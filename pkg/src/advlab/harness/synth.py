"""Synthetic blob datasets, toy concepts, and classifier construction."""

from __future__ import annotations

import numpy as np

from ..distributions import Concept, augment_concept
from ..errors import ConfigurationError
from ..netgrad import LabeledDataset, train_classifier
from ..numerics import RngStream, project_box
from .config import (
    STREAM_AUGMENT_BASE,
    STREAM_CONCEPTS,
    STREAM_DATASET,
    STREAM_HOLDOUT_BASE,
    STREAM_VICTIM,
    ExperimentConfig,
)


def synth_dataset(cfg: ExperimentConfig, rng: RngStream) -> LabeledDataset:
    """Per-class isotropic Gaussian blobs projected into the box."""
    means = np.asarray(cfg.blobs.means, dtype=np.float64)
    if np.any(means < 0.0) or np.any(means > 1.0):
        raise ConfigurationError("blob means must lie in [0, 1]^d")
    n = cfg.blobs.samples_per_class
    points, labels = [], []
    for cls in range(cfg.class_count):
        pts = means[cls] + cfg.blobs.spread * rng.normal((n, cfg.dimension))
        points.append(project_box(pts))
        labels.append(np.full(n, cls, dtype=np.int64))
    return LabeledDataset(np.vstack(points), np.concatenate(labels))


def make_toy_concepts(cfg: ExperimentConfig, rng: RngStream) -> list:
    """Small clusters placed away from every attack-target blob mean.

    Centers are rejection-sampled uniformly inside a margin; members are the
    center plus Gaussian spread, projected back to the box.
    """
    target_means = np.asarray(cfg.blobs.means, dtype=np.float64)[list(cfg.targets)]
    margin = 0.08
    concepts = []
    for i in range(cfg.concepts.count):
        center = None
        for _ in range(10_000):
            cand = margin + (1.0 - 2.0 * margin) * rng.uniform(cfg.dimension)
            if np.min(np.linalg.norm(target_means - cand, axis=1)) >= cfg.concepts.min_target_distance:
                center = cand
                break
        if center is None:
            raise ConfigurationError(
                "could not place a concept center away from the target blobs; "
                "lower min_target_distance"
            )
        members = project_box(center + cfg.concepts.spread * rng.normal((cfg.concepts.members, cfg.dimension)))
        concepts.append(Concept(f"concept-{i:02d}", members))

    if cfg.concepts.augment_n > 0:
        concepts = [
            augment_concept(
                c,
                cfg.concepts.augment_n,
                cfg.concepts.augment_jitter,
                transforms=None,
                rng=RngStream(cfg.seed, STREAM_AUGMENT_BASE + i),
            )
            for i, c in enumerate(concepts)
        ]
    return concepts


def build_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    return synth_dataset(cfg, RngStream(cfg.seed, STREAM_DATASET))


def build_concepts(cfg: ExperimentConfig) -> list:
    return make_toy_concepts(cfg, RngStream(cfg.seed, STREAM_CONCEPTS))


def build_models(cfg: ExperimentConfig, data: LabeledDataset | None = None):
    """Train the victim and the independently initialized holdout models."""
    if data is None:
        data = build_dataset(cfg)
    sizes = [cfg.dimension, *cfg.victim.hidden, cfg.class_count]
    victim_model = train_classifier(
        data, sizes, cfg.victim.epochs, cfg.victim.learning_rate,
        RngStream(cfg.seed, STREAM_VICTIM),
    )
    holdout_models = []
    for i, hidden in enumerate(cfg.holdouts.hidden):
        holdout_models.append(
            train_classifier(
                data,
                [cfg.dimension, *hidden, cfg.class_count],
                cfg.holdouts.epochs,
                cfg.holdouts.learning_rate,
                RngStream(cfg.seed, STREAM_HOLDOUT_BASE + i),
            )
        )
    return victim_model, holdout_models
