"""Hierarchical object detection with a deep Q-learning agent."""

from ._core import (
    Box,
    GroundTruth,
    QNetwork,
    Scene,
    children,
    coverage_recall,
    evaluate_agent,
    generate,
    iou,
    load_checkpoint,
    oracle_upper_bound,
    random_baseline,
    run_cli,
    train,
)

__all__ = [
    "Box",
    "GroundTruth",
    "QNetwork",
    "Scene",
    "children",
    "coverage_recall",
    "evaluate_agent",
    "generate",
    "iou",
    "load_checkpoint",
    "oracle_upper_bound",
    "random_baseline",
    "run_cli",
    "train",
]
