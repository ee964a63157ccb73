"""Planted-partition test instances on pixel grids.

A ground-truth segmentation is drawn as a Voronoi tessellation of random
seed pixels. Every grid edge gets a cut probability centered at
``0.5 + margin`` (true cut) or ``0.5 - margin`` (true join), perturbed by
uniform noise of the given amplitude and clamped to [0, 1]. With
``margin < noise`` a fraction of edges is on the wrong side of 0.5.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import EdgeGraph, EdgeMap, GridConfig, build_grid_graph, canonical_partition, labeling_from_partition


@dataclass(frozen=True)
class SyntheticInstance:
    graph: EdgeGraph
    truth_partition: np.ndarray
    truth_labeling: np.ndarray
    height: int
    width: int
    seed: int


def voronoi_partition(height: int, width: int, num_regions: int, rng: np.random.Generator) -> np.ndarray:
    seeds = rng.choice(height * width, size=num_regions, replace=False)
    sr, sc = np.divmod(seeds, width)
    rr, cc = np.mgrid[0:height, 0:width]
    d2 = (rr[..., None] - sr) ** 2 + (cc[..., None] - sc) ** 2
    return canonical_partition(np.argmin(d2, axis=-1).ravel())


def planted_instance(
    height: int = 32,
    width: int = 32,
    *,
    min_distance: int = 2,
    max_distance: int = 4,
    noise: float = 0.3,
    margin: float = 0.25,
    num_regions: int | None = None,
    seed: int = 0,
) -> SyntheticInstance:
    rng = np.random.default_rng(seed)
    if num_regions is None:
        num_regions = int(rng.integers(4, 9))
    truth = voronoi_partition(height, width, num_regions, rng)
    # topology only; probabilities are replaced below
    blank = build_grid_graph(EdgeMap(np.zeros((height, width))), GridConfig(min_distance, max_distance))
    y = labeling_from_partition(blank, truth)
    center = 0.5 + margin * (2.0 * y - 1.0)
    probs = np.clip(center + rng.uniform(-noise, noise, size=len(y)), 0.0, 1.0)
    return SyntheticInstance(blank.with_probs(probs), truth, y, height, width, seed)
