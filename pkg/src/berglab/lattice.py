"""Separated point sets under the estimator metric.

A lattice is built greedily from a candidate stream: a point joins when its
estimated distance to every accepted point is at least 2a.  The estimator
over-estimates the geodesic distance, so acceptance is decided by the same
yardstick every consumer uses; the working invariant is separation in the
estimator metric (see the decisions ledger for the directionality note).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec, sample_region
from .metric import CHEAP_BUDGET, SCAN_BUDGET, DistanceBudget, DistanceEstimator, straight_chord_upper


@dataclass(frozen=True)
class Lattice:
    points: np.ndarray  # (m, n) complex
    a: float
    seed: int
    region: str = "interior"

    def __post_init__(self):
        pts = np.asarray(self.points, complex)
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[-1] if pts.ndim >= 2 else 1)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> str:
        return json.dumps(
            {
                "a": self.a,
                "seed": self.seed,
                "region": self.region,
                "points": [[float(x) for x in np.concatenate([p.real, p.imag])] for p in self.points],
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Lattice":
        doc = json.loads(text)
        pts = []
        for row in doc["points"]:
            half = len(row) // 2
            pts.append(np.asarray(row[:half]) + 1j * np.asarray(row[half:]))
        return Lattice(np.asarray(pts), float(doc["a"]), int(doc["seed"]), str(doc["region"]))


def _depth_stratified_shuffle(dom: DomainSpec, pts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Interleave candidates across dyadic depth shells so every shell fills."""
    depth = -dom.r_val(pts)
    k = np.clip(np.floor(-np.log2(np.maximum(depth, 1e-300))).astype(int), 0, 60)
    order = []
    buckets = {}
    for i, kk in enumerate(k):
        buckets.setdefault(int(kk), []).append(i)
    for b in buckets.values():
        rng.shuffle(b)
    keys = sorted(buckets)
    while any(buckets[kk] for kk in keys):
        for kk in keys:
            if buckets[kk]:
                order.append(buckets[kk].pop())
    return pts[np.asarray(order, int)]


def build_separated(
    dom: DomainSpec,
    region,
    a: float,
    candidate_count: int = 400,
    seed: int = 0,
    budget: DistanceBudget = SCAN_BUDGET,
    candidates: np.ndarray | None = None,
) -> Lattice:
    """Greedy maximal packing relative to the sampled candidate stream."""
    if a <= 0:
        raise ValueError("separation parameter must be positive")
    rng = np.random.default_rng(seed)
    if candidates is None:
        if candidate_count == 0:
            return Lattice(np.empty((0, dom.n), complex), a, seed, str(region))
        candidates = sample_region(dom, region, candidate_count, seed)
    if len(candidates) == 0:
        return Lattice(np.empty((0, dom.n), complex), a, seed, str(region))
    candidates = _depth_stratified_shuffle(dom, np.asarray(candidates, complex), rng)

    est = DistanceEstimator(dom, budget)
    accepted: list[np.ndarray] = []
    for cand in candidates:
        if not accepted:
            accepted.append(cand)
            continue
        acc = np.asarray(accepted)
        chords = straight_chord_upper(dom, cand, acc)
        if np.any(chords < 2 * a):
            continue
        # chords are upper bounds; confirm near misses with the optimizer
        close = np.where(chords < 2 * a + 2.0)[0]
        ok = True
        for i in close:
            if est(cand, acc[i]) < 2 * a:
                ok = False
                break
        if ok:
            accepted.append(cand)
    return Lattice(np.asarray(accepted), a, seed, str(region))


def pairwise_dupper(dom: DomainSpec, pts: np.ndarray, budget: DistanceBudget = SCAN_BUDGET,
                    refine_below: float = np.inf) -> np.ndarray:
    """Symmetric matrix of estimator distances between lattice points.

    Chord bounds fill the matrix; pairs whose chord falls below
    ``refine_below`` get the optimizer treatment.
    """
    pts = np.asarray(pts, complex)
    m = len(pts)
    est = DistanceEstimator(dom, budget)
    out = np.zeros((m, m))
    for i in range(m):
        if i + 1 < m:
            out[i, i + 1 :] = straight_chord_upper(dom, pts[i], pts[i + 1 :])
    out = out + out.T
    if np.isfinite(refine_below):
        for i in range(m):
            for j in range(i + 1, m):
                if out[i, j] < refine_below:
                    val = est(pts[i], pts[j])
                    out[i, j] = out[j, i] = val
    return out


def partition_separated(dom: DomainSpec, lat: Lattice, R: float,
                        budget: DistanceBudget = SCAN_BUDGET) -> list[Lattice]:
    """Greedy coloring of the conflict graph {d_upper <= 2R} into separated classes."""
    if R < lat.a:
        raise ValueError("partition scale must be at least the separation parameter")
    m = len(lat)
    if m == 0:
        return []
    dmat = pairwise_dupper(dom, lat.points, budget, refine_below=2 * R + 1.0)
    conflict = dmat <= 2 * R
    np.fill_diagonal(conflict, False)
    colors = -np.ones(m, int)
    for i in range(m):
        used = set(colors[j] for j in np.where(conflict[i])[0] if colors[j] >= 0)
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    return [
        Lattice(lat.points[colors == c], R, lat.seed, lat.region)
        for c in range(int(colors.max()) + 1)
    ]


def count_neighbors(dom: DomainSpec, lat: Lattice, z: np.ndarray, R: float,
                    budget: DistanceBudget = SCAN_BUDGET) -> int:
    """Number of lattice points within estimator distance R of z."""
    if len(lat) == 0:
        return 0
    z = np.asarray(z, complex).reshape(-1)
    chords = straight_chord_upper(dom, z, lat.points)
    count = int(np.sum(chords <= R))
    est = DistanceEstimator(dom, budget)
    maybe = np.where((chords > R) & (chords <= R + 2.0))[0]
    for i in maybe:
        if est(z, lat.points[i]) <= R:
            count += 1
    return count
