"""Scenario reduction: cluster daily renewable output curves into weighted
typical days and compose wind and solar clusters into a joint scenario set.

Clustering is Lloyd's algorithm on raw MW curves (no normalization) with
k-means++ seeding from an explicit integer seed, so results are bit-identical
for a fixed (curves, k, seed).  Empty clusters are repaired by reseeding the
centroid on the point currently farthest from its assigned centroid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import Scenario, ScenarioSet

_MAX_ITER = 300


@dataclass(frozen=True)
class CurveSet:
    """Daily curves of one signal: rows are days, columns are periods."""

    curves: np.ndarray
    label: str

    def __post_init__(self):
        arr = np.asarray(self.curves, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"curves must be a nonempty 2-d array, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("curve entries must be finite")
        if np.any(arr < 0):
            raise ValueError("curve entries must be nonnegative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "curves", arr)

    @property
    def num_days(self) -> int:
        return self.curves.shape[0]

    @property
    def periods(self) -> int:
        return self.curves.shape[1]


@dataclass(frozen=True)
class ClusterResult:
    centroids: np.ndarray  # (k, periods)
    assignments: np.ndarray  # (days,) int
    probabilities: np.ndarray  # (k,) cluster size / day count
    sse: float
    sse_history: tuple[float, ...] = ()  # per-iteration, non-increasing

    def __post_init__(self):
        for name in ("centroids", "assignments", "probabilities"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _plus_plus_seeding(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ initial centroids over the rows of x."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    first = int(rng.integers(0, n))
    centroids[0] = x[first]
    dist2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(dist2.sum())
        if total <= 0:
            pick = int(rng.integers(0, n))
        else:
            r = rng.random() * total
            pick = int(np.searchsorted(np.cumsum(dist2), r))
            pick = min(pick, n - 1)
        centroids[c] = x[pick]
        dist2 = np.minimum(dist2, np.sum((x - centroids[c]) ** 2, axis=1))
    return centroids


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per row (ties to the lowest index) and squared distances."""
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def kmeans(curves: CurveSet, k: int, seed: int) -> ClusterResult:
    """Lloyd's iteration with k-means++ seeding; deterministic for fixed seed.

    Converges when assignments stabilize or after 300 iterations; centroids
    are the means of their assigned curves and cluster probabilities are the
    observed day fractions.
    """
    x = curves.curves
    n = curves.num_days
    if not 1 <= k <= n:
        raise ValueError(f"k must be within [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_seeding(x, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for _ in range(_MAX_ITER):
        new_labels, d2 = _assign(x, centroids)
        # empty-cluster repair: move the centroid onto the farthest point
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(d2))
                centroids[c] = x[far]
                new_labels[far] = c
                d2[far] = 0.0
        sse = float(d2.sum())
        if history and sse > history[-1] + 1e-9 * max(1.0, history[-1]):
            raise AssertionError("k-means SSE increased between iterations")
        history.append(sse)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = x[labels == c]
            if members.shape[0]:
                centroids[c] = members.mean(axis=0)
    labels, d2 = _assign(x, centroids)
    sse = float(d2.sum())
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    return ClusterResult(centroids=centroids, assignments=labels,
                         probabilities=counts / n, sse=sse,
                         sse_history=tuple(history))


def sse_profile(curves: CurveSet, k_min: int, k_max: int, seed: int) -> np.ndarray:
    """SSE of a fresh k-means run for each k in [k_min, k_max]."""
    return np.array([kmeans(curves, k, seed).sse for k in range(k_min, k_max + 1)])


def knee_index(sse: np.ndarray) -> int:
    """Index of the knee: maximum perpendicular distance to the end-to-end line.

    Ties break toward the smaller index.
    """
    n = sse.shape[0]
    if n == 1:
        return 0
    x0, y0 = 0.0, float(sse[0])
    x1, y1 = float(n - 1), float(sse[-1])
    dx, dy = x1 - x0, y1 - y0
    norm = float(np.hypot(dx, dy))
    best, best_d = 0, -1.0
    for i in range(n):
        d = abs(dx * (y0 - float(sse[i])) - (x0 - float(i)) * dy) / norm
        if d > best_d + 1e-12:
            best, best_d = i, d
    return best


def elbow_k(curves: CurveSet, k_min: int, k_max: int, seed: int) -> int:
    """Pick the cluster count at the knee of the SSE-versus-k profile."""
    if not (1 <= k_min < k_max <= curves.num_days):
        raise ValueError(f"invalid elbow range [{k_min}, {k_max}] "
                         f"for {curves.num_days} days")
    profile = sse_profile(curves, k_min, k_max, seed)
    return k_min + knee_index(profile)


def joint_scenarios(wind: ClusterResult, solar: ClusterResult,
                    hydro_cap) -> ScenarioSet:
    """Cartesian product of wind and solar clusters under independence.

    Scenario (i, j) carries wind centroid i, solar centroid j, the shared
    hydro capacity curve, and probability p_wind[i] * p_solar[j]; the order is
    wind-major.
    """
    hydro = np.asarray(hydro_cap, dtype=np.float64)
    periods = wind.centroids.shape[1]
    if solar.centroids.shape[1] != periods or hydro.shape[0] != periods:
        raise ValueError(
            f"period counts differ: wind {periods}, solar "
            f"{solar.centroids.shape[1]}, hydro {hydro.shape[0]}")
    out = []
    for i in range(wind.k):
        for j in range(solar.k):
            out.append(Scenario(
                probability=float(wind.probabilities[i] * solar.probabilities[j]),
                wind_cap=wind.centroids[i],
                solar_cap=solar.centroids[j],
                hydro_cap=hydro))
    return ScenarioSet(scenarios=tuple(out))
