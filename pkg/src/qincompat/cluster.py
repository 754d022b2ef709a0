"""Compatibility clustering of measurements and channels.

Pairwise incompatibility values form a dissimilarity matrix; k-medoids
partitions the items around actual exemplars, which is the right fit here
because the "points" are quantum measurements with no vector-space mean.
The functional surface (``pairwise_dissimilarity``, ``kmedoids``,
``best_of_restarts``, ``purity``) is wrapped by two scikit-learn style
estimators, ``PairwiseIncompatibility`` and ``KMedoids``, for pipeline use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InvariantError
from .linalg import kron, vec
from .measures import gmed
from .quantum import DensityMatrix, KrausChannel, ProjectorFamily
from .rng import RandomStream
from .switch import SamplingPlan, estimate_ncom_switch

SYMMETRY_ATOL = 1e-9
NEG_ATOL = 1e-12
# A best swap must beat the current cost by more than this to be applied.
SWAP_IMPROVEMENT_ATOL = 1e-12

MEASURES = ("med", "ncom", "ncom_estimated")


class DistanceMatrix:
    """Validated symmetric dissimilarity matrix with zero diagonal.

    Entries in [-1e-12, 0) and diagonal residue up to 1e-9 are treated as
    rounding noise and cleaned; anything worse is rejected.
    """

    def __init__(self, values: np.ndarray):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvariantError(f"distance matrix must be square, got shape {v.shape}")
        if v.shape[0] < 1:
            raise InvariantError("distance matrix must have at least one row")
        asym = float(np.max(np.abs(v - v.T))) if v.size else 0.0
        if asym > SYMMETRY_ATOL:
            raise InvariantError(f"distance matrix must be symmetric; max asymmetry {asym:.3e}")
        diag = np.abs(np.diagonal(v))
        if diag.size and float(diag.max()) > SYMMETRY_ATOL:
            raise InvariantError(f"distance matrix diagonal must be zero; max {float(diag.max()):.3e}")
        low = float(v.min())
        if low < -NEG_ATOL:
            raise InvariantError(f"distances must be nonnegative; min {low:.3e}")
        v[v < 0.0] = 0.0
        np.fill_diagonal(v, 0.0)
        v.flags.writeable = False
        self._values = v

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.shape[0]


@dataclass(frozen=True)
class ClusterResult:
    """k-medoids output: assignment, exemplars, cost, and provenance."""

    labels: tuple[int, ...]
    medoids: tuple[int, ...]
    cost: float
    iterations: int
    seed: int

    def __post_init__(self) -> None:
        labels = tuple(int(x) for x in self.labels)
        medoids = tuple(int(x) for x in self.medoids)
        k = len(medoids)
        n = len(labels)
        if len(set(medoids)) != k or any(not 0 <= m < n for m in medoids):
            raise InvariantError("medoids must be distinct item indices")
        if any(not 0 <= x < k for x in labels):
            raise InvariantError("labels must index a medoid")
        for slot, m in enumerate(medoids):
            if labels[m] != slot:
                raise InvariantError(f"medoid {m} must belong to its own cluster")
        if self.cost < 0.0:
            raise InvariantError(f"cost must be nonnegative, got {self.cost}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "medoids", medoids)


def _assign(values: np.ndarray, medoids: Sequence[int]) -> tuple[np.ndarray, float]:
    cols = values[:, list(medoids)]
    labels = np.argmin(cols, axis=1)
    for slot, m in enumerate(medoids):
        labels[m] = slot
    cost = float(cols[np.arange(values.shape[0]), labels].sum())
    return labels, cost


def kmeanspp_seed(distances: DistanceMatrix, k: int, stream: RandomStream) -> list[int]:
    """Distance-squared weighted farthest-point seeding.

    The first medoid is uniform; each next one is drawn with probability
    proportional to the squared distance to the nearest chosen medoid. When
    every remaining item coincides with a chosen one, the lowest unchosen
    index is taken.
    """
    n = distances.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    gen = stream.generator()
    chosen = [int(gen.integers(n))]
    while len(chosen) < k:
        nearest = distances.values[:, chosen].min(axis=1)
        weights = nearest * nearest
        total = float(weights.sum())
        if total <= 0.0:
            remaining = sorted(set(range(n)) - set(chosen))
            chosen.append(remaining[0])
            continue
        chosen.append(int(gen.choice(n, p=weights / total)))
    return chosen


def kmedoids(
    distances: DistanceMatrix,
    k: int,
    stream: RandomStream,
    max_swaps: int = 300,
) -> ClusterResult:
    """Partition around medoids with greedy best-swap descent.

    Seeds with :func:`kmeanspp_seed`, then repeatedly applies the single
    (medoid, non-medoid) swap with the largest cost decrease until no swap
    improves the cost by more than 1e-12 or ``max_swaps`` swaps were made.
    Deterministic given the stream; swap ties go to the lowest medoid slot,
    then the lowest candidate index.
    """
    values = distances.values
    n = distances.n
    medoids = kmeanspp_seed(distances, k, stream)
    labels, cost = _assign(values, medoids)
    iterations = 0
    while iterations < max_swaps:
        best_delta = 0.0
        best_swap: tuple[int, int] | None = None
        medoid_set = set(medoids)
        for slot in range(k):
            others = [m for idx, m in enumerate(medoids) if idx != slot]
            if others:
                rest = values[:, others].min(axis=1)
            else:
                rest = np.full(n, np.inf)
            # Swapping slot for candidate h costs sum_i min(rest_i, d(i, h)).
            candidate_costs = np.minimum(rest[:, None], values).sum(axis=0)
            for h in range(n):
                if h in medoid_set:
                    continue
                delta = cost - float(candidate_costs[h])
                if delta > best_delta:
                    best_delta = delta
                    best_swap = (slot, h)
        if best_swap is None or best_delta <= SWAP_IMPROVEMENT_ATOL:
            break
        medoids[best_swap[0]] = best_swap[1]
        labels, cost = _assign(values, medoids)
        iterations += 1
    return ClusterResult(
        labels=tuple(int(x) for x in labels),
        medoids=tuple(medoids),
        cost=cost,
        iterations=iterations,
        seed=stream.seed,
    )


def best_of_restarts(
    distances: DistanceMatrix,
    k: int,
    restarts: int,
    stream: RandomStream,
    max_swaps: int = 300,
) -> ClusterResult:
    """Lowest-cost result over independent seeded restarts.

    Restart r runs on the child stream ``stream.split(r)``; cost ties keep
    the earliest restart, so one restart is identical to a single
    :func:`kmedoids` run on ``stream.split(0)``.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be positive, got {restarts}")
    best: ClusterResult | None = None
    for r in range(restarts):
        result = kmedoids(distances, k, stream.split(r), max_swaps)
        if best is None or result.cost < best.cost:
            best = result
    assert best is not None
    return best


def purity(labels: Sequence[int], truth: Sequence[int]) -> float:
    """Fraction of items whose cluster's dominant true class is their own.

    ``(1/n) sum_clusters max_class |cluster intersect class|``; equals 1
    exactly when every cluster is pure.
    """
    labels = np.asarray(labels, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if labels.shape != truth.shape or labels.ndim != 1:
        raise ValueError(f"labels and truth must be equal-length 1-D, got {labels.shape} vs {truth.shape}")
    if labels.size == 0:
        raise ValueError("purity needs at least one item")
    total = 0
    for c in np.unique(labels):
        _, counts = np.unique(truth[labels == c], return_counts=True)
        total += int(counts.max())
    return total / labels.size


def _pairwise_gmed(measurements: Sequence[ProjectorFamily], rho: DensityMatrix) -> np.ndarray:
    n = len(measurements)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = gmed(measurements[i], measurements[j], rho)
    return out


def _pairwise_ncom_exact(channels: Sequence[KrausChannel], rho: DensityMatrix) -> np.ndarray:
    """All-pairs noncommutativity via cached per-channel operator data.

    Uses the identity ncom^2 = 1 - Re Tr[Choi(D) Transfer(C) (I x rho^T)],
    so each channel's transfer and Choi matrices are built once and every
    pair costs one small trace.
    """
    d = rho.dim
    for ch in channels:
        if ch.dim_in != ch.dim_out or ch.dim_in != d:
            raise ValueError("pairwise noncommutativity needs square channels matching the state dimension")
    weight = kron(np.eye(d), rho.matrix.T)
    transfers = np.stack([sum(kron(k, k.conj()) for k in ch.kraus) @ weight for ch in channels])
    chois = np.stack([sum(np.outer(vec(k), vec(k).conj()) for k in ch.kraus) for ch in channels])
    overlaps = np.einsum("jab,iba->ij", chois, transfers).real
    squared = 1.0 - overlaps
    squared = (squared + squared.T) / 2.0
    low = float(squared.min())
    if low < -NEG_ATOL:
        raise InvariantError(f"squared distances must be nonnegative; min {low:.3e}")
    # A channel whose Kraus operators commute among themselves has exact
    # self-distance zero; the computed diagonal is pure cancellation noise
    # that the square root would amplify, so verify and zero it. A genuinely
    # noncommuting Kraus set is not a valid dissimilarity source.
    diag = np.abs(np.diagonal(squared))
    if float(diag.max()) > 1e-12:
        raise InvariantError(
            f"channels have nonzero self-noncommutativity (max squared {float(diag.max()):.3e}); "
            "pairwise distances need channels whose own Kraus operators commute"
        )
    squared = squared.copy()
    np.fill_diagonal(squared, 0.0)
    return np.sqrt(np.clip(squared, 0.0, None))


def _pairwise_ncom_estimated(
    channels: Sequence[KrausChannel],
    rho: DensityMatrix,
    plan: SamplingPlan,
    stream: RandomStream,
) -> np.ndarray:
    n = len(channels)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            pair_stream = stream.split(i * n + j)
            result = estimate_ncom_switch(channels[i], channels[j], rho, plan, pair_stream)
            out[i, j] = out[j, i] = result.ncom_hat
    return out


def pairwise_dissimilarity(
    items: Sequence[ProjectorFamily] | Sequence[KrausChannel],
    measure: str = "med",
    rho: DensityMatrix | None = None,
    plan: SamplingPlan | None = None,
    stream: RandomStream | None = None,
) -> DistanceMatrix:
    """Dissimilarity matrix over measurements or channels.

    ``measure`` selects the notion: "med" (state-weighted eigenspace
    disturbance of projective measurements), "ncom" (exact channel
    noncommutativity), or "ncom_estimated" (finite-shot switch estimate,
    one independent substream per unordered pair). ``rho`` defaults to the
    maximally mixed state of the items' dimension.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    if not items:
        raise ValueError("need at least one item")
    if measure == "med":
        if not all(isinstance(x, ProjectorFamily) for x in items):
            raise ValueError("measure 'med' expects projective measurements")
        dim = items[0].dim
        rho = rho if rho is not None else DensityMatrix.maximally_mixed(dim)
        return DistanceMatrix(_pairwise_gmed(items, rho))
    if not all(isinstance(x, KrausChannel) for x in items):
        raise ValueError(f"measure {measure!r} expects channels")
    dim = items[0].dim_in
    rho = rho if rho is not None else DensityMatrix.maximally_mixed(dim)
    if measure == "ncom":
        return DistanceMatrix(_pairwise_ncom_exact(items, rho))
    if plan is None or stream is None:
        raise ValueError("measure 'ncom_estimated' needs a sampling plan and a random stream")
    return DistanceMatrix(_pairwise_ncom_estimated(items, rho, plan, stream))


class PairwiseIncompatibility(TransformerMixin, BaseEstimator):
    """Transform measurements or channels into a dissimilarity matrix.

    Stateless transformer exposing :func:`pairwise_dissimilarity` through
    the scikit-learn API, so incompatibility distances can feed any
    precomputed-dissimilarity consumer.

    Parameters
    ----------
    measure : {"med", "ncom", "ncom_estimated"}, default="med"
        Incompatibility notion to evaluate.
    rho : DensityMatrix or None, default=None
        Weighting state; None means maximally mixed.
    epsilon, delta : float
        Accuracy target for the estimated measure (ignored otherwise).
    random_state : int or None, default=None
        Seed for the estimated measure; None draws one nondeterministically.
    """

    def __init__(
        self,
        measure: str = "med",
        rho: DensityMatrix | None = None,
        epsilon: float = 0.01,
        delta: float = 0.05,
        random_state: int | None = None,
    ):
        self.measure = measure
        self.rho = rho
        self.epsilon = epsilon
        self.delta = delta
        self.random_state = random_state

    def fit(self, X, y=None):
        """No-op fit; the transformer is stateless."""
        self.n_features_in_ = len(X)
        return self

    def transform(self, X) -> np.ndarray:
        """Return the dissimilarity matrix for the items in X."""
        plan = None
        stream = None
        if self.measure == "ncom_estimated":
            plan = SamplingPlan(self.epsilon, self.delta)
            stream = RandomStream(_resolve_seed(self.random_state))
        return pairwise_dissimilarity(list(X), self.measure, self.rho, plan, stream).values


def _resolve_seed(random_state: int | None) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (2**64))
    return int(random_state)


class KMedoids(ClusterMixin, BaseEstimator):
    """k-medoids clustering on a precomputed dissimilarity matrix.

    Greedy best-swap partitioning around medoids with distance-squared
    weighted seeding and optional independent restarts.

    Parameters
    ----------
    n_clusters : int, default=2
        Number of clusters.
    n_restarts : int, default=1
        Independent seeded restarts; the lowest-cost run wins.
    max_swaps : int, default=300
        Swap budget per restart.
    random_state : int or None, default=None
        Master seed; None draws one nondeterministically.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
        Cluster index per item; each medoid belongs to its own cluster.
    medoid_indices_ : ndarray of shape (n_clusters,)
        Item indices serving as exemplars.
    inertia_ : float
        Sum of distances of items to their medoid.
    n_iter_ : int
        Swaps made by the winning restart.
    """

    def __init__(
        self,
        n_clusters: int = 2,
        n_restarts: int = 1,
        max_swaps: int = 300,
        random_state: int | None = None,
    ):
        self.n_clusters = n_clusters
        self.n_restarts = n_restarts
        self.max_swaps = max_swaps
        self.random_state = random_state

    def fit(self, X, y=None):
        """Cluster a square dissimilarity matrix X."""
        X = check_array(X, dtype=float)
        distances = DistanceMatrix(X)
        stream = RandomStream(_resolve_seed(self.random_state))
        result = best_of_restarts(distances, self.n_clusters, self.n_restarts, stream, self.max_swaps)
        self.labels_ = np.asarray(result.labels, dtype=int)
        self.medoid_indices_ = np.asarray(result.medoids, dtype=int)
        self.inertia_ = result.cost
        self.n_iter_ = result.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Assign new items by their distances to the fitted items.

        X has shape (m, n): row r holds distances from new item r to every
        training item; each item goes to its nearest medoid.
        """
        check_is_fitted(self, "medoid_indices_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected distances to {self.n_features_in_} items, got {X.shape[1]}")
        return np.argmin(X[:, self.medoid_indices_], axis=1)
