"""End-to-end clustering experiment: generate, measure distances, cluster.

A single config drives the whole pipeline so a run is reproducible from its
seed alone. The default configuration is the two-family qubit setup: 100
observables tilted up to 22.5 degrees away from the x and z axes, clustered
back into their families by pairwise incompatibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .cluster import (
    MEASURES,
    ClusterResult,
    DistanceMatrix,
    best_of_restarts,
    pairwise_dissimilarity,
    purity,
)
from .errors import ParseError
from .generate import gen_noisy_instruments, gen_observables
from .quantum import BlochObservable, bloch_to_pvm
from .rng import RandomStream
from .switch import SamplingPlan

_DEFAULT_AXES = ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one clustering run.

    ``distance`` selects how pairwise incompatibility is evaluated: "med"
    (exact, on the noiseless measurements), "ncom" (exact, on noisy
    instrument channels), or "ncom_estimated" (finite-shot switch samples on
    the noisy channels, accuracy set by epsilon and delta). ``noise_eta``
    scales the per-channel noise weight and must be 0 for "med".
    """

    n_observables: int = 100
    k: int = 2
    restarts: int = 50
    base_axes: tuple[tuple[float, float, float], ...] = _DEFAULT_AXES
    max_angle_deg: float = 22.5
    noise_eta: float = 0.0
    distance: str = "med"
    epsilon: float = 0.01
    delta: float = 0.05
    max_swaps: int = 300
    seed: int = 0

    def __post_init__(self) -> None:
        axes = tuple(tuple(float(x) for x in a) for a in self.base_axes)
        if not axes or any(len(a) != 3 for a in axes):
            raise ValueError("base_axes must be a nonempty sequence of 3-vectors")
        if any(float(np.linalg.norm(a)) < 1e-12 for a in axes):
            raise ValueError("base_axes must be nonzero")
        object.__setattr__(self, "base_axes", axes)
        if self.n_observables < 1 or self.n_observables % len(axes) != 0:
            raise ValueError(
                f"n_observables = {self.n_observables} must be a positive multiple of {len(axes)} base axes"
            )
        if not 1 <= self.k <= self.n_observables:
            raise ValueError(f"k must lie in [1, {self.n_observables}], got {self.k}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be positive, got {self.restarts}")
        if self.distance not in MEASURES:
            raise ValueError(f"distance must be one of {MEASURES}, got {self.distance!r}")
        if not 0.0 <= self.noise_eta <= 1.0:
            raise ValueError(f"noise_eta must lie in [0, 1], got {self.noise_eta}")
        if self.distance == "med" and self.noise_eta != 0.0:
            raise ValueError("distance 'med' works on noiseless measurements; set noise_eta = 0")
        if self.max_swaps < 1:
            raise ValueError(f"max_swaps must be positive, got {self.max_swaps}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_observables": self.n_observables,
            "k": self.k,
            "restarts": self.restarts,
            "base_axes": [list(a) for a in self.base_axes],
            "max_angle_deg": self.max_angle_deg,
            "noise_eta": self.noise_eta,
            "distance": self.distance,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "max_swaps": self.max_swaps,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown config fields: {sorted(unknown)}")
        kwargs: dict[str, Any] = dict(data)
        try:
            if "base_axes" in kwargs:
                kwargs["base_axes"] = tuple(tuple(float(x) for x in a) for a in kwargs["base_axes"])
            return cls(**kwargs)
        except TypeError as exc:
            raise ParseError(f"config fields have wrong types: {exc}") from exc


@dataclass(frozen=True)
class ExperimentResult:
    """Everything one run produced, sufficient to rebuild the output files."""

    config: ExperimentConfig
    observables: tuple[BlochObservable, ...]
    truth: tuple[int, ...]
    distances: DistanceMatrix
    clustering: ClusterResult
    purity: float = field(default=0.0)


def run_clustering_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the generate / distance / cluster pipeline for one config.

    Substreams are fixed per stage (generation, channel noise, estimation,
    clustering), so results are bit-stable for a given config regardless of
    which stages a distance choice actually uses.
    """
    stream = RandomStream(int(config.seed))
    pairs = gen_observables(
        config.n_observables, config.base_axes, config.max_angle_deg, stream.split(0)
    )
    observables = tuple(obs for obs, _ in pairs)
    truth = tuple(t for _, t in pairs)
    if config.distance == "med":
        measurements = [bloch_to_pvm(obs) for obs in observables]
        distances = pairwise_dissimilarity(measurements, "med")
    else:
        channels = gen_noisy_instruments(list(observables), config.noise_eta, stream.split(1))
        if config.distance == "ncom":
            distances = pairwise_dissimilarity(channels, "ncom")
        else:
            plan = SamplingPlan(config.epsilon, config.delta)
            distances = pairwise_dissimilarity(
                channels, "ncom_estimated", plan=plan, stream=stream.split(2)
            )
    clustering = best_of_restarts(
        distances, config.k, config.restarts, stream.split(3), config.max_swaps
    )
    score = purity(clustering.labels, truth)
    return ExperimentResult(
        config=config,
        observables=observables,
        truth=truth,
        distances=distances,
        clustering=clustering,
        purity=score,
    )
