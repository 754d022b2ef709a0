"""Random ensembles: observables near reference axes, states, channels, noise.

Everything takes either a numpy Generator (low level, caller controls the
stream) or a RandomStream (batch level, one child per logical task), and is
deterministic given its input.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .quantum import (
    BlochObservable,
    DensityMatrix,
    KrausChannel,
    NoiseModel,
    ProjectorFamily,
    bloch_to_pvm,
    noisy_instrument,
)
from .rng import RandomStream


def sample_sphere_axis(gen: np.random.Generator) -> np.ndarray:
    """Uniform random unit vector on the sphere."""
    while True:
        v = gen.normal(size=3)
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            return v / n


def rotate_about_axis(vector: Sequence[float], axis: Sequence[float], angle: float) -> np.ndarray:
    """Rotate a 3-vector about a unit axis by an angle in radians."""
    v = np.asarray(vector, dtype=float)
    k = np.asarray(axis, dtype=float)
    n = float(np.linalg.norm(k))
    if n < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    k = k / n
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(k, v) * s + k * float(np.dot(k, v)) * (1.0 - c)


def perturbed_observable(base_axis: Sequence[float], max_angle: float, gen: np.random.Generator) -> BlochObservable:
    """Random observable within ``max_angle`` radians of a base Bloch axis.

    Draws a uniform angle in [-max_angle, max_angle] and a uniform rotation
    axis, then tilts the base axis accordingly.
    """
    angle = float(gen.uniform(-max_angle, max_angle))
    axis = sample_sphere_axis(gen)
    base = np.asarray(base_axis, dtype=float)
    base = base / np.linalg.norm(base)
    return BlochObservable(rotate_about_axis(base, axis, angle))


def gen_observables(
    n: int,
    base_axes: Sequence[Sequence[float]],
    max_angle_deg: float,
    stream: RandomStream,
) -> list[tuple[BlochObservable, int]]:
    """Generate n observables split evenly across base axes.

    Returns (observable, axis index) pairs; the axis index is the ground
    truth for clustering. n must be divisible by the number of axes.
    """
    axes = [np.asarray(a, dtype=float) for a in base_axes]
    if not axes:
        raise ValueError("need at least one base axis")
    if n < 1 or n % len(axes) != 0:
        raise ValueError(f"n = {n} must be a positive multiple of the number of base axes ({len(axes)})")
    max_angle = math.radians(float(max_angle_deg))
    gen = stream.generator()
    per_axis = n // len(axes)
    out = []
    for idx, base in enumerate(axes):
        for _ in range(per_axis):
            out.append((perturbed_observable(base, max_angle, gen), idx))
    return out


def random_unitary(dim: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases = phases / np.abs(phases)
    return q * phases


def random_partition(total: int, n_parts: int, gen: np.random.Generator) -> tuple[int, ...]:
    """Uniformly random composition of ``total`` into ``n_parts`` positive parts."""
    if not 1 <= n_parts <= total:
        raise ValueError(f"need 1 <= n_parts <= {total}, got {n_parts}")
    if n_parts == 1:
        return (total,)
    cuts = np.sort(gen.choice(np.arange(1, total), size=n_parts - 1, replace=False))
    edges = np.concatenate(([0], cuts, [total]))
    return tuple(int(x) for x in np.diff(edges))


def random_pvm(
    dim: int,
    gen: np.random.Generator,
    ranks: Sequence[int] | None = None,
) -> ProjectorFamily:
    """Haar-random projective measurement with the given eigenspace ranks.

    Default ranks are all ones (a nondegenerate measurement).
    """
    if ranks is None:
        ranks = [1] * dim
    ranks = [int(r) for r in ranks]
    if any(r < 1 for r in ranks) or sum(ranks) != dim:
        raise ValueError(f"ranks must be positive and sum to {dim}, got {ranks}")
    u = random_unitary(dim, gen)
    projs = []
    start = 0
    for r in ranks:
        cols = u[:, start : start + r]
        projs.append(cols @ cols.conj().T)
        start += r
    return ProjectorFamily(projs)


def random_density_matrix(dim: int, gen: np.random.Generator) -> DensityMatrix:
    """Full-rank random state (normalized complex Wishart)."""
    g = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_pure_density(dim: int, gen: np.random.Generator) -> DensityMatrix:
    """Haar-random pure state as a density matrix."""
    v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
    return DensityMatrix.from_pure(v / np.linalg.norm(v))


def random_kraus_channel(dim: int, n_kraus: int, gen: np.random.Generator) -> KrausChannel:
    """Random channel with the given Kraus count, exactly trace preserving.

    Blocks of a Haar-random isometry; completeness holds to machine
    precision by construction.
    """
    if n_kraus < 1:
        raise ValueError(f"n_kraus must be positive, got {n_kraus}")
    z = gen.normal(size=(n_kraus * dim, dim)) + 1j * gen.normal(size=(n_kraus * dim, dim))
    q, _ = np.linalg.qr(z)
    return KrausChannel([q[e * dim : (e + 1) * dim, :] for e in range(n_kraus)])


def _simplex_point(n: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform point on the probability simplex via normalized exponentials."""
    e = gen.exponential(size=n)
    return e / e.sum()


def sample_noise_model(n_outcomes: int, eta: float, gen: np.random.Generator) -> NoiseModel:
    """Random noise model at strength eta.

    The total noise weight is lam = eta * R with R uniform on [0, 1]; the
    trivial-outcome probabilities and each coefficient row are uniform
    simplex points scaled to their required sums. The split count equals the
    outcome count.
    """
    k = int(n_outcomes)
    if k < 1:
        raise ValueError(f"n_outcomes must be positive, got {k}")
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    lam = eta * float(gen.uniform())
    p = _simplex_point(k, gen)
    a = np.stack([(1.0 - lam) * _simplex_point(k, gen) for _ in range(k)])
    b = np.stack([lam * p[i] * _simplex_point(k, gen) for i in range(k)])
    return NoiseModel(lam, p, a, b)


def gen_noisy_instruments(
    observables: Sequence[BlochObservable],
    eta: float,
    stream: RandomStream,
) -> list[KrausChannel]:
    """Noisy measure-and-forget channels for a batch of qubit observables.

    Each observable gets its own independently sampled noise model at
    strength eta; eta = 0 makes every channel act as the pure dephasing
    channel of its observable.
    """
    gen = stream.generator()
    channels = []
    for obs in observables:
        pvm = bloch_to_pvm(obs)
        noise = sample_noise_model(len(pvm), eta, gen)
        channels.append(noisy_instrument(pvm, noise))
    return channels
