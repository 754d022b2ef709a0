"""Quantum objects: projective measurements, states, channels, noise models.

All types validate their defining invariants at construction and are
immutable afterwards; downstream code can assume a ``ProjectorFamily`` really
is a complete orthogonal family, a ``DensityMatrix`` really is a state, and a
``KrausChannel`` really is trace preserving.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvariantError
from .linalg import as_complex_matrix, dagger, is_hermitian, hermitian_eig

PVM_ATOL = 1e-9
DENSITY_ATOL = 1e-10
KRAUS_ATOL = 1e-8
DEGENERACY_ATOL = 1e-8
NOISE_ATOL = 1e-10
# Kraus operators with weight below this are identically zero up to rounding.
KRAUS_PRUNE_ATOL = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.flags.writeable = False
    return out


class ProjectorFamily:
    """Complete family of mutually orthogonal Hermitian projectors.

    Represents a projective measurement: P_i P_j = delta_ij P_i and
    sum_i P_i = I. Projectors may have any rank >= 1.
    """

    def __init__(self, projectors: Iterable[np.ndarray], labels: Sequence[str] | None = None):
        projs = [as_complex_matrix(p, "projector") for p in projectors]
        if not projs:
            raise InvariantError("a projector family needs at least one outcome")
        d = projs[0].shape[0]
        for p in projs:
            if p.shape != (d, d):
                raise InvariantError(f"projectors must share one square shape, got {p.shape} vs ({d}, {d})")
            if not is_hermitian(p, PVM_ATOL):
                raise InvariantError("projectors must be Hermitian")
        for i, p in enumerate(projs):
            for j, q in enumerate(projs):
                prod = p @ q
                target = p if i == j else np.zeros((d, d))
                if np.max(np.abs(prod - target)) > PVM_ATOL:
                    what = "idempotent" if i == j else "mutually orthogonal"
                    raise InvariantError(f"projectors must be {what}: outcomes {i}, {j}")
        total = sum(projs)
        if np.max(np.abs(total - np.eye(d))) > PVM_ATOL:
            raise InvariantError("projectors must sum to the identity")
        ranks = []
        for p in projs:
            r = float(np.trace(p).real)
            if abs(r - round(r)) > 1e-6 or round(r) < 1:
                raise InvariantError(f"projector trace {r} is not a positive integer")
            ranks.append(int(round(r)))
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(projs):
                raise InvariantError("labels must match the number of outcomes")
        self._projectors = tuple(_frozen(p) for p in projs)
        self._dim = d
        self._ranks = tuple(ranks)
        self._labels = labels

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return self._projectors

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def ranks(self) -> tuple[int, ...]:
        return self._ranks

    @property
    def labels(self) -> tuple[str, ...] | None:
        return self._labels

    def __len__(self) -> int:
        return len(self._projectors)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self._projectors)

    def __getitem__(self, i: int) -> np.ndarray:
        return self._projectors[i]

    def is_rank_one(self) -> bool:
        """True when every outcome projects onto a single basis vector."""
        return all(r == 1 for r in self._ranks)

    def __repr__(self) -> str:
        return f"ProjectorFamily(dim={self._dim}, outcomes={len(self)}, ranks={self._ranks})"


class DensityMatrix:
    """Quantum state: Hermitian, unit trace, positive semidefinite."""

    def __init__(self, matrix: np.ndarray):
        m = as_complex_matrix(matrix, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise InvariantError(f"density matrix must be square, got shape {m.shape}")
        if not is_hermitian(m, DENSITY_ATOL):
            raise InvariantError("density matrix must be Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > DENSITY_ATOL:
            raise InvariantError(f"density matrix must have unit trace, got {tr!r}")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if w[0] < -DENSITY_ATOL:
            raise InvariantError(f"density matrix must be positive semidefinite; min eigenvalue {w[0]:.3e}")
        self._matrix = _frozen(m)
        self._dim = m.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._dim

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        return cls(np.eye(dim) / dim)

    @classmethod
    def from_pure(cls, state: np.ndarray) -> "DensityMatrix":
        v = np.asarray(state, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if abs(n - 1.0) > 1e-9:
            raise InvariantError(f"pure state must be normalized, got norm {n!r}")
        v = v / n
        return cls(np.outer(v, v.conj()))

    def commutes_with(self, a: np.ndarray, atol: float = 1e-10) -> bool:
        a = as_complex_matrix(a)
        return bool(np.max(np.abs(self._matrix @ a - a @ self._matrix)) <= atol)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self._dim})"


class KrausChannel:
    """Completely positive trace-preserving map in Kraus form."""

    def __init__(self, kraus: Iterable[np.ndarray]):
        ops = [as_complex_matrix(k, "Kraus operator") for k in kraus]
        if not ops:
            raise InvariantError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise InvariantError(f"Kraus operators must share one shape, got {k.shape} vs {shape}")
        dim_out, dim_in = shape
        total = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim_in))) > KRAUS_ATOL:
            raise InvariantError("Kraus operators must satisfy sum K^dag K = I (trace preservation)")
        self._kraus = tuple(_frozen(k) for k in ops)
        self._dim_in = dim_in
        self._dim_out = dim_out

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        return self._kraus

    @property
    def dim_in(self) -> int:
        return self._dim_in

    @property
    def dim_out(self) -> int:
        return self._dim_out

    def __len__(self) -> int:
        return len(self._kraus)

    def __repr__(self) -> str:
        return f"KrausChannel(dim_in={self._dim_in}, dim_out={self._dim_out}, n_kraus={len(self)})"


class BlochObservable:
    """Qubit observable n . sigma for a unit Bloch vector n."""

    def __init__(self, bloch: Sequence[float]):
        v = np.asarray(bloch, dtype=float).reshape(-1)
        if v.shape != (3,):
            raise InvariantError(f"Bloch vector must have 3 real components, got shape {v.shape}")
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > 1e-9:
            raise InvariantError(f"Bloch vector must be unit length, got norm {n!r}")
        v = v / n
        v.flags.writeable = False
        self._vector = v

    @property
    def bloch(self) -> np.ndarray:
        return self._vector

    @property
    def matrix(self) -> np.ndarray:
        x, y, z = self._vector
        return x * PAULI_X + y * PAULI_Y + z * PAULI_Z

    def __repr__(self) -> str:
        x, y, z = self._vector
        return f"BlochObservable(({x:+.4f}, {y:+.4f}, {z:+.4f}))"


class NoiseModel:
    """Coefficients of a noisy instrument built from a projective measurement.

    Outcome i of a k-outcome measurement is split into Kraus operators
    sqrt(a_ij P_i + b_ij I). Row sums are constrained so the instrument is
    trace preserving: sum_j a_ij = 1 - lam and sum_j b_ij = lam * p_i, where
    lam is the total noise weight and p sums to 1 over outcomes.
    """

    def __init__(
        self,
        lam: float,
        trivial_probs: Sequence[float],
        a_coeffs: np.ndarray,
        b_coeffs: np.ndarray,
    ):
        lam = float(lam)
        if not (0.0 <= lam <= 1.0):
            raise InvariantError(f"noise weight must lie in [0, 1], got {lam}")
        p = np.asarray(trivial_probs, dtype=float).reshape(-1)
        a = np.asarray(a_coeffs, dtype=float)
        b = np.asarray(b_coeffs, dtype=float)
        if a.ndim != 2 or b.shape != a.shape or p.shape != (a.shape[0],):
            raise InvariantError(
                f"coefficient shapes disagree: a {a.shape}, b {b.shape}, trivial_probs {p.shape}"
            )
        if np.any(p < 0) or np.any(a < 0) or np.any(b < 0):
            raise InvariantError("noise coefficients must be nonnegative")
        if abs(p.sum() - 1.0) > NOISE_ATOL:
            raise InvariantError(f"trivial_probs must sum to 1, got {p.sum()!r}")
        row_a = a.sum(axis=1)
        if np.max(np.abs(row_a - (1.0 - lam))) > NOISE_ATOL:
            raise InvariantError("each a row must sum to 1 - lam")
        row_b = b.sum(axis=1)
        if np.max(np.abs(row_b - lam * p)) > NOISE_ATOL:
            raise InvariantError("each b row must sum to lam * trivial_probs[i]")
        p.flags.writeable = False
        a = np.array(a)
        b = np.array(b)
        a.flags.writeable = False
        b.flags.writeable = False
        self._lam = lam
        self._p = p
        self._a = a
        self._b = b

    @property
    def lam(self) -> float:
        return self._lam

    @property
    def trivial_probs(self) -> np.ndarray:
        return self._p

    @property
    def a_coeffs(self) -> np.ndarray:
        return self._a

    @property
    def b_coeffs(self) -> np.ndarray:
        return self._b

    @property
    def n_outcomes(self) -> int:
        return self._a.shape[0]

    @property
    def n_splits(self) -> int:
        return self._a.shape[1]

    @classmethod
    def noiseless(cls, n_outcomes: int) -> "NoiseModel":
        """lam = 0 with a = identity: the instrument reduces to the bare PVM."""
        k = int(n_outcomes)
        return cls(0.0, np.full(k, 1.0 / k), np.eye(k), np.zeros((k, k)))

    def __repr__(self) -> str:
        return f"NoiseModel(lam={self._lam:.4f}, outcomes={self.n_outcomes}, splits={self.n_splits})"


PAULI_X = _frozen(np.array([[0, 1], [1, 0]]))
PAULI_Y = _frozen(np.array([[0, -1j], [1j, 0]]))
PAULI_Z = _frozen(np.array([[1, 0], [0, -1]]))


def computational_pvm(dim: int) -> ProjectorFamily:
    """Rank-one measurement in the standard basis |0>, ..., |dim-1>."""
    eye = np.eye(dim, dtype=complex)
    return ProjectorFamily([np.outer(eye[:, i], eye[:, i].conj()) for i in range(dim)])


def fourier_matrix(dim: int) -> np.ndarray:
    """Unitary discrete Fourier transform, F_jk = exp(2 pi i jk / dim) / sqrt(dim)."""
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return np.exp(2j * np.pi * j * k / dim) / math.sqrt(dim)


def fourier_pvm(dim: int) -> ProjectorFamily:
    """Rank-one measurement in the Fourier basis, unbiased to the standard one."""
    f = fourier_matrix(dim)
    return ProjectorFamily([np.outer(f[:, i], f[:, i].conj()) for i in range(dim)])


def bell_states() -> tuple[np.ndarray, ...]:
    """The four maximally entangled two-qubit states.

    Order: (|00>+|11>)/sqrt2, (|00>-|11>)/sqrt2, (|01>+|10>)/sqrt2,
    (|01>-|10>)/sqrt2.
    """
    s = 1.0 / math.sqrt(2.0)
    phi_p = np.array([s, 0, 0, s], dtype=complex)
    phi_m = np.array([s, 0, 0, -s], dtype=complex)
    psi_p = np.array([0, s, s, 0], dtype=complex)
    psi_m = np.array([0, s, -s, 0], dtype=complex)
    return (phi_p, phi_m, psi_p, psi_m)


def bell_pvm() -> ProjectorFamily:
    """Rank-one two-qubit measurement in the Bell basis."""
    return ProjectorFamily([np.outer(v, v.conj()) for v in bell_states()])


def pvm_from_observable(observable: np.ndarray, degeneracy_atol: float = DEGENERACY_ATOL) -> ProjectorFamily:
    """Spectral measurement of a Hermitian observable.

    Eigenvalues closer than ``degeneracy_atol`` are merged into one
    eigenspace; outcomes are ordered by ascending eigenvalue and labeled with
    the eigenvalue of their group.
    """
    dec = hermitian_eig(observable)
    w, v = dec.eigenvalues, dec.eigenvectors
    groups: list[list[int]] = [[0]]
    for i in range(1, w.size):
        if w[i] - w[i - 1] <= degeneracy_atol:
            groups[-1].append(i)
        else:
            groups.append([i])
    projs = []
    labels = []
    for grp in groups:
        cols = v[:, grp]
        projs.append(cols @ cols.conj().T)
        labels.append(f"{np.mean(w[grp]):.6g}")
    return ProjectorFamily(projs, labels=labels)


def bloch_to_pvm(observable: BlochObservable) -> ProjectorFamily:
    """Two-outcome measurement of a Bloch observable, -1 eigenspace first."""
    m = observable.matrix
    eye = np.eye(2, dtype=complex)
    return ProjectorFamily([(eye - m) / 2.0, (eye + m) / 2.0], labels=("-1", "+1"))


def maximally_mixed(dim: int) -> DensityMatrix:
    """The state I/dim."""
    return DensityMatrix.maximally_mixed(dim)


def dephasing_channel(measurement: ProjectorFamily) -> KrausChannel:
    """Nonselective measure-and-forget channel rho -> sum_i P_i rho P_i."""
    return KrausChannel(measurement.projectors)


def apply_channel(channel: KrausChannel, state: DensityMatrix) -> DensityMatrix:
    """Act with a channel on a state: rho -> sum_a K_a rho K_a^dagger."""
    if channel.dim_in != state.dim:
        raise ValueError(f"channel input dimension {channel.dim_in} does not match state dimension {state.dim}")
    stack = np.stack(channel.kraus)
    out = np.einsum("aij,jk,alk->il", stack, state.matrix, stack.conj())
    return DensityMatrix((out + out.conj().T) / 2.0)


def coarse_grain(measurement: ProjectorFamily, outcome_map: Sequence[int]) -> ProjectorFamily:
    """Merge outcomes of a measurement along a surjective outcome map.

    ``outcome_map[i]`` is the coarse outcome that fine outcome i feeds; the
    map must hit every value in {0, ..., max}. Coarse projectors are sums of
    the merged fine ones.
    """
    f = [int(x) for x in outcome_map]
    if len(f) != len(measurement):
        raise ValueError(f"outcome map length {len(f)} does not match outcome count {len(measurement)}")
    if any(x < 0 for x in f):
        raise ValueError("outcome map values must be nonnegative")
    n_coarse = max(f) + 1
    if set(f) != set(range(n_coarse)):
        raise ValueError("outcome map must be surjective onto 0..max")
    d = measurement.dim
    projs = [np.zeros((d, d), dtype=complex) for _ in range(n_coarse)]
    for i, target in enumerate(f):
        projs[target] = projs[target] + measurement[i]
    labels = None
    if measurement.labels is not None:
        merged: list[list[str]] = [[] for _ in range(n_coarse)]
        for i, target in enumerate(f):
            merged[target].append(measurement.labels[i])
        labels = ["+".join(grp) for grp in merged]
    return ProjectorFamily(projs, labels=labels)


def noisy_kraus_by_outcome(measurement: ProjectorFamily, noise: NoiseModel) -> list[list[np.ndarray]]:
    """Kraus operators of a noisy instrument, grouped by outcome.

    Outcome i contributes operators sqrt(a_ij P_i + b_ij I) over the split
    index j. Since a P + b I has eigenvalue a + b on the range of P and b on
    its complement, the square root is sqrt(a+b) P + sqrt(b) (I - P) in
    closed form. Operators with a + b below a rounding threshold are
    identically zero and dropped.
    """
    if noise.n_outcomes != len(measurement):
        raise ValueError(
            f"noise model has {noise.n_outcomes} outcomes but measurement has {len(measurement)}"
        )
    eye = np.eye(measurement.dim, dtype=complex)
    a, b = noise.a_coeffs, noise.b_coeffs
    grouped: list[list[np.ndarray]] = []
    for i, proj in enumerate(measurement):
        ops = []
        for j in range(noise.n_splits):
            if a[i, j] + b[i, j] < KRAUS_PRUNE_ATOL:
                continue
            ops.append(math.sqrt(a[i, j] + b[i, j]) * proj + math.sqrt(b[i, j]) * (eye - proj))
        grouped.append(ops)
    return grouped


def noisy_instrument(measurement: ProjectorFamily, noise: NoiseModel) -> KrausChannel:
    """Noisy nonselective version of a projective measurement.

    With lam = 0 and a = identity this is exactly the dephasing channel of
    the measurement; generally each outcome is blurred toward the identity
    with weight lam split across outcomes by ``trivial_probs``.
    """
    flat = [op for group in noisy_kraus_by_outcome(measurement, noise) for op in group]
    return KrausChannel(flat)


def bell_measurement_channel(d1: int, d2: int) -> KrausChannel:
    """Dephasing channel of the two-qubit Bell-basis measurement.

    Only the 2 x 2 case exists; the Bell basis is a qubit-pair construction.
    """
    if (d1, d2) != (2, 2):
        raise InvariantError(f"unsupported dims ({d1}, {d2}); only (2, 2) is defined")
    return dephasing_channel(bell_pvm())


def product_measurement_channel(d1: int, d2: int) -> KrausChannel:
    """Dephasing channel of the two-qubit standard product-basis measurement."""
    if (d1, d2) != (2, 2):
        raise InvariantError(f"unsupported dims ({d1}, {d2}); only (2, 2) is defined")
    return dephasing_channel(computational_pvm(4))
