"""Incompatibility measures for measurements and channels.

Two families of quantities live here. For projective measurements A and B,
the eigenspace disturbance ``med`` (and its state-weighted variant ``gmed``)
measures how much a nonselective measurement of A disturbs a subsequent
measurement of B. For channels, ``ncom`` measures the noncommutativity of
two Kraus sets as seen by a state; for dephasing channels the two notions
coincide. ``ncom`` has three independent implementations (direct commutator
sum, vectorized-operator trace formula, unitary dilation overlap) that are
cross-checked in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvariantError
from .linalg import frobenius_norm, hermitian_eig, kron, partial_trace, psd_sqrt, vec
from .quantum import DensityMatrix, KrausChannel, ProjectorFamily

# Values of a squared measure this far below zero are rounding noise.
NEG_ATOL = 1e-12
# The system x environment product in the dilation route may not exceed this.
DILATION_BUDGET = 4096


def _sqrt_clamped(value: float, name: str) -> float:
    if value < -NEG_ATOL:
        raise InvariantError(f"{name} produced a squared value below zero: {value:.3e}")
    return math.sqrt(max(value, 0.0))


def _check_same_dim(a: ProjectorFamily, b: ProjectorFamily) -> int:
    if a.dim != b.dim:
        raise ValueError(f"measurements act on different dimensions: {a.dim} vs {b.dim}")
    return a.dim


def _orthonormal_frames(fam: ProjectorFamily) -> list[np.ndarray]:
    """Per-projector orthonormal column frames in extended precision.

    Stored float64 projectors carry ~1e-16 idempotency and completeness
    defects, which enter 1 - sum Tr[rho P Q P Q] linearly and would floor
    its square root near 1e-8 no matter the arithmetic. Rebuilding each
    eigenspace as an orthonormal frame (pivoted Gram-Schmidt over the
    projector columns, one shared basis across the family, two projection
    sweeps) pushes every defect to the extended-precision scale.
    """
    d = fam.dim
    basis = np.zeros((d, 0), dtype=np.clongdouble)
    frames = []
    for p, rank in zip(fam.projectors, fam.ranks):
        cols = p.astype(np.clongdouble)
        accepted = []
        for _ in range(rank):
            residual = cols - basis @ (basis.conj().T @ cols)
            norms = np.sqrt(np.einsum("ij,ij->j", residual.conj(), residual).real)
            v = residual[:, int(np.argmax(norms))]
            v = v - basis @ (basis.conj().T @ v)
            v = v / np.sqrt((v.conj() @ v).real)
            basis = np.concatenate([basis, v[:, None]], axis=1)
            accepted.append(v)
        frames.append(np.stack(accepted, axis=1))
    return frames


def _disturbance_deficit(
    a: ProjectorFamily, b: ProjectorFamily, rho_matrix: np.ndarray
) -> tuple[float, float]:
    """``1 - sum_ij Tr[rho P_i Q_j P_i Q_j]`` as (real deficit, imaginary part).

    Evaluated in extended precision on re-orthonormalized frames; the state
    is renormalized to unit trace on the same scale.
    """
    pa = np.stack([f @ f.conj().T for f in _orthonormal_frames(a)])
    qb = np.stack([f @ f.conj().T for f in _orthonormal_frames(b)])
    r = rho_matrix.astype(np.clongdouble)
    r = r / np.trace(r).real
    pq = np.einsum("iab,jbc->ijac", pa, qb)
    z = np.einsum("sa,ijab,ijbs->", r, pq, pq)
    one = np.longdouble(1.0)
    return float(one - z.real), float(z.imag)


def prob_same_eigenspace(a: ProjectorFamily, b: ProjectorFamily) -> float:
    """Probability that measuring A, then B, then A again repeats the first outcome.

    The input state is maximally mixed:
    ``(1/d) sum_ij Tr[P_i Q_j P_i Q_j]``. Equals 1 exactly when the two
    measurements commute.
    """
    d = _check_same_dim(a, b)
    deficit, _ = _disturbance_deficit(a, b, np.eye(d, dtype=complex))
    return float(min(max(1.0 - deficit, 0.0), 1.0))


def med(a: ProjectorFamily, b: ProjectorFamily) -> float:
    """Mutual eigenspace disturbance sqrt(1 - prob_same_eigenspace(a, b)).

    Zero exactly for commuting measurements; at most
    sqrt(1 - 1/min(outcomes)).
    """
    d = _check_same_dim(a, b)
    deficit, _ = _disturbance_deficit(a, b, np.eye(d, dtype=complex))
    return _sqrt_clamped(deficit, "med")


def gmed(a: ProjectorFamily, b: ProjectorFamily, rho: DensityMatrix) -> float:
    """State-weighted eigenspace disturbance.

    ``sqrt(1 - Re sum_ij Tr[rho P_i Q_j P_i Q_j])``. With the maximally
    mixed state this reduces to :func:`med`. When rho commutes with every
    projector of either measurement the trace sum is real, and that is
    asserted; for generic states only the real part is meaningful.
    """
    d = _check_same_dim(a, b)
    if rho.dim != d:
        raise ValueError(f"state dimension {rho.dim} does not match measurement dimension {d}")
    deficit, imag = _disturbance_deficit(a, b, rho.matrix)
    commuting = all(rho.commutes_with(p) for p in a) or all(rho.commutes_with(q) for q in b)
    if commuting and abs(imag) > 1e-8:
        raise InvariantError(
            f"trace sum must be real when the state commutes with a measurement; imag {imag:.3e}"
        )
    return _sqrt_clamped(deficit, "gmed")


def med_upper_bound(n_outcomes_a: int, n_outcomes_b: int) -> float:
    """Largest possible disturbance for given outcome counts."""
    ka, kb = int(n_outcomes_a), int(n_outcomes_b)
    if ka < 1 or kb < 1:
        raise ValueError(f"outcome counts must be positive, got {ka}, {kb}")
    return math.sqrt(1.0 - 1.0 / min(ka, kb))


def _check_square_pair(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> int:
    for ch, name in ((c, "first"), (d_ch, "second")):
        if ch.dim_in != ch.dim_out:
            raise ValueError(f"{name} channel must have equal input and output dimensions")
    if c.dim_in != d_ch.dim_in:
        raise ValueError(f"channels act on different dimensions: {c.dim_in} vs {d_ch.dim_in}")
    if rho.dim != c.dim_in:
        raise ValueError(f"state dimension {rho.dim} does not match channel dimension {c.dim_in}")
    return c.dim_in


def commutator_weight(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> float:
    """``sum_ij Tr(rho [C_i, D_j]^dag [C_i, D_j])``, the total commutator weight."""
    _check_square_pair(c, d_ch, rho)
    ck = np.stack(c.kraus)
    dk = np.stack(d_ch.kraus)
    comm = np.einsum("iab,jbc->ijac", ck, dk) - np.einsum("jab,ibc->ijac", dk, ck)
    total = np.einsum("ijam,ijan,nm->", comm.conj(), comm, rho.matrix).real
    return float(max(total, 0.0))


def ncom(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> float:
    """Channel noncommutativity ``sqrt(sum_ij Tr(rho |[C_i, D_j]|^2) / 2)``.

    Zero exactly when all Kraus operators of the two channels commute on the
    support of rho. For dephasing channels of two measurements with the
    maximally mixed state, equals :func:`med` of the measurements.
    """
    return math.sqrt(commutator_weight(c, d_ch, rho) / 2.0)


class TransferOperator:
    """Matrix acting on row-major vectorized states: T vec(rho) = vec(E(rho))."""

    def __init__(self, matrix: np.ndarray, dim_in: int, dim_out: int):
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (dim_out * dim_out, dim_in * dim_in):
            raise InvariantError(
                f"transfer matrix shape {m.shape} does not match dimensions {dim_in} -> {dim_out}"
            )
        m = np.array(m)
        m.flags.writeable = False
        self._matrix = m
        self._dim_in = int(dim_in)
        self._dim_out = int(dim_out)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim_in(self) -> int:
        return self._dim_in

    @property
    def dim_out(self) -> int:
        return self._dim_out

    def apply(self, state: DensityMatrix) -> np.ndarray:
        """Return the output matrix (not validated as a state)."""
        if state.dim != self._dim_in:
            raise ValueError(f"state dimension {state.dim} does not match {self._dim_in}")
        out = self._matrix @ vec(state.matrix)
        return out.reshape(self._dim_out, self._dim_out)


class ChoiOperator:
    """Choi matrix of a channel on (output x input), row-major vec convention.

    Validated Hermitian and positive semidefinite with partial trace over the
    output factor equal to the identity (trace preservation).
    """

    def __init__(self, matrix: np.ndarray, dim_in: int, dim_out: int):
        m = np.asarray(matrix, dtype=complex)
        n = dim_in * dim_out
        if m.shape != (n, n):
            raise InvariantError(f"Choi matrix shape {m.shape} does not match dimensions {dim_in} -> {dim_out}")
        if np.max(np.abs(m - m.conj().T)) > 1e-9:
            raise InvariantError("Choi matrix must be Hermitian")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if w[0] < -1e-8:
            raise InvariantError(f"Choi matrix must be positive semidefinite; min eigenvalue {w[0]:.3e}")
        reduced = partial_trace(m, [dim_out, dim_in], [0])
        if np.max(np.abs(reduced - np.eye(dim_in))) > 1e-8:
            raise InvariantError("Choi matrix must reduce to the identity on the input factor")
        m = np.array(m)
        m.flags.writeable = False
        self._matrix = m
        self._dim_in = int(dim_in)
        self._dim_out = int(dim_out)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim_in(self) -> int:
        return self._dim_in

    @property
    def dim_out(self) -> int:
        return self._dim_out


def build_transfer(channel: KrausChannel) -> TransferOperator:
    """Transfer matrix ``sum_a K_a otimes conj(K_a)`` of a channel."""
    m = sum(kron(k, k.conj()) for k in channel.kraus)
    return TransferOperator(m, channel.dim_in, channel.dim_out)


def build_choi(channel: KrausChannel) -> ChoiOperator:
    """Choi matrix ``sum_a |K_a>> <<K_a|`` of a channel (row-major vec)."""
    vecs = [vec(k) for k in channel.kraus]
    m = sum(np.outer(v, v.conj()) for v in vecs)
    return ChoiOperator(m, channel.dim_in, channel.dim_out)


def ncom_via_choi(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> float:
    """Noncommutativity from channel-level data only.

    ``sqrt(1 - Re Tr[Choi(D) Transfer(C) (I otimes rho^T)])``; agrees with
    :func:`ncom` without touching individual Kraus operators, so it applies
    to any Kraus representation of the same channels.
    """
    dim = _check_square_pair(c, d_ch, rho)
    t_c = build_transfer(c).matrix
    choi_d = build_choi(d_ch).matrix
    weight = choi_d @ t_c @ kron(np.eye(dim), rho.matrix.T)
    value = 1.0 - np.trace(weight).real
    return _sqrt_clamped(value, "ncom_via_choi")


def stinespring_isometry(channel: KrausChannel) -> np.ndarray:
    """Isometry V with V rho V^dag tracing to the channel output.

    Maps the dim_in-dimensional system into system x environment where the
    environment dimension equals the Kraus count; the row for (system state
    s, environment state e) is indexed s * n_env + e (environment last).
    """
    d_in, d_out, n_env = channel.dim_in, channel.dim_out, len(channel.kraus)
    v = np.zeros((d_out * n_env, d_in), dtype=complex)
    for e, k in enumerate(channel.kraus):
        v[e::n_env, :] = k
    return v


def _complete_to_unitary(v: np.ndarray, residual_atol: float = 1e-8) -> np.ndarray:
    """Extend isometry columns to a full unitary.

    Remaining columns come from Gram-Schmidt over the standard basis,
    skipping candidates whose residual after projection is below
    ``residual_atol``; the result is re-orthogonalized once for stability.
    """
    n, m = v.shape
    cols = [v[:, j] for j in range(m)]
    for cand in range(n):
        if len(cols) == n:
            break
        r = np.zeros(n, dtype=complex)
        r[cand] = 1.0
        # Two projection sweeps keep the basis orthonormal to machine precision.
        for _ in range(2):
            for c in cols:
                r = r - np.vdot(c, r) * c
        norm = np.linalg.norm(r)
        if norm < residual_atol:
            continue
        cols.append(r / norm)
    if len(cols) != n:
        raise InvariantError("failed to complete isometry to a unitary; input columns ill conditioned")
    return np.stack(cols, axis=1)


def stinespring_unitary(channel: KrausChannel) -> np.ndarray:
    """Unitary dilation U of a channel with square Kraus operators.

    Acts on system x environment (environment last, dimension = Kraus
    count); applied to |s> x |0> it reproduces the Stinespring isometry.
    """
    if channel.dim_in != channel.dim_out:
        raise ValueError("unitary dilation requires equal input and output dimensions")
    d, n_env = channel.dim_in, len(channel.kraus)
    big = d * n_env
    v = stinespring_isometry(channel)
    u = np.zeros((big, big), dtype=complex)
    # Column for system s with environment slot 0 carries V|s>.
    u[:, 0::n_env] = v
    if n_env == 1:
        return u
    filled = _complete_to_unitary(v)
    free = [s * n_env + e for s in range(d) for e in range(1, n_env)]
    for slot, col in zip(free, range(d, big)):
        u[:, slot] = filled[:, col]
    return u


def ncom_via_dilation(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> float:
    """Noncommutativity as a pure-state overlap of dilated order branches.

    Purifies rho, dilates both channels to unitaries on separate
    environments, applies them in the two orders, and returns
    ``sqrt(1 - Re <second-first|first-second>)``. Independent of the other
    routes; intended for small dimensions (the product of system, both
    environments, and the purifying reference must stay within a fixed
    budget).
    """
    d = _check_square_pair(c, d_ch, rho)
    n_e = len(c.kraus)
    n_f = len(d_ch.kraus)
    dec = hermitian_eig(rho.matrix)
    keep = dec.eigenvalues > 1e-12
    weights = dec.eigenvalues[keep]
    basis = dec.eigenvectors[:, keep]
    d_r = int(weights.size)
    total = d * n_e * n_f * d_r
    if total > DILATION_BUDGET:
        raise ValueError(
            f"dilation size {total} exceeds budget {DILATION_BUDGET} "
            f"(system {d}, environments {n_e} x {n_f}, reference {d_r})"
        )
    u_c = stinespring_unitary(c).reshape(d, n_e, d, n_e)
    u_d = stinespring_unitary(d_ch).reshape(d, n_f, d, n_f)
    # Purification sum_r sqrt(w_r) |v_r> |r>; axes are (system, env C, env D, reference).
    psi = np.zeros((d, n_e, n_f, d_r), dtype=complex)
    psi[:, 0, 0, :] = basis * np.sqrt(weights)
    d_first = np.einsum("aFsf,sefr->aeFr", u_d, psi)
    d_then_c = np.einsum("bEae,aeFr->bEFr", u_c, d_first)
    c_first = np.einsum("aEse,sefr->aEfr", u_c, psi)
    c_then_d = np.einsum("bFaf,aEfr->bEFr", u_d, c_first)
    overlap = complex(np.vdot(d_then_c, c_then_d))
    return _sqrt_clamped(1.0 - overlap.real, "ncom_via_dilation")


def metric_distance_form(a: ProjectorFamily, b: ProjectorFamily, rho: DensityMatrix) -> float:
    """Disturbance as a scaled Frobenius distance of transfer matrices.

    For rank-one measurements,
    ``gmed(a, b, rho) = ||(T_A - T_B)(sqrt(rho) otimes I)||_F / sqrt(2)``
    where T is the transfer matrix of the dephasing channel. Exposes the
    metric structure directly; rejects degenerate measurements.
    """
    d = _check_same_dim(a, b)
    if rho.dim != d:
        raise ValueError(f"state dimension {rho.dim} does not match measurement dimension {d}")
    if not (a.is_rank_one() and b.is_rank_one()):
        raise InvariantError("metric form requires rank-one measurements")
    t_a = sum(kron(p, p.conj()) for p in a)
    t_b = sum(kron(q, q.conj()) for q in b)
    root = psd_sqrt(rho.matrix)
    return frobenius_norm((t_a - t_b) @ kron(root, np.eye(d))) / math.sqrt(2.0)
