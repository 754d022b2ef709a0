"""Indefinite-causal-order composition of two channels and sampling estimators.

The switch runs channels C and D in an order controlled by a qubit: with the
control in |0> the D branch acts first, with |1> the C branch acts first, and
a superposed control interferes the two orders. Measuring the control in the
|+>/|-> basis turns the interference term into a Bernoulli probability
p_minus that is one quarter of the total commutator weight of the two Kraus
sets, giving a direct estimator of channel noncommutativity. A second,
switch-free estimator reproduces eigenspace disturbance from sequential
measurement records alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .linalg import dagger, kron
from .measures import commutator_weight, prob_same_eigenspace
from .quantum import DensityMatrix, KrausChannel, ProjectorFamily
from .rng import RandomStream

KRAUS_ATOL = 1e-8


class SwitchChannel:
    """Channel on system x control (control qubit last) built from two Kraus sets."""

    def __init__(self, kraus: list[np.ndarray], system_dim: int):
        d = int(system_dim)
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        if not ops:
            raise InvariantError("switch channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (2 * d, 2 * d):
                raise InvariantError(f"switch Kraus operators must be {2 * d} x {2 * d}, got {k.shape}")
        total = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(total - np.eye(2 * d))) > KRAUS_ATOL:
            raise InvariantError("switch Kraus operators must satisfy sum K^dag K = I")
        frozen = []
        for k in ops:
            k = np.array(k)
            k.flags.writeable = False
            frozen.append(k)
        self._kraus = tuple(frozen)
        self._system_dim = d

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        return self._kraus

    @property
    def system_dim(self) -> int:
        return self._system_dim

    def __len__(self) -> int:
        return len(self._kraus)

    def __repr__(self) -> str:
        return f"SwitchChannel(system_dim={self._system_dim}, n_kraus={len(self)})"


def build_switch(c: KrausChannel, d_ch: KrausChannel) -> SwitchChannel:
    """Kraus operators ``C_i D_j (x) |0><0| + D_j C_i (x) |1><1|`` for all pairs.

    Pairs are enumerated with the C index outermost. Control state |0> means
    the D branch acts first.
    """
    for ch, name in ((c, "first"), (d_ch, "second")):
        if ch.dim_in != ch.dim_out:
            raise ValueError(f"{name} channel must have equal input and output dimensions")
    if c.dim_in != d_ch.dim_in:
        raise ValueError(f"channels act on different dimensions: {c.dim_in} vs {d_ch.dim_in}")
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    ops = []
    for ci in c.kraus:
        for dj in d_ch.kraus:
            ops.append(kron(ci @ dj, p0) + kron(dj @ ci, p1))
    return SwitchChannel(ops, c.dim_in)


def apply_switch(switch: SwitchChannel, rho: DensityMatrix, omega: DensityMatrix) -> DensityMatrix:
    """Run the switch on system state rho with control state omega."""
    if rho.dim != switch.system_dim:
        raise ValueError(f"system state dimension {rho.dim} does not match switch dimension {switch.system_dim}")
    if omega.dim != 2:
        raise ValueError(f"control state must be a qubit, got dimension {omega.dim}")
    joint = kron(rho.matrix, omega.matrix)
    stack = np.stack(switch.kraus)
    out = np.einsum("aij,jk,alk->il", stack, joint, stack.conj())
    return DensityMatrix((out + out.conj().T) / 2.0)


def exact_p_minus(c: KrausChannel, d_ch: KrausChannel, rho: DensityMatrix) -> float:
    """Probability of the |-> control outcome with the control prepared in |+>.

    Equals ``sum_ij Tr(rho |[C_i, D_j]|^2) / 4``; zero exactly when the
    Kraus sets commute.
    """
    return float(min(commutator_weight(c, d_ch, rho) / 4.0, 1.0))


def _hoeffding_count(epsilon: float, delta: float) -> int:
    """Two-sided Hoeffding bound for a Bernoulli mean: ceil(log(2/delta)/(2 eps^2))."""
    epsilon = float(epsilon)
    delta = float(delta)
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return int(math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon)))


@dataclass(frozen=True)
class SamplingPlan:
    """Accuracy target and the shot count it implies.

    ``shots`` may be omitted and is then derived from (epsilon, delta); when
    given it must match the Hoeffding count exactly.
    """

    epsilon: float
    delta: float
    shots: int | None = None

    def __post_init__(self) -> None:
        required = _hoeffding_count(self.epsilon, self.delta)
        if self.shots is None:
            object.__setattr__(self, "shots", required)
        elif int(self.shots) != required:
            raise InvariantError(
                f"shots {self.shots} does not match the Hoeffding count {required} "
                f"for epsilon={self.epsilon}, delta={self.delta}"
            )
        else:
            object.__setattr__(self, "shots", int(self.shots))


def hoeffding_shots(epsilon: float, delta: float) -> SamplingPlan:
    """Plan guaranteeing |p_hat - p| <= epsilon with probability >= 1 - delta."""
    return SamplingPlan(float(epsilon), float(delta))


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of a finite-shot estimation run.

    ``p_minus_hat`` is the empirical minus-outcome frequency, ``ncom_hat``
    the implied noncommutativity ``sqrt(2 p_minus_hat)``; ``exact_p_minus``
    records the exact probability used to drive the simulation when known.
    """

    p_minus_hat: float
    ncom_hat: float
    shots: int
    seed: int
    exact_p_minus: float | None = None

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise InvariantError(f"shots must be positive, got {self.shots}")
        if not (0.0 <= self.p_minus_hat <= 1.0):
            raise InvariantError(f"p_minus_hat must lie in [0, 1], got {self.p_minus_hat}")
        if abs(self.ncom_hat - math.sqrt(2.0 * self.p_minus_hat)) > 1e-12:
            raise InvariantError("ncom_hat must equal sqrt(2 * p_minus_hat)")


def estimate_ncom_switch(
    c: KrausChannel,
    d_ch: KrausChannel,
    rho: DensityMatrix,
    plan: SamplingPlan,
    stream: RandomStream,
) -> EstimationResult:
    """Estimate noncommutativity by sampling the switch's control read-out.

    Simulates ``plan.shots`` Bernoulli trials at the exact minus-outcome
    probability (control prepared in |+>, measured in |+>/|->). The estimate
    is an exact multiple of 1/shots, and commuting channels yield exactly
    zero for any seed.
    """
    p = exact_p_minus(c, d_ch, rho)
    gen = stream.generator()
    hits = int(np.count_nonzero(gen.random(plan.shots) < p))
    p_hat = hits / plan.shots
    return EstimationResult(
        p_minus_hat=p_hat,
        ncom_hat=math.sqrt(2.0 * p_hat),
        shots=plan.shots,
        seed=stream.seed,
        exact_p_minus=p,
    )


def _row_cumulative(table: np.ndarray) -> np.ndarray:
    """Cumulative rows along the last axis with the final entry pinned to 1."""
    cum = np.cumsum(table, axis=-1)
    cum[..., -1] = 1.0
    return cum


def estimate_med_sequential(
    a: ProjectorFamily,
    b: ProjectorFamily,
    shots: int,
    stream: RandomStream,
) -> EstimationResult:
    """Estimate eigenspace disturbance from sequential measurement records.

    Each shot prepares the maximally mixed state and records outcomes of
    measuring A, then B, then A again, using the exact Born-rule cascade:
    outcome i with probability rank(P_i)/d, outcome j with probability
    Tr[P_i Q_j]/rank(P_i), final outcome i' with probability
    Tr[P_i' Q_j P_i Q_j]/Tr[P_i Q_j]. The estimate is
    ``sqrt(1 - fraction of shots with i' = i)``; measuring the same family
    twice always repeats its outcome, so a == b gives exactly zero.
    """
    if a.dim != b.dim:
        raise ValueError(f"measurements act on different dimensions: {a.dim} vs {b.dim}")
    shots = int(shots)
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    d = a.dim
    pa = np.stack(a.projectors)
    qb = np.stack(b.projectors)
    ranks = np.array(a.ranks, dtype=float)
    first_probs = ranks / d
    joint = np.einsum("iab,jba->ij", pa, qb).real
    joint = np.clip(joint, 0.0, None)
    cond = joint / ranks[:, None]
    qpq = np.einsum("jab,ibc,jcd->ijad", qb, pa, qb)
    final = np.einsum("kab,ijba->ijk", pa, qpq).real
    final = np.clip(final, 0.0, None)
    # Rows for zero-probability (i, j) pairs are never sampled; fill them
    # uniformly to keep the cumulative tables finite.
    safe = np.where(joint > 0.0, joint, 1.0)
    final = final / safe[:, :, None]
    final[joint == 0.0] = 1.0 / len(a)

    gen = stream.generator()
    i = gen.choice(len(a), size=shots, p=first_probs / first_probs.sum())
    cond_cum = _row_cumulative(cond)
    j = (gen.random(shots)[:, None] > cond_cum[i]).sum(axis=1)
    final_cum = _row_cumulative(final)
    i2 = (gen.random(shots)[:, None] > final_cum[i, j]).sum(axis=1)
    p_same_hat = float(np.count_nonzero(i2 == i)) / shots
    p_minus_hat = (1.0 - p_same_hat) / 2.0
    return EstimationResult(
        p_minus_hat=p_minus_hat,
        ncom_hat=math.sqrt(1.0 - p_same_hat),
        shots=shots,
        seed=stream.seed,
        exact_p_minus=(1.0 - prob_same_eigenspace(a, b)) / 2.0,
    )
