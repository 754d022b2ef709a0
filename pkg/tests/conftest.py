"""Shared fixtures: Pauli matrices, the X/Z qubit measurements, seeded generators."""

import numpy as np
import pytest

from qincompat.quantum import PAULI_X, PAULI_Y, PAULI_Z, computational_pvm, fourier_pvm
from qincompat.rng import RandomStream


@pytest.fixture
def pauli():
    return {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


@pytest.fixture
def z_pvm():
    """Standard-basis qubit measurement {|0><0|, |1><1|}."""
    return computational_pvm(2)


@pytest.fixture
def x_pvm():
    """X-basis qubit measurement {|+><+|, |-><-|}."""
    return fourier_pvm(2)


def stream(seed, *path):
    s = RandomStream(seed)
    for i in path:
        s = s.split(i)
    return s


def rand_gen(seed):
    """Plain numpy generator for test-local sampling, independent of package streams."""
    return np.random.default_rng(seed)


def random_complex(gen, n, m=None):
    m = n if m is None else m
    return gen.normal(size=(n, m)) + 1j * gen.normal(size=(n, m))


def random_hermitian(gen, n):
    z = random_complex(gen, n)
    return (z + z.conj().T) / 2.0
