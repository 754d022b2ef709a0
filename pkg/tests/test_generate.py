"""Random generation of observables, measurements, channels, noise models."""

import math

import numpy as np
import pytest

from conftest import rand_gen
from qincompat.generate import (
    gen_noisy_instruments,
    gen_observables,
    perturbed_observable,
    random_density_matrix,
    random_kraus_channel,
    random_partition,
    random_pure_density,
    random_pvm,
    random_unitary,
    rotate_about_axis,
    sample_noise_model,
    sample_sphere_axis,
)
from qincompat.linalg import frobenius_norm
from qincompat.quantum import bloch_to_pvm
from qincompat.rng import RandomStream


def test_sphere_axis_unit_norm():
    gen = rand_gen(601)
    for _ in range(100):
        v = sample_sphere_axis(gen)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_sphere_axis_mean_is_zero():
    gen = rand_gen(602)
    n = 10_000
    mean = np.mean([sample_sphere_axis(gen) for _ in range(n)], axis=0)
    # each component has variance 1/3; demand |mean| within 3 sigma
    sigma = math.sqrt(1.0 / 3.0 / n)
    assert np.all(np.abs(mean) < 3 * sigma)


def test_rotate_about_axis_basics():
    x = [1.0, 0.0, 0.0]
    z = [0.0, 0.0, 1.0]
    assert np.allclose(rotate_about_axis(x, z, 0.0), x, atol=1e-15)
    assert np.allclose(rotate_about_axis(x, z, math.pi), [-1.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(rotate_about_axis(x, z, math.pi / 2), [0.0, 1.0, 0.0], atol=1e-12)
    gen = rand_gen(603)
    v = gen.normal(size=3)
    k = sample_sphere_axis(gen)
    rotated = rotate_about_axis(v, k, 1.234)
    assert np.linalg.norm(rotated) == pytest.approx(np.linalg.norm(v), abs=1e-12)


def test_rotate_rejects_zero_axis():
    with pytest.raises(ValueError):
        rotate_about_axis([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], 0.5)


def test_perturbed_observable_within_angle():
    gen = rand_gen(604)
    base = np.array([0.0, 0.0, 1.0])
    max_angle = math.radians(22.5)
    for _ in range(200):
        obs = perturbed_observable(base, max_angle, gen)
        angle = math.acos(np.clip(float(np.dot(obs.bloch, base)), -1.0, 1.0))
        assert angle <= max_angle + 1e-12


def test_gen_observables_zero_angle_returns_bases():
    axes = [(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)]
    out = gen_observables(6, axes, 0.0, RandomStream(1))
    assert len(out) == 6
    for obs, truth in out:
        assert np.allclose(obs.bloch, np.asarray(axes[truth]), atol=1e-12)


def test_gen_observables_balanced_truth_and_bounded_tilt():
    axes = [(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)]
    out = gen_observables(100, axes, 22.5, RandomStream(2))
    truths = [t for _, t in out]
    assert truths.count(0) == truths.count(1) == 50
    for obs, truth in out:
        dot = float(np.dot(obs.bloch, np.asarray(axes[truth])))
        assert math.degrees(math.acos(np.clip(dot, -1.0, 1.0))) <= 22.5 + 1e-9


def test_gen_observables_deterministic():
    a = gen_observables(10, [(1.0, 0.0, 0.0)], 15.0, RandomStream(3))
    b = gen_observables(10, [(1.0, 0.0, 0.0)], 15.0, RandomStream(3))
    for (x, tx), (y, ty) in zip(a, b):
        assert tx == ty
        assert np.array_equal(x.bloch, y.bloch)


def test_gen_observables_requires_divisible_count():
    with pytest.raises(ValueError):
        gen_observables(7, [(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)], 10.0, RandomStream(0))


def test_random_partition_properties():
    gen = rand_gen(605)
    for _ in range(50):
        total = int(gen.integers(1, 10))
        parts = int(gen.integers(1, total + 1))
        out = random_partition(total, parts, gen)
        assert len(out) == parts
        assert sum(out) == total
        assert all(p >= 1 for p in out)
    with pytest.raises(ValueError):
        random_partition(3, 4, gen)


def test_random_unitary_is_unitary():
    gen = rand_gen(606)
    for dim in (2, 3, 5):
        u = random_unitary(dim, gen)
        assert frobenius_norm(u.conj().T @ u - np.eye(dim)) < 1e-10


def test_random_pvm_valid_and_ranked():
    gen = rand_gen(607)
    fam = random_pvm(4, gen, ranks=[2, 1, 1])
    assert fam.ranks == (2, 1, 1)
    fam2 = random_pvm(3, gen)
    assert sum(fam2.ranks) == 3


def test_random_density_matrices():
    gen = rand_gen(608)
    rho = random_density_matrix(3, gen)
    evals = np.linalg.eigvalsh(rho.matrix)
    assert evals.min() > 0.0  # invertible by construction
    pure = random_pure_density(3, gen)
    evals = np.linalg.eigvalsh(pure.matrix)
    assert np.sum(evals > 1e-10) == 1


def test_random_kraus_channel_complete():
    gen = rand_gen(609)
    ch = random_kraus_channel(3, 4, gen)
    total = sum(k.conj().T @ k for k in ch.kraus)
    assert frobenius_norm(total - np.eye(3)) < 1e-8


def test_sample_noise_model_respects_eta():
    gen = rand_gen(610)
    for eta in (0.0, 0.25, 0.9):
        for _ in range(20):
            nm = sample_noise_model(2, eta, gen)
            assert 0.0 <= nm.lam <= eta
    with pytest.raises(ValueError):
        sample_noise_model(2, 1.5, gen)


def test_gen_noisy_instruments_eta_zero_is_dephasing():
    from qincompat.measures import build_transfer
    from qincompat.quantum import dephasing_channel

    observables = [obs for obs, _ in gen_observables(4, [(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)], 20.0, RandomStream(4))]
    channels = gen_noisy_instruments(observables, 0.0, RandomStream(5))
    for obs, ch in zip(observables, channels):
        # the Kraus set splits each projector across simplex weights, but
        # with no noise weight the map itself is exactly the dephasing map
        want = build_transfer(dephasing_channel(bloch_to_pvm(obs))).matrix
        got = build_transfer(ch).matrix
        assert frobenius_norm(got - want) < 1e-12


def test_gen_noisy_instruments_complete():
    observables = [obs for obs, _ in gen_observables(6, [(1.0, 0.0, 0.0)], 20.0, RandomStream(6))]
    for eta in (0.25, 0.75):
        for ch in gen_noisy_instruments(observables, eta, RandomStream(7)):
            total = sum(k.conj().T @ k for k in ch.kraus)
            assert frobenius_norm(total - np.eye(2)) < 1e-8


def test_random_stream_split_reproducible():
    base = RandomStream(42)
    child = base.split(3)
    assert child.path == (3,)
    a = child.generator().random(5)
    b = RandomStream(42).split(3).generator().random(5)
    assert np.array_equal(a, b)


def test_random_stream_children_differ():
    base = RandomStream(42)
    a = base.split(0).generator().random(5)
    b = base.split(1).generator().random(5)
    parent = base.generator().random(5)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, parent)


def test_random_stream_replay():
    s = RandomStream(7, (1, 2))
    assert np.array_equal(s.generator().random(4), s.generator().random(4))


def test_random_stream_validation():
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(2**64)
    with pytest.raises(ValueError):
        RandomStream(5).split(-1)
