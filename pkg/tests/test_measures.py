"""Disturbance and noncommutativity measures, their bounds and metric structure."""

import math

import numpy as np
import pytest

from conftest import rand_gen
from qincompat.errors import InvariantError
from qincompat.generate import (
    random_density_matrix,
    random_kraus_channel,
    random_pvm,
    sample_noise_model,
    sample_sphere_axis,
)
from qincompat.linalg import frobenius_norm, kron, partial_trace, vec
from qincompat.measures import (
    build_choi,
    build_transfer,
    commutator_weight,
    gmed,
    med,
    med_upper_bound,
    metric_distance_form,
    ncom,
    ncom_via_choi,
    ncom_via_dilation,
    prob_same_eigenspace,
)
from qincompat.quantum import (
    BlochObservable,
    DensityMatrix,
    ProjectorFamily,
    bell_measurement_channel,
    bloch_to_pvm,
    coarse_grain,
    computational_pvm,
    dephasing_channel,
    fourier_pvm,
    noisy_instrument,
    product_measurement_channel,
)

MIXED2 = DensityMatrix.maximally_mixed(2)


def bloch_pair_med(a, b):
    # closed form for rank-1 qubit measurements along Bloch axes a and b
    dot = float(np.dot(a, b))
    return math.sqrt((1.0 - dot * dot) / 2.0)


def rank_one_pvm(dim, gen):
    return random_pvm(dim, gen, ranks=[1] * dim)


def permuted(fam):
    k = len(fam)
    order = list(range(1, k)) + [0]
    return ProjectorFamily([fam[i] for i in order])


# ------------------------------------------------------- med and gmed


def test_prob_same_repeatability():
    gen = rand_gen(301)
    for dim in (2, 3, 4):
        fam = random_pvm(dim, gen)
        assert prob_same_eigenspace(fam, fam) == pytest.approx(1.0, abs=1e-12)


def test_prob_same_x_vs_z(x_pvm, z_pvm):
    assert prob_same_eigenspace(x_pvm, z_pvm) == pytest.approx(0.5, abs=1e-12)


def test_med_x_vs_z(x_pvm, z_pvm):
    assert med(x_pvm, z_pvm) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_med_tilted_bloch_pair():
    # axes 45 degrees apart: med = sqrt((1 - cos^2)/2) = 0.5
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([1.0, 0.0, 1.0]) / math.sqrt(2)
    fam_a = bloch_to_pvm(BlochObservable(a))
    fam_b = bloch_to_pvm(BlochObservable(b))
    assert med(fam_a, fam_b) == pytest.approx(0.5, abs=1e-12)


def test_med_matches_qubit_closed_form():
    gen = rand_gen(302)
    for _ in range(20):
        a = sample_sphere_axis(gen)
        b = sample_sphere_axis(gen)
        fam_a = bloch_to_pvm(BlochObservable(a))
        fam_b = bloch_to_pvm(BlochObservable(b))
        assert med(fam_a, fam_b) == pytest.approx(bloch_pair_med(a, b), abs=1e-10)


def test_med_symmetry():
    gen = rand_gen(303)
    for dim in (2, 3, 4):
        a = random_pvm(dim, gen)
        b = random_pvm(dim, gen)
        assert abs(med(a, b) - med(b, a)) < 1e-12


def test_med_dimension_mismatch():
    with pytest.raises(ValueError):
        med(computational_pvm(2), computational_pvm(3))


def test_gmed_reduces_to_med_on_mixed_state():
    gen = rand_gen(304)
    for dim in (2, 3, 4):
        a = random_pvm(dim, gen)
        b = random_pvm(dim, gen)
        mixed = DensityMatrix.maximally_mixed(dim)
        assert abs(gmed(a, b, mixed) - med(a, b)) < 1e-12


def test_gmed_symmetry_any_state():
    gen = rand_gen(305)
    for dim in (2, 3):
        a = random_pvm(dim, gen)
        b = random_pvm(dim, gen)
        rho = random_density_matrix(dim, gen)
        assert abs(gmed(a, b, rho) - gmed(b, a, rho)) < 1e-12


def test_gmed_state_dimension_mismatch():
    with pytest.raises(ValueError):
        gmed(computational_pvm(2), computational_pvm(2), DensityMatrix.maximally_mixed(3))


def test_faithfulness_zero_iff_commuting():
    gen = rand_gen(306)
    rho = random_density_matrix(3, gen)
    base = random_pvm(3, gen, ranks=[1, 1, 1])
    commuting_partners = [base, permuted(base), coarse_grain(base, [0, 1, 1])]
    for other in commuting_partners:
        max_comm = max(frobenius_norm(p @ q - q @ p) for p in base for q in other)
        assert max_comm <= 1e-8
        assert gmed(base, other, rho) <= 1e-8
    for _ in range(10):
        other = random_pvm(3, gen)
        max_comm = max(frobenius_norm(p @ q - q @ p) for p in base for q in other)
        value = gmed(base, other, rho)
        assert (value <= 1e-8) == (max_comm <= 1e-8)
        assert max_comm > 1e-8  # random bases are never aligned


def test_med_identical_and_permuted_families():
    gen = rand_gen(307)
    for dim in (2, 4):
        fam = random_pvm(dim, gen)
        assert med(fam, fam) <= 1e-8
        assert med(fam, permuted(fam)) <= 1e-8


def test_triangle_inequality_von_neumann():
    gen = rand_gen(308)
    for _ in range(60):
        dim = int(gen.integers(2, 4))
        a, b, c = (rank_one_pvm(dim, gen) for _ in range(3))
        rho = random_density_matrix(dim, gen)
        ab = gmed(a, b, rho)
        bc = gmed(b, c, rho)
        ac = gmed(a, c, rho)
        assert ac <= ab + bc + 1e-9


def test_coarse_grain_monotonic_mixed_state():
    gen = rand_gen(309)
    for _ in range(25):
        dim = int(gen.integers(2, 7))
        a = rank_one_pvm(dim, gen)
        b = random_pvm(dim, gen)
        n_coarse = int(gen.integers(1, dim))
        f = _surjective_map(dim, n_coarse, gen)
        mixed = DensityMatrix.maximally_mixed(dim)
        coarse = coarse_grain(a, f)
        assert gmed(coarse, b, mixed) <= gmed(a, b, mixed) + 1e-10


def test_coarse_grain_monotonic_diagonal_state():
    gen = rand_gen(310)
    for _ in range(25):
        dim = int(gen.integers(2, 7))
        a = rank_one_pvm(dim, gen)
        b = random_pvm(dim, gen)
        # a state diagonal in A's eigenbasis commutes with every projector of A
        w = gen.exponential(size=dim)
        w = w / w.sum()
        rho = DensityMatrix(sum(w[i] * a[i] for i in range(dim)))
        n_coarse = int(gen.integers(1, dim))
        f = _surjective_map(dim, n_coarse, gen)
        coarse = coarse_grain(a, f)
        assert gmed(coarse, b, rho) <= gmed(a, b, rho) + 1e-10


def _surjective_map(n_fine, n_coarse, gen):
    f = list(gen.integers(0, n_coarse, size=n_fine))
    # force surjectivity by pinning the first n_coarse slots
    for v in range(n_coarse):
        f[v] = v
    return f


def test_med_upper_bound_values():
    assert med_upper_bound(2, 2) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert med_upper_bound(1, 7) == 0.0
    assert med_upper_bound(3, 5) == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-15)
    with pytest.raises(ValueError):
        med_upper_bound(0, 2)


def test_med_within_upper_bound():
    gen = rand_gen(311)
    for _ in range(40):
        dim = int(gen.integers(2, 7))
        a = random_pvm(dim, gen)
        b = random_pvm(dim, gen)
        rho = random_density_matrix(dim, gen)
        bound = med_upper_bound(len(a), len(b))
        assert gmed(a, b, rho) <= bound + 1e-10


def test_mub_maximality():
    for dim in (2, 3, 5):
        value = med(computational_pvm(dim), fourier_pvm(dim))
        assert value == pytest.approx(math.sqrt(1.0 - 1.0 / dim), abs=1e-10)


def test_random_pairs_stay_below_mub_value():
    gen = rand_gen(312)
    for dim in (2, 3, 5):
        bound = math.sqrt(1.0 - 1.0 / dim)
        for _ in range(10):
            value = med(rank_one_pvm(dim, gen), rank_one_pvm(dim, gen))
            assert value < bound


# ---------------------------------------------------- noncommutativity


def test_ncom_commuting_channels_zero(z_pvm):
    ch = dephasing_channel(z_pvm)
    assert ncom(ch, ch, MIXED2) == 0.0


def test_ncom_x_vs_z(x_pvm, z_pvm):
    value = ncom(dephasing_channel(x_pvm), dephasing_channel(z_pvm), MIXED2)
    assert value == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_ncom_equals_gmed_for_dephasing():
    gen = rand_gen(313)
    worst = 0.0
    for _ in range(60):
        dim = int(gen.integers(2, 4))
        a = random_pvm(dim, gen)
        b = random_pvm(dim, gen)
        rho = random_density_matrix(dim, gen)
        lhs = ncom(dephasing_channel(a), dephasing_channel(b), rho)
        rhs = gmed(a, b, rho)
        worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-10


def test_ncom_symmetry():
    gen = rand_gen(314)
    for _ in range(10):
        c = random_kraus_channel(3, 3, gen)
        d = random_kraus_channel(3, 2, gen)
        rho = random_density_matrix(3, gen)
        assert abs(ncom(c, d, rho) - ncom(d, c, rho)) < 1e-12


def test_ncom_dimension_mismatch():
    c = random_kraus_channel(2, 2, rand_gen(315))
    d = random_kraus_channel(3, 2, rand_gen(316))
    with pytest.raises(ValueError):
        ncom(c, d, MIXED2)


def test_bell_vs_product_value_and_lower_bound():
    bell = bell_measurement_channel(2, 2)
    product = product_measurement_channel(2, 2)
    mixed4 = DensityMatrix.maximally_mixed(4)
    value = ncom(bell, product, mixed4)
    assert value == pytest.approx(math.sqrt(0.5), abs=1e-10)
    assert value >= math.sqrt(1.0 - 0.5) - 1e-10


def test_noise_robustness_incompatible_pairs():
    gen = rand_gen(317)
    rho = MIXED2
    for _ in range(20):
        while True:
            a, b = sample_sphere_axis(gen), sample_sphere_axis(gen)
            if abs(float(a @ b)) <= 0.99:
                break
        ca = noisy_instrument(bloch_to_pvm(BlochObservable(a)), sample_noise_model(2, 0.9, gen))
        cb = noisy_instrument(bloch_to_pvm(BlochObservable(b)), sample_noise_model(2, 0.9, gen))
        assert ncom(ca, cb, rho) >= 1e-3


def test_commutator_weight_nonnegative_and_zero_for_self():
    gen = rand_gen(318)
    c = random_kraus_channel(3, 3, gen)
    rho = random_density_matrix(3, gen)
    assert commutator_weight(c, c, rho) >= 0.0
    z = dephasing_channel(computational_pvm(3))
    assert commutator_weight(z, z, rho) == pytest.approx(0.0, abs=1e-14)


# --------------------------------------------- operator representations


def test_transfer_acts_as_channel():
    gen = rand_gen(319)
    for _ in range(10):
        dim = int(gen.integers(2, 4))
        ch = random_kraus_channel(dim, 3, gen)
        t = build_transfer(ch)
        x = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
        direct = sum(k @ x @ k.conj().T for k in ch.kraus)
        assert np.linalg.norm(t.matrix @ vec(x) - vec(direct)) < 1e-10


def test_transfer_z_dephasing_diagonal(z_pvm):
    t = build_transfer(dephasing_channel(z_pvm))
    assert np.allclose(t.matrix, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-12)


def test_choi_identity_channel():
    from qincompat.quantum import KrausChannel

    choi = build_choi(KrausChannel([np.eye(2)]))
    m = choi.matrix
    assert np.linalg.matrix_rank(m) == 1
    assert np.trace(m).real == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(m, np.outer(vec(np.eye(2)), vec(np.eye(2)).conj()), atol=1e-12)


def test_choi_z_dephasing(z_pvm):
    choi = build_choi(dephasing_channel(z_pvm))
    expected = sum(kron(q, q.conj()) for q in z_pvm)
    assert np.allclose(choi.matrix, expected, atol=1e-12)


def test_choi_hermitian_psd_trace_preserving():
    gen = rand_gen(320)
    for _ in range(10):
        dim = int(gen.integers(2, 5))
        ch = random_kraus_channel(dim, 3, gen)
        m = build_choi(ch).matrix
        assert frobenius_norm(m - m.conj().T) < 1e-9
        assert np.linalg.eigvalsh(m).min() > -1e-8
        reduced = partial_trace(m, [dim, dim], [0])
        assert frobenius_norm(reduced - np.eye(dim)) < 1e-8


def test_ncom_via_choi_agrees():
    gen = rand_gen(321)
    for _ in range(20):
        dim = int(gen.integers(2, 5))
        c = random_kraus_channel(dim, 3, gen)
        d = random_kraus_channel(dim, 2, gen)
        rho = random_density_matrix(dim, gen)
        assert abs(ncom_via_choi(c, d, rho) - ncom(c, d, rho)) < 1e-10


def test_ncom_via_dilation_agrees():
    gen = rand_gen(322)
    for _ in range(10):
        dim = int(gen.integers(2, 4))
        c = random_kraus_channel(dim, 2, gen)
        d = random_kraus_channel(dim, 2, gen)
        rho = random_density_matrix(dim, gen)
        assert abs(ncom_via_dilation(c, d, rho) - ncom(c, d, rho)) < 1e-8


def test_ncom_via_dilation_budget():
    gen = rand_gen(323)
    c = random_kraus_channel(8, 8, gen)
    d = random_kraus_channel(8, 8, gen)
    rho = random_density_matrix(8, gen)
    # 8 * 8 * 8 * 8 = 4096 fits; anything larger must refuse
    c9 = random_kraus_channel(8, 9, gen)
    with pytest.raises(ValueError):
        ncom_via_dilation(c9, d, rho)


def test_three_path_agreement():
    gen = rand_gen(324)
    for _ in range(30):
        dim = int(gen.integers(2, 5))
        c = random_kraus_channel(dim, int(gen.integers(1, 4)), gen)
        d = random_kraus_channel(dim, int(gen.integers(1, 4)), gen)
        rho = random_density_matrix(dim, gen)
        direct = ncom(c, d, rho)
        via_choi = ncom_via_choi(c, d, rho)
        via_dilation = ncom_via_dilation(c, d, rho)
        assert abs(direct - via_choi) < 1e-8
        assert abs(direct - via_dilation) < 1e-8


def test_metric_form_matches_gmed():
    gen = rand_gen(325)
    for _ in range(20):
        dim = int(gen.integers(2, 4))
        a = rank_one_pvm(dim, gen)
        b = rank_one_pvm(dim, gen)
        rho = random_density_matrix(dim, gen)
        assert abs(metric_distance_form(a, b, rho) - gmed(a, b, rho)) < 1e-10


def test_metric_form_rejects_degenerate():
    fam = ProjectorFamily([np.diag([1.0, 1.0, 0.0]).astype(complex), np.diag([0.0, 0.0, 1.0]).astype(complex)])
    other = computational_pvm(3)
    with pytest.raises(InvariantError):
        metric_distance_form(fam, other, DensityMatrix.maximally_mixed(3))
