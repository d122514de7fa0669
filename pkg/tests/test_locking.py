import itertools
import math

import numpy as np
import pytest

from qlock.locking import (
    LockingScheme,
    accessible_info_search,
    adversary_posterior,
    basis_povm,
    computational_povm,
    flat_prior,
    information_bound,
    key_guess_povm,
    lock_decode,
    lock_encode,
    locking_bound,
    mutual_information,
    pauli_family,
    pauli_locking_bound,
    random_pauli_subset,
    random_rank1_povm,
    supplied_povm,
    uniform_prior,
)
from qlock.qsim import HadamardMask, StructuredUnitary, identity
from qlock.urel import UnitaryFamily, build_metric_ur


def two_basis_scheme():
    members = (identity(1), StructuredUnitary(1, (HadamardMask(1, 1),)))
    return LockingScheme(UnitaryFamily(1, members, (2, 1)))


def small_scheme(mode="padded"):
    # 3 message bits, d_B = 4, t = 8
    family = build_metric_ur(5, 3, "galois", 2)
    family = UnitaryFamily(5, family.members[:8], family.split)
    return LockingScheme(family, mode)


def dense_posterior(scheme, prior, povm_vectors):
    """Posterior table from explicit density matrices."""
    fam = scheme.family
    rows = []
    for v in povm_vectors:
        element = np.outer(v, v.conj())
        row = []
        for x in range(fam.d_a):
            total = 0.0
            for k, b in itertools.product(range(fam.t), range(fam.d_b)):
                psi = lock_encode(scheme, x, k, b)
                total += np.real(psi.conj() @ element @ psi)
            row.append(total / (fam.t * fam.d_b))
        rows.append(row)
    joint = np.array(rows) * prior[None, :]
    return joint / joint.sum(axis=1, keepdims=True)


def test_two_basis_encoding():
    scheme = two_basis_scheme()
    assert np.allclose(lock_encode(scheme, 0, 1), [1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert np.allclose(lock_encode(scheme, 1, 0), [0, 1])


def test_identity_key_leaves_state():
    scheme = small_scheme()
    identity_key = 0  # Galois basis 0 with the first seed: multiplication by 1
    psi = lock_encode(scheme, 5, identity_key, 2)
    expected = np.zeros(32)
    expected[5 * 4 + 2] = 1
    assert np.allclose(psi, expected)


@pytest.mark.parametrize("mode", ["padded", "onetime_pad_b"])
def test_round_trip_exhaustive(mode):
    scheme = small_scheme(mode)
    for x in range(scheme.message_count):
        for key in range(scheme.key_count):
            bs = range(scheme.family.d_b) if mode == "padded" else [None]
            for b in bs:
                assert lock_decode(scheme, lock_encode(scheme, x, key, b), key) == x


def test_wrong_key_is_flagged():
    scheme = small_scheme()
    psi = lock_encode(scheme, 3, 4, 1)
    flagged = 0
    for key in range(scheme.key_count):
        if key == 4:
            continue
        try:
            flagged += lock_decode(scheme, psi, key) != 3
        except ValueError as err:
            assert "ciphertext/key mismatch" in str(err)
            flagged += 1
    assert flagged >= 1


def test_distinct_messages_have_orthogonal_supports():
    scheme = small_scheme()
    fam = scheme.family
    for k in range(fam.t):
        blocks = []
        for x in range(fam.d_a):
            states = np.stack([lock_encode(scheme, x, k, b) for b in range(fam.d_b)])
            blocks.append(np.abs(fam.members[k].apply(states)) ** 2 > 1e-12)
        support = [b.any(axis=0) for b in blocks]
        for a, c in itertools.combinations(support, 2):
            assert not np.any(a & c)


def test_encode_range_errors():
    scheme = small_scheme()
    with pytest.raises(ValueError):
        lock_encode(scheme, 8, 0, 0)
    with pytest.raises(ValueError):
        lock_encode(scheme, 0, 8, 0)
    with pytest.raises(ValueError):
        lock_encode(scheme, 0, 0, 4)
    with pytest.raises(ValueError):
        lock_encode(scheme, 0, 0)
    assert lock_encode(scheme, 0, 0, rng=np.random.default_rng(0)).shape == (32,)


def test_computational_attack_on_two_bases():
    report = adversary_posterior(two_basis_scheme(), "uniform", computational_povm(2))
    assert np.allclose(report.posteriors[0], [0.75, 0.25], atol=1e-15)
    assert report.worst_tv == pytest.approx(0.25, abs=1e-15)
    assert report.worst_tv >= report.average_tv
    assert report.mutual_information >= 0


def test_known_key_reveals_message():
    fam = build_metric_ur(3, 3, "galois", 1)
    scheme = LockingScheme(UnitaryFamily(3, fam.members[:1], fam.split))
    report = adversary_posterior(scheme, "uniform", key_guess_povm(scheme, 0))
    assert report.worst_tv == pytest.approx(1 - 2**-3, abs=1e-12)


def test_posterior_matches_density_matrix_oracle():
    scheme = small_scheme()
    rng = np.random.default_rng(1)
    povm = random_rank1_povm(32, 40, rng)
    prior = flat_prior(scheme, 2, rng)
    report = adversary_posterior(scheme, prior, povm)
    oracle = dense_posterior(scheme, prior, povm.vectors * np.sqrt(povm.weights)[:, None])
    assert np.allclose(report.posteriors, oracle, atol=1e-12)
    # total probability
    assert np.allclose(report.outcome_probs @ report.posteriors, prior, atol=1e-9)


def test_invalid_povms():
    scheme = two_basis_scheme()
    with pytest.raises(ValueError, match="invalid POVM"):
        adversary_posterior(scheme, "uniform", basis_povm(np.array([[1, 0], [1, 0]]), "bad"))
    with pytest.raises(ValueError, match="invalid POVM"):
        supplied_povm([np.array([[1, 0], [0, -0.5]])])
    with pytest.raises(ValueError):
        adversary_posterior(scheme, np.array([0.5, 0.6]), computational_povm(2))


def test_supplied_povm_matches_projective():
    scheme = two_basis_scheme()
    elements = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    a = adversary_posterior(scheme, "uniform", supplied_povm(elements))
    b = adversary_posterior(scheme, "uniform", computational_povm(2))
    assert np.allclose(a.posteriors, b.posteriors)


def test_guessing_floor():
    scheme = small_scheme()
    report = adversary_posterior(scheme, "uniform", key_guess_povm(scheme, 0))
    assert report.worst_tv >= 1 / scheme.key_count - 2.0**-scheme.message_bits - 1e-9


def test_mutual_information_oracle():
    joint = np.array([[0.5, 0.0], [0.0, 0.5]])
    assert mutual_information(joint) == pytest.approx(1.0)
    assert mutual_information(np.full((2, 2), 0.25)) == 0.0


def test_bounds():
    assert locking_bound(0.1, 2, 3) == pytest.approx(0.2 / (0.5 - 0.1))
    assert locking_bound(0.6, 2, 3) == math.inf
    assert information_bound(0.0, 4) == 0.0


def test_flat_prior():
    scheme = small_scheme()
    prior = flat_prior(scheme, 1, np.random.default_rng(2))
    assert np.count_nonzero(prior) == 2 and prior.sum() == 1
    with pytest.raises(ValueError):
        flat_prior(scheme, 4, np.random.default_rng(2))


def test_accessible_info_two_bases():
    scheme = two_basis_scheme()
    joint = accessible_info_search(scheme, restarts=8, target="message_and_key", rng=np.random.default_rng(3))
    assert 0.45 <= joint["best"] <= 0.501
    message_only = accessible_info_search(scheme, restarts=8, rng=np.random.default_rng(3))
    # 1 - h(cos^2(pi/8)) bits for a measurement halfway between the bases
    p = math.cos(math.pi / 8) ** 2
    expected = 1 + p * math.log2(p) + (1 - p) * math.log2(1 - p)
    assert message_only["best"] == pytest.approx(expected, abs=1e-3)
    assert message_only["best"] <= 1 + 1e-9


def test_accessible_info_known_key():
    family = UnitaryFamily(2, (identity(2),), (4, 1))
    result = accessible_info_search(LockingScheme(family), restarts=2, max_sweeps=2)
    assert result["best"] >= 2 - 0.01


def test_pauli_examples():
    rng = np.random.default_rng(4)
    for _ in range(10):
        report = pauli_locking_bound(2, random_pauli_subset(2, 2, rng))
        assert report["measured_tv"] >= 0.5 - 1e-12
    full = pauli_locking_bound(2, [(u, v) for u in range(4) for v in range(4)])
    assert full["tv_lower_bound"] < 0 and full["measured_tv"] <= 1e-12
    with pytest.raises(ValueError):
        pauli_locking_bound(11, [(0, 0)])
    with pytest.raises(ValueError):
        pauli_locking_bound(2, [])


def test_pauli_encoding_matches_dense_paulis():
    x_gate = np.array([[0, 1], [1, 0]])
    z_gate = np.diag([1, -1])
    family = pauli_family(2, [(0b10, 0b01)])
    scheme = LockingScheme(family)
    dense = np.kron(x_gate, z_gate)  # X on qubit 0, Z on qubit 1
    for x in range(4):
        basis = np.zeros(4)
        basis[x] = 1
        assert np.allclose(lock_encode(scheme, x, 0), dense @ basis)


def test_pauli_counting_oracle():
    # computational attack on X^u Z^v |x> sees x ^ u; posterior counts by hand
    rng = np.random.default_rng(5)
    n = 3
    keys = random_pauli_subset(n, 3, rng)
    shifts = [u for u, _ in keys]
    worst = 0.0
    for outcome in range(1 << n):
        counts = np.zeros(1 << n)
        for u in shifts:
            counts[outcome ^ u] += 1
        posterior = counts / counts.sum()
        worst = max(worst, 0.5 * np.abs(posterior - 1 / 8).sum())
    assert pauli_locking_bound(n, keys)["measured_tv"] == pytest.approx(worst, abs=1e-12)


def test_uniform_prior():
    assert uniform_prior(small_scheme()).sum() == pytest.approx(1.0)
