import itertools

import numpy as np
import pytest

from qlock.codes import build_binary_code, from_codewords
from qlock.gf2x import field_context
from qlock.mub import (
    build_galois_mub_tables,
    build_hadamard_family,
    build_mub_family,
    galois_phase,
    mask_overlap_bound,
    multiplication_tensor,
)


def dense_hadamard(n, mask):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    out = np.ones((1, 1))
    for q in range(n):
        out = np.kron(out, h if mask >> (n - 1 - q) & 1 else np.eye(2))
    return out


def test_gf4_multiplication_matrices():
    tensor = multiplication_tensor(field_context(2))
    # M_l[x, y]: coefficient of X^l in X^x X^y
    assert tensor[0].tolist() == [[1, 0], [0, 1]]
    assert tensor[1].tolist() == [[0, 1], [1, 1]]


def test_alpha_examples():
    family = build_galois_mub_tables(2, 5)
    # u = (0, 1) little endian is j - 1 = 2; u = (1, 0) is j - 1 = 1
    assert family.alphas[2].tolist() == [0, 1, 1]
    assert family.alphas[1].tolist() == [1, 0, 1]


def test_phase_examples():
    family = build_galois_mub_tables(2, 5)
    assert galois_phase(family, 3, 0b11) == 3
    assert galois_phase(family, 3, 0b01) == 0
    for j in range(1, 5):
        assert galois_phase(family, j, 0) == 0


def test_first_basis_is_identity():
    family = build_galois_mub_tables(3, 9)
    assert np.allclose(family.unitary(0).matrix(), np.eye(8))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_galois_bases_are_mutually_unbiased(n):
    family = build_galois_mub_tables(n, (1 << n) + 1)
    mats = [u.matrix() for u in family.unitaries()]
    d = 1 << n
    for m in mats:
        assert np.abs(m.conj().T @ m - np.eye(d)).max() <= 1e-12
    for a, b in itertools.permutations(mats, 2):
        assert np.abs(np.abs(a.conj().T @ b) ** 2 - 1 / d).max() <= 1e-10
    # the measurement maps spread each basis across the others
    meas = [u.matrix() for u in family.measurement_unitaries()]
    for a, b in itertools.permutations(meas, 2):
        assert np.abs(np.abs(a @ b.conj().T) ** 2 - 1 / d).max() <= 1e-10


@pytest.mark.parametrize("r", [0, 10])
def test_galois_range(r):
    with pytest.raises(ValueError):
        build_galois_mub_tables(3, r)


def test_hadamard_family_examples():
    family = build_hadamard_family(build_binary_code("hadamard", inner_bits=2))
    assert (family.n, family.r, family.gamma) == (4, 4, 0.5)
    single = build_hadamard_family(from_codewords([[0, 0, 0]]))
    assert np.allclose(single.unitary(0).matrix(), np.eye(8))
    pair = build_hadamard_family(from_codewords([[0, 0], [1, 1]]))
    a, b = (u.matrix() for u in pair.unitaries())
    assert np.allclose(np.abs(a.conj().T @ b), 0.5)


@pytest.mark.parametrize("inner", [2, 3])
def test_mask_overlap_is_exact(inner):
    family = build_hadamard_family(build_binary_code("augmented_hadamard", inner_bits=inner))
    n = family.n
    words = family.code.codewords
    mats = [u.matrix() for u in family.unitaries()]
    for i, j in itertools.combinations(range(family.r), 2):
        assert np.allclose(mats[i], dense_hadamard(n, family.code.masks()[i]), atol=1e-14)
        dist = int(np.count_nonzero(words[i] != words[j]))
        assert abs(np.abs(mats[i].conj().T @ mats[j]).max() - mask_overlap_bound(dist)) <= 1e-12


def test_family_builder_kinds():
    assert build_mub_family("hadamard", 8).r == 8
    assert build_mub_family("hadamard", 8, 16).code.kind == "augmented_hadamard"
    punctured = build_mub_family("hadamard", 6)
    assert punctured.n == 6 and punctured.code.min_distance == 2
    assert build_mub_family("galois", 3).r == 9
    with pytest.raises(ValueError):
        build_mub_family("hadamard", 8, 17)
    with pytest.raises(ValueError):
        build_mub_family("fourier", 3)
