import itertools

import numpy as np
import pytest

from qlock.codes import (
    SHORTENED_HAMMING_6,
    build_binary_code,
    from_codewords,
    minimum_distance,
)


def brute_distance(words):
    return min(
        sum(a != b for a, b in zip(u, v)) for u, v in itertools.combinations(words.tolist(), 2)
    )


def test_hadamard_two_bits():
    code = build_binary_code("hadamard", inner_bits=2)
    assert code.as_strings() == ["0000", "0101", "0011", "0110"]
    assert code.min_distance == 2
    assert code.gamma == 0.5


def test_hadamard_one_bit():
    code = build_binary_code("hadamard", inner_bits=1)
    assert code.as_strings() == ["00", "01"]
    assert code.min_distance == 1


@pytest.mark.parametrize("inner", range(1, 7))
def test_hadamard_weights_and_linearity(inner):
    code = build_binary_code("hadamard", inner_bits=inner)
    words = code.codewords
    weights = words.sum(axis=1)
    assert weights[0] == 0
    assert np.all(weights[1:] == code.length // 2)
    assert code.min_distance == code.length // 2 == minimum_distance(words)
    present = {w.tobytes() for w in words}
    for a, b in itertools.combinations(words, 2):
        assert (a ^ b).tobytes() in present


def test_rs_concatenated_code():
    code = build_binary_code("rs_concat_hadamard", field_bits=2, dimension=2)
    assert code.size == 16
    assert code.length == 12
    assert code.min_distance == brute_distance(code.codewords)
    # outer distance 2 times inner distance 2
    assert code.min_distance >= 4


def test_augmented_hadamard():
    code = build_binary_code("augmented_hadamard", inner_bits=3)
    assert (code.size, code.length, code.min_distance) == (16, 8, 4)
    assert code.min_distance == brute_distance(code.codewords)


def test_shortened_hamming():
    code = build_binary_code("linear", generator=SHORTENED_HAMMING_6)
    assert (code.size, code.length, code.min_distance) == (8, 6, 3)
    assert code.gamma == 0.5


def test_masks_put_coordinate_zero_on_top_bit():
    code = from_codewords([[1, 0, 0], [0, 0, 1]])
    assert code.masks() == [0b100, 0b001]


@pytest.mark.parametrize(
    "kind, params",
    [
        ("hadamard", {}),
        ("hadamard", {"inner_bits": 0}),
        ("rs_concat_hadamard", {"field_bits": 2, "dimension": 5}),
        ("linear", {}),
        ("nope", {}),
    ],
)
def test_inconsistent_parameters(kind, params):
    with pytest.raises(ValueError):
        build_binary_code(kind, **params)


def test_repeated_codewords_rejected():
    with pytest.raises(ValueError):
        from_codewords([[0, 1], [0, 1]])
