"""Binary codes whose codewords serve as Hadamard masks."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .gf2x import field_context, poly_eval


@dataclass(frozen=True)
class BinaryCode:
    """A binary code stored as a ``(size, length)`` array of bits.

    Column ``i`` of ``codewords`` is coordinate ``i``; when a codeword is used
    as a Hadamard mask, coordinate ``i`` addresses qubit ``i``.
    """

    length: int
    codewords: np.ndarray
    min_distance: int
    kind: str = "explicit"

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def gamma(self) -> float:
        return self.min_distance / self.length

    def as_strings(self) -> list[str]:
        return ["".join(str(int(b)) for b in word) for word in self.codewords]

    def masks(self) -> list[int]:
        """Codewords as qubit masks; qubit 0 is the most significant bit."""
        weights = 1 << np.arange(self.length - 1, -1, -1, dtype=np.int64)
        return [int(w) for w in self.codewords.astype(np.int64) @ weights]


def minimum_distance(codewords: np.ndarray) -> int:
    words = np.asarray(codewords, dtype=np.uint8)
    if len(words) < 2:
        return int(words.shape[1]) if words.ndim == 2 else 0
    best = words.shape[1]
    for i in range(len(words) - 1):
        dist = np.count_nonzero(words[i + 1 :] != words[i], axis=1)
        best = min(best, int(dist.min()))
    return best


def from_codewords(words, kind: str = "explicit") -> BinaryCode:
    arr = np.asarray(words, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError("codewords must form a 2-d array")
    if len({w.tobytes() for w in arr}) != len(arr):
        raise ValueError("codewords are not distinct")
    return BinaryCode(int(arr.shape[1]), arr, minimum_distance(arr), kind)


def hadamard_codewords(inner_bits: int) -> np.ndarray:
    """Hadamard code: word ``x`` has bit ``x . z mod 2`` at coordinate ``z``.

    Coordinates ``z`` run over ``0 .. 2**inner_bits - 1`` and the inner product
    uses the little-endian bits of ``x`` and ``z``.
    """
    points = np.arange(1 << inner_bits)
    x = points[:, None]
    z = points[None, :]
    parity = np.zeros((len(points), len(points)), dtype=np.int64)
    overlap = x & z
    for bit in range(inner_bits):
        parity ^= (overlap >> bit) & 1
    return parity.astype(np.uint8)


def linear_codewords(generator) -> np.ndarray:
    gen = np.asarray(generator, dtype=np.int64) % 2
    k = gen.shape[0]
    messages = np.array(list(product((0, 1), repeat=k)), dtype=np.int64)
    return ((messages @ gen) % 2).astype(np.uint8)


def build_binary_code(kind: str, **params) -> BinaryCode:
    """Build a binary code.

    Parameters
    ----------
    kind : {"hadamard", "augmented_hadamard", "rs_concat_hadamard", "linear"}
        ``hadamard`` takes ``inner_bits`` and has ``2**inner_bits`` words of the
        same length.  ``augmented_hadamard`` adds the complements (first-order
        Reed-Muller code).  ``rs_concat_hadamard`` takes ``field_bits``,
        ``dimension`` and optionally ``rs_length`` (default ``2**field_bits - 1``)
        and encodes each Reed-Solomon symbol with the Hadamard code.  ``linear``
        takes a binary ``generator`` matrix.

    Returns
    -------
    BinaryCode
    """
    if kind == "hadamard":
        inner = _positive(params, "inner_bits")
        return BinaryCode(1 << inner, hadamard_codewords(inner), max(1 << (inner - 1), 1) if inner else 0, kind)
    if kind == "augmented_hadamard":
        inner = _positive(params, "inner_bits")
        base = hadamard_codewords(inner)
        words = np.vstack([base, 1 - base])
        return from_codewords(words, kind)
    if kind == "rs_concat_hadamard":
        bits = _positive(params, "field_bits")
        dim = _positive(params, "dimension")
        q = 1 << bits
        rs_length = params.get("rs_length", q - 1)
        if not dim <= rs_length <= q:
            raise ValueError(f"need dimension <= rs_length <= {q}, got {dim} and {rs_length}")
        ctx = field_context(bits)
        # evaluate at nonzero points unless the full field is requested
        points = list(range(1, q))[:rs_length] if rs_length < q else list(range(q))
        inner = hadamard_codewords(bits)
        words = []
        for message in product(range(q), repeat=dim):
            symbols = [poly_eval(ctx, message, p) for p in points]
            words.append(np.concatenate([inner[s] for s in symbols]))
        code = from_codewords(np.array(words), kind)
        return code
    if kind == "linear":
        if "generator" not in params:
            raise ValueError("linear code needs a generator matrix")
        return from_codewords(linear_codewords(params["generator"]), kind)
    raise ValueError(f"unknown code kind {kind!r}")


def _positive(params: dict, name: str) -> int:
    if name not in params:
        raise ValueError(f"missing code parameter {name!r}")
    value = params[name]
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


SHORTENED_HAMMING_6 = ((1, 0, 0, 0, 1, 1), (0, 1, 0, 1, 0, 1), (0, 0, 1, 1, 1, 0))
