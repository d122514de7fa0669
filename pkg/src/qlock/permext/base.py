"""Seeded permutation families on bit strings.

A family acts on ``width``-bit integers.  The *first* bits of a string are its
most significant ones: ``forward(x, s) >> (width - out_bits)`` is the extracted
(condensed) part and the low bits form the residual.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Contract:
    """Declared guarantee ``(n_in, k_in) -> eps (n_out, k_out)``.

    ``empirical`` marks desk-scale instances whose constants were chosen by
    hand rather than by the asymptotic formulas; their ``eps`` is only a label.
    """

    n_in: int
    k_in: float
    eps: float
    n_out: int
    k_out: float
    empirical: bool = False

    @property
    def is_extractor(self) -> bool:
        return self.n_out == self.k_out

    def as_dict(self) -> dict:
        return {
            "n_in": self.n_in,
            "k_in": float(self.k_in),
            "eps": float(self.eps),
            "n_out": self.n_out,
            "k_out": float(self.k_out),
            "empirical": self.empirical,
        }


def split_bits(values: np.ndarray, width: int, head: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``width``-bit integers into their top ``head`` bits and the rest."""
    tail = width - head
    return values >> tail, values & ((1 << tail) - 1)


def join_bits(head: np.ndarray, tail: np.ndarray, tail_width: int) -> np.ndarray:
    return (head << tail_width) | tail


class PermutationFamily:
    """Base class: subclasses set ``width``/``out_bits`` and implement the maps."""

    width: int
    out_bits: int
    name = "family"

    @property
    def num_seeds(self) -> int:
        raise NotImplementedError

    @property
    def seeds(self) -> list:
        """Explicit seed values, in seed-index order."""
        return list(range(self.num_seeds))

    def forward(self, xs: np.ndarray, seed: int) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, zs: np.ndarray, seed: int) -> np.ndarray:
        raise NotImplementedError

    def contract(self, k: float | None = None) -> Contract:
        raise NotImplementedError

    @property
    def seed_bits(self) -> float:
        return math.log2(self.num_seeds)

    def extract(self, xs: np.ndarray, seed: int) -> np.ndarray:
        return np.asarray(self.forward(xs, seed)) >> (self.width - self.out_bits)

    def permutation(self, seed: int) -> np.ndarray:
        return self.forward(np.arange(1 << self.width, dtype=np.int64), seed)

    def _check_seed(self, seed: int) -> None:
        if not 0 <= seed < self.num_seeds:
            raise ValueError(f"seed index {seed} out of range [0, {self.num_seeds})")


class IdentityFamily(PermutationFamily):
    """Single-seed identity map that declares its first ``out_bits`` as output."""

    name = "identity"

    def __init__(self, width: int, out_bits: int | None = None):
        self.width = width
        self.out_bits = width if out_bits is None else out_bits

    @property
    def num_seeds(self) -> int:
        return 1

    def forward(self, xs, seed):
        self._check_seed(seed)
        return np.asarray(xs, dtype=np.int64)

    def inverse(self, zs, seed):
        self._check_seed(seed)
        return np.asarray(zs, dtype=np.int64)

    def contract(self, k=None):
        k = self.width if k is None else k
        return Contract(self.width, k, 0.0, self.out_bits, max(0.0, k - (self.width - self.out_bits)))


class PrefixLift(PermutationFamily):
    """Run ``inner`` on the top ``inner.width`` bits of a wider string.

    The untouched low bits are appended after the inner residual, so the
    extracted part is unchanged and the map stays a bijection.
    """

    def __init__(self, inner: PermutationFamily, width: int):
        if width < inner.width:
            raise ValueError(f"cannot lift a {inner.width}-bit family to {width} bits")
        self.inner = inner
        self.width = width
        self.out_bits = inner.out_bits
        self.name = f"lift({inner.name})"

    @property
    def num_seeds(self):
        return self.inner.num_seeds

    @property
    def seeds(self):
        return self.inner.seeds

    def forward(self, xs, seed):
        head, tail = split_bits(np.asarray(xs, dtype=np.int64), self.width, self.inner.width)
        return join_bits(self.inner.forward(head, seed), tail, self.width - self.inner.width)

    def inverse(self, zs, seed):
        head, tail = split_bits(np.asarray(zs, dtype=np.int64), self.width, self.inner.width)
        return join_bits(self.inner.inverse(head, seed), tail, self.width - self.inner.width)

    def contract(self, k=None):
        c = self.inner.contract(None if k is None else k - (self.width - self.inner.width))
        return Contract(self.width, c.k_in + self.width - self.inner.width, c.eps, c.n_out, c.k_out, c.empirical)


def lift(family: PermutationFamily, width: int) -> PermutationFamily:
    return family if family.width == width else PrefixLift(family, width)


def check_bijective(family: PermutationFamily, seeds: Sequence[int] | None = None) -> dict:
    """Exhaustively check that every listed seed gives a permutation with a correct inverse."""
    if family.width > 24:
        raise ValueError(f"exhaustive check limited to 24 bits, family has {family.width}")
    xs = np.arange(1 << family.width, dtype=np.int64)
    seeds = range(family.num_seeds) if seeds is None else seeds
    failures = []
    checked = 0
    for s in seeds:
        zs = family.forward(xs, s)
        ok = (
            zs.min() >= 0
            and zs.max() < len(xs)
            and np.unique(zs).size == len(xs)
            and np.array_equal(family.inverse(zs, s), xs)
        )
        checked += 1
        if not ok:
            failures.append(s)
    return {"seeds_checked": checked, "failures": failures, "bijective": not failures}
