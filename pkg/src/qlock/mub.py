"""Mutually unbiased bases and Hadamard-mask approximate MUB families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import BinaryCode, build_binary_code, minimum_distance
from .gf2x import FieldContext, field_context
from .qsim import DiagonalPhase, HadamardMask, StructuredUnitary, identity


def _bits_little_endian(values: np.ndarray, width: int) -> np.ndarray:
    return ((np.asarray(values)[:, None] >> np.arange(width)) & 1).astype(np.int64)


def multiplication_tensor(ctx: FieldContext) -> np.ndarray:
    """Array ``M[l, x, y]``: coefficient of ``X**l`` in ``X**x * X**y``."""
    n = ctx.m
    powers = [ctx.pow(0b10, z) for z in range(2 * n - 1)]
    tensor = np.zeros((n, n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            tensor[:, x, y] = [(powers[x + y] >> l) & 1 for l in range(n)]
    return tensor


@dataclass(frozen=True)
class GaloisMubFamily:
    """Bases ``V_0 = 1`` and ``V_j = D_u H^n`` with ``u`` the bits of ``j - 1``.

    ``alphas[j - 1, z]`` is the binary coefficient vector of the quadratic form
    of basis ``j``; entry ``(x, y)`` of its symmetric matrix is ``alpha[x + y]``.
    """

    n: int
    r: int
    alphas: np.ndarray
    ctx: FieldContext

    @property
    def gamma(self) -> float:
        return 1.0

    def phase_exponents(self, j: int) -> np.ndarray:
        """``T_u(v) mod 4`` for every basis label ``v`` (little-endian bits)."""
        if not 1 <= j < self.r:
            raise ValueError(f"basis index {j} has no phase table (valid: 1..{self.r - 1})")
        n = self.n
        alpha = self.alphas[j - 1]
        form = alpha[np.add.outer(np.arange(n), np.arange(n))]
        bits = _bits_little_endian(np.arange(1 << n), n)
        return np.einsum("vi,ij,vj->v", bits, form, bits) % 4

    def unitary(self, j: int) -> StructuredUnitary:
        if not 0 <= j < self.r:
            raise ValueError(f"basis index {j} out of range [0, {self.r})")
        if j == 0:
            return identity(self.n)
        full = (1 << self.n) - 1
        return StructuredUnitary(
            self.n, (HadamardMask(self.n, full), DiagonalPhase(self.n, self.phase_exponents(j)))
        )

    def unitaries(self) -> list[StructuredUnitary]:
        return [self.unitary(j) for j in range(self.r)]

    def measurement_unitaries(self) -> list[StructuredUnitary]:
        """``V_j^dagger``: applying it then reading the computational basis
        measures in the basis ``{V_j |y>}``.

        The products ``V_j^dagger V_i`` are diagonal, so ``V_j`` itself does
        not spread states across bases.
        """
        return [u.adjoint() for u in self.unitaries()]


def build_galois_mub_tables(n: int, r: int) -> GaloisMubFamily:
    """Exact MUBs on ``n`` qubits from the multiplication table of GF(2^n)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 1 <= r <= (1 << n) + 1:
        raise ValueError(f"r must lie in [1, {(1 << n) + 1}], got {r}")
    ctx = field_context(n)
    tensor = multiplication_tensor(ctx)
    # alpha_u(z) depends only on z = x + y; read it off row x = min(z, n-1)
    z = np.arange(2 * n - 1)
    xs = np.minimum(z, n - 1)
    coeff_of_power = tensor[:, xs, z - xs]  # (l, z)
    us = _bits_little_endian(np.arange(max(r - 1, 0)), n)
    alphas = (us @ coeff_of_power) % 2
    return GaloisMubFamily(n, r, alphas, ctx)


def galois_phase(family: GaloisMubFamily, j: int, v: int) -> int:
    """Exponent ``T_u(v) mod 4`` so that ``<v|V_j|w>`` carries ``i**T``."""
    return int(family.phase_exponents(j)[v])


@dataclass(frozen=True)
class HadamardFamily:
    """Unitaries ``H^{v}`` for the codewords ``v`` of a binary code."""

    code: BinaryCode

    @property
    def n(self) -> int:
        return self.code.length

    @property
    def r(self) -> int:
        return self.code.size

    @property
    def gamma(self) -> float:
        return self.code.gamma

    def unitary(self, j: int) -> StructuredUnitary:
        mask = self.code.masks()[j]
        return StructuredUnitary(self.n, (HadamardMask(self.n, mask),)) if mask else identity(self.n)

    def unitaries(self) -> list[StructuredUnitary]:
        return [self.unitary(j) for j in range(self.r)]

    def measurement_unitaries(self) -> list[StructuredUnitary]:
        # masks are self-inverse
        return self.unitaries()


def build_hadamard_family(code: BinaryCode) -> HadamardFamily:
    return HadamardFamily(code)


def mask_overlap_bound(distance: int) -> float:
    """``max |<x|H^{v+v'}|y>|`` for masks at Hamming distance ``distance``."""
    return 2.0 ** (-distance / 2)


def build_mub_family(kind: str, n: int, r: int | None = None):
    """Convenience builder used by the command line.

    ``hadamard`` uses the Hadamard code of length ``2**ceil(log2 n)``, punctured
    to ``n`` coordinates when ``n`` is not a power of two; ``r`` defaults to the
    full code and values up to twice that switch to the augmented code.
    ``galois`` defaults to ``r = 2**n + 1``.
    """
    if kind == "galois":
        return build_galois_mub_tables(n, (1 << n) + 1 if r is None else r)
    if kind == "hadamard":
        if n < 2:
            raise ValueError(f"hadamard masks need n >= 2, got {n}")
        inner = (n - 1).bit_length()
        if r is None or r <= 1 << inner:
            code = build_binary_code("hadamard", inner_bits=inner)
        elif r <= 2 << inner:
            code = build_binary_code("augmented_hadamard", inner_bits=inner)
        else:
            raise ValueError(f"no built-in mask code with {r} words of length {n}")
        words = code.codewords[: r if r is not None else len(code.codewords), :n]
        if len({w.tobytes() for w in words}) != len(words):
            raise ValueError(f"punctured mask code has repeated words for n={n}, r={r}")
        kind_name = code.kind if n == code.length else f"punctured_{code.kind}"
        return build_hadamard_family(BinaryCode(n, words, minimum_distance(words), kind_name))
    raise ValueError(f"unknown MUB kind {kind!r}")
