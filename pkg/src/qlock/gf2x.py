"""Arithmetic in binary extension fields GF(2^m).

Field elements and polynomials over GF(2) are plain Python integers: bit ``i``
holds the coefficient of ``X**i``.  Vectorised multiplication over numpy arrays
uses exp/log tables for fields up to ``2**TABLE_LIMIT`` elements.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cache

import numpy as np

TABLE_LIMIT = 16


def poly_degree(poly: int) -> int:
    """Degree of a GF(2) polynomial, ``-1`` for the zero polynomial."""
    return poly.bit_length() - 1


def poly_mod(a: int, modulus: int) -> int:
    """Remainder of ``a`` divided by ``modulus`` over GF(2)."""
    dm = poly_degree(modulus)
    if dm < 0:
        raise ZeroDivisionError("division by the zero polynomial")
    while a and poly_degree(a) >= dm:
        a ^= modulus << (poly_degree(a) - dm)
    return a


def poly_mul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mulmod(a: int, b: int, modulus: int) -> int:
    dm = poly_degree(modulus)
    out = 0
    a = poly_mod(a, modulus)
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> dm & 1:
            a ^= modulus
    return out


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def is_irreducible(poly: int) -> bool:
    """Ben-Or irreducibility test for a GF(2) polynomial of degree >= 1."""
    m = poly_degree(poly)
    if m < 1:
        return False
    if m == 1:
        return True
    x_power = 0b10
    for _ in range(m // 2):
        x_power = poly_mulmod(x_power, x_power, poly)
        if poly_gcd(poly, x_power ^ 0b10) != 1:
            return False
    return True


@cache
def find_irreducible(m: int) -> int:
    """Lexicographically smallest irreducible polynomial of degree ``m``.

    Candidates are scanned in increasing integer order, so ``m=1`` yields ``X``
    (``0b10``), ``m=2`` yields ``X^2+X+1`` and ``m=3`` yields ``X^3+X+1``.
    """
    if m < 1:
        raise ValueError(f"field degree must be positive, got {m}")
    for candidate in range(1 << m, 1 << (m + 1)):
        if is_irreducible(candidate):
            return candidate
    raise ArithmeticError(f"no irreducible polynomial of degree {m}")  # unreachable


def _prime_factors(value: int) -> list[int]:
    factors = []
    p = 2
    while p * p <= value:
        if value % p == 0:
            factors.append(p)
            while value % p == 0:
                value //= p
        p += 1
    if value > 1:
        factors.append(value)
    return factors


@dataclass(frozen=True)
class FieldContext:
    """Immutable description of GF(2^m) with a fixed modulus and generator.

    Attributes
    ----------
    m : int
        Extension degree.
    modulus : int
        Irreducible polynomial of degree ``m``.
    generator : int
        Smallest element of full multiplicative order ``2**m - 1``.
    """

    m: int
    modulus: int
    generator: int
    _tables: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def order(self) -> int:
        return 1 << self.m

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if self._tables is not None:
            if a == 0 or b == 0:
                return 0
            exp, log = self._tables
            return int(exp[(log[a] + log[b]) % (self.order - 1)])
        return poly_mulmod(a, b, self.modulus)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.pow(a, self.order - 2)

    def element_order(self, a: int) -> int:
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        group = self.order - 1
        order = group
        for p in _prime_factors(group):
            while order % p == 0 and self.pow(a, order // p) == 1:
                order //= p
        return order

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product of integer arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._tables is None:
            flat = np.frompyfunc(lambda u, v: poly_mulmod(int(u), int(v), self.modulus), 2, 1)
            return flat(a, b).astype(np.int64)
        exp, log = self._tables
        out = exp[(log[a] + log[b]) % (self.order - 1)]
        return np.where((a == 0) | (b == 0), 0, out)


@cache
def field_context(m: int, modulus: int | None = None) -> FieldContext:
    """Build (and cache) the field GF(2^m)."""
    if modulus is None:
        modulus = find_irreducible(m)
    if poly_degree(modulus) != m or not is_irreducible(modulus):
        raise ValueError(f"modulus {modulus:#b} is not irreducible of degree {m}")
    tables = None
    if m <= TABLE_LIMIT:
        size = 1 << m
        # find the generator by direct arithmetic, then tabulate its powers
        probe = FieldContext(m, modulus, 1)
        generator = 1 if size == 2 else next(
            g for g in range(2, size) if probe.element_order(g) == size - 1
        )
        exp = np.zeros(size, dtype=np.int64)
        log = np.zeros(size, dtype=np.int64)
        value = 1
        for i in range(size - 1):
            exp[i] = value
            log[value] = i
            value = poly_mulmod(value, generator, modulus)
        tables = (exp, log)
        return FieldContext(m, modulus, generator, tables)
    probe = FieldContext(m, modulus, 1)
    generator = next(g for g in range(2, 1 << m) if probe.element_order(g) == (1 << m) - 1)
    return FieldContext(m, modulus, generator)


def field_ops(ctx: FieldContext, op: str, a: int, b: int | None = None) -> int:
    """Dispatch a named field operation: ``add``, ``mul``, ``inv`` or ``pow``."""
    if op == "add":
        return ctx.add(a, b)
    if op == "mul":
        return ctx.mul(a, b)
    if op == "inv":
        return ctx.inv(a)
    if op == "pow":
        return ctx.pow(a, b)
    raise ValueError(f"unknown field operation {op!r}")


def poly_eval(ctx: FieldContext, coeffs: Sequence[int], point: int) -> int:
    """Evaluate ``sum(coeffs[i] * point**i)`` by Horner's rule."""
    acc = 0
    for c in reversed(coeffs):
        acc = ctx.mul(acc, point) ^ c
    return acc


def poly_interpolate(ctx: FieldContext, points: Sequence[int], values: Sequence[int]) -> list[int]:
    """Lagrange interpolation; returns ``len(points)`` coefficients, low degree first."""
    if len(points) != len(values):
        raise ValueError("points and values differ in length")
    if len(set(points)) != len(points):
        raise ValueError("evaluation points not distinct")
    size = len(points)
    coeffs = [0] * size
    for i, (xi, yi) in enumerate(zip(points, values)):
        basis = [1]
        denom = 1
        for j, xj in enumerate(points):
            if j == i:
                continue
            # multiply basis by (T + xj); characteristic two
            basis = [0] + basis
            for d in range(len(basis) - 1):
                basis[d] ^= ctx.mul(basis[d + 1], xj)
            denom = ctx.mul(denom, xi ^ xj)
        scale = ctx.mul(yi, ctx.inv(denom))
        for d, b in enumerate(basis):
            coeffs[d] ^= ctx.mul(scale, b)
    return coeffs


def poly_eval_interpolate(ctx: FieldContext, coeffs: Sequence[int], points: Sequence[int]) -> tuple[list[int], list[int]]:
    """Evaluate ``coeffs`` at ``points`` and interpolate back.

    Returns the evaluations and the recovered coefficients.
    """
    if len(set(points)) != len(points):
        raise ValueError("evaluation points not distinct")
    values = [poly_eval(ctx, coeffs, x) for x in points]
    return values, poly_interpolate(ctx, points, values)
