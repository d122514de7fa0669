"""Statevector simulation for structured unitaries.

States are complex numpy arrays of shape ``(..., 2**n)``.  Qubit 0 is the most
significant bit of a basis index, so a split ``(d_A, d_B)`` puts subsystem A on
the leading qubits.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

MAX_HAAR_QUBITS = 14
_PHASES = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True, eq=False)
class HadamardMask:
    """Hadamard gates on the qubits set in ``mask`` (qubit 0 = top bit)."""

    n: int
    mask: int

    def qubits(self) -> list[int]:
        return [q for q in range(self.n) if self.mask >> (self.n - 1 - q) & 1]

    def inverse(self) -> HadamardMask:
        return self


@dataclass(frozen=True, eq=False)
class DiagonalPhase:
    """Diagonal unitary ``diag(i ** exponents)``."""

    n: int
    exponents: np.ndarray

    def inverse(self) -> DiagonalPhase:
        return DiagonalPhase(self.n, (-self.exponents) % 4)


@dataclass(frozen=True, eq=False)
class BasisPermutation:
    """Maps ``|x>`` to ``|forward[x]>``."""

    n: int
    forward: np.ndarray
    inverse_map: np.ndarray | None = None

    def __post_init__(self):
        if self.inverse_map is None:
            inv = np.empty_like(self.forward)
            inv[self.forward] = np.arange(len(self.forward))
            object.__setattr__(self, "inverse_map", inv)

    def inverse(self) -> BasisPermutation:
        return BasisPermutation(self.n, self.inverse_map, self.forward)


Stage = Union[HadamardMask, DiagonalPhase, BasisPermutation]


@dataclass(frozen=True, eq=False)
class StructuredUnitary:
    """Product of stages, applied left to right (first stage acts first)."""

    n: int
    stages: tuple = ()

    @property
    def dim(self) -> int:
        return 1 << self.n

    def apply(self, states: np.ndarray) -> np.ndarray:
        return apply_structured_unitary(self, states)

    def adjoint(self) -> StructuredUnitary:
        return StructuredUnitary(self.n, tuple(s.inverse() for s in reversed(self.stages)))

    def then(self, other: StructuredUnitary) -> StructuredUnitary:
        """The unitary ``other @ self``."""
        if other.n != self.n:
            raise ValueError("dimension mismatch between composed unitaries")
        return StructuredUnitary(self.n, self.stages + other.stages)

    def matrix(self) -> np.ndarray:
        return apply_structured_unitary(self, np.eye(self.dim, dtype=complex)).T


def identity(n: int) -> StructuredUnitary:
    return StructuredUnitary(n, ())


def _apply_mask(stage: HadamardMask, states: np.ndarray) -> np.ndarray:
    qubits = stage.qubits()
    if not qubits:
        return states
    lead = states.shape[:-1]
    out = states.reshape(lead + (2,) * stage.n)
    offset = len(lead)
    for q in qubits:
        axis = offset + q
        a = np.take(out, 0, axis=axis)
        b = np.take(out, 1, axis=axis)
        out = np.stack([a + b, a - b], axis=axis)
    return (out * (2.0 ** (-len(qubits) / 2))).reshape(states.shape)


def apply_stage(stage: Stage, states: np.ndarray) -> np.ndarray:
    if isinstance(stage, HadamardMask):
        return _apply_mask(stage, states)
    if isinstance(stage, DiagonalPhase):
        return states * _PHASES[stage.exponents % 4]
    if isinstance(stage, BasisPermutation):
        return states[..., stage.inverse_map]
    raise TypeError(f"unknown stage {type(stage).__name__}")


def apply_structured_unitary(unitary: StructuredUnitary, states: np.ndarray) -> np.ndarray:
    """Apply ``unitary`` to a state or a batch of states (last axis)."""
    states = np.asarray(states, dtype=complex)
    if states.shape[-1] != unitary.dim:
        raise ValueError(
            f"dimension mismatch: unitary acts on {unitary.dim} amplitudes, state has {states.shape[-1]}"
        )
    for stage in unitary.stages:
        states = apply_stage(stage, states)
    return states


def sample_haar_state(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random pure state(s) on ``n`` qubits from normalised complex Gaussians."""
    if not 0 <= n <= MAX_HAAR_QUBITS:
        raise ValueError(f"n must lie in [0, {MAX_HAAR_QUBITS}], got {n}")
    shape = (1 << n,) if size is None else (size, 1 << n)
    if n == 0:
        # one amplitude: the phase is global, so fix it to 1
        return np.ones(shape, dtype=complex)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def basis_states(n: int) -> np.ndarray:
    return np.eye(1 << n, dtype=complex)


def check_split(dim: int, split: Sequence[int]) -> tuple[int, int]:
    d_a, d_b = (int(v) for v in split)
    if d_a < 1 or d_b < 1 or d_a * d_b != dim or d_a & (d_a - 1) or d_b & (d_b - 1):
        raise ValueError(f"invalid split {tuple(split)} for dimension {dim}")
    return d_a, d_b


def marginal_distribution(states: np.ndarray, split: Sequence[int]) -> np.ndarray:
    """Outcome distribution of measuring subsystem A in the computational basis."""
    states = np.asarray(states)
    d_a, d_b = check_split(states.shape[-1], split)
    probs = np.abs(states) ** 2
    return probs.reshape(states.shape[:-1] + (d_a, d_b)).sum(axis=-1)


def tv_distance(p, q=None) -> np.ndarray:
    """Total variation distance along the last axis; ``q=None`` means uniform."""
    p = np.asarray(p, dtype=float)
    if q is None:
        return 0.5 * np.abs(p - 1.0 / p.shape[-1]).sum(axis=-1)
    return 0.5 * np.abs(p - np.asarray(q, dtype=float)).sum(axis=-1)


def fidelity(p, q=None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.full(p.shape[-1], 1.0 / p.shape[-1]) if q is None else np.asarray(q, dtype=float)
    return np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None)).sum(axis=-1)


def shannon_entropy(p) -> np.ndarray:
    """Shannon entropy in bits along the last axis."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def min_entropy(p) -> np.ndarray:
    return -np.log2(np.asarray(p, dtype=float).max(axis=-1))


def distance_and_entropy(p, q=None) -> dict:
    """TV distance, fidelity, Shannon entropy and min-entropy of ``p``.

    ``q`` defaults to the uniform distribution.  Entropies are in bits.
    Raises ``ArithmeticError`` if ``1 - F <= TV <= sqrt(1 - F**2)`` fails,
    which can only happen when the inputs are not distributions.
    """
    p = np.asarray(p, dtype=float)
    if q is not None and np.shape(q) != p.shape:
        raise ValueError("distributions differ in support size")
    tv = float(tv_distance(p, q))
    fid = float(fidelity(p, q))
    if not 1 - fid - 1e-12 <= tv <= math.sqrt(max(0.0, 1 - fid**2)) + 1e-12:
        raise ArithmeticError(f"fidelity sandwich fails: tv={tv}, fidelity={fid}")
    return {
        "tv": tv,
        "fidelity": fid,
        "shannon": float(shannon_entropy(p)),
        "minentropy": float(min_entropy(p)),
    }


def eta(eps) -> np.ndarray:
    """``-2 eps ln(2 eps)`` with the continuous extension ``eta(0) = 0``."""
    eps = np.asarray(eps, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(eps > 0, -2 * eps * np.log(np.where(eps > 0, 2 * eps, 1.0)), 0.0)
    return out if out.ndim else float(out)


def log2_int(value: int) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError(f"{value} is not a power of two")
    return value.bit_length() - 1


def entropy_floor(tv, d_a: int):
    """``(1 - 2 tv) log d_A - eta(tv)``."""
    return (1 - 2 * np.asarray(tv, dtype=float)) * math.log2(d_a) - eta(tv)
