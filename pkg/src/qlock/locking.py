"""Locking classical messages with a metric uncertainty relation, and attacks on it."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .qsim import BasisPermutation, DiagonalPhase, StructuredUnitary, log2_int
from .urel import UnitaryFamily, member_outcomes

MODES = ("padded", "onetime_pad_b")
SKIP_BELOW = 1e-12
POVM_TOL = 1e-9
LEAK_TOL = 1e-9


@dataclass(frozen=True)
class LockingScheme:
    """Encrypt ``x`` as ``U_k^dagger |x>|b>`` with ``b`` uniform.

    In ``onetime_pad_b`` mode the message is the whole ``(x, b)`` string and
    ``b`` is masked with extra key bits, so there are ``t * d_B`` keys.
    """

    family: UnitaryFamily
    mode: str = "padded"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def message_count(self) -> int:
        return self.family.d_a if self.mode == "padded" else self.family.dim

    @property
    def key_count(self) -> int:
        return self.family.t if self.mode == "padded" else self.family.t * self.family.d_b

    @property
    def message_bits(self) -> int:
        return log2_int(self.message_count)

    def _split_key(self, key: int) -> tuple[int, int]:
        return (key, 0) if self.mode == "padded" else divmod(key, self.family.d_b)


def lock_encode(scheme: LockingScheme, x: int, key: int, b: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Ciphertext state for message ``x`` under ``key``.

    ``b`` is the padding register in ``padded`` mode (drawn from ``rng`` when
    omitted); in ``onetime_pad_b`` mode it must be ``None``.
    """
    fam = scheme.family
    if not 0 <= x < scheme.message_count:
        raise ValueError(f"message {x} out of range [0, {scheme.message_count})")
    if not 0 <= key < scheme.key_count:
        raise ValueError(f"key {key} out of range [0, {scheme.key_count})")
    k, pad = scheme._split_key(key)
    if scheme.mode == "padded":
        if b is None and fam.d_b == 1:
            b = 0
        elif b is None:
            if rng is None:
                raise ValueError("fresh randomness needs an rng")
            b = int(rng.integers(fam.d_b))
        if not 0 <= b < fam.d_b:
            raise ValueError(f"randomness {b} out of range [0, {fam.d_b})")
        index = x * fam.d_b + b
    else:
        if b is not None:
            raise ValueError("onetime_pad_b mode takes b as part of the message")
        a, b_msg = divmod(x, fam.d_b)
        index = a * fam.d_b + (b_msg ^ pad)
    state = np.zeros(fam.dim, dtype=complex)
    state[index] = 1.0
    return fam.members[k].adjoint().apply(state)


def lock_decode(scheme: LockingScheme, ciphertext: np.ndarray, key: int) -> int:
    """Undo ``U_k`` and read the message; raises if the outcome is not deterministic."""
    fam = scheme.family
    if not 0 <= key < scheme.key_count:
        raise ValueError(f"key {key} out of range [0, {scheme.key_count})")
    k, pad = scheme._split_key(key)
    probs = np.abs(fam.members[k].apply(ciphertext)) ** 2
    if scheme.mode == "padded":
        marginal = probs.reshape(fam.d_a, fam.d_b).sum(axis=1)
        x = int(np.argmax(marginal))
        if 1 - marginal[x] > LEAK_TOL:
            raise ValueError("ciphertext/key mismatch")
        return x
    index = int(np.argmax(probs))
    if 1 - probs[index] > LEAK_TOL:
        raise ValueError("ciphertext/key mismatch")
    a, b = divmod(index, fam.d_b)
    return a * fam.d_b + (b ^ pad)


@dataclass(frozen=True)
class Povm:
    """POVM with rank-one components ``weights[c] |vectors[c]><vectors[c]|``.

    Component ``c`` contributes to outcome ``outcome_of[c]``.
    """

    vectors: np.ndarray
    weights: np.ndarray
    outcome_of: np.ndarray
    description: str

    @property
    def outcomes(self) -> int:
        return int(self.outcome_of.max()) + 1

    def element_sum(self) -> np.ndarray:
        v = self.vectors
        return (v.T * self.weights) @ v.conj()

    def validate(self, dim: int) -> None:
        if self.vectors.shape[1] != dim:
            raise ValueError(f"POVM acts on dimension {self.vectors.shape[1]}, ciphertext has {dim}")
        if np.any(self.weights < -POVM_TOL):
            raise ValueError("invalid POVM: negative element")
        gap = np.abs(self.element_sum() - np.eye(dim)).max()
        if gap > POVM_TOL:
            raise ValueError(f"invalid POVM: elements sum to identity only within {gap:.3g}")


def computational_povm(dim: int) -> Povm:
    return Povm(np.eye(dim, dtype=complex), np.ones(dim), np.arange(dim), "computational")


def basis_povm(basis: np.ndarray, description: str) -> Povm:
    """Projective measurement onto the rows of ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    return Povm(basis, np.ones(len(basis)), np.arange(len(basis)), description)


def random_rank1_povm(dim: int, count: int, rng: np.random.Generator) -> Povm:
    """``count`` random rank-one elements, made complete by ``S^{-1/2}`` whitening."""
    if count < dim:
        raise ValueError(f"need at least {dim} outcomes, got {count}")
    g = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    frame = g.T @ g.conj()
    vals, vecs = np.linalg.eigh(frame)
    whiten = (vecs / np.sqrt(vals)) @ vecs.conj().T
    e = (whiten @ g.T).T
    norms = np.linalg.norm(e, axis=1)
    return Povm(e / norms[:, None], norms**2, np.arange(count), f"random_rank1({count})")


def key_guess_povm(scheme: LockingScheme, key: int = 0) -> Povm:
    """Measure in the basis ``U_k^dagger |x>|b>`` of one guessed key."""
    k, _ = scheme._split_key(key)
    basis = scheme.family.members[k].adjoint().apply(np.eye(scheme.dim, dtype=complex))
    return basis_povm(basis, f"key_guess({key})")


def supplied_povm(elements: Sequence[np.ndarray], description: str = "supplied") -> Povm:
    """Decompose supplied POVM matrices into rank-one components."""
    vectors, weights, owners = [], [], []
    for i, element in enumerate(elements):
        element = np.asarray(element, dtype=complex)
        if np.abs(element - element.conj().T).max() > POVM_TOL:
            raise ValueError("invalid POVM: element is not Hermitian")
        vals, vecs = np.linalg.eigh(element)
        if vals.min() < -POVM_TOL:
            raise ValueError("invalid POVM: element is not positive")
        for val, vec in zip(vals, vecs.T):
            if val > 1e-15:
                vectors.append(vec)
                weights.append(val)
                owners.append(i)
    if not vectors:
        raise ValueError("invalid POVM: all elements vanish")
    return Povm(np.array(vectors), np.array(weights), np.array(owners), description)


def uniform_prior(scheme: LockingScheme) -> np.ndarray:
    return np.full(scheme.message_count, 1.0 / scheme.message_count)


def flat_prior(scheme: LockingScheme, ell: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform prior on a random subset of ``2**ell`` messages."""
    if not 0 <= ell <= scheme.message_bits:
        raise ValueError(f"ell must lie in [0, {scheme.message_bits}], got {ell}")
    prior = np.zeros(scheme.message_count)
    prior[rng.choice(scheme.message_count, size=1 << ell, replace=False)] = 2.0**-ell
    return prior


def component_likelihoods(scheme: LockingScheme, vectors: np.ndarray, joint_key: bool = False) -> np.ndarray:
    """``Pr[component c | message]`` without the POVM weights.

    Shape ``(C, messages)``, or ``(C, messages, t)`` when ``joint_key`` keeps the
    family index separate.
    """
    fam = scheme.family
    rows = np.zeros((len(vectors), fam.d_a, fam.t)) if joint_key else np.zeros((len(vectors), fam.d_a))
    for k, marginal, _ in member_outcomes(fam, vectors):
        if joint_key:
            rows[:, :, k] = marginal
        else:
            rows += marginal
    rows /= fam.d_b * (1 if joint_key else fam.t)
    if scheme.mode == "onetime_pad_b":
        # b is one-time padded: the likelihood does not depend on it
        rows = np.repeat(rows, fam.d_b, axis=1) / fam.d_b
        if joint_key:
            rows = np.repeat(rows, fam.d_b, axis=2) / fam.d_b
    return rows


@dataclass(frozen=True)
class AttackReport:
    """Posterior statistics of one measurement against a prior."""

    description: str
    outcome_probs: np.ndarray
    posterior_tv: np.ndarray
    worst_tv: float
    average_tv: float
    mutual_information: float
    skipped_outcomes: int
    posteriors: np.ndarray = field(repr=False)


def mutual_information(joint: np.ndarray) -> float:
    """Mutual information in bits of a joint table ``p(x, i)``."""
    px = joint.sum(axis=1, keepdims=True)
    pi = joint.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log2(joint / (px * pi)), 0.0)
    return max(0.0, float(terms.sum()))


def outcome_likelihoods(scheme: LockingScheme, povm: Povm) -> np.ndarray:
    """``Pr[outcome | message]`` of shape ``(outcomes, messages)``."""
    povm.validate(scheme.dim)
    comp = component_likelihoods(scheme, povm.vectors) * povm.weights[:, None]
    likelihood = np.zeros((povm.outcomes, scheme.message_count))
    np.add.at(likelihood, povm.outcome_of, comp)
    return likelihood


def adversary_posterior(
    scheme: LockingScheme, prior: np.ndarray | str, povm: Povm, likelihood: np.ndarray | None = None
) -> AttackReport:
    """Exact Bayesian posteriors of the message given each measurement outcome.

    ``likelihood`` may carry a precomputed :func:`outcome_likelihoods` table so
    that several priors can be tested against one measurement cheaply.
    """
    prior = uniform_prior(scheme) if isinstance(prior, str) and prior == "uniform" else np.asarray(prior, float)
    if prior.shape != (scheme.message_count,) or abs(prior.sum() - 1) > 1e-9 or prior.min() < 0:
        raise ValueError("prior must be a distribution over the messages")
    if likelihood is None:
        likelihood = outcome_likelihoods(scheme, povm)
    elif likelihood.shape != (povm.outcomes, scheme.message_count):
        raise ValueError(f"likelihood table has shape {likelihood.shape}, expected {(povm.outcomes, scheme.message_count)}")
    joint = (likelihood * prior[None, :]).T  # (x, i)
    p_out = joint.sum(axis=0)
    kept = p_out >= SKIP_BELOW
    posteriors = joint[:, kept] / p_out[kept]
    tvs = 0.5 * np.abs(posteriors - prior[:, None]).sum(axis=0)
    return AttackReport(
        description=povm.description,
        outcome_probs=p_out,
        posterior_tv=tvs,
        worst_tv=float(tvs.max()),
        average_tv=float((tvs * p_out[kept]).sum() / p_out[kept].sum()),
        mutual_information=mutual_information(joint),
        skipped_outcomes=int(np.count_nonzero(~kept)),
        posteriors=posteriors.T,
    )


def locking_bound(eps: float, ell: int, message_bits: int) -> float:
    """Leakage bound ``2 eps / (2**(ell - n) - eps)``; infinite when vacuous."""
    gap = 2.0 ** (ell - message_bits) - eps
    return math.inf if gap <= 0 else 2 * eps / gap


def information_bound(eps: float, message_bits: int) -> float:
    """Accessible-information bound ``2 eps n + eta(eps)``."""
    from .qsim import eta

    return 2 * eps * message_bits + float(eta(eps))


def _unitary_from_params(theta: np.ndarray, dim: int) -> np.ndarray:
    h = np.zeros((dim, dim), dtype=complex)
    iu = np.triu_indices(dim, 1)
    n_off = len(iu[0])
    h[np.diag_indices(dim)] = theta[:dim]
    h[iu] = theta[dim : dim + n_off] + 1j * theta[dim + n_off :]
    h = h + np.triu(h, 1).conj().T
    return expm(1j * h)


def accessible_info_search(
    scheme: LockingScheme,
    prior: np.ndarray | str = "uniform",
    restarts: int = 64,
    max_sweeps: int = 60,
    rng: np.random.Generator | None = None,
    target: str = "message",
) -> dict:
    """Hill-climb over orthonormal measurement bases to maximise mutual information.

    ``target="message"`` scores ``I(X; I)``; ``"message_and_key"`` scores
    ``I(XK; I)`` with a uniform key.  Restart 0 starts at the computational
    basis, the next ones at the key bases, the rest at random bases.  The
    result is a lower bound on the accessible information.
    """
    dim = scheme.dim
    if dim > 1 << 10:
        raise ValueError(f"ciphertext dimension {dim} exceeds 2^10")
    if target not in ("message", "message_and_key"):
        raise ValueError(f"unknown target {target!r}")
    rng = np.random.default_rng(0) if rng is None else rng
    prior = uniform_prior(scheme) if isinstance(prior, str) else np.asarray(prior, float)
    fam = scheme.family
    joint_key = target == "message_and_key"
    if joint_key and scheme.mode != "padded":
        raise ValueError("joint key target is defined for padded schemes")
    key_prior = np.full(fam.t, 1.0 / fam.t)

    def score(basis: np.ndarray) -> float:
        like = component_likelihoods(scheme, basis, joint_key)
        if joint_key:
            joint = like * prior[None, :, None] * key_prior[None, None, :]
            return mutual_information(joint.reshape(len(basis), -1).T)
        return mutual_information((like * prior[None, :]).T)

    starts = [np.eye(dim, dtype=complex)]
    starts += [u.adjoint().apply(np.eye(dim, dtype=complex)) for u in fam.members[: max(0, restarts - 1)]]
    n_params = dim * dim
    best_value, best_basis = -1.0, None
    trace = []
    for r in range(restarts):
        origin = starts[r] if r < len(starts) else _unitary_from_params(rng.normal(0, math.pi, n_params), dim).T
        theta = np.zeros(n_params)
        current = score(origin)
        step = 0.5
        for _ in range(max_sweeps):
            improved = False
            for c in rng.permutation(n_params):
                for sign in (1.0, -1.0):
                    trial = theta.copy()
                    trial[c] += sign * step
                    basis = (origin.T @ _unitary_from_params(trial, dim)).T
                    value = score(basis)
                    if value > current + 1e-13:
                        theta, current, improved = trial, value, True
                        break
            if not improved:
                step *= 0.5
                if step < 1e-4:
                    break
        trace.append(current)
        if current > best_value:
            best_value = current
            best_basis = (origin.T @ _unitary_from_params(theta, dim)).T
    return {"best": float(best_value), "per_restart": trace, "basis": best_basis, "lower_bound": True}


def pauli_family(n: int, keys: Sequence[tuple[int, int]]) -> UnitaryFamily:
    """Family whose adjoints are the Paulis ``X^u Z^v``, so encoding gives ``X^u Z^v |x>``."""
    dim = 1 << n
    xs = np.arange(dim)
    members = []
    for u, v in keys:
        parity = np.zeros(dim, dtype=np.int64)
        overlap = xs & v
        for bit in range(n):
            parity ^= (overlap >> bit) & 1
        encode = StructuredUnitary(n, (DiagonalPhase(n, 2 * parity), BasisPermutation(n, xs ^ u)))
        members.append(encode.adjoint())
    return UnitaryFamily(n, tuple(members), (dim, 1), "custom")


def random_pauli_subset(n: int, size: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    picks = rng.choice(1 << (2 * n), size=size, replace=False)
    return [(int(p) >> n, int(p) & ((1 << n) - 1)) for p in picks]


def pauli_locking_bound(n: int, keys: Sequence[tuple[int, int]]) -> dict:
    """Computational-basis attack on Pauli encryption with key set ``keys``."""
    if not 1 <= n <= 10:
        raise ValueError(f"n must lie in [1, 10], got {n}")
    if not keys:
        raise ValueError("key set must be nonempty")
    scheme = LockingScheme(pauli_family(n, keys))
    report = adversary_posterior(scheme, "uniform", computational_povm(1 << n))
    return {
        "tv_lower_bound": 1 - len(keys) / 2**n,
        "measured_tv": report.worst_tv,
        "average_tv": report.average_tv,
        "key_count": len(keys),
    }
