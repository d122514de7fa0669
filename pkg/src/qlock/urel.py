"""Metric uncertainty relations: assembly, composition and evaluation."""

from __future__ import annotations

import math
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .mub import build_mub_family
from .permext import LeftoverHashFamily, PermutationFamily
from .qsim import (
    BasisPermutation,
    DiagonalPhase,
    HadamardMask,
    StructuredUnitary,
    apply_stage,
    basis_states,
    check_split,
    entropy_floor,
    min_entropy,
    shannon_entropy,
)

PROVENANCES = ("galois_mub", "hadamard_mub", "ur_key_opt", "ur_composed", "custom")


def worker_count() -> int:
    """Thread cap from ``QLOCK_THREADS`` (default 1)."""
    raw = os.environ.get("QLOCK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class UnitaryFamily:
    """Unitaries ``U_0 .. U_{t-1}`` on ``n`` qubits with a split ``(d_A, d_B)``."""

    n: int
    members: tuple
    split: tuple
    provenance: str = "custom"
    declared_eps: float | None = None

    def __post_init__(self):
        if not self.members:
            raise ValueError("a family needs at least one member")
        if any(u.n != self.n for u in self.members):
            raise ValueError("all members must act on the same number of qubits")
        check_split(1 << self.n, self.split)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance.startswith("ur_") and self.t & (self.t - 1):
            raise ValueError(f"family size {self.t} is not a power of two")

    @property
    def t(self) -> int:
        return len(self.members)

    @property
    def d_a(self) -> int:
        return int(self.split[0])

    @property
    def d_b(self) -> int:
        return int(self.split[1])

    @property
    def dim(self) -> int:
        return 1 << self.n


def pad_to_power_of_two(members: Sequence[StructuredUnitary]) -> tuple:
    members = tuple(members)
    target = 1 << (len(members) - 1).bit_length()
    return members + members[: target - len(members)]


def build_metric_ur(
    n: int,
    out_bits: int,
    mub_kind: str = "hadamard",
    r: int | None = None,
    extractor: PermutationFamily | None = None,
    mubs=None,
    epsilon: float | None = None,
) -> UnitaryFamily:
    """Products ``P_y V_j`` of basis changes and extractor permutations.

    Parameters
    ----------
    n : int
        Number of qubits.
    out_bits : int
        Extracted bits, so ``d_A = 2**out_bits``.
    mub_kind : {"hadamard", "galois"}
        Basis family used when ``mubs`` is not given.
    r : int, optional
        Number of bases; when omitted and ``epsilon`` is given, ``ceil(2/epsilon**2)``.
    extractor : PermutationFamily, optional
        Defaults to the field-multiplication hash on ``n`` bits.

    Returns
    -------
    UnitaryFamily
        Members in ``(j, y)`` lexicographic order, padded by repetition to a
        power of two.
    """
    if r is None and epsilon is not None:
        r = math.ceil(2 / epsilon**2)
    if mubs is None:
        mubs = build_mub_family(mub_kind, n, r)
    if extractor is None:
        extractor = LeftoverHashFamily(n, out_bits)
    if mubs.n != n or extractor.width != n:
        raise ValueError(f"width mismatch: bases on {mubs.n} qubits, extractor on {extractor.width} bits, n={n}")
    if extractor.out_bits != out_bits:
        raise ValueError(f"extractor outputs {extractor.out_bits} bits, expected {out_bits}")
    perms = [BasisPermutation(n, extractor.permutation(s)) for s in range(extractor.num_seeds)]
    members = [
        StructuredUnitary(n, v.stages + (p,)) for v in mubs.measurement_unitaries() for p in perms
    ]
    return UnitaryFamily(n, pad_to_power_of_two(members), (1 << out_bits, 1 << (n - out_bits)), "ur_key_opt")


class _StageLifter:
    """Embeds stages into a larger register, sharing lifted objects."""

    def __init__(self, n_total: int, low_qubits: int, high_dim: int):
        self.n = n_total
        self.low = low_qubits
        self.high_dim = high_dim
        self.cache: dict[int, object] = {}

    def __call__(self, stage):
        key = id(stage)
        if key not in self.cache:
            self.cache[key] = (stage, self._lift(stage))
        return self.cache[key][1]

    def _lift(self, stage):
        raise NotImplementedError


class _LowLifter(_StageLifter):
    """Act on the low qubits, identity on the leading ``high_dim`` block."""

    def _lift(self, stage):
        if isinstance(stage, HadamardMask):
            return HadamardMask(self.n, stage.mask)
        if isinstance(stage, DiagonalPhase):
            return DiagonalPhase(self.n, np.tile(stage.exponents, self.high_dim))
        low_dim = 1 << self.low
        base = np.arange(self.high_dim)[:, None] * low_dim
        return BasisPermutation(self.n, (base + stage.forward[None, :]).ravel())


class _HighLifter(_StageLifter):
    """Act on the leading qubits, identity on the ``low`` trailing qubits."""

    def _lift(self, stage):
        low_dim = 1 << self.low
        if isinstance(stage, HadamardMask):
            return HadamardMask(self.n, stage.mask << self.low)
        if isinstance(stage, DiagonalPhase):
            return DiagonalPhase(self.n, np.repeat(stage.exponents, low_dim))
        fwd = stage.forward[:, None] * low_dim + np.arange(low_dim)[None, :]
        return BasisPermutation(self.n, fwd.ravel())


def _reorder_permutation(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Basis permutation that reorders tensor factors ``dims`` into ``order``."""
    total = int(np.prod(dims))
    idx = np.arange(total).reshape(tuple(dims))
    moved = np.transpose(idx, order).ravel()
    forward = np.empty(total, dtype=np.int64)
    forward[moved] = np.arange(total)
    return forward


def compose_metric_ur(first: UnitaryFamily, second: UnitaryFamily, mode: str = "sequential") -> UnitaryFamily:
    """Compose two families.

    ``sequential``: ``second`` acts on the B system of ``first`` and the result
    has A system ``A_1 A_2``.  ``parallel``: ``U_1 (x) U_2`` on disjoint
    registers, reordered so that ``A_1 A_2`` lead.  Members are enumerated in
    ``(k_1, k_2)`` order.
    """
    eps1, eps2 = first.declared_eps, second.declared_eps
    if mode == "sequential":
        if second.dim != first.d_b:
            raise ValueError(
                f"geometry mismatch: second family acts on dimension {second.dim}, first B system is {first.d_b}"
            )
        lifter = _LowLifter(first.n, second.n, first.d_a)
        members = [
            StructuredUnitary(first.n, u1.stages + tuple(lifter(s) for s in u2.stages))
            for u1 in first.members
            for u2 in second.members
        ]
        split = (first.d_a * second.d_a, second.d_b)
        declared = None if eps1 is None or eps2 is None else eps1 + eps2
        n = first.n
    elif mode == "parallel":
        n = first.n + second.n
        high = _HighLifter(n, second.n, 1)
        low = _LowLifter(n, second.n, first.dim)
        reorder = BasisPermutation(
            n, _reorder_permutation((first.d_a, first.d_b, second.d_a, second.d_b), (0, 2, 1, 3))
        )
        members = [
            StructuredUnitary(
                n, tuple(high(s) for s in u1.stages) + tuple(low(s) for s in u2.stages) + (reorder,)
            )
            for u1 in first.members
            for u2 in second.members
        ]
        split = (first.d_a * second.d_a, first.d_b * second.d_b)
        declared = None if eps1 is None or eps2 is None else eps1 + eps2
    else:
        raise ValueError(f"unknown composition mode {mode!r}")
    provenance = "ur_composed" if len(members) & (len(members) - 1) == 0 else "custom"
    return UnitaryFamily(n, tuple(members), split, provenance, declared)


def _split_trailing_permutations(unitary: StructuredUnitary):
    stages = unitary.stages
    cut = len(stages)
    while cut and isinstance(stages[cut - 1], BasisPermutation):
        cut -= 1
    forward = np.arange(unitary.dim)
    for stage in stages[cut:]:
        forward = stage.forward[forward]
    return stages[:cut], forward


def member_outcomes(family: UnitaryFamily, states: np.ndarray):
    """Yield ``(k, marginal, entropy)`` per member in order.

    ``marginal`` has shape ``(S, d_A)`` and ``entropy`` is the Shannon entropy
    of the full outcome distribution of each state.  Members sharing every
    stage but their trailing permutations reuse one amplitude computation,
    since a permutation only relabels outcomes.
    """
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    if states.shape[-1] != family.dim:
        raise ValueError(f"states have dimension {states.shape[-1]}, family acts on {family.dim}")
    groups: dict[tuple, list] = {}
    for k, u in enumerate(family.members):
        prefix, forward = _split_trailing_permutations(u)
        groups.setdefault(tuple(id(s) for s in prefix), [prefix, []])[1].append((k, id(u), forward))

    def run(group):
        prefix, members = group
        amps = states
        for stage in prefix:
            amps = apply_stage(stage, amps)
        probs = np.abs(amps) ** 2
        entropy = shannon_entropy(probs)
        out = []
        seen = {}
        onehot = np.zeros((family.dim, family.d_a))
        rows = np.arange(family.dim)
        for k, key, forward in members:
            # padded families repeat members; their outcomes are identical
            if key not in seen:
                onehot[:] = 0.0
                onehot[rows, forward // family.d_b] = 1.0
                seen[key] = probs @ onehot
            out.append((k, seen[key], entropy))
        return out

    workers = worker_count()
    ordered = list(groups.values())
    if workers > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, ordered))
    else:
        results = map(run, ordered)
    for chunk in results:
        yield from chunk


@dataclass(frozen=True)
class UrEvalReport:
    """Empirical metric-uncertainty statistics over a set of states.

    ``eps_hat`` is the worst tested average TV, hence an empirical lower bound
    on the family's true error.
    """

    states_tested: int
    sampling: str
    avg_tv_per_state: np.ndarray
    eps_hat: float
    mean_tv: float
    entropy_bound: float
    avg_entropy_per_state: np.ndarray
    avg_marginal_entropy_per_state: np.ndarray
    entropy_floor_per_state: np.ndarray
    entropy_violations: int
    mean_marginals: np.ndarray = field(repr=False)


def eval_metric_ur(family: UnitaryFamily, states: np.ndarray, sampling: str = "supplied") -> UrEvalReport:
    """Average TV of the A marginal from uniform, per state, over all members."""
    states = np.atleast_2d(states)
    count = len(states)
    tv_sum = np.zeros(count)
    ent_sum = np.zeros(count)
    marg_ent_sum = np.zeros(count)
    marg_sum = np.zeros((count, family.d_a))
    uniform = 1.0 / family.d_a
    for _, marginal, entropy in member_outcomes(family, states):
        tv_sum += 0.5 * np.abs(marginal - uniform).sum(axis=1)
        ent_sum += entropy
        marg_ent_sum += shannon_entropy(marginal)
        marg_sum += marginal
    t = family.t
    avg_tv = tv_sum / t
    avg_ent = ent_sum / t
    floors = entropy_floor(avg_tv, family.d_a)
    eps_hat = float(avg_tv.max())
    return UrEvalReport(
        states_tested=count,
        sampling=sampling,
        avg_tv_per_state=avg_tv,
        eps_hat=eps_hat,
        mean_tv=float(avg_tv.mean()),
        entropy_bound=float(entropy_floor(eps_hat, family.d_a)),
        avg_entropy_per_state=avg_ent,
        avg_marginal_entropy_per_state=marg_ent_sum / t,
        entropy_floor_per_state=floors,
        entropy_violations=int(np.count_nonzero(avg_ent < floors - 1e-12)),
        mean_marginals=marg_sum / t,
    )


def adversarial_states(family: UnitaryFamily, labels: Sequence[int] = (0,)) -> np.ndarray:
    """``V^dagger |x>`` for every distinct non-permutation prefix ``V`` of the members."""
    seen = {}
    for u in family.members:
        prefix, _ = _split_trailing_permutations(u)
        seen.setdefault(tuple(id(s) for s in prefix), prefix)
    rows = []
    eye = basis_states(family.n)
    for prefix in seen.values():
        inverse = StructuredUnitary(family.n, tuple(s.inverse() for s in reversed(prefix)))
        rows.append(inverse.apply(eye[list(labels)]))
    return np.vstack(rows)


def state_set(family: UnitaryFamily, haar: np.ndarray | None = None, basis: bool = True, adversarial: bool = True):
    """Concatenate Haar samples, all basis states and adversarial states."""
    parts, names = [], []
    if haar is not None and len(haar):
        parts.append(np.atleast_2d(haar))
        names.append(f"haar({len(parts[-1])})")
    if basis:
        parts.append(basis_states(family.n))
        names.append("basis")
    if adversarial:
        parts.append(adversarial_states(family))
        names.append(f"adversarial({len(parts[-1])})")
    return np.vstack(parts), "+".join(names)


@dataclass(frozen=True)
class MinEntropyWitness:
    """Smoothed distributions certifying min-entropy for most bases.

    Attributes
    ----------
    q : ndarray, shape (r, d)
        Distributions ``q_j`` close to the measured ``p_j``.
    weights : ndarray, shape (r,)
        Heavy mass ``w_j`` removed from block ``j``.
    excluded : tuple
        Indices ``j`` with ``w_j > eps``.
    heavy : ndarray
        Flattened indices ``j d + x`` of the heaviest entries.
    """

    q: np.ndarray
    weights: np.ndarray
    excluded: tuple
    heavy: np.ndarray
    tv: np.ndarray
    minentropy: np.ndarray
    floor: float
    heavy_mass: float
    heavy_mass_bound: float
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def minentropy_relation_check(unitaries: Sequence[StructuredUnitary], psi: np.ndarray, eps: float, gamma: float) -> MinEntropyWitness:
    """Build the heavy-entry witness for the first ``ceil(2/eps**2)`` bases."""
    r = math.ceil(2 / eps**2)
    if len(unitaries) < r:
        raise ValueError(f"need {r} bases for eps={eps}, got {len(unitaries)}")
    n = unitaries[0].n
    d = 1 << n
    probs = np.stack([np.abs(u.apply(psi)) ** 2 for u in unitaries[:r]])
    heavy_size = max(1, int(math.floor(d ** (gamma / 2) + 1e-9)))
    flat = probs.ravel()
    heavy = np.argsort(-flat, kind="stable")[:heavy_size]
    mask = np.zeros(flat.shape, dtype=bool)
    mask[heavy] = True
    mask = mask.reshape(r, d)
    weights = np.where(mask, probs, 0.0).sum(axis=1)
    q = np.where(mask, 0.0, probs) + weights[:, None] / d
    tv = 0.5 * np.abs(probs - q).sum(axis=1)
    hmin = min_entropy(q)
    floor = gamma * n / 2 - math.log2(8 / eps**2)
    excluded = tuple(int(j) for j in np.flatnonzero(weights > eps))
    keep = np.setdiff1d(np.arange(r), excluded)
    heavy_mass = float(flat[heavy].sum())
    bound = 1 + heavy_size / d ** (gamma / 2)
    checks = {
        "q_normalised": bool(np.allclose(q.sum(axis=1), 1.0, atol=1e-12)),
        "tv_at_most_weight": bool(np.all(tv <= weights + 1e-12)),
        "tv_at_most_eps": bool(np.all(tv[keep] <= eps + 1e-12)),
        "minentropy_floor": bool(np.all(hmin[keep] >= floor - 1e-12)),
        "excluded_at_most_eps_r": len(excluded) <= eps * r + 1e-12,
        "excluded_at_most_2_over_eps": len(excluded) <= 2 / eps + 1e-12,
        "heavy_mass_bound": heavy_mass <= bound + 1e-12,
    }
    return MinEntropyWitness(q, weights, excluded, heavy, tv, hmin, floor, heavy_mass, bound, checks)


def expected_fidelity(d_a: int, d_b: int, field: str = "complex") -> tuple[float, float]:
    """Mean fidelity of the A marginal of a random pure state with uniform.

    Each block weight ``|phi_a|^2`` is Beta distributed, so the mean of
    ``sum_a sqrt(p_a / d_A)`` is ``sqrt(d_A) E[sqrt(X)]``.  For ``field="complex"``
    (Haar states) ``X ~ Beta(d_B, d - d_B)``; ``field="real"`` gives the real
    sphere, ``X ~ Beta(d_B/2, (d - d_B)/2)``.

    Returns
    -------
    value, lower : float
        The closed form and the lower bound ``sqrt(1 - 1/d_B)``.
    """
    if d_a < 1 or d_b < 1:
        raise ValueError(f"dimensions must be positive, got ({d_a}, {d_b})")
    if field not in ("complex", "real"):
        raise ValueError(f"field must be 'complex' or 'real', got {field!r}")
    scale = 1.0 if field == "complex" else 0.5
    block, total = scale * d_b, scale * d_a * d_b
    log_value = (
        0.5 * math.log(d_a)
        + gammaln(block + 0.5)
        - gammaln(block)
        + gammaln(total)
        - gammaln(total + 0.5)
    )
    return float(math.exp(log_value)), math.sqrt(1 - 1 / d_b)


def fidelity_monte_carlo(
    d_a: int, d_b: int, samples: int, rng: np.random.Generator, batch: int = 20000, field: str = "complex"
):
    """Sample mean and standard error of the marginal fidelity with uniform."""
    d = d_a * d_b
    values = []
    remaining = samples
    while remaining:
        size = min(batch, remaining)
        z = rng.standard_normal((size, d))
        if field == "complex":
            z = z + 1j * rng.standard_normal((size, d))
        probs = np.abs(z) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        marg = probs.reshape(size, d_a, d_b).sum(axis=2)
        values.append(np.sqrt(marg).sum(axis=1) / math.sqrt(d_a))
        remaining -= size
    values = np.concatenate(values)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def gram_schmidt_bound(delta: float, index: int) -> float:
    """Deviation bound ``delta * sqrt(32 (i - 1))`` for the 1-based index ``i``."""
    return delta * math.sqrt(32 * (index - 1))


@dataclass(frozen=True)
class GramSchmidtResult:
    basis: np.ndarray
    deviations: np.ndarray
    bounds: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max())


def gram_schmidt_orthonormalize(vectors, delta: float) -> GramSchmidtResult:
    """Classical Gram-Schmidt on nearly orthogonal unit vectors.

    Requires pairwise inner products at most ``delta <= 1/(16 r)``; each output
    vector then stays within ``delta * sqrt(32 (i - 1))`` of its input.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=complex))
    r = len(vecs)
    if not np.allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-9):
        raise ValueError("input vectors must be unit vectors")
    if delta > 1 / (16 * r) + 1e-15:
        raise ValueError(f"inner products exceed δ: δ={delta} is above 1/(16r)={1 / (16 * r)}")
    gram = vecs.conj() @ vecs.T
    off = np.abs(gram - np.diag(np.diag(gram)))
    if off.max(initial=0.0) > delta + 1e-12:
        raise ValueError(f"inner products exceed δ: max {off.max():.3g} > {delta}")
    basis = np.empty_like(vecs)
    for i, v in enumerate(vecs):
        u = v - basis[:i].T @ (basis[:i].conj() @ v) if i else v.copy()
        basis[i] = u / np.linalg.norm(u)
    deviations = np.linalg.norm(basis - vecs, axis=1)
    bounds = np.array([gram_schmidt_bound(delta, i + 1) for i in range(r)])
    if np.any(deviations > bounds + 1e-12):
        raise ArithmeticError("Gram-Schmidt deviation exceeds its guaranteed bound")
    return GramSchmidtResult(basis, deviations, bounds)


def random_near_orthonormal(dim: int, count: int, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors whose largest pairwise overlap is just below ``delta``.

    A random orthonormal frame is perturbed by Gaussian noise whose scale is
    bisected until the maximal overlap sits in ``[delta / 2, delta]``.
    """
    if count > dim:
        raise ValueError(f"cannot fit {count} vectors in dimension {dim}")
    g = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    frame = np.linalg.qr(g)[0].T
    noise = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    noise /= np.linalg.norm(noise, axis=1, keepdims=True)

    def perturbed(scale):
        v = frame + scale * noise
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        gram = np.abs(v.conj() @ v.T)
        np.fill_diagonal(gram, 0.0)
        return v, gram.max(initial=0.0)

    lo, hi = 0.0, delta
    best, _ = perturbed(0.0)
    for _ in range(40):
        mid = (lo + hi) / 2
        v, top = perturbed(mid)
        if top <= delta:
            best, lo = v, mid
            if top >= delta / 2:
                break
        else:
            hi = mid
    return best


def overlap_bound(t: int, d_b: int, n: int, gamma: float) -> float:
    return 2 * math.sqrt(32) * (t * d_b) ** 2 * 2.0 ** (-gamma * n)


def projector_overlap(
    unitaries: Sequence[StructuredUnitary], split, y: int, x: int, k0: int, b0: int, gamma: float
) -> float:
    """Squared projection of ``U_{k0}^dagger |x>|b0>`` onto ``span{U_k^dagger |y>|b>}``."""
    t = len(unitaries)
    n = unitaries[0].n
    d = 1 << n
    d_a, d_b = check_split(d, split)
    if d ** (-gamma / 2) > 1 / (16 * t * d_b) + 1e-15:
        raise ValueError(
            f"hypothesis d^(-gamma/2) <= 1/(16 t d_B) violated: {d ** (-gamma / 2):.4g} > {1 / (16 * t * d_b):.4g}"
        )
    if not (0 <= x < d_a and 0 <= y < d_a and 0 <= b0 < d_b and 0 <= k0 < t):
        raise ValueError("label out of range")
    eye = np.eye(d, dtype=complex)
    span = np.vstack([u.adjoint().apply(eye[y * d_b : (y + 1) * d_b]) for u in unitaries])
    basis = gram_schmidt_orthonormalize(span, d ** (-gamma / 2)).basis
    query = unitaries[k0].adjoint().apply(eye[x * d_b + b0])
    overlap = float(np.sum(np.abs(basis.conj() @ query) ** 2))
    if x != y and overlap > overlap_bound(t, d_b, n, gamma) + 1e-12:
        raise ArithmeticError("projector overlap exceeds its guaranteed bound")
    return overlap
