"""Recursive permutation extractor: parameter-level and desk-scale builders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .base import Contract, PermutationFamily
from .families import ChainedExtractor, desk_step

SMALL_INPUT_LIMIT = 2 * 10**6


@dataclass(frozen=True)
class CondenserSpec:
    """Parameter-only description of a construction too large to evaluate."""

    kind: str
    n: int
    k: float
    eps: float
    output_bits: int
    seed_bits: float
    params: dict = field(default_factory=dict)
    children: tuple = ()

    @property
    def contract(self) -> Contract:
        return Contract(self.n, self.k, self.eps, self.output_bits, self.output_bits)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "k": float(self.k),
            "eps": float(self.eps),
            "output_bits": self.output_bits,
            "seed_bits": float(self.seed_bits),
            "params": dict(self.params),
            "children": [c.as_dict() for c in self.children],
        }


def symbol_bits(n: int, eps: float, alpha_inv: float) -> int:
    """``ceil(alpha_inv * log(24 n^2 / eps))``."""
    return math.ceil(alpha_inv * math.log2(24 * n**2 / eps))


def recursion_seed_bound(n: int, eps: float) -> int:
    """Seed-length bound ``200 * ceil(200 log(24 n^2 / eps))`` of the recursive extractor."""
    return 200 * symbol_bits(n, eps, 200)


def block_extractor_spec(n: int, k: float, eps: float, s: int) -> CondenserSpec:
    """Reed-Solomon condenser plus ``2s`` hashed blocks, largest ``ell`` with ``2 ell t <= k``."""
    t = math.ceil(8 * s * math.log2(24 * n**2 * (4 * s + 1) / eps))
    ell = int(k // (2 * t))
    if ell < 1:
        raise ValueError(f"min-entropy k={k} is below 2t={2 * t} needed by the block extractor")
    rs = CondenserSpec(
        "rs", n, 2 * ell * t, eps / (4 * s + 1), (2 * ell - 1) * t, t,
        {"t": t, "alpha": 1 / (8 * s), "keep_symbols": 2 * ell - 1},
    )
    lhl = CondenserSpec(
        "lhl", (2 * ell - 1) * t, 0, 2 * s * eps / (4 * s + 1), ell * t, (2 * ell * t) / s,
        {"blocks": 2 * s},
    )
    return CondenserSpec(
        "block", n, k, eps, ell * t, (2 * ell * t) / s + t,
        {"s": s, "t": t, "ell": ell}, (rs, lhl),
    )


def minimum_entropy(n: int, eps: float) -> int:
    if n <= SMALL_INPUT_LIMIT:
        return 2 * math.ceil(8 * 200 * math.log2(24 * n**2 * 801 / eps))
    return recursion_seed_bound(n, eps)


def recursive_spec(n: int, k: float, eps: float) -> CondenserSpec:
    """Extractor of ``floor(k/4)`` bits with seed at most the recursion seed bound."""
    kmin = minimum_entropy(n, eps)
    if not kmin <= k <= n:
        raise ValueError(
            f"min-entropy k={k} outside the supported range k in [c log(n/eps), n] = [{kmin}, {n}]"
        )
    bound = recursion_seed_bound(n, eps)
    if n <= SMALL_INPUT_LIMIT:
        base = block_extractor_spec(n, k, eps, 200)
        return CondenserSpec(
            "recursive", n, k, eps, base.output_bits, base.seed_bits,
            {"branch": "base", "seed_bound": bound}, (base,),
        )
    eps0 = eps / 20
    d0 = 200 * symbol_bits(n, eps0, 200)
    # level i with 2^i * 8d <= k < 2^(i+1) * 8d, where d is the seed bound
    level = max(-1, int(math.floor(math.log2(k / (8 * bound)))))
    q_seed = d0 / 8
    q_out = int(2.0**level * d0)
    q = CondenserSpec("q", n, 2.0**level * 4.5 * d0, 5 * eps0, q_out, q_seed, {"alpha": 1 / 200})
    return CondenserSpec(
        "recursive", n, k, eps, int(k // 4), 4 * q_seed,
        {"branch": "induction", "level": level, "seed_bound": bound, "applications": 4}, (q, q, q, q),
    )


def top_spec(n: int, k: float, eps: float, delta: float) -> CondenserSpec:
    """Repeated recursive extraction until a ``1 - delta`` fraction of ``k`` is out."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rounds = math.ceil(math.log(1 / delta) / math.log(4 / 3))
    stage_eps = eps / rounds
    children = []
    remaining = k
    extracted = 0
    for _ in range(rounds):
        if remaining < minimum_entropy(n, stage_eps):
            break
        child = recursive_spec(n, remaining, stage_eps)
        children.append(child)
        extracted += child.output_bits
        remaining = k - extracted - len(children)
    if not children:
        recursive_spec(n, k, stage_eps)  # raises with the range message
    return CondenserSpec(
        "top", n, k, eps, extracted, sum(c.seed_bits for c in children),
        {"delta": delta, "rounds_planned": rounds, "rounds_used": len(children)}, tuple(children),
    )


@dataclass(frozen=True)
class DeskConstants:
    """Hand-picked constants for a small, exhaustively checkable instance.

    Attributes
    ----------
    t : int
        Symbol size of the Reed-Solomon condensers.
    keep : int
        Condensed symbols per step.
    step_out : int
        Bits extracted by each step.
    repeats : int
        Steps chained on successive residuals.
    """

    t: int = 3
    keep: int = 2
    step_out: int = 2
    repeats: int = 2


class DeskExtractor(PermutationFamily):
    """Chain of desk recursion steps carrying an empirical contract."""

    name = "desk-guv"

    def __init__(self, n: int, k: float, eps: float, constants: DeskConstants):
        steps = []
        width = n
        for _ in range(constants.repeats):
            steps.append(desk_step(width, constants.t, constants.keep, constants.step_out))
            width -= constants.step_out
        chain = steps[-1]
        for step in reversed(steps[:-1]):
            chain = ChainedExtractor(step, chain)
        self.chain = chain
        self.constants = constants
        self.k = k
        self.eps = eps
        self.width = n
        self.out_bits = chain.out_bits

    @property
    def num_seeds(self):
        return self.chain.num_seeds

    @property
    def seeds(self):
        return self.chain.seeds

    def forward(self, xs, seed):
        return self.chain.forward(xs, seed)

    def inverse(self, zs, seed):
        return self.chain.inverse(zs, seed)

    def contract(self, k=None):
        return Contract(self.width, self.k if k is None else k, self.eps, self.out_bits, self.out_bits, True)


def build_guv_extractor(n: int, k: float, eps: float, preset: str = "paper", constants: DeskConstants | None = None):
    """Build the recursive permutation extractor.

    Parameters
    ----------
    n, k, eps : input length, source min-entropy and target error.
    preset : {"paper", "desk"}
        ``paper`` returns a :class:`CondenserSpec` with the proven constants
        (parameters only).  ``desk`` returns an evaluable
        :class:`PermutationFamily` built from ``constants``, with an empirical
        contract.
    """
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if preset == "paper":
        return recursive_spec(n, k, eps)
    if preset == "desk":
        if constants is None:
            raise ValueError("desk preset requires explicit constants")
        kmin = constants.step_out * constants.repeats
        if not kmin <= k <= n:
            raise ValueError(
                f"min-entropy k={k} outside the supported range k in [c log(n/eps), n] = [{kmin}, {n}]"
            )
        return DeskExtractor(n, k, eps, constants)
    raise ValueError(f"unknown preset {preset!r}")
