"""Concrete permutation condensers and extractors over binary fields."""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from ..gf2x import FieldContext, field_context
from .base import Contract, PermutationFamily, join_bits, lift, split_bits


def lhl_extract(ctx: FieldContext, y: int, x: int) -> int:
    """Field product ``x * y``; its top bits are the extracted output."""
    if y == 0:
        raise ValueError("seed zero excluded")
    return ctx.mul(x, y)


def lhl_bound(n: int, k: float, m: int) -> float:
    """Seeded TV bound ``2**((m - k)/2 - 1) + 2**-n`` for nonzero seeds."""
    return min(1.0, 2.0 ** ((m - k) / 2 - 1) + 2.0 ** (-n))


class LeftoverHashFamily(PermutationFamily):
    """``x -> x * y`` in GF(2^width) for every nonzero seed ``y``."""

    name = "lhl"

    def __init__(self, width: int, out_bits: int):
        if not 0 <= out_bits <= width:
            raise ValueError(f"out_bits must lie in [0, {width}], got {out_bits}")
        self.width = width
        self.out_bits = out_bits
        self.ctx = field_context(width)
        self._inverses = None

    @property
    def num_seeds(self):
        return (1 << self.width) - 1

    @property
    def seeds(self):
        return list(range(1, 1 << self.width))

    def forward(self, xs, seed):
        self._check_seed(seed)
        return self.ctx.mul_array(xs, seed + 1)

    def inverse(self, zs, seed):
        self._check_seed(seed)
        return self.ctx.mul_array(zs, self.ctx.inv(seed + 1))

    def contract(self, k=None):
        k = self.width if k is None else k
        m = self.out_bits
        return Contract(self.width, k, lhl_bound(self.width, k, m), m, m)


def _gf_matrix_inverse(ctx: FieldContext, matrix: list[list[int]]) -> list[list[int]]:
    size = len(matrix)
    aug = [list(row) + [int(i == j) for j in range(size)] for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next(r for r in range(col, size) if aug[r][col])
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = ctx.inv(aug[col][col])
        aug[col] = [ctx.mul(scale, v) for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [v ^ ctx.mul(factor, p) for v, p in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


def _gf_matvec(ctx: FieldContext, matrix: list[list[int]], columns: np.ndarray) -> np.ndarray:
    """Multiply each row vector in ``columns`` (shape ``(N, size)``) by ``matrix``."""
    out = np.zeros_like(columns)
    for i, row in enumerate(matrix):
        acc = np.zeros(columns.shape[0], dtype=np.int64)
        for j, coeff in enumerate(row):
            if coeff:
                acc ^= ctx.mul_array(columns[:, j], coeff)
        out[:, i] = acc
    return out


def rs_points(ctx: FieldContext, y: int, count: int) -> list[int]:
    """Evaluation points ``y, y*g, ..., y*g**(count-1)`` for the field generator ``g``."""
    points = [y]
    for _ in range(count - 1):
        points.append(ctx.mul(points[-1], ctx.generator))
    return points


def rs_condense(ctx: FieldContext, n: int, ell: int, y: int, coeffs) -> tuple[list[int], list[int]]:
    """Evaluate the degree ``< n`` polynomial ``coeffs`` at ``y g^i``, ``i < n``.

    Returns the first ``ell`` evaluations (condensed part) and the remaining
    ``n - ell`` (residual).
    """
    if y == 0:
        raise ValueError("seed zero excluded")
    if len(coeffs) != n:
        raise ValueError(f"expected {n} coefficients, got {len(coeffs)}")
    if n > ctx.order - 1:
        raise ValueError(f"need n <= {ctx.order - 1} distinct evaluation points, got n={n}")
    if not 0 <= ell <= n:
        raise ValueError(f"ell must lie in [0, {n}], got {ell}")
    values = []
    for p in rs_points(ctx, y, n):
        acc = 0
        for c in reversed(coeffs):
            acc = ctx.mul(acc, p) ^ c
        values.append(acc)
    return values[:ell], values[ell:]


class ReedSolomonCondenser(PermutationFamily):
    """Reed-Solomon condenser on ``n_elems`` symbols of ``t`` bits.

    Symbol 0 occupies the top ``t`` bits; inputs are coefficient vectors and
    outputs are evaluation vectors, the first ``keep`` of which are condensed.
    """

    name = "rs"

    def __init__(self, t: int, n_elems: int, keep: int, alpha: float | None = None):
        self.ctx = field_context(t)
        if n_elems > self.ctx.order - 1:
            raise ValueError(f"need n_elems <= {self.ctx.order - 1}, got {n_elems}")
        if not 0 <= keep <= n_elems:
            raise ValueError(f"keep must lie in [0, {n_elems}], got {keep}")
        self.t = t
        self.n_elems = n_elems
        self.keep = keep
        self.alpha = alpha
        self.width = t * n_elems
        self.out_bits = t * keep
        self._tables = {}

    @property
    def num_seeds(self):
        return self.ctx.order - 1

    @property
    def seeds(self):
        return list(range(1, self.ctx.order))

    def _matrices(self, seed):
        if seed not in self._tables:
            pts = rs_points(self.ctx, seed + 1, self.n_elems)
            vander = [[self.ctx.pow(p, j) for j in range(self.n_elems)] for p in pts]
            self._tables[seed] = (vander, _gf_matrix_inverse(self.ctx, vander))
        return self._tables[seed]

    def _unpack(self, values):
        values = np.asarray(values, dtype=np.int64)
        shifts = self.t * np.arange(self.n_elems - 1, -1, -1)
        return (values[:, None] >> shifts) & (self.ctx.order - 1)

    def _pack(self, symbols):
        shifts = self.t * np.arange(self.n_elems - 1, -1, -1)
        return np.bitwise_or.reduce(symbols << shifts, axis=1)

    def forward(self, xs, seed):
        self._check_seed(seed)
        vander, _ = self._matrices(seed)
        return self._pack(_gf_matvec(self.ctx, vander, self._unpack(np.atleast_1d(xs))))

    def inverse(self, zs, seed):
        self._check_seed(seed)
        _, inv = self._matrices(seed)
        return self._pack(_gf_matvec(self.ctx, inv, self._unpack(np.atleast_1d(zs))))

    def declared_eps(self, alpha: float) -> float:
        return 24 * self.n_elems ** 2 * 2.0 ** (-alpha * self.t)

    def contract(self, k=None):
        alpha = self.alpha if self.alpha is not None else 1.0
        k_in = (self.keep + 1) * self.t
        eps = min(1.0, self.declared_eps(alpha)) if k is None or k >= k_in else 1.0
        return Contract(self.width, k_in, eps, self.out_bits, (1 - alpha) * self.out_bits - 4, True)


class ComposedCondenser(PermutationFamily):
    """Run ``inner`` on the condensed part of ``outer``.

    Output layout: inner condensed, inner residual, outer residual.  Seeds are
    pairs ``(outer, inner)`` in lexicographic order.
    """

    def __init__(self, outer: PermutationFamily, inner: PermutationFamily):
        if inner.width != outer.out_bits:
            raise ValueError(
                f"width mismatch: inner family reads {inner.width} bits, outer condenses to {outer.out_bits}"
            )
        self.outer = outer
        self.inner = inner
        self.width = outer.width
        self.out_bits = inner.out_bits
        self.name = f"compose({outer.name},{inner.name})"

    @property
    def num_seeds(self):
        return self.outer.num_seeds * self.inner.num_seeds

    @property
    def seeds(self):
        return list(product(self.outer.seeds, self.inner.seeds))

    def _split_seed(self, seed):
        self._check_seed(seed)
        return divmod(seed, self.inner.num_seeds)

    def forward(self, xs, seed):
        s1, s2 = self._split_seed(seed)
        cond, resid = split_bits(self.outer.forward(xs, s1), self.width, self.outer.out_bits)
        return join_bits(self.inner.forward(cond, s2), resid, self.width - self.outer.out_bits)

    def inverse(self, zs, seed):
        s1, s2 = self._split_seed(seed)
        head, resid = split_bits(np.asarray(zs, dtype=np.int64), self.width, self.inner.width)
        return self.outer.inverse(join_bits(self.inner.inverse(head, s2), resid, self.width - self.inner.width), s1)

    def contract(self, k=None):
        c1 = self.outer.contract(k)
        c2 = self.inner.contract(c1.k_out)
        return Contract(c1.n_in, c1.k_in, c1.eps + c2.eps, c2.n_out, c2.k_out, c1.empirical or c2.empirical)


def compose_condensers(outer: PermutationFamily, inner: PermutationFamily) -> ComposedCondenser:
    return ComposedCondenser(outer, inner)


class ChainedExtractor(PermutationFamily):
    """Extract with ``first``, then run ``second`` on the top of its residual.

    Output layout: first extracted, second extracted, second residual.
    """

    def __init__(self, first: PermutationFamily, second: PermutationFamily):
        rest = first.width - first.out_bits
        self.first = first
        self.second = lift(second, rest)
        self.width = first.width
        self.out_bits = first.out_bits + second.out_bits
        self.name = f"chain({first.name},{second.name})"

    @property
    def num_seeds(self):
        return self.first.num_seeds * self.second.num_seeds

    @property
    def seeds(self):
        return list(product(self.first.seeds, self.second.seeds))

    def forward(self, xs, seed):
        self._check_seed(seed)
        s1, s2 = divmod(seed, self.second.num_seeds)
        ext, resid = split_bits(self.first.forward(xs, s1), self.width, self.first.out_bits)
        return join_bits(ext, self.second.forward(resid, s2), self.second.width)

    def inverse(self, zs, seed):
        self._check_seed(seed)
        s1, s2 = divmod(seed, self.second.num_seeds)
        ext, resid = split_bits(np.asarray(zs, dtype=np.int64), self.width, self.first.out_bits)
        return self.first.inverse(join_bits(ext, self.second.inverse(resid, s2), self.second.width), s1)

    def contract(self, k=None):
        c1 = self.first.contract(k)
        k_rest = c1.k_in - self.first.out_bits - 1
        c2 = self.second.contract(k_rest)
        # residual entropy holds up to 2 eps1 on top of the first extraction error
        return Contract(self.width, c1.k_in, 3 * c1.eps + c2.eps, self.out_bits, self.out_bits, True)


class SharedSeedBlockHash(PermutationFamily):
    """Hash ``blocks`` contiguous blocks with one shared field multiplier.

    Block 0 is the leftmost.  Output layout: the extracted parts of all blocks
    in order, then all residual parts in order.
    """

    def __init__(self, block_bits: int, blocks: int, out_per_block: int):
        self.hash = LeftoverHashFamily(block_bits, out_per_block)
        self.block_bits = block_bits
        self.blocks = blocks
        self.width = block_bits * blocks
        self.out_bits = out_per_block * blocks
        self.name = "blockhash"

    @property
    def num_seeds(self):
        return self.hash.num_seeds

    @property
    def seeds(self):
        return self.hash.seeds

    def _apply(self, values, seed, fn):
        b, m = self.block_bits, self.hash.out_bits
        values = np.asarray(values, dtype=np.int64)
        heads, tails = [], []
        for i in range(self.blocks):
            block = (values >> (b * (self.blocks - 1 - i))) & ((1 << b) - 1)
            head, tail = split_bits(fn(block, seed), b, m)
            heads.append(head)
            tails.append(tail)
        out = np.zeros_like(values)
        for head in heads:
            out = (out << m) | head
        for tail in tails:
            out = (out << (b - m)) | tail
        return out

    def forward(self, xs, seed):
        return self._apply(xs, seed, self.hash.forward)

    def inverse(self, zs, seed):
        b, m = self.block_bits, self.hash.out_bits
        zs = np.asarray(zs, dtype=np.int64)
        heads, tails = split_bits(zs, self.width, self.out_bits)
        out = np.zeros_like(zs)
        for i in range(self.blocks):
            head = (heads >> (m * (self.blocks - 1 - i))) & ((1 << m) - 1)
            tail = (tails >> ((b - m) * (self.blocks - 1 - i))) & ((1 << (b - m)) - 1)
            out = (out << b) | self.hash.inverse(join_bits(head, tail, b - m), seed)
        return out

    def contract(self, k=None):
        c = self.hash.contract(None if k is None else k / self.blocks)
        return Contract(self.width, c.k_in * self.blocks, self.blocks * c.eps, self.out_bits, self.out_bits, True)


def build_block_extractor(t: int, n_elems: int, keep: int, blocks: int, out_per_block: int) -> ComposedCondenser:
    """Reed-Solomon condenser followed by a shared-seed hash on equal blocks."""
    condensed = t * keep
    if condensed % blocks:
        raise ValueError(f"condensed width {condensed} does not split into {blocks} equal blocks")
    rs = ReedSolomonCondenser(t, n_elems, keep, alpha=1.0 / (4 * blocks))
    return ComposedCondenser(rs, SharedSeedBlockHash(condensed // blocks, blocks, out_per_block))


class SeededRecursionStep(PermutationFamily):
    """Condense, then let a hash of the first half seed ``inner`` on the second half.

    The hash output that served as a seed stays in the residual, so the map is
    invertible.  Output layout: inner output, hash output, condenser residual.
    Seeds are pairs (condenser seed, hash seed).
    """

    def __init__(self, condenser: PermutationFamily, seed_hash: PermutationFamily, inner: PermutationFamily):
        half = condenser.out_bits - seed_hash.width
        if half < inner.width:
            raise ValueError(f"second half has {half} bits, inner family needs {inner.width}")
        self.condenser = condenser
        self.seed_hash = seed_hash
        self.inner = lift(inner, half)
        self.half = half
        self.width = condenser.width
        self.out_bits = inner.out_bits
        self.name = f"step({condenser.name},{seed_hash.name},{inner.name})"

    @property
    def num_seeds(self):
        return self.condenser.num_seeds * self.seed_hash.num_seeds

    @property
    def seeds(self):
        return list(product(self.condenser.seeds, self.seed_hash.seeds))

    def forward(self, xs, seed):
        self._check_seed(seed)
        s_cond, s_hash = divmod(seed, self.seed_hash.num_seeds)
        cond, resid = split_bits(self.condenser.forward(xs, s_cond), self.width, self.condenser.out_bits)
        first, second = split_bits(cond, self.condenser.out_bits, self.seed_hash.width)
        hashed = self.seed_hash.forward(first, s_hash)
        derived = (hashed >> (self.seed_hash.width - self.seed_hash.out_bits)) % self.inner.num_seeds
        inner_out = np.empty_like(second)
        for s in np.unique(derived):
            sel = derived == s
            inner_out[sel] = self.inner.forward(second[sel], int(s))
        out = join_bits(inner_out, hashed, self.seed_hash.width)
        return join_bits(out, resid, self.width - self.condenser.out_bits)

    def inverse(self, zs, seed):
        self._check_seed(seed)
        s_cond, s_hash = divmod(seed, self.seed_hash.num_seeds)
        cond, resid = split_bits(np.asarray(zs, dtype=np.int64), self.width, self.condenser.out_bits)
        inner_out, hashed = split_bits(cond, self.condenser.out_bits, self.half)
        derived = (hashed >> (self.seed_hash.width - self.seed_hash.out_bits)) % self.inner.num_seeds
        second = np.empty_like(inner_out)
        for s in np.unique(derived):
            sel = derived == s
            second[sel] = self.inner.inverse(inner_out[sel], int(s))
        first = self.seed_hash.inverse(hashed, s_hash)
        cond = join_bits(first, second, self.half)
        return self.condenser.inverse(join_bits(cond, resid, self.width - self.condenser.out_bits), s_cond)

    def contract(self, k=None):
        c1 = self.condenser.contract(k)
        c2 = self.seed_hash.contract(c1.k_out / 2)
        c3 = self.inner.contract(c1.k_out / 2)
        eps = c1.eps + c2.eps + c3.eps
        return Contract(self.width, c1.k_in, eps, self.out_bits, self.out_bits, True)


def desk_step(width: int, t: int, keep: int, out_bits: int) -> PermutationFamily:
    """One desk-scale recursion step on the top ``t * (width // t)`` bits."""
    n_elems = min(width // t, (1 << t) - 1)
    if keep > n_elems or keep * t < 2:
        raise ValueError(f"cannot keep {keep} of {n_elems} symbols of {t} bits")
    cond = ReedSolomonCondenser(t, n_elems, keep, alpha=1.0 / 200)
    first = (keep * t) // 2
    second = keep * t - first
    if not 1 <= out_bits <= second:
        raise ValueError(f"out_bits must lie in [1, {second}], got {out_bits}")
    step = SeededRecursionStep(cond, LeftoverHashFamily(first, first), LeftoverHashFamily(second, out_bits))
    return lift(step, width)


def log2_ceil(value: float) -> int:
    return math.ceil(math.log2(value))
