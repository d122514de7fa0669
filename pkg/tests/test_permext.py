import math

import numpy as np
import pytest

from qlock.gf2x import field_context, poly_interpolate
from qlock.permext import (
    ChainedExtractor,
    DeskConstants,
    IdentityFamily,
    LeftoverHashFamily,
    ReedSolomonCondenser,
    SharedSeedBlockHash,
    build_block_extractor,
    build_guv_extractor,
    check_bijective,
    compose_condensers,
    desk_step,
    eval_extractor_tv,
    lhl_bound,
    lhl_extract,
    nested_flat_sources,
    prefix_source,
    random_flat_source,
    recursion_seed_bound,
    rs_condense,
    top_spec,
)
from qlock.permext.evaluate import FlatSource
from qlock.permext.families import rs_points


def brute_tv_and_residual(family, support, seed):
    """Joint statistics for one seed by plain dictionary counting."""
    m = family.out_bits
    counts = {}
    for x in support.tolist():
        z = int(family.forward(np.array([x]), seed)[0])
        counts[z >> (family.width - m)] = counts.get(z >> (family.width - m), 0) + 1
    probs = [counts.get(e, 0) / len(support) for e in range(1 << m)]
    tv = 0.5 * sum(abs(p - 2.0**-m) for p in probs)
    return tv, counts


def test_rs_condense_example():
    gf8 = field_context(3, 0b1011)
    assert rs_condense(gf8, 2, 1, 1, [0, 1]) == ([0b001], [0b010])


def test_rs_constant_polynomial():
    gf16 = field_context(4)
    cond, resid = rs_condense(gf16, 3, 1, 5, [7, 0, 0])
    assert cond + resid == [7, 7, 7]


def test_rs_round_trip_by_interpolation():
    gf16 = field_context(4)
    rng = np.random.default_rng(0)
    for _ in range(500):
        coeffs = [int(c) for c in rng.integers(0, 16, 3)]
        y = int(rng.integers(1, 16))
        cond, resid = rs_condense(gf16, 3, 2, y, coeffs)
        assert poly_interpolate(gf16, rs_points(gf16, y, 3), cond + resid) == coeffs


def test_rs_seed_zero():
    with pytest.raises(ValueError, match="seed zero excluded"):
        rs_condense(field_context(3), 2, 1, 0, [0, 1])


def test_lhl_examples():
    gf4 = field_context(2)
    assert [lhl_extract(gf4, 0b10, x) for x in range(4)] == [0, 0b10, 0b11, 0b01]
    assert [lhl_extract(gf4, 1, x) for x in range(4)] == [0, 1, 2, 3]
    with pytest.raises(ValueError, match="seed zero excluded"):
        lhl_extract(gf4, 0, 1)


def test_lhl_gf8_every_seed_bijective():
    gf8 = field_context(3)
    for y in range(1, 8):
        assert sorted(lhl_extract(gf8, y, x) for x in range(8)) == list(range(8))


@pytest.mark.parametrize(
    "family",
    [
        LeftoverHashFamily(10, 3),
        ReedSolomonCondenser(4, 3, 2),
        SharedSeedBlockHash(3, 4, 1),
        build_block_extractor(3, 4, 2, 2, 1),
        compose_condensers(ReedSolomonCondenser(3, 4, 2), LeftoverHashFamily(6, 2)),
        ChainedExtractor(LeftoverHashFamily(8, 2), LeftoverHashFamily(6, 2)),
        desk_step(12, 3, 2, 2),
    ],
    ids=["lhl", "rs", "block_hash", "block_extractor", "composed", "chained", "desk_step"],
)
def test_families_are_bijective(family):
    report = check_bijective(family)
    assert report["bijective"], report["failures"][:3]
    assert report["seeds_checked"] == family.num_seeds


def test_composition_seed_count_and_identity():
    inner = LeftoverHashFamily(6, 2)
    outer = ReedSolomonCondenser(3, 4, 2)
    composed = compose_condensers(outer, inner)
    assert composed.num_seeds == outer.num_seeds * inner.num_seeds
    trivial = compose_condensers(IdentityFamily(6), inner)
    xs = np.arange(64)
    for s in range(inner.num_seeds):
        assert np.array_equal(trivial.forward(xs, s), inner.forward(xs, s))


def test_composition_width_mismatch():
    with pytest.raises(ValueError, match="width mismatch"):
        compose_condensers(ReedSolomonCondenser(3, 4, 2), LeftoverHashFamily(5, 2))


def test_composition_error_subadditive():
    outer = ReedSolomonCondenser(3, 4, 2)
    inner = LeftoverHashFamily(6, 2)
    composed = compose_condensers(outer, inner)
    uniform_inner = eval_extractor_tv(inner, prefix_source(6, 6)).tv_joint
    rng = np.random.default_rng(1)
    for k in (4, 6, 8, 10):
        source = random_flat_source(12, k, rng)
        tv_composed = eval_extractor_tv(composed, source).tv_joint
        tv_outer = eval_extractor_tv(outer, source).tv_joint
        assert tv_composed <= tv_outer + uniform_inner + 1e-9


def test_eval_matches_counting_oracle():
    family = LeftoverHashFamily(8, 2)
    source = random_flat_source(8, 4, np.random.default_rng(2))
    tvs, worst = [], math.inf
    for seed in range(family.num_seeds):
        tv, counts = brute_tv_and_residual(family, source.support, seed)
        tvs.append(tv)
        kept = [c for c in counts.values() if c / len(source.support) >= 2.0**-3]
        worst = min([worst] + [math.log2(c) for c in kept])
    report = eval_extractor_tv(family, source)
    assert abs(report.tv_joint - np.mean(tvs)) <= 1e-12
    assert report.residual_minentropy == worst


def test_full_support_gives_zero_tv():
    assert eval_extractor_tv(LeftoverHashFamily(10, 4), prefix_source(10, 10)).tv_joint == 0.0


def test_lhl_bound_example_gf16():
    source = random_flat_source(4, 3, np.random.default_rng(3))
    report = eval_extractor_tv(LeftoverHashFamily(4, 1), source)
    assert report.tv_joint <= 2.0 ** ((1 - 3) / 2) / 2 + 2.0**-4


def test_residual_floor_and_excluded_mass():
    rng = np.random.default_rng(4)
    for trial in range(50):
        n = int(rng.integers(6, 13))
        m = int(rng.integers(1, n - 1))
        k = int(rng.integers(m, n + 1))
        report = eval_extractor_tv(LeftoverHashFamily(n, m), random_flat_source(n, k, rng))
        assert report.residual_minentropy >= k - m - 1
        assert report.excluded_mass <= report.tv_joint + 1e-12


def test_tv_monotone_on_nested_sources():
    family = LeftoverHashFamily(10, 3)
    sources = nested_flat_sources(10, np.random.default_rng(5), range(10, 2, -1))
    tvs = [eval_extractor_tv(family, s).tv_joint for s in sources]
    assert all(a <= b + 1e-12 for a, b in zip(tvs, tvs[1:]))


def test_exact_mode_size_guard():
    with pytest.raises(ValueError, match="exact evaluation"):
        eval_extractor_tv(LeftoverHashFamily(14, 2), prefix_source(14, 14))


def test_sampled_mode():
    family = LeftoverHashFamily(14, 2)
    report = eval_extractor_tv(family, prefix_source(14, 14), exact=False, rng=np.random.default_rng(6), seed_samples=16)
    assert report.tv_joint == 0.0 and not report.exact
    with pytest.raises(ValueError):
        eval_extractor_tv(family, prefix_source(14, 14), exact=False)


def test_source_width_mismatch():
    with pytest.raises(ValueError):
        eval_extractor_tv(LeftoverHashFamily(6, 2), FlatSource(5, np.arange(4)))


def test_paper_preset_seed_bound():
    n, eps = 10**6, 0.01
    spec = build_guv_extractor(n, n // 2, eps, "paper")
    assert spec.seed_bits <= recursion_seed_bound(n, eps) == 200 * math.ceil(200 * math.log2(24 * n**2 / eps))
    assert spec.contract.eps <= eps + 1e-15


def test_paper_preset_range_error():
    with pytest.raises(ValueError, match=r"k in \[c log\(n/eps\), n\]"):
        build_guv_extractor(10**6, 1000, 0.01, "paper")


def test_top_spec_rounds():
    spec = top_spec(10**6, 5 * 10**5, 0.01, 0.5)
    assert spec.kind == "top"
    assert spec.params["rounds_planned"] == math.ceil(math.log(2) / math.log(4 / 3))
    assert 1 <= spec.params["rounds_used"] <= spec.params["rounds_planned"]
    assert sum(c.eps for c in spec.children) <= 0.01 + 1e-15


def test_desk_preset():
    constants = DeskConstants(t=3, keep=2, step_out=2, repeats=2)
    family = build_guv_extractor(12, 12, 0.1, "desk", constants)
    assert family.width == 12 and family.out_bits == 4
    assert family.contract(12).empirical
    with pytest.raises(ValueError, match="explicit constants"):
        build_guv_extractor(12, 12, 0.1, "desk")
    with pytest.raises(ValueError):
        build_guv_extractor(12, 2, 0.1, "desk", constants)
    with pytest.raises(ValueError):
        build_guv_extractor(12, 12, 0.7, "desk", constants)


def test_contract_declared_bound():
    contract = LeftoverHashFamily(12, 4).contract(8)
    assert contract.eps == lhl_bound(12, 8, 4)
    assert contract.as_dict()["n_out"] == 4
