"""Command-line experiments.

Every subcommand builds its objects, measures them against the bound they
are supposed to satisfy and prints one JSON :class:`~qlock.report.ExperimentReport`.
Exit status is 0 when every check passes, 2 when a check is violated and 1
on bad usage.

Examples
--------
::

    qlock ur-eval --n 6 --trials 100 --rng-seed 7
    qlock pauli-check --n 4 --subset-size 4
    qlock gamma-formula --d-a 1 --d-b 4
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .gf2x import field_context, is_irreducible, poly_eval, poly_interpolate, poly_mod
from .locking import (
    LockingScheme,
    adversary_posterior,
    computational_povm,
    flat_prior,
    information_bound,
    key_guess_povm,
    locking_bound,
    outcome_likelihoods,
    pauli_locking_bound,
    random_pauli_subset,
    random_rank1_povm,
)
from .mub import build_mub_family, mask_overlap_bound
from .permext import (
    DeskConstants,
    LeftoverHashFamily,
    build_guv_extractor,
    check_bijective,
    eval_extractor_tv,
    lhl_bound,
    random_flat_source,
    recursion_seed_bound,
)
from .qid import forgetfulness_deficit, quantum_cost
from .qsim import sample_haar_state
from .report import ExperimentReport, rng_stream
from .urel import (
    build_metric_ur,
    eval_metric_ur,
    expected_fidelity,
    fidelity_monte_carlo,
    gram_schmidt_orthonormalize,
    random_near_orthonormal,
    state_set,
)

DESK_CONSTANTS = DeskConstants(t=3, keep=2, step_out=2, repeats=2)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve(value, default):
    return default if value is None else value


def _family_params(args, default_n: int, default_mub: str, bits_divisor: int = 4) -> dict:
    n = _resolve(args.n, default_n)
    kind = _resolve(args.mub, default_mub)
    out_bits = _resolve(args.out_bits, max(1, n // bits_divisor))
    r = args.r
    if r is None and args.epsilon is not None:
        r = math.ceil(2 / args.epsilon**2)
    if r is None and kind == "galois":
        r = 2 * n + 1
    return {"n": n, "mub": kind, "out_bits": out_bits, "r": r}


def _build_family(params: dict):
    if not 1 <= params["n"] <= 12:
        raise UsageError(f"family experiments support 1 <= n <= 12, got {params['n']}")
    return build_metric_ur(params["n"], params["out_bits"], params["mub"], params["r"])


# ---------------------------------------------------------------- experiments


def run_field_check(args, seed):
    n = _resolve(args.n, 8)
    trials = _resolve(args.trials, 200)
    if not 1 <= n <= 16:
        raise UsageError(f"field-check supports 1 <= n <= 16, got {n}")
    ctx = field_context(n)
    # trial division by every polynomial of degree 1..n/2
    divisors = [p for p in range(2, 1 << (n // 2 + 1)) if poly_mod(ctx.modulus, p) == 0]
    rng = rng_stream(seed, 0)
    q = 1 << n
    axiom_failures = 0
    interp_failures = 0
    for _ in range(trials):
        a, b, c = (int(v) for v in rng.integers(0, q, size=3))
        axiom_failures += ctx.mul(a, ctx.mul(b, c)) != ctx.mul(ctx.mul(a, b), c)
        axiom_failures += ctx.mul(a, b ^ c) != ctx.mul(a, b) ^ ctx.mul(a, c)
        if a:
            axiom_failures += ctx.mul(a, ctx.inv(a)) != 1
        size = min(q, 6)
        points = [int(p) for p in rng.choice(q, size=size, replace=False)]
        coeffs = [int(v) for v in rng.integers(0, q, size=size)]
        values = [poly_eval(ctx, coeffs, p) for p in points]
        recovered = poly_interpolate(ctx, points, values)
        interp_failures += list(recovered) + [0] * (size - len(recovered)) != coeffs
    order_ok = ctx.element_order(ctx.generator) == q - 1
    metrics = {
        "modulus": ctx.modulus,
        "generator": ctx.generator,
        "generator_order": ctx.element_order(ctx.generator),
        "irreducible_trial_division": not divisors,
        "irreducible_ben_or": is_irreducible(ctx.modulus),
        "axiom_failures": int(axiom_failures),
        "interpolation_failures": int(interp_failures),
    }
    metrics["violations"] = int(axiom_failures + interp_failures + bool(divisors) + (not order_ok))
    return {"n": n, "trials": trials}, metrics


def run_mub_check(args, seed):
    kind = _resolve(args.mub, "galois")
    n = _resolve(args.n, 3 if kind == "galois" else 4)
    if not 1 <= n <= 8:
        raise UsageError(f"mub-check builds dense matrices and supports n <= 8, got {n}")
    family = build_mub_family(kind, n, args.r)
    mats = [u.matrix() for u in family.unitaries()]
    d = 1 << n
    worst = 0.0
    unitarity = max(float(np.abs(m.conj().T @ m - np.eye(d)).max()) for m in mats)
    if kind == "galois":
        tol = 1e-10
        for i in range(len(mats)):
            for j in range(len(mats)):
                if i != j:
                    overlap = np.abs(mats[i].conj().T @ mats[j]) ** 2
                    worst = max(worst, float(np.abs(overlap - 1 / d).max()))
        metrics = {"declared_overlap_sq": 1 / d, "max_deviation": worst}
    else:
        tol = 1e-12
        words = family.code.codewords
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                dist = int(np.count_nonzero(words[i] != words[j]))
                overlap = float(np.abs(mats[i].conj().T @ mats[j]).max())
                worst = max(worst, abs(overlap - mask_overlap_bound(dist)))
        metrics = {
            "min_distance": family.code.min_distance,
            "gamma": family.gamma,
            "declared_max_overlap": mask_overlap_bound(family.code.min_distance),
            "max_deviation": worst,
        }
    metrics["bases"] = family.r
    metrics["unitarity_error"] = unitarity
    metrics["violations"] = int(worst > tol) + int(unitarity > 1e-12)
    return {"n": n, "mub": kind, "r": family.r}, metrics


def run_ext_build(args, seed):
    preset = _resolve(args.preset, "paper")
    eps = _resolve(args.epsilon, 0.01)
    if preset == "paper":
        n = _resolve(args.n, 10**6)
        k = _resolve(args.k, n // 2)
        spec = build_guv_extractor(n, k, eps, "paper")
        bound = recursion_seed_bound(n, eps)
        metrics = {
            "kind": spec.kind,
            "output_bits": spec.output_bits,
            "seed_bits": spec.seed_bits,
            "declared_seed_bound": bound,
            "declared_eps": spec.eps,
            "violations": int(spec.seed_bits > bound),
        }
        return {"preset": preset, "n": n, "k": k, "epsilon": eps}, metrics
    n = _resolve(args.n, 12)
    k = _resolve(args.k, n)
    family = build_guv_extractor(n, k, eps, "desk", DESK_CONSTANTS)
    check = check_bijective(family)
    contract = family.contract(k)
    metrics = {
        "output_bits": family.out_bits,
        "seeds": family.num_seeds,
        "seed_bits": family.seed_bits,
        "seeds_checked": check["seeds_checked"],
        "bijective": check["bijective"],
        "contract_empirical": contract.empirical,
        "violations": len(check["failures"]),
    }
    return {"preset": preset, "n": n, "k": k, "epsilon": eps}, metrics


def run_ext_eval(args, seed):
    n = _resolve(args.n, 10)
    m = _resolve(args.out_bits, 3)
    trials = _resolve(args.trials, 20)
    if not 1 <= m <= n <= 14:
        raise UsageError(f"ext-eval needs 1 <= out-bits <= n <= 14, got n={n}, out-bits={m}")
    family = LeftoverHashFamily(n, m)
    worst_ratio = 0.0
    tv_violations = 0
    residual_violations = 0
    mass_violations = 0
    for trial in range(trials):
        rng = rng_stream(seed, trial)
        k = int(rng.integers(m, n + 1))
        report = eval_extractor_tv(family, random_flat_source(n, k, rng))
        bound = lhl_bound(n, k, m)
        worst_ratio = max(worst_ratio, report.tv_joint / bound)
        tv_violations += report.tv_joint > bound + 1e-12
        residual_violations += report.residual_minentropy < k - m - 1 - 1e-9
        mass_violations += report.excluded_mass > report.tv_joint + 1e-12
    metrics = {
        "max_tv_over_declared_bound": worst_ratio,
        "tv_violations": int(tv_violations),
        "residual_minentropy_violations": int(residual_violations),
        "excluded_mass_violations": int(mass_violations),
        "seeds": family.num_seeds,
    }
    metrics["violations"] = int(tv_violations + residual_violations + mass_violations)
    return {"n": n, "out_bits": m, "trials": trials, "family": "leftover_hash"}, metrics


def run_ur_build(args, seed):
    params = _family_params(args, 8, "hadamard")
    trials = _resolve(args.trials, 20)
    family = _build_family(params)
    states = sample_haar_state(family.n, rng_stream(seed, 0), trials)
    norm_error = 0.0
    for u in family.members:
        norm_error = max(norm_error, float(np.abs(np.linalg.norm(u.apply(states), axis=1) - 1).max()))
    metrics = {
        "t": family.t,
        "d_a": family.d_a,
        "d_b": family.d_b,
        "distinct_members": len({id(u) for u in family.members}),
        "norm_error": norm_error,
        "violations": int(norm_error > 1e-12) + int(family.t & (family.t - 1) != 0),
    }
    params["trials"] = trials
    return params, metrics


def _ur_metrics(report) -> dict:
    return {
        "eps_hat": report.eps_hat,
        "mean_tv": report.mean_tv,
        "entropy_bound": report.entropy_bound,
        "min_avg_entropy": float(report.avg_marginal_entropy_per_state.min()),
        "entropy_violations": report.entropy_violations,
        "states_tested": report.states_tested,
    }


def run_ur_eval(args, seed):
    params = _family_params(args, 8, "hadamard")
    trials = _resolve(args.trials, 100)
    family = _build_family(params)
    states, description = state_set(family, sample_haar_state(family.n, rng_stream(seed, 0), trials))
    report = eval_metric_ur(family, states, description)
    metrics = _ur_metrics(report)
    metrics.update({"t": family.t, "d_a": family.d_a, "violations": report.entropy_violations})
    params.update({"trials": trials, "sampling": description})
    return params, metrics


def run_lock_attack(args, seed):
    params = _family_params(args, 6, "galois", bits_divisor=3)
    trials = _resolve(args.trials, 4)
    family = _build_family(params)
    scheme = LockingScheme(family)
    msg_bits = scheme.message_bits
    povms = [computational_povm(scheme.dim), key_guess_povm(scheme, 0)]
    povms += [random_rank1_povm(scheme.dim, 2 * scheme.dim, rng_stream(seed, 1, i)) for i in range(trials)]
    haar = sample_haar_state(family.n, rng_stream(seed, 0), 64)
    base, description = state_set(family, haar)
    states = np.vstack([base] + [p.vectors for p in povms])
    eps_hat = eval_metric_ur(family, states, description + "+povm").eps_hat

    metrics = {"eps_hat": eps_hat, "message_bits": msg_bits, "keys": scheme.key_count}
    violations = 0
    tables = [outcome_likelihoods(scheme, p) for p in povms]
    uniform = [adversary_posterior(scheme, "uniform", p, lk) for p, lk in zip(povms, tables)]
    info = max(r.mutual_information for r in uniform)
    metrics["max_mutual_information"] = info
    metrics["declared_information_bound"] = information_bound(eps_hat, msg_bits)
    violations += info > metrics["declared_information_bound"] + 1e-9
    for ell in (msg_bits - 1, msg_bits - 2):
        if ell < 0:
            continue
        bound = locking_bound(eps_hat, ell, msg_bits)
        worst = 0.0
        for prior_index in range(trials):
            prior = flat_prior(scheme, ell, rng_stream(seed, 2, ell, prior_index))
            worst = max(worst, max(adversary_posterior(scheme, prior, p, lk).worst_tv for p, lk in zip(povms, tables)))
        metrics[f"worst_tv_ell_{ell}"] = worst
        metrics[f"declared_bound_ell_{ell}"] = bound
        violations += worst > bound + 0.01
    metrics["violations"] = int(violations)
    params.update({"trials": trials, "adversaries": [p.description for p in povms]})
    return params, metrics


def run_pauli_check(args, seed):
    n = _resolve(args.n, 4)
    size = _resolve(args.subset_size, n)
    trials = _resolve(args.trials, 1)
    if not 1 <= n <= 6:
        raise UsageError(f"pauli-check supports 1 <= n <= 6, got {n}")
    if not 1 <= size <= 4**n:
        raise UsageError(f"subset size must lie in [1, {4**n}], got {size}")
    measured = [
        pauli_locking_bound(n, random_pauli_subset(n, size, rng_stream(seed, trial)))["measured_tv"]
        for trial in range(trials)
    ]
    lower = 1 - size / 2**n
    full = pauli_locking_bound(n, [(u, v) for u in range(1 << n) for v in range(1 << n)])["measured_tv"]
    violations = sum(tv < lower - 1e-12 for tv in measured) + int(full > 1e-12)
    metrics = {
        "tv_lower_bound": lower,
        "min_measured_tv": min(measured),
        "max_measured_tv": max(measured),
        "full_key_set_tv": full,
        "violations": int(violations),
    }
    return {"n": n, "subset_size": size, "trials": trials}, metrics


def run_qid_forgetful(args, seed):
    params = _family_params(args, 8, "hadamard")
    trials = _resolve(args.trials, 50)
    family = _build_family(params)
    states, description = state_set(family, sample_haar_state(family.n, rng_stream(seed, 0), trials))
    report = forgetfulness_deficit(family, states)
    metrics = {
        "max_deficit": report.max_deficit,
        "max_avg_tv": float(report.avg_tv.max()),
        "identification_error": report.identification_error,
        "convexity_violations": report.convexity_violations,
        "violations": report.convexity_violations,
    }
    metrics.update(quantum_cost(family))
    params.update({"trials": trials, "sampling": description})
    return params, metrics


def run_gamma_formula(args, seed):
    d_a = _resolve(args.d_a, 2)
    d_b = _resolve(args.d_b, 2)
    samples = _resolve(args.trials, 20000)
    if samples < 2:
        raise UsageError("gamma-formula needs at least 2 samples")
    value, lower = expected_fidelity(d_a, d_b)
    mean, se = fidelity_monte_carlo(d_a, d_b, samples, rng_stream(seed, 0))
    gap = abs(mean - value)
    z = gap / se if se > 0 else (0.0 if gap < 1e-12 else math.inf)
    metrics = {
        "expected_fidelity": value,
        "declared_lower_bound": lower,
        "mc_mean": mean,
        "mc_standard_error": se,
        "z_score": z,
        "violations": int(z > 3) + int(value < lower - 1e-12),
    }
    return {"d_a": d_a, "d_b": d_b, "trials": samples}, metrics


def run_gram_schmidt(args, seed):
    trials = _resolve(args.trials, 100)
    count = _resolve(args.r, 8)
    dim = 1 << _resolve(args.n, 6)
    delta = _resolve(args.epsilon, 1 / 200)
    worst_ratio = 0.0
    failures = 0
    for trial in range(trials):
        vectors = random_near_orthonormal(dim, count, delta, rng_stream(seed, trial))
        try:
            result = gram_schmidt_orthonormalize(vectors, delta)
        except ArithmeticError:
            failures += 1
            continue
        worst_ratio = max(worst_ratio, float((result.deviations[1:] / result.bounds[1:]).max(initial=0.0)))
    metrics = {"max_deviation_over_bound": worst_ratio, "violations": failures}
    return {"trials": trials, "r": count, "dim": dim, "delta": delta}, metrics


EXPERIMENTS = {
    "field-check": (run_field_check, "GF(2^n) arithmetic and interpolation"),
    "mub-check": (run_mub_check, "exact or approximate unbiasedness of a basis family"),
    "ext-build": (run_ext_build, "build a recursive permutation extractor"),
    "ext-eval": (run_ext_eval, "exact TV of the leftover-hash extractor on flat sources"),
    "ur-build": (run_ur_build, "assemble a metric uncertainty family"),
    "ur-eval": (run_ur_eval, "measure a metric uncertainty family"),
    "lock-attack": (run_lock_attack, "attack a locking scheme with several measurements"),
    "pauli-check": (run_pauli_check, "leakage of Pauli encryption with a short key"),
    "qid-forgetful": (run_qid_forgetful, "forgetfulness of the identification encoder"),
    "gamma-formula": (run_gamma_formula, "closed-form mean marginal fidelity vs Monte Carlo"),
    "gram-schmidt": (run_gram_schmidt, "deviation of Gram-Schmidt on nearly orthonormal vectors"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of qubits or bits")
    common.add_argument("--epsilon", type=float, help="target error")
    common.add_argument("--trials", type=int, help="number of trials or samples")
    common.add_argument("--rng-seed", type=int, default=0, help="64-bit seed (default 0)")
    common.add_argument("--preset", choices=("paper", "desk"), help="extractor constants")
    common.add_argument("--mub", choices=("galois", "hadamard"), help="basis family")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--r", type=int, help="number of bases or vectors")
    common.add_argument("--k", type=int, help="source min-entropy")
    common.add_argument("--out-bits", type=int, help="extracted bits, log2 d_A")
    common.add_argument("--subset-size", type=int, help="Pauli key subset size")
    common.add_argument("--d-a", type=int, help="dimension of A")
    common.add_argument("--d-b", type=int, help="dimension of B")

    parser = _Parser(prog="qlock", description="Uncertainty relations and information locking experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name, (_, help_text) in EXPERIMENTS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def run_experiment(experiment: str, args: argparse.Namespace) -> ExperimentReport:
    """Run one experiment and return its report."""
    runner, _ = EXPERIMENTS[experiment]
    if not 0 <= args.rng_seed < 1 << 64:
        raise UsageError(f"rng seed must be a 64-bit unsigned integer, got {args.rng_seed}")
    if args.trials is not None and args.trials < 1:
        raise UsageError(f"trials must be positive, got {args.trials}")
    start = time.perf_counter()
    params, metrics = runner(args, args.rng_seed)
    runtime = int((time.perf_counter() - start) * 1000)
    return ExperimentReport(experiment, params, args.rng_seed, metrics, runtime)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = run_experiment(args.experiment, args)
    except (UsageError, ValueError) as exc:
        print(f"qlock {args.experiment}: error: {exc}", file=sys.stderr)
        return 1
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 2 if report.violations else 0


if __name__ == "__main__":
    sys.exit(main())
