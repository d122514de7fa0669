import math

import numpy as np
import pytest

from qlock.qid import forgetfulness_deficit, qid_encode_state, quantum_cost
from qlock.qsim import HadamardMask, StructuredUnitary, identity, sample_haar_state
from qlock.urel import UnitaryFamily, build_metric_ur, eval_metric_ur, state_set


def test_cost():
    family = build_metric_ur(6, 2, "galois", 3)
    assert quantum_cost(family) == {"classical_bits": 2.0, "quantum_qubits": 4 + math.log2(family.t)}


def test_encoding_ensemble_is_normalised():
    family = build_metric_ur(4, 1, "galois", 2)
    psi = sample_haar_state(4, np.random.default_rng(0))
    ensemble = qid_encode_state(family, psi)
    assert sum(e.prob for e in ensemble) == pytest.approx(1.0)
    for e in ensemble:
        assert e.residual.shape == (family.t, family.d_b)
        assert np.linalg.norm(e.residual) == pytest.approx(1.0)
    sample = qid_encode_state(family, psi, rng=np.random.default_rng(1))
    assert 0 <= sample.message < family.d_a


def test_register_distribution_is_average_marginal():
    members = (identity(1), StructuredUnitary(1, (HadamardMask(1, 1),)))
    family = UnitaryFamily(1, members, (2, 1))
    report = forgetfulness_deficit(family, np.array([[1, 0]]))
    assert np.allclose(report.register_distribution, [[0.75, 0.25]])
    assert report.deficit[0] == pytest.approx(0.25)
    assert report.identification_error == pytest.approx(6 * 0.25**0.25)


def test_deficit_below_average_tv():
    family = build_metric_ur(6, 2, "hadamard")
    states, _ = state_set(family, sample_haar_state(6, np.random.default_rng(2), 30))
    report = forgetfulness_deficit(family, states)
    ur = eval_metric_ur(family, states)
    assert report.convexity_violations == 0
    assert np.allclose(report.avg_tv, ur.avg_tv_per_state)
    assert np.all(report.deficit <= report.avg_tv + 1e-12)


def test_dimension_check():
    family = build_metric_ur(4, 1, "galois", 2)
    with pytest.raises(ValueError):
        qid_encode_state(family, np.ones(8))
