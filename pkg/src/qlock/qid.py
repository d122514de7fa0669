"""Quantum identification over a classical channel plus a small quantum channel.

The sender applies ``U_k`` controlled by a uniform superposition over keys,
measures subsystem A and sends the outcome classically, while B and the key
register travel over the quantum channel.  Decoding measurements are not
constructed here; :func:`forgetfulness_deficit` certifies the premise they
rely on and reports the implied identification error ``6 * deficit**0.25``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qsim import tv_distance
from .urel import UnitaryFamily, member_outcomes


@dataclass(frozen=True)
class QidEncoding:
    """One outcome of the encoder: classical ``message`` and residual on ``K (x) B``.

    ``residual`` has shape ``(t, d_B)``; row ``k`` is the key-``k`` branch.
    """

    prob: float
    message: int
    residual: np.ndarray


def quantum_cost(family: UnitaryFamily) -> dict:
    """Channel usage: classical bits and qubits per identification."""
    return {
        "classical_bits": math.log2(family.d_a),
        "quantum_qubits": math.log2(family.d_b) + math.log2(family.t),
    }


def qid_encode_state(family: UnitaryFamily, psi: np.ndarray, rng: np.random.Generator | None = None):
    """Run the encoder on ``psi``.

    Without ``rng`` the exact post-measurement ensemble (a list of
    :class:`QidEncoding`, one per outcome with positive probability) is
    returned.  With ``rng`` a single outcome is sampled.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (family.dim,):
        raise ValueError(f"state has shape {psi.shape}, family acts on dimension {family.dim}")
    branches = np.stack([u.apply(psi) for u in family.members]) / math.sqrt(family.t)
    blocks = branches.reshape(family.t, family.d_a, family.d_b)
    probs = (np.abs(blocks) ** 2).sum(axis=(0, 2))
    if rng is not None:
        a = int(rng.choice(family.d_a, p=probs / probs.sum()))
        return QidEncoding(float(probs[a]), a, blocks[:, a, :] / math.sqrt(probs[a]))
    return [
        QidEncoding(float(probs[a]), a, blocks[:, a, :] / math.sqrt(probs[a]))
        for a in range(family.d_a)
        if probs[a] > 1e-15
    ]


@dataclass(frozen=True)
class QidReport:
    """Forgetfulness statistics over a set of states.

    ``register_distribution[s]`` is the diagonal of the copied register for
    state ``s``; ``deficit`` is its TV distance from uniform.
    """

    register_distribution: np.ndarray
    deficit: np.ndarray
    avg_tv: np.ndarray
    max_deficit: float
    identification_error: float
    convexity_violations: int


def forgetfulness_deficit(family: UnitaryFamily, states: np.ndarray) -> QidReport:
    """Exact distance of the copied A register from maximally mixed, per state."""
    states = np.atleast_2d(states)
    marg_sum = np.zeros((len(states), family.d_a))
    tv_sum = np.zeros(len(states))
    for _, marginal, _ in member_outcomes(family, states):
        marg_sum += marginal
        tv_sum += tv_distance(marginal)
    register = marg_sum / family.t
    deficit = tv_distance(register)
    avg_tv = tv_sum / family.t
    worst = float(deficit.max())
    return QidReport(
        register_distribution=register,
        deficit=deficit,
        avg_tv=avg_tv,
        max_deficit=worst,
        identification_error=6 * worst**0.25,
        convexity_violations=int(np.count_nonzero(deficit > avg_tv + 1e-12)),
    )
