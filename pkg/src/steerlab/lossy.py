"""Noisy-lossy POVMs and their decomposition through the channel dual.

A POVM measured after white noise (visibility p) and loss (transmission
eta) picks up an extra no-click outcome; pulling a measurement on the
enlarged space back through the channel splits it into a reduced POVM on
the signal block plus a vacuum response distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import frobenius
from .objects import NO_CLICK, Povm, lossy_noisy_channel


@dataclass(frozen=True)
class NoiseParams:
    """Dimension plus the (transmission, visibility) noise pair."""

    d: int
    eta: float
    p: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class LossyDecomposition:
    """Split of a measurement pulled back through the noisy-lossy channel.

    ``reconstructed`` carries the pulled-back effects; they equal the
    noisified ``reduced_povm`` with its no-click effect redistributed
    according to ``vacuum_dist``. ``identity_residual`` is the largest
    Frobenius deviation of that identity, recomputed at construction.
    """

    reduced_povm: Povm
    vacuum_dist: np.ndarray
    reconstructed: Povm
    identity_residual: float

    def __post_init__(self):
        q = np.asarray(self.vacuum_dist, dtype=float)
        if np.any(q < -1e-12) or abs(q.sum() - 1.0) > 1e-12:
            raise ValueError("vacuum response is not a probability distribution")
        object.__setattr__(self, "vacuum_dist", q)


def noisify_povm(m: Povm, params: NoiseParams) -> Povm:
    """Imperfect version of a POVM under white noise and loss.

    Each effect becomes ``eta*p*M_a + eta*(1-p)*tr(M_a)*I/d`` and a no-click
    effect ``(1-eta)*I`` is appended under the reserved label.
    """
    if m.has_no_click:
        raise ValueError("input POVM already has a no-click outcome")
    if m.dim != params.d:
        raise ValueError(f"POVM dim {m.dim} does not match params d={params.d}")
    d, eta, p = params.d, params.eta, params.p
    eye = np.eye(d, dtype=complex)
    effects = [
        (label, eta * p * mat + eta * (1.0 - p) * np.trace(mat).real * eye / d)
        for label, mat in m.effects
    ]
    effects.append((NO_CLICK, (1.0 - eta) * eye))
    return Povm(tuple(effects), d)


def reduce_through_loss_dual(m_prime: Povm, params: NoiseParams) -> LossyDecomposition:
    """Pull a measurement on the enlarged space back through noise and loss.

    For each effect M'_a on d+1 levels (vacuum last) this computes the
    signal-block reduction ``M_a = P M'_a P``, the vacuum response
    ``q(a) = <ø|M'_a|ø>``, and the Heisenberg image of M'_a under the full
    channel. The images always satisfy

        image_a = noisified(M)_a + q(a) * noisified(M)_no_click,

    which is verified at construction.
    """
    d = params.d
    if m_prime.dim != d + 1:
        raise ValueError(
            f"expected a POVM on dimension {d + 1}, got dimension {m_prime.dim}"
        )
    chain = lossy_noisy_channel(d, params.eta, params.p)
    reduced = []
    q = []
    reconstructed = []
    for label, mat in m_prime.effects:
        reduced.append((label, mat[:d, :d]))
        q.append(float(mat[d, d].real))
        reconstructed.append((label, chain.dual(mat)))
    reduced_povm = Povm(tuple(reduced), d)
    reconstructed_povm = Povm(tuple(reconstructed), d)
    # noisified reduced effects, computed inline: the reduced labels are
    # pass-through names and may themselves include the no-click label
    eye = np.eye(d, dtype=complex)
    eta, p = params.eta, params.p
    no_click = (1.0 - eta) * eye
    residual = 0.0
    for (_, image), (_, red), qa in zip(reconstructed, reduced, q):
        noisified = eta * p * red + eta * (1.0 - p) * np.trace(red).real * eye / d
        residual = max(residual, frobenius(image - (noisified + qa * no_click)))
    return LossyDecomposition(
        reduced_povm=reduced_povm,
        vacuum_dist=np.array(q),
        reconstructed=reconstructed_povm,
        identity_residual=residual,
    )


def embed_with_vacuum(m: Povm) -> Povm:
    """Embed a POVM into the space with one extra vacuum level.

    Effects are padded with a zero vacuum row/column and a dedicated
    no-click effect |ø><ø| is appended, so the vacuum response of every
    original outcome vanishes.
    """
    if m.has_no_click:
        raise ValueError("input POVM already has a no-click outcome")
    d = m.dim
    effects = []
    for label, mat in m.effects:
        out = np.zeros((d + 1, d + 1), dtype=complex)
        out[:d, :d] = mat
        effects.append((label, out))
    vac = np.zeros((d + 1, d + 1), dtype=complex)
    vac[d, d] = 1.0
    effects.append((NO_CLICK, vac))
    return Povm(tuple(effects), d + 1)


def coarse_grain(m: Povm, groups: dict) -> Povm:
    """Merge outcomes: ``groups`` maps each new label to the old labels it absorbs."""
    covered = [label for labels in groups.values() for label in labels]
    if sorted(map(str, covered)) != sorted(map(str, m.labels)):
        raise ValueError("groups must partition the outcome labels")
    effects = []
    for new_label, old_labels in groups.items():
        effects.append((new_label, sum(m.effect(lab) for lab in old_labels)))
    return Povm(tuple(effects), m.dim)
