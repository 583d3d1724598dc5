"""Covariant simulation of noisy-lossy measurements.

A continuous parent measurement with density ``d |z><z|`` over Haar-random
pure states, together with threshold response functions
``accept iff |<phi|z>|^2 >= t``, reproduces every noisy-lossy POVM whose
transmission does not exceed ``(1-t)^(d-1)`` at visibility ``t``. The
closed-form moments of the construction, a Monte Carlo estimator for them,
and the explicit joint-measurability model built from them all live here.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian, frobenius
from .lossy import NoiseParams, noisify_povm
from .objects import NO_CLICK, Label, Povm, PureState

_HAAR_METHODS = ("gaussian-normalize", "angle-parametrization")

#: Per-chunk sample count for memory-bounded accumulation.
_CHUNK = 1 << 16


def default_workers() -> int:
    """Worker count: STEERLAB_THREADS if set, else available parallelism."""
    env = os.environ.get("STEERLAB_THREADS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError(f"STEERLAB_THREADS must be >= 1, got {env}")
        return n
    return os.cpu_count() or 1


def _shard_counts(n: int, workers: int) -> list[int]:
    base, extra = divmod(n, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


@dataclass(frozen=True)
class HaarSampler:
    """Reproducible sampler of Haar-distributed pure states.

    ``gaussian-normalize`` draws 2d standard normals per state and
    normalizes. ``angle-parametrization`` inverts the marginals of the
    invariant measure in hyperspherical coordinates: with x_i = sin^2
    of the i-th polar angle, x_i = u^(1/(d-i)) for uniform u, and all
    phases uniform. Both produce the same distribution; the second exists
    so the coordinate form of the measure is itself testable.
    """

    d: int
    method: str = "gaussian-normalize"
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.method not in _HAAR_METHODS:
            raise ValueError(
                f"method must be one of {_HAAR_METHODS}, got {self.method!r}"
            )

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        d = self.d
        if d == 1:
            return np.ones((n, 1), dtype=complex)
        if self.method == "gaussian-normalize":
            z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
            return z / np.linalg.norm(z, axis=1, keepdims=True)
        # angle parametrization
        exponents = 1.0 / np.arange(d - 1, 0, -1)
        x = rng.random((n, d - 1)) ** exponents
        sin_t = np.sqrt(x)
        cos_t = np.sqrt(1.0 - x)
        phases = np.exp(2j * np.pi * rng.random((n, d - 1)))
        prefix = np.cumprod(sin_t, axis=1)
        z = np.empty((n, d), dtype=complex)
        z[:, 0] = cos_t[:, 0]
        for k in range(1, d - 1):
            z[:, k] = phases[:, k - 1] * prefix[:, k - 1] * cos_t[:, k]
        z[:, d - 1] = phases[:, d - 2] * prefix[:, d - 2]
        return z

    def sample_array(self, n: int, shard: int = 0) -> np.ndarray:
        """(n, d) array of unit vectors; ``shard`` selects an independent stream."""
        if n < 1:
            raise ValueError(f"sample count must be >= 1, got {n}")
        rng = np.random.default_rng([self.seed, shard])
        return self._draw(rng, n)

    def states(self, n: int) -> list[PureState]:
        return [PureState(row, (self.d,)) for row in self.sample_array(n)]


def sample_haar(sampler: HaarSampler, n: int) -> list[PureState]:
    """n i.i.d. Haar-distributed pure states from the sampler's stream."""
    return sampler.states(n)


# ---------------------------------------------------------------------------
# Closed-form moments of the threshold response construction
# ---------------------------------------------------------------------------


def _check_dt(d: int, t: float) -> None:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold t must lie in [0, 1], got {t}")


def aligned_weight(d: int, t: float) -> float:
    """<phi| N |phi> of the single-target simulated effect: (1-t)^(d-1)((d-1)t+1)."""
    _check_dt(d, t)
    return (1.0 - t) ** (d - 1) * ((d - 1) * t + 1.0)


def effect_trace(d: int, t: float) -> float:
    """tr N of the single-target simulated effect: d(1-t)^(d-1)."""
    _check_dt(d, t)
    return d * (1.0 - t) ** (d - 1)


def orthogonal_weight(d: int, t: float) -> float:
    """Weight of the simulated effect spread over the orthogonal subspace."""
    return effect_trace(d, t) - aligned_weight(d, t)


def noise_params_from_threshold(d: int, t: float) -> NoiseParams:
    """Noise pair reproduced by the construction at threshold t:
    eta = (1-t)^(d-1), p = t."""
    _check_dt(d, t)
    return NoiseParams(d=d, eta=(1.0 - t) ** (d - 1), p=t)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentEstimate:
    """Sample means and standard errors of the two scalar moments."""

    aligned: float
    aligned_stderr: float
    trace: float
    trace_stderr: float
    n: int


@dataclass(frozen=True)
class EffectEstimate:
    """Entrywise Monte Carlo estimate of a simulated effect.

    Standard errors are reported separately for real and imaginary parts,
    each from the sample variance of the corresponding component.
    """

    estimate: np.ndarray
    stderr_real: np.ndarray
    stderr_imag: np.ndarray
    n: int

    def max_sigma_deviation(self, analytic: np.ndarray) -> float:
        """Largest entrywise |deviation| / stderr against a reference matrix."""
        diff = self.estimate - np.asarray(analytic, dtype=complex)
        worst = 0.0
        for dev, se in (
            (np.abs(diff.real), self.stderr_real),
            (np.abs(diff.imag), self.stderr_imag),
        ):
            zero = se <= 0.0
            if np.any(dev[zero] > 1e-12):
                return float("inf")
            nz = ~zero
            if np.any(nz):
                worst = max(worst, float(np.max(dev[nz] / se[nz])))
        return worst


def _accumulate_moments(sampler, t, phi, count, shard):
    rng = np.random.default_rng([sampler.seed, shard])
    d = sampler.d
    s_a = s_a2 = s_t = 0.0
    done = 0
    while done < count:
        m = min(_CHUNK, count - done)
        z = sampler._draw(rng, m)
        overlap = np.abs(z @ phi.conj()) ** 2
        hit = overlap >= t
        xa = d * overlap[hit]
        s_a += float(xa.sum())
        s_a2 += float((xa**2).sum())
        s_t += float(hit.sum()) * d
        done += m
    # x_t takes values 0 or d, so its square sums to d * s_t
    return s_a, s_a2, s_t, d * s_t


def mc_response_moments(
    d: int,
    t: float,
    n: int,
    seed: int = 0,
    method: str = "gaussian-normalize",
    workers: int | None = None,
) -> MomentEstimate:
    """Monte Carlo estimate of the aligned-weight and trace moments.

    Deterministic for fixed (seed, worker count): shard results are merged
    in shard order regardless of completion order.
    """
    _check_dt(d, t)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    workers = default_workers() if workers is None else workers
    sampler = HaarSampler(d=d, method=method, seed=seed)
    phi = np.zeros(d, dtype=complex)
    phi[0] = 1.0
    counts = _shard_counts(n, workers)
    jobs = [(i, c) for i, c in enumerate(counts) if c > 0]
    if len(jobs) == 1:
        results = [_accumulate_moments(sampler, t, phi, jobs[0][1], jobs[0][0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda job: _accumulate_moments(sampler, t, phi, job[1], job[0]),
                    jobs,
                )
            )
    s_a = sum(r[0] for r in results)
    s_a2 = sum(r[1] for r in results)
    s_t = sum(r[2] for r in results)
    s_t2 = sum(r[3] for r in results)
    mean_a = s_a / n
    mean_t = s_t / n
    var_a = max(s_a2 / n - mean_a**2, 0.0)
    var_t = max(s_t2 / n - mean_t**2, 0.0)
    return MomentEstimate(
        aligned=mean_a,
        aligned_stderr=float(np.sqrt(var_a / n)),
        trace=mean_t,
        trace_stderr=float(np.sqrt(var_t / n)),
        n=n,
    )


def _accumulate_effect(sampler, t, phi, count, shard):
    rng = np.random.default_rng([sampler.seed, shard])
    d = sampler.d
    s1 = np.zeros((d, d), dtype=complex)
    s2_re = np.zeros((d, d))
    s2_im = np.zeros((d, d))
    done = 0
    while done < count:
        m = min(_CHUNK, count - done)
        z = sampler._draw(rng, m)
        hit = (np.abs(z @ phi.conj()) ** 2) >= t
        zh = z[hit]
        if zh.shape[0]:
            proj = np.einsum("ni,nj->nij", zh, zh.conj())
            s1 += d * proj.sum(axis=0)
            s2_re += d * d * (proj.real**2).sum(axis=0)
            s2_im += d * d * (proj.imag**2).sum(axis=0)
        done += m
    return s1, s2_re, s2_im


def mc_effect(
    d: int,
    t: float,
    phi: PureState,
    n: int,
    seed: int = 0,
    method: str = "gaussian-normalize",
    workers: int | None = None,
) -> EffectEstimate:
    """Monte Carlo estimate of the simulated effect for one target state.

    Estimates the average of ``d * |z><z|`` over Haar samples accepted by
    the threshold response function. Converges to
    ``aligned_weight * |phi><phi| + orthogonal_weight * (I - |phi><phi|)/(d-1)``.
    """
    _check_dt(d, t)
    if phi.dim != d:
        raise ValueError(f"target state has dim {phi.dim}, expected {d}")
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    workers = default_workers() if workers is None else workers
    sampler = HaarSampler(d=d, method=method, seed=seed)
    target = np.asarray(phi.vec)
    counts = _shard_counts(n, workers)
    jobs = [(i, c) for i, c in enumerate(counts) if c > 0]
    if len(jobs) == 1:
        results = [_accumulate_effect(sampler, t, target, jobs[0][1], jobs[0][0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda job: _accumulate_effect(sampler, t, target, job[1], job[0]),
                    jobs,
                )
            )
    s1 = sum(r[0] for r in results)
    s2_re = sum(r[1] for r in results)
    s2_im = sum(r[2] for r in results)
    mean = s1 / n
    var_re = np.maximum(s2_re / n - mean.real**2, 0.0)
    var_im = np.maximum(s2_im / n - mean.imag**2, 0.0)
    return EffectEstimate(
        estimate=mean,
        stderr_real=np.sqrt(var_re / n),
        stderr_imag=np.sqrt(var_im / n),
        n=n,
    )


def analytic_effect(d: int, t: float, phi: PureState) -> np.ndarray:
    """Closed form of the single-target simulated effect."""
    _check_dt(d, t)
    proj = phi.projector()
    return aligned_weight(d, t) * proj + orthogonal_weight(d, t) * (
        np.eye(d) - proj
    ) / (d - 1)


# ---------------------------------------------------------------------------
# Analytic simulation of rank-one POVMs and the joint-measurability model
# ---------------------------------------------------------------------------


def simulate_rank1_povm(
    targets: list[tuple[float, np.ndarray]],
    t: float,
    labels: list[Label] | None = None,
) -> Povm:
    """Analytic POVM produced by simulating a rank-one target POVM.

    ``targets`` lists (weight, unit vector) pairs resolving the identity.
    Effect a comes out as ``(alpha_a/d) * (aligned |phi_a><phi_a| +
    orthogonal (I-|phi_a><phi_a|)/(d-1))`` and the leftover probability
    becomes a no-click effect.
    """
    if not targets:
        raise ValueError("at least one target effect is required")
    d = np.asarray(targets[0][1]).size
    _check_dt(d, t)
    total = np.zeros((d, d), dtype=complex)
    for alpha, vec in targets:
        vec = np.asarray(vec, dtype=complex).ravel()
        if vec.size != d:
            raise ValueError("target vectors must share one dimension")
        total += alpha * np.outer(vec, vec.conj())
    if frobenius(total - np.eye(d)) > 1e-10:
        raise ValueError("targets do not resolve the identity within 1e-10")
    if labels is None:
        labels = list(range(len(targets)))
    a_w = aligned_weight(d, t)
    b_w = orthogonal_weight(d, t)
    eye = np.eye(d, dtype=complex)
    effects = []
    for label, (alpha, vec) in zip(labels, targets):
        vec = np.asarray(vec, dtype=complex).ravel()
        proj = np.outer(vec, vec.conj())
        effects.append((label, (alpha / d) * (a_w * proj + b_w * (eye - proj) / (d - 1))))
    no_click = eye - sum(mat for _, mat in effects)
    effects.append((NO_CLICK, (no_click + no_click.conj().T) / 2.0))
    return Povm(tuple(effects), d)


@dataclass(frozen=True)
class ResponseFunctionModel:
    """Joint-measurability model for one noisy-lossy POVM.

    The parent is the covariant continuous measurement; the response keeps
    a proposed rank-one piece when the parent outcome overlaps its target
    state by at least ``t``, reports the piece's original outcome label,
    and additionally relabels clicks to no-click with probability
    ``vacuum_mix`` (the extra noise needed below the exact-transmission
    point).
    """

    d: int
    t: float
    targets: tuple[tuple[float, np.ndarray], ...]
    piece_labels: tuple[Label, ...]
    target_labels: tuple[Label, ...]
    vacuum_mix: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"threshold t must lie in [0, 1], got {self.t}")
        if not 0.0 <= self.vacuum_mix <= 1.0:
            raise ValueError(f"vacuum_mix must lie in [0, 1], got {self.vacuum_mix}")
        targets = []
        alphas = []
        for alpha, vec in self.targets:
            alpha = float(alpha)
            vec = np.asarray(vec, dtype=complex).ravel()
            if alpha < 0:
                raise ValueError("target weights must be nonnegative")
            if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
                raise ValueError("target vectors must be unit norm")
            targets.append((alpha, vec))
            alphas.append(alpha)
        if abs(sum(alphas) - self.d) > 1e-10:
            raise ValueError("target weights must sum to the dimension")
        if len(self.piece_labels) != len(targets):
            raise ValueError("one outcome label per rank-one piece is required")
        object.__setattr__(self, "targets", tuple(targets))

    @property
    def sampling_dist(self) -> np.ndarray:
        """Distribution from which the output proposal is drawn."""
        return np.array([alpha for alpha, _ in self.targets]) / self.d

    def simulated_fine_effects(self) -> list[np.ndarray]:
        """Analytic simulated effect of each rank-one piece (before mixing)."""
        a_w = aligned_weight(self.d, self.t)
        b_w = orthogonal_weight(self.d, self.t)
        eye = np.eye(self.d, dtype=complex)
        out = []
        for alpha, vec in self.targets:
            proj = np.outer(vec, vec.conj())
            out.append((alpha / self.d) * (a_w * proj + b_w * (eye - proj) / (self.d - 1)))
        return out

    def reconstruct_povm(self) -> Povm:
        """Coarse-grain the simulated pieces back to the target's outcomes
        and apply the no-click mixing."""
        fine = self.simulated_fine_effects()
        eye = np.eye(self.d, dtype=complex)
        keep = 1.0 - self.vacuum_mix
        sums = {label: np.zeros((self.d, self.d), dtype=complex) for label in self.target_labels}
        for label, mat in zip(self.piece_labels, fine):
            sums[label] += mat
        effects = [(label, keep * sums[label]) for label in self.target_labels]
        clicked = sum(mat for _, mat in effects)
        effects.append((NO_CLICK, eye - clicked))
        return Povm(tuple(effects), self.d)

    def response_probabilities(self, states: np.ndarray) -> np.ndarray:
        """Outcome probabilities of the model at given parent outcomes.

        ``states`` is an (n, d) array of unit vectors; returns an array of
        shape (len(target_labels) + 1, n) whose final row is the no-click
        outcome.
        """
        states = np.asarray(states, dtype=complex)
        n = states.shape[0]
        probs = np.zeros((len(self.target_labels) + 1, n))
        keep = 1.0 - self.vacuum_mix
        index = {label: i for i, label in enumerate(self.target_labels)}
        for label, (alpha, vec) in zip(self.piece_labels, self.targets):
            hit = (np.abs(states @ vec.conj()) ** 2) >= self.t
            probs[index[label]] += keep * (alpha / self.d) * hit
        probs[-1] = 1.0 - probs[:-1].sum(axis=0)
        return probs


def build_jm_model(m: Povm, params: NoiseParams) -> ResponseFunctionModel:
    """Explicit simulation model for a noisy-lossy POVM.

    Refines each effect into rank-one pieces, runs the covariant
    construction at threshold t = p, and mixes extra no-click noise when
    the requested transmission sits strictly below the exact point
    ``(1-p)^(d-1)``. Refuses transmissions above that bound, where no such
    model exists in this construction.
    """
    if m.has_no_click:
        raise ValueError("the target POVM must not already have a no-click outcome")
    if m.dim != params.d:
        raise ValueError(f"POVM dim {m.dim} does not match params d={params.d}")
    exact_eta = (1.0 - params.p) ** (params.d - 1)
    if params.eta > exact_eta + 1e-12:
        raise ValueError(
            f"transmission eta={params.eta} exceeds the compatibility bound "
            f"(1-p)^(d-1)={exact_eta}; no covariant model is available"
        )
    pieces = []
    piece_labels = []
    for label, mat in m.effects:
        evals, evecs = eig_hermitian(mat)
        for i, lam in enumerate(evals):
            if lam > 1e-12:
                pieces.append((float(lam), evecs[:, i]))
                piece_labels.append(label)
    mix = 0.0 if exact_eta == 0.0 else min(max(1.0 - params.eta / exact_eta, 0.0), 1.0)
    return ResponseFunctionModel(
        d=params.d,
        t=params.p,
        targets=tuple(pieces),
        piece_labels=tuple(piece_labels),
        target_labels=m.labels,
        vacuum_mix=mix,
    )


def model_reconstruction_residual(model: ResponseFunctionModel, m: Povm, params: NoiseParams) -> float:
    """Largest Frobenius deviation of the model's reconstruction from the
    noisified target."""
    want = noisify_povm(m, params)
    got = model.reconstruct_povm()
    return max(
        frobenius(got.effect(label) - want.effect(label)) for label in want.labels
    )
