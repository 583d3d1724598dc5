"""States, channels, POVMs, and the lossy-noisy entangled state family.

The no-click outcome of a measurement and the vacuum level added by the
loss channel are both written ``ø``. By convention the vacuum level is
the *last* basis index of the enlarged space, so the original
d-dimensional block always sits at indices 0..d-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    HERMITICITY_TOL,
    as_complex_matrix,
    dagger,
    entries_to_matrix,
    freeze_array,
    frobenius,
    is_hermitian,
    is_psd,
    matrix_to_entries,
    partial_trace,
    tensor,
)

#: Reserved outcome label for the no-click / vacuum outcome.
NO_CLICK = "ø"

Label = int | str


@dataclass(frozen=True)
class PureState:
    """Unit vector on a tensor product of finite-dimensional factors."""

    vec: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
        if vec.size != int(np.prod(dims)):
            raise ValueError(
                f"vector length {vec.size} does not match dims {dims}"
            )
        if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
            raise ValueError("state vector is not normalized within 1e-12")
        object.__setattr__(self, "vec", freeze_array(vec))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.vec.size

    def projector(self) -> np.ndarray:
        """Rank-one density matrix |psi><psi|."""
        return np.outer(self.vec, self.vec.conj())

    def to_density(self) -> "DensityOperator":
        return DensityOperator(self.projector(), self.dims)


@dataclass(frozen=True)
class DensityOperator:
    """Positive unit-trace operator carrying its subsystem dimensions."""

    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        mat = as_complex_matrix(self.mat)
        dims = tuple(int(d) for d in self.dims)
        side = int(np.prod(dims))
        if mat.shape != (side, side):
            raise ValueError(
                f"matrix shape {mat.shape} does not match dims {dims}"
            )
        if not is_hermitian(mat, HERMITICITY_TOL):
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if not is_psd(mat, HERMITICITY_TOL):
            raise ValueError("density matrix is not positive semidefinite within 1e-10")
        if abs(np.trace(mat).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1 by more than 1e-10")
        object.__setattr__(self, "mat", freeze_array(mat))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def reduced(self, keep: int) -> np.ndarray:
        """Reduced state on one factor of a bipartite operator."""
        if len(self.dims) != 2:
            raise ValueError("reduced() requires exactly two subsystems")
        return partial_trace(self.mat, (self.dims[0], self.dims[1]), keep)

    def to_document(self) -> dict:
        """JSON-compatible document: dims plus row-major [re, im] entries."""
        return {"dims": list(self.dims), "entries": matrix_to_entries(self.mat)}

    @classmethod
    def from_document(cls, doc: dict) -> "DensityOperator":
        dims = tuple(int(d) for d in doc["dims"])
        side = int(np.prod(dims))
        return cls(entries_to_matrix(doc["entries"], side, side), dims)


@dataclass(frozen=True)
class Povm:
    """Finite list of labelled positive effects summing to the identity.

    The label ``ø`` is reserved for the no-click outcome.
    """

    effects: tuple[tuple[Label, np.ndarray], ...]
    dim: int

    def __post_init__(self):
        dim = int(self.dim)
        effects = []
        labels = []
        for label, mat in self.effects:
            mat = as_complex_matrix(mat)
            if mat.shape != (dim, dim):
                raise ValueError(
                    f"effect '{label}' has shape {mat.shape}, expected ({dim}, {dim})"
                )
            if not is_psd(mat, HERMITICITY_TOL):
                raise ValueError(f"effect '{label}' is not PSD within 1e-10")
            effects.append((label, freeze_array(mat)))
            labels.append(label)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels: {labels}")
        total = sum(mat for _, mat in effects)
        if frobenius(total - np.eye(dim)) > 1e-10:
            raise ValueError("effects do not sum to the identity within 1e-10")
        object.__setattr__(self, "effects", tuple(effects))
        object.__setattr__(self, "dim", dim)

    @classmethod
    def from_matrices(cls, mats, dim: int | None = None, labels=None) -> "Povm":
        mats = [as_complex_matrix(m) for m in mats]
        if dim is None:
            dim = mats[0].shape[0]
        if labels is None:
            labels = list(range(len(mats)))
        return cls(tuple(zip(labels, mats)), dim)

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(label for label, _ in self.effects)

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def effect(self, label: Label) -> np.ndarray:
        for lab, mat in self.effects:
            if lab == label:
                return mat
        raise KeyError(f"no outcome labelled {label!r}")

    def matrices(self) -> np.ndarray:
        """All effects stacked into one (n, dim, dim) array."""
        return np.stack([mat for _, mat in self.effects])

    @property
    def has_no_click(self) -> bool:
        return NO_CLICK in self.labels

    def to_document(self) -> dict:
        return {
            "dim": self.dim,
            "effects": [
                {"label": label, "entries": matrix_to_entries(mat)}
                for label, mat in self.effects
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Povm":
        dim = int(doc["dim"])
        effects = tuple(
            (e["label"], entries_to_matrix(e["entries"], dim, dim))
            for e in doc["effects"]
        )
        return cls(effects, dim)


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------


class Channel:
    """Completely positive trace-preserving map given by Kraus operators.

    Subclasses with closed-form action override :meth:`apply_to_matrix`
    and :meth:`dual`; the Kraus list stays available for independent
    cross-checks (complete positivity, brute-force duals).
    """

    in_dim: int
    out_dim: int

    def kraus_operators(self) -> list[np.ndarray]:
        raise NotImplementedError

    def apply_to_matrix(self, m: np.ndarray) -> np.ndarray:
        """Schroedinger picture: sum_k K m K^dag."""
        m = as_complex_matrix(m)
        if m.shape != (self.in_dim, self.in_dim):
            raise ValueError(
                f"operator side {m.shape[0]} does not match channel input {self.in_dim}"
            )
        out = np.zeros((self.out_dim, self.out_dim), dtype=complex)
        for k in self.kraus_operators():
            out += k @ m @ dagger(k)
        return out

    def dual(self, effect: np.ndarray) -> np.ndarray:
        """Heisenberg picture: sum_k K^dag E K."""
        effect = as_complex_matrix(effect)
        if effect.shape != (self.out_dim, self.out_dim):
            raise ValueError(
                f"effect side {effect.shape[0]} does not match channel output {self.out_dim}"
            )
        out = np.zeros((self.in_dim, self.in_dim), dtype=complex)
        for k in self.kraus_operators():
            out += dagger(k) @ effect @ k
        return out

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij |i><j| (x) C(|i><j|); PSD iff the map is CP."""
        d = self.in_dim
        out = np.zeros((d * self.out_dim, d * self.out_dim), dtype=complex)
        for i in range(d):
            for j in range(d):
                eij = np.zeros((d, d), dtype=complex)
                eij[i, j] = 1.0
                out += tensor(eij, self.apply_to_matrix(eij))
        return out

    def kraus_closure_residual(self) -> float:
        """Frobenius distance of sum_k K^dag K from the identity."""
        total = sum(dagger(k) @ k for k in self.kraus_operators())
        return frobenius(total - np.eye(self.in_dim))


class WhiteNoise(Channel):
    """Depolarizing channel: keeps the state with probability p, else
    replaces it with the maximally mixed state."""

    def __init__(self, p: float, d: int):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"visibility p must lie in [0, 1], got {p}")
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        self.p = float(p)
        self.d = int(d)
        self.in_dim = self.out_dim = self.d

    def kraus_operators(self) -> list[np.ndarray]:
        d, p = self.d, self.p
        ops = [np.sqrt(p) * np.eye(d, dtype=complex)]
        scale = np.sqrt((1.0 - p) / d)
        for i in range(d):
            for j in range(d):
                k = np.zeros((d, d), dtype=complex)
                k[i, j] = scale
                ops.append(k)
        return ops

    def apply_to_matrix(self, m: np.ndarray) -> np.ndarray:
        m = as_complex_matrix(m)
        if m.shape != (self.d, self.d):
            raise ValueError("operator dimension does not match channel")
        return self.p * m + (1.0 - self.p) * np.trace(m) * np.eye(self.d) / self.d

    def dual(self, effect: np.ndarray) -> np.ndarray:
        effect = as_complex_matrix(effect)
        if effect.shape != (self.d, self.d):
            raise ValueError("effect dimension does not match channel")
        return self.p * effect + (1.0 - self.p) * np.trace(effect) * np.eye(self.d) / self.d

    def __repr__(self):
        return f"WhiteNoise(p={self.p}, d={self.d})"


class Loss(Channel):
    """Transmission channel: delivers the state with probability eta, else
    outputs the vacuum level appended as the last index of a (d+1)-dimensional
    space."""

    def __init__(self, eta: float, d: int):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"transmission eta must lie in [0, 1], got {eta}")
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        self.eta = float(eta)
        self.d = int(d)
        self.in_dim = self.d
        self.out_dim = self.d + 1

    def kraus_operators(self) -> list[np.ndarray]:
        d, eta = self.d, self.eta
        embed = np.zeros((d + 1, d), dtype=complex)
        embed[:d, :] = np.eye(d)
        ops = [np.sqrt(eta) * embed]
        for k in range(d):
            kk = np.zeros((d + 1, d), dtype=complex)
            kk[d, k] = np.sqrt(1.0 - eta)
            ops.append(kk)
        return ops

    def apply_to_matrix(self, m: np.ndarray) -> np.ndarray:
        m = as_complex_matrix(m)
        d = self.d
        if m.shape != (d, d):
            raise ValueError("operator dimension does not match channel")
        out = np.zeros((d + 1, d + 1), dtype=complex)
        out[:d, :d] = self.eta * m
        out[d, d] = (1.0 - self.eta) * np.trace(m)
        return out

    def dual(self, effect: np.ndarray) -> np.ndarray:
        effect = as_complex_matrix(effect)
        d = self.d
        if effect.shape != (d + 1, d + 1):
            raise ValueError("effect dimension does not match channel output")
        return self.eta * effect[:d, :d] + (1.0 - self.eta) * effect[d, d] * np.eye(d)

    def __repr__(self):
        return f"Loss(eta={self.eta}, d={self.d})"


class KrausChannel(Channel):
    """Channel defined directly by a list of Kraus operators."""

    def __init__(self, kraus: list[np.ndarray]):
        kraus = [as_complex_matrix(k) for k in kraus]
        if not kraus:
            raise ValueError("at least one Kraus operator is required")
        out_dim, in_dim = kraus[0].shape
        for k in kraus:
            if k.shape != (out_dim, in_dim):
                raise ValueError("Kraus operators must share one shape")
        self._kraus = kraus
        self.in_dim = in_dim
        self.out_dim = out_dim
        if self.kraus_closure_residual() > 1e-10:
            raise ValueError("Kraus operators are not trace preserving within 1e-10")

    def kraus_operators(self) -> list[np.ndarray]:
        return list(self._kraus)


class Composition(Channel):
    """Sequential composition; ``steps`` are applied first-to-last.

    Factors are stored rather than multiplied out, so the dual is computed
    exactly by running the factor duals in reverse.
    """

    def __init__(self, steps: list[Channel]):
        if not steps:
            raise ValueError("composition needs at least one channel")
        for a, b in zip(steps, steps[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"cannot chain output dim {a.out_dim} into input dim {b.in_dim}"
                )
        self.steps = list(steps)
        self.in_dim = steps[0].in_dim
        self.out_dim = steps[-1].out_dim

    def kraus_operators(self) -> list[np.ndarray]:
        ops = [np.eye(self.in_dim, dtype=complex)]
        for step in self.steps:
            ops = [k @ op for op in ops for k in step.kraus_operators()]
        return ops

    def apply_to_matrix(self, m: np.ndarray) -> np.ndarray:
        for step in self.steps:
            m = step.apply_to_matrix(m)
        return m

    def dual(self, effect: np.ndarray) -> np.ndarray:
        for step in reversed(self.steps):
            effect = step.dual(effect)
        return effect

    def __repr__(self):
        return f"Composition({self.steps!r})"


def lossy_noisy_channel(d: int, eta: float, p: float) -> Composition:
    """White noise followed by loss, mapping dimension d to d+1."""
    return Composition([WhiteNoise(p, d), Loss(eta, d)])


def apply_channel(c: Channel, rho: DensityOperator, on_subsystem: int) -> DensityOperator:
    """Apply a channel to one subsystem of a (possibly multipartite) state."""
    dims = rho.dims
    if not 0 <= on_subsystem < len(dims):
        raise ValueError(f"subsystem index {on_subsystem} out of range for dims {dims}")
    if dims[on_subsystem] != c.in_dim:
        raise ValueError(
            f"subsystem dimension {dims[on_subsystem]} does not match channel input {c.in_dim}"
        )
    before = int(np.prod(dims[:on_subsystem], dtype=int)) if on_subsystem else 1
    after = (
        int(np.prod(dims[on_subsystem + 1:], dtype=int))
        if on_subsystem + 1 < len(dims)
        else 1
    )
    side_out = before * c.out_dim * after
    out = np.zeros((side_out, side_out), dtype=complex)
    eye_before = np.eye(before, dtype=complex)
    eye_after = np.eye(after, dtype=complex)
    for k in c.kraus_operators():
        k_full = tensor(tensor(eye_before, k), eye_after)
        out += k_full @ rho.mat @ dagger(k_full)
    new_dims = dims[:on_subsystem] + (c.out_dim,) + dims[on_subsystem + 1:]
    return DensityOperator(out, new_dims)


def dual_apply(c: Channel, effect: np.ndarray) -> np.ndarray:
    """Heisenberg-picture image of an effect; pairs with apply_channel under
    tr[rho . dual_apply(c, E)] = tr[apply(c, rho) . E]."""
    return c.dual(effect)


# ---------------------------------------------------------------------------
# State constructions
# ---------------------------------------------------------------------------


def phi_plus(d: int) -> PureState:
    """Maximally entangled two-qudit state (1/sqrt(d)) sum_k |k,k>."""
    if d < 2:
        raise ValueError(f"phi_plus requires d >= 2, got {d}")
    vec = np.zeros(d * d, dtype=complex)
    for k in range(d):
        vec[k * d + k] = 1.0
    return PureState(vec / np.sqrt(d), (d, d))


def one_way_state(d: int, eta: float, p: float) -> DensityOperator:
    """The noisy-lossy entangled family on dimensions (d, d+1).

    Equals ``eta*p * Phi+ + eta*(1-p) * (I (x) I)/d^2 + (1-eta) * (I/d) (x) |ø><ø|``
    with the d-dimensional second factor embedded as the first d levels of
    the enlarged (d+1)-dimensional space.
    """
    if d < 2:
        raise ValueError(f"one_way_state requires d >= 2, got {d}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    db = d + 1
    mat = np.zeros((d * db, d * db), dtype=complex)
    # maximally entangled block
    for k in range(d):
        for l in range(d):
            mat[k * db + k, l * db + l] += eta * p / d
    # white noise on the signal block
    block = np.zeros((db, db), dtype=complex)
    block[:d, :d] = np.eye(d)
    mat += eta * (1.0 - p) / d**2 * tensor(np.eye(d), block)
    # vacuum component
    vac = np.zeros((db, db), dtype=complex)
    vac[d, d] = 1.0
    mat += (1.0 - eta) / d * tensor(np.eye(d), vac)
    return DensityOperator(mat, (d, db))


def schmidt_rank(psi: PureState, tol: float = 1e-10) -> tuple[int, np.ndarray]:
    """Schmidt rank and descending Schmidt coefficients of a bipartite pure state.

    The rank counts singular values of the coefficient matrix above ``tol``.
    """
    if len(psi.dims) != 2:
        raise ValueError("schmidt_rank requires a bipartite state")
    da, db = psi.dims
    coeffs = np.linalg.svd(psi.vec.reshape(da, db), compute_uv=False)
    rank = int(np.sum(coeffs > tol))
    return rank, coeffs


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def mub_pair(d: int) -> tuple[Povm, Povm]:
    """Computational and Fourier bases as rank-one projective POVMs.

    Valid in prime dimension, where the two bases are mutually unbiased:
    every cross overlap |<e_i|f_j>|^2 equals 1/d.
    """
    if not _is_prime(d):
        raise ValueError(f"mub_pair requires a prime dimension, got {d}")
    comp = Povm.from_matrices(
        [np.diag([1.0 + 0j if i == k else 0j for i in range(d)]) for k in range(d)]
    )
    omega = np.exp(2j * np.pi / d)
    fourier = []
    for j in range(d):
        v = np.array([omega ** (j * k) for k in range(d)], dtype=complex) / np.sqrt(d)
        fourier.append(np.outer(v, v.conj()))
    return comp, Povm.from_matrices(fourier)
