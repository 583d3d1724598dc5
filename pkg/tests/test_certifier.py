import numpy as np
import pytest

from steerlab.certifier import (
    DEFAULT_TOL,
    FEASIBLE,
    INFEASIBLE_AT_TOLERANCE,
    DiscreteParent,
    JmCertificate,
    discretize_parent,
    exact_certificate,
    lp_feasibility,
    parent_from_states,
    response_conditionals,
    verify_certificate,
)
from steerlab.covariant import build_jm_model
from steerlab.linalg import frobenius, is_psd
from steerlab.lossy import NoiseParams, noisify_povm
from steerlab.objects import Povm, mub_pair
from steerlab.rand import random_povm


def _noisified_mubs(d, eta, p):
    params = NoiseParams(d=d, eta=eta, p=p)
    return [noisify_povm(b, params) for b in mub_pair(d)]


def test_discretize_parent_exact_sum():
    for d, n in ((2, 16), (3, 100)):
        parent = discretize_parent(d, n, seed=0)
        assert parent.n_atoms == n
        assert frobenius(parent.effects.sum(axis=0) - np.eye(d)) < 1e-12
        assert all(is_psd(e, 1e-10) for e in parent.effects)


def test_discretize_parent_needs_enough_atoms():
    with pytest.raises(ValueError):
        discretize_parent(3, 8)


def test_raw_sum_converges_to_identity():
    # with many atoms the correction becomes trivial
    d, n = 2, 1_000_000
    from steerlab.covariant import HaarSampler

    states = HaarSampler(d=d, seed=1).sample_array(n)
    raw_sum = (d / n) * (states.T @ states.conj())
    assert frobenius(raw_sum - np.eye(d)) < 5e-3


def test_tetrahedral_parent_exact_without_correction():
    # qubit tetrahedron: a symmetric frame whose raw sum is already I
    c, s = np.sqrt(1 / 3), np.sqrt(2 / 3)
    states = np.array(
        [
            [1.0, 0.0],
            [c, s],
            [c, s * np.exp(2j * np.pi / 3)],
            [c, s * np.exp(4j * np.pi / 3)],
        ],
        dtype=complex,
    )
    parent = parent_from_states(states, 2)
    assert frobenius(parent.correction - np.eye(2)) < 1e-12
    for k in range(4):
        raw = 0.5 * np.outer(states[k], states[k].conj())
        assert frobenius(parent.effects[k] - raw) < 1e-12


def test_parent_rejects_direct_bad_effects():
    with pytest.raises(ValueError):
        DiscreteParent(d=2, effects=np.stack([np.eye(2), np.eye(2)]))


# ---------------------------------------------------------------------------
# LP feasibility
# ---------------------------------------------------------------------------


def test_single_povm_coarse_graining_of_parent():
    # a target the parent refines is reproduced at solver precision
    parent = discretize_parent(2, 40, seed=2)
    half = parent.effects[:20].sum(axis=0)
    rest = parent.effects[20:].sum(axis=0)
    target = Povm.from_matrices([half, rest], dim=2)
    cert = lp_feasibility([target], parent, tol=1e-6)
    assert cert.status == FEASIBLE
    assert cert.residual < 1e-9


def test_single_noisified_povm_feasible():
    parent = discretize_parent(2, 400, seed=3)
    params = NoiseParams(d=2, eta=0.5, p=0.5)
    target = noisify_povm(mub_pair(2)[0], params)
    cert = lp_feasibility([target], parent, tol=1e-6)
    assert cert.status == FEASIBLE
    assert cert.residual < 1e-9


def test_noisified_mubs_feasible_at_boundary():
    parent = discretize_parent(2, 2000, seed=4)
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        targets = _noisified_mubs(2, 1.0 - p, p)
        cert = lp_feasibility(targets, parent, tol=1e-4)
        assert cert.status == FEASIBLE, (p, cert.residual)
        assert cert.residual <= 1e-4
        assert abs(verify_certificate(cert, targets) - cert.residual) < 1e-12


def test_noisified_random_pair_feasible_at_boundary():
    # the guarantee covers every measurement pair, not just the bases
    rng = np.random.default_rng(21)
    parent = discretize_parent(2, 1200, seed=20)
    p = 0.35
    params = NoiseParams(d=2, eta=1.0 - p, p=p)
    targets = [noisify_povm(random_povm(2, 3, rng), params) for _ in range(2)]
    cert = lp_feasibility(targets, parent, tol=1e-4)
    assert cert.status == FEASIBLE
    assert cert.residual <= 1e-4


def test_noiseless_mubs_infeasible_at_tolerance():
    parent = discretize_parent(2, 2000, seed=5)
    targets = _noisified_mubs(2, 1.0, 1.0)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    assert cert.status == INFEASIBLE_AT_TOLERANCE
    assert cert.residual > 0.1  # bounded away from zero


def test_conditionals_nonnegative_normalized():
    parent = discretize_parent(2, 500, seed=6)
    targets = _noisified_mubs(2, 0.4, 0.4)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    for table in cert.conditionals:
        assert np.all(table >= 0.0)
        assert np.max(np.abs(table.sum(axis=0) - 1.0)) < 1e-12


def test_noise_monotonicity():
    # making targets noisier never increases the achievable residual
    parent = discretize_parent(2, 300, seed=7)
    base_p = 0.9
    targets_sharp = _noisified_mubs(2, 1.0, base_p)
    res_sharp = lp_feasibility(targets_sharp, parent, tol=1e-4).residual
    for p in (0.7, 0.5, 0.2):
        noisier = _noisified_mubs(2, 1.0, p)
        res = lp_feasibility(noisier, parent, tol=1e-4).residual
        assert res <= res_sharp + 1e-10
        res_sharp = res


def test_lp_rejects_dimension_mismatch():
    parent = discretize_parent(2, 50, seed=8)
    with pytest.raises(ValueError):
        lp_feasibility([random_povm(3, 2, np.random.default_rng(0))], parent)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def test_verify_matches_recorded_residual():
    parent = discretize_parent(2, 200, seed=9)
    targets = _noisified_mubs(2, 0.3, 0.6)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    assert abs(verify_certificate(cert, targets) - cert.residual) < 1e-12


def test_verify_detects_tampered_conditionals():
    parent = discretize_parent(2, 200, seed=10)
    targets = _noisified_mubs(2, 0.3, 0.6)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    # normalization-preserving tamper: permute the outcome rows
    tampered = [t.copy() for t in cert.conditionals]
    tampered[0] = tampered[0][::-1, :]
    bad = JmCertificate(
        parent=parent,
        conditionals=tuple(tampered),
        residual=cert.residual,
        status=cert.status,
        tol=cert.tol,
    )
    assert verify_certificate(bad, targets) > cert.tol
    # a zeroed column is not even a valid certificate
    broken = [t.copy() for t in cert.conditionals]
    broken[0][:, 0] = 0.0
    with pytest.raises(ValueError):
        JmCertificate(
            parent=parent,
            conditionals=tuple(broken),
            residual=cert.residual,
            status=cert.status,
            tol=cert.tol,
        )


def test_verify_rejects_shape_mismatch():
    parent = discretize_parent(2, 100, seed=11)
    targets = _noisified_mubs(2, 0.5, 0.5)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    with pytest.raises(ValueError):
        verify_certificate(cert, targets[:1])


# ---------------------------------------------------------------------------
# bridges from the explicit model
# ---------------------------------------------------------------------------


def test_exact_certificate_from_model():
    rng = np.random.default_rng(12)
    for d in (2, 3):
        m = random_povm(d, 3, rng)
        p = 0.4
        params = NoiseParams(d=d, eta=0.8 * (1 - p) ** (d - 1), p=p)
        model = build_jm_model(m, params)
        cert = exact_certificate(model, m, params)
        target = noisify_povm(m, params)
        assert cert.residual < 1e-10
        assert verify_certificate(cert, [target]) < 1e-10
        assert cert.parent.states is None  # direct-effect parent


def test_response_conditionals_mc_error():
    # hand-built conditionals on a sampled parent: residual at the level of
    # the discretization error, and the LP can only do better
    d, p = 2, 0.5
    params = NoiseParams(d=d, eta=1 - p, p=p)
    target = noisify_povm(mub_pair(d)[0], params)
    model = build_jm_model(mub_pair(d)[0], params)
    parent = discretize_parent(d, 3000, seed=13)
    table = response_conditionals(model, parent)
    assert table.shape == (3, 3000)
    assert np.max(np.abs(table.sum(axis=0) - 1.0)) < 1e-12
    hand_built = JmCertificate(
        parent=parent,
        conditionals=(table,),
        residual=0.0,
        status=FEASIBLE,
        tol=1.0,
    )
    hand_residual = verify_certificate(hand_built, [target])
    assert 0.0 < hand_residual < 0.1  # Monte Carlo error scale
    lp_residual = lp_feasibility([target], parent, tol=1e-4).residual
    assert lp_residual <= hand_residual


def test_response_conditionals_requires_atom_states():
    rng = np.random.default_rng(14)
    m = random_povm(2, 2, rng)
    params = NoiseParams(d=2, eta=0.25, p=0.5)
    model = build_jm_model(m, params)
    cert = exact_certificate(model, m, params)
    with pytest.raises(ValueError):
        response_conditionals(model, cert.parent)


# ---------------------------------------------------------------------------
# certificate document
# ---------------------------------------------------------------------------


def test_certificate_document():
    parent = discretize_parent(2, 100, seed=15)
    targets = _noisified_mubs(2, 0.5, 0.5)
    cert = lp_feasibility(targets, parent, tol=1e-4)
    doc = cert.to_document()
    assert doc["d"] == 2 and doc["n_atoms"] == 100 and doc["seed"] == 15
    assert doc["status"] == FEASIBLE and "conditionals" not in doc
    full = cert.to_document(emit_conditionals=True)
    assert len(full["conditionals"]) == 2
    assert len(full["conditionals"][0]) == 3  # outcomes of the first target


def test_certificate_validation():
    parent = discretize_parent(2, 16, seed=16)
    bad = np.full((2, 16), 0.4)  # columns sum to 0.8
    with pytest.raises(ValueError):
        JmCertificate(parent=parent, conditionals=(bad,), residual=0.0,
                      status=FEASIBLE, tol=DEFAULT_TOL)
    with pytest.raises(ValueError):
        JmCertificate(parent=parent, conditionals=(np.full((2, 16), 0.5),),
                      residual=0.0, status="bogus", tol=DEFAULT_TOL)
