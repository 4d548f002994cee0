"""Tests for dark-state detection: cluster-rank route, brute-force route,
and the helpers that compare them."""

import json
import math

import numpy as np
import pytest

from cavitydark.arrowhead import ArrowheadForm, to_arrowhead
from cavitydark.darkstates import (
    analyze_subspace,
    brute_force_dark_states,
    detect,
    orthogonalize,
    reports_agree,
    subspace_angle,
)
from cavitydark.hamiltonian import SystemParams, build_hamiltonian

S2, S3, S6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)


def subspace(n_atoms, g, excitation, v=0.5, delta_a=0.0):
    params = SystemParams(n_atoms=n_atoms, delta_a=delta_a, g=g, V=v)
    return build_hamiltonian(params, excitation=excitation)


def detect_count(n_atoms, g, excitation, **kwargs):
    return detect(to_arrowhead(subspace(n_atoms, g, excitation, **kwargs))).total_dark


# ----------------------------------------------------------- count table


@pytest.mark.parametrize(
    "g, expected",
    [
        ([1.0, 1.0], 1),
        ([1.0, -1.0], 1),
        ([1.3, -1.3], 1),
        ([1.0, 0.7], 0),
        ([1.0, -0.4], 0),
    ],
)
def test_two_atom_single_excitation_counts(g, expected):
    assert detect_count(2, g, 1) == expected


def test_three_atom_single_excitation_counts():
    assert detect_count(3, [1.0, 0.8, 1.5], 1) == 1
    # balanced couplings: the symmetric state decouples too
    assert detect_count(3, [1.0, 0.9, -1.9], 1) == 2


def test_three_atom_double_excitation_has_no_dark_states():
    assert detect_count(3, [1.0, 0.8, 1.5], 2) == 0
    assert detect_count(3, [1.0, 0.9, -1.9], 2) == 0


def test_four_atom_single_excitation_counts():
    assert detect_count(4, [1.0, 0.8, 1.5, 1.2], 1) == 2
    assert detect_count(4, [1.0, 0.8, 1.5, -3.3], 1) == 3


@pytest.mark.parametrize(
    "g, expected",
    [
        ([1.0, 2.0, 2.0, -1.0], 1),   # g2 = g3, g1 = -g4
        ([1.0, 2.0, -1.0, 2.0], 1),   # g2 = g4, g1 = -g3
        ([1.0, -1.0, 2.0, 2.0], 1),   # g3 = g4, g1 = -g2
        ([-1.0, 1.0, 1.0, 1.0], 2),   # all three pair conditions at once
        ([1.0, 0.8, 1.5, 1.2], 0),
        ([1.0, 2.0, 2.1, 1.0], 0),    # near-miss of the pair conditions
    ],
)
def test_four_atom_double_excitation_counts(g, expected):
    assert detect_count(4, g, 2) == expected


def test_four_atom_triple_excitation_has_no_dark_states():
    assert detect_count(4, [1.0, 0.8, 1.5, 1.2], 3) == 0
    assert detect_count(4, [-1.0, 1.0, 1.0, 1.0], 3) == 0


@pytest.mark.parametrize(
    "n_atoms, excitation",
    [(2, 2), (2, 3), (3, 3), (3, 5), (4, 4), (4, 6), (5, 5)],
)
def test_saturated_subspaces_have_no_dark_states(n_atoms, excitation):
    g = 0.5 + 0.25 * np.arange(n_atoms)
    assert detect_count(n_atoms, list(g), excitation) == 0


@pytest.mark.parametrize("n_atoms", range(2, 9))
def test_generic_single_excitation_count_scales_with_atom_number(n_atoms):
    rng = np.random.default_rng(100 + n_atoms)
    g = rng.uniform(0.5, 2.0, n_atoms)  # positive: no accidental cancellations
    assert detect_count(n_atoms, g, 1) == n_atoms - 2


def test_cluster_bookkeeping_four_atoms():
    report = detect(to_arrowhead(subspace(4, [1.0, 0.8, 1.5, 1.2], 1)))
    # clusters come back in ascending eigenvalue order; for V > 0 the
    # (N-1)-fold manifold sits below the symmetric state
    assert [c.size for c in report.clusters] == [3, 1]
    assert [c.rank for c in report.clusters] == [1, 1]
    assert [c.dark_dim for c in report.clusters] == [2, 0]
    assert report.clusters[0].eigenvalue == pytest.approx(-0.5)
    assert report.clusters[1].eigenvalue == pytest.approx(1.5)


# ------------------------------------------------------ explicit vectors


def test_two_atom_dark_vector_and_energy():
    report = detect(to_arrowhead(subspace(2, [1.0, 1.0], 1)))
    assert report.total_dark == 1
    assert report.eigenvalues[0] == pytest.approx(-0.5)
    expected = np.array([0.0, -1.0, 1.0]) / S2  # |1,gg>, |0,eg>, |0,ge>
    overlap = abs(expected @ report.vectors[:, 0])
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_three_atom_dark_vector_matches_closed_form():
    g1, g2, g3 = 1.0, 0.8, 1.5
    report = detect(to_arrowhead(subspace(3, [g1, g2, g3], 1)))
    assert report.total_dark == 1
    G2 = (-g1 + g2) / S2
    G3 = (-g1 - g2 + 2 * g3) / S6
    l2 = np.array([-1 / S2, 1 / S2, 0.0])
    l3 = np.array([-1 / S6, -1 / S6, 2 / S6])
    bare = G3 * l2 - G2 * l3
    bare /= np.linalg.norm(bare)
    expected = np.concatenate([[0.0], bare])
    assert abs(expected @ report.vectors[:, 0]) == pytest.approx(1.0, abs=1e-12)
    assert report.eigenvalues[0] == pytest.approx(-0.5)


def test_four_atom_pair_dark_vector():
    # g2 = g3 and g1 = -g4: one dark pair state with equal weights on the
    # four swap-connected double excitations
    report = detect(to_arrowhead(subspace(4, [1.0, 2.0, 2.0, -1.0], 2)))
    assert report.total_dark == 1
    # lower pair basis order: eegg, egeg, egge, geeg, gege, ggee
    bare = 0.5 * np.array([-1.0, 1.0, 0.0, 0.0, -1.0, 1.0])
    expected = np.concatenate([np.zeros(5), bare])
    assert abs(expected @ report.vectors[:, 0]) == pytest.approx(1.0, abs=1e-12)
    assert report.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)


def test_four_atom_pair_dark_plane():
    report = detect(to_arrowhead(subspace(4, [-1.0, 1.0, 1.0, 1.0], 2)))
    assert report.total_dark == 2
    v_a = 0.5 * np.array([-1.0, 1.0, 0.0, 0.0, -1.0, 1.0])
    v_b = np.array([-1.0, -1.0, 2.0, -2.0, 1.0, 1.0]) / (2 * S3)
    span = np.zeros((11, 2))
    span[5:, 0] = v_a
    span[5:, 1] = v_b
    assert subspace_angle(span, report.vectors) <= 1e-10


def test_dark_vectors_are_orthonormal():
    for g in ([1.0, 0.9, -1.9], [1.0, 0.8, 1.5, -3.3], [-1.0, 1.0, 1.0, 1.0]):
        n_atoms = len(g)
        excitation = 2 if n_atoms == 4 and g[0] < 0 else 1
        report = detect(to_arrowhead(subspace(n_atoms, g, excitation)))
        V = report.vectors
        np.testing.assert_allclose(
            V.conj().T @ V, np.eye(report.total_dark), atol=1e-12
        )


def test_detected_vectors_are_true_eigenvectors():
    cases = [
        (2, [1.0, 1.0], 1),
        (3, [1.0, 0.9, -1.9], 1),
        (4, [1.0, 0.8, 1.5, 1.2], 1),
        (4, [-1.0, 1.0, 1.0, 1.0], 2),
    ]
    for n_atoms, g, excitation in cases:
        ham = subspace(n_atoms, g, excitation, delta_a=0.4)
        report = detect(to_arrowhead(ham))
        assert report.total_dark > 0
        scale = max(1.0, np.abs(ham.matrix).max())
        nu = ham.basis.n_upper
        for k in range(report.total_dark):
            v = report.vectors[:, k]
            resid = ham.matrix @ v - report.eigenvalues[k] * v
            assert np.abs(resid).max() <= 1e-9 * scale
            assert np.abs(v[:nu]).max() <= 1e-10


def test_dark_eigenvalues_descend():
    report = detect(to_arrowhead(subspace(3, [1.0, 0.9, -1.9], 1)))
    assert report.total_dark == 2
    assert report.eigenvalues[0] == pytest.approx(1.0)   # symmetric branch
    assert report.eigenvalues[1] == pytest.approx(-0.5)  # degenerate branch
    assert np.all(np.diff(report.eigenvalues) <= 1e-12)


def test_detect_deterministic():
    ham = subspace(4, [1.0, 0.8, 1.5, -3.3], 1)
    r1 = detect(to_arrowhead(ham))
    r2 = detect(to_arrowhead(ham))
    np.testing.assert_array_equal(r1.vectors, r2.vectors)
    np.testing.assert_array_equal(r1.eigenvalues, r2.eigenvalues)


def test_sign_convention_does_not_move_dark_projector():
    rng = np.random.default_rng(7)
    arrow = to_arrowhead(subspace(4, [1.0, 0.8, 1.5, -3.3], 1))
    signs = rng.choice([-1.0, 1.0], size=arrow.n_lower)
    flipped = ArrowheadForm(
        basis=arrow.basis,
        upper_block=arrow.upper_block,
        eigenvalues=arrow.eigenvalues,
        couplings=arrow.couplings * signs[None, :],
        lower_transform=arrow.lower_transform * signs[:, None],
    )
    p0 = detect(arrow).projector()
    p1 = detect(flipped).projector()
    assert np.abs(p0 - p1).max() <= 1e-10


# ------------------------------------------------------ brute-force route


def test_brute_force_matches_known_counts():
    assert brute_force_dark_states(subspace(2, [1.0, 1.0], 1)).total_dark == 1
    assert brute_force_dark_states(subspace(3, [1.0, 0.8, 1.5], 1)).total_dark == 1
    assert brute_force_dark_states(subspace(3, [1.0, 0.9, -1.9], 1)).total_dark == 2
    assert brute_force_dark_states(subspace(3, [1.0, 0.8, 1.5], 2)).total_dark == 0
    assert brute_force_dark_states(subspace(4, [1.0, 0.8, 1.5, 1.2], 3)).total_dark == 0


def test_brute_force_with_decoupled_cavity():
    # zero couplings leave every photon-free state dark
    ham = subspace(3, [0.0, 0.0, 0.0], 1, delta_a=0.3)
    report = brute_force_dark_states(ham)
    assert report.total_dark == ham.basis.n_lower == 3
    arrow_report = detect(to_arrowhead(ham))
    assert arrow_report.total_dark == 3
    ok, angle = reports_agree(arrow_report, report)
    assert ok and angle <= 1e-7


def test_routes_agree_on_random_draws():
    rng = np.random.default_rng(123)
    checked = 0
    for _ in range(40):
        n_atoms = int(rng.integers(2, 6))
        excitation = int(rng.integers(1, n_atoms + 1))
        g = rng.uniform(-2, 2, n_atoms)
        if rng.random() < 0.3:
            g = g - g.mean()  # land on the balanced-coupling surface
        v = float(rng.uniform(0.1, 1.5))
        ham = subspace(n_atoms, g, excitation, v=v,
                       delta_a=float(rng.standard_normal()))
        a = detect(to_arrowhead(ham))
        b = brute_force_dark_states(ham)
        ok, angle = reports_agree(a, b)
        assert ok, (n_atoms, excitation, g, angle)
        checked += 1
    assert checked == 40


def test_routes_agree_on_engineered_dark_surfaces():
    cases = [
        (2, [1.0, -1.0], 1),
        (4, [1.0, 2.0, 2.0, -1.0], 2),
        (4, [1.0, 2.0, -1.0, 2.0], 2),
        (4, [1.0, -1.0, 2.0, 2.0], 2),
        (4, [-1.0, 1.0, 1.0, 1.0], 2),
        (5, [1.0, 0.4, -0.7, 1.1, -1.8], 1),
    ]
    for n_atoms, g, excitation in cases:
        ham = subspace(n_atoms, g, excitation)
        ok, angle = reports_agree(
            detect(to_arrowhead(ham)), brute_force_dark_states(ham)
        )
        assert ok and angle <= 1e-7, (n_atoms, g, excitation, angle)


def test_ground_subspace_is_trivially_dark():
    ham = subspace(3, [1.0, 0.8, 1.5], 0)
    a = detect(to_arrowhead(ham))
    b = brute_force_dark_states(ham)
    assert a.total_dark == b.total_dark == 1
    assert reports_agree(a, b)[0]


def test_method_labels_differ():
    ham = subspace(2, [1.0, 1.0], 1)
    assert detect(to_arrowhead(ham)).method == "arrowhead-rank"
    assert brute_force_dark_states(ham).method == "eigenspace-amplitude"


# --------------------------------------------------------------- reports


def test_report_projector_is_idempotent():
    report = detect(to_arrowhead(subspace(4, [1.0, 0.8, 1.5, 1.2], 1)))
    P = report.projector()
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-14)
    assert np.trace(P).real == pytest.approx(report.total_dark, abs=1e-12)


def test_report_json_round_trip():
    report = detect(to_arrowhead(subspace(3, [1.0, 0.9, -1.9], 1)))
    text = report.to_json()
    data = json.loads(text)
    assert data["total_dark"] == 2
    assert data["method"] == "arrowhead-rank"
    assert data["n_atoms"] == 3 and data["excitation"] == 1
    assert len(data["dark_states"]) == 2
    amps = data["dark_states"][0]["amplitudes"]
    assert set(amps) == {"1,ggg", "0,egg", "0,geg", "0,gge"}
    assert amps["1,ggg"] == [0.0, 0.0]
    # keys are emitted sorted, so equal reports serialize identically
    assert text == json.dumps(data, indent=2, sort_keys=True)


# --------------------------------------------------------- orthogonalize


def test_orthogonalize_keeps_orthonormal_input():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    out = orthogonalize(q.astype(complex))
    assert np.abs(out - q).max() <= 1e-12


def test_orthogonalize_single_vector():
    out = orthogonalize(np.array([3.0, 4.0]))
    assert out.shape == (2, 1)
    np.testing.assert_allclose(out[:, 0], [0.6, 0.8], atol=1e-15)


def test_orthogonalize_preserves_first_direction_and_span():
    rng = np.random.default_rng(4)
    vecs = [rng.standard_normal(5) for _ in range(3)]
    out = orthogonalize(vecs)
    assert out.shape == (5, 3)
    np.testing.assert_allclose(
        out.conj().T @ out, np.eye(3), atol=1e-12
    )
    first = vecs[0] / np.linalg.norm(vecs[0])
    np.testing.assert_allclose(out[:, 0], first, atol=1e-12)
    q, _ = np.linalg.qr(np.stack(vecs, axis=1))
    assert subspace_angle(q[:, :3].astype(complex), out) <= 1e-10


def test_orthogonalize_drops_dependent_vectors_with_warning():
    v1 = np.array([1.0, 0.0, 0.0])
    v2 = np.array([0.0, 1.0, 0.0])
    with pytest.warns(UserWarning, match="dependent"):
        out = orthogonalize([v1, v2, v1 + v2])
    assert out.shape == (3, 2)
    np.testing.assert_allclose(out.conj().T @ out, np.eye(2), atol=1e-14)


def test_orthogonalize_drops_zero_vector():
    with pytest.warns(UserWarning, match="dropped 1"):
        out = orthogonalize([np.array([1.0, 1.0]), np.zeros(2)])
    assert out.shape == (2, 1)


# -------------------------------------------------------- subspace angle


def test_subspace_angle_identical_spans():
    rng = np.random.default_rng(9)
    q, _ = np.linalg.qr(rng.standard_normal((7, 3)))
    assert subspace_angle(q, q) <= 1e-7
    # a rotation within the span leaves the projector alone
    rot, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert subspace_angle(q, q @ rot) <= 1e-7


@pytest.mark.parametrize("theta", [0.3, 1e-4, 1e-9])
def test_subspace_angle_recovers_planted_rotation(theta):
    a = np.zeros((4, 1))
    a[0, 0] = 1.0
    b = np.zeros((4, 1))
    b[0, 0] = np.cos(theta)
    b[1, 0] = np.sin(theta)
    assert subspace_angle(a, b) == pytest.approx(theta, rel=1e-6)


def test_subspace_angle_orthogonal_spans():
    a = np.array([[1.0], [0.0]])
    b = np.array([[0.0], [1.0]])
    assert subspace_angle(a, b) == pytest.approx(np.pi / 2)


def test_subspace_angle_dimension_mismatch():
    with pytest.raises(ValueError, match="differ"):
        subspace_angle(np.eye(3)[:, :1], np.eye(3)[:, :2])


def test_subspace_angle_empty():
    assert subspace_angle(np.zeros((4, 0)), np.zeros((4, 0))) == 0.0


def test_reports_agree_count_mismatch_is_nan():
    a = detect(to_arrowhead(subspace(2, [1.0, 1.0], 1)))
    b = detect(to_arrowhead(subspace(2, [1.0, 0.7], 1)))
    ok, angle = reports_agree(a, b)
    assert not ok
    assert math.isnan(angle)


# ---------------------------------------------------------- full analysis


def test_analyze_subspace_end_to_end():
    params = SystemParams(n_atoms=4, delta_a=0.0, g=[-1.0, 1.0, 1.0, 1.0], V=0.5)
    result = analyze_subspace(params, excitation=2)
    assert result.agrees
    assert result.angle <= 1e-7
    assert result.detected.total_dark == 2
    assert result.brute_force.total_dark == 2
    assert result.detected.method == "arrowhead-rank"
    assert result.brute_force.method == "eigenspace-amplitude"
    assert result.arrowhead.basis is result.hamiltonian.basis
