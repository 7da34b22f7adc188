"""Euler equations, full attitude dynamics, equilibria, hammer flip."""

import numpy as np
import numpy.testing as npt
import pytest

from symred import poisson, rigid
from symred.poisson import IntegratorConfig
from symred.rigid import (
    FullRigidState,
    InertiaTensor,
    classify_equilibria,
    euler_vector_field,
    full_vector_field,
    hammer_throw,
    hat,
    integrate_full,
    linearization_eigenvalues,
    rigid_body_structure,
    rotation_angle,
    rotation_exp,
)

I321 = InertiaTensor(3.0, 2.0, 1.0)


def test_inertia_ordering_enforced():
    with pytest.raises(ValueError):
        InertiaTensor(1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        InertiaTensor(2.0, 1.0, 0.0)
    assert InertiaTensor(2.0, 2.0, 1.0).triaxial is False


def test_euler_field_examples():
    npt.assert_allclose(euler_vector_field(I321, [0.0, 1.0, 1.0]), [0.5, 0.0, 0.0])
    npt.assert_allclose(euler_vector_field(I321, [7.0, 0.0, 0.0]), 0.0, atol=1e-15)
    npt.assert_allclose(euler_vector_field(I321, [1.0, 1.0, 1.0]),
                        [0.5, -2.0 / 3.0, 1.0 / 6.0])


def test_structure_examples():
    P, H, C = rigid_body_structure(I321)
    assert P.matrix(np.array([0.0, 0.0, 2.0]))[0, 1] == pytest.approx(-2.0)
    assert C(np.array([1.0, 2.0, 2.0])) == pytest.approx(9.0)
    assert H(np.array([1.0, 1.0, 1.0])) == pytest.approx(11.0 / 12.0)


def test_euler_equals_bracket_form_randomized():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        I = InertiaTensor(*np.sort(rng.uniform(0.5, 5.0, 3))[::-1])
        P, H, _ = rigid_body_structure(I)
        m = rng.normal(size=3)
        npt.assert_allclose(euler_vector_field(I, m),
                            poisson.hamiltonian_vector_field(P, H, m), atol=1e-12)


def test_full_field_examples():
    Qdot, mdot = full_vector_field(I321, FullRigidState(np.eye(3), np.zeros(3)))
    npt.assert_allclose(Qdot, 0.0)
    npt.assert_allclose(mdot, 0.0)

    sphere = InertiaTensor(1.0, 1.0, 1.0)
    _, mdot = full_vector_field(sphere, FullRigidState(np.eye(3), np.array([0.3, -1.0, 2.0])))
    npt.assert_allclose(mdot, 0.0, atol=1e-15)

    s = FullRigidState(np.eye(3), np.array([0.0, 1.0, 1.0]))
    Qdot, mdot = full_vector_field(I321, s)
    npt.assert_allclose(mdot, euler_vector_field(I321, s.m), atol=1e-15)
    npt.assert_allclose(Qdot, hat(s.m / I321.as_array), atol=1e-15)


def test_full_reduces_to_euler_randomized():
    rng = np.random.default_rng(1)
    for _ in range(200):
        I = InertiaTensor(*np.sort(rng.uniform(0.5, 5.0, 3))[::-1])
        m = rng.normal(size=3)
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        _, mdot = full_vector_field(I, FullRigidState(Q, m))
        npt.assert_allclose(mdot, euler_vector_field(I, m), atol=1e-12)


def test_rotation_exp_matches_series_and_is_orthogonal():
    rng = np.random.default_rng(2)
    for _ in range(50):
        v = rng.normal(size=3)
        R = rotation_exp(v)
        npt.assert_allclose(R.T @ R, np.eye(3), atol=1e-14)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
        #角 agreement with the scaling-and-squaring exponential
        from scipy.linalg import expm

        npt.assert_allclose(R, expm(hat(v)), atol=1e-12)


def test_steady_rotation_about_major_axis():
    a = 0.7
    s0 = FullRigidState(np.eye(3), np.array([a, 0.0, 0.0]))
    traj = integrate_full(I321, s0, 5.0, IntegratorConfig(step=1e-3))
    rate = a / I321.I1
    Qs = traj.states[:, :9].reshape(-1, 3, 3)
    for idx in (1000, 2500, 5000):
        t = traj.times[idx]
        npt.assert_allclose(Qs[idx], rotation_exp(t * rate * np.array([1.0, 0, 0])),
                            atol=1e-9)
    npt.assert_allclose(traj.states[:, 9:], s0.m, atol=1e-12)


def test_full_integration_conservation_audits():
    s0 = FullRigidState(np.eye(3), np.array([0.01, 1.0, 0.01]))
    traj = integrate_full(I321, s0, 50.0, IntegratorConfig(step=1e-3))
    Qm = np.stack([traj.audits[k] for k in ("Qm1", "Qm2", "Qm3")], axis=1)
    assert np.linalg.norm(Qm - Qm[0], axis=1).max() <= 1e-6
    assert np.abs(traj.audits["C"] - traj.audits["C"][0]).max() <= 1e-9
    Qs = traj.states[::500, :9].reshape(-1, 3, 3)
    assert max(np.linalg.norm(Q.T @ Q - np.eye(3)) for Q in Qs) <= 1e-12


def test_hammer_equilibrium_start_reports_empty():
    s0 = FullRigidState(np.eye(3), np.array([0.0, 1.0, 0.0]))
    _, rep = hammer_throw(I321, s0, 5.0, IntegratorConfig(step=1e-2))
    assert rep.classification == "equilibrium"
    assert rep.first_sign_change is None
    assert rep.twist_angles == ()


def test_hammer_transit_twist_near_pi():
    s0 = FullRigidState(np.eye(3), np.array([1e-3, 1.0, 1e-3]))
    traj, rep = hammer_throw(I321, s0, 60.0, IntegratorConfig(step=2e-3))
    assert rep.classification == "heteroclinic transit"
    assert rep.first_sign_change is not None
    assert len(rep.twist_angles) >= 1
    assert abs(rep.twist_angles[0] - np.pi) <= 0.3
    # the flip axis is orthogonal to the spatial momentum
    assert all(a <= 0.05 for a in rep.twist_axis_alignment)


def test_hammer_stable_axis_start():
    s0 = FullRigidState(np.eye(3), np.array([1.0, 1e-3, 1e-3]))
    _, rep = hammer_throw(I321, s0, 30.0, IntegratorConfig(step=2e-3))
    assert rep.classification == "stable oscillation"
    assert rep.max_momentum_deviation <= 0.1


def test_classify_equilibria_labels():
    labels = {tuple(np.sign(p).astype(int)): lab for p, lab in classify_equilibria(I321)}
    assert labels[(1, 0, 0)] == "stable"
    assert labels[(0, 1, 0)] == "unstable"
    assert labels[(0, 0, 1)] == "stable"

    sym = classify_equilibria(InertiaTensor(2.0, 2.0, 1.0))
    tags = {tuple(np.abs(np.sign(p)).astype(int)): lab for p, lab in sym}
    assert tags[(1, 0, 0)] == "degenerate"
    assert tags[(0, 1, 0)] == "degenerate"
    assert tags[(0, 0, 1)] == "stable"

    sphere = classify_equilibria(InertiaTensor(1.0, 1.0, 1.0))
    assert all(lab == "degenerate" for _, lab in sphere)


def test_linearization_cross_checks_labels():
    # intermediate axis: a positive real eigenvalue; major axis: imaginary pair
    eig2 = linearization_eigenvalues(I321, [0.0, 1.0, 0.0])
    assert max(e.real for e in eig2) > 0.1
    eig1 = linearization_eigenvalues(I321, [1.0, 0.0, 0.0])
    assert max(abs(e.real) for e in eig1) < 1e-6
    assert max(abs(e.imag) for e in eig1) > 0.1


def test_reduced_trajectory_stays_on_sphere_and_energy_level():
    P, H, C = rigid_body_structure(I321)
    traj = poisson.integrate(P, H, np.array([0.2, 1.0, 0.3]), 20.0,
                             IntegratorConfig("implicit_midpoint", 1e-2))
    assert np.abs(traj.audits["C"] - traj.audits["C"][0]).max() <= 1e-9
    assert np.abs(traj.audits["H"] - traj.audits["H"][0]).max() <= 1e-6


def test_rotation_angle():
    assert rotation_angle(np.eye(3)) == pytest.approx(0.0)
    assert rotation_angle(rotation_exp(np.array([0.0, 0.0, np.pi]))) == pytest.approx(np.pi)
    assert rotation_angle(rotation_exp(np.array([0.4, 0.0, 0.0]))) == pytest.approx(0.4)


def test_attitude_validation():
    with pytest.raises(ValueError):
        FullRigidState(2 * np.eye(3), np.zeros(3))
    refl = np.diag([-1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        FullRigidState(refl, np.zeros(3))
