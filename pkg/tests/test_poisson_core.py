"""Brackets, integrators, structure verification, trajectory IO."""

import io
import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symred import central, rigid
from symred.poisson import (
    DegenerateCaseWarning,
    DimensionMismatchError,
    IntegratorConfig,
    PoissonStructure,
    SmoothFunction,
    SolverDivergenceError,
    Trajectory,
    bracket,
    convergence_order,
    hamiltonian_vector_field,
    integrate,
    integrate_field,
    jacobi_residual,
    read_trajectory_csv,
    step,
    trajectory_csv_bytes,
    write_trajectory_csv,
)

RIGID_I = rigid.InertiaTensor(3.0, 2.0, 1.0)


def coord(i, dim=3):
    e = np.zeros(dim)
    e[i] = 1.0
    return SmoothFunction(value=lambda w: w[i], gradient=lambda w, e=e: e.copy(),
                          name=f"x{i}")


def quad(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return SmoothFunction(value=lambda w: 0.5 * w @ A @ w + b @ w,
                          gradient=lambda w: 0.5 * (A + A.T) @ w + b)


# ---------------------------------------------------------------------------
# bracket

def test_bracket_w1_w3_is_4w2():
    # {|q|^2, |p|^2} = 4 q.p in reduced coordinates
    P, _ = central.reduced_structure()
    val = bracket(P, coord(0), coord(2), np.array([1.0, 1.0, 1.0]))
    assert val == pytest.approx(4.0, abs=1e-14)


def test_bracket_antisymmetric_diagonal():
    P, _ = central.reduced_structure()
    F = quad(np.eye(3), [1.0, -2.0, 0.5])
    for w in ([1.0, 1.0, 1.0], [0.3, -0.7, 2.0]):
        assert bracket(P, F, F, np.array(w)) == pytest.approx(0.0, abs=1e-12)


def test_bracket_rigid_entry():
    # {m1, m2} at m = (0, 0, 2) reads off K_12 = -m3
    P, _, _ = rigid.rigid_body_structure(RIGID_I)
    val = bracket(P, coord(0), coord(1), np.array([0.0, 0.0, 2.0]))
    assert val == pytest.approx(-2.0, abs=1e-14)


def test_bracket_dimension_mismatch():
    P, _ = central.reduced_structure()
    with pytest.raises(DimensionMismatchError):
        bracket(P, coord(0), coord(1), np.array([1.0, 2.0]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=18, max_size=18),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_bracket_antisymmetry_property(coeffs, wlist):
    P, _ = central.reduced_structure()
    c = np.array(coeffs)
    F = quad(c[:9].reshape(3, 3), c[9:12])
    G = quad(c[9:].reshape(3, 3), c[:3])
    w = np.array(wlist)
    assert bracket(P, F, G, w) == pytest.approx(-bracket(P, G, F, w), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=12, max_size=12),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_bracket_leibniz_property(coeffs, wlist):
    P, _, _ = rigid.rigid_body_structure(RIGID_I)
    c = np.array(coeffs)
    F = quad(np.outer(c[:3], c[:3]), c[3:6])
    G = quad(np.diag(c[6:9]), c[9:12])
    H = quad(np.eye(3), c[:3])
    GH = SmoothFunction(value=lambda w: G.value(w) * H.value(w),
                        gradient=lambda w: G.grad(w) * H.value(w) + H.grad(w) * G.value(w))
    w = np.array(wlist)
    lhs = bracket(P, F, GH, w)
    rhs = bracket(P, F, G, w) * H(w) + bracket(P, F, H, w) * G(w)
    assert lhs == pytest.approx(rhs, abs=1e-8, rel=1e-8)


# ---------------------------------------------------------------------------
# Hamiltonian vector field

def test_field_rigid_example():
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    npt.assert_allclose(hamiltonian_vector_field(P, H, np.array([0.0, 1.0, 1.0])),
                        [0.5, 0.0, 0.0], atol=1e-15)


def test_field_vanishes_on_casimirs():
    P, _, C = rigid.rigid_body_structure(RIGID_I)
    Pc, Cc = central.reduced_structure()
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = rng.normal(size=3)
        npt.assert_allclose(hamiltonian_vector_field(P, C, m), 0.0, atol=1e-13)
        npt.assert_allclose(hamiltonian_vector_field(Pc, Cc, m), 0.0, atol=1e-13)


def test_field_kepler_circular_point_is_equilibrium():
    # oracle: minimize H over the leaf C = 0.6 (exponential chart) and
    # confirm the minimizer is (C^2, 0, C^-1/2) before asserting the field
    from scipy.optimize import minimize

    Hk = central.builtin_hamiltonian("kepler")

    def on_leaf(z):
        w2, u = z
        s = np.sqrt(0.6 + w2 * w2)
        return Hk(np.array([s * np.exp(u), w2, s * np.exp(-u)]))

    res = minimize(on_leaf, x0=[0.1, -0.5], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14})
    w2, u = res.x
    s = np.sqrt(0.6 + w2 * w2)
    wmin = np.array([s * np.exp(u), w2, s * np.exp(-u)])
    npt.assert_allclose(wmin, [0.36, 0.0, 5.0 / 3.0], atol=1e-5)

    P, _ = central.reduced_structure()
    npt.assert_allclose(
        hamiltonian_vector_field(P, Hk, np.array([0.36, 0.0, 5.0 / 3.0])),
        0.0, atol=1e-13)


# ---------------------------------------------------------------------------
# stepping

def test_step_constant_hamiltonian_is_identity():
    P, _ = central.reduced_structure()
    Hconst = SmoothFunction(value=lambda w: 42.0, gradient=lambda w: np.zeros(3))
    w = np.array([1.0, 0.5, 2.0])
    for method in ("rk4", "implicit_midpoint"):
        out = step(P, Hconst, w, IntegratorConfig(method, 0.1))
        npt.assert_allclose(out, w, atol=1e-15)


def test_step_equilibrium_fixed_point():
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    m = np.array([1.0, 0.0, 0.0])
    for method in ("rk4", "implicit_midpoint"):
        npt.assert_allclose(step(P, H, m, IntegratorConfig(method, 0.05)), m, atol=1e-14)


def test_midpoint_step_casimir_and_rk4_cross_check():
    P, H, C = rigid.rigid_body_structure(RIGID_I)
    m0 = np.array([0.0, 1.0, 1.0])
    cfg = IntegratorConfig("implicit_midpoint", 0.01)
    m1 = step(P, H, m0, cfg)
    assert abs(C(m1) - C(m0)) <= cfg.newton_tol
    # reference: rk4 at h = 1e-5 to the same time
    _, ref = integrate_field(lambda m: rigid.euler_vector_field(RIGID_I, m),
                             m0, 0.01, 1e-5)
    npt.assert_allclose(m1, ref[-1], atol=1e-8)
    m1_rk = step(P, H, m0, IntegratorConfig("rk4", 0.01))
    npt.assert_allclose(m1_rk, ref[-1], atol=1e-10)


def test_integrate_audits_and_grid():
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    traj = integrate(P, H, np.array([0.2, 1.0, 0.3]), 1.0, IntegratorConfig(step=0.01))
    assert set(traj.audits) == {"H", "C"}
    assert len(traj) == 101
    assert traj.times[-1] == pytest.approx(1.0)
    assert np.all(np.diff(traj.times) > 0)


def test_solver_divergence_carries_time_and_iterations():
    # gradient blow-up drives the Newton iteration onto NaNs
    P, _ = central.reduced_structure()
    Hsing = SmoothFunction(
        value=lambda w: w[0] ** -8,
        gradient=lambda w: np.array([-8.0 * w[0] ** -9, 0.0, 0.0]))
    with pytest.raises(SolverDivergenceError) as exc:
        integrate(P, Hsing, np.array([0.1, 0.0, 0.1]), 10.0,
                  IntegratorConfig("implicit_midpoint", 0.5, newton_max_iter=8))
    assert exc.value.time is not None
    assert exc.value.iterations >= 1


# ---------------------------------------------------------------------------
# Jacobi residual

def test_jacobi_shipped_tensors():
    P, _, _ = rigid.rigid_body_structure(RIGID_I)
    Pc, _ = central.reduced_structure()
    assert jacobi_residual(P, np.array([1.0, 2.0, 3.0])) <= 1e-8
    assert jacobi_residual(Pc, np.array([1.0, 0.0, 1.0])) <= 1e-8


def test_jacobi_corrupted_negative_control():
    # replace K_12 = 2 w1 by w1^2 (antisymmetrically); the cyclic sum
    # becomes 8 w2 (1 - w1), nonzero away from w1 = 1
    Pc, _ = central.reduced_structure()

    def bad(w):
        K = Pc.tensor(w).copy()
        K[0, 1] = w[0] ** 2
        K[1, 0] = -w[0] ** 2
        return K

    Pbad = PoissonStructure(dim=3, tensor=bad)
    assert jacobi_residual(Pbad, np.array([2.0, 1.0, 1.0])) > 0.1
    rng = np.random.default_rng(11)
    assert max(jacobi_residual(Pbad, rng.normal(size=3) * 2) for _ in range(50)) > 0.1


# ---------------------------------------------------------------------------
# convergence order

def test_convergence_orders_rigid():
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    m0 = np.array([0.2, 1.0, 0.3])
    assert convergence_order(P, H, m0, 1.0, "rk4") == pytest.approx(4.0, abs=0.3)
    assert convergence_order(P, H, m0, 1.0, "implicit_midpoint") == pytest.approx(2.0, abs=0.3)


def test_convergence_order_degenerate():
    P, _ = central.reduced_structure()
    Hconst = SmoothFunction(value=lambda w: 1.0, gradient=lambda w: np.zeros(3))
    with pytest.warns(DegenerateCaseWarning):
        order = convergence_order(P, Hconst, np.array([1.0, 0.0, 1.0]), 1.0, "rk4")
    assert np.isnan(order)


# ---------------------------------------------------------------------------
# config and types

def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(step=-0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(newton_tol=0.0)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((3, 3)))


def test_smooth_function_fd_fallback_warns():
    with pytest.warns(DegenerateCaseWarning):
        F = SmoothFunction.from_value(lambda w: float(w @ w), name="norm2")
    npt.assert_allclose(F.grad(np.array([1.0, -2.0, 0.5])),
                        [2.0, -4.0, 1.0], atol=1e-8)


# ---------------------------------------------------------------------------
# trajectory CSV

def test_csv_round_trip_bit_exact(tmp_path):
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    traj = integrate(P, H, np.array([0.2, 1.0, 0.3]), 0.5, IntegratorConfig(step=0.05))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path, ["m1", "m2", "m3"])
    header = path.read_text().splitlines()[0]
    assert header == "t,m1,m2,m3,H,C"
    back = read_trajectory_csv(path)
    npt.assert_array_equal(back.times, traj.times)
    npt.assert_array_equal(back.states, traj.states)
    npt.assert_array_equal(back.audits["C"], traj.audits["C"])


def test_csv_seventeen_digit_format():
    P, H, _ = rigid.rigid_body_structure(RIGID_I)
    traj = integrate(P, H, np.array([1.0 / 3.0, 1.0, 0.3]), 0.1,
                     IntegratorConfig(step=0.1))
    text = trajectory_csv_bytes(traj, ["m1", "m2", "m3"]).decode()
    assert "0.33333333333333331" in text


def test_integrate_field_batched():
    f = lambda w: -w
    _, states = integrate_field(f, np.ones((4, 2)), 1.0, 1e-3)
    npt.assert_allclose(states[-1], np.exp(-1.0) * np.ones((4, 2)), atol=1e-10)
