"""The free rigid body: reduced Euler equations, full attitude dynamics,
equilibrium classification, and the hammer-throw flip experiment.

States: body angular momentum m in R^3 (reduced) or an attitude matrix
Q in SO(3) paired with m (full).  Q maps body coordinates to spatial
coordinates, so the spatial angular momentum Q m is a Noether invariant
of the full flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poisson import (
    IntegratorConfig,
    PoissonStructure,
    SmoothFunction,
    SolverDivergenceError,
    Trajectory,
    _as_state,
    _fd_jacobian,
    _midpoint_step,
    _rk4_step,
)

__all__ = [
    "InertiaTensor",
    "FullRigidState",
    "FlipReport",
    "euler_vector_field",
    "rigid_body_structure",
    "full_vector_field",
    "integrate_full",
    "hammer_throw",
    "classify_equilibria",
    "linearization_eigenvalues",
    "hat",
    "rotation_exp",
    "rotation_angle",
]


@dataclass(frozen=True)
class InertiaTensor:
    """Principal moments of inertia, ordered I1 >= I2 >= I3 > 0."""

    I1: float
    I2: float
    I3: float

    def __post_init__(self):
        if not (self.I1 >= self.I2 >= self.I3 > 0):
            raise ValueError("moments must satisfy I1 >= I2 >= I3 > 0")

    @property
    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3])

    @property
    def triaxial(self) -> bool:
        return self.I1 > self.I2 > self.I3


ORTHOGONALITY_TOL = 1e-9


@dataclass(frozen=True)
class FullRigidState:
    """Attitude Q in SO(3) plus body angular momentum m."""

    Q: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        m = np.asarray(self.m, dtype=float)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "m", m)
        if Q.shape != (3, 3) or m.shape != (3,):
            raise ValueError("Q must be 3x3 and m a 3-vector")
        if np.linalg.norm(Q.T @ Q - np.eye(3)) > ORTHOGONALITY_TOL:
            raise ValueError("Q is not orthogonal")
        if np.linalg.det(Q) <= 0:
            raise ValueError("Q must be a proper rotation (det > 0)")


def hat(v) -> np.ndarray:
    """The antisymmetric matrix with hat(v) u = v x u."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def rotation_exp(v) -> np.ndarray:
    """Rodrigues closed form for exp(hat(v)); exactly orthogonal up to
    round-off, with a series branch for small angles."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    V = hat(v)
    if theta < 1e-8:
        return np.eye(3) + V + 0.5 * (V @ V)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * V + b * (V @ V)


def rotation_angle(R) -> float:
    """Rotation angle in [0, pi] of a proper rotation matrix."""
    c = 0.5 * (np.trace(np.asarray(R, dtype=float)) - 1.0)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def euler_vector_field(I: InertiaTensor, m) -> np.ndarray:
    """Right-hand side of the Euler equations for body momentum m."""
    m = _as_state(m)
    return np.array([
        (1.0 / I.I3 - 1.0 / I.I2) * m[1] * m[2],
        (1.0 / I.I1 - 1.0 / I.I3) * m[2] * m[0],
        (1.0 / I.I2 - 1.0 / I.I1) * m[0] * m[1],
    ])


def rigid_body_structure(I: InertiaTensor) -> tuple[PoissonStructure, SmoothFunction, SmoothFunction]:
    """Poisson tensor K(m) = hat(m), kinetic energy H, and the total
    angular momentum Casimir C(m) = |m|^2 (registered on the structure)."""
    inv = 1.0 / I.as_array
    H = SmoothFunction(
        value=lambda m: 0.5 * float(np.dot(inv * m, m)),
        gradient=lambda m: inv * m,
        name="kinetic_energy",
    )
    C = SmoothFunction(
        value=lambda m: float(np.dot(m, m)),
        gradient=lambda m: 2.0 * m,
        name="C",
    )
    P = PoissonStructure(dim=3, tensor=hat, casimirs=(C,), name="rigid_body")
    return P, H, C


def full_vector_field(I: InertiaTensor, s: FullRigidState) -> tuple[np.ndarray, np.ndarray]:
    """Attitude and momentum rates: Qdot = Q hat(omega), mdot = m x omega,
    with omega_j = m_j / I_j."""
    omega = s.m / I.as_array
    return s.Q @ hat(omega), np.cross(s.m, omega)


def _momentum_field(I: InertiaTensor):
    a1 = 1.0 / I.I3 - 1.0 / I.I2
    a2 = 1.0 / I.I1 - 1.0 / I.I3
    a3 = 1.0 / I.I2 - 1.0 / I.I1

    def f(m):
        return np.array([a1 * m[1] * m[2], a2 * m[2] * m[0], a3 * m[0] * m[1]])

    return f


def integrate_full(I: InertiaTensor, s0: FullRigidState, t_end: float,
                   cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the full attitude dynamics.

    The momentum advances by the configured Poisson integrator; the
    attitude advances by the closed-form rotation exponential at the
    midpoint body frequency, Q+ = Q exp(h hat(omega_mid)), so Q stays in
    SO(3) to round-off regardless of step size.

    Trajectory states are 12-vectors (Q row-major, then m); audits hold
    C(m), H(m) and the spatial angular momentum Qm componentwise.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    inv = 1.0 / I.as_array
    f = _momentum_field(I)
    n = max(1, int(round(t_end / cfg.step)))
    h = t_end / n
    run_cfg = IntegratorConfig(cfg.method, h, cfg.newton_tol, cfg.newton_max_iter)

    Q = s0.Q.copy()
    m = s0.m.copy()
    states = np.empty((n + 1, 12))
    states[0, :9] = Q.reshape(-1)
    states[0, 9:] = m
    times = h * np.arange(n + 1)
    times[-1] = t_end
    for i in range(n):
        try:
            if cfg.method == "rk4":
                m_new = _rk4_step(f, m, h)
            else:
                m_new = _midpoint_step(f, m, run_cfg)
        except SolverDivergenceError as exc:
            raise SolverDivergenceError(
                f"{exc} at t = {times[i]:.6g}",
                iterations=exc.iterations, residual=exc.residual, time=float(times[i]),
            ) from exc
        omega_mid = 0.5 * (m + m_new) * inv
        Q = Q @ rotation_exp(h * omega_mid)
        m = m_new
        states[i + 1, :9] = Q.reshape(-1)
        states[i + 1, 9:] = m

    ms = states[:, 9:]
    Qs = states[:, :9].reshape(-1, 3, 3)
    spatial = np.einsum("nij,nj->ni", Qs, ms)
    audits = {
        "H": 0.5 * np.einsum("ni,ni->n", ms * inv, ms),
        "C": np.einsum("ni,ni->n", ms, ms),
        "Qm1": spatial[:, 0],
        "Qm2": spatial[:, 1],
        "Qm3": spatial[:, 2],
    }
    return Trajectory(times=times, states=states, audits=audits)


@dataclass(frozen=True)
class FlipReport:
    """Summary of a hammer-throw run.

    classification: "equilibrium", "stable oscillation", or
    "heteroclinic transit".  For transits, ``twist_angles`` holds the
    rotation angle of the net attitude change between consecutive
    near-pole passages of m2 (the geometric-phase proxy; approaches pi in
    the near-heteroclinic limit), and ``twist_axis_alignment`` the dot
    product of each rotation axis with the spatial momentum direction
    (near zero for a clean flip).
    """

    classification: str
    first_sign_change: float | None
    extremum_times: tuple[float, ...]
    twist_angles: tuple[float, ...]
    twist_axis_alignment: tuple[float, ...]
    max_momentum_deviation: float

    @property
    def transited(self) -> bool:
        return self.classification == "heteroclinic transit"


def _extremum_indices(m2: np.ndarray, level: float) -> list[int]:
    """One index per contiguous run with |m2| >= level: the run's argmax of |m2|."""
    above = np.abs(m2) >= level
    idx = []
    start = None
    for i, flag in enumerate(above):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            seg = np.abs(m2[start:i])
            idx.append(start + int(np.argmax(seg)))
            start = None
    if start is not None:
        seg = np.abs(m2[start:])
        idx.append(start + int(np.argmax(seg)))
    return idx


def hammer_throw(I: InertiaTensor, s0: FullRigidState, t_end: float,
                 cfg: IntegratorConfig | None = None) -> tuple[Trajectory, FlipReport]:
    """Run the flip experiment and measure the geometric phase proxy.

    Consecutive near-pole passages of m2 (per-run maxima of |m2| above
    0.8 |m|) are paired; for each pair the net rotation
    R = Q(t_b) Q(t_a)^T is computed and its rotation angle reported.  For
    a transit the body axis tracking m2 reverses against the fixed
    spatial momentum, so R is a near-half-turn about an axis orthogonal
    to it; the angle approaches pi in the heteroclinic limit.
    """
    traj = integrate_full(I, s0, t_end, cfg)
    ms = traj.states[:, 9:]
    m2 = ms[:, 1]
    radius = float(np.linalg.norm(s0.m))

    dev = np.linalg.norm(ms - s0.m, axis=1)
    max_dev = float(dev.max())

    if radius == 0.0 or float(np.abs(ms - s0.m).max()) < 1e-12 * (1.0 + radius):
        return traj, FlipReport("equilibrium", None, (), (), (), max_dev)

    sign_change = None
    s = np.sign(m2)
    nz = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if nz.size:
        i = int(nz[0])
        # linear interpolation of the crossing time
        t0, t1 = traj.times[i], traj.times[i + 1]
        sign_change = float(t0 + (t1 - t0) * m2[i] / (m2[i] - m2[i + 1]))

    ext = _extremum_indices(m2, 0.8 * radius)
    transit_pairs = [
        (a, b) for a, b in zip(ext, ext[1:]) if np.sign(m2[a]) != np.sign(m2[b])
    ]

    twists = []
    alignments = []
    if transit_pairs:
        Qs = traj.states[:, :9].reshape(-1, 3, 3)
        mu = s0.Q @ s0.m
        mu_hat = mu / np.linalg.norm(mu)
        for a, b in transit_pairs:
            R = Qs[b] @ Qs[a].T
            twists.append(rotation_angle(R))
            # rotation axis from the antisymmetric part; degenerate only at angle 0 or pi
            axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
            nrm = np.linalg.norm(axis)
            if nrm < 1e-12:
                # angle pi: axis from the symmetric part, R = 2 nn^T - I
                k = int(np.argmax(np.diag(R)))
                axis = R[:, k] + np.eye(3)[:, k]
                nrm = np.linalg.norm(axis)
            alignments.append(float(abs(axis @ mu_hat) / nrm))
        classification = "heteroclinic transit"
    elif max_dev <= 0.25 * radius:
        classification = "stable oscillation"
    else:
        classification = "stable oscillation" if sign_change is None else "heteroclinic transit"

    ext_times = tuple(float(traj.times[i]) for i in ext)
    return traj, FlipReport(
        classification=classification,
        first_sign_change=sign_change,
        extremum_times=ext_times,
        twist_angles=tuple(twists),
        twist_axis_alignment=tuple(alignments),
        max_momentum_deviation=max_dev,
    )


def classify_equilibria(I: InertiaTensor, radius: float = 1.0) -> list[tuple[np.ndarray, str]]:
    """The six principal-axis rotations on the sphere |m| = radius.

    For a triaxial body, axes 1 and 3 are centers and axis 2 a saddle
    (intermediate axis theorem).  Coinciding moments produce circles of
    equilibria, flagged "degenerate".
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    labels = ["stable", "unstable", "stable"]
    if I.I1 == I.I2 == I.I3:
        labels = ["degenerate"] * 3
    elif I.I1 == I.I2:
        labels = ["degenerate", "degenerate", "stable"]
    elif I.I2 == I.I3:
        labels = ["stable", "degenerate", "degenerate"]
    out = []
    for axis, label in enumerate(labels):
        for sign in (+1.0, -1.0):
            p = np.zeros(3)
            p[axis] = sign * radius
            out.append((p, label))
    return out


def linearization_eigenvalues(I: InertiaTensor, m) -> np.ndarray:
    """Eigenvalues of the Euler-field Jacobian at m (cross-check audit for
    the analytic stability labels)."""
    f = _momentum_field(I)
    return np.linalg.eigvals(_fd_jacobian(f, _as_state(m)))
