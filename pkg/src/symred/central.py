"""Reduced central-force dynamics on the invariant cone.

Any rotation-invariant Hamiltonian of a point particle depends on
(q, p) only through the invariants

    w1 = |q|^2,   w2 = q . p,   w3 = |p|^2,

which obey a closed Poisson system on the cone
{w1 >= 0, w3 >= 0, w1 w3 - w2^2 >= 0} with Casimir C = w1 w3 - w2^2
(the squared angular momentum).  This module provides the invariants
map, the canonical and reduced vector fields, a catalog of reduced
Hamiltonians, and orbit reconstruction: recovering the full (q, p)
motion from a reduced trajectory plus the conserved momentum via a
one-dimensional phase integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poisson import PoissonStructure, SmoothFunction, Trajectory, _as_state

__all__ = [
    "DegenerateDataError",
    "SingularChartError",
    "ReconstructionResult",
    "PeriodDetection",
    "CONE_SLACK",
    "invariants_map",
    "in_cone",
    "canonical_vector_field",
    "reduced_structure",
    "reduced_vector_field",
    "builtin_hamiltonian",
    "builtin_names",
    "align_initial_frame",
    "collinear_initial_frame",
    "reconstruction_rate",
    "reconstruct_orbit",
    "detect_relative_periodic",
    "casimir",
]

CONE_SLACK = 1e-9  # absolute tolerance on cone membership checks


class DegenerateDataError(ValueError):
    """Reduced data on the cone boundary: use the collinear branch."""


class SingularChartError(ValueError):
    """The reconstruction chart needs w1 > 0."""


def invariants_map(q, p) -> np.ndarray:
    """(q, p) -> (|q|^2, q.p, |p|^2); lands in the cone by Cauchy-Schwarz."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.array([q @ q, q @ p, p @ p])


def casimir(w) -> float:
    w = np.asarray(w, dtype=float)
    return float(w[0] * w[2] - w[1] ** 2)


def in_cone(w, slack: float = CONE_SLACK) -> bool:
    w = np.asarray(w, dtype=float)
    return bool(w[0] >= -slack and w[2] >= -slack and casimir(w) >= -slack)


def canonical_vector_field(H: SmoothFunction, q, p) -> tuple[np.ndarray, np.ndarray]:
    """Hamilton's equations for the collective Hamiltonian H(w(q, p)):

        qdot = q dH/dw2 + 2 p dH/dw3
        pdot = -2 q dH/dw1 - p dH/dw2
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    g1, g2, g3 = H.grad(invariants_map(q, p))
    return q * g2 + 2.0 * p * g3, -2.0 * q * g1 - p * g2


def reduced_structure() -> tuple[PoissonStructure, SmoothFunction]:
    """Poisson tensor of the reduced system and its Casimir C = w1 w3 - w2^2."""
    def tensor(w):
        w1, w2, w3 = w
        return np.array([
            [0.0, 2.0 * w1, 4.0 * w2],
            [-2.0 * w1, 0.0, 2.0 * w3],
            [-4.0 * w2, -2.0 * w3, 0.0],
        ])

    C = SmoothFunction(
        value=lambda w: w[0] * w[2] - w[1] ** 2,
        gradient=lambda w: np.array([w[2], -2.0 * w[1], w[0]]),
        name="C",
    )
    P = PoissonStructure(dim=3, tensor=tensor, casimirs=(C,), name="central_force")
    return P, C


def reduced_vector_field(H: SmoothFunction, w) -> np.ndarray:
    """Chain-rule form of the reduced equations (identical to K(w) grad H):

        w1dot =  2 w1 H2 + 4 w2 H3
        w2dot = -2 w1 H1 + 2 w3 H3
        w3dot = -4 w2 H1 - 2 w3 H2
    """
    w = _as_state(w)
    g1, g2, g3 = H.grad(w)
    w1, w2, w3 = w
    return np.array([
        2.0 * w1 * g2 + 4.0 * w2 * g3,
        -2.0 * w1 * g1 + 2.0 * w3 * g3,
        -4.0 * w2 * g1 - 2.0 * w3 * g2,
    ])


# ---------------------------------------------------------------------------
# Built-in reduced Hamiltonians.

def _kepler() -> SmoothFunction:
    # full form: |p|^2 / 2 - 1 / |q|
    return SmoothFunction(
        value=lambda w: 0.5 * w[2] - w[0] ** -0.5,
        gradient=lambda w: np.array([0.5 * w[0] ** -1.5, 0.0, 0.5]),
        name="kepler",
    )


def _homoclinic() -> SmoothFunction:
    # On the leaf C = alpha, the level H = 2 alpha is a figure-eight
    # separatrix through the saddle (sqrt(alpha), 0, sqrt(alpha)).
    return SmoothFunction(
        value=lambda w: w[0] ** 2 + w[2] ** 2 + w[1] ** 4 - 4.0 * w[1] ** 2,
        gradient=lambda w: np.array([2.0 * w[0], 4.0 * w[1] ** 3 - 8.0 * w[1], 2.0 * w[2]]),
        name="homoclinic",
    )


def _homoclinic_flat() -> SmoothFunction:
    # variant linear in w1, w3: full form |q|^2 + |p|^2 + (q.p)^4 - 4 (q.p)^2
    return SmoothFunction(
        value=lambda w: w[0] + w[2] + w[1] ** 4 - 4.0 * w[1] ** 2,
        gradient=lambda w: np.array([1.0, 4.0 * w[1] ** 3 - 8.0 * w[1], 1.0]),
        name="homoclinic_flat",
    )


def _cosine() -> SmoothFunction:
    return SmoothFunction(
        value=lambda w: float(np.sum(np.cos(w))),
        gradient=lambda w: -np.sin(w),
        name="cosine",
    )


_BUILTINS = {
    "kepler": _kepler,
    "homoclinic": _homoclinic,
    "homoclinic_flat": _homoclinic_flat,
    "cosine": _cosine,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_hamiltonian(name: str) -> SmoothFunction:
    """Catalog lookup; raises KeyError with the known names listed."""
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise KeyError(
            f"unknown Hamiltonian {name!r}; available: {', '.join(builtin_names())}"
        ) from None


# ---------------------------------------------------------------------------
# Reconstruction.

def align_initial_frame(w0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical representative of the reduced point w0, with the angular
    momentum on the +z axis:

        q = (sqrt(w1), 0, 0),  p = (w2/sqrt(w1), sqrt(w3 - w2^2/w1), 0),
        mu = q x p = (0, 0, sqrt(C)).

    Requires w0 strictly inside the cone; on the boundary (C <= 0 or
    w1 = 0) q and p are collinear and the z-rotation chart degenerates.
    """
    w = _as_state(w0)
    if len(w) != 3 or not in_cone(w):
        raise ValueError(f"not a cone point: {w}")
    C = casimir(w)
    if w[0] <= 0 or C <= 0:
        raise DegenerateDataError(
            "w1 = 0 or C <= 0: q and p are collinear; use collinear_initial_frame"
        )
    q = np.array([np.sqrt(w[0]), 0.0, 0.0])
    p = np.array([w[1] / np.sqrt(w[0]), np.sqrt(w[2] - w[1] ** 2 / w[0]), 0.0])
    mu = np.array([0.0, 0.0, np.sqrt(C)])
    return q, p, mu


def collinear_initial_frame(w0) -> tuple[np.ndarray, np.ndarray]:
    """Zero-angular-momentum representative along the +x axis.

    With C = 0, q and p stay collinear forever; the chart direction is
    fixed to +x.  For w1 > 0, p = (w2/sqrt(w1)) qhat; for w1 = 0 the
    momentum magnitude is sqrt(w3).
    """
    w = _as_state(w0)
    if abs(casimir(w)) > CONE_SLACK * (1.0 + float(np.abs(w).max())):
        raise ValueError("collinear branch requires C = 0")
    e = np.array([1.0, 0.0, 0.0])
    if w[0] > 0:
        return np.sqrt(w[0]) * e, (w[1] / np.sqrt(w[0])) * e
    return 0.0 * e, np.sqrt(max(w[2], 0.0)) * e


def reconstruction_rate(H: SmoothFunction, w, mu_norm: float) -> float:
    """Angular rate of the reconstruction rotation:
    thetadot = 2 (dH/dw3)(w) |mu| / w1."""
    w = _as_state(w)
    if w[0] <= 0:
        raise SingularChartError("reconstruction chart is singular at w1 = 0")
    return float(2.0 * H.grad(w)[2] * mu_norm / w[0])


def _z_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class ReconstructionResult:
    """Phase angle series and the reconstructed full states."""

    times: np.ndarray
    theta: np.ndarray
    positions: np.ndarray  # (n, 3)
    momenta: np.ndarray    # (n, 3)
    mu: np.ndarray         # conserved angular momentum vector (z-aligned chart)


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def reconstruct_orbit(H: SmoothFunction, reduced: Trajectory, mu_norm: float) -> ReconstructionResult:
    """Lift a reduced trajectory back to phase space.

    theta(t) is the cumulative trapezoid quadrature of the
    reconstruction rate on the trajectory grid (matching the order-2
    default integrator), and the full states follow the z-rotation
    ansatz applied to the aligned representative of each w(t).
    """
    w = reduced.states
    if w.shape[1] != 3:
        raise ValueError("reduced trajectory must have 3-dimensional states")
    if np.any(w[:, 0] <= 0):
        raise SingularChartError("reduced trajectory leaves the chart (w1 -> 0)")
    rate = np.array([reconstruction_rate(H, wi, mu_norm) for wi in w])
    theta = _cumtrapz(rate, reduced.times)

    sq = np.sqrt(w[:, 0])
    radial = w[:, 1] / sq
    residual = w[:, 2] - w[:, 1] ** 2 / w[:, 0]
    transverse = np.sqrt(np.maximum(residual, 0.0))
    c, s = np.cos(theta), np.sin(theta)
    positions = np.stack([sq * c, sq * s, np.zeros_like(sq)], axis=1)
    momenta = np.stack([radial * c - transverse * s,
                        radial * s + transverse * c,
                        np.zeros_like(sq)], axis=1)
    mu = np.array([0.0, 0.0, mu_norm])
    return ReconstructionResult(times=reduced.times, theta=theta,
                                positions=positions, momenta=momenta, mu=mu)


@dataclass(frozen=True)
class PeriodDetection:
    """Outcome of first-return detection on a reduced trajectory.

    kind: "periodic" (period and phase set), "fixed_point" (relative
    equilibrium; any period works), or "no_return".
    """

    kind: str
    period: float | None = None
    phase: float | None = None


def detect_relative_periodic(H: SmoothFunction, reduced: Trajectory, mu_norm: float,
                             delta: float = 1e-6) -> PeriodDetection:
    """First return of w(t) to w(0), refined on the section through w(0).

    The crossing of the hyperplane through w(0) normal to the initial
    velocity is located by quadratic interpolation, accepted when the
    state has come back within ``delta`` (relative to |w(0)|) and the
    velocity direction matches.  Returns the period T and the phase
    theta(T) from the reconstruction quadrature.
    """
    w = reduced.states
    t = reduced.times
    w0 = w[0]
    scale = np.linalg.norm(w0)
    v0 = reduced_vector_field(H, w0)
    v0n = np.linalg.norm(v0)
    if v0n <= 1e-12 * (1.0 + scale):
        return PeriodDetection(kind="fixed_point")
    v0hat = v0 / v0n

    g = (w - w0) @ v0hat
    dist = np.linalg.norm(w - w0, axis=1)
    # ignore the initial departure from the section
    start = 1
    while start < len(t) and dist[start] < 10 * delta * scale:
        start += 1
    for i in range(start, len(t) - 1):
        if g[i] < 0.0 <= g[i + 1]:
            vel = reduced_vector_field(H, w[i + 1])
            if vel @ v0hat <= 0:
                continue
            if min(dist[i], dist[i + 1]) > max(delta * scale * 1e3, 0.05 * scale):
                continue
            # quadratic refinement of g's root on [t_i, t_i+1]
            ts = t[i - 1: i + 2]
            gs = g[i - 1: i + 2]
            T = _quadratic_root(ts, gs, t[i], t[i + 1])
            wT = _interp_state(t, w, T)
            if np.linalg.norm(wT - w0) > delta * scale:
                continue
            rate = np.array([reconstruction_rate(H, wi, mu_norm) for wi in w[: i + 2]])
            theta = _cumtrapz(rate, t[: i + 2])
            phase = float(np.interp(T, t[: i + 2], theta))
            return PeriodDetection(kind="periodic", period=float(T), phase=phase)
    return PeriodDetection(kind="no_return")


def _quadratic_root(ts, gs, lo, hi) -> float:
    """Root of the interpolating parabola through (ts, gs), clamped to [lo, hi]."""
    p = np.polyfit(ts - ts[0], gs, 2)
    roots = np.roots(p) + ts[0]
    real = [float(r.real) for r in roots if abs(r.imag) < 1e-12 and lo - 1e-12 <= r.real <= hi + 1e-12]
    if real:
        return min(real, key=lambda r: abs(r - 0.5 * (lo + hi)))
    # fall back to the secant root on the bracketing pair
    g0, g1 = gs[1], gs[2]
    return float(lo + (hi - lo) * (-g0) / (g1 - g0))


def _interp_state(t: np.ndarray, w: np.ndarray, tq: float) -> np.ndarray:
    return np.array([np.interp(tq, t, w[:, j]) for j in range(w.shape[1])])
