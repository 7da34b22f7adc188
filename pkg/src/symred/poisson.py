"""Generic Poisson-system machinery shared by all concrete systems.

A Poisson system is an ODE  dw/dt = K(w) grad H(w)  where K(w) is an
antisymmetric tensor satisfying the Jacobi identity.  This module knows
nothing about rigid bodies or central forces: it provides brackets,
Hamiltonian vector fields, structure verification (antisymmetry and
Jacobi residuals), fixed-step integrators, and trajectory bookkeeping
with conserved-quantity audit columns.

Conventions used throughout:

* states are 1-d float arrays ("w"),
* {F, G}(w) = grad F(w)^T K(w) grad G(w),
* the implicit midpoint rule is the default integrator because it
  preserves quadratic Casimirs up to the nonlinear-solver tolerance;
  classical RK4 is kept as an accuracy cross-check.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "SolverDivergenceError",
    "DegenerateCaseWarning",
    "SmoothFunction",
    "PoissonStructure",
    "IntegratorConfig",
    "Trajectory",
    "bracket",
    "hamiltonian_vector_field",
    "step",
    "integrate",
    "integrate_field",
    "jacobi_residual",
    "convergence_order",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


class DimensionMismatchError(ValueError):
    """Structure, function, and state dimensions do not agree."""


class SolverDivergenceError(RuntimeError):
    """The implicit-step nonlinear solver failed to converge.

    Carries the iteration count, the final residual norm, and (when
    raised from a trajectory run) the time at which the step failed.
    """

    def __init__(self, message, iterations, residual, time=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.time = time


class DegenerateCaseWarning(UserWarning):
    """A request was well-posed but degenerate (e.g. zero vector field)."""


def _as_state(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DimensionMismatchError(f"state must be a 1-d vector, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("state contains non-finite entries")
    return w


def _fd_gradient(value: Callable, w: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    h = rel_step * (1.0 + np.linalg.norm(w))
    g = np.empty_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (value(w + e) - value(w - e)) / (2.0 * h)
    return g


@dataclass(frozen=True)
class SmoothFunction:
    """A scalar observable with an analytic gradient.

    Gradients are expected analytic; ``from_value`` builds a
    central-finite-difference fallback but warns, since downstream
    consumers (reconstruction in particular) need pointwise-accurate
    partial derivatives.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @classmethod
    def from_value(cls, value: Callable[[np.ndarray], float], name: str = "") -> "SmoothFunction":
        warnings.warn(
            f"SmoothFunction {name!r}: no analytic gradient supplied, "
            "falling back to central finite differences",
            DegenerateCaseWarning,
            stacklevel=2,
        )
        return cls(value=value, gradient=lambda w: _fd_gradient(value, w), name=name)

    def __call__(self, w) -> float:
        return float(self.value(np.asarray(w, dtype=float)))

    def grad(self, w) -> np.ndarray:
        return np.asarray(self.gradient(np.asarray(w, dtype=float)), dtype=float)


@dataclass(frozen=True)
class PoissonStructure:
    """An antisymmetric state-dependent tensor K defining dw/dt = K(w) grad H.

    ``casimirs`` holds functions whose bracket with everything vanishes;
    they are audited along every trajectory produced by :func:`integrate`.
    """

    dim: int
    tensor: Callable[[np.ndarray], np.ndarray]
    casimirs: tuple[SmoothFunction, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def matrix(self, w) -> np.ndarray:
        w = _as_state(w)
        if w.size != self.dim:
            raise DimensionMismatchError(
                f"structure {self.name!r} has dim {self.dim}, state has dim {w.size}"
            )
        K = np.asarray(self.tensor(w), dtype=float)
        if K.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"tensor returned shape {K.shape}, expected {(self.dim, self.dim)}"
            )
        return K


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    method: "implicit_midpoint" (default, conserves quadratic Casimirs up
    to newton_tol) or "rk4".  The Newton solver uses a finite-difference
    Jacobian; systems here are small, so robustness beats speed.
    """

    method: str = "implicit_midpoint"
    step: float = 1e-2
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.method not in ("rk4", "implicit_midpoint"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped states plus named conserved-quantity audit columns."""

    times: np.ndarray
    states: np.ndarray
    audits: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=float))
        if self.times.ndim != 1 or self.states.ndim != 2:
            raise ValueError("times must be 1-d and states 2-d")
        if self.times.size != self.states.shape[0]:
            raise ValueError("times and states lengths differ")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.times.size


def bracket(P: PoissonStructure, F: SmoothFunction, G: SmoothFunction, w) -> float:
    """Poisson bracket {F, G}(w) = grad F^T K(w) grad G."""
    w = _as_state(w)
    K = P.matrix(w)
    gF = F.grad(w)
    gG = G.grad(w)
    if gF.shape != (P.dim,) or gG.shape != (P.dim,):
        raise DimensionMismatchError("gradient dimension does not match structure dim")
    return float(gF @ K @ gG)


def hamiltonian_vector_field(P: PoissonStructure, H: SmoothFunction, w) -> np.ndarray:
    """The field K(w) grad H(w) generating dw/dt = {w, H}."""
    w = _as_state(w)
    g = H.grad(w)
    if g.shape != (P.dim,):
        raise DimensionMismatchError("gradient dimension does not match structure dim")
    return P.matrix(w) @ g


def _rk4_step(f: Callable, w: np.ndarray, h: float) -> np.ndarray:
    k1 = f(w)
    k2 = f(w + 0.5 * h * k1)
    k3 = f(w + 0.5 * h * k2)
    k4 = f(w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _fd_jacobian(f: Callable, w: np.ndarray) -> np.ndarray:
    n = w.size
    J = np.empty((n, n))
    h = np.sqrt(np.finfo(float).eps) * (1.0 + np.abs(w))
    f0 = f(w)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h[j]
        J[:, j] = (f(w + e) - f0) / h[j]
    return J


def _midpoint_step(f, w, cfg: IntegratorConfig):
    """Solve  x = w + h f((w + x)/2)  by Newton with FD Jacobian."""
    h = cfg.step
    x = w + h * f(w)  # explicit-Euler predictor
    for it in range(1, cfg.newton_max_iter + 1):
        mid = 0.5 * (w + x)
        res = x - w - h * f(mid)
        rnorm = np.linalg.norm(res)
        if rnorm <= cfg.newton_tol:
            return x
        J = np.eye(w.size) - 0.5 * h * _fd_jacobian(f, mid)
        try:
            dx = np.linalg.solve(J, res)
        except np.linalg.LinAlgError as exc:
            raise SolverDivergenceError(
                f"midpoint Newton Jacobian singular after {it} iterations",
                iterations=it,
                residual=rnorm,
            ) from exc
        x = x - dx
    mid = 0.5 * (w + x)
    rnorm = float(np.linalg.norm(x - w - h * f(mid)))
    if rnorm <= cfg.newton_tol:
        return x
    raise SolverDivergenceError(
        f"midpoint Newton did not converge in {cfg.newton_max_iter} iterations "
        f"(residual {rnorm:.3e})",
        iterations=cfg.newton_max_iter,
        residual=rnorm,
    )


def step(P: PoissonStructure, H: SmoothFunction, w, cfg: IntegratorConfig) -> np.ndarray:
    """Advance one fixed step of dw/dt = K(w) grad H(w)."""
    w = _as_state(w)
    f = lambda y: P.matrix(y) @ H.grad(y)
    if cfg.method == "rk4":
        return _rk4_step(f, w, cfg.step)
    return _midpoint_step(f, w, cfg)


def _audit_functions(P: PoissonStructure, H: SmoothFunction) -> dict[str, SmoothFunction]:
    audits = {"H": H}
    for i, c in enumerate(P.casimirs):
        audits[c.name or f"C{i + 1}"] = c
    return audits


def integrate(P: PoissonStructure, H: SmoothFunction, w0, t_end: float,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Repeatedly step from w0 to t_end on a uniform grid.

    The step is adjusted to the nearest value that divides t_end evenly.
    Audit columns record H and every registered Casimir at each sample.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    w = _as_state(w0)
    n = max(1, int(round(t_end / cfg.step)))
    h = t_end / n
    run_cfg = IntegratorConfig(cfg.method, h, cfg.newton_tol, cfg.newton_max_iter)

    states = np.empty((n + 1, w.size))
    states[0] = w
    times = h * np.arange(n + 1)
    times[-1] = t_end
    for i in range(n):
        try:
            w = step(P, H, w, run_cfg)
        except SolverDivergenceError as exc:
            raise SolverDivergenceError(
                f"{exc} at t = {times[i]:.6g}",
                iterations=exc.iterations,
                residual=exc.residual,
                time=float(times[i]),
            ) from exc
        states[i + 1] = w

    audits = {
        name: np.array([fn(s) for s in states])
        for name, fn in _audit_functions(P, H).items()
    }
    return Trajectory(times=times, states=states, audits=audits)


def integrate_field(f: Callable[[np.ndarray], np.ndarray], w0, t_end: float,
                    step_size: float) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 on an arbitrary autonomous field (states of any shape).

    Utility for canonical flows and cross-check oracles; accepts batched
    states as long as ``f`` broadcasts over them.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    w = np.array(w0, dtype=float)
    n = max(1, int(round(t_end / step_size)))
    h = t_end / n
    states = np.empty((n + 1,) + w.shape)
    states[0] = w
    for i in range(n):
        w = _rk4_step(f, w, h)
        states[i + 1] = w
    times = h * np.arange(n + 1)
    times[-1] = t_end
    return times, states


def jacobi_residual(P: PoissonStructure, w, fd_step: float | None = None) -> float:
    """Max over index triples of the cyclic Jacobi sum, derivatives by
    central differences.

    Returns max_{i<j<k} | sum_l K_il d_l K_jk + K_jl d_l K_ki + K_kl d_l K_ij |.
    Triples with repeated indices vanish identically for antisymmetric K
    and are skipped.  The default difference step 1e-5 * (1 + |w|)
    balances truncation and round-off for O(1) states.
    """
    w = _as_state(w)
    d = P.dim
    if d < 3:
        return 0.0
    h = fd_step if fd_step is not None else 1e-5 * (1.0 + np.linalg.norm(w))
    K = P.matrix(w)
    dK = np.empty((d, d, d))  # dK[l] = d K / d w_l
    for l in range(d):
        e = np.zeros(d)
        e[l] = h
        dK[l] = (P.matrix(w + e) - P.matrix(w - e)) / (2.0 * h)
    T = np.einsum("il,ljk->ijk", K, dK)
    R = T + np.transpose(T, (1, 2, 0)) + np.transpose(T, (2, 0, 1))
    best = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                best = max(best, abs(R[i, j, k]))
    return best


def convergence_order(P: PoissonStructure, H: SmoothFunction, w0, t_end: float,
                      method: str, h: float = 0.1, newton_tol: float = 1e-12) -> float:
    """Empirical order by Richardson comparison.

    Integrates at steps h, h/2, h/4 and compares end states against an
    h/64 reference with the same method; returns the mean log2 error
    ratio.  Returns NaN (with a warning) when the errors sit at the
    round-off floor, e.g. for a constant Hamiltonian.
    """
    ends = []
    for divisor in (1, 2, 4, 64):
        cfg = IntegratorConfig(method=method, step=h / divisor, newton_tol=newton_tol)
        ends.append(integrate(P, H, w0, t_end, cfg).states[-1])
    ref = ends[-1]
    errs = [np.linalg.norm(e - ref) for e in ends[:3]]
    if max(errs) < 1e-13 * (1.0 + np.linalg.norm(ref)):
        warnings.warn(
            "errors at round-off floor; order is undefined",
            DegenerateCaseWarning,
            stacklevel=2,
        )
        return float("nan")
    ratios = [np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])]
    return float(np.mean(ratios))


# ---------------------------------------------------------------------------
# CSV persistence: header "t, x1..xd, H, C1..Cm", 17 significant digits.

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, dest, state_columns: list[str] | None = None) -> None:
    """Write a trajectory as CSV; ``dest`` may be a path or a text file."""
    if state_columns is None:
        state_columns = [f"x{i + 1}" for i in range(traj.dim)]
    if len(state_columns) != traj.dim:
        raise ValueError("state_columns length does not match state dimension")
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w", newline="") if own else dest
    try:
        writer = csv.writer(fh)
        writer.writerow(["t", *state_columns, *traj.audits.keys()])
        audit_cols = list(traj.audits.values())
        for i in range(len(traj)):
            row = [_fmt(traj.times[i])]
            row += [_fmt(v) for v in traj.states[i]]
            row += [_fmt(col[i]) for col in audit_cols]
            writer.writerow(row)
    finally:
        if own:
            fh.close()


def trajectory_csv_bytes(traj: Trajectory, state_columns: list[str] | None = None) -> bytes:
    buf = io.StringIO()
    write_trajectory_csv(traj, buf, state_columns)
    return buf.getvalue().encode()


def read_trajectory_csv(src) -> Trajectory:
    """Read a trajectory CSV written by :func:`write_trajectory_csv`.

    Columns between ``t`` and ``H`` are taken as state coordinates; ``H``
    and everything after are audit columns.
    """
    own = isinstance(src, (str, bytes)) or hasattr(src, "__fspath__")
    fh = open(src, "r", newline="") if own else src
    try:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    finally:
        if own:
            fh.close()
    if header[0] != "t" or "H" not in header:
        raise ValueError("not a trajectory CSV (expected 't' first and an 'H' column)")
    ih = header.index("H")
    audits = {name: rows[:, ih + j] for j, name in enumerate(header[ih:])}
    return Trajectory(times=rows[:, 0], states=rows[:, 1:ih], audits=audits)
