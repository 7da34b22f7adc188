"""Numerical verification of every structural claim the library makes.

Each check exercises one invariant from the module documentation
(bracket axioms, Jacobi identity, conservation laws, reduction
commutation, dual-pair structure, portrait integrity) and returns a
pass/fail record with the measured quantity.  The ``symred verify``
subcommand prints these as a table; the test suite asserts them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import central, poisson, portrait, rigid, sp2k
from .poisson import IntegratorConfig, SmoothFunction

__all__ = ["CheckResult", "run_suite", "run_suites", "SUITES"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _quad_function(rng, dim, name=""):
    A = rng.normal(size=(dim, dim))
    A = 0.5 * (A + A.T)
    b = rng.normal(size=dim)

    return SmoothFunction(
        value=lambda w, A=A, b=b: 0.5 * float(w @ A @ w) + float(b @ w),
        gradient=lambda w, A=A, b=b: A @ w + b,
        name=name,
    )


def _shipped_structures():
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    Pr, Hr, _ = rigid.rigid_body_structure(I)
    Pc, _ = central.reduced_structure()
    return [(Pr, 3), (Pc, 3), (sp2k.sp2k_poisson_structure(1), 3),
            (sp2k.sp2k_poisson_structure(2), 10)]


# ---------------------------------------------------------------------------
# structure suite

def check_antisymmetry(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for P, dim in _shipped_structures()[:2]:
        for _ in range(50):
            F, G = _quad_function(rng, dim), _quad_function(rng, dim)
            w = rng.normal(size=dim)
            worst = max(worst, abs(poisson.bracket(P, F, G, w)
                                   + poisson.bracket(P, G, F, w)))
    ok = worst <= 1e-10
    return CheckResult("structure", "bracket antisymmetry", ok,
                       f"max |{{F,G}} + {{G,F}}| = {worst:.2e} (<= 1e-10)")


def check_leibniz(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for P, dim in _shipped_structures()[:2]:
        for _ in range(50):
            F, G, H = (_quad_function(rng, dim) for _ in range(3))
            GH = SmoothFunction(
                value=lambda w: G.value(w) * H.value(w),
                gradient=lambda w: G.grad(w) * H.value(w) + H.grad(w) * G.value(w),
            )
            w = rng.normal(size=dim)
            lhs = poisson.bracket(P, F, GH, w)
            rhs = (poisson.bracket(P, F, G, w) * H(w)
                   + poisson.bracket(P, F, H, w) * G(w))
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    ok = worst <= 1e-9
    return CheckResult("structure", "Leibniz rule", ok,
                       f"max relative defect = {worst:.2e} (<= 1e-9)")


def check_jacobi(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for P, dim in _shipped_structures():
        for _ in range(100 if dim == 3 else 20):
            w = rng.normal(size=dim) * 2.0
            worst = max(worst, poisson.jacobi_residual(P, w))
    # negative control: corrupt the central-force tensor entry (1,2)
    def bad_tensor(w):
        K = central.reduced_structure()[0].tensor(w)
        K = K.copy()
        K[0, 1] = w[0] ** 2
        K[1, 0] = -w[0] ** 2
        return K

    Pbad = poisson.PoissonStructure(dim=3, tensor=bad_tensor, name="corrupted")
    control = max(poisson.jacobi_residual(Pbad, rng.normal(size=3) * 2.0)
                  for _ in range(100))
    ok = worst <= 1e-8 and control > 0.1
    return CheckResult("structure", "Jacobi identity", ok,
                       f"max residual = {worst:.2e} (<= 1e-8), "
                       f"corrupted control = {control:.2e} (> 0.1)")


def check_rigid_field_equivalence(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        Iv = np.sort(rng.uniform(0.5, 5.0, 3))[::-1]
        I = rigid.InertiaTensor(*Iv)
        P, H, _ = rigid.rigid_body_structure(I)
        m = rng.normal(size=3)
        e = rigid.euler_vector_field(I, m)
        h = poisson.hamiltonian_vector_field(P, H, m)
        s = rigid.FullRigidState(np.eye(3), m)
        _, mdot = rigid.full_vector_field(I, s)
        worst = max(worst, np.abs(e - h).max(), np.abs(e - mdot).max())
    ok = worst <= 1e-12
    return CheckResult("structure", "Euler field = bracket form = full m-rate", ok,
                       f"max deviation = {worst:.2e} (<= 1e-12)")


def check_sp2_structure_constants(seed=0):
    W1, W2, W3 = sp2k.sp2_basis()
    comm = lambda A, B: A @ B - B @ A
    ok = (np.array_equal(comm(W1, W2), 2 * W1)
          and np.array_equal(comm(W1, W3), 4 * W2)
          and np.array_equal(comm(W2, W3), 2 * W3)
          and all(np.trace(W) == 0 for W in (W1, W2, W3)))
    return CheckResult("structure", "sp(2) structure constants", ok,
                       "[W1,W2]=2W1, [W1,W3]=4W2, [W2,W3]=2W3 exact in ints")


def _random_matrix_hamiltonian(rng, k):
    dim = k * (2 * k + 1)
    A = rng.normal(size=(dim, dim))
    A = 0.5 * (A + A.T)
    b = rng.normal(size=dim)
    coords = sp2k._coordinate_index(k)

    def flatgrad(w):
        return A @ w + b

    def value(Xm):
        w = sp2k.flatten_point(sp2k.Sp2kDualPoint.from_matrix(Xm))
        return 0.5 * float(w @ A @ w) + float(b @ w)

    def gradient(Xm):
        w = sp2k.flatten_point(sp2k.Sp2kDualPoint.from_matrix(Xm))
        g = flatgrad(w)
        G = np.zeros((2 * k, 2 * k))
        for gi, (block, a, bb) in zip(g, coords):
            if block == "M":
                G[k + a, k + bb] += gi
            elif block == "L":
                if a == bb:
                    G[a, k + bb] += gi
                else:
                    G[a, k + bb] += 0.5 * gi
                    G[bb, k + a] += 0.5 * gi
            else:
                if a == bb:
                    G[k + a, bb] += gi
                else:
                    G[k + a, bb] += 0.5 * gi
                    G[k + bb, a] += 0.5 * gi
        return G

    return sp2k.MatrixHamiltonian(value=value, gradient=gradient, name="quad")


def check_poisson_map(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in (1, 2):
        for _ in range(100):
            F = _random_matrix_hamiltonian(rng, k)
            G = _random_matrix_hamiltonian(rng, k)
            qs = rng.normal(size=(k, 3))
            ps = rng.normal(size=(k, 3))
            lhs = sp2k.canonical_bracket_pullback(F, G, qs, ps)
            rhs = sp2k.lie_poisson_bracket(F, G, sp2k.momentum_map_phi(qs, ps))
            worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-10
    return CheckResult("structure", "momentum map is a Poisson map", ok,
                       f"max bracket residual = {worst:.2e} (<= 1e-10, n=3, k=1,2)")


def check_dual_pair(seed=0):
    rep = sp2k.dual_pair_centralizer_check(3, 1)
    span = np.stack([c.reshape(-1) for c in rep.centralizer_of_so])
    Q, _ = np.linalg.qr(span.T)
    worst = 0.0
    for W in sp2k.sp2_basis():
        v = np.kron(W.astype(float), np.eye(3)).reshape(-1)
        worst = max(worst, np.linalg.norm(v - Q @ (Q.T @ v)) / np.linalg.norm(v))
    ok = (rep.dim_centralizer_of_so == 3 and rep.dim_centralizer_of_sp == 3
          and worst <= 1e-8)
    return CheckResult("structure", "dual-pair centralizers in sp(6)", ok,
                       f"dims = ({rep.dim_centralizer_of_so}, {rep.dim_centralizer_of_sp}) "
                       f"(= 3, 3), W-span residual = {worst:.2e} (<= 1e-8)")


def check_phi_invariance(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        k, n = 3, 4
        qs = rng.normal(size=(k, n))
        ps = rng.normal(size=(k, n))
        A, _ = np.linalg.qr(rng.normal(size=(n, n)))
        X0 = sp2k.momentum_map_phi(qs, ps)
        X1 = sp2k.momentum_map_phi(qs @ A.T, ps @ A.T)
        worst = max(worst, np.abs(X0.matrix - X1.matrix).max())
    ok = worst <= 1e-12
    return CheckResult("structure", "phi invariant under diagonal O(n)", ok,
                       f"max |phi(Aq,Ap) - phi(q,p)| = {worst:.2e} (<= 1e-12)")


def check_sp2_action_preserves_momentum(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        q, p = rng.normal(size=3), rng.normal(size=3)
        a, b, c = rng.normal(size=3)
        d = (1.0 + b * c) / a if abs(a) > 1e-6 else 1.0
        if abs(a) <= 1e-6:
            continue
        lhs = np.cross(a * q + b * p, c * q + d * p)
        worst = max(worst, np.abs(lhs - (a * d - b * c) * np.cross(q, p)).max())
    ok = worst <= 1e-12
    return CheckResult("structure", "Sp(2) action preserves q x p", ok,
                       f"max deviation = {worst:.2e} (<= 1e-12)")


def check_central_field_equivalence(seed=0):
    rng = np.random.default_rng(seed)
    P, _ = central.reduced_structure()
    worst = 0.0
    hams = [central.builtin_hamiltonian(n) for n in central.builtin_names()]
    for _ in range(200):
        H = hams[rng.integers(len(hams))]
        q, p = rng.normal(size=3), rng.normal(size=3)
        w = central.invariants_map(q, p)
        chain = central.reduced_vector_field(H, w)
        tensor = poisson.hamiltonian_vector_field(P, H, w)
        worst = max(worst, np.abs(chain - tensor).max())
    ok = worst <= 1e-10
    return CheckResult("structure", "chain-rule field = K(w) grad H", ok,
                       f"max deviation = {worst:.2e} (<= 1e-10)")


def check_cone_membership(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_lagrange = 0.0
    for _ in range(1000):
        q, p = rng.normal(size=3), rng.normal(size=3)
        w = central.invariants_map(q, p)
        worst = max(worst, -min(w[0], w[2], central.casimir(w)), 0.0)
        worst_lagrange = max(worst_lagrange,
                             abs(central.casimir(w) - np.cross(q, p) @ np.cross(q, p)))
    ok = worst <= 1e-12 and worst_lagrange <= 1e-10
    return CheckResult("structure", "invariants land in the cone, C = |q x p|^2", ok,
                       f"worst cone defect = {worst:.2e}, Lagrange identity "
                       f"defect = {worst_lagrange:.2e}")


# ---------------------------------------------------------------------------
# conservation suite

def check_rigid_casimir_drift(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    P, H, _ = rigid.rigid_body_structure(I)
    cfg = IntegratorConfig("implicit_midpoint", 1e-2)
    traj = poisson.integrate(P, H, np.array([0.2, 1.0, 0.3]), 100.0, cfg)
    drift = float(np.abs(traj.audits["C"] - traj.audits["C"][0]).max())
    ok = drift <= 1e-9
    return CheckResult("conservation", "rigid-body Casimir (midpoint, 1e4 steps)", ok,
                       f"max |C - C0| = {drift:.2e} (<= 1e-9)")


def _kepler_apoapsis(H_energy: float, C: float = 0.6) -> np.ndarray:
    d = np.sqrt(1.0 + 2.0 * C * H_energy)
    roots = sorted(x for x in ((-1 + d) / (2 * H_energy), (-1 - d) / (2 * H_energy))
                   if x > 0)
    s = roots[-1] if H_energy < 0 else roots[0]
    return np.array([s * s, 0.0, C / (s * s)])


def check_central_casimir_drift(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)
    cfg = IntegratorConfig("implicit_midpoint", 1e-2)
    traj = poisson.integrate(P, Hk, w0, 100.0, cfg)
    drift = float(np.abs(traj.audits["C"] - traj.audits["C"][0]).max())
    ok = drift <= 1e-9
    return CheckResult("conservation", "central-force Casimir (midpoint, 1e4 steps)", ok,
                       f"max |C - C0| = {drift:.2e} (<= 1e-9, leaf C = 0.6)")


def check_sp2k_casimir_drift(seed=0):
    rng = np.random.default_rng(seed)
    P2 = sp2k.sp2k_poisson_structure(2)
    H = sp2k.collective_pairwise_hamiltonian(
        [1.0, 1.5], V=lambda u: 0.5 * u, Vprime=lambda u: 0.5)
    X0 = sp2k.momentum_map_phi(rng.normal(size=(2, 3)), rng.normal(size=(2, 3)))
    w0 = sp2k.flatten_point(X0)
    cfg = IntegratorConfig("implicit_midpoint", 1e-2)
    traj = poisson.integrate(P2, sp2k.flat_hamiltonian(H, 2), w0, 10.0, cfg)
    col = traj.audits["trX^2"]
    per_step = float(np.abs(np.diff(col)).max())
    ok = per_step <= 10 * cfg.newton_tol * max(1.0, abs(col[0]))
    return CheckResult("conservation", "sp(4)* quadratic Casimir (midpoint)", ok,
                       f"max per-step |d tr Xc^2| = {per_step:.2e} "
                       f"(<= 10 newton_tol scaled)")


def check_energy_order(seed=0):
    # the rigid-body energy is quadratic and hence conserved exactly by the
    # midpoint rule, so the h^2 law is measured on the (non-quadratic)
    # reduced Kepler Hamiltonian instead
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)

    def max_drift(h):
        traj = poisson.integrate(P, Hk, w0, 5.0, IntegratorConfig("implicit_midpoint", h))
        return float(np.abs(traj.audits["H"] - traj.audits["H"][0]).max())

    e1, e2 = max_drift(0.02), max_drift(0.01)
    ratio = e1 / e2
    ok = 2.8 <= ratio <= 5.7
    return CheckResult("conservation", "energy error halves twice with h/2", ok,
                       f"Kepler midpoint drift ratio = {ratio:.2f} (expected ~4 "
                       "for order 2)")


def check_spatial_momentum(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    s0 = rigid.FullRigidState(np.eye(3), np.array([0.01, 1.0, 0.01]))
    traj = rigid.integrate_full(I, s0, 50.0, IntegratorConfig("implicit_midpoint", 1e-3))
    Qm = np.stack([traj.audits["Qm1"], traj.audits["Qm2"], traj.audits["Qm3"]], axis=1)
    drift = float(np.linalg.norm(Qm - Qm[0], axis=1).max())
    Qs = traj.states[:, :9].reshape(-1, 3, 3)
    orth = max(float(np.linalg.norm(Q.T @ Q - np.eye(3))) for Q in Qs[:: max(1, len(Qs) // 500)])
    ok = drift <= 1e-6 and orth <= 1e-12
    return CheckResult("conservation", "spatial momentum Qm and SO(3) exactness", ok,
                       f"max |Qm - Q0 m0| = {drift:.2e} (<= 1e-6), "
                       f"max |Q^T Q - I| = {orth:.2e} (<= 1e-12)")


def check_convergence_orders(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    P, H, _ = rigid.rigid_body_structure(I)
    m0 = np.array([0.2, 1.0, 0.3])
    p4 = poisson.convergence_order(P, H, m0, 1.0, "rk4")
    p2 = poisson.convergence_order(P, H, m0, 1.0, "implicit_midpoint")
    ok = abs(p4 - 4.0) <= 0.3 and abs(p2 - 2.0) <= 0.3
    return CheckResult("conservation", "empirical convergence orders", ok,
                       f"rk4 order = {p4:.3f} (4 +- 0.3), "
                       f"midpoint order = {p2:.3f} (2 +- 0.3)")


# ---------------------------------------------------------------------------
# reduction suite

def check_reduce_integrate_commute(seed=0):
    P, _ = central.reduced_structure()
    cases = [("kepler", _kepler_apoapsis(-0.5)),
             ("homoclinic", np.array([1.5, 1.0, 4.0 / 3.0]))]
    details = []
    ok = True
    for name, w0 in cases:
        H = central.builtin_hamiltonian(name)
        q0, p0, _ = central.align_initial_frame(w0)

        def canon(z, H=H):
            qd, pd = central.canonical_vector_field(H, z[:3], z[3:])
            return np.concatenate([qd, pd])

        _, zs = poisson.integrate_field(canon, np.concatenate([q0, p0]), 10.0, 1e-3)
        traj = poisson.integrate(P, H, w0, 10.0, IntegratorConfig("rk4", 1e-3))
        gap = float(np.linalg.norm(
            traj.states[-1] - central.invariants_map(zs[-1, :3], zs[-1, 3:])))
        ok = ok and gap <= 1e-6
        details.append(f"{name}: {gap:.2e}")
    return CheckResult("reduction", "reduce-then-integrate = integrate-then-reduce", ok,
                       "gap at t=10 (<= 1e-6): " + ", ".join(details))


def check_reconstruction(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)
    q0, p0, mu = central.align_initial_frame(w0)
    traj = poisson.integrate(P, Hk, w0, 10.0, IntegratorConfig("rk4", 1e-3))
    rec = central.reconstruct_orbit(Hk, traj, float(np.linalg.norm(mu)))

    def canon(z):
        qd, pd = central.canonical_vector_field(Hk, z[:3], z[3:])
        return np.concatenate([qd, pd])

    _, zs = poisson.integrate_field(canon, np.concatenate([q0, p0]), 10.0, 1e-3)
    gap = max(float(np.linalg.norm(rec.positions[-1] - zs[-1, :3])),
              float(np.linalg.norm(rec.momenta[-1] - zs[-1, 3:])))
    cross = np.cross(rec.positions, rec.momenta)
    mu_drift = float(np.abs(cross - rec.mu).max())
    winv = np.stack([central.invariants_map(q, p)
                     for q, p in zip(rec.positions, rec.momenta)])
    round_trip = float(np.abs(winv - traj.states).max())
    ok = gap <= 1e-5 and mu_drift <= 1e-6 and round_trip <= 1e-9
    return CheckResult("reduction", "orbit reconstruction", ok,
                       f"match to canonical = {gap:.2e} (<= 1e-5), mu drift = "
                       f"{mu_drift:.2e} (<= 1e-6), invariants round-trip = "
                       f"{round_trip:.2e} (<= 1e-9)")


def check_circular_rate(seed=0):
    Hk = central.builtin_hamiltonian("kepler")
    C = 0.6
    wc = np.array([C * C, 0.0, C ** -0.5])
    mun = np.sqrt(C)
    rate = central.reconstruction_rate(Hk, wc, mun)
    period = 2.0 * np.pi * wc[0] / (2.0 * Hk.grad(wc)[2] * mun)
    err_rate = abs(rate - C ** -1.5)
    err_period = abs(period - 2.0 * np.pi * C ** 1.5)
    ok = err_rate <= 1e-6 and err_period <= 1e-6
    return CheckResult("reduction", "circular-orbit phase rate and period", ok,
                       f"|rate - C^-3/2| = {err_rate:.2e}, "
                       f"|T - 2 pi C^3/2| = {err_period:.2e} (<= 1e-6)")


def check_kepler_closure(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)
    traj = poisson.integrate(P, Hk, w0, 10.0, IntegratorConfig("rk4", 1e-3))
    det = central.detect_relative_periodic(Hk, traj, np.sqrt(0.6))
    if det.kind != "periodic":
        return CheckResult("reduction", "Kepler orbits close", False,
                           f"no period detected ({det.kind})")
    gap = abs(det.phase - 2.0 * np.pi)
    ok = gap <= 1e-4
    return CheckResult("reduction", "Kepler orbits close", ok,
                       f"|theta(T) - 2 pi| = {gap:.2e} (<= 1e-4), T = {det.period:.6f}")


def check_pushforward(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        k, n = 2, 3
        H = _random_matrix_hamiltonian(rng, k)
        qs = rng.normal(size=(k, n))
        ps = rng.normal(size=(k, n))

        def canon(z):
            q = z[: k * n].reshape(k, n)
            p = z[k * n:].reshape(k, n)
            qd, pd = sp2k.canonical_field(H, q, p)
            return np.concatenate([qd.reshape(-1), pd.reshape(-1)])

        z0 = np.concatenate([qs.reshape(-1), ps.reshape(-1)])
        eps = 1e-6
        f0 = canon(z0)
        Xp = sp2k.momentum_map_phi((z0 + eps * f0)[: k * n].reshape(k, n),
                                   (z0 + eps * f0)[k * n:].reshape(k, n))
        Xm = sp2k.momentum_map_phi((z0 - eps * f0)[: k * n].reshape(k, n),
                                   (z0 - eps * f0)[k * n:].reshape(k, n))
        fd = (sp2k.flatten_point(Xp) - sp2k.flatten_point(Xm)) / (2 * eps)
        rate = sp2k.lie_poisson_vector_field(H, sp2k.momentum_map_phi(qs, ps))
        worst = max(worst, float(np.abs(fd - sp2k.flatten_point(rate)).max()))
    ok = worst <= 1e-6
    return CheckResult("reduction", "reduced field is the push-forward of phi", ok,
                       f"max FD defect = {worst:.2e} (<= 1e-6)")


def check_k1_reproduces_central(seed=0):
    rng = np.random.default_rng(seed)
    P1 = sp2k.sp2k_poisson_structure(1)
    Pc, _ = central.reduced_structure()
    worst_tensor = max(float(np.abs(P1.matrix(w) - Pc.matrix(w)).max())
                       for w in rng.normal(size=(50, 3)))
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)
    cfg = IntegratorConfig("implicit_midpoint", 1e-2)
    t1 = poisson.integrate(P1, Hk, w0, 10.0, cfg)
    t2 = poisson.integrate(Pc, Hk, w0, 10.0, cfg)
    worst_traj = float(np.abs(t1.states - t2.states).max())
    ok = worst_tensor <= 1e-12 and worst_traj <= 1e-9
    return CheckResult("reduction", "k=1 machinery reproduces central force", ok,
                       f"tensor gap = {worst_tensor:.2e}, trajectory gap = "
                       f"{worst_traj:.2e} (<= 1e-9)")


def check_rank_audit(seed=0):
    a32 = sp2k.phi_rank_audit(3, 2, seed=seed)
    a31 = sp2k.phi_rank_audit(3, 1, seed=seed)
    ok = (a32.jacobian_rank == 9 and a32.image_dim == 9 and a32.leaf_dim == 8
          and a32.lie_poisson_dim == 10
          and a31.jacobian_rank == 3 and a31.image_dim == 3)
    return CheckResult("reduction", "phi rank and dimension audit", ok,
                       f"n=3,k=2: rank {a32.jacobian_rank} (=9), image {a32.image_dim} "
                       f"(=9), leaf {a32.leaf_dim} (=8); n=3,k=1: rank "
                       f"{a31.jacobian_rank} (=3)")


def check_gram_psd_rank(seed=0):
    rng = np.random.default_rng(seed)
    ok = True
    worst_eig = np.inf
    for _ in range(50):
        n, k = 3, 5
        X = sp2k.momentum_map_phi(rng.normal(size=(k, n)), rng.normal(size=(k, n)))
        G = sp2k.gram_matrix(X)
        eigs = np.linalg.eigvalsh(G)
        worst_eig = min(worst_eig, float(eigs.min()))
        rank = int(np.sum(np.linalg.svd(G, compute_uv=False) > 1e-8 * eigs.max()))
        ok = ok and rank <= n and eigs.min() >= -1e-10 * max(1.0, eigs.max())
    return CheckResult("reduction", "momentum-map range is PSD Gram of rank <= n", ok,
                       f"min eigenvalue = {worst_eig:.2e}, rank <= 3 at n=3, k=5")


# ---------------------------------------------------------------------------
# dynamics suite

def check_hammer(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    s0 = rigid.FullRigidState(np.eye(3), np.array([1e-3, 1.0, 1e-3]))
    _, rep = rigid.hammer_throw(I, s0, 100.0, IntegratorConfig("implicit_midpoint", 1e-3))
    twist_gap = min((abs(a - np.pi) for a in rep.twist_angles), default=np.inf)
    ok = rep.transited and rep.first_sign_change is not None and twist_gap <= 0.3
    return CheckResult("dynamics", "hammer flip: transit with twist near pi", ok,
                       f"classification = {rep.classification}, first sign change at "
                       f"t = {rep.first_sign_change}, |twist - pi| = {twist_gap:.3f} "
                       f"(<= 0.3)")


def check_stable_axes(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    a1 = 1.0 / I.I3 - 1.0 / I.I2
    a2 = 1.0 / I.I1 - 1.0 / I.I3
    a3 = 1.0 / I.I2 - 1.0 / I.I1

    def f(m):
        return np.stack([a1 * m[..., 1] * m[..., 2],
                         a2 * m[..., 2] * m[..., 0],
                         a3 * m[..., 0] * m[..., 1]], axis=-1)

    m0 = np.array([[1.0, 1e-3, 1e-3], [1e-3, 1e-3, 1.0]])
    _, states = poisson.integrate_field(f, m0, 100.0, 1e-3)
    dev = np.linalg.norm(states - m0, axis=-1).max(axis=0)
    ok = bool(np.all(dev <= 0.1))
    return CheckResult("dynamics", "axis-1 and axis-3 rotations are stable", ok,
                       f"max |m - m0| = {dev.max():.4f} (<= 0.1)")


def check_escape_dichotomy(seed=0):
    def f(w):
        w1, w2, w3 = w[..., 0], w[..., 1], w[..., 2]
        g1 = 0.5 * w1 ** -1.5
        return np.stack([2.0 * w2, -2.0 * w1 * g1 + w3, -4.0 * w2 * g1], axis=-1)

    bound = np.stack([_kepler_apoapsis(h) for h in np.linspace(-0.8, -0.2, 10)])
    unbound = np.stack([_kepler_apoapsis(h) for h in np.linspace(0.1, 1.0, 10)])
    _, Sb = poisson.integrate_field(f, bound, 1000.0, 1e-2)
    _, Su = poisson.integrate_field(f, unbound, 1000.0, 1e-2)
    wmax_bound = float(Sb[..., 0].max())
    wmax_unbound = float(Su[..., 0].max(axis=0).min())
    ok = wmax_bound <= 1e3 and wmax_unbound > 1e4
    return CheckResult("dynamics", "escape-energy dichotomy on leaf C=0.6", ok,
                       f"bounded max w1 = {wmax_bound:.1f} (<= 1e3), unbounded min of "
                       f"max w1 = {wmax_unbound:.3g} (> 1e4)")


def check_portrait_consistency(seed=0):
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    P, H, _ = rigid.rigid_body_structure(I)
    traj = poisson.integrate(P, H, np.array([0.2, 1.0, 0.3]), 20.0,
                             IntegratorConfig("implicit_midpoint", 1e-2))
    dC = float(np.abs(traj.audits["C"] - traj.audits["C"][0]).max())
    dH = float(np.abs(traj.audits["H"] - traj.audits["H"][0]).max())
    ok = dC <= 1e-9 and dH <= 1e-6
    return CheckResult("dynamics", "trajectories stay on C and H level sets", ok,
                       f"|dC| = {dC:.2e} (<= 1e-9), |dH| = {dH:.2e} (<= 1e-6)")


# ---------------------------------------------------------------------------
# portrait suite

def check_leaf_integrity(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    ch = portrait.make_chart("hyperboloid", casimir=0.6,
                             region=portrait.DEFAULT_REGIONS["kepler"])
    levels = portrait.auto_levels(ch, Hk) + [0.0]
    cs = portrait.extract_contours(ch, Hk, levels, grid=(128, 128))
    worst = max((ch.leaf_residual(a) for pl in cs.polylines for a in pl.points_ambient),
                default=0.0)
    ok = worst <= 1e-9 and len(cs.polylines) > 0
    return CheckResult("portrait", "contour vertices lie on their leaf", ok,
                       f"max |C - 0.6| = {worst:.2e} (<= 1e-9), "
                       f"{len(cs.polylines)} polylines")


def check_level_refinement(seed=0):
    Hh = central.builtin_hamiltonian("homoclinic")
    ch = portrait.make_chart("hyperboloid", casimir=1.0,
                             region=portrait.DEFAULT_REGIONS["homoclinic"])

    def max_err(g):
        cs = portrait.extract_contours(ch, Hh, [2.0], grid=(g, g))
        return max(abs(Hh(a) - 2.0) for pl in cs.polylines for a in pl.points_ambient)

    e1, e2 = max_err(64), max_err(128)
    ok = e2 <= 0.55 * e1
    return CheckResult("portrait", "grid refinement halves max level error", ok,
                       f"err(64) = {e1:.2e} -> err(128) = {e2:.2e}, "
                       f"ratio = {e2 / e1:.3f} (<= 0.55)")


def check_homoclinic_saddle(seed=0):
    P, _ = central.reduced_structure()
    Hh = central.builtin_hamiltonian("homoclinic")
    ch = portrait.make_chart("hyperboloid", casimir=1.0,
                             region=portrait.DEFAULT_REGIONS["homoclinic"])
    markers = portrait.find_equilibria(ch, P, Hh)
    saddles = [m for m in markers if m.stability == "saddle"]
    gap = min((float(np.linalg.norm(m.ambient - np.array([1.0, 0.0, 1.0])))
               for m in saddles), default=np.inf)
    cs = portrait.extract_contours(ch, Hh, [2.0], grid=(256, 256))
    target = np.array([np.sqrt(3.0), np.sqrt(2.0), np.sqrt(3.0)])
    pass_gap = min((float(np.linalg.norm(pl.points_ambient - target, axis=1).min())
                    for pl in cs.polylines), default=np.inf)
    cell = max(cs.cell_size)
    ok = gap <= 1e-8 and pass_gap <= 5 * cell
    return CheckResult("portrait", "homoclinic separatrix structure on C=1", ok,
                       f"saddle at (1,0,1) to {gap:.2e} (<= 1e-8); H=2 contour passes "
                       f"within {pass_gap:.3f} of (sqrt3, sqrt2, sqrt3) "
                       f"(<= {5 * cell:.3f})")


def check_trajectory_in_cell(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    w0 = _kepler_apoapsis(-0.5)
    traj = poisson.integrate(P, Hk, w0, 7.0, IntegratorConfig("implicit_midpoint", 1e-2))
    ch = portrait.make_chart("hyperboloid", casimir=0.6,
                             region=portrait.DEFAULT_REGIONS["kepler"])
    level = Hk(w0)
    cs = portrait.extract_contours(ch, Hk, [level], grid=(256, 256))
    # chart coordinates of the trajectory: (w2, u) with u = log(w1 / s)
    s = np.sqrt(0.6 + traj.states[:, 1] ** 2)
    uv = np.stack([traj.states[:, 1], np.log(traj.states[:, 0] / s)], axis=1)
    allpts = np.vstack([pl.points_uv for pl in cs.polylines if pl.level == level])
    d = np.array([np.hypot(*(allpts - pt).T).min() for pt in uv[:: max(1, len(uv) // 200)]])
    cell = float(np.hypot(*cs.cell_size))
    ok = float(d.max()) <= cell
    return CheckResult("portrait", "trajectory stays within one cell of its contour", ok,
                       f"max distance = {d.max():.4f} (<= cell diagonal {cell:.4f})")


def check_equilibrium_markers(seed=0):
    P, _ = central.reduced_structure()
    Hk = central.builtin_hamiltonian("kepler")
    ch = portrait.make_chart("hyperboloid", casimir=0.6,
                             region=portrait.DEFAULT_REGIONS["kepler"])
    markers = portrait.find_equilibria(ch, P, Hk)
    target = np.array([0.36, 0.0, 5.0 / 3.0])
    gap = min((float(np.linalg.norm(m.ambient - target)) for m in markers
               if m.stability == "center"), default=np.inf)
    I = rigid.InertiaTensor(3.0, 2.0, 1.0)
    labels = {tuple(np.round(p, 6)): lab for p, lab in rigid.classify_equilibria(I)}
    ok = gap <= 1e-8 and labels[(0.0, 1.0, 0.0)] == "unstable" \
        and labels[(1.0, 0.0, 0.0)] == "stable"
    return CheckResult("portrait", "equilibrium markers and stability tags", ok,
                       f"Kepler circular point to {gap:.2e} (<= 1e-8); intermediate "
                       "axis labeled unstable")


def check_output_determinism(seed=0):
    Hh = central.builtin_hamiltonian("homoclinic")
    P, _ = central.reduced_structure()
    ch = portrait.make_chart("hyperboloid", casimir=1.0,
                             region=portrait.DEFAULT_REGIONS["homoclinic"])
    cs1 = portrait.extract_contours(ch, Hh, [1.5, 2.0], grid=(64, 64), structure=P)
    cs2 = portrait.extract_contours(ch, Hh, [1.5, 2.0], grid=(64, 64), structure=P)
    ok = (portrait.emit_svg(cs1) == portrait.emit_svg(cs2)
          and portrait.emit_csv(cs1) == portrait.emit_csv(cs2))
    return CheckResult("portrait", "emitted SVG/CSV are deterministic", ok,
                       "byte-identical outputs for identical inputs")


SUITES = {
    "structure": [
        check_antisymmetry, check_leibniz, check_jacobi,
        check_rigid_field_equivalence, check_sp2_structure_constants,
        check_poisson_map, check_dual_pair, check_phi_invariance,
        check_sp2_action_preserves_momentum, check_central_field_equivalence,
        check_cone_membership,
    ],
    "conservation": [
        check_rigid_casimir_drift, check_central_casimir_drift,
        check_sp2k_casimir_drift, check_energy_order, check_spatial_momentum,
        check_convergence_orders,
    ],
    "reduction": [
        check_reduce_integrate_commute, check_reconstruction, check_circular_rate,
        check_kepler_closure, check_pushforward, check_k1_reproduces_central,
        check_rank_audit, check_gram_psd_rank,
    ],
    "dynamics": [
        check_hammer, check_stable_axes, check_escape_dichotomy,
        check_portrait_consistency,
    ],
    "portrait": [
        check_leaf_integrity, check_level_refinement, check_homoclinic_saddle,
        check_trajectory_in_cell, check_equilibrium_markers,
        check_output_determinism,
    ],
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}, all")
    return [fn(seed) for fn in SUITES[name]]


def run_suites(names, seed: int = 0) -> list[CheckResult]:
    out = []
    for name in names:
        out.extend(run_suite(name, seed))
    return out
