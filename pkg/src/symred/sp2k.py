"""k-body reduction to sp(2k)*: momentum map, Lie-Poisson dynamics,
trace-power Casimirs, and dual-pair verifiers.

The O(n)-invariants of k bodies are the pairwise dot products

    L_ij = q_i . q_j,   M_ij = q_j . p_i,   K_ij = p_i . p_j,

collected into the dual point X = [[-M^T, L], [K, M]] and paired with
algebra elements by <X, x> = tr(X^T x) / 2.  For k = 1 the blocks are
(w2, w1, w3) of the central-force reduction, and the induced flow on
(L, M, K) is required to equal the reduced central-force equations
exactly; that executable contract pins every sign and transpose
convention below.

Sign convention note: with the documented block assembly, the matrix
whose trace powers are conserved along the flow is the twisted assembly

    Xc = [[M^T, -L], [K, -M]]

(the actual momentum-map matrix of the Sp(2k) right action under the
pairing above; for k = 1, tr Xc^2 = -2 (w1 w3 - w2^2) = -2 C).
Casimir evaluation uses Xc.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .poisson import PoissonStructure, SmoothFunction

__all__ = [
    "GradientProjectionError",
    "Sp2kDualPoint",
    "MatrixHamiltonian",
    "CentralizerReport",
    "RankAudit",
    "sp2_basis",
    "sp_element",
    "sp_project",
    "momentum_map_phi",
    "pairing",
    "lie_poisson_vector_field",
    "lie_poisson_bracket",
    "canonical_field",
    "canonical_bracket_pullback",
    "casimirs",
    "collective_pairwise_hamiltonian",
    "remove_center_of_mass",
    "dual_pair_centralizer_check",
    "centralizer",
    "phi_rank_audit",
    "sp2k_poisson_structure",
    "flatten_point",
    "unflatten_point",
    "flat_hamiltonian",
    "gram_matrix",
]


class GradientProjectionError(ValueError):
    """The supplied gradient did not project onto sp(2k) cleanly."""


def sp2_basis() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Basis W1, W2, W3 of sp(2) matching the reduced central-force
    structure constants [W1,W2] = 2W1, [W1,W3] = 4W2, [W2,W3] = 2W3."""
    W1 = np.array([[0, 2], [0, 0]])
    W2 = np.array([[-1, 0], [0, 1]])
    W3 = np.array([[0, 0], [-2, 0]])
    return W1, W2, W3


def sp_element(alpha, beta, gamma) -> np.ndarray:
    """Assemble x = [[-alpha^T, beta], [gamma, alpha]]; beta, gamma symmetric."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    k = alpha.shape[0]
    if alpha.shape != (k, k) or beta.shape != (k, k) or gamma.shape != (k, k):
        raise ValueError("alpha, beta, gamma must be square of equal size")
    if not np.allclose(beta, beta.T) or not np.allclose(gamma, gamma.T):
        raise ValueError("beta and gamma must be symmetric")
    return np.block([[-alpha.T, beta], [gamma, alpha]])


def _sympl_J(k: int) -> np.ndarray:
    J = np.zeros((2 * k, 2 * k))
    J[:k, k:] = np.eye(k)
    J[k:, :k] = -np.eye(k)
    return J


def sp_project(A) -> np.ndarray:
    """Frobenius-orthogonal projection of a 2k x 2k matrix onto sp(2k).

    x is in sp(2k) iff J x is symmetric (J the canonical symplectic
    matrix), and A -> J A is a Frobenius isometry, so the projection is
    -J sym(J A).
    """
    A = np.asarray(A, dtype=float)
    k2 = A.shape[0]
    if A.shape != (k2, k2) or k2 % 2:
        raise ValueError("expected a square matrix of even size")
    J = _sympl_J(k2 // 2)
    S = J @ A
    return -J @ (0.5 * (S + S.T))


@dataclass(frozen=True)
class Sp2kDualPoint:
    """A point of sp(2k)* held as its Gram blocks.

    M_ij = q_j . p_i; L and K are the position and momentum Gram
    matrices (symmetric, PSD when produced by the momentum map, with
    rank of the joint Gram matrix at most the space dimension n).
    """

    M: np.ndarray
    L: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        L = np.asarray(self.L, dtype=float)
        K = np.asarray(self.K, dtype=float)
        for name, B in (("M", M), ("L", L), ("K", K)):
            if B.shape != M.shape or B.ndim != 2 or B.shape[0] != B.shape[1]:
                raise ValueError(f"block {name} must be square and sized like M")
        if not np.allclose(L, L.T, atol=1e-12 * (1 + abs(L).max())):
            raise ValueError("L must be symmetric")
        if not np.allclose(K, K.T, atol=1e-12 * (1 + abs(K).max())):
            raise ValueError("K must be symmetric")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", 0.5 * (L + L.T))
        object.__setattr__(self, "K", 0.5 * (K + K.T))

    @property
    def k(self) -> int:
        return self.M.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Documented assembly [[-M^T, L], [K, M]]."""
        return np.block([[-self.M.T, self.L], [self.K, self.M]])

    @property
    def casimir_matrix(self) -> np.ndarray:
        """Twisted assembly [[M^T, -L], [K, -M]] whose trace powers are
        conserved along the reduced flow (see module docstring)."""
        return np.block([[self.M.T, -self.L], [self.K, -self.M]])

    @classmethod
    def from_matrix(cls, X) -> "Sp2kDualPoint":
        X = np.asarray(X, dtype=float)
        k = X.shape[0] // 2
        return cls(M=X[k:, k:], L=X[:k, k:], K=X[k:, :k])


def gram_matrix(X: Sp2kDualPoint) -> np.ndarray:
    """Joint Gram matrix [[L, M^T], [M, K]] of the 2k underlying vectors;
    PSD of rank <= n exactly when X is in the image of the momentum map."""
    return np.block([[X.L, X.M.T], [X.M, X.K]])


def momentum_map_phi(qs, ps) -> Sp2kDualPoint:
    """Pairwise dot products of k bodies; qs, ps have shape (k, n)."""
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    if qs.shape != ps.shape:
        raise ValueError("qs and ps must have matching shape (k, n)")
    return Sp2kDualPoint(M=ps @ qs.T, L=qs @ qs.T, K=ps @ ps.T)


def pairing(X, x) -> float:
    """<X, x> = tr(X^T x) / 2 with X in the documented assembly."""
    Xm = X.matrix if isinstance(X, Sp2kDualPoint) else np.asarray(X, dtype=float)
    return 0.5 * float(np.trace(Xm.T @ np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class MatrixHamiltonian:
    """A Hamiltonian on sp(2k)* with an ambient entrywise gradient.

    ``gradient`` returns the 2k x 2k matrix of partials of the value with
    respect to the entries of the documented assembly, treating all
    entries as unconstrained; the pairing-orthogonal projection makes the
    induced reduced field independent of that extension choice.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, X) -> float:
        Xm = X.matrix if isinstance(X, Sp2kDualPoint) else np.asarray(X, dtype=float)
        return float(self.value(Xm))


def _block_gradients(H: MatrixHamiltonian, X: Sp2kDualPoint,
                     tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project the ambient gradient and read off (H_L, H_M, H_K)."""
    k = X.k
    G = np.asarray(H.gradient(X.matrix), dtype=float)
    if G.shape != (2 * k, 2 * k):
        raise ValueError(f"gradient must be {2*k} x {2*k}")
    xi = sp_project(2.0 * G)
    J = _sympl_J(k)
    defect = np.abs(J @ xi - (J @ xi).T).max()
    if not np.isfinite(defect) or defect > tol * (1.0 + np.abs(xi).max()):
        raise GradientProjectionError(
            f"projected gradient leaves sp(2k) by {defect:.3e}"
        )
    # xi = [[-H_M^T, 2 H_L], [2 H_K, H_M]]
    H_M = xi[k:, k:]
    H_L = 0.5 * xi[:k, k:]
    H_K = 0.5 * xi[k:, :k]
    return H_L, H_M, H_K


def lie_poisson_vector_field(H: MatrixHamiltonian, X: Sp2kDualPoint) -> Sp2kDualPoint:
    """Reduced equations of motion on sp(2k)*, returned as block rates.

    The formula is the exact push-forward of the canonical flow of
    H o phi through the momentum map (the Poisson-map property); for
    k = 1 it reduces entrywise to the central-force system.
    """
    H_L, H_M, H_K = _block_gradients(H, X)
    L, M, K = X.L, X.M, X.K
    Ldot = H_M @ L + L @ H_M.T + 2.0 * (H_K @ M + M.T @ H_K)
    Mdot = -2.0 * H_L @ L + M @ H_M.T - H_M.T @ M + 2.0 * K @ H_K
    Kdot = -(K @ H_M + H_M.T @ K) - 2.0 * (M @ H_L + H_L @ M.T)
    return Sp2kDualPoint(M=Mdot, L=Ldot, K=Kdot)


def lie_poisson_bracket(F: MatrixHamiltonian, G: MatrixHamiltonian,
                        X: Sp2kDualPoint) -> float:
    """{F, G}(X) = dF . X_G, evaluated blockwise."""
    F_L, F_M, F_K = _block_gradients(F, X)
    rate = lie_poisson_vector_field(G, X)
    return float(np.sum(F_L * rate.L) + np.sum(F_M * rate.M) + np.sum(F_K * rate.K))


def canonical_field(H: MatrixHamiltonian, qs, ps) -> tuple[np.ndarray, np.ndarray]:
    """Canonical flow of the collective Hamiltonian H o phi on (k, n) arrays."""
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    X = momentum_map_phi(qs, ps)
    H_L, H_M, H_K = _block_gradients(H, X)
    Q = qs.T  # columns are bodies
    P = ps.T
    DQ = 2.0 * Q @ H_L + P @ H_M
    DP = Q @ H_M.T + 2.0 * P @ H_K
    return DP.T, -DQ.T  # (qdot, pdot) back in (k, n) layout


def canonical_bracket_pullback(F: MatrixHamiltonian, G: MatrixHamiltonian,
                               qs, ps) -> float:
    """{F o phi, G o phi} in the canonical bracket on T*R^(nk)."""
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    X = momentum_map_phi(qs, ps)
    Q, P = qs.T, ps.T

    def grads(Ham):
        H_L, H_M, H_K = _block_gradients(Ham, X)
        return 2.0 * Q @ H_L + P @ H_M, Q @ H_M.T + 2.0 * P @ H_K

    FQ, FP = grads(F)
    GQ, GP = grads(G)
    return float(np.sum(FQ * GP) - np.sum(FP * GQ))


def casimirs(X: Sp2kDualPoint, n: int) -> list[float]:
    """Trace powers tr Xc^(2j), j = 1..floor(n/2), of the sign-fixed
    assembly (conserved along every reduced flow; for k = 1 the single
    value is -2 (w1 w3 - w2^2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    Xc = X.casimir_matrix
    out = []
    p = Xc @ Xc
    acc = p.copy()
    for _ in range(n // 2):
        out.append(float(np.trace(acc)))
        acc = acc @ p
    return out


def collective_pairwise_hamiltonian(masses, V: Callable[[float], float],
                                    Vprime: Callable[[float], float],
                                    name: str = "pairwise") -> MatrixHamiltonian:
    """H(X) = sum_i K_ii / (2 m_i) + sum_{i<j} V(L_ii - 2 L_ij + L_jj).

    The potential argument is the squared separation |q_i - q_j|^2.
    """
    masses = np.asarray(masses, dtype=float)
    if np.any(masses <= 0):
        raise ValueError("masses must be positive")
    k = masses.size

    def split(Xm):
        return Xm[:k, k:], Xm[k:, k:], Xm[k:, :k]  # L, M, K

    def value(Xm):
        L, _, K = split(Xm)
        h = float(np.sum(np.diag(K) / (2.0 * masses)))
        for i in range(k):
            for j in range(i + 1, k):
                h += V(L[i, i] - 2.0 * L[i, j] + L[j, j])
        return h

    def gradient(Xm):
        L, _, K = split(Xm)
        H_L = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                dv = Vprime(L[i, i] - 2.0 * L[i, j] + L[j, j])
                H_L[i, i] += dv
                H_L[j, j] += dv
                H_L[i, j] -= dv
                H_L[j, i] -= dv
        H_K = np.diag(1.0 / (2.0 * masses))
        G = np.zeros((2 * k, 2 * k))
        G[:k, k:] = H_L
        G[k:, :k] = H_K
        return G

    return MatrixHamiltonian(value=value, gradient=gradient, name=name)


def remove_center_of_mass(qs, ps, masses) -> tuple[np.ndarray, np.ndarray]:
    """Translate to the mass-weighted barycenter and boost so the total
    momentum vanishes; pairwise separations are untouched."""
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    masses = np.asarray(masses, dtype=float)
    if np.any(masses <= 0):
        raise ValueError("masses must be positive")
    total = masses.sum()
    com = (masses[:, None] * qs).sum(axis=0) / total
    vel = ps.sum(axis=0) / total
    return qs - com, ps - masses[:, None] * vel


# ---------------------------------------------------------------------------
# Dual-pair verifiers.

def _sp_basis_matrices(k: int) -> list[np.ndarray]:
    """Basis of sp(2k): alpha runs over all E_ab, beta and gamma over the
    symmetric basis; dimension k (2k + 1)."""
    basis = []
    zero = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            E = np.zeros((k, k))
            E[a, b] = 1.0
            basis.append(sp_element(E, zero, zero))
    for a in range(k):
        for b in range(a, k):
            S = np.zeros((k, k))
            S[a, b] = S[b, a] = 1.0
            basis.append(sp_element(zero, S, zero))
            basis.append(sp_element(zero, zero, S))
    return basis


def _so_basis_matrices(n: int) -> list[np.ndarray]:
    basis = []
    for a in range(n):
        for b in range(a + 1, n):
            R = np.zeros((n, n))
            R[a, b] = 1.0
            R[b, a] = -1.0
            basis.append(R)
    return basis


def centralizer(ambient_basis: list[np.ndarray], generators: list[np.ndarray],
                tol: float = 1e-10) -> list[np.ndarray]:
    """Basis of {x in span(ambient_basis) : [x, g] = 0 for all g}.

    Computed as the SVD null space of the stacked commutator map.
    """
    dim = len(ambient_basis)
    size = ambient_basis[0].shape[0]
    rows = []
    for g in generators:
        block = np.stack([(B @ g - g @ B).reshape(-1) for B in ambient_basis], axis=1)
        rows.append(block)
    A = np.vstack(rows)  # (len(generators) * size^2, dim)
    _, s, Vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    null = [Vt[i] for i in range(dim) if i >= s.size or s[i] <= tol * max(smax, 1.0)]
    out = []
    for coeffs in null:
        mat = sum(c * B for c, B in zip(coeffs, ambient_basis))
        out.append(mat.reshape(size, size))
    return out


@dataclass(frozen=True)
class CentralizerReport:
    """Mutual-centralizer audit of the (O(n), Sp(2)) pair inside sp(2n)."""

    so_generators: list[np.ndarray]
    sp_generators: list[np.ndarray]
    centralizer_of_so: list[np.ndarray]
    centralizer_of_sp: list[np.ndarray]

    @property
    def dim_centralizer_of_so(self) -> int:
        return len(self.centralizer_of_so)

    @property
    def dim_centralizer_of_sp(self) -> int:
        return len(self.centralizer_of_sp)


def dual_pair_centralizer_check(n: int = 3, k: int = 1) -> CentralizerReport:
    """Compute both centralizers of the dual pair inside sp(2 n k).

    Phase-space coordinates are grouped as (q_1..q_k, p_1..p_k) with each
    body n-dimensional, so the orthogonal algebra embeds block-diagonally
    as kron(I_2k, R) and an element x of sp(2k) (acting on the body
    index) embeds as kron(x^T, I_n).  For n = 3, k = 1 both centralizers
    are 3-dimensional and the centralizer of the orthogonal side is
    spanned by the embedded W1, W2, W3.
    """
    ambient = _sp_basis_matrices(n * k)
    so_gens = [np.kron(np.eye(2 * k), R) for R in _so_basis_matrices(n)]
    sp_gens = [np.kron(x.T, np.eye(n)) for x in _sp_basis_matrices(k)]
    return CentralizerReport(
        so_generators=so_gens,
        sp_generators=sp_gens,
        centralizer_of_so=centralizer(ambient, so_gens),
        centralizer_of_sp=centralizer(ambient, sp_gens),
    )


# ---------------------------------------------------------------------------
# Rank and dimension audits.

@dataclass(frozen=True)
class RankAudit:
    """Numerical rank of d(phi) at a generic state next to the closed-form
    dimension counts."""

    n: int
    k: int
    jacobian_rank: int
    lie_poisson_dim: int
    image_dim: int
    leaf_dim: int


def phi_rank_audit(n: int, k: int, seed: int = 0) -> RankAudit:
    """Rank of the momentum-map derivative at a fixed-seed Gaussian state.

    phi is quadratic, so directional derivatives are assembled exactly
    (no differencing).  Rank threshold: 1e-8 times the largest singular
    value.  Closed forms: image dimension 2nk - n(n-1)/2 and leaf
    dimension 2nk - n(n-1)/2 - floor(n/2).
    """
    rng = np.random.default_rng(seed)
    qs = rng.normal(size=(k, n))
    ps = rng.normal(size=(k, n))
    cols = []
    for dq, dp in _coordinate_directions(k, n):
        dL = dq @ qs.T + qs @ dq.T
        dM = dp @ qs.T + ps @ dq.T
        dK = dp @ ps.T + ps @ dp.T
        cols.append(np.concatenate([dL.reshape(-1), dM.reshape(-1), dK.reshape(-1)]))
    Jac = np.stack(cols, axis=1)
    s = np.linalg.svd(Jac, compute_uv=False)
    rank = int(np.sum(s > 1e-8 * s[0]))
    image_dim = 2 * n * k - n * (n - 1) // 2
    return RankAudit(
        n=n, k=k, jacobian_rank=rank,
        lie_poisson_dim=k * (2 * k + 1),
        image_dim=image_dim,
        leaf_dim=image_dim - n // 2,
    )


def _coordinate_directions(k: int, n: int):
    for i in range(k):
        for a in range(n):
            dq = np.zeros((k, n))
            dq[i, a] = 1.0
            yield dq, np.zeros((k, n))
    for i in range(k):
        for a in range(n):
            dp = np.zeros((k, n))
            dp[i, a] = 1.0
            yield np.zeros((k, n)), dp


# ---------------------------------------------------------------------------
# Flattened-coordinate view (plugs into the generic Poisson integrators).

def _coordinate_index(k: int):
    """Coordinate order: upper-triangular L, all of M, upper-triangular K."""
    coords = []
    for a in range(k):
        for b in range(a, k):
            coords.append(("L", a, b))
    for a in range(k):
        for b in range(k):
            coords.append(("M", a, b))
    for a in range(k):
        for b in range(a, k):
            coords.append(("K", a, b))
    return coords


def flatten_point(X: Sp2kDualPoint) -> np.ndarray:
    k = X.k
    parts = []
    for block, a, b in _coordinate_index(k):
        parts.append(getattr(X, block)[a, b])
    return np.array(parts)


def unflatten_point(w, k: int) -> Sp2kDualPoint:
    w = np.asarray(w, dtype=float)
    L = np.zeros((k, k))
    M = np.zeros((k, k))
    K = np.zeros((k, k))
    for val, (block, a, b) in zip(w, _coordinate_index(k)):
        if block == "M":
            M[a, b] = val
        elif block == "L":
            L[a, b] = L[b, a] = val
        else:
            K[a, b] = K[b, a] = val
    return Sp2kDualPoint(M=M, L=L, K=K)


def _coordinate_block_gradients(k: int):
    """Constant block gradients (H_L, H_M, H_K) of each flat coordinate."""
    grads = []
    for block, a, b in _coordinate_index(k):
        H_L = np.zeros((k, k))
        H_M = np.zeros((k, k))
        H_K = np.zeros((k, k))
        if block == "M":
            H_M[a, b] = 1.0
        else:
            tgt = H_L if block == "L" else H_K
            if a == b:
                tgt[a, a] = 1.0
            else:
                tgt[a, b] = tgt[b, a] = 0.5
        grads.append((H_L, H_M, H_K))
    return grads


def _field_from_blocks(H_L, H_M, H_K, X: Sp2kDualPoint) -> Sp2kDualPoint:
    L, M, K = X.L, X.M, X.K
    Ldot = H_M @ L + L @ H_M.T + 2.0 * (H_K @ M + M.T @ H_K)
    Mdot = -2.0 * H_L @ L + M @ H_M.T - H_M.T @ M + 2.0 * K @ H_K
    Kdot = -(K @ H_M + H_M.T @ K) - 2.0 * (M @ H_L + H_L @ M.T)
    return Sp2kDualPoint(M=Mdot, L=Ldot, K=Kdot)


def sp2k_poisson_structure(k: int) -> PoissonStructure:
    """The Lie-Poisson structure on sp(2k)* in flat coordinates.

    The tensor is linear in the state; its structure constants are
    extracted once by evaluating coordinate-function fields on the
    coordinate basis.  Registered Casimirs: tr Xc^(2j) for j = 1..k.
    For k = 1 the tensor coincides entrywise with the reduced
    central-force tensor in (w1, w2, w3).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dim = k * (2 * k + 1)
    grads = _coordinate_block_gradients(k)
    # S[i, j, m]: {x_i, x_j} = sum_m S[i, j, m] x_m
    S = np.zeros((dim, dim, dim))
    for m in range(dim):
        unit = np.zeros(dim)
        unit[m] = 1.0
        Xm = unflatten_point(unit, k)
        for j, (H_L, H_M, H_K) in enumerate(grads):
            S[:, j, m] = flatten_point(_field_from_blocks(H_L, H_M, H_K, Xm))

    def tensor(w):
        return S @ np.asarray(w, dtype=float)

    cas = []
    for j in range(1, k + 1):
        cas.append(_trace_power_casimir(k, j))
    return PoissonStructure(dim=dim, tensor=tensor, casimirs=tuple(cas),
                            name=f"sp({2 * k})*")


def _trace_power_casimir(k: int, j: int) -> SmoothFunction:
    coords = _coordinate_index(k)

    def value(w):
        Xc = unflatten_point(w, k).casimir_matrix
        return float(np.trace(np.linalg.matrix_power(Xc, 2 * j)))

    def gradient(w):
        Xc = unflatten_point(w, k).casimir_matrix
        D = 2 * j * np.linalg.matrix_power(Xc, 2 * j - 1).T  # d tr(X^2j) / dX_ab
        g = np.empty(len(coords))
        for i, (block, a, b) in enumerate(coords):
            # derivative of Xc entries with respect to the flat coordinate
            if block == "M":
                g[i] = D[k + a, k + b] * (-1.0) + D[b, a]
            elif block == "L":
                if a == b:
                    g[i] = -D[a, k + b]
                else:
                    g[i] = -D[a, k + b] - D[b, k + a]
            else:  # K
                if a == b:
                    g[i] = D[k + a, b]
                else:
                    g[i] = D[k + a, b] + D[k + b, a]
        return g

    return SmoothFunction(value=value, gradient=gradient, name=f"trX^{2 * j}")


def flat_hamiltonian(H: MatrixHamiltonian, k: int) -> SmoothFunction:
    """View a matrix Hamiltonian as a smooth function of flat coordinates."""
    coords = _coordinate_index(k)

    def value(w):
        return float(H.value(unflatten_point(w, k).matrix))

    def gradient(w):
        X = unflatten_point(w, k)
        H_L, H_M, H_K = _block_gradients(H, X)
        g = np.empty(len(coords))
        for i, (block, a, b) in enumerate(coords):
            if block == "M":
                g[i] = H_M[a, b]
            elif block == "L":
                g[i] = H_L[a, b] if a == b else 2.0 * H_L[a, b]
            else:
                g[i] = H_K[a, b] if a == b else 2.0 * H_K[a, b]
        return g

    return SmoothFunction(value=value, gradient=gradient, name=H.name or "H")
