"""Two-mode Fock space truncated by total excitation number.

Basis states |m, n> (m quanta in mode +1, n in mode -1) with m + n <= n_max,
grouped by manifold N = m + n and ordered (N,0), (N-1,1), ..., (0,N) inside
each manifold. The phase-difference unitary maps every manifold to itself, so
its square root and logarithm are computed exactly block by block.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.special import gammaln
from scipy.stats import poisson

DEFAULT_MAX_DIM = 5000
MAX_DIM_ENV = "DOPOCANON_MAX_DIM"
# eigenphases closer than this to -pi are taken as +pi
BRANCH_SNAP = 1e-12

PhaseFunction = Union[None, Callable[[int], float], Sequence[float], np.ndarray]


def max_dimension() -> int:
    env = os.environ.get(MAX_DIM_ENV)
    return int(env) if env else DEFAULT_MAX_DIM


class TruncatedSpace:
    """Basis of |m, n> with m + n <= n_max."""

    def __init__(self, n_max: int, max_dim: Optional[int] = None):
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        cap = max_dimension() if max_dim is None else max_dim
        dim = (n_max + 1) * (n_max + 2) // 2
        if dim > cap:
            raise ValueError(f"dimension {dim} exceeds cap {cap} (n_max={n_max})")
        self.n_max = n_max
        self.dim = dim
        self.basis = [(N - n, n) for N in range(n_max + 1) for n in range(N + 1)]
        self.m = np.array([b[0] for b in self.basis])
        self.n = np.array([b[1] for b in self.basis])

    def index(self, m: int, n: int) -> int:
        N = m + n
        if m < 0 or n < 0 or N > self.n_max:
            raise IndexError(f"|{m},{n}> is outside the truncated space")
        return N * (N + 1) // 2 + n

    def manifold(self, N: int) -> slice:
        return slice(N * (N + 1) // 2, (N + 1) * (N + 2) // 2)

    def manifolds(self) -> Iterator[tuple[int, slice]]:
        for N in range(self.n_max + 1):
            yield N, self.manifold(N)

    def ket(self, m: int, n: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(m, n)] = 1.0
        return v

    def __repr__(self) -> str:
        return f"TruncatedSpace(n_max={self.n_max}, dim={self.dim})"


def basis(n_max: int, max_dim: Optional[int] = None) -> TruncatedSpace:
    return TruncatedSpace(n_max, max_dim)


@dataclass
class OperatorMatrix:
    """Dense operator on a truncated space.

    ``hermitian`` and ``unitary`` are computed from the matrix on first access.
    Norms are Frobenius norms, an upper bound on the operator norm.
    """

    matrix: np.ndarray
    space: TruncatedSpace
    label: str = ""
    tol: float = 1e-10

    def __post_init__(self):
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"{self.label}: matrix shape {self.matrix.shape} != space dim")

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, self.space, f"{self.label}^dag", self.tol)

    def off_manifold_norm(self) -> float:
        """Norm of the entries connecting different manifolds."""
        mask = np.ones_like(self.matrix, dtype=bool)
        for _, s in self.space.manifolds():
            mask[s, s] = False
        return float(np.linalg.norm(self.matrix[mask]))

    @cached_property
    def block_diagonal(self) -> bool:
        return self.off_manifold_norm() == 0.0

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))

    def unitarity_defect(self) -> float:
        eye = np.eye(self.space.dim)
        if self.block_diagonal:
            sq = 0.0
            for _, s in self.space.manifolds():
                b = self.matrix[s, s]
                sq += np.linalg.norm(b.conj().T @ b - eye[s, s]) ** 2
            return float(np.sqrt(sq))
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - eye))

    @cached_property
    def hermitian(self) -> bool:
        return self.hermiticity_defect() < self.tol

    @cached_property
    def unitary(self) -> bool:
        return self.unitarity_defect() < self.tol

    def __repr__(self) -> str:
        return f"OperatorMatrix({self.label!r}, dim={self.space.dim})"


def phase_values(phi: PhaseFunction, n_max: int) -> np.ndarray:
    """phi(0..n_max) as an array wrapped to (-pi, pi]; None means phi = 0."""
    if phi is None:
        vals = np.zeros(n_max + 1)
    elif callable(phi):
        vals = np.array([phi(k) for k in range(n_max + 1)], dtype=float)
    else:
        vals = np.asarray(phi, dtype=float)
        if vals.shape[0] < n_max + 1:
            raise ValueError("phase table shorter than n_max + 1")
        vals = vals[: n_max + 1]
    return np.pi - np.mod(np.pi - vals, 2 * np.pi)


def _ladder(values: np.ndarray, rows: np.ndarray, cols: np.ndarray, dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    a[rows, cols] = values
    return a


def annihilation(j: int, s: TruncatedSpace) -> OperatorMatrix:
    """a_j |..n_j..> = sqrt(n_j) |..n_j - 1..> for j in {+1, -1}."""
    occ = _occupation(j, s)
    cols = np.nonzero(occ > 0)[0]
    rows = np.array([s.index(*_lower(j, s.basis[c])) for c in cols], dtype=int)
    mat = _ladder(np.sqrt(occ[cols]), rows, cols, s.dim)
    return OperatorMatrix(mat, s, f"a{'+' if j == 1 else '-'}")


def creation(j: int, s: TruncatedSpace) -> OperatorMatrix:
    a = annihilation(j, s)
    return OperatorMatrix(a.matrix.conj().T, s, f"{a.label}^dag")


def susskind_glogower(j: int, s: TruncatedSpace) -> OperatorMatrix:
    """(a_j^dag a_j + 1)^{-1/2} a_j: a one-sided shift |n>_j -> |n-1>_j."""
    a = annihilation(j, s).matrix
    # (a^dag a + 1)^{-1/2} is diagonal in the number basis
    inv_sqrt = 1.0 / np.sqrt(_occupation(j, s) + 1.0)
    return OperatorMatrix(inv_sqrt[:, None] * a, s, f"U{'+' if j == 1 else '-'}")


def _occupation(j: int, s: TruncatedSpace) -> np.ndarray:
    if j == 1:
        return s.m
    if j == -1:
        return s.n
    raise ValueError("mode index must be +1 or -1")


def _lower(j: int, mn: tuple[int, int]) -> tuple[int, int]:
    m, n = mn
    return (m - 1, n) if j == 1 else (m, n - 1)


def phase_difference_unitary(s: TruncatedSpace, phi: PhaseFunction = None) -> OperatorMatrix:
    """T = U+^dag U- + sum_n |0,n><n,0| e^{i phi(n)}.

    Within manifold N this is a cyclic shift |m,n> -> |m+1,n-1> closed by
    |N,0> -> e^{i phi(N)} |0,N>.
    """
    up = sparse.csr_matrix(susskind_glogower(1, s).matrix)
    um = sparse.csr_matrix(susskind_glogower(-1, s).matrix)
    ph = phase_values(phi, s.n_max)
    t = (up.conj().T @ um).toarray().astype(complex)
    for k in range(s.n_max + 1):
        t[s.index(0, k), s.index(k, 0)] += np.exp(1j * ph[k])
    return OperatorMatrix(t, s, "T")


@dataclass
class _Spectral:
    """Blockwise Schur data of T: T_N = Z_N diag(e^{i a_N}) Z_N^dag."""

    vectors: list = field(default_factory=list)
    phases: list = field(default_factory=list)


def _wrap_eigenphases(lam: np.ndarray) -> np.ndarray:
    a = np.angle(lam)
    a[a <= -np.pi + BRANCH_SNAP] += 2 * np.pi
    return a


def _spectral(t: OperatorMatrix) -> _Spectral:
    if not t.block_diagonal:
        raise ValueError("operator mixes manifolds; blockwise functions do not apply")
    out = _Spectral()
    for _, sl in t.space.manifolds():
        block = t.matrix[sl, sl]
        # complex Schur form of a normal matrix is diagonal with unitary Z
        d, z = scipy.linalg.schur(block, output="complex")
        off = np.linalg.norm(d - np.diag(np.diag(d)))
        if off > 1e-10 * max(1.0, np.linalg.norm(d)):
            raise np.linalg.LinAlgError("manifold block is not normal; no unitary diagonalization")
        out.vectors.append(z)
        out.phases.append(_wrap_eigenphases(np.diag(d)))
    return out


def _assemble(space: TruncatedSpace, spec: _Spectral, fn) -> np.ndarray:
    m = np.zeros((space.dim, space.dim), dtype=complex)
    for (_, sl), z, a in zip(space.manifolds(), spec.vectors, spec.phases):
        m[sl, sl] = (z * fn(a)) @ z.conj().T
    return m


def orientation_unitary(s: TruncatedSpace, phi: PhaseFunction = None) -> OperatorMatrix:
    """Principal square root of T, blockwise."""
    spec = _spectral(phase_difference_unitary(s, phi))
    return OperatorMatrix(_assemble(s, spec, lambda a: np.exp(0.5j * a)), s, "U")


def orientation_operator(s: TruncatedSpace, phi: PhaseFunction = None) -> OperatorMatrix:
    """theta = (1/i) ln U with principal eigenphases; spectrum in (-pi/2, pi/2]."""
    spec = _spectral(phase_difference_unitary(s, phi))
    return OperatorMatrix(_assemble(s, spec, lambda a: 0.5 * a + 0j), s, "theta")


@dataclass
class OrientationAlgebra:
    """T, U, theta and the ladder products that the rotating quadrature needs."""

    space: TruncatedSpace
    T: OperatorMatrix
    U: OperatorMatrix
    theta: OperatorMatrix
    U_ap: np.ndarray
    Udag_am: np.ndarray

    def quadrature(self, psi_L: float) -> OperatorMatrix:
        inner = (1j / np.sqrt(2)) * np.exp(-1j * psi_L) * (self.U_ap - self.Udag_am)
        return OperatorMatrix(inner + inner.conj().T, self.space, f"X^{psi_L:g}")


def orientation_algebra(s: TruncatedSpace, phi: PhaseFunction = None) -> OrientationAlgebra:
    """Build T, U and theta from one eigendecomposition per manifold."""
    t = phase_difference_unitary(s, phi)
    spec = _spectral(t)
    u = _assemble(s, spec, lambda a: np.exp(0.5j * a))
    theta = _assemble(s, spec, lambda a: 0.5 * a + 0j)
    ap = sparse.csr_matrix(annihilation(1, s).matrix)
    am = sparse.csr_matrix(annihilation(-1, s).matrix)
    # dense @ sparse as (sparse^T @ dense^T)^T
    u_ap = np.asarray((ap.T @ u.T).T)
    udag_am = np.asarray((am.T @ u.conj()).T)
    return OrientationAlgebra(
        s,
        t,
        OperatorMatrix(u, s, "U"),
        OperatorMatrix(theta, s, "theta"),
        u_ap,
        udag_am,
    )


def rotating_quadrature_op(
    psi_L: float,
    s: TruncatedSpace,
    phi: PhaseFunction = None,
    algebra: Optional[OrientationAlgebra] = None,
) -> OperatorMatrix:
    """X^psi = (i/sqrt2)[e^{-i psi}(U a+ - U^dag a-)] + H.c., U left of the ladder."""
    alg = algebra if algebra is not None else orientation_algebra(s, phi)
    return alg.quadrature(psi_L)


@dataclass
class TwoModeState:
    vector: np.ndarray
    space: TruncatedSpace
    #: probability mass lost to truncation before renormalization
    tail: float = 0.0

    def __post_init__(self):
        norm = np.linalg.norm(self.vector)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized (norm {norm})")

    def expect(self, op: OperatorMatrix) -> complex:
        return complex(np.vdot(self.vector, op.matrix @ self.vector))


def coherent_state(
    alpha_plus: complex,
    alpha_minus: complex,
    s: TruncatedSpace,
    tail_tol: float = 1e-8,
) -> TwoModeState:
    """Product coherent state |alpha_plus> (x) |alpha_minus>, truncated and renormalized.

    The excluded mass is the Poisson tail of N = m + n beyond n_max, with mean
    |alpha_plus|^2 + |alpha_minus|^2.
    """
    mean = abs(alpha_plus) ** 2 + abs(alpha_minus) ** 2
    tail = float(poisson.sf(s.n_max, mean)) if mean > 0 else 0.0
    if tail > tail_tol:
        raise ValueError(
            f"truncation tail {tail:.3g} exceeds {tail_tol:g}; raise n_max above {s.n_max}"
        )
    m, n = s.m, s.n
    log_mag = -0.5 * mean - 0.5 * (gammaln(m + 1) + gammaln(n + 1))
    vec = np.exp(log_mag) * _power(alpha_plus, m) * _power(alpha_minus, n)
    vec = vec / np.linalg.norm(vec)
    return TwoModeState(vec.astype(complex), s, tail)


def _power(z: complex, k: np.ndarray) -> np.ndarray:
    # z**0 = 1 including z = 0
    return np.where(k == 0, 1.0 + 0j, complex(z) ** k.astype(float))


def commutator_expectation(A: OperatorMatrix, B: OperatorMatrix, st: TwoModeState) -> complex:
    """<st| AB - BA |st>."""
    if A.space.dim != B.space.dim or A.space.dim != st.vector.shape[0]:
        raise ValueError("operator and state dimensions do not match")
    v = st.vector
    # <v|AB|v> = (A^dag v)^dag (B v)
    av, bv = A.matrix @ v, B.matrix @ v
    adv, bdv = A.matrix.conj().T @ v, B.matrix.conj().T @ v
    return complex(np.vdot(adv, bv) - np.vdot(bdv, av))


def required_n_max(alpha_plus: complex, alpha_minus: complex) -> int:
    """Conservative cutoff mean + 8 sqrt(mean) + 10 for a coherent probe."""
    mean = abs(alpha_plus) ** 2 + abs(alpha_minus) ** 2
    return int(np.ceil(mean + 8 * np.sqrt(mean) + 10))
