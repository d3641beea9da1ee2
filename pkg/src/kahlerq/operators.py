"""Lifting complex operators to real Kähler operators and back.

A complex operator ``L = X + iY`` acting on ``psi = q + ip`` gives
``Xq - Yp + i(Yq + Xp)``, so on stacked ``(q; p)`` vectors it is the real
block matrix ``[[X, -Y], [Y, X]]``. That layout is used everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import KahlerState, J_right, J_vec, metric_g, symplectic_omega
from .errors import DimensionMismatch, NotAProjector, StructureViolation, ZeroProbabilityBranch

STRUCTURE_TOL = 1e-10
ORACLE_TOL = 1e-12
ZERO_PROBABILITY = 1e-14


def _readonly(a, ndim=2) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Complex N x N operator stored as real and imaginary parts."""

    x_part: np.ndarray
    y_part: np.ndarray

    def __post_init__(self):
        x = _readonly(self.x_part)
        y = _readonly(self.y_part)
        if x.shape != y.shape or x.shape[0] != x.shape[1]:
            raise DimensionMismatch(f"parts must be equal square matrices, got {x.shape}, {y.shape}")
        object.__setattr__(self, "x_part", x)
        object.__setattr__(self, "y_part", y)

    @classmethod
    def from_matrix(cls, m) -> "ComplexOperator":
        m = np.asarray(m, dtype=complex)
        return cls(m.real, m.imag)

    @property
    def n(self) -> int:
        return self.x_part.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.x_part + 1j * self.y_part

    def hermitian_residual(self) -> float:
        if not (np.all(np.isfinite(self.x_part)) and np.all(np.isfinite(self.y_part))):
            return float("inf")
        return float(max(np.max(np.abs(self.x_part - self.x_part.T)),
                         np.max(np.abs(self.y_part + self.y_part.T))))

    def to_dict(self) -> dict:
        return {"n": self.n, "x": self.x_part.tolist(), "y": self.y_part.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ComplexOperator":
        op = cls(np.asarray(d["x"], dtype=float), np.asarray(d["y"], dtype=float))
        if "n" in d and d["n"] != op.n:
            raise DimensionMismatch(f"declared n={d['n']} but matrices are {op.n}x{op.n}")
        return op


@dataclass(frozen=True, eq=False)
class KahlerOperator:
    """Real 2N x 2N operator on stacked ``(q; p)`` vectors."""

    block: np.ndarray

    def __post_init__(self):
        b = _readonly(self.block)
        if b.shape[0] != b.shape[1] or b.shape[0] % 2:
            raise DimensionMismatch(f"block must be square of even size, got {b.shape}")
        object.__setattr__(self, "block", b)

    @property
    def n(self) -> int:
        return self.block.shape[0] // 2

    def __matmul__(self, other):
        if isinstance(other, KahlerOperator):
            return compose(self, other)
        if isinstance(other, KahlerState):
            return self.apply(other)
        return NotImplemented

    def apply(self, u: KahlerState) -> KahlerState:
        if u.n != self.n:
            raise DimensionMismatch(f"operator has N={self.n}, state has N={u.n}")
        return KahlerState.from_vector(self.block @ u.vector)

    def structure_residual(self) -> float:
        """Max deviation from the ``[[X, -Y], [Y, X]]`` pattern."""
        n = self.n
        b = self.block
        return float(max(np.max(np.abs(b[:n, :n] - b[n:, n:])),
                         np.max(np.abs(b[:n, n:] + b[n:, :n]))))

    def j_commutator_residual(self) -> float:
        return float(np.max(np.abs(J_right(self.block) - J_vec(self.block))))


def gamma_lift(l: ComplexOperator) -> KahlerOperator:
    x, y = l.x_part, l.y_part
    return KahlerOperator(np.block([[x, -y], [y, x]]))


def gamma_lower(m: KahlerOperator, tol: float = STRUCTURE_TOL) -> ComplexOperator:
    res = m.structure_residual()
    if res > tol:
        raise StructureViolation(
            f"matrix is not a lifted complex operator (block residual {res:.3e} > {tol:.1e})",
            residual=res,
        )
    n = m.n
    return ComplexOperator(m.block[:n, :n], m.block[n:, :n])


def compose(a: KahlerOperator, b: KahlerOperator) -> KahlerOperator:
    if a.block.shape != b.block.shape:
        raise DimensionMismatch(f"cannot compose {a.block.shape} with {b.block.shape}")
    return KahlerOperator(a.block @ b.block)


def k_adjoint(m: KahlerOperator) -> KahlerOperator:
    return KahlerOperator(m.block.T)


def hermitian_residuals(m: KahlerOperator) -> tuple[float, float]:
    """Return ``(|m^T - m|, |m Omega - Omega m|)`` in max-abs norm."""
    b = m.block
    sym = float(np.max(np.abs(b.T - b)))
    # Omega = -J, so the commutator with Omega is minus the one with J
    comm = float(np.max(np.abs(J_right(b) - J_vec(b))))
    return sym, comm


def is_k_hermitian(m: KahlerOperator, tol: float = STRUCTURE_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    sym, comm = hermitian_residuals(m)
    return sym <= tol and comm <= tol


def unitary_residuals(m: KahlerOperator) -> tuple[float, float]:
    """Return ``(|m^T J m - J|, |m^T m - I|)`` in max-abs norm."""
    b = m.block
    jm = J_vec(b)
    n2 = b.shape[0]
    jdense = J_vec(np.eye(n2))
    sympl = float(np.max(np.abs(b.T @ jm - jdense)))
    orth = float(np.max(np.abs(b.T @ b - np.eye(n2))))
    return sympl, orth


def is_k_unitary(m: KahlerOperator, tol: float = STRUCTURE_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    sympl, orth = unitary_residuals(m)
    return sympl <= tol and orth <= tol


def expectation(m: KahlerOperator, u: KahlerState) -> tuple[float, float]:
    """Return ``(g(u, m u), omega(u, m u))``.

    For a lifted Hermitian operator the second entry vanishes and the first
    is ``<psi|L|psi>``.
    """
    mu = m.apply(u)
    return metric_g(u, mu), symplectic_omega(u, mu)


@dataclass(frozen=True)
class MeasurementOutcome:
    probability: float
    post_state: KahlerState


def measure(p_lift: KahlerOperator, u: KahlerState, tol: float = STRUCTURE_TOL) -> MeasurementOutcome:
    """Projective measurement with a lifted projector; ``u`` is left untouched."""
    sym, comm = hermitian_residuals(p_lift)
    idem = float(np.max(np.abs(p_lift.block @ p_lift.block - p_lift.block)))
    if max(sym, comm, idem) > tol:
        raise NotAProjector(
            f"not a lifted orthogonal projector (sym {sym:.2e}, J-comm {comm:.2e}, idempotence {idem:.2e})"
        )
    nrm = u.norm_sq()
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"state is not normalised: g(u,u) = {nrm!r}")
    projected = p_lift.apply(u)
    prob = projected.norm_sq()
    if prob < ZERO_PROBABILITY:
        raise ZeroProbabilityBranch(f"branch probability {prob:.3e} is zero")
    return MeasurementOutcome(probability=min(prob, 1.0), post_state=projected * (1.0 / np.sqrt(prob)))


def projector_onto(v) -> ComplexOperator:
    """Rank-one projector ``|v><v|`` for a (not necessarily normalised) complex vector."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return ComplexOperator.from_matrix(np.outer(v, v.conj()))


def identity(n: int) -> KahlerOperator:
    return KahlerOperator(np.eye(2 * n))


def lift_matrix(m) -> KahlerOperator:
    """Shortcut: lift a complex numpy matrix."""
    return gamma_lift(ComplexOperator.from_matrix(m))


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
