"""Schrödinger evolution as a classical linear Hamiltonian flow on (q, p).

With ``H = K + iL`` (K symmetric, L skew) the equations of motion are::

    dq/dt =  K p + L q
    dp/dt = -K q + L p

generated by ``H_sym = 1/2 (p.Kp + q.Kq) + p.Lq``. Units have hbar = 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.linalg

from . import kernels
from .core import KahlerState, complexify, decomplexify
from .errors import DimensionMismatch, NotHermitian, SolverFailure
from .operators import ComplexOperator, KahlerOperator, gamma_lift, unitary_residuals

HERMITIAN_TOL = 1e-10
SOLVER_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HamiltonianSplit:
    k_sym: np.ndarray
    l_skew: np.ndarray

    @property
    def n(self) -> int:
        return self.k_sym.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.k_sym + 1j * self.l_skew

    def operator(self) -> ComplexOperator:
        return ComplexOperator(self.k_sym, self.l_skew)

    def generator(self) -> np.ndarray:
        """Real 2N x 2N matrix M with ``d(q;p)/dt = M (q;p)``; the lift of -iH."""
        k, l = self.k_sym, self.l_skew
        return np.block([[l, k], [-k, l]])


class Scheme(str, Enum):
    EXACT = "ExactExponential"
    MIDPOINT = "ImplicitMidpoint"


@dataclass(eq=False)
class Trajectory:
    """Stored states of a trajectory; row i of ``vectors`` is ``(q; p)`` at ``times[i]``.

    ``step_map`` is the real one-step propagator over ``dt`` (None when no
    step was taken).
    """

    times: np.ndarray
    vectors: np.ndarray
    scheme: Scheme
    dt: float = 0.0
    step_map: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.times.size != self.vectors.shape[0]:
            raise DimensionMismatch("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def n(self) -> int:
        return self.vectors.shape[1] // 2

    @property
    def states(self) -> list[KahlerState]:
        return [KahlerState.from_vector(v) for v in self.vectors]

    @property
    def final(self) -> KahlerState:
        return KahlerState.from_vector(self.vectors[-1])


def split_hamiltonian(h: ComplexOperator, tol: float = HERMITIAN_TOL) -> HamiltonianSplit:
    res = h.hermitian_residual()
    if res > tol:
        raise NotHermitian(f"Hamiltonian is not Hermitian (residual {res:.3e} > {tol:.1e})", residual=res)
    k = (h.x_part + h.x_part.T) / 2
    l = (h.y_part - h.y_part.T) / 2
    return HamiltonianSplit(k, l)


def _check_dims(hs: HamiltonianSplit, u: KahlerState) -> None:
    if hs.n != u.n:
        raise DimensionMismatch(f"Hamiltonian has N={hs.n}, state has N={u.n}")


def vector_field(hs: HamiltonianSplit, u: KahlerState) -> tuple[np.ndarray, np.ndarray]:
    _check_dims(hs, u)
    k, l = hs.k_sym, hs.l_skew
    return k @ u.p + l @ u.q, -k @ u.q + l @ u.p


def hsym_value(hs: HamiltonianSplit, u: KahlerState) -> float:
    _check_dims(hs, u)
    k, l = hs.k_sym, hs.l_skew
    q, p = u.q, u.p
    return float(0.5 * (p @ k @ p + q @ k @ q) + p @ l @ q)


def _hsym_rows(hs: HamiltonianSplit, vectors: np.ndarray) -> np.ndarray:
    n = hs.n
    q, p = vectors[:, :n], vectors[:, n:]
    k, l = hs.k_sym, hs.l_skew
    return 0.5 * (np.einsum("ti,ij,tj->t", p, k, p) + np.einsum("ti,ij,tj->t", q, k, q)) + np.einsum(
        "ti,ij,tj->t", p, l, q
    )


def _eigh_checked(h: ComplexOperator) -> tuple[np.ndarray, np.ndarray]:
    res = h.hermitian_residual()
    if res > HERMITIAN_TOL:
        raise NotHermitian(f"Hamiltonian is not Hermitian (residual {res:.3e})", residual=res)
    m = h.matrix
    return np.linalg.eigh((m + m.conj().T) / 2)


def propagator(h: ComplexOperator, t: float) -> KahlerOperator:
    """Lift of ``exp(-iHt)``, built from the Hermitian eigendecomposition."""
    lam, vecs = _eigh_checked(h)
    u = (vecs * np.exp(-1j * lam * t)) @ vecs.conj().T
    return gamma_lift(ComplexOperator.from_matrix(u))


def evolve_exact(h: ComplexOperator, u0: KahlerState, t: float) -> KahlerState:
    if h.n != u0.n:
        raise DimensionMismatch(f"Hamiltonian has N={h.n}, state has N={u0.n}")
    if t == 0:
        _eigh_checked(h)
        return u0
    lam, vecs = _eigh_checked(h)
    psi = vecs @ (np.exp(-1j * lam * t) * (vecs.conj().T @ complexify(u0)))
    return decomplexify(psi)


def exact_trajectory(h: ComplexOperator, u0: KahlerState, t_final: float, steps: int, stride: int = 1) -> Trajectory:
    """Sample the exact flow at ``steps + 1`` equispaced times (every ``stride``-th kept)."""
    if steps < 1 or t_final <= 0:
        raise ValueError("need steps >= 1 and t_final > 0")
    lam, vecs = _eigh_checked(h)
    keep = np.arange(0, steps + 1, stride)
    if keep[-1] != steps:
        keep = np.append(keep, steps)
    dt = t_final / steps
    times = keep * dt
    c0 = vecs.conj().T @ complexify(u0)
    psi = (np.exp(-1j * np.outer(times, lam)) * c0) @ vecs.T
    vectors = np.concatenate([psi.real, psi.imag], axis=1)
    return Trajectory(times, vectors, Scheme.EXACT, dt=dt, step_map=propagator(h, dt).block)


def cayley_map(hs: HamiltonianSplit, dt: float) -> np.ndarray:
    """One implicit-midpoint step ``(I - dt/2 M)^{-1} (I + dt/2 M)``."""
    m = hs.generator()
    eye = np.eye(m.shape[0])
    a = eye - 0.5 * dt * m
    b = eye + 0.5 * dt * m
    s = scipy.linalg.solve(a, b)
    res = float(np.max(np.abs(a @ s - b)))
    if not np.isfinite(res) or res > SOLVER_TOL:
        raise SolverFailure(f"midpoint linear solve residual {res:.3e} exceeds {SOLVER_TOL:.0e}")
    return s


def evolve_midpoint(hs: HamiltonianSplit, u0: KahlerState, t_final: float, steps: int, stride: int = 1) -> Trajectory:
    """Implicit-midpoint (Cayley) integration, keeping every ``stride``-th state.

    For a linear, J-commuting generator the one-step map is both symplectic
    and orthogonal, so quadratic invariants and the norm are preserved up to
    roundoff.
    """
    _check_dims(hs, u0)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    dt = t_final / steps
    s = cayley_map(hs, dt)
    idx, vectors = kernels.propagate_linear(s, u0.vector, steps, stride)
    return Trajectory(idx * dt, vectors, Scheme.MIDPOINT, dt=dt, step_map=s)


@dataclass(frozen=True)
class ConservationReport:
    hsym_drift: float
    gnorm_drift: float
    omega_defect: float
    symplectic_residual: float = 0.0
    orthogonal_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "hsym_drift": self.hsym_drift,
            "gnorm_drift": self.gnorm_drift,
            "omega_defect": self.omega_defect,
            "symplectic_residual": self.symplectic_residual,
            "orthogonal_residual": self.orthogonal_residual,
        }


def conservation_report(hs: HamiltonianSplit, traj: Trajectory, pairs: int = 20, seed: int = 0) -> ConservationReport:
    hs_vals = _hsym_rows(hs, traj.vectors)
    gn = np.einsum("ti,ti->t", traj.vectors, traj.vectors)
    hsym_drift = float(np.max(np.abs(hs_vals - hs_vals[0])))
    gnorm_drift = float(np.max(np.abs(gn - gn[0])))
    if traj.step_map is None or len(traj) < 2:
        return ConservationReport(hsym_drift, gnorm_drift, 0.0)
    s = traj.step_map
    n = traj.n
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((pairs, 2 * n))
    v = rng.standard_normal((pairs, 2 * n))

    def omega_rows(a, b):
        return np.einsum("ti,ti->t", a[:, :n], b[:, n:]) - np.einsum("ti,ti->t", a[:, n:], b[:, :n])

    su, sv = u @ s.T, v @ s.T
    defect = float(np.max(np.abs(omega_rows(su, sv) - omega_rows(u, v))))
    sympl, orth = unitary_residuals(KahlerOperator(s))
    return ConservationReport(hsym_drift, gnorm_drift, defect, sympl, orth)


def write_trajectory_csv(path, hs: HamiltonianSplit, traj: Trajectory) -> Path:
    path = Path(path)
    n = traj.n
    header = ["t"] + [f"q_{i + 1}" for i in range(n)] + [f"p_{i + 1}" for i in range(n)] + ["hsym", "gnorm"]
    hs_vals = _hsym_rows(hs, traj.vectors)
    gn = np.einsum("ti,ti->t", traj.vectors, traj.vectors)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, row, e, g in zip(traj.times, traj.vectors, hs_vals, gn):
            w.writerow([repr(float(x)) for x in (t, *row, e, g)])
    return path
