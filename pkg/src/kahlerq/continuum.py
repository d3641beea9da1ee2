"""One-dimensional grid quantisation carried out directly on (q(x), p(x)).

Grid points are cell centres ``x_j = x_min + (j + 1/2) h`` with
``h = (x_max - x_min) / n_points``. Derivatives use central differences with
zero padding outside the box, which keeps them exactly antisymmetric.
Grid norms carry the measure weight ``h`` so that they approximate
``integral |psi|^2 dx``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg

from .core import KahlerState, complexify, decomplexify
from .errors import BoundarySupport
from .operators import ComplexOperator, KahlerOperator, expectation, gamma_lift

BOUNDARY_BAND = 5
BOUNDARY_DECAY = 1e-8


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_points) + 0.5) * self.h

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_points * factor, self.hbar, self.mass)


class Stencil(str, Enum):
    CENTRAL2 = "Central2"
    CENTRAL4 = "Central4"


# offset -> weight of u_{j+offset} (antisymmetric partner implied)
_STENCILS = {
    Stencil.CENTRAL2: {1: 1 / 2},
    Stencil.CENTRAL4: {1: 8 / 12, 2: -1 / 12},
}


def derivative_matrix(grid: Grid1D, stencil: Stencil = Stencil.CENTRAL2) -> np.ndarray:
    """Antisymmetric central-difference d/dx with zero padding."""
    weights = _STENCILS[Stencil(stencil)]
    n = grid.n_points
    d = np.zeros((n, n))
    for off, w in weights.items():
        d += w * (np.eye(n, k=off) - np.eye(n, k=-off))
    return d / grid.h


def laplacian_matrix(grid: Grid1D) -> np.ndarray:
    n = grid.n_points
    return (np.eye(n, k=1) - 2 * np.eye(n) + np.eye(n, k=-1)) / grid.h**2


def sample(grid: Grid1D, psi: Callable[[np.ndarray], np.ndarray], normalize: bool = True) -> KahlerState:
    """Sample ``psi(x)`` on the grid, optionally to unit weighted norm."""
    values = np.asarray(psi(grid.x), dtype=complex)
    if normalize:
        values = values / np.sqrt(grid.h * np.vdot(values, values).real)
    return decomplexify(values)


def gaussian(x0: float = 0.0, sigma: float = 1.0, k: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    def psi(x):
        return np.exp(-((x - x0) ** 2) / (2 * sigma**2) + 1j * k * x)

    return psi


def grid_norm_sq(grid: Grid1D, u: KahlerState) -> float:
    return grid.h * u.norm_sq()


def grid_expectation(grid: Grid1D, m: KahlerOperator, u: KahlerState) -> tuple[float, float]:
    g_part, w_part = expectation(m, u)
    return grid.h * g_part, grid.h * w_part


def position_op(grid: Grid1D) -> KahlerOperator:
    return gamma_lift(ComplexOperator(np.diag(grid.x), np.zeros((grid.n_points, grid.n_points))))


def momentum_op(grid: Grid1D, stencil: Stencil = Stencil.CENTRAL2) -> KahlerOperator:
    """``P = -J hbar d/dx``, i.e. the lift of ``-i hbar D``."""
    d = grid.hbar * derivative_matrix(grid, stencil)
    return gamma_lift(ComplexOperator(np.zeros_like(d), -d))


@dataclass(frozen=True)
class CommutatorReport:
    n_points: int
    residual: float
    residual_fine: float | None
    ratio: float | None
    stencil: Stencil

    @property
    def order(self) -> float | None:
        return None if not self.ratio else float(np.log2(self.ratio))

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "stencil": Stencil(self.stencil).value,
            "residual": self.residual,
            "residual_fine": self.residual_fine,
            "ratio": self.ratio,
            "order": self.order,
        }


def commutator_residual(grid: Grid1D, u: KahlerState, stencil: Stencil = Stencil.CENTRAL2) -> float:
    """Relative interior residual of ``([P, Q] + hbar J) u``."""
    mag = np.abs(complexify(u))
    peak = float(np.max(mag))
    if peak == 0.0:
        return 0.0
    band = BOUNDARY_BAND
    if max(np.max(mag[:band]), np.max(mag[-band:])) > BOUNDARY_DECAY * peak:
        raise BoundarySupport("test state does not vanish near the box edges")
    d = grid.hbar * derivative_matrix(grid, stencil)
    x = grid.x

    def p_apply(q, p):
        # P (q; p) = -J hbar D (q; p) = (hbar D p, -hbar D q)
        return d @ p, -(d @ q)

    pq_q, pq_p = p_apply(x * u.q, x * u.p)
    qp_q, qp_p = p_apply(u.q, u.p)
    # ([P, Q] + hbar J) u, with J (q; p) = (-p; q)
    r = KahlerState(pq_q - x * qp_q - grid.hbar * u.p, pq_p - x * qp_p + grid.hbar * u.q)
    interior = slice(band, grid.n_points - band)
    num = np.sqrt(np.sum(r.q[interior] ** 2 + r.p[interior] ** 2))
    return float(num / np.sqrt(u.norm_sq()))


def commutator_check(grid: Grid1D, test_state, stencil: Stencil = Stencil.CENTRAL2) -> CommutatorReport:
    """Residual of ``[P, Q] = -hbar J`` and its convergence under grid doubling.

    ``test_state`` is either a callable ``psi(x)``, which is re-sampled on
    the doubled grid to estimate the order, or a fixed KahlerState.
    """
    if callable(test_state):
        coarse = commutator_residual(grid, sample(grid, test_state), stencil)
        fine_grid = grid.refined(2)
        fine = commutator_residual(fine_grid, sample(fine_grid, test_state), stencil)
        ratio = coarse / fine if fine > 0 else None
        return CommutatorReport(grid.n_points, coarse, fine, ratio, Stencil(stencil))
    return CommutatorReport(grid.n_points, commutator_residual(grid, test_state, stencil), None, None, Stencil(stencil))


def commutator_op(grid: Grid1D, stencil: Stencil = Stencil.CENTRAL2) -> KahlerOperator:
    """Dense ``[P, Q]``; for the continuum identity this is ``-hbar J``."""
    p = momentum_op(grid, stencil).block
    q = position_op(grid).block
    return KahlerOperator(p @ q - q @ p)


def schrodinger_hamiltonian(grid: Grid1D, potential) -> ComplexOperator:
    """``H = -(hbar^2 / 2m) Laplacian + V`` on the grid; real, so L = 0."""
    v = np.asarray(potential, dtype=float).reshape(-1)
    if v.size != grid.n_points:
        raise ValueError(f"potential has {v.size} values, grid has {grid.n_points} points")
    k = -(grid.hbar**2 / (2 * grid.mass)) * laplacian_matrix(grid) + np.diag(v)
    return ComplexOperator(k, np.zeros_like(k))


def harmonic_potential(grid: Grid1D, omega: float = 1.0, x0: float = 0.0) -> np.ndarray:
    return 0.5 * grid.mass * omega**2 * (grid.x - x0) ** 2


def potential_from_dict(grid: Grid1D, desc: dict) -> np.ndarray:
    kind = desc.get("kind", "free")
    if kind == "free":
        return np.zeros(grid.n_points)
    if kind == "harmonic":
        return harmonic_potential(grid, desc.get("omega", 1.0), desc.get("x0", 0.0))
    if kind == "table":
        values = np.asarray(desc["values"], dtype=float)
        if values.size != grid.n_points:
            raise ValueError(f"potential table has {values.size} values, grid has {grid.n_points}")
        return values
    raise ValueError(f"unknown potential kind {kind!r}")


def translation_generator(grid: Grid1D) -> KahlerOperator:
    """Momentum with hbar = 1, the generator of spatial translations."""
    return momentum_op(Grid1D(grid.x_min, grid.x_max, grid.n_points, 1.0, grid.mass))


def translation_operator(grid: Grid1D, a: float) -> KahlerOperator:
    """Lift of ``exp(-i a P)`` with ``P = -i D``, i.e. of the real ``exp(-a D)``."""
    shift = scipy.linalg.expm(-a * derivative_matrix(grid))
    return gamma_lift(ComplexOperator(shift, np.zeros_like(shift)))


def translate(grid: Grid1D, u: KahlerState, a: float) -> KahlerState:
    return translation_operator(grid, a).apply(u)


def centre_of_mass(grid: Grid1D, u: KahlerState) -> float:
    dens = u.q**2 + u.p**2
    return float(np.sum(grid.x * dens) / np.sum(dens))


def write_snapshot_csv(path, grid: Grid1D, u: KahlerState) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "q", "p", "|psi|^2"])
        for x, q, p in zip(grid.x, u.q, u.p):
            w.writerow([repr(float(x)), repr(float(q)), repr(float(p)), repr(float(q * q + p * p))])
    return path

