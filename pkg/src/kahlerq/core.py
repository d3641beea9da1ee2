"""Real Kähler structure on R^{2N}: states, metric, symplectic form, J and Omega.

A state ``(q, p)`` represents the complex vector ``psi = q + i p``. Stacked
vectors always put ``q`` first, so ``J`` acts as ``(q, p) -> (-p, q)`` and
``Omega = -J``. Neither matrix is ever materialised; both are applied as
permute-and-negate operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KahlerState:
    """Point of the real Kähler space, ``psi = q + i p``."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _frozen(self.q)
        p = _frozen(self.p)
        if q.shape != p.shape:
            raise DimensionMismatch(f"q has length {q.size}, p has length {p.size}")
        if q.size < 1:
            raise DimensionMismatch("state must have N >= 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def vector(self) -> np.ndarray:
        """Stacked real vector ``(q; p)`` of length 2N."""
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, v) -> "KahlerState":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size % 2:
            raise DimensionMismatch(f"stacked vector has odd length {v.size}")
        n = v.size // 2
        return cls(v[:n], v[n:])

    def norm_sq(self) -> float:
        return metric_g(self, self)

    def normalized(self) -> "KahlerState":
        nrm = np.sqrt(self.norm_sq())
        return KahlerState(self.q / nrm, self.p / nrm)

    def __neg__(self):
        return KahlerState(-self.q, -self.p)

    def __add__(self, other):
        _check_same(self, other)
        return KahlerState(self.q + other.q, self.p + other.p)

    def __sub__(self, other):
        _check_same(self, other)
        return KahlerState(self.q - other.q, self.p - other.p)

    def __mul__(self, scalar):
        return KahlerState(scalar * self.q, scalar * self.p)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, KahlerState):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)

    def __repr__(self):
        return f"KahlerState(q={self.q.tolist()}, p={self.p.tolist()})"


def _check_same(u: KahlerState, v: KahlerState) -> None:
    if u.n != v.n:
        raise DimensionMismatch(f"states have N={u.n} and N={v.n}")


def complexify(state: KahlerState) -> np.ndarray:
    """Map ``(q, p)`` to the complex vector ``q + i p``."""
    return state.q + 1j * state.p


def decomplexify(v) -> KahlerState:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return KahlerState(v.real, v.imag)


def metric_g(u: KahlerState, v: KahlerState) -> float:
    _check_same(u, v)
    return float(u.q @ v.q + u.p @ v.p)


def symplectic_omega(u: KahlerState, v: KahlerState) -> float:
    _check_same(u, v)
    return float(u.q @ v.p - u.p @ v.q)


def apply_J(u: KahlerState) -> KahlerState:
    return KahlerState(-u.p, u.q)


def apply_Omega(u: KahlerState) -> KahlerState:
    return KahlerState(u.p, -u.q)


def J_vec(v: np.ndarray) -> np.ndarray:
    """Apply J along the first axis (stacked vectors, or the rows of a matrix)."""
    n = v.shape[0] // 2
    return np.concatenate([-v[n:], v[:n]], axis=0)


def J_right(m: np.ndarray) -> np.ndarray:
    """Return ``m @ J`` without forming J."""
    n = m.shape[1] // 2
    return np.concatenate([m[:, n:], -m[:, :n]], axis=1)


def J_matrix(n: int) -> np.ndarray:
    """Dense J, for tests and reporting only."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


@dataclass
class AxiomResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


@dataclass
class StructureReport:
    n: int
    tol: float
    samples: int
    seed: int
    axioms: list[AxiomResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axioms)

    def __getitem__(self, name: str) -> AxiomResult:
        for a in self.axioms:
            if a.name == name:
                return a
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tol": self.tol,
            "samples": self.samples,
            "seed": self.seed,
            "pass": self.passed,
            "axioms": [
                {"name": a.name, "residual": a.residual, "tol": a.tol, "pass": a.passed}
                for a in self.axioms
            ],
        }


def _random_state(rng: np.random.Generator, n: int) -> KahlerState:
    return KahlerState(rng.standard_normal(n), rng.standard_normal(n))


def validate_structure(
    n: int,
    tol: float,
    samples: int = 128,
    seed: int = 0,
    omega: Callable[[KahlerState, KahlerState], float] = symplectic_omega,
    g: Callable[[KahlerState, KahlerState], float] = metric_g,
) -> StructureReport:
    """Check the Kähler axioms on a seeded sample of vector pairs.

    ``omega`` and ``g`` can be swapped for corrupted versions to confirm
    the checks actually bite.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(
        [
            "J^2 = -I",
            "Omega J = I",
            "Omega = -J",
            "g = omega(., J .)",
            "omega(J ., J .) = omega",
            "omega antisymmetric",
            "g positive definite",
            "<gamma u, gamma v> = g + i omega",
        ],
        0.0,
    )
    for _ in range(samples):
        u = _random_state(rng, n)
        v = _random_state(rng, n)
        ju, jv = apply_J(u), apply_J(v)
        jju = apply_J(ju)
        scale = max(1.0, np.sqrt(g(u, u) * g(v, v)))
        worst["J^2 = -I"] = max(worst["J^2 = -I"], np.max(np.abs((jju + u).vector)))
        oj = apply_Omega(ju)
        worst["Omega J = I"] = max(worst["Omega J = I"], np.max(np.abs((oj - u).vector)))
        worst["Omega = -J"] = max(
            worst["Omega = -J"], np.max(np.abs((apply_Omega(u) + ju).vector))
        )
        worst["g = omega(., J .)"] = max(
            worst["g = omega(., J .)"], abs(g(u, v) - omega(u, jv)) / scale
        )
        worst["omega(J ., J .) = omega"] = max(
            worst["omega(J ., J .) = omega"], abs(omega(ju, jv) - omega(u, v)) / scale
        )
        worst["omega antisymmetric"] = max(
            worst["omega antisymmetric"], abs(omega(u, v) + omega(v, u)) / scale
        )
        # positive definiteness: g(u,u) must equal |u|^2 > 0
        nu = float(np.dot(u.vector, u.vector))
        worst["g positive definite"] = max(
            worst["g positive definite"],
            abs(g(u, u) - nu) / nu if g(u, u) > 0 else np.inf,
        )
        herm = np.vdot(complexify(u), complexify(v))
        worst["<gamma u, gamma v> = g + i omega"] = max(
            worst["<gamma u, gamma v> = g + i omega"],
            abs(herm - (g(u, v) + 1j * omega(u, v))) / scale,
        )
    report = StructureReport(n=n, tol=tol, samples=samples, seed=seed)
    report.axioms = [AxiomResult(k, float(v), tol) for k, v in worst.items()]
    return report
