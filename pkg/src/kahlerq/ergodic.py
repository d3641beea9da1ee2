"""Normal modes, action-angle variables and time-vs-torus averages.

Diagonalising H gives mode coordinates ``c = U^dagger psi`` with
``q~ = Re c`` and ``p~ = Im c``. Under the flow each mode rotates as
``c_a(t) = c_a(0) exp(-i lambda_a t)``; angles are measured so that they
advance at ``+lambda_a``::

    q~_a =  sqrt(F_a) cos(theta_a)
    p~_a = -sqrt(F_a) sin(theta_a)
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from . import kernels
from .core import KahlerState, complexify
from .dynamics import HamiltonianSplit, _eigh_checked, split_hamiltonian
from .errors import DimensionMismatch, SearchSpaceTooLarge
from .operators import ComplexOperator, KahlerOperator, gamma_lift

DEFAULT_BUDGET = 10**7
ZERO_ACTION = 1e-14
SAMPLES_PER_UNIT_TIME = 32


def search_budget() -> int:
    """Cap on exhaustive search and quadrature sizes (``KAHLERQ_BUDGET``)."""
    raw = os.environ.get("KAHLERQ_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True, eq=False)
class NormalModeFrame:
    lambdas: np.ndarray
    transform: KahlerOperator
    eigvecs: np.ndarray
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.lambdas.size


def normal_modes(h: ComplexOperator, degeneracy_tol: float = 1e-9) -> NormalModeFrame:
    lam, vecs = _eigh_checked(h)
    gaps = np.diff(lam)
    scale = max(1.0, float(np.max(np.abs(lam))))
    degenerate = bool(gaps.size and np.min(gaps) < degeneracy_tol * scale)
    transform = gamma_lift(ComplexOperator.from_matrix(vecs.conj().T))
    return NormalModeFrame(lam, transform, vecs, degenerate)


def mode_coordinates(frame: NormalModeFrame, u: KahlerState) -> tuple[np.ndarray, np.ndarray]:
    if u.n != frame.n:
        raise DimensionMismatch(f"frame has N={frame.n}, state has N={u.n}")
    c = frame.eigvecs.conj().T @ complexify(u)
    return c.real, c.imag


@dataclass(frozen=True, eq=False)
class ActionAngle:
    actions: np.ndarray
    angles: np.ndarray
    angle_defined: np.ndarray


def to_action_angle(frame: NormalModeFrame, u: KahlerState) -> ActionAngle:
    qt, pt = mode_coordinates(frame, u)
    actions = qt**2 + pt**2
    angles = np.mod(np.arctan2(-pt, qt), 2 * np.pi)
    defined = actions >= ZERO_ACTION
    angles = np.where(defined, angles, 0.0)
    return ActionAngle(actions, angles, defined)


@dataclass(frozen=True, eq=False)
class IndependenceVerdict:
    independent: bool
    relation: np.ndarray | None
    bound: int
    tol: float
    min_residual: float
    closest: np.ndarray | None

    def to_dict(self) -> dict:
        return {
            "independent": self.independent,
            "relation": None if self.relation is None else [int(k) for k in self.relation],
            "bound": self.bound,
            "tol": self.tol,
            "min_residual": self.min_residual,
            "closest": None if self.closest is None else [int(k) for k in self.closest],
        }


def check_rational_independence(
    lambdas: Sequence[float], bound: int, tol: float, budget: int | None = None
) -> IndependenceVerdict:
    """Decide rational independence by exhaustive search over ``|k_a| <= bound``.

    The reported relation is the smallest-L1 integer vector with
    ``|k . lambda| < tol``, sign-normalised so its first nonzero entry is
    positive.
    """
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    budget = search_budget() if budget is None else budget
    size = (2 * bound + 1) ** lam.size
    if size > budget:
        raise SearchSpaceTooLarge(f"relation search needs {size} candidates, budget is {budget}")
    witness, closest, best = kernels.relation_search(lam, int(bound), float(tol))
    return IndependenceVerdict(
        independent=witness is None,
        relation=witness,
        bound=int(bound),
        tol=float(tol),
        min_residual=float(best),
        closest=closest,
    )


class ModePolynomial:
    """Polynomial observable in normal-mode coordinates.

    ``terms`` is a list of ``(coef, q_exponents, p_exponents)``; for example
    ``q~_1^2 q~_2^2`` on two modes is ``[(1.0, (2, 2), (0, 0))]``.
    """

    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise ValueError("polynomial needs at least one term")
        self.coef = np.array([float(t[0]) for t in terms])
        self.qexp = np.array([list(t[1]) for t in terms], dtype=np.int_)
        self.pexp = np.array([list(t[2]) for t in terms], dtype=np.int_)
        if self.qexp.shape != self.pexp.shape:
            raise ValueError("q and p exponent lists differ in shape")
        if np.any(self.qexp < 0) or np.any(self.pexp < 0):
            raise ValueError("exponents must be non-negative")

    @property
    def n(self) -> int:
        return self.qexp.shape[1]

    @classmethod
    def monomial(cls, n: int, q: dict | None = None, p: dict | None = None, coef: float = 1.0):
        qe = [0] * n
        pe = [0] * n
        for a, e in (q or {}).items():
            qe[a] = e
        for a, e in (p or {}).items():
            pe[a] = e
        return cls([(coef, qe, pe)])

    @classmethod
    def from_dict(cls, d: dict) -> "ModePolynomial":
        n = d["n"]
        terms = []
        for t in d["terms"]:
            terms.append((t.get("coef", 1.0), t.get("q", [0] * n), t.get("p", [0] * n)))
        return cls(terms)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"coef": float(c), "q": [int(x) for x in qe], "p": [int(x) for x in pe]}
                for c, qe, pe in zip(self.coef, self.qexp, self.pexp)
            ],
        }

    def __call__(self, qt, pt):
        qt = np.atleast_2d(qt)
        pt = np.atleast_2d(pt)
        out = np.zeros(qt.shape[0])
        for c, qe, pe in zip(self.coef, self.qexp, self.pexp):
            out += c * np.prod(qt**qe, axis=1) * np.prod(pt**pe, axis=1)
        return out

    def torus_exact(self, actions) -> float:
        """Closed-form uniform torus average at the given actions."""
        amp = np.sqrt(np.asarray(actions, dtype=float))
        total = 0.0
        for c, qe, pe in zip(self.coef, self.qexp, self.pexp):
            term = c
            for a in range(self.n):
                term *= amp[a] ** int(qe[a] + pe[a]) * _circle_moment(int(qe[a]), int(pe[a]))
            total += term
        return float(total)


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def _circle_moment(a: int, b: int) -> float:
    """Mean of ``cos^a(t) (-sin t)^b`` over a full period."""
    if a % 2 or b % 2:
        return 0.0
    return _double_factorial(a - 1) * _double_factorial(b - 1) / _double_factorial(a + b)


def hsym_observable(hs: HamiltonianSplit) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """H_sym as a batch observable in the original (q, p) coordinates."""
    k, l = hs.k_sym, hs.l_skew

    def f(q, p):
        return 0.5 * (np.einsum("ti,ij,tj->t", p, k, p) + np.einsum("ti,ij,tj->t", q, k, q)) + np.einsum(
            "ti,ij,tj->t", p, l, q
        )

    return f


def default_steps(t_final: float) -> int:
    return max(64, int(math.ceil(t_final * SAMPLES_PER_UNIT_TIME)))


def flow_samples(hs: HamiltonianSplit, u0: KahlerState, observable, t_final: float, steps: int) -> np.ndarray:
    """Observable evaluated at ``steps + 1`` equispaced times along the exact flow.

    A ModePolynomial is evaluated in the normal-mode frame of ``hs`` by the
    compiled torus-flow kernel. Any other callable receives batches of
    original coordinates ``(q, p)`` with shape ``(M, N)``.
    """
    if t_final <= 0 or steps < 1:
        raise ValueError("need t_final > 0 and steps >= 1")
    frame = normal_modes(hs.operator())
    if isinstance(observable, ModePolynomial):
        if observable.n != frame.n:
            raise DimensionMismatch(f"observable has {observable.n} modes, system has {frame.n}")
        aa = to_action_angle(frame, u0)
        return kernels.mode_poly_flow(
            np.sqrt(aa.actions), aa.angles, frame.lambdas, observable.coef, observable.qexp,
            observable.pexp, float(t_final), int(steps),
        )
    vecs, lam = frame.eigvecs, frame.lambdas
    c0 = vecs.conj().T @ complexify(u0)
    times = np.linspace(0.0, t_final, steps + 1)
    out = np.empty(steps + 1)
    chunk = 1 << 15
    for start in range(0, steps + 1, chunk):
        tt = times[start:start + chunk]
        psi = (np.exp(-1j * np.outer(tt, lam)) * c0) @ vecs.T
        out[start:start + chunk] = observable(psi.real, psi.imag)
    return out


def time_average(hs: HamiltonianSplit, u0: KahlerState, observable, t_final: float, steps: int | None = None) -> float:
    """Trapezoidal time average of the observable over ``[0, t_final]``."""
    steps = default_steps(t_final) if steps is None else steps
    samples = flow_samples(hs, u0, observable, t_final, steps)
    return float(trapezoid(samples, dx=t_final / steps) / t_final)


def running_average(samples: np.ndarray, t_final: float, points: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Running time averages at roughly log-spaced horizons ``T <= t_final``."""
    steps = samples.size - 1
    dt = t_final / steps
    integral = cumulative_trapezoid(samples, dx=dt, initial=0.0)
    idx = np.unique(np.geomspace(1, steps, points).astype(int))
    horizons = idx * dt
    return horizons, integral[idx] / horizons


def torus_average(observable, actions, grid: int = 32, budget: int | None = None) -> float:
    """Uniform average over the invariant torus at fixed actions.

    Exact for trigonometric polynomials of degree below ``grid``.
    """
    actions = np.asarray(actions, dtype=float).reshape(-1)
    if grid < 8:
        raise ValueError("grid must be >= 8")
    if np.any(actions < 0):
        raise ValueError("actions must be non-negative")
    n = actions.size
    budget = search_budget() if budget is None else budget
    if grid**n > budget:
        raise SearchSpaceTooLarge(f"torus grid needs {grid ** n} points, budget is {budget}")
    amp = np.sqrt(actions)
    if isinstance(observable, ModePolynomial):
        if observable.n != n:
            raise DimensionMismatch(f"observable has {observable.n} modes, actions has {n}")
        return float(kernels.mode_poly_torus(amp, observable.coef, observable.qexp, observable.pexp, int(grid)))
    theta = 2 * np.pi * np.arange(grid) / grid
    mesh = np.stack(np.meshgrid(*([theta] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return float(np.mean(observable(amp * np.cos(mesh), -amp * np.sin(mesh))))


@dataclass(eq=False)
class ErgodicityReport:
    lambdas: np.ndarray
    verdict: IndependenceVerdict
    actions: np.ndarray
    time_avg: float
    torus_avg: float
    gap: float
    tol: float
    t_final: float
    steps: int
    degenerate: bool
    running: tuple[np.ndarray, np.ndarray] = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        """Time average agrees with the torus average within ``tol``."""
        return bool(self.gap <= self.tol)

    @property
    def as_predicted(self) -> bool:
        """Outcome matches the prediction: agreement iff the spectrum is independent."""
        return self.passed == self.verdict.independent

    def to_dict(self) -> dict:
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "degenerate": self.degenerate,
            "verdict": self.verdict.to_dict(),
            "actions": [float(x) for x in self.actions],
            "time_average": self.time_avg,
            "torus_average": self.torus_avg,
            "gap": self.gap,
            "tol": self.tol,
            "t_final": self.t_final,
            "steps": self.steps,
            "pass": self.passed,
            "as_predicted": self.as_predicted,
        }


def ergodicity_experiment(
    h: ComplexOperator,
    u0: KahlerState,
    observable,
    t_final: float,
    steps: int | None = None,
    grid: int = 32,
    bound: int = 20,
    independence_tol: float = 1e-9,
    gap_tol: float = 1e-2,
) -> ErgodicityReport:
    hs = split_hamiltonian(h)
    frame = normal_modes(h)
    verdict = check_rational_independence(frame.lambdas, bound, independence_tol)
    aa = to_action_angle(frame, u0)
    steps = default_steps(t_final) if steps is None else steps
    samples = flow_samples(hs, u0, observable, t_final, steps)
    t_avg = float(trapezoid(samples, dx=t_final / steps) / t_final)
    torus = torus_average(observable, aa.actions, grid)
    horizons, running = running_average(samples, t_final)
    return ErgodicityReport(
        lambdas=frame.lambdas,
        verdict=verdict,
        actions=aa.actions,
        time_avg=t_avg,
        torus_avg=torus,
        gap=abs(t_avg - torus),
        tol=gap_tol,
        t_final=float(t_final),
        steps=int(steps),
        degenerate=frame.degenerate,
        running=(horizons, running),
    )


def diagonal_hsym(frame: NormalModeFrame, u: KahlerState) -> float:
    """``1/2 sum_a lambda_a F_a``; equals H_sym in the diagonal frame."""
    aa = to_action_angle(frame, u)
    return float(0.5 * np.dot(frame.lambdas, aa.actions))

