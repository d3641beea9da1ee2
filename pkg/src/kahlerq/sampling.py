"""Seeded random generators for states, Hermitian and unitary operators."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .core import KahlerState, decomplexify
from .operators import ComplexOperator, KahlerOperator, gamma_lift


def random_state(rng: np.random.Generator, n: int, normalize: bool = True) -> KahlerState:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if normalize:
        v /= np.linalg.norm(v)
    return decomplexify(v)


def random_complex_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_operator(rng: np.random.Generator, n: int) -> ComplexOperator:
    return ComplexOperator.from_matrix(random_complex_matrix(rng, n))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> ComplexOperator:
    """Hermitian ``A + iB`` with A symmetric, B skew, spectral radius about ``scale``."""
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    b = (b - b.T) / 2
    h = a + 1j * b
    h *= scale / max(np.max(np.abs(np.linalg.eigvalsh(h))), 1e-300)
    return ComplexOperator(h.real, h.imag)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def random_symplectic_nonorthogonal(rng: np.random.Generator, n: int) -> KahlerOperator:
    """Symplectic 2N x 2N matrix that is not orthogonal.

    Built from a squeeze ``diag(s, 1/s)`` and a symmetric shear, sandwiched
    between lifted unitaries.
    """
    s = np.exp(rng.uniform(0.3, 1.0, n)) * rng.choice([-1.0, 1.0], n)
    squeeze = np.diag(np.concatenate([s, 1.0 / s]))
    b = rng.standard_normal((n, n))
    shear = np.eye(2 * n)
    shear[:n, n:] = (b + b.T) / 2
    u1 = gamma_lift(ComplexOperator.from_matrix(random_unitary(rng, n))).block
    u2 = gamma_lift(ComplexOperator.from_matrix(random_unitary(rng, n))).block
    return KahlerOperator(u1 @ squeeze @ shear @ u2)
