"""Composite systems.

Physical composition is the tensor product over C: the complex vectors are
Kronecker-multiplied (first factor outer) and the result decomplexified, so
an (m, n) pair lives in R^{2mn}. The tensor product over R, which would give
R^{4mn}, is only tracked as dimension bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import KahlerState, complexify, decomplexify
from .operators import ComplexOperator, KahlerOperator, gamma_lift, gamma_lower


class Field(str, Enum):
    REAL = "RealField"
    COMPLEX = "ComplexField"


@dataclass(frozen=True)
class CompositeLabel:
    mode: Field
    dims: tuple[int, int]
    result_dim: int


def tensor_dim_real(m: int, n: int) -> CompositeLabel:
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    return CompositeLabel(Field.REAL, (m, n), 4 * m * n)


def tensor_dim_complex(m: int, n: int) -> CompositeLabel:
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    return CompositeLabel(Field.COMPLEX, (m, n), 2 * m * n)


def tensor_state_complex(a: KahlerState, b: KahlerState) -> KahlerState:
    return decomplexify(np.kron(complexify(a), complexify(b)))


def tensor_operator_complex(a: KahlerOperator, b: KahlerOperator) -> KahlerOperator:
    """Lift of ``A (x) B``; raises StructureViolation if either input is not a lift."""
    la, lb = gamma_lower(a), gamma_lower(b)
    return gamma_lift(ComplexOperator.from_matrix(np.kron(la.matrix, lb.matrix)))


def label_of(a: KahlerState, b: KahlerState) -> CompositeLabel:
    return tensor_dim_complex(a.n, b.n)


class PairKind(str, Enum):
    BELL_PHI_PLUS = "BellPhiPlus"


def entangled_pair(kind: PairKind = PairKind.BELL_PHI_PLUS) -> KahlerState:
    if PairKind(kind) is PairKind.BELL_PHI_PLUS:
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)
        return decomplexify(psi)
    raise ValueError(f"unknown pair kind {kind!r}")


def schmidt_rank(state: KahlerState, dims: tuple[int, int], tol: float = 1e-12) -> int:
    """Number of Schmidt coefficients above ``tol`` for a bipartite state."""
    m, n = dims
    sv = np.linalg.svd(complexify(state).reshape(m, n), compute_uv=False)
    return int(np.sum(sv > tol))
