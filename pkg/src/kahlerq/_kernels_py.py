"""Pure numpy implementations of the hot loops.

Same signatures and results (up to rounding) as the compiled ``_kernels``
module; used when the extension is not built or ``KAHLERQ_PURE_PYTHON`` is set.
"""
import itertools

import numpy as np


def propagate_linear(step, u0, steps, stride):
    """Iterate ``u <- step @ u``, keeping every ``stride``-th state and the last one."""
    step = np.ascontiguousarray(step, dtype=np.float64)
    u = np.array(u0, dtype=np.float64)
    keep = list(range(0, steps + 1, stride))
    if keep[-1] != steps:
        keep.append(steps)
    out = np.empty((len(keep), u.size))
    out[0] = u
    slot = 1
    for i in range(1, steps + 1):
        u = step @ u
        if slot < len(keep) and keep[slot] == i:
            out[slot] = u
            slot += 1
    return np.asarray(keep, dtype=np.int64), out


def _poly_values(qt, pt, coef, qexp, pexp):
    total = np.zeros(qt.shape[0])
    for c, qe, pe in zip(coef, qexp, pexp):
        term = np.full(qt.shape[0], c)
        for a in range(qt.shape[1]):
            if qe[a]:
                term *= qt[:, a] ** int(qe[a])
            if pe[a]:
                term *= pt[:, a] ** int(pe[a])
        total += term
    return total


def mode_poly_flow(amp, theta0, lam, coef, qexp, pexp, t_final, steps):
    """Polynomial observable sampled along the torus flow ``theta = theta0 + lam t``.

    Mode coordinates are ``q = amp cos(theta)``, ``p = -amp sin(theta)``.
    Returns ``steps + 1`` samples at equispaced times in ``[0, t_final]``.
    """
    amp = np.asarray(amp, dtype=np.float64)
    t = np.linspace(0.0, t_final, steps + 1)
    out = np.empty(steps + 1)
    chunk = 1 << 16
    for start in range(0, steps + 1, chunk):
        tt = t[start:start + chunk]
        theta = np.asarray(theta0)[None, :] + tt[:, None] * np.asarray(lam)[None, :]
        qt = amp * np.cos(theta)
        pt = -amp * np.sin(theta)
        out[start:start + chunk] = _poly_values(qt, pt, coef, qexp, pexp)
    return out


def mode_poly_torus(amp, coef, qexp, pexp, grid):
    """Mean of the polynomial over a uniform ``grid**N`` lattice of angles."""
    amp = np.asarray(amp, dtype=np.float64)
    n = amp.size
    angles = 2.0 * np.pi * np.arange(grid) / grid
    total = 0.0
    # iterate the leading axes, vectorise the last one
    for lead in itertools.product(range(grid), repeat=n - 1):
        theta = np.empty((grid, n))
        theta[:, : n - 1] = angles[list(lead)] if n > 1 else 0.0
        theta[:, n - 1] = angles
        qt = amp * np.cos(theta)
        pt = -amp * np.sin(theta)
        total += np.sum(_poly_values(qt, pt, coef, qexp, pexp))
    return total / grid**n


def relation_search(lam, bound, tol):
    """Exhaustive scan of integer vectors ``k`` with ``|k_a| <= bound``.

    Only sign-canonical ``k`` (first nonzero entry positive) are visited, in
    lexicographic order. Returns ``(witness, best_k, best_residual)`` where the
    witness is the smallest-L1 ``k`` with ``|k . lam| < tol`` (or None).
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.size
    axis = np.arange(-bound, bound + 1)
    best_res = np.inf
    best_k = None
    witness = None
    witness_l1 = None
    for lead in itertools.product(axis, repeat=n - 1):
        lead = np.asarray(lead, dtype=np.int64)
        nz = np.flatnonzero(lead)
        if nz.size and lead[nz[0]] < 0:
            continue
        last = axis if nz.size else axis[axis > 0]
        partial = 0.0
        for a in range(n - 1):
            partial += lead[a] * lam[a]
        res = np.abs(partial + last * lam[n - 1])
        i = int(np.argmin(res))
        if res[i] < best_res:
            best_res = float(res[i])
            best_k = np.append(lead, last[i])
        hits = np.flatnonzero(res < tol)
        if hits.size:
            l1 = np.abs(lead).sum() + np.abs(last[hits])
            j = int(np.argmin(l1))
            if witness_l1 is None or l1[j] < witness_l1:
                witness_l1 = int(l1[j])
                witness = np.append(lead, last[hits[j]])
    return witness, best_k, best_res
