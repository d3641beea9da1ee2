"""Acceptance run: ten criteria, each at its stated tolerance.

Every test records a one-line verdict in ``RESULTS``; ``conftest.py`` prints
them in the terminal summary, so ``pytest tests/test_acceptance.py`` ends
with one PASS/FAIL line per criterion.
"""
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from kahlerq.composite import entangled_pair, tensor_dim_complex, tensor_operator_complex, tensor_state_complex
from kahlerq.continuum import Grid1D, commutator_residual, gaussian, harmonic_potential, sample, schrodinger_hamiltonian
from kahlerq.core import KahlerState, complexify
from kahlerq.dynamics import conservation_report, evolve_exact, evolve_midpoint, hsym_value, split_hamiltonian
from kahlerq.ergodic import ModePolynomial, ergodicity_experiment, normal_modes
from kahlerq.errors import StructureViolation
from kahlerq.operators import PAULI_Z, ComplexOperator, expectation, gamma_lift, gamma_lower, lift_matrix, unitary_residuals
from kahlerq.runner import load_config, run_experiment
from kahlerq.sampling import (
    random_hermitian,
    random_operator,
    random_state,
    random_symplectic_nonorthogonal,
    random_unitary,
)

RESULTS = {}


def record(number, title, ok, detail):
    RESULTS[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
    assert ok, RESULTS[number]


def acceptance_rng(number):
    return np.random.default_rng([2026, number])


def test_01_equivalence():
    rng = acceptance_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        n = (2, 4, 8, 16)[i % 4]
        h = random_hermitian(rng, n)
        u0 = random_state(rng, n)
        t = rng.uniform(0, 10)
        oracle = scipy.linalg.expm(-1j * t * h.matrix) @ complexify(u0)
        worst = max(worst, float(np.max(np.abs(complexify(evolve_exact(h, u0, t)) - oracle))))
    elapsed = time.perf_counter() - start
    record(1, "evolve_exact vs exp(-iHt)", worst <= 1e-10 and elapsed <= 30,
           f"max err {worst:.2e} <= 1e-10, {elapsed:.2f} s <= 30 s")


def test_02_sandwich_identity():
    rng = acceptance_rng(2)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(1, 9))
        ops = [random_operator(rng, n) for _ in range(1 + i % 4)]
        prod, block = np.eye(n, dtype=complex), np.eye(2 * n)
        for op in ops:
            prod = prod @ op.matrix
            block = block @ gamma_lift(op).block
        u, v = random_state(rng, n), random_state(rng, n)
        lu = KahlerState.from_vector(block @ u.vector)
        lhs = np.vdot(prod @ complexify(u), complexify(v))
        rhs = (lu.q @ v.q + lu.p @ v.p) + 1j * (lu.q @ v.p - lu.p @ v.q)
        worst = max(worst, abs(lhs - rhs))
    record(2, "products of lifts reproduce <L psi, phi>", worst <= 1e-11, f"max err {worst:.2e} <= 1e-11")


def test_03_group_membership():
    rng = acceptance_rng(3)
    worst = 0.0
    for i in range(200):
        sympl, orth = unitary_residuals(lift_matrix(random_unitary(rng, 1 + i % 8)))
        worst = max(worst, sympl, orth)
    rejected = 0
    for i in range(20):
        s = random_symplectic_nonorthogonal(rng, 1 + i % 4)
        sympl, orth = unitary_residuals(s)
        try:
            gamma_lower(s)
            lowered = True
        except StructureViolation:
            lowered = False
        if sympl <= 1e-10 and (not lowered or orth > 1e-12):
            rejected += 1
    record(3, "lifted unitaries in Sp n O, symplectic non-orthogonal rejected",
           worst <= 1e-12 and rejected == 20, f"max residual {worst:.2e} <= 1e-12, rejected {rejected}/20")


def test_04_real_expectations():
    rng = acceptance_rng(4)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 17))
        worst = max(worst, abs(expectation(gamma_lift(random_hermitian(rng, n)), random_state(rng, n))[1]))
    record(4, "|omega(u, Lu)| for K-Hermitian L", worst <= 1e-12, f"max {worst:.2e} <= 1e-12")


def test_05_conservation():
    rng = acceptance_rng(5)
    h = random_hermitian(rng, 4)
    hs = split_hamiltonian(h)
    u0 = random_state(rng, 4)
    traj = evolve_midpoint(hs, u0, 100.0, 10_000, stride=100)
    rep = conservation_report(hs, traj)
    exact = evolve_exact(h, u0, 100.0).vector
    err_h = np.max(np.abs(traj.final.vector - exact))
    err_h2 = np.max(np.abs(evolve_midpoint(hs, u0, 100.0, 20_000, stride=20_000).final.vector - exact))
    ratio = err_h / err_h2
    ok = (rep.hsym_drift <= 1e-9 and rep.gnorm_drift <= 1e-10 and rep.symplectic_residual <= 1e-10
          and rep.orthogonal_residual <= 1e-10 and 3.2 <= ratio <= 4.8)
    record(5, "implicit midpoint, t = 100, h = 1e-2", ok,
           f"H_sym drift {rep.hsym_drift:.1e}, g drift {rep.gnorm_drift:.1e}, "
           f"S^TJS {rep.symplectic_residual:.1e}, S^TS {rep.orthogonal_residual:.1e}, halving ratio {ratio:.3f}")


def test_06_ergodicity():
    start = time.perf_counter()
    obs = ModePolynomial.monomial(2, q={0: 2, 1: 2})
    u0 = KahlerState([1.0, 1.0], [0.0, 0.0])
    diag = lambda *lam: ComplexOperator(np.diag(lam), np.zeros((2, 2)))
    ind = ergodicity_experiment(diag(1.0, np.sqrt(2.0)), u0, obs, 1e4, bound=50)
    res = ergodicity_experiment(diag(1.0, 1.0), u0, obs, 1e4)
    elapsed = time.perf_counter() - start
    witness = None if res.verdict.relation is None else res.verdict.relation.tolist()
    ok = (ind.verdict.independent and abs(ind.time_avg - 0.25) <= 1e-2
          and not res.verdict.independent and witness == [1, -1]
          and abs(res.time_avg - 0.375) <= 5e-3 and abs(res.gap - 0.125) <= 1e-2 and elapsed <= 60)
    record(6, "time vs torus average", ok,
           f"(1, sqrt2) gap {abs(ind.time_avg - 0.25):.2e} independent={ind.verdict.independent}; "
           f"(1, 1) avg {res.time_avg:.5f} gap {res.gap:.5f} witness {witness}; {elapsed:.2f} s")


def test_07_commutator():
    psi = gaussian(0.0, 1.0)
    coarse, fine = Grid1D(-10, 10, 256), Grid1D(-10, 10, 512)
    r256 = commutator_residual(coarse, sample(coarse, psi))
    r512 = commutator_residual(fine, sample(fine, psi))
    ratio = r256 / r512
    record(7, "[P, Q] = -hbar J on a grid", r512 < 1e-3 and 3.2 <= ratio <= 4.8,
           f"residual(512) {r512:.2e} < 1e-3, ratio {ratio:.3f} in [3.2, 4.8]")


def test_08_grid_oscillator():
    grid = Grid1D(-10, 10, 512)
    h = schrodinger_hamiltonian(grid, harmonic_potential(grid))
    lam = normal_modes(h).lambdas[:5]
    lvl = float(np.max(np.abs(lam - (np.arange(5) + 0.5))))
    rng = acceptance_rng(8)
    hs = split_hamiltonian(h)
    worst = 0.0
    for _ in range(50):
        u = random_state(rng, 512)
        psi = complexify(u)
        worst = max(worst, abs(hsym_value(hs, u) - 0.5 * np.vdot(psi, h.matrix @ psi).real))
    record(8, "harmonic grid levels and H_sym", lvl <= 1e-2 and worst <= 1e-12,
           f"level err {lvl:.2e} <= 1e-2, H_sym err {worst:.2e} <= 1e-12")


def test_09_composite():
    rng = acceptance_rng(9)
    dims_ok = all(
        2 * tensor_state_complex(random_state(rng, m), random_state(rng, n)).n == 2 * m * n == tensor_dim_complex(m, n).result_dim
        for m, n in [(2, 2), (2, 3)]
    )
    zz = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(PAULI_Z))
    bell = abs(expectation(zz, entangled_pair())[0] - 1.0)
    worst = 0.0
    for _ in range(50):
        m, n = (int(x) for x in rng.integers(1, 5, size=2))
        A, B = gamma_lift(random_hermitian(rng, m)), gamma_lift(random_hermitian(rng, n))
        a, b = random_state(rng, m), random_state(rng, n)
        prod = expectation(A, a)[0] * expectation(B, b)[0]
        worst = max(worst, abs(expectation(tensor_operator_complex(A, B), tensor_state_complex(a, b))[0] - prod))
    record(9, "C-tensor dims, Bell <ZZ>, factorisation", dims_ok and bell <= 1e-12 and worst <= 1e-12,
           f"dims ok={dims_ok}, |<ZZ> - 1| {bell:.1e}, factorisation err {worst:.2e}")


def _artifacts(out: Path) -> dict:
    files = {}
    for path in sorted(out.iterdir()):
        data = path.read_bytes()
        if path.name == "report.json":
            data = b"\n".join(l for l in data.split(b"\n") if b'"wall_time_ms"' not in l)
        files[path.name] = data
    return files


@pytest.mark.slow
def test_10_cli_determinism(tmp_path):
    configs = sorted(p for p in resources.files("kahlerq").joinpath("configs").iterdir() if p.name.endswith(".json"))
    mismatched = []
    for cfg_path in configs:
        cfg = load_config(Path(str(cfg_path)))
        runs = []
        for i, threads in enumerate((1, 1, 4)):
            out = tmp_path / f"{cfg_path.name}-{i}"
            run_experiment(cfg, out, threads=threads)
            runs.append(_artifacts(out))
        if not runs[0] == runs[1] == runs[2]:
            mismatched.append(cfg_path.name)
    record(10, "bundled configs byte-identical across runs and threads {1, 4}", not mismatched,
           f"{len(configs) - len(mismatched)}/{len(configs)} configs identical" + (f", differing: {mismatched}" if mismatched else ""))
