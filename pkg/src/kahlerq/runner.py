"""Config-driven experiment runner behind the ``kahlerq`` command line."""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import __version__
from .composite import (
    entangled_pair,
    schmidt_rank,
    tensor_dim_complex,
    tensor_dim_real,
    tensor_operator_complex,
    tensor_state_complex,
)
from .continuum import (
    Grid1D,
    Stencil,
    commutator_residual,
    gaussian,
    grid_expectation,
    momentum_op,
    position_op,
    potential_from_dict,
    sample,
    schrodinger_hamiltonian,
    write_snapshot_csv,
)
from .core import KahlerState, complexify, decomplexify, validate_structure
from .dynamics import (
    conservation_report,
    evolve_exact,
    evolve_midpoint,
    exact_trajectory,
    hsym_value,
    split_hamiltonian,
    write_trajectory_csv,
)
from .ergodic import ModePolynomial, ergodicity_experiment, normal_modes
from .errors import ConfigError, MissingReport
from .operators import (
    PAULI_Z,
    ComplexOperator,
    expectation,
    gamma_lift,
    hermitian_residuals,
    k_adjoint,
    lift_matrix,
    unitary_residuals,
)
from .sampling import random_hermitian, random_operator, random_state, random_unitary

KINDS = ("Validate", "Lift", "Evolve", "Ergodic", "Tensor", "Grid", "Commutator")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}
_matrix = {"type": "array", "items": {"type": "array", "items": _num}}
_vector = {"type": "array", "items": _num, "minItems": 1}
_operator = {
    "type": "object",
    "properties": {"n": _posint, "x": _matrix, "y": _matrix},
    "required": ["x", "y"],
    "additionalProperties": False,
}
_state = {
    "type": "object",
    "properties": {"q": _vector, "p": _vector, "dims": {"type": "array", "items": _posint}},
    "required": ["q", "p"],
    "additionalProperties": False,
}
_grid_props = {
    "x_min": _num,
    "x_max": _num,
    "n": {"type": "integer", "minimum": 16},
    "hbar": _pos,
    "mass": _pos,
}

PARAMS_SCHEMA = {
    "Validate": {
        "properties": {"n": _posint, "tol": _pos, "samples": _posint},
        "required": ["n"],
    },
    "Lift": {
        "properties": {"n": _posint, "instances": _posint, "tol": _pos, "max_factors": _posint},
        "required": ["n"],
    },
    "Evolve": {
        "properties": {
            "n": _posint,
            "scheme": {"enum": ["ImplicitMidpoint", "ExactExponential"]},
            "t_final": _pos,
            "steps": _posint,
            "stride": _posint,
            "hamiltonian": _operator,
            "state": _state,
            "endpoint_tol": _pos,
            "drift_tol": _pos,
        },
        "required": ["t_final", "steps"],
    },
    "Ergodic": {
        "properties": {
            "hamiltonian": _operator,
            "lambdas": _vector,
            "state": _state,
            "observable": {
                "type": "object",
                "properties": {
                    "n": _posint,
                    "terms": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "properties": {
                                "coef": _num,
                                "q": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                "p": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["n", "terms"],
                "additionalProperties": False,
            },
            "t_final": _pos,
            "steps": _posint,
            "grid": {"type": "integer", "minimum": 8},
            "bound": _posint,
            "independence_tol": _pos,
            "gap_tol": _pos,
        },
        "required": ["observable", "t_final", "state"],
    },
    "Tensor": {
        "properties": {
            "dims": {"type": "array", "items": {"type": "array", "items": _posint, "minItems": 2, "maxItems": 2}},
            "instances": _posint,
            "tol": _pos,
        },
        "required": ["dims"],
    },
    "Grid": {
        "properties": {
            **_grid_props,
            "potential": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["harmonic", "free", "table"]},
                    "omega": _pos,
                    "x0": _num,
                    "values": _vector,
                },
                "required": ["kind"],
                "additionalProperties": False,
            },
            "levels": _posint,
            "level_tol": _pos,
            "instances": _posint,
        },
        "required": ["x_min", "x_max", "n", "potential"],
    },
    "Commutator": {
        "properties": {
            **_grid_props,
            "stencil": {"enum": ["Central2", "Central4"]},
            "x0": _num,
            "sigma": _pos,
            "refinements": {"type": "integer", "minimum": 2, "maximum": 6},
            "residual_tol": _pos,
            "ratio_range": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        },
        "required": ["x_min", "x_max", "n"],
    },
}


def config_schema() -> dict:
    branches = []
    for kind, body in PARAMS_SCHEMA.items():
        params = {"type": "object", "additionalProperties": False, **body}
        branches.append({"if": {"properties": {"kind": {"const": kind}}}, "then": {"properties": {"params": params}}})
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "kahlerq experiment config",
        "type": "object",
        "properties": {
            "kind": {"enum": list(KINDS)},
            "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            "params": {"type": "object"},
            "output_dir": {"type": "string"},
        },
        "required": ["kind", "seed", "params"],
        "additionalProperties": False,
        "allOf": branches,
    }


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    params: dict
    output_dir: str | None = None

    def echo(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed, "params": self.params}
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(config_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: [str(x) for x in e.absolute_path])
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{source}: field '{where}': {err.message}")
    return ExperimentConfig(raw["kind"], raw["seed"], raw["params"], raw.get("output_dir"))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.tolerance
        return self.value >= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.value,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class TaskResult:
    checks: list[Check] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    files: dict[str, Callable[[Path], None]] = field(default_factory=dict)


Task = Callable[[np.random.Generator], TaskResult]


def _operator_from(params: dict, key: str, rng, n: int) -> ComplexOperator:
    if key in params:
        return ComplexOperator.from_dict(params[key])
    return random_hermitian(rng, n)


def _state_from(params: dict, rng, n: int) -> KahlerState:
    if "state" in params:
        return KahlerState(params["state"]["q"], params["state"]["p"])
    return random_state(rng, n)


def _validate_tasks(p: dict) -> list[Task]:
    n, tol, samples = p["n"], p.get("tol", 1e-12), p.get("samples", 128)

    def task(rng):
        report = validate_structure(n, tol, samples=samples, seed=int(rng.integers(2**63)))
        return TaskResult([Check(a.name, a.residual, a.tol) for a in report.axioms])

    return [task]


def _lift_tasks(p: dict) -> list[Task]:
    n, count = p["n"], p.get("instances", 100)
    tol = p.get("tol", 1e-11)
    kmax = p.get("max_factors", 4)

    def homomorphism(rng):
        worst_prod = worst_sum = worst_adj = 0.0
        for _ in range(count):
            a, b = random_operator(rng, n), random_operator(rng, n)
            la, lb = gamma_lift(a), gamma_lift(b)
            worst_prod = max(worst_prod, np.max(np.abs(lift_matrix(a.matrix @ b.matrix).block - la.block @ lb.block)))
            worst_sum = max(worst_sum, np.max(np.abs(lift_matrix(a.matrix + b.matrix).block - (la.block + lb.block))))
            worst_adj = max(worst_adj, np.max(np.abs(lift_matrix(a.matrix.conj().T).block - k_adjoint(la).block)))
        return TaskResult([
            Check("lift(AB) = lift(A) lift(B)", float(worst_prod), tol),
            Check("lift(A + B) = lift(A) + lift(B)", float(worst_sum), tol),
            Check("lift(A^dagger) = lift(A)^T", float(worst_adj), tol),
        ])

    def sandwich(rng):
        worst = 0.0
        for i in range(count):
            k = 1 + i % kmax
            ops = [random_operator(rng, n) for _ in range(k)]
            prod = np.eye(n, dtype=complex)
            block = np.eye(2 * n)
            for op in ops:
                prod = prod @ op.matrix
                block = block @ gamma_lift(op).block
            u, v = random_state(rng, n), random_state(rng, n)
            lu = KahlerState.from_vector(block @ u.vector)
            lhs = np.vdot(prod @ complexify(u), complexify(v))
            rhs = float(lu.q @ v.q + lu.p @ v.p) + 1j * float(lu.q @ v.p - lu.p @ v.q)
            worst = max(worst, abs(lhs - rhs))
        return TaskResult([Check("<L1..Lk psi, phi> = g + i omega", float(worst), tol)])

    def membership(rng):
        worst_s = worst_o = worst_w = 0.0
        for _ in range(count):
            s, o = unitary_residuals(lift_matrix(random_unitary(rng, n)))
            worst_s, worst_o = max(worst_s, s), max(worst_o, o)
            h = gamma_lift(random_hermitian(rng, n))
            u = random_state(rng, n)
            worst_w = max(worst_w, abs(expectation(h, u)[1]))
        return TaskResult([
            Check("lifted unitary: S^T J S = J", float(worst_s), 1e-12),
            Check("lifted unitary: S^T S = I", float(worst_o), 1e-12),
            Check("K-Hermitian: omega(u, Lu) = 0", float(worst_w), 1e-12),
        ])

    return [homomorphism, sandwich, membership]


def _evolve_tasks(p: dict) -> list[Task]:
    t_final, steps, stride = p["t_final"], p["steps"], p.get("stride", 1)
    scheme = p.get("scheme", "ImplicitMidpoint")
    drift_tol = p.get("drift_tol", 1e-9)

    def task(rng):
        n = p.get("n") or (len(p["hamiltonian"]["x"]) if "hamiltonian" in p else 2)
        h = _operator_from(p, "hamiltonian", rng, n)
        u0 = _state_from(p, rng, h.n)
        hs = split_hamiltonian(h)
        if scheme == "ImplicitMidpoint":
            traj = evolve_midpoint(hs, u0, t_final, steps, stride)
            endpoint_tol = p.get("endpoint_tol", 1e-3)
        else:
            traj = exact_trajectory(h, u0, t_final, steps, stride)
            endpoint_tol = p.get("endpoint_tol", 1e-10)
        exact = evolve_exact(h, u0, t_final)
        err = float(np.max(np.abs(traj.final.vector - exact.vector)))
        rep = conservation_report(hs, traj, seed=int(rng.integers(2**63)))
        checks = [
            Check("endpoint vs exp(-iHt) oracle", err, endpoint_tol),
            Check("H_sym drift", rep.hsym_drift, drift_tol),
            Check("g-norm drift", rep.gnorm_drift, 1e-10),
            Check("one-step omega defect", rep.omega_defect, 1e-10),
            Check("one-step S^T J S - J", rep.symplectic_residual, 1e-10),
            Check("one-step S^T S - I", rep.orthogonal_residual, 1e-10),
        ]
        hs_vals = np.array([hsym_value(hs, s) for s in traj.states])
        series = {"hsym_drift": [[float(t), float(abs(v - hs_vals[0]))] for t, v in zip(traj.times, hs_vals)]}
        return TaskResult(
            checks,
            details={"scheme": scheme, "n": h.n, "conservation": rep.to_dict()},
            series=series,
            files={"trajectory.csv": lambda d: write_trajectory_csv(d / "trajectory.csv", hs, traj)},
        )

    return [task]


def _ergodic_tasks(p: dict) -> list[Task]:
    def task(rng):
        if "hamiltonian" in p:
            h = ComplexOperator.from_dict(p["hamiltonian"])
        elif "lambdas" in p:
            lam = np.asarray(p["lambdas"], dtype=float)
            h = ComplexOperator(np.diag(lam), np.zeros((lam.size, lam.size)))
        else:
            raise ConfigError("field 'params': Ergodic needs 'hamiltonian' or 'lambdas'")
        u0 = KahlerState(p["state"]["q"], p["state"]["p"])
        obs = ModePolynomial.from_dict(p["observable"])
        rep = ergodicity_experiment(
            h, u0, obs, p["t_final"], steps=p.get("steps"), grid=p.get("grid", 32),
            bound=p.get("bound", 20), independence_tol=p.get("independence_tol", 1e-9),
            gap_tol=p.get("gap_tol", 1e-2),
        )
        if rep.verdict.independent:
            check = Check("independent spectrum: |time avg - torus avg|", rep.gap, rep.tol, "<=")
        else:
            check = Check("resonant spectrum: |time avg - torus avg| stays open", rep.gap, rep.tol, ">=")
        horizons, averages = rep.running

        def write_running(d: Path):
            with (d / "running_average.csv").open("w") as fh:
                fh.write("T,avg(T)\n")
                for t, avg in zip(horizons, averages):
                    fh.write(f"{float(t)!r},{float(avg)!r}\n")

        return TaskResult(
            [check],
            details=rep.to_dict(),
            series={"convergence": [[float(t), float(abs(a - rep.torus_avg))] for t, a in zip(horizons, averages)]},
            files={"running_average.csv": write_running},
        )

    return [task]


def _tensor_tasks(p: dict) -> list[Task]:
    count, tol = p.get("instances", 50), p.get("tol", 1e-12)

    def dims(rng):
        checks = []
        for m, n in p["dims"]:
            a, b = random_state(rng, m), random_state(rng, n)
            ab = tensor_state_complex(a, b)
            checks.append(Check(f"C-tensor ({m},{n}) real dim - 2mn", float(abs(2 * ab.n - tensor_dim_complex(m, n).result_dim)), 0.0))
            checks.append(Check(f"R-tensor ({m},{n}) bookkeeping 4mn", float(abs(tensor_dim_real(m, n).result_dim - 4 * m * n)), 0.0))
            checks.append(Check(f"C-tensor ({m},{n}) norm", float(abs(ab.norm_sq() - 1.0)), 1e-13))
        return TaskResult(checks)

    def bell(rng):
        phi = entangled_pair()
        zz = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(PAULI_Z))
        zi = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(np.eye(2)))
        g_zz, _ = expectation(zz, phi)
        g_zi, _ = expectation(zi, phi)
        return TaskResult([
            Check("Bell <ZZ> = 1", float(abs(g_zz - 1.0)), tol),
            Check("Bell <ZI> = 0", float(abs(g_zi)), tol),
            Check("Bell Schmidt rank", float(schmidt_rank(phi, (2, 2))), 2.0, ">="),
        ])

    def factorization(rng):
        worst = 0.0
        for _ in range(count):
            m, n = 2, 2
            A, B = gamma_lift(random_hermitian(rng, m)), gamma_lift(random_hermitian(rng, n))
            a, b = random_state(rng, m), random_state(rng, n)
            ga, wa = expectation(A, a)
            gb, wb = expectation(B, b)
            gab, _ = expectation(tensor_operator_complex(A, B), tensor_state_complex(a, b))
            worst = max(worst, abs(gab - (ga * gb - wa * wb)))
        return TaskResult([Check("product-state expectation factorises", float(worst), tol)])

    return [dims, bell, factorization]


def _grid_of(p: dict) -> Grid1D:
    return Grid1D(p["x_min"], p["x_max"], p["n"], p.get("hbar", 1.0), p.get("mass", 1.0))


def _grid_tasks(p: dict) -> list[Task]:
    grid = _grid_of(p)
    pot_desc = p["potential"]
    levels = p.get("levels", 5)
    count = p.get("instances", 50)

    def spectrum(rng):
        pot = potential_from_dict(grid, pot_desc)
        h = schrodinger_hamiltonian(grid, pot)
        frame = normal_modes(h)
        lam = frame.lambdas[:levels]
        checks = []
        details = {"lowest_eigenvalues": lam.tolist()}
        if pot_desc["kind"] == "harmonic":
            omega = pot_desc.get("omega", 1.0)
            expected = grid.hbar * omega * (np.arange(levels) + 0.5)
            checks.append(Check("oscillator levels (n + 1/2) hbar omega", float(np.max(np.abs(lam - expected))), p.get("level_tol", 1e-2)))
        sym, comm = hermitian_residuals(gamma_lift(h))
        checks.append(Check("lifted H is K-Hermitian", max(sym, comm), 1e-12))
        worst = 0.0
        for _ in range(count):
            u = random_state(rng, grid.n_points)
            psi = complexify(u)
            oracle = 0.5 * np.vdot(psi, h.matrix @ psi).real
            worst = max(worst, abs(hsym_value(split_hamiltonian(h), u) - oracle))
        checks.append(Check("H_sym = 1/2 <psi|H|psi>", float(worst), 1e-12))
        ground = decomplexify(frame.eigvecs[:, 0] / np.sqrt(grid.h))
        return TaskResult(checks, details=details, files={"ground_state.csv": lambda d: write_snapshot_csv(d / "ground_state.csv", grid, ground)})

    def operators(rng):
        sym_q = hermitian_residuals(position_op(grid))
        sym_p = hermitian_residuals(momentum_op(grid))
        return TaskResult([
            Check("position operator K-Hermitian", max(sym_q), 1e-12),
            Check("momentum operator K-Hermitian", max(sym_p), 1e-12),
        ])

    return [spectrum, operators]


def _commutator_tasks(p: dict) -> list[Task]:
    grid = _grid_of(p)
    stencil = Stencil(p.get("stencil", "Central2"))
    psi = gaussian(p.get("x0", 0.0), p.get("sigma", 1.0))
    refinements = p.get("refinements", 3)
    lo, hi = p.get("ratio_range", [3.2, 4.8])

    def task(rng):
        rows = []
        g = grid
        for _ in range(refinements):
            rows.append((g.h, commutator_residual(g, sample(g, psi), stencil)))
            g = g.refined(2)
        ratio = rows[0][1] / rows[1][1]
        checks = [
            Check(f"relative residual at n={grid.n_points * 2}", rows[1][1], p.get("residual_tol", 1e-3)),
            Check(f"residual ratio n={grid.n_points}/n={grid.n_points * 2} >= {lo}", ratio, lo, ">="),
            Check(f"residual ratio n={grid.n_points}/n={grid.n_points * 2} <= {hi}", ratio, hi, "<="),
        ]
        slope = float(np.polyfit(np.log([r[0] for r in rows]), np.log([r[1] for r in rows]), 1)[0])
        u = sample(grid, psi)
        details = {"stencil": stencil.value, "loglog_slope": slope, "mean_x": grid_expectation(grid, position_op(grid), u)[0]}
        return TaskResult(checks, details=details, series={"order": [[h, r] for h, r in rows]})

    return [task]


_BUILDERS = {
    "Validate": _validate_tasks,
    "Lift": _lift_tasks,
    "Evolve": _evolve_tasks,
    "Ergodic": _ergodic_tasks,
    "Tensor": _tensor_tasks,
    "Grid": _grid_tasks,
    "Commutator": _commutator_tasks,
}


def _clean(obj):
    """Make a structure JSON-safe; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=False) + "\n"


def run_experiment(config: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Run every task of a config, write ``report.json`` and side files, return the report.

    Each task draws from its own child of ``SeedSequence(seed)`` indexed by
    task position, so results do not depend on ``threads``.
    """
    start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = _BUILDERS[config.kind](config.params)
    children = np.random.SeedSequence(config.seed).spawn(len(tasks))
    rngs = [np.random.default_rng(c) for c in children]
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda pair: pair[0](pair[1]), zip(tasks, rngs)))
    else:
        results = [t(r) for t, r in zip(tasks, rngs)]
    checks, details, series = [], {}, {}
    for i, res in enumerate(results):
        checks.extend(res.checks)
        if res.details:
            details[f"task_{i}"] = res.details
        series.update(res.series)
        for name, writer in res.files.items():
            writer(out_dir)
    report = {
        "artifact_version": __version__,
        "config": config.echo(),
        "checks": [c.to_dict() for c in checks],
        "details": details,
        "series": series,
        "pass": all(c.passed for c in checks),
        "wall_time_ms": int(round((time.perf_counter() - start) * 1000)),
    }
    (out_dir / "report.json").write_text(dumps_report(report))
    return report


def emit_plot_data(report_dir) -> list[Path]:
    """Write gnuplot two-column ``.dat`` files for every series plus a ``plots.md`` index."""
    report_dir = Path(report_dir)
    path = report_dir / "report.json"
    if not path.is_file():
        raise MissingReport(f"no report.json in {report_dir}")
    report = json.loads(path.read_text())
    written = []
    labels = {
        "convergence": ("T", "|time avg - torus avg|"),
        "order": ("h", "relative commutator residual"),
        "hsym_drift": ("t", "|H_sym(t) - H_sym(0)|"),
    }
    index = ["# Plot data", "", f"Source: `report.json` (kind {report['config']['kind']})", ""]
    for name, rows in report.get("series", {}).items():
        xl, yl = labels.get(name, ("x", "y"))
        dat = report_dir / f"{name}.dat"
        with dat.open("w") as fh:
            fh.write(f"# {xl} {yl}\n")
            for x, y in rows:
                fh.write(f"{x!r} {y!r}\n")
        written.append(dat)
        logscale = "set logscale xy; " if name in ("convergence", "order") else ""
        index.append(f"- `{dat.name}`: {yl} vs {xl}. gnuplot: `{logscale}plot '{dat.name}' using 1:2 with linespoints`")
    if not written:
        index.append("No series in this report.")
    md = report_dir / "plots.md"
    md.write_text("\n".join(index) + "\n")
    written.append(md)
    return written
