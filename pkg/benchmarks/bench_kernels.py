"""Time the compiled and numpy backends on the four hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best wall time of each backend and the
speed-up. Both backends are fed identical inputs and their outputs are
compared before timing.
"""
import argparse
import timeit

import numpy as np

from kahlerq import kernels
from kahlerq.dynamics import cayley_map, split_hamiltonian
from kahlerq.ergodic import ModePolynomial
from kahlerq.sampling import random_hermitian


def cases(rng):
    hs = split_hamiltonian(random_hermitian(rng, 4))
    step = cayley_map(hs, 1e-2)
    u0 = rng.normal(size=8)
    poly = ModePolynomial.monomial(2, q={0: 2, 1: 2})
    three = ModePolynomial([(1.0, (2, 1, 0), (0, 1, 2)), (0.5, (0, 0, 4), (2, 0, 0))])
    amp = np.array([1.0, 1.0])
    yield "propagate_linear  N=4, 10^4 steps", "propagate_linear", (step, u0, 10_000, 100)
    yield "mode_poly_flow    N=2, 3.2*10^5 samples", "mode_poly_flow", (
        amp, np.zeros(2), np.array([1.0, np.sqrt(2)]), poly.coef, poly.qexp, poly.pexp, 1e4, 320_000)
    yield "mode_poly_torus   N=3, grid 32", "mode_poly_torus", (
        np.ones(3), three.coef, three.qexp, three.pexp, 32)
    yield "relation_search   N=3, bound 50", "relation_search", (np.array([1.0, np.sqrt(2), np.sqrt(3)]), 50, 1e-9)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return np.allclose(a, b, rtol=1e-10, atol=1e-12)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    names = list(backends)
    print(f"{'kernel':42s}" + "".join(f"{n:>12s}" for n in names) + ("     speed-up" if len(names) > 1 else ""))
    for label, fn, call_args in cases(np.random.default_rng(7)):
        outs = [getattr(backends[n], fn)(*call_args) for n in names]
        if len(outs) > 1 and not same(outs[0], outs[1]):
            raise SystemExit(f"{fn}: backends disagree")
        times = [min(timeit.repeat(lambda: getattr(backends[n], fn)(*call_args), number=1, repeat=args.repeat)) for n in names]
        row = f"{label:42s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:12.1f}x"
        print(row)


if __name__ == "__main__":
    main()
