"""Compare the compiled oracle kernel with the numpy fallback.

Usage::

    python benchmarks/bench_kernel.py [--repeat 3]

Times three workloads on both backends: single measure evaluations, a
batch objective evaluation and a full multistart Nelder-Mead search, at
rank 2 (GHZ/W mixture) and rank 8 (GHZ-Werner family).
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from roofcut.dual import build_instance
from roofcut.kernel import HAVE_COMPILED, get_backend
from roofcut.measures import TAU
from roofcut.reference import state_ghz_w, state_werner


def workloads(rank: int, rng: np.random.Generator):
    rho = state_ghz_w(0.6) if rank == 2 else state_werner(0.6)
    inst = build_instance(rho, TAU)
    a = rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))
    X = (a + a.conj().T) / 2
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    batch = rng.normal(size=(2048, 2 * rank))
    starts = rng.normal(size=(64, 2 * rank))
    V = inst.eigenvectors

    def single(kern, mid):
        return lambda: [kern.measure_value(psi, mid) for _ in range(1000)]

    def evaluate(kern, mid):
        return lambda: kern.eval_batch(batch, V, X, mid)

    def search(kern, mid):
        return lambda: kern.multistart(starts, V, X, mid, 400, 1e-9, 1e-6, 0.15)

    return {"1000 single evals": single, "2048-row batch": evaluate,
            "64-start multistart": search}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    names = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    if not HAVE_COMPILED:
        print("compiled kernel not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'rank':>4} {'measure':>7} {'workload':<22}" + "".join(f"{n:>12}" for n in names)
          + ("     speedup" if HAVE_COMPILED else ""))
    for rank in (2, 8):
        for label, make in workloads(rank, rng).items():
            for mid, mname in ((0, "tau"), (1, "pi")):
                times = []
                for name in names:
                    fn = make(get_backend(name), mid)
                    times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
                row = f"{rank:>4} {mname:>7} {label:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
                if HAVE_COMPILED:
                    row += f"{times[0] / times[1]:>11.1f}x"
                print(row)


if __name__ == "__main__":
    main()
