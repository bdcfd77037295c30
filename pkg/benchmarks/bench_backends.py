"""Compare the numba kernels with the pure-numpy fallback.

Usage: python benchmarks/bench_backends.py [--repeats 5] [--seed 1]

Three workloads: dense statevector circuits, stabilizer tableau updates and
affine sampling. Sampling also reports the per-shot time at several widths so
the scaling can be read off directly; preparation (tableau simulation and
elimination) is timed separately from the shots.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from rebitsim import get_backend, set_backend
from rebitsim.circuit import Circuit, run_logical, run_physical, zero_state
from rebitsim.gates import g
from rebitsim.stabilizer import AffineSampler, simulate

BACKENDS = ("numba", "numpy")


def random_dense_circuit(n: int, length: int, rng: np.random.Generator) -> Circuit:
    gates = []
    for _ in range(length):
        kind = str(rng.choice(["H", "T", "S", "CX", "CK", "CCZ"]))
        if kind in ("CX", "CCZ"):
            wires = rng.choice(n, 2 if kind == "CX" else 3, replace=False) + 1
            gates.append(g(kind, *map(int, wires)))
        else:
            gates.append(g(kind, int(rng.integers(1, n + 1))))
    return Circuit(n, gates)


def random_clifford_circuit(n: int, rng: np.random.Generator) -> Circuit:
    gates = [g("H", q) for q in range(1, n + 1)]
    for _ in range(4 * n):
        kind = str(rng.choice(["H", "S", "CK", "CX"]))
        if kind == "CX":
            a, b = rng.choice(n, 2, replace=False) + 1
            gates.append(g("CX", int(a), int(b)))
        else:
            gates.append(g(kind, int(rng.integers(1, n + 1))))
    return Circuit(n, gates)


def best_of(fn, repeats: int) -> float:
    fn()  # warm-up, includes JIT compilation
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_dense(repeats: int, rng: np.random.Generator) -> dict[str, float]:
    circ = random_dense_circuit(16, 200, rng)
    psi = zero_state(16)
    return {
        "logical n=16, 200 gates": best_of(lambda: run_logical(circ, psi), repeats),
        "physical n=16, 200 gates": best_of(lambda: run_physical(circ, psi), repeats),
    }


def bench_tableau(repeats: int, rng: np.random.Generator) -> dict[str, float]:
    circ = random_clifford_circuit(512, rng)
    return {"simulate n=512": best_of(lambda: simulate(circ), repeats)}


def bench_sampling(repeats: int, rng: np.random.Generator, shots: int = 2000) -> dict[str, float]:
    out = {}
    for n in (64, 256, 1024):
        circ = random_clifford_circuit(n, rng)
        prep = best_of(lambda: AffineSampler.from_tableau(simulate(circ)), max(1, repeats // 2))
        sampler = AffineSampler.from_tableau(simulate(circ))
        per_shot = best_of(lambda: sampler.sample_bits(shots, np.random.default_rng(0)), repeats) / shots
        out[f"prep n={n}"] = prep
        out[f"per shot n={n}"] = per_shot
    return out


def fmt(seconds: float) -> str:
    if seconds < 1e-3:
        return f"{seconds * 1e6:.2f} us"
    return f"{seconds * 1e3:.2f} ms"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    original = get_backend()
    results: dict[str, dict[str, float]] = {}
    for backend in BACKENDS:
        set_backend(backend)
        rng = np.random.default_rng(args.seed)
        timings = {}
        timings.update(bench_dense(args.repeats, rng))
        timings.update(bench_tableau(args.repeats, rng))
        timings.update(bench_sampling(args.repeats, rng))
        results[backend] = timings
    set_backend(original)

    width = max(len(k) for k in results["numba"])
    print(f"{'workload':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for key in results["numba"]:
        a, b = results["numba"][key], results["numpy"][key]
        print(f"{key:<{width}}  {fmt(a):>12}  {fmt(b):>12}  {b / a:>7.1f}x")

    for backend in BACKENDS:
        sizes = np.array([64, 256, 1024])
        times = np.array([results[backend][f"per shot n={n}"] for n in sizes])
        slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
        print(f"{backend}: per-shot sampling exponent {slope:.2f}")


if __name__ == "__main__":
    main()
