"""Benchmark: compiled kernels against the NumPy fallback.

Times the two hot paths on the heaviest preset (pump and Kerr both 0.25):
the Fock-basis propagation of the exact interaction-picture Hamiltonian and
the autocorrelation double series over a dense time grid.

Run:  python benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

import kerrpo
from kerrpo import backends

PI = math.pi
PARAMS = kerrpo.ModelParams(omega0=1.0, kappa=0.25, chi=0.25, z=2.0, alpha0=2.0)


def time_call(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_propagation(kern, n_basis=128, n_out=401):
    psi0, _ = kerrpo.coherent_state(PARAMS.z, n_basis)
    grid = np.linspace(0.0, 8 * PI, n_out)

    def run():
        states, drift, acc, rej, status = kern.propagate_pump_kerr(
            psi0, grid, PARAMS.omega0, PARAMS.kappa, PARAMS.chi, rtol=1e-11, atol=1e-11
        )
        assert status == 0
        return states, acc

    elapsed, (states, steps) = time_call(run)
    return elapsed, f"N={n_basis}, {n_out} samples, {steps} steps"


def bench_autocorr(kern, n_times=2001):
    traj = kerrpo.integrate_wn(PARAMS, 8 * PI, 8 * PI / (n_times - 1))

    def run():
        return kerrpo.autocorrelation_series(PARAMS, traj, backend=kern)

    elapsed, _ = time_call(run)
    return elapsed, f"{n_times} grid points"


def main():
    names = kerrpo.available_backends()
    print(f"available backends: {', '.join(names)}")
    if "compiled" not in names:
        print("compiled extension not built; timing the python backend only\n")

    rows = []
    for label, bench in (("propagation", bench_propagation), ("autocorr series", bench_autocorr)):
        timings = {}
        detail = ""
        for name in names:
            elapsed, detail = bench(backends.get_backend(name))
            timings[name] = elapsed
        row = {"kernel": label, "detail": detail, **timings}
        if "compiled" in timings and "python" in timings:
            row["speedup"] = timings["python"] / timings["compiled"]
        rows.append(row)

    print(f"{'kernel':<18} {'detail':<34} " + "".join(f"{n:>12} " for n in names)
          + ("speedup" if "compiled" in names else ""))
    for row in rows:
        cells = "".join(f"{row[n] * 1e3:>10.1f}ms " for n in names)
        tail = f"{row['speedup']:>6.1f}x" if "speedup" in row else ""
        print(f"{row['kernel']:<18} {row['detail']:<34} {cells}{tail}")


if __name__ == "__main__":
    main()
