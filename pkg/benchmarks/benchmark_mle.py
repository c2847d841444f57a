#!/usr/bin/env python3
"""Benchmark the compiled likelihood kernel against the NumPy fallback.

Runs repeated maximum-likelihood reconstructions of a commutator process
matrix from Poisson count data and reports per-reconstruction and
per-iteration timings for each available backend.

Usage: python benchmarks/benchmark_mle.py [--flux 1e5] [--repeats 50]
"""

import argparse
import time

import numpy as np

from pauliproc import _mle_numpy
from pauliproc.algebra import SIGMA_X, SIGMA_Z, commutator
from pauliproc.tomography import TomographySettings, choi_from_kraus

try:
    from pauliproc import _mle_core
except ImportError:
    _mle_core = None


def make_dataset(flux: float, seed: int = 0):
    settings = TomographySettings.standard(flux=flux)
    effects = settings.effects()
    chi = choi_from_kraus(commutator(SIGMA_Z, SIGMA_X) / (4 * np.sqrt(2)))
    p = np.einsum("mij,ji->m", effects, chi.matrix).real
    counts = np.random.default_rng(seed).poisson(flux * 16 * p).astype(float)
    return effects, counts


def bench(kernel, effects, counts, repeats: int):
    chi0 = np.eye(4, dtype=complex) / 4
    # warm-up + result capture
    chi, iters, ll, converged, _ = kernel.iterate(effects, counts, chi0)
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernel.iterate(effects, counts, chi0)
    dt = (time.perf_counter() - t0) / repeats
    return dt, iters, converged, chi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--flux", type=float, default=1e5)
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()

    effects, counts = make_dataset(args.flux)
    rows = []
    results = {}
    for name, kernel in (("numpy", _mle_numpy), ("cython", _mle_core)):
        if kernel is None:
            print(f"{name:>8}: not available (extension not built)")
            continue
        dt, iters, converged, chi = bench(kernel, effects, counts, args.repeats)
        results[name] = (dt, chi)
        rows.append((name, dt, iters, converged))
        print(
            f"{name:>8}: {dt * 1e3:8.3f} ms/reconstruction   "
            f"{dt / iters * 1e6:8.2f} us/iteration   ({iters} iterations, converged={converged})"
        )
    if len(results) == 2:
        speedup = results["numpy"][0] / results["cython"][0]
        agreement = np.abs(results["numpy"][1] - results["cython"][1]).max()
        print(f"\nspeedup (numpy / cython): {speedup:.1f}x")
        print(f"max |chi_numpy - chi_cython|: {agreement:.2e}")


if __name__ == "__main__":
    main()
