"""Compare the pure-Python annealing engine with the compiled kernel.

Runs the same seeded coarsening on both backends, checks the results are
bit-identical, and reports step throughput.  Pass --quick to skip the
largest case.
"""

import argparse
import time

import numpy as np

from amganneal.annealing import AnnealConfig, sa_coarsen
from amganneal.partition import geometric_blocks
from amganneal.problems import gen_fd_laplacian_5pt, gen_fe_bilinear_9pt

THETA = 0.56


def total_steps(dec, cfg):
    n_opt = sum(len(s) for s in dec.subdomains)
    return cfg.sweeps * cfg.steps_per_dof_per_sweep * n_opt


def run(tag, A, dec, cfg):
    steps = total_steps(dec, cfg)
    timings = {}
    results = {}
    for backend in ("python", "cython"):
        t0 = time.perf_counter()
        splitting, trace = sa_coarsen(A, dec, cfg, backend=backend)
        timings[backend] = time.perf_counter() - t0
        results[backend] = (splitting.f_indices(), trace)
    identical = (
        np.array_equal(results["python"][0], results["cython"][0])
        and results["python"][1] == results["cython"][1]
    )
    t_py, t_cy = timings["python"], timings["cython"]
    print(
        f"{tag:<18} steps={steps:>9,}  python={t_py:7.2f}s ({steps / t_py:>9,.0f}/s)  "
        f"cython={t_cy:6.3f}s ({steps / t_cy:>11,.0f}/s)  "
        f"speedup={t_py / t_cy:5.1f}x  identical={identical}"
    )
    return identical


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="skip the largest case")
    args = parser.parse_args()

    ok = True
    A = gen_fd_laplacian_5pt(8)
    dec = geometric_blocks(8, (3, 3), A, THETA)
    ok &= run("fd 8x8", A, dec, AnnealConfig(theta=THETA, total_steps_per_dof=2000, seed=0))

    A = gen_fe_bilinear_9pt(16)
    dec = geometric_blocks(16, (4, 4), A, THETA)
    ok &= run(
        "fe 16x16",
        A,
        dec,
        AnnealConfig(theta=THETA, total_steps_per_dof=1000, steps_per_dof_per_sweep=5, seed=0),
    )

    if not args.quick:
        A = gen_fd_laplacian_5pt(32)
        dec = geometric_blocks(32, (4, 4), A, THETA)
        ok &= run(
            "fd 32x32",
            A,
            dec,
            AnnealConfig(theta=THETA, total_steps_per_dof=3000, steps_per_dof_per_sweep=5, seed=7),
        )

    if not ok:
        raise SystemExit("backends disagreed; see rows marked identical=False")


if __name__ == "__main__":
    main()
