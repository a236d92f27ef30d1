"""Benchmark the compiled cone-program core against the numpy fallback.

Instances mirror the multicast transmit-beam design: one epigraph cone of
dimension 2*N_t + 1 plus K three-dimensional constraint cones.  Run with

    python benchmarks/bench_socp.py
"""

import time

import numpy as np

from secbeam.socp import _ConeLayout, _socpcore, _solve_numpy, solve_cone_program
from secbeam.multicast import SocpProblem


def make_instance(rng, n_users=3, n_tx=4):
    rows = rng.standard_normal((n_users, n_tx)) + 1j * rng.standard_normal((n_users, n_tx))
    u_true = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    resid = np.abs(rows @ u_true - 1.0)
    radii = np.minimum(resid * rng.uniform(1.1, 2.0, n_users) + 0.05, 0.95)
    radii = np.maximum(radii, resid + 0.02)
    prob = SocpProblem(effective_rows=rows, mse_targets=radii ** 2,
                       noise_terms=np.zeros(n_users))
    return prob.to_conic()


def main():
    rng = np.random.default_rng(0)
    instances = [make_instance(rng) for _ in range(200)]

    t0 = time.perf_counter()
    objs_np = []
    for c, G, h, dims in instances:
        layout = _ConeLayout(dims)
        res = _solve_numpy(np.ascontiguousarray(c), np.ascontiguousarray(G),
                           np.ascontiguousarray(h), layout, 1e-8, 100)
        objs_np.append(res.objective)
    t_np = time.perf_counter() - t0

    if _socpcore is None:
        print(f"numpy fallback: {1e3 * t_np / len(instances):.3f} ms/solve")
        print("compiled core not built")
        return

    t0 = time.perf_counter()
    objs_cy = []
    for c, G, h, dims in instances:
        res = solve_cone_program(c, G, h, dims)
        objs_cy.append(res.objective)
    t_cy = time.perf_counter() - t0

    worst = max(abs(a - b) / max(abs(a), 1e-6)
                for a, b in zip(objs_np, objs_cy))
    print(f"{len(instances)} cone programs, one epigraph + 3 user cones each")
    print(f"numpy fallback : {1e3 * t_np / len(instances):8.3f} ms/solve")
    print(f"compiled core  : {1e3 * t_cy / len(instances):8.3f} ms/solve")
    print(f"speedup        : {t_np / t_cy:8.1f}x")
    print(f"worst objective disagreement: {worst:.2e} (relative)")


if __name__ == "__main__":
    main()
