"""Compare the separation oracles on one random dual point.

Each oracle approximately maximizes the cost-adjusted revenue of a single
assortment; enumeration gives the true optimum on this small instance.
"""
import numpy as np

from fairassort.instance import Instance, brute_force_subdual
from fairassort.oracles import oracle_dispatch

rng = np.random.default_rng(3)
n, K = 8, 4
r, w, q = rng.uniform(0.1, 1, n), rng.uniform(0.1, 2, n), rng.uniform(0.1, 1, n)
z = rng.uniform(0, 0.5, (n, n))
np.fill_diagonal(z, 0)

general = Instance(K, 0.0, rng.uniform(0, 1, n), rng.uniform(0, 1, n), r, w, q)
uniform = Instance(K, 0.0, np.zeros(n), np.ones(n), np.full(n, 0.8), w, q)

for label, inst, methods in (("general outcomes", general, ["half", "ptas:0.5", "ptas:0.25"]),
                             ("visibility, equal revenues", uniform, ["uniform-half", "half", "fptas:0.2"])):
    opt = brute_force_subdual(inst, z)
    print(f"{label}: optimum {opt.value:.6f} at items {opt.items}")
    for m in methods:
        res = oracle_dispatch(inst, z, m)
        ratio = res.value / opt.value if opt.value > 0 else float("nan")
        print(f"  {m:<13} value {res.value:.6f}  ratio {ratio:.4f}  items {res.items}")
    print()
