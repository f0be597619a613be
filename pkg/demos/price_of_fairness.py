"""How much revenue does fairness cost?

Draws synthetic MNL markets with high and low price sensitivity, then
sweeps the fairness slack delta and prints the mean revenue loss against
the best unconstrained assortment.

    python3 demos/price_of_fairness.py [instances]
"""
import sys

from fairassort.harness import benchmark_spec, delta_sweep, fmt, gen_synthetic
from fairassort.solver import SolverConfig

count = int(sys.argv[1]) if len(sys.argv) > 1 else 10
deltas = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]

for beta in (-1.0, -0.1):
    insts = gen_synthetic(benchmark_spec(beta, instance_count=count, seed=7))
    res = delta_sweep(insts, deltas, SolverConfig(oracle="half"))
    print(f"beta = {beta}  ({count} markets, n = 10, K = 5)")
    print("  delta   loss %          support")
    for a in res.aggregate():
        print(f"  {a['delta']:4.1f}   {fmt(100 * a['pof']):>7} ± {fmt(100 * a['pof_sem']):<7} "
              f"{fmt(a['support'])}")
    print()
