"""A fair movie shelf from ratings.

Builds a 20-movie market-share instance from a ratings file (or from the
synthetic stand-in when no file is given), solves it at several fairness
levels and shows how often each movie gets displayed.

    python3 demos/movie_shelf.py [u.data [u.item]]
"""
import sys

import numpy as np

from fairassort.harness import RatingsSpec, delta_sweep, ingest_ratings, synthetic_ratings
from fairassort.solver import SolverConfig

if len(sys.argv) > 1:
    meta = sys.argv[2] if len(sys.argv) > 2 else None
    inst = ingest_ratings(sys.argv[1], RatingsSpec(genre="drama" if meta else None), metadata=meta)
else:
    inst = ingest_ratings(synthetic_ratings(seed=0))

res = delta_sweep([inst], [0.0, 1.0, 3.0, 5.0], SolverConfig(oracle="uniform-half"))
print(f"{inst.n} movies, shelf of K = {inst.K}; best market share {res.rows[0].unconstrained:.4f}")
for row in res.rows:
    shown = np.round(row.visibility, 2)
    print(f"delta {row.delta:3.1f}: share {row.objective:.4f} (loss {100 * row.pof:.2f}%), "
          f"{row.support} assortments, display prob min {shown.min():.2f} max {shown.max():.2f}")
