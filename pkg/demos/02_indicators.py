"""Compare the three policies on the closed-form indicators.

ROF and RDF are reciprocals of the first two moments of the overlap between a
job's servers and the first job's servers. All policies share ROF; the
designs keep RDF as high as random selection while balancing load exactly.
"""

import numpy as np

from redsim import lbf_random_asymptotic, table1_row

print(f"{'r':>3} {'n':>4} {'ROF':>8} {'RDF rand':>9} {'RDF rr':>8} {'RDF bibd':>9} {'LBF rand':>9}")
for r in range(2, 11):
    n = r * (r - 1) + 1
    rows = {k: table1_row(k, r, T=50) for k in ("random", "round-robin", "bibd")}
    print(
        f"{r:3d} {n:4d} {float(rows['bibd'].rof):8.4f} {float(rows['random'].rdf):9.4f} "
        f"{float(rows['round-robin'].rdf):8.4f} {float(rows['bibd'].rdf):9.4f} {rows['random'].lbf:9.4f}"
    )

# Random selection only starts to look balanced after enough rounds.
n, r = 21, 5
threshold = 2 * (n / r - 1) * np.log(n)
print(f"\nrandom LBF at n={n}, r={r} stays 0 until T > {threshold:.2f}")
for T in (10, 20, 50, 200, 1000, 10_000):
    print(f"  T={T:6d}  LBF={lbf_random_asymptotic(n, r, T):.4f}")
