"""Queueing delay of the three policies on a 13-server cluster.

Each job sends r=4 copies and the others are cancelled when one starts.
All policies see the same arrivals and service times, so the gaps come from
where copies are sent. Short runs keep this demo quick; the acceptance tests
use the full length.
"""

from dataclasses import replace

from redsim import preset_config, run_sim
from redsim.simqueue import lambda_for_load

base = preset_config("fig5", seed=7, warmup_jobs=2_000, measured_jobs=20_000, replications=5)
print(f"n={base.n}, r={base.r}, mu1={base.mu1}, q={base.q}, p={base.p}")
print(f"{'rho':>5} {'random':>10} {'round-robin':>12} {'bibd':>10}")
for rho in (0.3, 0.5, 0.7, 0.9):
    lam = lambda_for_load(base, rho)
    wq = {k: run_sim(replace(base, policy=k, lam=lam)).mean_queuing_time for k in ("random", "round-robin", "bibd")}
    print(f"{rho:5.2f} {wq['random']:10.5f} {wq['round-robin']:12.5f} {wq['bibd']:10.5f}")
