"""Throw balls into urns with each policy and compare against the formulas.

Each round picks r of n urns; after T rounds we look at the emptiest and
fullest urn and at how much later rounds overlap the first one.
"""

from redsim.urnball import analytic_indicators, empirical_indicators, run_experiment1

n, r, T, reps = 21, 5, 2100, 200
for kind in ("random", "round-robin", "bibd"):
    occ, ov = run_experiment1(kind, n, r, T, replications=reps, seed=42)
    emp = empirical_indicators(occ, ov)
    ana = analytic_indicators(kind, n, r, T)
    print(f"{kind:12s} min/max load {occ.mean_min:6.1f}/{occ.mean_max:6.1f}  LBF {emp.lbf:.3f} (formula {float(ana.lbf):.3f})")
    print(f"{'':12s} ROF {emp.rof:.4f} (formula {float(ana.rof):.4f})  RDF {emp.rdf:.4f} (formula {float(ana.rdf):.4f})")
    print(f"{'':12s} overlap histogram {ov.histogram(r).tolist()}")
