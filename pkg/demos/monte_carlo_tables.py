"""Finite-size Monte Carlo against the exact low-SNR coefficients.

Nr = 50 receive antennas, Nt in {200, 100, 50, 26}.  For each configuration
we draw 2000 channel realisations and estimate nu_1..nu_3 from normalised
traces.  Agreement improves as the matrices grow, and nu_3 carries the
largest finite-size bias.
"""
from algmimo.cli import reproduce_table

for which, label in (("table1a", "i.i.d. Rayleigh"), ("table1b", "two-atom correlated")):
    rows, meta = reproduce_table(which, trials=2000, seed=1)
    print(f"{label}  (rng {meta[0]['rng']}, seed {meta[0]['seed']})")
    print("   Nt  k     nu_hat    theory    stderr")
    for r in rows:
        print(f"  {r['Nt']:3d}  {r['k']}  {r['nu_hat']:9.4f} {r['nu_theory']:9.4f}  {r['stderr']:.1e}")
    print()
