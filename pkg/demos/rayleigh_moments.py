"""Exact moments and Shannon coefficients of the i.i.d. Rayleigh channel.

For H with i.i.d. CN(0,1) entries and aspect ratio c = Nr/Nt, the limiting
spectral law of H H^*/Nt is Marchenko-Pastur.  Its moments are Narayana
polynomials in c, and the compiled polynomial recovers them exactly.
"""
from fractions import Fraction as F

from algmimo.channels import MP, compile_channel
from algmimo.transforms import shannon_coefficients

for c in (F(1, 4), F(1, 2), F(1), F(25, 13)):
    ch = compile_channel(MP(c))
    M = ch.moments(4).moments
    nu = shannon_coefficients(ch.moments(3))
    print(f"c = {c}")
    print("  moments:", ", ".join(str(m) for m in M))
    print("  nu_k   :", ", ".join(str(v) for v in nu))

# the polynomial itself is small: m, z and c enter with low degree
print()
print("L(m, z) for c = 1/4:")
print(compile_channel(MP(F(1, 4))).lmz)
