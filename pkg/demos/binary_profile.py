"""
Where the probability mass of a small binary model lives
========================================================

Ten independent binary variables, each with outcome probabilities 0.1 and
0.9.  There are only 1024 states, so everything can be checked by brute
force against the normal model of ln p.
"""
import math

import numpy as np

from jointprofile import (
    HistogramSpec,
    coverage_at_mass,
    enumerate_profile,
    generate,
    parse_gen_spec,
    skewness,
    theoretical_normal,
)
from jointprofile.moments import contribution_log, density_log

net = generate(parse_gen_spec("identical:n=10,k=2,p=0.1,0.9,seed=0"))
nm = theoretical_normal(net)
print(f"xi = {nm.xi:.6f}, phi^2 = {nm.phi2:.6f}, skewness of p = {skewness(nm):.3e}")

# %% exact profile: one bin per half decade of probability
profile = enumerate_profile(net, HistogramSpec(bin_width=0.5))
print("\n log10 bin        states    mass")
for lo, hi, c, m in zip(profile.bin_lo, profile.bin_hi, profile.counts, profile.masses):
    print(f"({lo:5.1f}, {hi:5.1f}]  {c:8d}  {m:.6f}")

# %% the same bins predicted by the normal model
# density over log10 p is the ln-density times ln 10
centers = (profile.bin_lo + profile.bin_hi) / 2 * math.log(10)
states_pred = density_log(nm, centers) * math.log(10) * 0.5 * net.state_count
mass_pred = contribution_log(nm, centers) * math.log(10) * 0.5
print("\npredicted states per bin:", np.round(states_pred, 1))
print("predicted mass per bin:  ", np.round(mass_pred, 3))

# %% a few states hold most of the mass
for f in (0.5, 0.7, 0.9, 0.99):
    k = coverage_at_mass(profile, f)
    print(f"{k:4d} states ({k / net.state_count:6.2%}) carry {f:.0%} of the mass")
print(f"probabilities span {profile.spread_orders:.2f} orders of magnitude")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    ax[0].bar(profile.bin_lo, profile.counts, width=0.5, align="edge", alpha=0.6, label="states")
    ax[0].plot(centers / math.log(10), states_pred, "k.-", label="normal model")
    ax[1].bar(profile.bin_lo, profile.masses, width=0.5, align="edge", alpha=0.6, label="mass")
    ax[1].plot(centers / math.log(10), mass_pred, "k.-", label="normal model")
    for a in ax:
        a.set_xlabel("log10 p")
        a.legend()
    fig.savefig("binary_profile.png", dpi=120)
    print("wrote binary_profile.png")
