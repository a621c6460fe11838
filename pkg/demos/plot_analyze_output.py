"""
Plotting an ``analyze`` run
===========================

    jointprofile analyze --generate identical:n=10,k=2,p=0.1,0.9 --seed 0 --out run
    python plot_analyze_output.py run

Reads curves.csv, histogram.csv and coverage.csv from the output directory
and draws the density, contribution and coverage panels.
"""
import json
import sys
from pathlib import Path

import numpy as np

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is needed for this demo (pip install matplotlib)")

run = Path(sys.argv[1] if len(sys.argv) > 1 else "run")
curves = np.genfromtxt(run / "curves.csv", delimiter=",", names=True)
hist = np.genfromtxt(run / "histogram.csv", delimiter=",", names=True)
cover = np.genfromtxt(run / "coverage.csv", delimiter=",", names=True)
profile = json.loads((run / "profile.json").read_text())
width = hist["bin_hi_log10"][0] - hist["bin_lo_log10"][0]

fig, ax = plt.subplots(1, 3, figsize=(14, 4))
ax[0].bar(hist["bin_lo_log10"], hist["count"] / profile["state_count"] / width, width=width,
          align="edge", alpha=0.5, label="enumeration")
ax[0].plot(curves["log10_p"], curves["density_log10"], "k", label="normal model")
ax[0].set_title("states per unit log10 p")
ax[1].bar(hist["bin_lo_log10"], hist["mass"] / width, width=width, align="edge", alpha=0.5,
          label="enumeration")
ax[1].plot(curves["log10_p"], curves["contribution_log10"], "k", label="normal model")
ax[1].set_title("mass per unit log10 p")
for a in ax[:2]:
    a.set_xlabel("log10 p")
    a.legend()
ax[2].semilogx(cover["rank"], cover["cumulative_mass"], ".-")
ax[2].set_xlabel("number of most likely states")
ax[2].set_ylabel("cumulative mass")
fig.tight_layout()
fig.savefig(run / "profile.png", dpi=120)
print("wrote", run / "profile.png")
