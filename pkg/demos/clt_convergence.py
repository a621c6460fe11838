"""
How fast does ln p become normal?
=================================

For identical binary variables the Liapounov ratio is exactly n**-0.5, so
the normal approximation improves slowly.  Below we grow n and compare an
equiprobable Monte-Carlo sample of ln p with the theoretical curve.
"""
import numpy as np

from jointprofile import clt_report, generate, parse_gen_spec, sample_summary, theoretical_normal

SEED = 7

for n in (5, 10, 20, 50, 100, 400):
    net = generate(parse_gen_spec(f"identically_distributed:n={n},intervals=0:0.2,0:1,seed={SEED}"))
    nm = theoretical_normal(net)
    rep = clt_report(net)
    s = sample_summary(net, 50_000, reference=nm, seed=SEED)
    print(
        f"n={n:4d}  ratio={rep.ratio:.3f}  xi={nm.xi:9.3f}  mean={s.mean:9.3f}  "
        f"phi2={nm.phi2:8.3f}  var={s.variance:8.3f}  KS={s.ks_statistic:.3f}"
    )

# %% the identical-binary case, where the ratio has a closed form
for n in (1, 10, 100, 10_000):
    ratio = clt_report(generate(parse_gen_spec(f"identical:n={n},p=0.1,0.9,seed=0"))).ratio
    print(f"n={n:6d}  ratio={ratio:.6f}  n**-0.5={n ** -0.5:.6f}")

# %% multi-valued variables: the ratio is reported with an advisory
net = generate(parse_gen_spec("dirichlet_random:n=30,k=4,max_in_degree=2,seed=3"))
rep = clt_report(net)
print(f"\nk=4 network: ratio={rep.ratio:.3f}")
print(rep.advisory)
print("sample mean vs xi:", np.round([sample_summary(net, 20_000, seed=1).mean, theoretical_normal(net).xi], 3))
