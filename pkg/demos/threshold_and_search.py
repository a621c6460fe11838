"""
From a threshold estimate to the actual top states
==================================================

The normal model predicts the probability t below which states carry only a
fraction f of the mass, and how many states lie above it.  Best-first search
then lists those states exactly, without enumerating the rest.
"""
from jointprofile import (
    StopRule,
    epsilon_rank_estimate,
    generate,
    mass_threshold,
    parse_gen_spec,
    search_top_states,
    theoretical_normal,
)

net = generate(parse_gen_spec("identical:n=10,k=2,p=0.1,0.9,seed=0"))
nm = theoretical_normal(net)

for eps in (0.5, 0.3, 0.1, 0.01):
    th = mass_threshold(nm, eps)
    est = epsilon_rank_estimate(nm, eps, net.state_count)
    found = search_top_states(net, StopRule.residual_mass(eps))
    print(
        f"eps={eps:<5} t={th.t:.3e}  l={th.l:.4f}  predicted states={est.estimate:7.1f}  "
        f"search needed {len(found):4d} (mass {found.accounted_mass:.4f})"
    )

# %% a model far too big to enumerate
big = generate(parse_gen_spec("identically_distributed:n=60,intervals=0:0.05,0:1,seed=11"))
nm = theoretical_normal(big)
res = search_top_states(big, StopRule.max_states(25))
print(f"\n{big.state_count:.3e} states; top 25 carry {res.accounted_mass:.4f} of the mass")
print(f"expanded {res.nodes_expanded} nodes, residual mass at most {res.residual_bound:.4f}")
th = mass_threshold(nm, 0.5)
print(f"half the mass sits in states above p = {th.t:.3e} (model estimate)")
