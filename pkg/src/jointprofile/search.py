"""Best-first enumeration of the most probable states.

The search walks the probability tree variable by variable in network
order.  A partial state is scored by its exact prefix log-probability plus,
for every unassigned variable, the largest log entry anywhere in that
variable's CPT.  That score never underestimates a completion, so popping
the frontier in score order emits complete states in exactly descending
probability.  Ties are broken by state index, matching :func:`top_k_exact`.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .enumeration import DEFAULT_CAP, compensated_cumsum, descending_order, enumerate_log_probs
from .network import Assignment, Network, assignment_to_index

DEFAULT_NODE_CAP = 10**7
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class StopRule:
    kind: str  # "max_states" | "residual_mass" | "probability_floor"
    value: float

    def __post_init__(self) -> None:
        if self.kind == "max_states":
            if int(self.value) != self.value or self.value < 0:
                raise ValueError("max_states needs a nonnegative integer")
        elif self.kind == "residual_mass":
            if not 0.0 < self.value < 1.0:
                raise ValueError("residual mass epsilon must lie in (0, 1)")
        elif self.kind == "probability_floor":
            if not 0.0 < self.value <= 1.0:
                raise ValueError("probability floor must lie in (0, 1]")
        else:
            raise ValueError(f"unknown stop rule {self.kind!r}")

    @classmethod
    def max_states(cls, k: int) -> StopRule:
        return cls("max_states", k)

    @classmethod
    def residual_mass(cls, epsilon: float) -> StopRule:
        return cls("residual_mass", epsilon)

    @classmethod
    def probability_floor(cls, t: float) -> StopRule:
        return cls("probability_floor", t)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass
class SearchResult:
    rule: StopRule
    states: list[Assignment]
    indices: list[int]
    log_probs: np.ndarray
    probs: np.ndarray
    cumulative: np.ndarray
    accounted_mass: float
    nodes_generated: int
    nodes_expanded: int
    truncated: bool
    exhausted: bool

    @property
    def residual_bound(self) -> float:
        """Mass not yet accounted for; an exact bound on what the rest can carry."""
        return max(0.0, 1.0 - self.accounted_mass)

    def __len__(self) -> int:
        return len(self.states)

    def manifest(self) -> dict:
        return {
            "rule": self.rule.to_dict(),
            "states_emitted": len(self.states),
            "accounted_mass": self.accounted_mass,
            "residual_bound": self.residual_bound,
            "nodes_generated": self.nodes_generated,
            "nodes_expanded": self.nodes_expanded,
            "truncated": self.truncated,
            "exhausted": self.exhausted,
        }


class _Neumaier:
    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


def search_top_states(
    net: Network, rule: StopRule, *, node_cap: int = DEFAULT_NODE_CAP
) -> SearchResult:
    """Emit states in descending probability until ``rule`` says stop.

    Zero-probability branches are pruned, so such states are never emitted.
    If the frontier grows past ``node_cap`` nodes the search stops early and
    flags the result as truncated; everything emitted up to then is exact.
    """
    n = len(net)
    cards = net.cardinalities
    parents = net.parent_indices
    tables = [t.tolist() for t in net.log_cpts]
    max_log = [float(np.max(t)) for t in net.log_cpts]
    suffix = [math.fsum(max_log[d:]) for d in range(n + 1)]
    stride = [1] * (n + 1)
    for d in range(n - 1, -1, -1):
        stride[d] = stride[d + 1] * cards[d]

    def bound(lp: float, depth: int) -> float:
        s = suffix[depth]
        return lp + s + 2 * (n + 1) * _EPS * (abs(lp) + abs(s)) + 1e-300

    log_floor = None
    if rule.kind == "probability_floor":
        log_floor = math.log(rule.value)

    # heap entries: (-score, smallest state index below the node, depth, prefix log p, prefix)
    heap: list[tuple[float, int, int, float, tuple[int, ...]]] = []
    heapq.heappush(heap, (-bound(0.0, 0), 0, 0, 0.0, ()))
    generated, expanded = 1, 0
    truncated = False

    states: list[Assignment] = []
    indices: list[int] = []
    logps: list[float] = []
    acc = _Neumaier()
    limit = int(rule.value) if rule.kind == "max_states" else None

    def done() -> bool:
        if limit is not None:
            return len(states) >= limit
        if rule.kind == "residual_mass":
            return 1.0 - acc.value <= rule.value
        return False

    while heap and not done():
        neg_score, min_index, depth, lp, prefix = heap[0]
        if log_floor is not None and -neg_score < log_floor - 1e-9 * (1 + abs(log_floor)):
            break
        heapq.heappop(heap)
        if depth == n:
            p = float(np.exp(np.float64(lp)))
            if log_floor is not None and not p >= rule.value:
                break
            states.append(prefix)
            indices.append(min_index)
            logps.append(lp)
            acc.add(p)
            continue
        if generated >= node_cap:
            heapq.heappush(heap, (neg_score, min_index, depth, lp, prefix))
            truncated = True
            break
        expanded += 1
        cfg = 0
        for p_i in parents[depth]:
            cfg = cfg * cards[p_i] + prefix[p_i]
        table = tables[depth]
        for x in range(cards[depth]):
            entry = table[x][cfg]
            if entry == -math.inf:
                continue
            child_lp = lp + entry
            child = prefix + (x,)
            child_index = min_index + x * stride[depth + 1]
            score = child_lp if depth + 1 == n else bound(child_lp, depth + 1)
            heapq.heappush(heap, (-score, child_index, depth + 1, child_lp, child))
            generated += 1

    logp_arr = np.array(logps, dtype=np.float64)
    probs = np.exp(logp_arr)
    cumulative = compensated_cumsum(probs)
    return SearchResult(
        rule=rule,
        states=states,
        indices=indices,
        log_probs=logp_arr,
        probs=probs,
        cumulative=cumulative,
        accounted_mass=acc.value,
        nodes_generated=generated,
        nodes_expanded=expanded,
        truncated=truncated,
        exhausted=not heap,
    )


@dataclass
class VerificationReport:
    ok: bool
    failures: list[str] = field(default_factory=list)
    compared: int = 0
    truncated: bool = False

    def __bool__(self) -> bool:
        return self.ok


def verify_against_enumeration(
    net: Network,
    rule: StopRule,
    *,
    cap: int = DEFAULT_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
    logp: np.ndarray | None = None,
    order: np.ndarray | None = None,
    mass_tol: float = 1e-12,
) -> VerificationReport:
    """Check order, membership and mass of a search run against brute force.

    ``logp`` and its :func:`descending_order` may be passed in when several
    rules are checked on one network.  A truncated run is checked on its
    emitted prefix only.
    """
    if logp is None:
        logp = enumerate_log_probs(net, cap=cap)
    res = search_top_states(net, rule, node_cap=node_cap)
    failures: list[str] = []

    if order is None:
        order = descending_order(logp)
    n_pos = int(np.count_nonzero(np.isfinite(logp)))
    order = order[:n_pos]
    exact_probs = np.exp(logp[order])
    exact_cum = compensated_cumsum(exact_probs)
    if rule.kind == "max_states":
        want = min(int(rule.value), n_pos)
    elif rule.kind == "residual_mass":
        reached = np.flatnonzero(1.0 - exact_cum <= rule.value)
        want = int(reached[0]) + 1 if reached.size else n_pos
    else:
        want = int(np.count_nonzero(exact_probs >= rule.value))

    m = len(res)
    if m > n_pos:
        failures.append(f"search emitted {m} states, only {n_pos} have positive probability")
    compared = min(m, n_pos)
    exact_states = net.digits(order[:compared])
    for r in range(compared):
        if res.indices[r] != int(order[r]):
            failures.append(
                f"rank {r + 1}: search gave state {res.indices[r]}, enumeration {int(order[r])}"
            )
            break
        if res.states[r] != tuple(int(d) for d in exact_states[r]):
            failures.append(f"rank {r + 1}: assignment does not match state index")
            break
        if res.probs[r] != exact_probs[r]:
            failures.append(f"rank {r + 1}: probability {res.probs[r]!r} != {exact_probs[r]!r}")
            break
    for r, idx in enumerate(res.indices):
        if idx != assignment_to_index(net, res.states[r]):
            failures.append(f"rank {r + 1}: reported index {idx} does not match its assignment")
            break
    if compared and abs(res.accounted_mass - exact_cum[compared - 1]) > mass_tol:
        failures.append(
            f"accounted mass {res.accounted_mass!r} vs enumeration {exact_cum[compared - 1]!r}"
        )
    if not res.truncated:
        if m != want:
            failures.append(f"search emitted {m} states, enumeration says {want}")
        if rule.kind == "residual_mass" and res.residual_bound > rule.value:
            failures.append(f"residual {res.residual_bound!r} exceeds epsilon {rule.value!r}")
    return VerificationReport(not failures, failures, compared, res.truncated)
