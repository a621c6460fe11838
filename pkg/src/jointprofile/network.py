"""Discrete factored models and exact state probabilities.

A network is a topologically ordered list of variables, each with a dense
conditional probability table.  A CPT is stored as an array of shape
``(k, n_configs)``: column ``j`` is the distribution of the variable given
parent configuration ``j``, where configurations are numbered mixed-radix
over the parents' outcomes in declaration order (last parent fastest).

States are numbered the same way over all variables (last variable fastest),
so index 0 is the all-first-outcome assignment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Assignment = tuple[int, ...]

NORMALIZATION_TOL = 1e-12
# columns this close to 1 are left bit-for-bit untouched
_EXACT_SLACK = 4 * np.finfo(float).eps


class NetworkError(ValueError):
    """Raised when a network or assignment violates a structural invariant."""


class DegenerateDistributionError(ValueError):
    """Raised when a log-moment or density is undefined for the input."""


@dataclass(frozen=True, eq=False)
class Variable:
    name: str
    outcomes: tuple[str, ...]
    parents: tuple[str, ...]
    cpt: np.ndarray

    def __post_init__(self) -> None:
        outcomes = tuple(str(o) for o in self.outcomes)
        if len(outcomes) < 2:
            raise NetworkError(f"variable {self.name!r} needs at least 2 outcomes")
        if len(set(outcomes)) != len(outcomes):
            raise NetworkError(f"variable {self.name!r} has duplicate outcome labels")
        parents = tuple(self.parents)
        if len(set(parents)) != len(parents):
            raise NetworkError(f"variable {self.name!r} lists a parent twice")
        if self.name in parents:
            raise NetworkError(f"variable {self.name!r} is its own parent")
        cpt = np.array(self.cpt, dtype=np.float64)
        if cpt.ndim == 1:
            cpt = cpt.reshape(-1, 1)
        if cpt.ndim != 2 or cpt.shape[0] != len(outcomes):
            raise NetworkError(
                f"variable {self.name!r}: CPT must have shape ({len(outcomes)}, n_configs), "
                f"got {cpt.shape}"
            )
        if not np.all(np.isfinite(cpt)) or np.any(cpt < 0) or np.any(cpt > 1):
            raise NetworkError(f"variable {self.name!r}: CPT entries must lie in [0, 1]")
        for j in range(cpt.shape[1]):
            col = cpt[:, j]
            total = math.fsum(col.tolist())
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise NetworkError(
                    f"variable {self.name!r}: CPT column {j} sums to {total!r}, not 1"
                )
            if abs(total - 1.0) > _EXACT_SLACK * len(col):
                cpt[:, j] = col / total
        cpt.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "cpt", cpt)

    @property
    def k(self) -> int:
        return len(self.outcomes)

    @property
    def n_configs(self) -> int:
        return self.cpt.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Variable):
            return NotImplemented
        return (
            self.name == other.name
            and self.outcomes == other.outcomes
            and self.parents == other.parents
            and self.cpt.shape == other.cpt.shape
            and self.cpt.tobytes() == other.cpt.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Network:
    """Topologically ordered collection of variables."""

    variables: tuple[Variable, ...]
    name: str = "network"
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        if not variables:
            raise NetworkError("network has no variables")
        index: dict[str, int] = {}
        for pos, var in enumerate(variables):
            if var.name in index:
                raise NetworkError(f"duplicate variable name {var.name!r}")
            for p in var.parents:
                if p not in index:
                    raise NetworkError(
                        f"variable {var.name!r}: parent {p!r} is not declared before it"
                    )
            expected = math.prod(variables[index[p]].k for p in var.parents)
            if var.n_configs != expected:
                raise NetworkError(
                    f"variable {var.name!r}: CPT has {var.n_configs} columns, "
                    f"parents require {expected}"
                )
            index[var.name] = pos
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.variables)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.name == other.name and self.variables == other.variables

    __hash__ = None  # type: ignore[assignment]

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NetworkError(f"unknown variable {name!r}") from None

    def __getitem__(self, key: int | str) -> Variable:
        if isinstance(key, str):
            key = self.index_of(key)
        return self.variables[key]

    @cached_property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.k for v in self.variables)

    @cached_property
    def state_count(self) -> int:
        return math.prod(self.cardinalities)

    @cached_property
    def parent_indices(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self._index[p] for p in v.parents) for v in self.variables)

    @cached_property
    def log_cpts(self) -> tuple[np.ndarray, ...]:
        """Natural-log CPTs; zero entries become ``-inf``."""
        out = []
        with np.errstate(divide="ignore"):
            for v in self.variables:
                table = np.log(v.cpt)
                table.setflags(write=False)
                out.append(table)
        return tuple(out)

    def parent_config(self, i: int, a: Sequence[int]) -> int:
        cfg = 0
        for p in self.parent_indices[i]:
            cfg = cfg * self.cardinalities[p] + a[p]
        return cfg

    def subnetwork(self, names: Iterable[str], name: str | None = None) -> Network:
        """Restrict to a parent-closed subset of variables, keeping network order."""
        wanted = set(names)
        for n in wanted:
            self.index_of(n)
        for n in wanted:
            missing = [p for p in self[n].parents if p not in wanted]
            if missing:
                raise NetworkError(
                    f"subset is not self-contained: {n!r} needs parents {missing}"
                )
        kept = tuple(v for v in self.variables if v.name in wanted)
        return Network(kept, name=name or f"{self.name}-subset")

    # vectorized helpers, shared by enumeration and sampling

    def digits(self, indices: np.ndarray) -> np.ndarray:
        """Mixed-radix digits of state indices, shape ``(len(indices), n)``."""
        idx = np.asarray(indices, dtype=np.int64).copy()
        out = np.empty((idx.size, len(self)), dtype=np.int64)
        for i in range(len(self) - 1, -1, -1):
            k = self.cardinalities[i]
            out[:, i] = idx % k
            idx //= k
        return out

    def log_probs(self, outcomes: np.ndarray) -> np.ndarray:
        """Log-probabilities of many assignments (rows of ``outcomes``).

        Factors are added left to right in network order, so each value is
        bit-identical to :func:`state_log_prob` on the same assignment.
        """
        outcomes = np.asarray(outcomes, dtype=np.int64)
        acc = np.zeros(outcomes.shape[0], dtype=np.float64)
        for i, table in enumerate(self.log_cpts):
            cfg = np.zeros(outcomes.shape[0], dtype=np.int64)
            for p in self.parent_indices[i]:
                cfg = cfg * self.cardinalities[p] + outcomes[:, p]
            acc += table[outcomes[:, i], cfg]
        return acc


def _check_assignment(net: Network, a: Sequence[int]) -> None:
    if len(a) != len(net):
        raise NetworkError(f"assignment has {len(a)} entries, network has {len(net)} variables")
    for i, (x, k) in enumerate(zip(a, net.cardinalities)):
        if not 0 <= x < k:
            raise NetworkError(f"outcome {x} out of range for variable {net[i].name!r} (k={k})")


def state_log_prob(net: Network, a: Sequence[int]) -> float:
    """Natural log of the probability of a full assignment; ``-inf`` if any factor is 0."""
    _check_assignment(net, a)
    acc = 0.0
    for i, table in enumerate(net.log_cpts):
        acc += float(table[a[i], net.parent_config(i, a)])
    return acc


def state_prob(net: Network, a: Sequence[int]) -> float:
    """Probability of a full assignment as the plain product of its CPT entries."""
    _check_assignment(net, a)
    return math.prod(
        float(v.cpt[a[i], net.parent_config(i, a)]) for i, v in enumerate(net.variables)
    )


def index_to_assignment(net: Network, idx: int) -> Assignment:
    idx = int(idx)
    if not 0 <= idx < net.state_count:
        raise NetworkError(f"state index {idx} out of range [0, {net.state_count})")
    out = []
    for k in reversed(net.cardinalities):
        idx, d = divmod(idx, k)
        out.append(d)
    return tuple(reversed(out))


def assignment_to_index(net: Network, a: Sequence[int]) -> int:
    _check_assignment(net, a)
    idx = 0
    for x, k in zip(a, net.cardinalities):
        idx = idx * k + int(x)
    return idx


def assignment_labels(net: Network, a: Sequence[int]) -> tuple[str, ...]:
    return tuple(v.outcomes[x] for v, x in zip(net.variables, a))
