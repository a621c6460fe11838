"""Seeded generators for the experimental model families.

``identical``
    every CPT column is a random permutation of one fixed probability vector.
``identically_distributed``
    each column is drawn afresh: entry ``j`` uniform on interval ``j``, the
    last entry taking the remainder.
``dirichlet_random``
    each column drawn from a symmetric Dirichlet; used mainly to widen the
    property-test corpus.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .network import Network, Variable

FAMILIES = ("identical", "identically_distributed", "dirichlet_random")


class GenSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    k: int = 2
    p: tuple[float, ...] | None = None
    intervals: tuple[tuple[float, float], ...] | None = None
    concentration: float = 1.0
    max_in_degree: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise GenSpecError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise GenSpecError("n must be at least 1")
        if self.k < 2:
            raise GenSpecError("k must be at least 2")
        if self.max_in_degree < 0:
            raise GenSpecError("max in-degree must be nonnegative")
        if self.family == "identical":
            if self.p is None or len(self.p) != self.k:
                raise GenSpecError(f"identical family needs a probability vector of length k={self.k}")
            if any(not 0.0 <= x <= 1.0 for x in self.p) or abs(math.fsum(self.p) - 1.0) > 1e-12:
                raise GenSpecError("probability vector must lie in [0, 1] and sum to 1")
            object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        elif self.family == "identically_distributed":
            if self.intervals is None or len(self.intervals) != self.k:
                raise GenSpecError(f"identically_distributed family needs k={self.k} intervals")
            ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
            for lo, hi in ivs:
                if not 0.0 <= lo <= hi <= 1.0:
                    raise GenSpecError(f"interval [{lo}, {hi}] is not inside [0, 1]")
            head = ivs[:-1]
            if math.fsum(lo for lo, _ in head) > 1.0 or math.fsum(hi for _, hi in head) < 0.0:
                raise GenSpecError("intervals cannot produce a normalized distribution")
            last_lo, last_hi = ivs[-1]
            if 1.0 - math.fsum(hi for _, hi in head) > last_hi or 1.0 - math.fsum(lo for lo, _ in head) < last_lo:
                raise GenSpecError("last interval is incompatible with the others")
            object.__setattr__(self, "intervals", ivs)
        elif not self.concentration > 0:
            raise GenSpecError("Dirichlet concentration must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["p"] is not None:
            d["p"] = list(d["p"])
        if d["intervals"] is not None:
            d["intervals"] = [list(iv) for iv in d["intervals"]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> GenSpec:
        d = dict(d)
        if d.get("p") is not None:
            d["p"] = tuple(d["p"])
        if d.get("intervals") is not None:
            d["intervals"] = tuple(tuple(iv) for iv in d["intervals"])
        return cls(**d)


def parse_gen_spec(text: str, *, seed: int | None = None) -> GenSpec:
    """Parse ``family:key=value,...`` such as ``identical:n=10,k=2,p=0.1,0.9``.

    List values continue over commas until the next ``key=``; intervals are
    written ``lo:hi`` (``intervals=0:0.1,0.9:1``).
    """
    family, _, rest = text.partition(":")
    fields: dict[str, list[str]] = {}
    key = None
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.strip()
            fields[key] = [val.strip()] if val.strip() else []
        elif key is None:
            raise GenSpecError(f"value {tok!r} has no key")
        else:
            fields[key].append(tok)
    kwargs: dict = {"family": family.strip()}
    try:
        for name, vals in fields.items():
            if name in ("n", "k", "max_in_degree", "seed", "in_degree"):
                kwargs["max_in_degree" if name == "in_degree" else name] = int(vals[0])
            elif name == "p":
                kwargs["p"] = tuple(float(v) for v in vals)
            elif name == "intervals":
                kwargs["intervals"] = tuple(tuple(float(x) for x in v.split(":")) for v in vals)
            elif name in ("concentration", "alpha"):
                kwargs["concentration"] = float(vals[0])
            else:
                raise GenSpecError(f"unknown generator field {name!r}")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GenSpecError):
            raise
        raise GenSpecError(f"malformed generator spec {text!r}: {exc}") from None
    if "k" not in kwargs:
        if "p" in kwargs:
            kwargs["k"] = len(kwargs["p"])
        elif "intervals" in kwargs:
            kwargs["k"] = len(kwargs["intervals"])
    if seed is not None and "seed" not in kwargs:
        kwargs["seed"] = seed
    if "n" not in kwargs:
        raise GenSpecError("generator spec needs n=")
    return GenSpec(**kwargs)


def _column(spec: GenSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "identical":
        return rng.permutation(np.array(spec.p))
    if spec.family == "dirichlet_random":
        return rng.dirichlet(np.full(spec.k, spec.concentration))
    ivs = spec.intervals
    for _ in range(10_000):
        head = np.array([rng.uniform(lo, hi) for lo, hi in ivs[:-1]])
        last = 1.0 - math.fsum(head.tolist())
        if 0.0 <= last <= 1.0:
            return np.append(head, last)
    raise GenSpecError("could not draw a normalized column from the intervals")


def generate(spec: GenSpec) -> Network:
    """Build the network described by ``spec``; identical seeds give identical networks."""
    rng = np.random.default_rng(spec.seed)
    variables: list[Variable] = []
    outcomes = tuple(f"s{j}" for j in range(spec.k))
    names = [f"X{i + 1}" for i in range(spec.n)]
    for i in range(spec.n):
        parents: list[str] = []
        if spec.max_in_degree and i:
            count = int(rng.integers(0, min(i, spec.max_in_degree) + 1))
            if count:
                picked = sorted(int(x) for x in rng.choice(i, size=count, replace=False))
                parents = [names[j] for j in picked]
        n_cfg = spec.k ** len(parents)
        cpt = np.column_stack([_column(spec, rng) for _ in range(n_cfg)])
        variables.append(Variable(names[i], outcomes, tuple(parents), cpt))
    return Network(tuple(variables), name=f"{spec.family}-n{spec.n}-k{spec.k}-seed{spec.seed}")


@dataclass(frozen=True)
class CorpusEntry:
    spec: GenSpec
    network: Network = field(repr=False)


def corpus(seed: int, count: int) -> list[CorpusEntry]:
    """Reproducible mixed corpus: n in [2, 12], k in [2, 4], in-degree in [0, 3]."""
    rng = np.random.default_rng(seed)
    out: list[CorpusEntry] = []
    for _ in range(count):
        family = FAMILIES[int(rng.integers(len(FAMILIES)))]
        n = int(rng.integers(2, 13))
        k = int(rng.integers(2, 5))
        degree = int(rng.integers(0, 4))
        sub_seed = int(rng.integers(2**31))
        kwargs: dict = {}
        if family == "identical":
            vec = rng.dirichlet(np.ones(k))
            vec = np.clip(vec, 1e-3, None)
            vec = vec / vec.sum()
            vec[-1] = 1.0 - math.fsum(vec[:-1].tolist())
            kwargs["p"] = tuple(float(x) for x in vec)
        elif family == "identically_distributed":
            width = 0.1 / (k - 1)
            lows = [float(rng.uniform(0.0, 0.8 / (k - 1) - width)) for _ in range(k - 1)]
            kwargs["intervals"] = tuple((lo, lo + width) for lo in lows) + ((0.0, 1.0),)
        else:
            kwargs["concentration"] = float(rng.uniform(0.5, 5.0))
        spec = GenSpec(family, n, k, max_in_degree=degree, seed=sub_seed, **kwargs)
        out.append(CorpusEntry(spec, generate(spec)))
    return out
