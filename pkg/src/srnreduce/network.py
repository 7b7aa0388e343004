"""Reaction networks, kinetics and structural predicates.

States and complexes are plain tuples of non-negative integers indexed by
the network's species order. Networks are immutable; helpers that "change"
a network return a new one.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._simplex import feasible_point
from .errors import StructureError

State = tuple


# ---------------------------------------------------------------------------
# rate laws


def falling_factorial_product(x, y):
    """Return prod_i x_i! / (x_i - y_i)!, or 0 when x is not >= y."""
    out = 1
    for xi, yi in zip(x, y):
        if yi == 0:
            continue
        if xi < yi:
            return 0
        for j in range(yi):
            out *= xi - j
    return out


@dataclass(frozen=True)
class MassAction:
    """Stochastic mass-action kinetics ``k * x!/(x-y)!``."""

    k: float
    symbol: str | None = None

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"mass-action rate constant must be positive, got {self.k!r}")

    def rate(self, x, reactant, t=None):
        return self.k * falling_factorial_product(x, reactant)

    def describe(self):
        return {"type": "mass_action", "k": self.k, "symbol": self.symbol}


@dataclass(frozen=True)
class Tabulated:
    """Rates looked up from a table (state tuple -> rate) or computed by a callable.

    States missing from a table get ``default``.
    """

    table: Mapping | Callable
    default: float = 0.0

    def rate(self, x, reactant, t=None):
        if callable(self.table):
            return float(self.table(tuple(x)))
        return float(self.table.get(tuple(x), self.default))

    def describe(self):
        if callable(self.table):
            return {"type": "tabulated", "table": None, "default": self.default}
        return {
            "type": "tabulated",
            "table": [[list(k), v] for k, v in sorted(self.table.items())],
            "default": self.default,
        }


@dataclass(frozen=True)
class TimeModulated:
    """A base law multiplied by a positive C^1 modulator of time.

    ``derivative_lipschitz`` is the declared Lipschitz constant of the
    modulator's derivative on the horizon of interest.
    """

    base: object
    modulator: Callable[[float], float]
    derivative_lipschitz: float = 0.0
    name: str = ""

    def rate(self, x, reactant, t=None):
        if t is None:
            raise ValueError("time-modulated rate law needs a time argument")
        return self.modulator(t) * self.base.rate(x, reactant)

    def describe(self):
        return {
            "type": "time_modulated",
            "base": self.base.describe(),
            "modulator": self.name or getattr(self.modulator, "__name__", "f"),
            "derivative_lipschitz": self.derivative_lipschitz,
        }


@dataclass(frozen=True)
class Scaled:
    """Any law multiplied by a constant factor (used for the 1/eps fast scaling)."""

    base: object
    factor: float

    def rate(self, x, reactant, t=None):
        return self.factor * self.base.rate(x, reactant, t)

    def describe(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.describe()}


def is_time_dependent(law) -> bool:
    if isinstance(law, TimeModulated):
        return True
    if isinstance(law, Scaled):
        return is_time_dependent(law.base)
    return False


# ---------------------------------------------------------------------------
# network


@dataclass(frozen=True)
class Reaction:
    id: int
    reactant: tuple
    product: tuple
    law: object
    label: str | None = None

    @property
    def trivial(self) -> bool:
        return self.reactant == self.product

    @cached_property
    def xi(self) -> tuple:
        return tuple(b - a for a, b in zip(self.reactant, self.product))

    def intensity(self, x, t=None) -> float:
        return self.law.rate(x, self.reactant, t)


def mass_action_intensity(r: Reaction, x) -> float:
    """Mass-action intensity of ``r`` at ``x``; the rate constant comes from ``r.law``."""
    k = r.law.k
    return k * falling_factorial_product(x, r.reactant)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple
    reactions: tuple
    fast: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(set(self.species)) != len(self.species):
            raise ValueError("species names must be unique")
        ids = [r.id for r in self.reactions]
        if len(set(ids)) != len(ids):
            raise ValueError("reaction ids must be unique")
        unknown = set(self.fast) - set(ids)
        if unknown:
            raise ValueError(f"fast set refers to unknown reactions {sorted(unknown)}")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @cached_property
    def _index(self):
        return {s: i for i, s in enumerate(self.species)}

    @cached_property
    def _by_id(self):
        return {r.id: r for r in self.reactions}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown species {name!r}") from None

    def reaction(self, rid: int) -> Reaction:
        return self._by_id[rid]

    @property
    def reaction_ids(self) -> tuple:
        return tuple(r.id for r in self.reactions)

    def vector(self, counts: Mapping[str, int]) -> tuple:
        x = [0] * self.n_species
        for name, v in counts.items():
            x[self.index(name)] = int(v)
        return tuple(x)

    def labeled(self, x) -> dict:
        return {s: int(v) for s, v in zip(self.species, x)}

    def complex_str(self, y) -> str:
        terms = []
        for s, c in zip(self.species, y):
            if c == 1:
                terms.append(s)
            elif c > 1:
                terms.append(f"{c}{s}")
        return " + ".join(terms) if terms else "0"

    def reaction_str(self, r: Reaction) -> str:
        return f"{self.complex_str(r.reactant)} -> {self.complex_str(r.product)}"

    def intensity(self, rid: int, x, t=None) -> float:
        return self._by_id[rid].intensity(x, t)

    @cached_property
    def time_dependent(self) -> bool:
        return any(is_time_dependent(r.law) for r in self.reactions)

    def with_fast(self, fast: Iterable[int]) -> "ReactionNetwork":
        return replace(self, fast=frozenset(fast))

    def subnetwork(self, ids: Iterable[int]) -> "ReactionNetwork":
        keep = set(ids)
        return ReactionNetwork(
            self.species,
            tuple(r for r in self.reactions if r.id in keep),
            frozenset(self.fast & keep),
        )

    def with_rates(self, values: Mapping[str, float]) -> "ReactionNetwork":
        """Rebind mass-action constants by symbol name (or ``"#<id>"``)."""
        out = []
        for r in self.reactions:
            law = r.law
            if isinstance(law, MassAction):
                key = law.symbol if law.symbol in values else f"#{r.id}"
                if key in values:
                    law = MassAction(float(values[key]), law.symbol)
            out.append(replace(r, law=law))
        return replace(self, reactions=tuple(out))

    def with_fast_scaled(self, eps: float) -> "ReactionNetwork":
        """Return the network with every fast reaction's intensity divided by ``eps``."""
        out = []
        for r in self.reactions:
            if r.id in self.fast:
                law = r.law
                if isinstance(law, MassAction):
                    law = MassAction(law.k / eps, law.symbol)
                else:
                    law = Scaled(law, 1.0 / eps)
                r = replace(r, law=law)
            out.append(r)
        return replace(self, reactions=tuple(out))

    @property
    def rate_symbols(self) -> dict:
        out = {}
        for r in self.reactions:
            if isinstance(r.law, MassAction) and r.law.symbol:
                out.setdefault(r.law.symbol, r.law.k)
        return out


# ---------------------------------------------------------------------------
# compatibility between kinetics and stoichiometry


@dataclass
class CompatibilityEntry:
    reaction: int
    ok: bool
    witness: tuple | None = None
    problem: str = ""


@dataclass
class CompatibilityReport:
    entries: list

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)


def validate_compatibility(net: ReactionNetwork, domain: Iterable, t=None) -> CompatibilityReport:
    """Check that each intensity is positive exactly on states covering the reactant."""
    domain = [tuple(x) for x in domain]
    entries = []
    for r in net.reactions:
        entry = CompatibilityEntry(r.id, True)
        for x in domain:
            covered = all(a >= b for a, b in zip(x, r.reactant))
            lam = r.intensity(x, t)
            if covered and not lam > 0:
                entry = CompatibilityEntry(r.id, False, x, "zero intensity on a covering state")
                break
            if not covered and lam != 0:
                entry = CompatibilityEntry(r.id, False, x, "positive intensity without reactant")
                break
        entries.append(entry)
    return CompatibilityReport(entries)


# ---------------------------------------------------------------------------
# conservation


@dataclass
class ConservationClass:
    kind: str  # "conservative" | "sub-conservative" | "neither"
    witness: tuple | None = None
    certificate: dict | None = None

    @property
    def sub_conservative(self) -> bool:
        return self.kind in ("conservative", "sub-conservative")


def _positive_vector(xis, n, equality):
    # c = 1 + d with d >= 0; one row per reaction vector
    A, b = [], []
    m = len(xis)
    for k, xi in enumerate(xis):
        row = [Fraction(v) for v in xi]
        if not equality:
            row += [Fraction(1 if j == k else 0) for j in range(m)]
        A.append(row)
        b.append(Fraction(-sum(xi)))
    x, y = feasible_point(A, b)
    if x is None:
        return None, y
    return tuple(Fraction(1) + x[i] for i in range(n)), None


def conservation_class(net: ReactionNetwork) -> ConservationClass:
    """Classify the network as conservative, sub-conservative or neither.

    Witness vectors are strictly positive rationals found by an exact
    simplex; ``neither`` carries the Farkas ray of the sub-conservative
    system.
    """
    n = net.n_species
    xis = sorted({r.xi for r in net.reactions if any(r.xi)})
    if not xis:
        return ConservationClass("conservative", tuple(Fraction(1) for _ in range(n)))
    c, _ = _positive_vector(xis, n, equality=True)
    if c is not None:
        return ConservationClass("conservative", c)
    c, ray = _positive_vector(xis, n, equality=False)
    if c is not None:
        return ConservationClass("sub-conservative", c)
    return ConservationClass(
        "neither",
        None,
        {"reaction_vectors": [list(x) for x in xis], "farkas_ray": [str(v) for v in ray]},
    )


# ---------------------------------------------------------------------------
# complex graph and weak reversibility


def complex_digraph(net: ReactionNetwork, reactions: Iterable[int] | None = None):
    """Return ``(complexes, edges)`` with edges as ``(i, j, reaction_id)`` over complex indices."""
    ids = net.reaction_ids if reactions is None else tuple(reactions)
    complexes, index, edges = [], {}, []
    for rid in ids:
        r = net.reaction(rid)
        for y in (r.reactant, r.product):
            if y not in index:
                index[y] = len(complexes)
                complexes.append(y)
        edges.append((index[r.reactant], index[r.product], rid))
    return complexes, edges


def is_weakly_reversible(net: ReactionNetwork, reactions: Iterable[int] | None = None) -> bool:
    complexes, edges = complex_digraph(net, reactions)
    if not edges:
        return True
    k = len(complexes)
    rows = [i for i, _, _ in edges]
    cols = [j for _, j, _ in edges]
    g = csr_matrix((np.ones(len(edges)), (rows, cols)), shape=(k, k))
    _, labels = connected_components(g, directed=True, connection="strong")
    return all(labels[i] == labels[j] for i, j, _ in edges)


# ---------------------------------------------------------------------------
# reactions grouped by their use of a species subset


def species_indices(net: ReactionNetwork, names: Iterable[str]) -> tuple:
    return tuple(sorted(net.index(s) for s in names))


def consuming(net: ReactionNetwork, U: Sequence[str]) -> frozenset:
    """Ids of reactions with a non-interacting species in the reactant."""
    ui = species_indices(net, U)
    return frozenset(r.id for r in net.reactions if any(r.reactant[i] for i in ui))


def creating(net: ReactionNetwork, U: Sequence[str]) -> frozenset:
    """Ids of reactions with a non-interacting species in the product."""
    ui = species_indices(net, U)
    return frozenset(r.id for r in net.reactions if any(r.product[i] for i in ui))


def require_subset(F, allowed, what="fast set"):
    extra = set(F) - set(allowed)
    if extra:
        raise StructureError(
            f"{what} contains reactions {sorted(extra)} that do not consume a non-interacting species",
            {"offending": sorted(extra)},
        )

