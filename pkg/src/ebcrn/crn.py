"""Data model for discrete chemical reaction networks.

Configurations and reaction multisets share one immutable count-vector
type, :class:`Configuration`.  Networks fix a species order and a reaction
order at construction; the stoichiometric matrix and every certificate
produced elsewhere in the package index by those orders.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional, Union


class NotApplicable(ValueError):
    """Raised when a reaction's reactants are not covered by a configuration."""


class Configuration(Mapping):
    """Immutable nonnegative integer count vector over species names.

    Species with a zero count are not stored, so ``config["Z"]`` is 0 for
    any unlisted species and ``"Z" in config`` means the count is positive.
    Equality and hashing use the canonical sorted ``(species, count)`` pairs.
    """

    __slots__ = ("_counts", "_key")

    def __init__(self, counts: Union[Mapping[str, int], Iterable[tuple[str, int]], None] = None, **kw: int):
        items: dict[str, int] = {}
        if counts is not None:
            pairs = counts.items() if isinstance(counts, Mapping) else counts
            for name, n in pairs:
                items[name] = items.get(name, 0) + n
        for name, n in kw.items():
            items[name] = items.get(name, 0) + n
        for name, n in items.items():
            if not isinstance(n, int) or isinstance(n, bool):
                raise TypeError(f"count of {name!r} must be an int, got {n!r}")
            if n < 0:
                raise ValueError(f"negative count {n} for species {name!r}")
        self._counts = {k: v for k, v in items.items() if v}
        self._key = tuple(sorted(self._counts.items()))

    @classmethod
    def of(cls, *species: str) -> "Configuration":
        """Multiset with one copy per listed name, e.g. ``of("X", "X", "L")``."""
        return cls((s, 1) for s in species)

    def __getitem__(self, species: str) -> int:
        return self._counts.get(species, 0)

    def __contains__(self, species: object) -> bool:
        return species in self._counts

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._key == other._key
        if isinstance(other, Mapping):
            return self == Configuration(other)
        return NotImplemented

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{k}:{v}" for k, v in self._key) + "}"

    def __add__(self, other: Mapping[str, int]) -> "Configuration":
        out = dict(self._counts)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return Configuration(out)

    def __sub__(self, other: Mapping[str, int]) -> "Configuration":
        out = dict(self._counts)
        for k, v in other.items():
            out[k] = out.get(k, 0) - v
        return Configuration(out)

    def __le__(self, other: Mapping[str, int]) -> bool:
        return all(other.get(k, 0) >= v for k, v in self._counts.items())

    def __ge__(self, other: Mapping[str, int]) -> bool:
        return Configuration(other) <= self

    def __mul__(self, k: int) -> "Configuration":
        return Configuration({s: n * k for s, n in self._counts.items()})

    __rmul__ = __mul__

    def size(self) -> int:
        """Total molecular count."""
        return sum(self._counts.values())

    def items_sorted(self) -> tuple[tuple[str, int], ...]:
        return self._key

    def restrict(self, species: Iterable[str]) -> "Configuration":
        keep = set(species)
        return Configuration({k: v for k, v in self._counts.items() if k in keep})

    def rename(self, mapping) -> "Configuration":
        """Apply ``mapping`` (a callable or dict) to every species name."""
        fn = mapping if callable(mapping) else (lambda s: mapping.get(s, s))
        return Configuration((fn(k), v) for k, v in self._counts.items())


EMPTY = Configuration()


def _as_config(x) -> Configuration:
    return x if isinstance(x, Configuration) else Configuration(x)


@dataclass(frozen=True)
class Reaction:
    reactants: Configuration
    products: Configuration

    def __post_init__(self):
        object.__setattr__(self, "reactants", _as_config(self.reactants))
        object.__setattr__(self, "products", _as_config(self.products))
        if self.reactants == self.products:
            raise ValueError(f"no-op reaction {self}")

    @property
    def species(self) -> list[str]:
        seen = dict.fromkeys(self.reactants)
        seen.update(dict.fromkeys(self.products))
        return list(seen)

    @property
    def order(self) -> int:
        return self.reactants.size()

    def net(self, species: str) -> int:
        return self.products[species] - self.reactants[species]

    def rename(self, mapping) -> "Reaction":
        return Reaction(self.reactants.rename(mapping), self.products.rename(mapping))

    def __str__(self) -> str:
        return f"{format_multiset(self.reactants)} -> {format_multiset(self.products)}"


def format_multiset(m: Configuration, order: Optional[Sequence[str]] = None) -> str:
    if not m:
        return "0"
    names = [s for s in order if s in m] if order is not None else list(m)
    return " + ".join(s if m[s] == 1 else f"{m[s]} {s}" for s in names)


@dataclass(frozen=True)
class Crn:
    """Species and reactions, both in a fixed declaration order."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if len(set(self.species)) != len(self.species):
            dup = sorted({s for s in self.species if self.species.count(s) > 1})
            raise ValueError(f"duplicate species: {dup}")
        if any(not s for s in self.species):
            raise ValueError("empty species name")
        known = set(self.species)
        for rxn in self.reactions:
            missing = [s for s in rxn.species if s not in known]
            if missing:
                raise ValueError(f"reaction {rxn} uses undeclared species {missing}")

    @classmethod
    def from_reactions(cls, reactions: Iterable[Reaction], species: Iterable[str] = ()) -> "Crn":
        """Build a CRN; species order is ``species`` then first appearance."""
        reactions = tuple(reactions)
        order = dict.fromkeys(species)
        for rxn in reactions:
            order.update(dict.fromkeys(rxn.reactants))
            order.update(dict.fromkeys(rxn.products))
        return cls(tuple(order), reactions)

    @property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.species)}

    def vector(self, config: Mapping[str, int]) -> tuple[int, ...]:
        extra = set(config) - set(self.species)
        if extra:
            raise ValueError(f"species {sorted(extra)} not in CRN")
        return tuple(config.get(s, 0) for s in self.species)

    def config(self, vec: Sequence[int]) -> Configuration:
        return Configuration(zip(self.species, vec))


@dataclass(frozen=True)
class Crd:
    """Chemical reaction decider: a CRN with inputs, voters and a context."""

    crn: Crn
    inputs: tuple[str, ...]
    yes: frozenset[str]
    no: frozenset[str]
    context: Configuration = field(default=EMPTY)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "yes", frozenset(self.yes))
        object.__setattr__(self, "no", frozenset(self.no))
        object.__setattr__(self, "context", _as_config(self.context))
        _check_io(self.crn, self.inputs, self.context, self.yes | self.no)
        if self.yes & self.no:
            raise ValueError(f"species vote both yes and no: {sorted(self.yes & self.no)}")

    @property
    def voters(self) -> frozenset[str]:
        return self.yes | self.no

    def initial(self, x: Union[Mapping[str, int], Sequence[int]]) -> Configuration:
        return self.context + _input_config(self.inputs, x)


@dataclass(frozen=True)
class Crc:
    """Chemical reaction computer.

    ``output_minus`` is set for diff-representation computers, whose result
    is ``#output - #output_minus``.
    """

    crn: Crn
    inputs: tuple[str, ...]
    output: str
    context: Configuration = field(default=EMPTY)
    output_minus: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "context", _as_config(self.context))
        outs = {self.output} | ({self.output_minus} if self.output_minus else set())
        _check_io(self.crn, self.inputs, self.context, outs)
        if outs & set(self.inputs):
            raise ValueError("output species may not be an input")

    def initial(self, x: Union[Mapping[str, int], Sequence[int]]) -> Configuration:
        return self.context + _input_config(self.inputs, x)

    def value(self, config: Mapping[str, int]) -> int:
        y = config.get(self.output, 0)
        if self.output_minus:
            y -= config.get(self.output_minus, 0)
        return y


def _check_io(crn: Crn, inputs, context: Configuration, special) -> None:
    known = set(crn.species)
    for group, names in (("input", inputs), ("context", context), ("voter/output", special)):
        missing = [s for s in names if s not in known]
        if missing:
            raise ValueError(f"{group} species {missing} not in CRN")
    if len(set(inputs)) != len(inputs):
        raise ValueError("duplicate input species")
    clash = set(inputs) & set(context)
    if clash:
        raise ValueError(f"context contains input species {sorted(clash)}")


def _input_config(inputs: Sequence[str], x) -> Configuration:
    if isinstance(x, Mapping):
        extra = set(x) - set(inputs)
        if extra:
            raise ValueError(f"non-input species in input: {sorted(extra)}")
        return Configuration(x)
    x = tuple(x)
    if len(x) != len(inputs):
        raise ValueError(f"expected {len(inputs)} input counts, got {len(x)}")
    return Configuration(zip(inputs, x))


# --- operations -------------------------------------------------------------

def applicable(config: Mapping[str, int], rxn: Reaction) -> bool:
    return all(config.get(s, 0) >= n for s, n in rxn.reactants.items())


def apply(config: Configuration, rxn: Reaction) -> Configuration:
    """Return ``config - reactants + products``."""
    if not applicable(config, rxn):
        raise NotApplicable(f"{rxn} not applicable at {config!r}")
    return Configuration(config) - rxn.reactants + rxn.products


def stoichiometric_matrix(crn: Crn) -> list[list[int]]:
    """Species x reactions matrix of net production, as nested lists."""
    return [[rxn.net(s) for rxn in crn.reactions] for s in crn.species]


def displacement(crn: Crn, u: Sequence[int]) -> tuple[int, ...]:
    """Net species change ``M u`` of running reaction j ``u[j]`` times."""
    if len(u) != len(crn.reactions):
        raise ValueError(f"expected {len(crn.reactions)} reaction counts, got {len(u)}")
    if any(k < 0 for k in u):
        raise ValueError("reaction counts must be nonnegative")
    m = stoichiometric_matrix(crn)
    return tuple(sum(a * k for a, k in zip(row, u)) for row in m)


def global_output(crd: Crd, config: Mapping[str, int]) -> Optional[int]:
    """Unanimous vote of the present voters, or None when undefined."""
    yes = any(config.get(s, 0) > 0 for s in crd.yes)
    no = any(config.get(s, 0) > 0 for s in crd.no)
    if yes == no:
        # mixed votes, no voter at all, or the zero configuration
        return None
    return 1 if yes else 0


def is_terminal(crn: Crn, config: Mapping[str, int]) -> bool:
    return not any(applicable(config, rxn) for rxn in crn.reactions)
