"""Entire execution boundedness via linear potential functions.

:func:`find_potential` returns exactly one of two certificates:

* ``Bounded``: integer weights ``v >= 0`` on species with every reaction
  lowering ``v.x`` by at least 1;
* ``Unbounded``: a nonzero reaction multiset ``u >= 0`` with ``M u >= 0``,
  i.e. a bundle of reactions that can be repeated forever from a large
  enough configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from . import lp
from .crn import Configuration, Crn, stoichiometric_matrix


class InvalidCertificate(ValueError):
    pass


@dataclass(frozen=True)
class PotentialFunction:
    weights: tuple[int, ...]  # indexed by crn.species

    def __call__(self, crn: Crn, config: Mapping[str, int]) -> int:
        return sum(w * n for w, n in zip(self.weights, crn.vector(config)))


@dataclass(frozen=True)
class FarkasWitness:
    multiplicities: tuple[int, ...]  # indexed by crn.reactions


@dataclass(frozen=True)
class Bounded:
    potential: PotentialFunction

    bounded = True


@dataclass(frozen=True)
class Unbounded:
    witness: FarkasWitness

    bounded = False


BoundednessCertificate = Union[Bounded, Unbounded]


def _integral(xs: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(x.denominator for x in xs)) if xs else 1
    ints = [int(x * den) for x in xs]
    g = math.gcd(*ints) if ints else 0
    return tuple(k // g for k in ints) if g > 1 else tuple(ints)


def potential_violations(crn: Crn, weights: Sequence[int]) -> list[int]:
    """Indices of reactions not lowering ``weights`` by at least 1."""
    if len(weights) != len(crn.species):
        raise ValueError(f"expected {len(crn.species)} weights, got {len(weights)}")
    m = stoichiometric_matrix(crn)
    bad = []
    for j in range(len(crn.reactions)):
        if sum(m[i][j] * weights[i] for i in range(len(weights))) > -1:
            bad.append(j)
    return bad


def is_potential(crn: Crn, weights: Sequence[int]) -> bool:
    return all(w >= 0 for w in weights) and not potential_violations(crn, weights)


def is_farkas_witness(crn: Crn, u: Sequence[int]) -> bool:
    if len(u) != len(crn.reactions) or any(k < 0 for k in u) or not any(u):
        return False
    m = stoichiometric_matrix(crn)
    return all(sum(a * k for a, k in zip(row, u)) >= 0 for row in m)


def validate(crn: Crn, cert: BoundednessCertificate) -> None:
    if isinstance(cert, Bounded):
        if not is_potential(crn, cert.potential.weights):
            raise InvalidCertificate(f"not a potential: {cert.potential.weights}")
    elif not is_farkas_witness(crn, cert.witness.multiplicities):
        raise InvalidCertificate(f"not a Farkas witness: {cert.witness.multiplicities}")


def find_potential(crn: Crn) -> BoundednessCertificate:
    """Decide entire execution boundedness with an exact LP.

    Feasibility of ``v >= 0, M^T v <= -1`` is solved as
    ``-M^T v - s = 1`` over ``v, s >= 0``, minimising ``sum(v)`` so the
    returned weights are small and canonical.
    """
    m = stoichiometric_matrix(crn)
    n_s, n_r = len(crn.species), len(crn.reactions)
    A = [[-m[i][j] for i in range(n_s)] + [-int(k == j) for k in range(n_r)] for j in range(n_r)]
    c = [1] * n_s + [0] * n_r
    res = lp.solve(A, [1] * n_r, c)
    if res.status == "optimal":
        cert: BoundednessCertificate = Bounded(PotentialFunction(_integral(res.x[:n_s])))
    elif res.status == "infeasible":
        cert = Unbounded(FarkasWitness(_integral(res.farkas)))
    else:  # pragma: no cover - the objective is bounded below by 0
        raise AssertionError("potential LP unbounded")
    validate(crn, cert)
    return cert


def execution_length_bound(crn: Crn, pot: PotentialFunction, x: Mapping[str, int]) -> int:
    """Upper bound ``v.x`` on the length of every execution from ``x``."""
    if not is_potential(crn, pot.weights):
        raise InvalidCertificate("potential does not validate for this CRN")
    return pot(crn, x)


def covering_start(crn: Crn, w: FarkasWitness) -> Configuration:
    """Configuration holding the reactants of every reaction in ``w``, once."""
    total = Configuration()
    for k, rxn in zip(w.multiplicities, crn.reactions):
        total = total + rxn.reactants * k
    return total


def format_certificate(crn: Crn, cert: BoundednessCertificate) -> str:
    if isinstance(cert, Bounded):
        lines = ["bounded"] + [f"{s}: {w}" for s, w in zip(crn.species, cert.potential.weights)]
    else:
        lines = ["unbounded"] + [f"{j}: {k}" for j, k in enumerate(cert.witness.multiplicities)]
    return "\n".join(lines) + "\n"


# --- feedforward orderings --------------------------------------------------

def reaction_feedforward_order(crn: Crn) -> Optional[list[int]]:
    """Order reactions so no reactant of an earlier one appears in a later one.

    Greedy: pick the lowest-index remaining reaction whose reactants appear in
    no other remaining reaction.  None if no such order exists.
    """
    remaining = list(range(len(crn.reactions)))
    order: list[int] = []
    while remaining:
        for j in remaining:
            reactants = set(crn.reactions[j].reactants)
            if not any(reactants & set(crn.reactions[k].species) for k in remaining if k != j):
                order.append(j)
                remaining.remove(j)
                break
        else:
            return None
    return order


def is_reaction_feedforward_order(crn: Crn, order: Sequence[int]) -> bool:
    if sorted(order) != list(range(len(crn.reactions))):
        return False
    rx = crn.reactions
    return all(not (set(rx[order[a]].reactants) & set(rx[order[b]].species))
               for a in range(len(order)) for b in range(a + 1, len(order)))


def _produces(rxn, s) -> bool:
    return rxn.net(s) > 0


def _consumes(rxn, s) -> bool:
    return rxn.net(s) < 0


def species_feedforward_order(crn: Crn) -> Optional[list[str]]:
    """Order species so every reaction producing one consumes an earlier one."""
    placed: list[str] = []
    remaining = list(crn.species)
    while remaining:
        for s in remaining:
            ok = all(any(_consumes(r, a) for a in placed)
                     for r in crn.reactions if _produces(r, s))
            if ok:
                placed.append(s)
                remaining.remove(s)
                break
        else:
            return None
    return placed


def is_species_feedforward_order(crn: Crn, order: Sequence[str]) -> bool:
    if sorted(order) != sorted(crn.species):
        return False
    pos = {s: i for i, s in enumerate(order)}
    return all(any(_consumes(r, a) and pos[a] < pos[s] for a in crn.species)
               for s in crn.species for r in crn.reactions if _produces(r, s))
