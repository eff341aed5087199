"""Compile semilinear predicates and piecewise-affine functions into CRDs/CRCs.

Every construction is execution bounded from its valid initial
configurations (one leader in the context).  Composite networks nest their
parts under dotted prefixes, so ``L.R.X`` is input ``X`` of the right
operand of the left operand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .crn import Configuration, Crc, Crd, Crn, Reaction, global_output
from .semilinear import (AffinePiece, And, Expr, ModAtom, Not, Or, PiecewiseFn,
                         Predicate, ThresholdAtom, check_disjoint, variables_of)


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledCrd:
    crd: Crd
    voter_kind: str = "single"  # "single" | "all"
    namespace: str = ""


@dataclass(frozen=True)
class CompiledCrc:
    crc: Crc
    mode: str = "diff"  # "diff" | "single"
    namespace: str = ""


def _rxn(reactants: Sequence[tuple[str, int]], products: Sequence[tuple[str, int]] = ()) -> Reaction:
    return Reaction(Configuration(reactants), Configuration(products))


def prefix_crd(crd: Crd, prefix: str) -> Crd:
    f = lambda s: prefix + s  # noqa: E731
    crn = Crn(tuple(map(f, crd.crn.species)), tuple(r.rename(f) for r in crd.crn.reactions))
    return Crd(crn, tuple(map(f, crd.inputs)), set(map(f, crd.yes)), set(map(f, crd.no)),
               crd.context.rename(f))


def prefix_crc(crc: Crc, prefix: str) -> Crc:
    f = lambda s: prefix + s  # noqa: E731
    crn = Crn(tuple(map(f, crc.crn.species)), tuple(r.rename(f) for r in crc.crn.reactions))
    return Crc(crn, tuple(map(f, crc.inputs)), f(crc.output), crc.context.rename(f),
               f(crc.output_minus) if crc.output_minus else None)


def _vars(atom, variables) -> tuple[str, ...]:
    names = tuple(variables) if variables is not None else atom.variables
    missing = set(atom.variables) - set(names)
    if missing:
        raise CompileError(f"atom uses undeclared variables {sorted(missing)}")
    return names


def compile_mod(atom: ModAtom, variables: Optional[Sequence[str]] = None) -> CompiledCrd:
    """Leader ``L_j`` tracks the weighted input sum modulo ``m``."""
    xs = _vars(atom, variables)
    m = atom.modulus
    w = dict(atom.weights)
    leaders = [f"L_{j}" for j in range(m)]
    rxns = []
    for x in xs:
        k = w.get(x, 0) % m
        if k == 0:
            rxns.append(_rxn([(x, 1)]))
            continue
        for j in range(m):
            rxns.append(_rxn([(x, 1), (leaders[j], 1)], [(leaders[(j + k) % m], 1)]))
    crn = Crn.from_reactions(rxns, xs + tuple(leaders))
    yes = {leaders[atom.residue]}
    crd = Crd(crn, xs, yes, set(leaders) - yes, Configuration({"L_0": 1}))
    return CompiledCrd(crd)


def compile_threshold(atom: ThresholdAtom, variables: Optional[Sequence[str]] = None) -> CompiledCrd:
    """Decide ``sum w_i x_i >= t`` by cancelling positive and negative units.

    The leader flips ``L_Y -> L_N`` on each negative unit and back on each
    positive unit, so it ends as ``L_Y`` iff ``#P >= #N``.  The threshold is
    therefore seeded as ``t`` copies of ``N`` (or ``-t`` copies of ``P``).
    """
    xs = _vars(atom, variables)
    weights, t = atom.ge_form()
    w = dict(weights)
    rxns = []
    for x in xs:
        k = w.get(x, 0)
        if k > 0:
            rxns.append(_rxn([(x, 1)], [("P", k)]))
        elif k < 0:
            rxns.append(_rxn([(x, 1)], [("N", -k)]))
        else:
            rxns.append(_rxn([(x, 1)]))
    rxns.append(_rxn([("L_Y", 1), ("N", 1)], [("L_N", 1)]))
    rxns.append(_rxn([("L_N", 1), ("P", 1)], [("L_Y", 1)]))
    crn = Crn.from_reactions(rxns, xs + ("P", "N", "L_Y", "L_N"))
    context = {"L_Y": 1}
    if t > 0:
        context["N"] = t
    elif t < 0:
        context["P"] = -t
    return CompiledCrd(Crd(crn, xs, {"L_Y"}, {"L_N"}, Configuration(context)))


def initial_vote(crd: Crd) -> int:
    vote = global_output(crd, crd.context)
    if vote is None:
        raise CompileError("context must hold exactly one voter")
    return vote


def _combine(left: Crd, right: Crd, xs: tuple[str, ...], disjunction: bool) -> Crd:
    left, right = prefix_crd(left, "L."), prefix_crd(right, "R.")
    rec = {(a, b): f"V_{a}{b}" for a in "NY" for b in "NY"}
    flip = {"Y": "N", "N": "Y"}
    rxns = [_rxn([(x, 1)], [("L." + x, 1), ("R." + x, 1)]) for x in xs]
    rxns += left.crn.reactions + right.crn.reactions
    for side, sub in ((0, left), (1, right)):
        for vote, voters in (("Y", sub.yes), ("N", sub.no)):
            for s in sorted(voters, key=sub.crn.species.index):
                for other in "NY":
                    old = (flip[vote], other) if side == 0 else (other, flip[vote])
                    new = (vote, other) if side == 0 else (other, vote)
                    rxns.append(_rxn([(s, 1), (rec[old], 1)], [(s, 1), (rec[new], 1)]))
    start = ("NY"[initial_vote(left)], "NY"[initial_vote(right)])
    yes_keys = [("N", "Y"), ("Y", "N"), ("Y", "Y")] if disjunction else [("Y", "Y")]
    yes = {rec[k] for k in yes_keys}
    species = xs + left.crn.species + right.crn.species + tuple(rec.values())
    try:
        crn = Crn(species, tuple(rxns))
    except ValueError as e:
        raise CompileError(f"name clash while composing: {e}") from None
    context = left.context + right.context + {rec[start]: 1}
    return Crd(crn, xs, yes, set(rec.values()) - yes, context)


def _compile_expr(expr: Expr, xs: tuple[str, ...]) -> Crd:
    if isinstance(expr, ModAtom):
        return compile_mod(expr, xs).crd
    if isinstance(expr, ThresholdAtom):
        return compile_threshold(expr, xs).crd
    if isinstance(expr, Not):
        sub = _compile_expr(expr.arg, xs)
        return Crd(sub.crn, sub.inputs, sub.no, sub.yes, sub.context)
    if isinstance(expr, (And, Or)):
        return _combine(_compile_expr(expr.left, xs), _compile_expr(expr.right, xs), xs,
                        isinstance(expr, Or))
    raise CompileError(f"cannot compile {expr!r}")


def compile_predicate(pred: Union[Predicate, Expr]) -> CompiledCrd:
    """Single-voting CRD deciding ``pred`` over its declared variables."""
    if not isinstance(pred, Predicate):
        pred = Predicate(variables_of(pred), pred)
    return CompiledCrd(_compile_expr(pred.expr, pred.variables))


def vote_copy(species: str, vote: int) -> str:
    return f"{species}^{vote}"


def make_all_voting(c: CompiledCrd) -> CompiledCrd:
    """Give every species a vote that the single voter keeps in sync with its own.

    Voters keep their names; every other species ``S`` becomes ``S^0`` and
    ``S^1``.  A reaction whose reactant votes agree passes that vote to its
    products, otherwise the products vote 0.
    """
    if c.voter_kind != "single":
        raise CompileError("make_all_voting needs a single-voting CRD")
    crd = c.crd
    voters = crd.voters
    vote_of = {v: int(v in crd.yes) for v in voters}
    start = initial_vote(crd)

    def tag(name: str, vote: int) -> str:
        return name if name in voters else vote_copy(name, vote)

    species = []
    for s in crd.crn.species:
        species.extend([s] if s in voters else [vote_copy(s, 0), vote_copy(s, 1)])
    plain = [s for s in crd.crn.species if s not in voters]

    rxns = []
    for v in sorted(voters, key=crd.crn.species.index):
        b = vote_of[v]
        for s in plain:
            rxns.append(_rxn([(v, 1), (vote_copy(s, 1 - b), 1)], [(v, 1), (vote_copy(s, b), 1)]))
    for rxn in crd.crn.reactions:
        fixed = [(s, n) for s, n in rxn.reactants.items() if s in voters]
        split = [(s, n) for s, n in rxn.reactants.items() if s not in voters]
        # every way of drawing each non-voter reactant's molecules from its two vote copies
        choices = [[(s, n - k, k) for k in range(n + 1)] for s, n in split]
        for combo in itertools.product(*choices):
            reactants = list(fixed)
            votes = {vote_of[s] for s, _ in fixed}
            for s, n0, n1 in combo:
                if n0:
                    reactants.append((vote_copy(s, 0), n0))
                    votes.add(0)
                if n1:
                    reactants.append((vote_copy(s, 1), n1))
                    votes.add(1)
            out_vote = votes.pop() if len(votes) == 1 else 0
            products = [(tag(s, out_vote), n) for s, n in rxn.products.items()]
            rxns.append(_rxn(reactants, products))

    yes = set(crd.yes) | {vote_copy(s, 1) for s in plain}
    no = set(crd.no) | {vote_copy(s, 0) for s in plain}
    context = crd.context.rename(lambda s: tag(s, start))
    inputs = tuple(tag(x, start) for x in crd.inputs)
    out = Crd(Crn(tuple(species), tuple(rxns)), inputs, yes, no, context)
    return CompiledCrd(out, "all", c.namespace)


# --- functions --------------------------------------------------------------

def _ladder(x: str, m: int) -> str:
    return x if m == 1 else f"{x}__{m}"


def compile_affine(piece: AffinePiece, variables: Optional[Sequence[str]] = None) -> CompiledCrc:
    """Diff-representation CRC with ``#Y^P - #Y^C`` equal to the piece's value."""
    xs = tuple(variables) if variables is not None else piece.variables
    d = piece.divisor_d
    rxns: list[Reaction] = []
    species: list[str] = list(xs)

    def unit(sign: str, k: int) -> list[tuple[str, int]]:
        return [(f"Y^{sign}" if d == 1 else f"D_1^{sign}", k)]

    used = set()
    for x in xs:
        c, n = piece.offset(x), piece.numerator(x)
        xp = f"{x}'"
        if c == 0:
            rxns.append(_rxn([(x, 1)], [(xp, 1)]))
        else:
            species.extend(_ladder(x, m) for m in range(2, c + 1))
            for m in range(1, c + 1):
                for p in range(m, c + 1):
                    lhs = [(_ladder(x, m), 1), (_ladder(x, p), 1)]
                    if m + p <= c:
                        rxns.append(_rxn(lhs, [(_ladder(x, m + p), 1)]))
                    else:
                        rxns.append(_rxn(lhs, [(_ladder(x, c), 1), (xp, m + p - c)]))
        species.append(xp)
        if n > 0:
            rxns.append(_rxn([(xp, 1)], unit("P", n)))
            used.add("P")
        elif n < 0:
            rxns.append(_rxn([(xp, 1)], unit("C", -n)))
            used.add("C")
        else:
            rxns.append(_rxn([(xp, 1)]))

    if d > 1:
        for sign in "PC":
            if sign not in used:
                continue
            species.extend(f"D_{k}^{sign}" for k in range(1, d))
            for m in range(1, d):
                for p in range(m, d):
                    lhs = [(f"D_{m}^{sign}", 1), (f"D_{p}^{sign}", 1)]
                    if m + p <= d - 1:
                        rxns.append(_rxn(lhs, [(f"D_{m + p}^{sign}", 1)]))
                    else:
                        rest = m + p - d
                        prods = [(f"Y^{sign}", 1)] + ([(f"D_{rest}^{sign}", 1)] if rest else [])
                        rxns.append(_rxn(lhs, prods))
    species += ["Y^P", "Y^C"]
    crn = Crn.from_reactions(rxns, species)
    ctx = Configuration({"Y^P": piece.offset_b})
    return CompiledCrc(Crc(crn, xs, "Y^P", ctx, "Y^C"), "diff")


def compile_function(f: PiecewiseFn, grid_bound: int = 8) -> CompiledCrc:
    """Single-output CRC whose terminal ``#Y`` is ``f(x)``.

    Each piece runs as a diff-representation CRC next to a CRD for its
    domain; the domain voter activates or deactivates the piece's outputs.
    """
    bad = check_disjoint(f, grid_bound)
    if bad:
        raise CompileError(f"pieces are not a disjoint cover at bound {grid_bound}: {bad[:5]}")
    xs = f.variables
    parts_f = [prefix_crc(compile_affine(p, xs).crc, f"F{i}.") for i, p in enumerate(f.pieces, 1)]
    parts_d = [prefix_crd(compile_predicate(f.domain_predicate(i - 1)).crd, f"D{i}.")
               for i in range(1, len(f.pieces) + 1)]

    fanout = []
    for x in xs:
        copies = []
        for fi, di in zip(parts_f, parts_d):
            copies += [(fi.inputs[xs.index(x)], 1), (di.inputs[xs.index(x)], 1)]
        fanout.append(_rxn([(x, 1)], copies))
    rxns = fanout
    species: list[str] = list(xs)
    context = Configuration()
    for i, (fi, di) in enumerate(zip(parts_f, parts_d), 1):
        rxns += fi.crn.reactions + di.crn.reactions
        species += fi.crn.species + di.crn.species
        context = context + fi.context + di.context
        hp, hc = fi.output, fi.output_minus
        yp, yc, mi = f"A{i}.Y^P", f"A{i}.Y^C", f"A{i}.M"
        species += [yp, yc, mi]
        for ly in sorted(di.yes, key=di.crn.species.index):
            rxns.append(_rxn([(ly, 1), (hp, 1)], [(ly, 1), (yp, 1), ("Y", 1)]))
            rxns.append(_rxn([(ly, 1), (hc, 1)], [(ly, 1), (yc, 1)]))
        for ln in sorted(di.no, key=di.crn.species.index):
            rxns.append(_rxn([(ln, 1), (yp, 1)], [(ln, 1), (mi, 1)]))
            rxns.append(_rxn([(ln, 1), (yc, 1)], [(ln, 1), (hc, 1)]))
        rxns.append(_rxn([(mi, 1), ("Y", 1)], [(hp, 1)]))
        rxns.append(_rxn([(yp, 1), (yc, 1)], [("K", 1)]))
    rxns.append(_rxn([("K", 1), ("Y", 1)]))
    species += ["K", "Y"]
    try:
        crn = Crn(tuple(species), tuple(rxns))
    except ValueError as e:
        raise CompileError(f"name clash while composing: {e}") from None
    return CompiledCrc(Crc(crn, xs, "Y", context), "single")
