"""Text formats: the line-oriented ``.crn`` document and s-expression specs.

A ``.crn`` document::

    # parity
    species: X, L_0, L_1
    input: X
    context: L_0
    yes: L_1
    no: L_0
    rxn: X + L_0 -> L_1
    rxn: X + L_1 -> L_0

``output: Y`` replaces the voter lines for a computer, and
``output: Y^P - Y^C`` declares a diff-representation computer.  ``0`` is the
empty side of a reaction; ``2 X`` (or ``2X``) is a coefficient.

A spec document is an optional ``vars:`` header followed by one
s-expression, either a predicate such as ``(and (mod ((1 X)) 1 2) (ge ((1 X)) 3))``
or a function ``(fn (piece DOMAIN b d NUMERATORS OFFSETS) ...)``.
"""

from __future__ import annotations

import re
from typing import Union

from .crn import Configuration, Crc, Crd, Crn, Reaction, format_multiset
from .semilinear import (AffinePiece, And, Expr, ModAtom, Not, Or, PiecewiseFn,
                         Predicate, ThresholdAtom, variables_of)

IDENT = r"[A-Za-z][A-Za-z0-9_'^.]*"
_IDENT_RE = re.compile(IDENT + r"\Z")
_TERM_RE = re.compile(r"\s*(?:(\d+)\s*)?(" + IDENT + r")\s*\Z")
DIRECTIVES = ("species", "input", "context", "yes", "no", "output", "rxn")


class CrnSyntaxError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"line {line}, col {col}: " if line else ""
        super().__init__(where + msg)


def _multiset(text: str, line: int, col: int) -> Configuration:
    text = text.strip()
    if text in ("0", "∅", ""):
        if not text:
            raise CrnSyntaxError("empty reaction side (write 0)", line, col)
        return Configuration()
    counts: dict[str, int] = {}
    offset = 0
    for term in text.split("+"):
        m = _TERM_RE.match(term)
        if not m:
            raise CrnSyntaxError(f"bad term {term.strip()!r}", line, col + offset)
        k = int(m.group(1)) if m.group(1) else 1
        if k == 0:
            raise CrnSyntaxError(f"zero coefficient in {term.strip()!r}", line, col + offset)
        counts[m.group(2)] = counts.get(m.group(2), 0) + k
        offset += len(term) + 1
    return Configuration(counts)


def parse_reaction(text: str, line: int = 0, col: int = 0) -> Reaction:
    if text.count("->") != 1:
        raise CrnSyntaxError("reaction needs exactly one '->'", line, col)
    lhs, rhs = text.split("->")
    r = _multiset(lhs, line, col)
    p = _multiset(rhs, line, col + len(lhs) + 2)
    if not r and not p:
        raise CrnSyntaxError("empty reaction 0 -> 0", line, col)
    if r == p:
        raise CrnSyntaxError(f"no-op reaction {text.strip()!r}", line, col)
    return Reaction(r, p)


def _names(text: str, line: int, col: int) -> list[str]:
    names = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    for n in names:
        if not _IDENT_RE.match(n):
            raise CrnSyntaxError(f"bad species name {n!r}", line, col)
    return names


def parse_crn(text: str) -> Union[Crd, Crc, Crn]:
    """Parse a ``.crn`` document into a CRD, a CRC, or a bare CRN."""
    species: list[str] = []
    reactions: list[Reaction] = []
    fields: dict[str, tuple] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if ":" not in body:
            raise CrnSyntaxError("expected 'directive: value'", lineno, 1)
        key, value = body.split(":", 1)
        key = key.strip()
        col = len(body) - len(body.lstrip()) + len(key) + 2
        if key not in DIRECTIVES:
            raise CrnSyntaxError(f"unknown directive {key!r}", lineno, 1)
        if key == "rxn":
            reactions.append(parse_reaction(value, lineno, col))
        elif key == "species":
            names = _names(value, lineno, col)
            dup = [n for n in names if n in species or names.count(n) > 1]
            if dup:
                raise CrnSyntaxError(f"duplicate species {dup[0]!r}", lineno, col)
            species.extend(names)
        elif key == "context":
            if key in fields:
                raise CrnSyntaxError("repeated context directive", lineno, 1)
            value = value.strip()
            parts = [] if value in ("", "0") else value.split(",")
            ctx = Configuration()
            for part in parts:
                ctx = ctx + _multiset(part, lineno, col)
            fields[key] = (ctx, lineno)
        elif key == "output":
            if key in fields:
                raise CrnSyntaxError("repeated output directive", lineno, 1)
            halves = [h.strip() for h in value.split(" - ")]
            if len(halves) > 2 or not all(_IDENT_RE.match(h) for h in halves):
                raise CrnSyntaxError(f"bad output {value.strip()!r}", lineno, col)
            fields[key] = (tuple(halves), lineno)
        else:
            if key in fields:
                raise CrnSyntaxError(f"repeated {key} directive", lineno, 1)
            names = _names(value, lineno, col)
            if len(set(names)) != len(names):
                raise CrnSyntaxError(f"duplicate name in {key}", lineno, col)
            fields[key] = (tuple(names), lineno)

    has_votes = "yes" in fields or "no" in fields
    if has_votes and "output" in fields:
        raise CrnSyntaxError("document declares both voters and an output", fields["output"][1], 1)

    mentioned = list(species)
    for key in ("input", "context"):
        if key in fields:
            mentioned.extend(fields[key][0])
    for key in ("yes", "no", "output"):
        if key in fields:
            mentioned.extend(fields[key][0])
    try:
        crn = Crn.from_reactions(reactions, mentioned)
        inputs = fields.get("input", ((), 0))[0]
        context = fields.get("context", (Configuration(), 0))[0]
        if has_votes:
            return Crd(crn, inputs, fields.get("yes", ((), 0))[0], fields.get("no", ((), 0))[0], context)
        if "output" in fields:
            out = fields["output"][0]
            return Crc(crn, inputs, out[0], context, out[1] if len(out) == 2 else None)
    except ValueError as e:
        if isinstance(e, CrnSyntaxError):
            raise
        raise CrnSyntaxError(str(e)) from None
    if inputs or context:
        raise CrnSyntaxError("input/context given without voters or output")
    return crn


def format_crn(obj: Union[Crd, Crc, Crn], title: str = "") -> str:
    """Inverse of :func:`parse_crn`."""
    crn = obj if isinstance(obj, Crn) else obj.crn
    order = crn.species
    lines = [f"# {title}"] if title else []
    lines.append("species: " + ", ".join(order))
    if not isinstance(obj, Crn):
        lines.append("input: " + ", ".join(obj.inputs))
        ctx = obj.context
        lines.append("context: " + (", ".join(
            s if ctx[s] == 1 else f"{ctx[s]} {s}" for s in order if s in ctx) or "0"))
    if isinstance(obj, Crd):
        lines.append("yes: " + ", ".join(s for s in order if s in obj.yes))
        lines.append("no: " + ", ".join(s for s in order if s in obj.no))
    elif isinstance(obj, Crc):
        out = obj.output + (f" - {obj.output_minus}" if obj.output_minus else "")
        lines.append("output: " + out)
    for rxn in crn.reactions:
        lines.append(f"rxn: {format_multiset(rxn.reactants, order)} -> {format_multiset(rxn.products, order)}")
    return "\n".join(lines) + "\n"


# --- s-expression specs ---------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise CrnSyntaxError(f"unexpected character at offset {pos}")
        pos = m.end()
        if m.group(1):
            yield "("
        elif m.group(2):
            yield ")"
        elif m.group(3):
            yield m.group(3)


def read_sexpr(text: str):
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise CrnSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(int(tok) if re.fullmatch(r"-?\d+", tok) else tok)
    if len(stack) != 1:
        raise CrnSyntaxError("unbalanced '('")
    if len(stack[0]) != 1:
        raise CrnSyntaxError(f"expected one expression, found {len(stack[0])}")
    return stack[0][0]


def _int(tok) -> int:
    if not isinstance(tok, int):
        raise CrnSyntaxError(f"expected integer, got {tok!r}")
    return tok


def _weight_list(node) -> tuple[tuple[str, int], ...]:
    if not isinstance(node, list):
        raise CrnSyntaxError(f"expected weight list, got {node!r}")
    out = []
    for pair in node:
        if not (isinstance(pair, list) and len(pair) == 2 and isinstance(pair[1], str)):
            raise CrnSyntaxError(f"expected (coefficient VAR), got {pair!r}")
        if not _IDENT_RE.match(pair[1]):
            raise CrnSyntaxError(f"bad variable name {pair[1]!r}")
        out.append((pair[1], _int(pair[0])))
    return tuple(out)


def _expr(node) -> Expr:
    if not (isinstance(node, list) and node and isinstance(node[0], str)):
        raise CrnSyntaxError(f"expected predicate form, got {node!r}")
    op, args = node[0], node[1:]

    def arity(k):
        if len(args) != k:
            raise CrnSyntaxError(f"({op} ...) takes {k} arguments, got {len(args)}")

    if op in ("ge", "le", "gt", "lt"):
        arity(2)
        w, t = _weight_list(args[0]), _int(args[1])
        if op == "gt":
            return ThresholdAtom(w, t + 1, "ge")
        if op == "lt":
            return ThresholdAtom(w, t - 1, "le")
        return ThresholdAtom(w, t, op)
    if op == "mod":
        arity(3)
        return ModAtom(_weight_list(args[0]), _int(args[1]), _int(args[2]))
    if op == "not":
        arity(1)
        return Not(_expr(args[0]))
    if op in ("and", "or"):
        if len(args) < 2:
            raise CrnSyntaxError(f"({op} ...) needs at least two arguments")
        cls = And if op == "and" else Or
        out = _expr(args[0])
        for a in args[1:]:
            out = cls(out, _expr(a))
        return out
    raise CrnSyntaxError(f"unknown predicate operator {op!r}")


def _piece(node) -> AffinePiece:
    if not (isinstance(node, list) and node and node[0] == "piece" and len(node) in (5, 6)):
        raise CrnSyntaxError(f"expected (piece DOMAIN b d NUMERATORS [OFFSETS]), got {node!r}")
    offsets = _weight_list(node[5]) if len(node) == 6 else ()
    return AffinePiece(_expr(node[1]), _int(node[2]), _int(node[3]), _weight_list(node[4]), offsets)


def parse_spec(text: str) -> Union[Predicate, PiecewiseFn]:
    declared = None
    body = []
    for raw in text.splitlines():
        line = raw.split(";", 1)[0].split("#", 1)[0]
        if line.strip().startswith("vars:"):
            declared = tuple(_names(line.split(":", 1)[1], 0, 0))
        else:
            body.append(line)
    node = read_sexpr("\n".join(body))
    if isinstance(node, list) and node and node[0] == "fn":
        pieces = tuple(_piece(p) for p in node[1:])
        if declared is None:
            names: dict[str, None] = {}
            for p in pieces:
                names.update(dict.fromkeys(p.variables))
            declared = tuple(names)
        return PiecewiseFn(declared, pieces)
    expr = _expr(node)
    return Predicate(declared if declared is not None else variables_of(expr), expr)


def format_expr(expr: Expr) -> str:
    def wl(w):
        return "(" + " ".join(f"({k} {v})" for v, k in w) + ")"

    if isinstance(expr, ThresholdAtom):
        return f"({expr.sense} {wl(expr.weights)} {expr.bound})"
    if isinstance(expr, ModAtom):
        return f"(mod {wl(expr.weights)} {expr.residue} {expr.modulus})"
    if isinstance(expr, Not):
        return f"(not {format_expr(expr.arg)})"
    op = "and" if isinstance(expr, And) else "or"
    return f"({op} {format_expr(expr.left)} {format_expr(expr.right)})"


def format_spec(spec: Union[Predicate, PiecewiseFn]) -> str:
    head = "vars: " + " ".join(spec.variables) + "\n"
    if isinstance(spec, Predicate):
        return head + format_expr(spec.expr) + "\n"

    def wl(w):
        return "(" + " ".join(f"({k} {v})" for v, k in w) + ")"

    pieces = [f"  (piece {format_expr(p.domain)} {p.offset_b} {p.divisor_d} "
              f"{wl(p.numerators)} {wl(p.offsets_c)})" for p in spec.pieces]
    return head + "(fn\n" + "\n".join(pieces) + ")\n"
