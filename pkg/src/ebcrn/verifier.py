"""Exhaustive reachability with self-covering detection, and stable-computation checks.

:func:`explore` runs a breadth-first search of ``reach(init)``.  A
successor that componentwise covers one of its tree ancestors yields a
self-covering witness on the spot; once the search closes, any cycle left
in the explored graph is reported the same way.  Together these detect
every CRN that is not execution bounded from ``init``, provided the limits
do not fire first.

Ancestor checks are pruned with a weak ranking ``r`` (``r.x`` never
increases along any reaction): a covering ancestor must have the same
rank as the covering configuration, and cycles can only use reactions that
leave the rank unchanged.

With ``reduce=True`` successors are restricted to a stubborn set (Valmari),
which keeps every reachable terminal configuration and the existence of
infinite executions while skipping interleavings of independent reactions.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .crn import Configuration, Crc, Crd, Crn, global_output, stoichiometric_matrix
from .semilinear import PiecewiseFn, Predicate, eval_function, eval_predicate

DEFAULT_MAX_CONFIGS = 2_000_000
DEFAULT_MAX_DEPTH = 100_000


@dataclass(frozen=True)
class Limits:
    max_configs: int = DEFAULT_MAX_CONFIGS
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        if self.max_configs <= 0 or self.max_depth <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class Witness:
    """Execution ``path`` (configurations) with ``path[i] <= path[j]``, ``i < j``."""

    path: tuple[Configuration, ...]
    reactions: tuple[int, ...]
    i: int
    j: int

    def validate(self, crn: Crn) -> bool:
        from .crn import apply  # local: avoids shadowing in this module

        if not (0 <= self.i < self.j < len(self.path)) or len(self.reactions) != len(self.path) - 1:
            return False
        c = self.path[0]
        for k, r in enumerate(self.reactions):
            try:
                c = apply(c, crn.reactions[r])
            except ValueError:
                return False
            if c != self.path[k + 1]:
                return False
        return self.path[self.i] <= self.path[self.j]


@dataclass
class ExploreReport:
    crn: Crn
    init: Configuration
    num_reached: int
    terminals: list[Configuration]
    self_covering: Optional[Witness] = None
    truncated: bool = False
    limit: Optional[str] = None
    invariant_violation: Optional[tuple[Configuration, ...]] = None
    reduced: bool = False
    _states: list = field(default_factory=list, repr=False)

    @property
    def bounded(self) -> Optional[bool]:
        """True/False when decided, None when truncated without a witness."""
        if self.self_covering is not None:
            return False
        return None if self.truncated else True

    @property
    def reached(self) -> set[Configuration]:
        return {self.crn.config(v) for v in self._states}

    def to_dict(self) -> dict:
        w = self.self_covering
        return {
            "init": _cfg(self.init),
            "reached": self.num_reached,
            "reduced": self.reduced,
            "terminals": [_cfg(t) for t in self.terminals],
            "truncated": self.truncated,
            "limit": self.limit,
            "self_covering": None if w is None else {
                "path": [_cfg(c) for c in w.path], "reactions": list(w.reactions), "i": w.i, "j": w.j},
        }


def _cfg(c: Configuration) -> dict:
    return dict(c.items_sorted())


class _Compiled:
    """Index-based view of a CRN for fast successor generation."""

    def __init__(self, crn: Crn):
        idx = crn.index
        n = len(crn.species)
        self.crn = crn
        self.need = [tuple((idx[s], k) for s, k in r.reactants.items()) for r in crn.reactions]
        self.delta = []
        for r in crn.reactions:
            d = [0] * n
            for s, k in r.reactants.items():
                d[idx[s]] -= k
            for s, k in r.products.items():
                d[idx[s]] += k
            self.delta.append(tuple((i, v) for i, v in enumerate(d) if v))
        by_reactant: list[set[int]] = [set() for _ in range(n)]
        producers: list[list[int]] = [[] for _ in range(n)]
        for j, r in enumerate(crn.reactions):
            for s in r.reactants:
                by_reactant[idx[s]].add(j)
            for i, v in self.delta[j]:
                if v > 0:
                    producers[i].append(j)
        self.conflicts = [sorted(set().union(*(by_reactant[i] for i, _ in need)) if need else set())
                          for need in self.need]
        self.producers = producers
        self.rank, self.rank_delta = _weak_ranking(crn)

    def enabled(self, x: tuple) -> list[int]:
        return [j for j, need in enumerate(self.need) if all(x[i] >= k for i, k in need)]

    def fire(self, x: tuple, j: int) -> tuple:
        y = list(x)
        for i, v in self.delta[j]:
            y[i] += v
        return tuple(y)

    def stubborn(self, x: tuple, enabled: list[int]) -> list[int]:
        if len(enabled) <= 1:
            return enabled
        en = set(enabled)
        best: Optional[list[int]] = None
        for t0 in enabled:
            seen = {t0}
            work = [t0]
            while work:
                t = work.pop()
                if t in en:
                    nxt = self.conflicts[t]
                else:
                    missing = next(i for i, k in self.need[t] if x[i] < k)
                    nxt = self.producers[missing]
                for u in nxt:
                    if u not in seen:
                        seen.add(u)
                        work.append(u)
                if best is not None and len(seen & en) >= len(best):
                    break
            chosen = sorted(seen & en)
            if best is None or len(chosen) < len(best):
                best = chosen
                if len(best) == 1:
                    break
        return best


def _weak_ranking(crn: Crn) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Integer ``r >= 0`` with ``r.(p - q) <= 0`` for every reaction, as strict as found.

    A floating LP proposes the weights; they are rounded and checked exactly,
    falling back to the zero ranking if the check fails.
    """
    n, m = len(crn.species), len(crn.reactions)
    zero = ((0,) * n, (0,) * m)
    if not n or not m:
        return zero
    mat = stoichiometric_matrix(crn)
    try:
        import numpy as np
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return zero
    M = np.array(mat, dtype=float)
    # maximise total decrease: min sum_j (M^T r)_j  s.t.  M^T r <= 0, 0 <= r <= 1
    res = linprog(M.sum(axis=1), A_ub=M.T, b_ub=np.zeros(m), bounds=[(0, 1)] * n, method="highs")
    if res.status != 0:
        return zero
    fr = [Fraction(float(v)).limit_denominator(1000) for v in res.x]
    den = math.lcm(*(f.denominator for f in fr))
    r = [max(0, int(f * den)) for f in fr]
    deltas = [sum(mat[i][j] * r[i] for i in range(n)) for j in range(m)]
    if any(d > 0 for d in deltas):
        return zero
    return tuple(r), tuple(deltas)


def explore(crn: Crn, init: Mapping[str, int], limits: Limits = Limits(), *,
            reduce: bool = False,
            invariant: Optional[Callable[[Configuration], bool]] = None,
            _compiled: Optional[_Compiled] = None) -> ExploreReport:
    """Breadth-first exploration of the configurations reachable from ``init``."""
    comp = _compiled or _Compiled(crn)
    init = Configuration(init)
    start = crn.vector(init)
    rank = comp.rank
    ids = {start: 0}
    states = [start]
    parent = [-1]
    via = [-1]
    depth = [0]
    phi = [sum(a * b for a, b in zip(rank, start))]
    flat_edges: list[tuple[int, int, int]] = []  # rank-preserving edges, for cycle search
    terminals: list[int] = []
    report = ExploreReport(crn, init, 0, [], reduced=reduce)

    def chain(k: int) -> list[int]:
        out = []
        while k >= 0:
            out.append(k)
            k = parent[k]
        return out[::-1]

    def path_of(nodes: list[int], extra: Sequence[tuple[int, tuple]] = ()) -> tuple[tuple, tuple]:
        cfgs = [crn.config(states[k]) for k in nodes]
        rx = [via[k] for k in nodes[1:]]
        for j, vec in extra:
            rx.append(j)
            cfgs.append(crn.config(vec))
        return tuple(cfgs), tuple(rx)

    if invariant is not None and not invariant(init):
        report.invariant_violation = (init,)

    queue = deque([0])
    while queue:
        k = queue.popleft()
        x = states[k]
        enabled = comp.enabled(x)
        if not enabled:
            terminals.append(k)
            continue
        succ = comp.stubborn(x, enabled) if reduce else enabled
        for j in succ:
            y = comp.fire(x, j)
            py = phi[k] + comp.rank_delta[j]
            # ancestors of y are chain(k); only equal-rank ones can be covered
            a = k
            while a >= 0 and phi[a] == py:
                anc = states[a]
                if all(p <= q for p, q in zip(anc, y)):
                    nodes = chain(a)
                    i = len(nodes) - 1
                    tail = chain(k)[len(nodes):]
                    cfgs, rx = path_of(nodes + tail, [(j, y)])
                    report.self_covering = Witness(cfgs, rx, i, len(cfgs) - 1)
                    break
                a = parent[a]
            if report.self_covering:
                break
            t = ids.get(y)
            if t is None:
                t = len(states)
                ids[y] = t
                states.append(y)
                parent.append(k)
                via.append(j)
                depth.append(depth[k] + 1)
                phi.append(py)
                if invariant is not None and report.invariant_violation is None:
                    cy = crn.config(y)
                    if not invariant(cy):
                        report.invariant_violation = path_of(chain(t))[0]
                if depth[t] > limits.max_depth:
                    report.truncated, report.limit = True, f"max_depth={limits.max_depth}"
                    break
                if len(states) > limits.max_configs:
                    report.truncated, report.limit = True, f"max_configs={limits.max_configs}"
                    break
                queue.append(t)
            if comp.rank_delta[j] == 0:
                flat_edges.append((k, j, t))
        if report.self_covering or report.truncated:
            break

    if report.self_covering is None and not report.truncated:
        cyc = _find_cycle(flat_edges)
        if cyc is not None:
            first = cyc[0][0]
            nodes = chain(first)
            cfgs, rx = path_of(nodes, [(j, states[t]) for _, j, t in cyc])
            report.self_covering = Witness(cfgs, rx, len(nodes) - 1, len(cfgs) - 1)

    report.num_reached = len(states)
    report.terminals = sorted((crn.config(states[t]) for t in terminals), key=crn.vector)
    report._states = states
    return report


def _find_cycle(edges: list[tuple[int, int, int]]) -> Optional[list[tuple[int, int, int]]]:
    """Some directed cycle among ``(src, reaction, dst)`` edges, as an edge list."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for s, j, t in edges:
        adj.setdefault(s, []).append((j, t))
    color: dict[int, int] = {}
    for root in sorted(adj):
        if root in color:
            continue
        color[root] = 1
        stack = [(root, iter(adj.get(root, ())))]
        trail: list[tuple[int, int, int]] = []
        while stack:
            node, it = stack[-1]
            step = next(it, None)
            if step is None:
                color[node] = 2
                stack.pop()
                if trail:
                    trail.pop()
                continue
            j, t = step
            c = color.get(t, 0)
            if c == 1:
                cyc = trail + [(node, j, t)]
                start = next(i for i, e in enumerate(cyc) if e[0] == t)
                return cyc[start:]
            if c == 0:
                color[t] = 1
                trail.append((node, j, t))
                stack.append((t, iter(adj.get(t, ()))))
    return None


def longest_execution(crn: Crn, init: Mapping[str, int], limits: Limits = Limits()) -> int:
    """Length of the longest execution from ``init`` (full, unreduced graph).

    Raises ValueError when the CRN is not execution bounded from ``init``.
    """
    rep = explore(crn, init, limits)
    if rep.bounded is not True:
        raise ValueError("not execution bounded from init (or truncated)")
    comp = _Compiled(crn)
    ids = {v: i for i, v in enumerate(rep._states)}
    memo: dict[int, int] = {}
    # states were discovered in BFS order; resolve longest paths bottom-up
    order = []
    seen = set()
    stack = [(0, False)]
    while stack:
        k, done = stack.pop()
        if done:
            order.append(k)
            continue
        if k in seen:
            continue
        seen.add(k)
        stack.append((k, True))
        x = rep._states[k]
        for j in comp.enabled(x):
            t = ids[comp.fire(x, j)]
            if t not in seen:
                stack.append((t, False))
    for k in order:
        x = rep._states[k]
        memo[k] = max((1 + memo[ids[comp.fire(x, j)]] for j in comp.enabled(x)), default=0)
    return memo[0]


# --- verdicts -----------------------------------------------------------------

@dataclass
class InputResult:
    input: tuple[int, ...]
    expected: Optional[int]
    observed: tuple
    status: str  # "pass" | "fail" | "inconclusive"
    reason: str = ""
    counterexample: Optional[tuple[Configuration, ...]] = None
    reached: int = 0

    def to_dict(self) -> dict:
        return {
            "input": list(self.input), "expected": self.expected,
            "observed": [o for o in self.observed], "status": self.status,
            "reason": self.reason, "reached": self.reached,
            "counterexample": None if self.counterexample is None
            else [_cfg(c) for c in self.counterexample],
        }


@dataclass
class Verdict:
    results: list[InputResult]

    @property
    def status(self) -> str:
        st = {r.status for r in self.results}
        if "fail" in st:
            return "fail"
        if "inconclusive" in st:
            return "inconclusive"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def failures(self) -> list[InputResult]:
        return [r for r in self.results if r.status != "pass"]

    def to_json(self) -> str:
        return json.dumps({"status": self.status, "results": [r.to_dict() for r in self.results]},
                          indent=2)

    def to_table(self) -> str:
        rows = ["input\texpected\tobserved\tstatus\treached"]
        for r in self.results:
            rows.append(f"{','.join(map(str, r.input))}\t{r.expected}\t"
                        f"{','.join(map(str, r.observed))}\t{r.status}\t{r.reached}")
        rows.append(f"overall: {self.status}")
        return "\n".join(rows) + "\n"


def _path_to(rep: ExploreReport, target: Configuration) -> tuple[Configuration, ...]:
    """A path from the report's init to ``target``, recomputed by BFS."""
    crn = rep.crn
    comp = _Compiled(crn)
    start, goal = crn.vector(rep.init), crn.vector(target)
    parent = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x == goal:
            break
        for j in comp.enabled(x):
            y = comp.fire(x, j)
            if y not in parent:
                parent[y] = x
                queue.append(y)
    out = []
    node = goal if goal in parent else None
    while node is not None:
        out.append(crn.config(node))
        node = parent[node]
    return tuple(out[::-1])


def single_voting_invariant(crd: Crd) -> Callable[[Configuration], bool]:
    voters = tuple(crd.voters)
    return lambda c: sum(c[v] for v in voters) == 1


def _check(crn: Crn, init: Configuration, x: tuple, expected: int, observe, limits: Limits,
           reduce: bool, invariant, comp) -> InputResult:
    rep = explore(crn, init, limits, reduce=reduce, invariant=invariant, _compiled=comp)
    if rep.self_covering is not None:
        return InputResult(x, expected, (), "fail", "self-covering path from initial configuration",
                           rep.self_covering.path, rep.num_reached)
    if rep.truncated:
        return InputResult(x, expected, (), "inconclusive", f"limit {rep.limit}", None, rep.num_reached)
    if rep.invariant_violation is not None:
        return InputResult(x, expected, (), "fail", "invariant violated", rep.invariant_violation,
                           rep.num_reached)
    observed = []
    bad = None
    for t in rep.terminals:
        o = observe(t)
        if o not in observed:
            observed.append(o)
        if o != expected and bad is None:
            bad = t
    observed_t = tuple(sorted(observed, key=lambda o: (o is None, o)))
    if bad is not None:
        return InputResult(x, expected, observed_t, "fail", f"terminal {bad!r} outputs {observe(bad)}",
                           _path_to(rep, bad), rep.num_reached)
    return InputResult(x, expected, observed_t, "pass", "", None, rep.num_reached)


def _inputs(variables: Sequence[str], x) -> tuple[int, ...]:
    if isinstance(x, Mapping):
        return tuple(x.get(v, 0) for v in variables)
    return tuple(x)


def check_stably_decides(crd: Crd, pred: Predicate, x, limits: Limits = Limits(), *,
                         reduce: bool = False, single_voting: bool = False, _comp=None) -> Verdict:
    """Every terminal configuration reachable from context + ``x`` votes ``pred(x)``.

    Sound for CRDs that are execution bounded from the initial configuration,
    which is checked first.
    """
    if len(pred.variables) != len(crd.inputs):
        raise ValueError("predicate and CRD disagree on the number of inputs")
    x = _inputs(pred.variables, x)
    expected = eval_predicate(pred, x)
    inv = single_voting_invariant(crd) if single_voting else None
    res = _check(crd.crn, crd.initial(x), x, expected, lambda c: global_output(crd, c),
                 limits, reduce, inv, _comp)
    return Verdict([res])


def check_stably_computes(crc: Crc, f: PiecewiseFn, x, limits: Limits = Limits(), *,
                          reduce: bool = False, _comp=None) -> Verdict:
    """Every reachable terminal configuration has output ``f(x)``.

    Diff-representation computers are read as ``#Y^P - #Y^C``.
    """
    if len(f.variables) != len(crc.inputs):
        raise ValueError("function and CRC disagree on the number of inputs")
    x = _inputs(f.variables, x)
    expected = eval_function(f, x)
    res = _check(crc.crn, crc.initial(x), x, expected, crc.value, limits, reduce, None, _comp)
    return Verdict([res])


def verify_grid(artifact: Union[Crd, Crc], spec: Union[Predicate, PiecewiseFn],
                inputs: Iterable, limits: Limits = Limits(), *, reduce: bool = False,
                single_voting: bool = False) -> Verdict:
    """Run the matching ``check_*`` on every input and merge the verdicts."""
    crn = artifact.crn
    comp = _Compiled(crn)
    results = []
    for x in inputs:
        if isinstance(artifact, Crd):
            v = check_stably_decides(artifact, spec, x, limits, reduce=reduce,
                                     single_voting=single_voting, _comp=comp)
        else:
            v = check_stably_computes(artifact, spec, x, limits, reduce=reduce, _comp=comp)
        results.extend(v.results)
    return Verdict(results)


def preserves_voter_count(crd: Crd) -> bool:
    """Every reaction consumes exactly as many voters as it produces.

    With one voter in the context this makes single voting hold in every
    reachable configuration, independent of any exploration.
    """
    voters = crd.voters
    return all(sum(r.net(s) for s in voters) == 0 for r in crd.crn.reactions)
