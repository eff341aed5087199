"""Direct-method stochastic simulation with unit rate constants.

Each trial draws from its own ``numpy.random.Generator`` (PCG64) seeded by
``SeedSequence([master_seed, n, trial_index])``, so trials are independent
and any one of them can be replayed alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .crn import Configuration, Crc, Crd, Crn, Reaction, apply

DEFAULT_MAX_STEPS = 10_000_000
CSV_HEADER = ("n", "seed", "time", "steps")


class UnsupportedOrder(ValueError):
    pass


class StepLimit(RuntimeError):
    def __init__(self, steps: int, state: "SimState"):
        super().__init__(f"no terminal configuration after {steps} steps")
        self.steps = steps
        self.state = state


@dataclass(frozen=True)
class SimState:
    config: Configuration
    time: float = 0.0
    steps: int = 0
    volume: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.volume > 0:
            raise ValueError("volume must be positive")


class Terminal:
    """Returned by :func:`step` when no reaction can fire."""

    def __init__(self, state: SimState):
        self.state = state

    def __repr__(self) -> str:
        return f"Terminal({self.state.config!r})"


@dataclass(frozen=True)
class TrialRecord:
    n: int
    seed: int
    stabilization_time: float
    steps: int
    terminal: Configuration


def _check_order(rxn: Reaction) -> None:
    if rxn.order not in (1, 2):
        raise UnsupportedOrder(f"{rxn}: only uni- and bimolecular reactions can be simulated")


def propensity(config: Mapping[str, int], rxn: Reaction, volume: float) -> float:
    _check_order(rxn)
    (a, ka), *rest = rxn.reactants.items()
    ca = config.get(a, 0)
    if ka == 1 and not rest:
        return float(ca)
    if ka == 2:
        return ca * (ca - 1) / 2 / volume
    (b, _), = rest
    return ca * config.get(b, 0) / volume


def trial_seed(master: int, n: int, index: int) -> int:
    return int(np.random.SeedSequence([master, n, index]).generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def step(crn: Crn, state: SimState, rng: np.random.Generator) -> Union[SimState, Terminal]:
    """One reaction event.  ``rng`` carries the stream across calls."""
    rates = [propensity(state.config, r, state.volume) for r in crn.reactions]
    total = math.fsum(rates)
    if total <= 0:
        return Terminal(state)
    dt = rng.exponential(1.0 / total)
    j = _choose(rates, total, rng.random())
    return replace(state, config=apply(state.config, crn.reactions[j]),
                   time=state.time + dt, steps=state.steps + 1)


def _choose(rates: Sequence[float], total: float, u: float) -> int:
    target = u * total
    acc = 0.0
    last = 0
    for j, a in enumerate(rates):
        if a > 0:
            acc += a
            last = j
            if target < acc:
                return j
    return last


class _Kernel:
    """Integer-vector simulation loop with per-reaction propensity updates."""

    def __init__(self, crn: Crn):
        for r in crn.reactions:
            _check_order(r)
        idx = crn.index
        self.crn = crn
        self.kind = []  # (i, None) unimolecular, (i, i) dimer, (i, k) heterodimer
        for r in crn.reactions:
            items = [(idx[s], k) for s, k in r.reactants.items()]
            if len(items) == 1 and items[0][1] == 1:
                self.kind.append((items[0][0], None))
            elif len(items) == 1:
                self.kind.append((items[0][0], items[0][0]))
            else:
                self.kind.append((items[0][0], items[1][0]))
        n = len(crn.species)
        self.delta = []
        for r in crn.reactions:
            d = [0] * n
            for s, k in r.reactants.items():
                d[idx[s]] -= k
            for s, k in r.products.items():
                d[idx[s]] += k
            self.delta.append([(i, v) for i, v in enumerate(d) if v])
        users: list[list[int]] = [[] for _ in range(n)]
        for j, (a, b) in enumerate(self.kind):
            users[a].append(j)
            if b is not None and b != a:
                users[b].append(j)
        self.affects = [sorted({u for i, _ in d for u in users[i]}) for d in self.delta]

    def rate(self, x: list[int], j: int, volume: float) -> float:
        a, b = self.kind[j]
        if b is None:
            return float(x[a])
        if a == b:
            return x[a] * (x[a] - 1) / 2 / volume
        return x[a] * x[b] / volume

    def run(self, init: Configuration, volume: float, rng: np.random.Generator, max_steps: int,
            on_step: Optional[Callable[[int, float, int, list[int]], None]] = None):
        x = list(self.crn.vector(init))
        rates = [self.rate(x, j, volume) for j in range(len(self.kind))]
        t = 0.0
        steps = 0
        while True:
            total = math.fsum(rates)
            if total <= 0:
                return x, t, steps, True
            if steps >= max_steps:
                return x, t, steps, False
            t += rng.exponential(1.0 / total)
            j = _choose(rates, total, rng.random())
            for i, v in self.delta[j]:
                x[i] += v
            for u in self.affects[j]:
                rates[u] = self.rate(x, u, volume)
            steps += 1
            if on_step is not None:
                on_step(steps, t, j, x)


def _crn_of(artifact: Union[Crn, Crd, Crc]) -> Crn:
    return artifact if isinstance(artifact, Crn) else artifact.crn


def run_to_terminal(artifact: Union[Crn, Crd, Crc], init: Mapping[str, int],
                    volume: Optional[float] = None, seed: int = 0,
                    max_steps: int = DEFAULT_MAX_STEPS, *, n: Optional[int] = None,
                    trace: Optional[Callable[[int, float, int, Configuration], None]] = None,
                    _kernel: Optional[_Kernel] = None) -> TrialRecord:
    """Simulate from ``init`` until no reaction applies.

    ``volume`` defaults to the initial molecule count (at least 1).
    Raises StepLimit after ``max_steps`` reaction events.
    """
    crn = _crn_of(artifact)
    init = Configuration(init)
    if volume is None:
        volume = float(max(1, init.size()))
    if not volume > 0:
        raise ValueError("volume must be positive")
    kern = _kernel or _Kernel(crn)
    hook = None
    if trace is not None:
        hook = lambda s, t, j, x: trace(s, t, j, crn.config(x))  # noqa: E731
    x, t, steps, done = kern.run(init, volume, make_rng(seed), max_steps, hook)
    if not done:
        raise StepLimit(steps, SimState(crn.config(x), t, steps, volume, seed))
    return TrialRecord(init.size() if n is None else n, seed, t, steps, crn.config(x))


def default_shape(artifact: Union[Crd, Crc]) -> Callable[[int], Configuration]:
    """All ``n`` molecules on the first input species, plus the context."""
    first = artifact.inputs[0]
    return lambda n: artifact.context + Configuration({first: n})


def proportional_shape(artifact: Union[Crd, Crc], weights: Mapping[str, int]) -> Callable[[int], Configuration]:
    """Split ``n`` across inputs in proportion to ``weights`` (remainder to the first)."""
    names = [s for s in weights if weights[s] > 0]
    if not names or any(s not in artifact.inputs for s in weights):
        raise ValueError("shape must name input species with positive weights")
    tot = sum(weights[s] for s in names)

    def shape(n: int) -> Configuration:
        counts = {s: n * weights[s] // tot for s in names}
        counts[names[0]] += n - sum(counts.values())
        return artifact.context + Configuration(counts)
    return shape


def bench_stabilization(artifact: Union[Crd, Crc], sizes: Iterable[int], trials: int,
                        input_shape: Optional[Callable[[int], Configuration]] = None,
                        seed: int = 0, max_steps: int = DEFAULT_MAX_STEPS) -> list[TrialRecord]:
    """``trials`` independent runs per size, sorted by (n, trial index)."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    shape = input_shape or default_shape(artifact)
    kern = _Kernel(artifact.crn)
    out = []
    for n in sizes:
        init = shape(n)
        for k in range(trials):
            s = trial_seed(seed, n, k)
            out.append(run_to_terminal(artifact, init, None, s, max_steps, n=n, _kernel=kern))
    return out


def records_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow((r.n, r.seed, repr(r.stabilization_time), r.steps))
    return buf.getvalue()


@dataclass(frozen=True)
class SizeSummary:
    n: int
    trials: int
    mean_time: float
    stderr: float
    mean_steps: float

    @property
    def normalized(self) -> float:
        """``mean_time / (n ln n)``."""
        return self.mean_time / (self.n * math.log(self.n)) if self.n > 1 else math.nan


def summarize(records: Iterable[TrialRecord]) -> list[SizeSummary]:
    by_n: dict[int, list[TrialRecord]] = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r)
    out = []
    for n in sorted(by_n):
        times = np.array([r.stabilization_time for r in by_n[n]])
        se = float(times.std(ddof=1) / math.sqrt(len(times))) if len(times) > 1 else math.nan
        out.append(SizeSummary(n, len(times), float(times.mean()), se,
                               float(np.mean([r.steps for r in by_n[n]]))))
    return out


def summary_markdown(summaries: Sequence[SizeSummary]) -> str:
    lines = ["| n | trials | mean_time | stderr | mean_steps | mean_time/(n ln n) |",
             "|---|---|---|---|---|---|"]
    for s in summaries:
        lines.append(f"| {s.n} | {s.trials} | {s.mean_time:.4f} | {s.stderr:.4f} | "
                     f"{s.mean_steps:.1f} | {s.normalized:.5f} |")
    return "\n".join(lines) + "\n"


def flatness(summaries: Sequence[SizeSummary]) -> float:
    """Ratio of the largest to the smallest normalized mean time."""
    vals = [s.normalized for s in summaries]
    return max(vals) / min(vals)
