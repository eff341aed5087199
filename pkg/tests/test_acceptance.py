"""One test per acceptance criterion.

Each test records a ``criterion N: PASS|FAIL`` line that is printed in the
terminal summary. Run directly with ``python3 tests/test_acceptance.py``.
"""
import contextlib
import itertools
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import linprog

from ebcrn import fixtures
from ebcrn.analysis import (Bounded, Unbounded, covering_start, find_potential, is_potential,
                            reaction_feedforward_order, species_feedforward_order, validate)
from ebcrn.cli import main
from ebcrn.compiler import compile_affine, compile_function, compile_predicate, make_all_voting
from ebcrn.crn import Configuration, stoichiometric_matrix
from ebcrn.semilinear import covering_pieces, eval_predicate
from ebcrn.simulator import bench_stabilization, flatness, summarize
from ebcrn.textio import parse_spec
from ebcrn.verifier import Limits, explore, preserves_voter_count, verify_grid
from conftest import ACCEPTANCE_LINES, random_crn

FIX = Path(fixtures.__file__).parent


@contextlib.contextmanager
def criterion(n, limit=None):
    """Time the block and record a PASS/FAIL line for criterion ``n``."""
    notes = []
    t0 = time.perf_counter()
    try:
        yield notes
    except BaseException as e:
        ACCEPTANCE_LINES.append(f"criterion {n}: FAIL {type(e).__name__}: {str(e)[:200]}")
        raise
    dt = time.perf_counter() - t0
    ok = limit is None or dt < limit
    bound = f" < {limit}s" if limit else ""
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({dt:.1f}s{bound}) {'; '.join(notes)}")
    assert ok, f"took {dt:.1f}s, limit {limit}s"


def grid(dim, hi):
    return list(itertools.product(range(hi + 1), repeat=dim))


def test_criterion_1_certificates(capsys):
    with criterion(1) as notes:
        pot = FIX / "potential_example.crn"
        slowest = 0.0
        for argv, code in [
            (["analyze", pot], 0),
            (["analyze", pot, "--check", "A=1,B=1,C=0"], 0),
            (["analyze", FIX / "flip_flop.crn"], 1),
        ]:
            t0 = time.perf_counter()
            got = main([str(a) for a in argv])
            dt = time.perf_counter() - t0
            out = capsys.readouterr().out
            assert got == code, out
            assert dt < 1.0, f"{argv[-1]} took {dt:.2f}s"
            slowest = max(slowest, dt)
        c = fixtures.load("potential_example.crn")
        cert = find_potential(c)
        assert isinstance(cert, Bounded) and is_potential(c, cert.potential.weights)
        assert is_potential(c, (1, 1, 0))
        ff = fixtures.load("flip_flop.crn")
        cert = find_potential(ff)
        assert isinstance(cert, Unbounded)
        validate(ff, cert)
        notes.append(f"v={find_potential(c).potential.weights}, u={cert.witness.multiplicities}, "
                     f"slowest analyze {slowest * 1000:.0f} ms")


def _other_arm_feasible(m, bounded):
    """Floating-point oracle for the arm not returned."""
    ns, nr = m.shape
    if bounded:
        # semipositive u, normalised to sum 1, with M u >= 0
        res = linprog(np.zeros(nr), A_ub=-m, b_ub=np.zeros(ns), A_eq=np.ones((1, nr)), b_eq=[1],
                      bounds=[(0, None)] * nr, method="highs")
    else:
        res = linprog(np.zeros(ns), A_ub=m.T, b_ub=-np.ones(nr), bounds=[(0, None)] * ns, method="highs")
    return res.status == 0


def test_criterion_2_farkas_exclusivity():
    with criterion(2, 30) as notes:
        rng = random.Random(2)
        counts = {True: 0, False: 0}
        replayed = 0
        for _ in range(200):
            c = random_crn(rng, max_species=4, max_reactions=4, max_coeff=2)
            cert = find_potential(c)
            assert isinstance(cert, (Bounded, Unbounded))
            validate(c, cert)
            m = np.array(stoichiometric_matrix(c), dtype=float)
            assert not _other_arm_feasible(m, cert.bounded)
            counts[cert.bounded] += 1
            if not cert.bounded:
                rep = explore(c, covering_start(c, cert.witness), Limits(200_000))
                assert rep.self_covering is not None and rep.self_covering.validate(c)
                replayed += 1
        notes.append(f"{counts[True]} bounded, {counts[False]} unbounded, {replayed} replayed")


COMBINATIONS = [
    "(and (mod ((1 X1)) 1 2) (ge ((1 X2)) 3))",
    "(or (ge ((1 X1) (-1 X2)) 0) (mod ((1 X1)) 1 2))",
    "(not (mod ((1 X1) (1 X2)) 0 3))",
    "(and (not (ge ((1 X1)) 2)) (or (mod ((1 X2)) 0 2) (ge ((2 X1) (-1 X2)) 1)))",
    "(or (not (lt ((1 X1)) 4)) (and (mod ((1 X2)) 1 3) (le ((1 X1) (1 X2)) 5)))",
]


def _decides(p, inputs):
    crd = compile_predicate(p).crd
    assert preserves_voter_count(crd) and sum(crd.context[v] for v in crd.voters) == 1
    v = verify_grid(crd, p, inputs, reduce=True, single_voting=True)
    assert v.passed, v.to_table()
    return v


def test_criterion_3_predicates():
    with criterion(3, 300) as notes:
        par = fixtures.load("parity.spec")
        v = _decides(par, [(x,) for x in range(21)])
        notes.append(f"parity {len(v.results)} inputs")
        maj = fixtures.load("majority.spec")
        v = _decides(maj, grid(2, 8))
        notes.append(f"majority {len(v.results)} inputs")
        for e in COMBINATIONS:
            p = parse_spec("vars: X1 X2\n" + e)
            _decides(p, grid(2, 6))
        notes.append(f"{len(COMBINATIONS)} combinations on 0..6^2")


def _affine(text, inputs):
    f = parse_spec("vars: X\n" + text)
    crc = compile_affine(f.pieces[0], f.variables).crc
    xs = [x for x in inputs if covering_pieces(f, {"X": x[0]})]
    v = verify_grid(crc, f, xs, reduce=True)
    assert v.passed, v.to_table()
    return len(xs)


def test_criterion_4_functions():
    with criterion(4, 300) as notes:
        xs = [(x,) for x in range(13)]
        n = _affine("(fn (piece (ge ((1 X)) 1) 0 1 ((1 X)) ((1 X))))", xs)
        assert n == 12
        _affine("(fn (piece (ge ((1 X)) 0) 0 2 ((1 X))))", xs)
        _affine("(fn (piece (ge ((1 X)) 0) 3 1 ((2 X))))", xs)
        notes.append("x-1 on 1..12, floor(x/2) and 2x+3 on 0..12")
        fmin = fixtures.load("min.spec")
        v = verify_grid(compile_function(fmin).crc, fmin, grid(2, 6), reduce=True)
        assert v.passed, v.to_table()
        half = fixtures.load("half.spec")
        v = verify_grid(compile_function(half).crc, half, xs, reduce=True)
        assert v.passed, v.to_table()
        notes.append("min on 0..6^2, floor(x/2) via compile_function on 0..12")


def _all_voting(spec, inputs, explicit):
    c = make_all_voting(compile_predicate(spec))
    crd = c.crd
    assert c.voter_kind == "all" and crd.yes | crd.no == set(crd.crn.species)
    v = verify_grid(crd, spec, inputs, reduce=True)
    assert v.passed, v.to_table()
    assert all(r.observed == (r.expected,) for r in v.results)
    # terminals enumerated without reduction on a few inputs
    votes = {s: 1 for s in crd.yes} | {s: 0 for s in crd.no}
    for x in explicit:
        rep = explore(crd.crn, crd.initial(x))
        assert rep.bounded and rep.terminals
        for t in rep.terminals:
            assert {votes[s] for s in t} == {eval_predicate(spec, x)}
    return len(v.results)


def test_criterion_5_all_voting():
    with criterion(5) as notes:
        par = fixtures.load("parity.spec")
        n = _all_voting(par, [(x,) for x in range(21)], [(x,) for x in range(8)])
        maj = fixtures.load("majority.spec")
        m = _all_voting(maj, grid(2, 8), grid(2, 3))
        notes.append(f"parity {n} inputs, majority {m} inputs")


def test_criterion_6_stabilization():
    with criterion(6, 600) as notes:
        crd = compile_predicate(fixtures.load("parity.spec")).crd
        recs = bench_stabilization(crd, [64], 1000, seed=64)
        mean = float(np.mean([r.stabilization_time for r in recs]))
        analytic = sum(65 / i for i in range(1, 65))
        err = abs(mean - analytic) / analytic
        assert err < 0.10, f"mean {mean:.2f} vs {analytic:.2f}"
        s = summarize(bench_stabilization(crd, [256, 1024, 4096], 200, seed=6))
        fl = flatness(s)
        assert fl < 1.5, fl
        ratios = ", ".join(f"{x.normalized:.3f}" for x in s)
        notes.append(f"mean {mean:.2f} vs {analytic:.2f} ({err:.1%}); t/(n ln n) = {ratios}; flatness {fl:.3f}")


def test_criterion_7_fixtures():
    with criterion(7) as notes:
        c = fixtures.load("min_catalytic_undo.crn")
        w = explore(c, Configuration(X1=1, X2=1, X3=1)).self_covering
        assert w is not None and w.validate(c)
        maj = fixtures.load("collapsing_majority.crd.crn")
        v = verify_grid(maj, fixtures.load("majority.spec"), [x for x in grid(2, 8) if any(x)])
        assert v.passed, v.to_table()
        par = fixtures.load("collapsing_parity.crd.crn")
        v = verify_grid(par, fixtures.load("parity.spec"), [(x,) for x in range(1, 9)])
        assert v.passed, v.to_table()
        for crd in (maj, par):
            assert isinstance(find_potential(crd.crn), Bounded)
        assert reaction_feedforward_order(fixtures.load("even_two_reactions.crd.crn").crn) is None
        notes.append(f"witness length {w.j}; collapsing CRDs checked on nonzero inputs")


def test_criterion_8_feedforward_potential():
    with criterion(8) as notes:
        rng = random.Random(8)
        found = drawn = 0
        while found < 100:
            c = random_crn(rng)
            drawn += 1
            if species_feedforward_order(c) is None:
                continue
            found += 1
            cert = find_potential(c)
            assert isinstance(cert, Bounded)
            validate(c, cert)
        notes.append(f"{found} feedforward CRNs out of {drawn} drawn")


def _cli(*argv):
    r = subprocess.run([sys.executable, "-m", "ebcrn.cli", *map(str, argv)], capture_output=True)
    return r.returncode, r.stdout


def test_criterion_9_reproducible(tmp_path):
    with criterion(9) as notes:
        crd = tmp_path / "maj.crn"
        assert _cli("compile", "--pred", FIX / "majority.spec", "-o", crd)[0] == 0
        trace = [tmp_path / "a.csv", tmp_path / "b.csv"]
        runs = [_cli("simulate", crd, "--input", "40 X1, 30 X2", "--seed", 7, "--trace", t) for t in trace]
        assert runs[0][0] == 0 and runs[0] == runs[1]
        assert trace[0].read_bytes() == trace[1].read_bytes()
        for f in ("potential_example.crn", "flip_flop.crn"):
            a, b = _cli("analyze", FIX / f, "--format", "json"), _cli("analyze", FIX / f, "--format", "json")
            assert a == b
        a, b = _cli("analyze", FIX / "min_catalytic_undo.crn", "--from", "1 X1, 1 X2, 1 X3"), \
            _cli("analyze", FIX / "min_catalytic_undo.crn", "--from", "1 X1, 1 X2, 1 X3")
        assert a == b
        notes.append("simulate CSV and trace, analyze certificate and exploration output identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
