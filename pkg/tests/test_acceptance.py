"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import brute_joint, model_path  # noqa: E402

from valnet.algebra import Kind  # noqa: E402
from valnet.converters import d_separated, from_dag, moral_separated  # noqa: E402
from valnet.fusion import eliminate, fuse_var, marginal  # noqa: E402
from valnet.generate import random_joint, random_model  # noqa: E402
from valnet.independence import (  # noqa: E402
    check_semigraphoid,
    ci_numeric,
    ci_structural,
    disjoint_triples,
    verify_theorem21,
)
from valnet.modelfile import MODEL_KINDS, load_model, parse_model, serialize_model  # noqa: E402
from valnet.network import INDEPENDENT, NOT_DERIVABLE, joint  # noqa: E402

N_NETWORKS = 100


def _vn(seed: int, kind: str = "probability"):
    """Seeded random network: 2 to 6 binary variables, at most 6 nodes."""
    n = 2 + seed % 5
    return random_model("vn", n, seed, kind=kind).network()


def _brute_marginal(net, target) -> dict:
    """Joint by walking every configuration, then summed (min for kappa) down."""
    target = set(target)
    out: dict = {}
    for key, x in brute_joint([n.valuation for n in net.nodes]).items():
        k = frozenset(p for p in key if p[0] in target)
        if k not in out:
            out[k] = x
        elif net.kind is Kind.PROBABILITY:
            out[k] += x
        else:
            out[k] = min(out[k], x)
    return out


def _as_dict(val) -> dict:
    frames = [range(v.frame_size) for v in val.domain]
    return {
        frozenset(zip(val.names, cfg)): float(x)
        for cfg, x in zip(itertools.product(*frames), val.flat)
    }


def _targets(net, seed: int):
    names = list(net.variables)
    rng = np.random.default_rng(seed)
    out = [[], names, *([x] for x in names)]
    mask = rng.random(len(names)) < 0.5
    out.append([x for x, m in zip(names, mask) if m])
    return out


# --- criteria -----------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    cases = [
        ("fig8", {"X"}, {"Z"}, {"Y", "W"}, INDEPENDENT),
        ("fig8", {"Y"}, {"W"}, {"X", "Z"}, INDEPENDENT),
        ("fig9", {"W"}, {"X"}, {"V"}, INDEPENDENT),
        ("fig9", {"W"}, {"X"}, {"V", "Z"}, NOT_DERIVABLE),
        ("fig10", {"X5", "X6", "X7"}, {"X1", "X3", "X4"}, {"X2"}, INDEPENDENT),
        ("fig11", {"W"}, {"X"}, {"V"}, INDEPENDENT),
        ("fig11", {"Z"}, {"V", "W", "Y"}, {"X"}, INDEPENDENT),
    ]
    wrong = []
    for name, r, s, v, want in cases:
        got = ci_structural(load_model(model_path(name)).network(), r, s, v).verdict
        if got != want:
            wrong.append(f"{name} {sorted(r)}|{sorted(s)}|{sorted(v)} gave {got}")
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 1.0
    return ok, f"{len(cases) - len(wrong)}/{len(cases)} verdicts match, {elapsed:.3f}s (limit 1s) {wrong}"


def criterion_2():
    net = load_model(model_path("fig6")).network()
    out, trace = eliminate(net, ["X", "Z", "Y"])
    final = [(n.name, n.domain) for n in out.nodes]
    drop_ok = [s.dropped for s in trace.steps] == [False, False, True]
    ex1 = fuse_var(load_model(model_path("example1")).network(), "X")
    merged = [n.domain for n in ex1.nodes if "alpha" in n.name]
    ok = final == [("alpha", ("W",))] and drop_ok and merged == [("W", "Y")]
    return ok, f"final nodes {final}, drops {[s.dropped for s in trace.steps]}, fused X domain {merged}"


def criterion_3():
    start = time.perf_counter()
    worst = 0.0
    kappa_mismatch = 0
    for seed in range(N_NETWORKS):
        net = _vn(seed)
        for target in _targets(net, seed):
            got, want = _as_dict(marginal(net, target)), _brute_marginal(net, target)
            assert got.keys() == want.keys()
            for k, x in want.items():
                worst = max(worst, abs(got[k] - x) / abs(x))
        knet = _vn(seed, "kappa")
        for target in _targets(knet, seed):
            if _as_dict(marginal(knet, target)) != _brute_marginal(knet, target):
                kappa_mismatch += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and kappa_mismatch == 0 and elapsed < 30
    return ok, (
        f"max relative error {worst:.2e} (limit 1e-9), kappa mismatches {kappa_mismatch}, "
        f"{elapsed:.1f}s (limit 30s)"
    )


def criterion_4():
    start = time.perf_counter()
    checked = independent = violations = 0
    for seed in range(N_NETWORKS):
        net = _vn(seed)
        tau = joint(net)
        for r, s, v in disjoint_triples(list(net.variables)):
            if len(r) > 2 or len(s) > 2:
                continue
            checked += 1
            if ci_structural(net, r, s, v).independent:
                independent += 1
                if not ci_numeric(tau, r, s, v).independent:
                    violations += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 120
    return ok, (
        f"{checked} triples, {independent} structurally independent, {violations} violations, "
        f"{elapsed:.1f}s (limit 120s)"
    )


def criterion_5():
    checked = unrepresented = disagree = 0
    for seed in range(N_NETWORKS):
        n = 2 + seed % 6
        dag = random_model("dag", n, seed, tables=False).structure
        net = from_dag(dag)
        for r, s, v in disjoint_triples(dag.names):
            checked += 1
            d = d_separated(dag, r, s, v)
            if d != moral_separated(dag, r, s, v):
                disagree += 1
            if d and not ci_structural(net, r, s, v).independent:
                unrepresented += 1
    ok = unrepresented == 0 and disagree == 0
    return ok, f"{checked} triples, {unrepresented} d-separations not represented, {disagree} oracle disagreements"


def _splits(names):
    """Every assignment of variables to a, b, c with b non-empty."""
    for labels in itertools.product("abc", repeat=len(names)):
        part = {k: {x for x, l in zip(names, labels) if l == k} for k in "abc"}
        if part["b"]:
            yield part["a"], part["b"], part["c"]


def criterion_6():
    failed = []
    checks = 0
    for kind in (Kind.PROBABILITY, Kind.KAPPA):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = 2 + seed % 3
            sigma = random_joint(rng, n, max_frame=3, kind=kind)
            if kind is Kind.KAPPA and not np.isfinite(sigma.flat).all():
                failed.append(f"{kind.value} seed {seed} not finite")
            for a, b, c in _splits(list(sigma.names)):
                checks += 1
                rep = verify_theorem21(sigma, a, b, c)
                exact = kind is not Kind.KAPPA or all(d == 0 for _, d in rep.results.values())
                if not rep.passed or not exact:
                    failed.append(f"{kind.value} seed {seed} a={sorted(a)} b={sorted(b)} c={sorted(c)}")
    return not failed, f"{checks} (joint, split) checks over 100 joints, {len(failed)} failures {failed[:3]}"


def criterion_7():
    structural = numeric = 0
    witnesses = []
    for seed in range(50):
        net = random_model("vn", 2 + seed % 5, seed, tables=False).network()
        rep = check_semigraphoid(lambda r, s, v: ci_structural(net, r, s, v), net.variables)
        structural += len(rep.violations)
        witnesses += [f"vn seed {seed}: {x}" for x in rep.violations[:1]]
    for seed in range(20):
        tau = random_joint(np.random.default_rng(seed), 4)
        rep = check_semigraphoid(lambda r, s, v: ci_numeric(tau, r, s, v), tau.names, intersection=True)
        numeric += len(rep.violations)
        witnesses += [f"joint seed {seed}: {x}" for x in rep.violations[:1]]
    ok = structural == 0 and numeric == 0
    return ok, f"structural violations {structural}, numeric violations {numeric} {witnesses[:3]}"


def _cli(args, hashseed: str) -> bytes:
    env = dict(os.environ, PYTHONHASHSEED=hashseed)
    proc = subprocess.run(
        [sys.executable, "-m", "valnet.cli", *args], capture_output=True, env=env, check=False
    )
    return proc.stdout + b"\x00" + str(proc.returncode).encode()


def criterion_8(tmp: Path):
    mismatched = []
    for model in MODEL_KINDS:
        for seed in range(100):
            mf = random_model(model, 1 + seed % 7, seed)
            text = serialize_model(mf)
            again = parse_model(text)
            if again != mf or serialize_model(again) != text:
                mismatched.append(f"{model} seed {seed}")
    runs = []
    for model in MODEL_KINDS:
        runs.append(["random", "--kind", model, "--vars", "6", "--seed", "7"])
    path = tmp / "dag.vn"
    path.write_text(serialize_model(random_model("dag", 5, 11)))
    for cmd in (
        ["enumerate", str(path), "--max-size", "2"],
        ["compare", str(path)],
        ["marginal", str(path), "--target", "A,C"],
        ["dot", str(path)],
        ["convert", str(model_path("fig11"))],
    ):
        runs.append(cmd)
    differing = [" ".join(r) for r in runs if _cli(r, "1") != _cli(r, "2")]
    ok = not mismatched and not differing
    return ok, (
        f"round-trip mismatches {len(mismatched)}/{100 * len(MODEL_KINDS)}, "
        f"CLI commands with differing output {len(differing)}/{len(runs)} {mismatched[:3]} {differing}"
    )


CRITERIA = [
    (1, "shipped model verdicts", criterion_1),
    (2, "fusion trace regression", criterion_2),
    (3, "marginal by fusion equals brute force", criterion_3),
    (4, "structural test is sound", criterion_4),
    (5, "DAG separations are represented", criterion_5),
    (6, "properties of conditionals", criterion_6),
    (7, "semigraphoid axioms", criterion_7),
    (8, "format round-trip and deterministic CLI", criterion_8),
]


def _line(n, title, ok, detail) -> str:
    return f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {title}: {detail}"


@pytest.mark.parametrize("n, title, check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(n, title, check, capsys, tmp_path):
    ok, detail = check(tmp_path) if n == 8 else check()
    with capsys.disabled():
        print("\n" + _line(n, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    results = []
    for n, title, check in CRITERIA:
        if n == 8:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = check(Path(d))
        else:
            ok, detail = check()
        results.append(ok)
        print(_line(n, title, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
