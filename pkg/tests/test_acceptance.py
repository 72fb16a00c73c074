"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (collected again in the terminal
summary) and asserts the same condition.
"""

import json
import time

import numpy as np
import pytest

from merosub.cli import run_command
from merosub.disk import DiskGrid, Status, grid_values, subordination_probe
from merosub.forms import (
    QFamilySpec,
    QKind,
    TheoremParams,
    k_series,
    p_series,
    phi_series,
    psi_series,
    q_family,
    signed_ratio,
)
from merosub.lashin import LashinParams, apply_lashin, check_recurrence, lashin_quadrature
from merosub.series import AnalyticSeries, compose_schwarz, differentiate, evaluate, z_times_derivative
from merosub.verifier import (
    Classification,
    fuzz_theorem,
    get_preset,
    random_schwarz,
    random_sigma_function,
    run_trial,
    trial_inputs,
)

GRID = DiskGrid()

SUITES = [
    ("3.1", "cor-3.2"), ("3.1", "cor-3.3"), ("3.1", "cor-3.4"),
    ("3.5", "cor-3.6"), ("3.5", "cor-3.7"),
    ("3.8", "cor-3.9"), ("3.8", "cor-3.10"),
    ("4.1", "cor-4.2"),
    ("4.3", "cor-4.4"), ("4.3", "cor-4.5"),
    ("5.1", "thm-5.1"), ("5.2", "thm-5.2"),
    ("2.6", "lemma-2.6"),
]
TRIALS = 200
SEED = 1


def test_operator_oracle_agreement(criterion):
    start = time.perf_counter()
    worst = 0.0
    points = 0.5 * np.exp(2j * np.pi * np.arange(16) / 16)
    for i, alpha in enumerate((0.5, 1.0, 2.5)):
        for j, beta in enumerate((0.5, 1.0, 3.0)):
            f = random_sigma_function(100 + 3 * i + j, K=16, amplitude=0.2)
            prm = LashinParams(alpha, beta)
            image = apply_lashin(f, prm)
            for z in points:
                worst = max(worst, abs(lashin_quadrature(f, prm, z) - evaluate(image, z)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 2.0
    criterion("operator-oracle", ok, f"max |quadrature - series| = {worst:.2e} (< 1e-8), {elapsed:.2f}s (< 2s)")
    assert ok


def test_recurrence(criterion):
    rng = np.random.default_rng(16)
    start = time.perf_counter()
    worst = 0.0
    for i in range(50):
        alpha, beta = rng.uniform(0.05, 6.0, size=2)
        f = random_sigma_function(200 + i, amplitude=float(rng.uniform(0.01, 0.5)))
        worst = max(worst, check_recurrence(f, LashinParams(alpha, beta)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and elapsed < 1.0
    criterion("recurrence", ok, f"max residual incl. pole term = {worst:.2e} (< 1e-12), {elapsed:.3f}s (< 1s)")
    assert ok


def test_semigroup(criterion):
    rng = np.random.default_rng(20)
    worst = 0.0
    for i in range(20):
        a1, a2 = rng.uniform(0.25, 4.0, size=2)
        beta = rng.uniform(0.1, 5.0)
        f = random_sigma_function(300 + i)
        joint = apply_lashin(f, LashinParams(a1 + a2, beta))
        split = apply_lashin(apply_lashin(f, LashinParams(a1, beta)), LashinParams(a2, beta))
        worst = max(worst, float(np.max(np.abs(joint.tail - split.tail))), abs(joint.constant - split.constant))
    ok = worst < 1e-13
    criterion("semigroup", ok, f"max coefficient residual = {worst:.2e} (< 1e-13)")
    assert ok


def _identity_params(rng):
    lam = complex(rng.uniform(0.2, 1.5), rng.uniform(-0.5, 0.5))
    return TheoremParams(
        LashinParams(rng.uniform(0.5, 4.0), rng.uniform(0.5, 5.0)),
        lam=lam,
        mu=rng.uniform(0.5, 2.0),
        gamma=complex(rng.uniform(0.2, 2.0), rng.uniform(-0.5, 0.5)),
        eta=complex(*rng.uniform(-1, 1, size=2)),
        delta=complex(*rng.uniform(-1, 1, size=2)),
        m=complex(*rng.uniform(-2, 2, size=2)),
        ell=complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)),
    )


def test_identities(criterion):
    rng = np.random.default_rng(2023)
    worst = {"log-derivative": 0.0, "quadratic": 0.0, "linear": 0.0}
    for i in range(50):
        f = random_sigma_function(400 + i)
        prm = _identity_params(rng)
        k = k_series(f, prm)
        kv, zk = grid_values(k, GRID), grid_values(z_times_derivative(k), GRID)
        lhs = zk / kv
        rhs = prm.mu * prm.beta * grid_values(signed_ratio(f, prm), GRID)
        worst["log-derivative"] = max(worst["log-derivative"], float(np.max(np.abs(lhs - rhs))))
        p = p_series(f, prm)
        pv, zp = grid_values(p, GRID), grid_values(z_times_derivative(p), GRID)
        quad = prm.delta * pv * pv + prm.eta * pv + prm.gamma * zp
        worst["quadratic"] = max(worst["quadratic"], float(np.max(np.abs(grid_values(psi_series(f, prm), GRID) - quad))))
        lin = prm.m * kv - (prm.ell / prm.beta) * zk
        worst["linear"] = max(worst["linear"], float(np.max(np.abs(grid_values(phi_series(f, prm), GRID) - lin))))
    ok = max(worst.values()) < 1e-9
    criterion("identities", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (< 1e-9)")
    assert ok


@pytest.fixture(scope="module")
def proven_runs():
    start = time.perf_counter()
    runs = {preset: fuzz_theorem(theorem, preset, TRIALS, SEED) for theorem, preset in SUITES}
    return runs, time.perf_counter() - start


def test_proven_suites(criterion, proven_runs):
    runs, elapsed = proven_runs
    lines = []
    ok = elapsed < 120.0
    for _, preset in SUITES:
        s = runs[preset]
        cx = s.counts[Classification.COUNTEREXAMPLE.value]
        ok &= cx == 0 and s.vacuous_rate < 0.5
        lines.append(f"{preset} X={cx} V={s.vacuous_rate:.0%}")
        print(f"  {preset}: {s.counts}")
    criterion("proven-suites", ok, f"{'; '.join(lines)}; total {elapsed:.0f}s (< 120s)")
    assert ok


def _first_counterexample(preset_name: str):
    preset = get_preset(preset_name)
    for i in range(TRIALS):
        r = run_trial(trial_inputs(preset, i, SEED, mutate=True))
        if r.classification is Classification.COUNTEREXAMPLE:
            return i
    return None


def test_negative_controls(criterion):
    found = {preset: _first_counterexample(preset) for _, preset in SUITES}
    ok = all(i is not None for i in found.values())
    detail = "; ".join(f"{p} first X at trial {i}" for p, i in found.items())
    criterion("negative-controls", ok, detail)
    assert ok


def _calibration_dominant(rng) -> AnalyticSeries:
    kind = int(rng.integers(4))
    if kind == 0:
        tau = rng.uniform(0.2, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        return q_family(QFamilySpec(QKind.EXPONENTIAL, tau=tau))
    if kind == 1:
        return q_family(QFamilySpec(QKind.MACOVEI_MOBIUS, A=float(rng.choice([-1, 1]) * rng.uniform(0.1, 0.8))))
    if kind == 2:
        a = rng.uniform(-0.5, 0.9)
        return q_family(QFamilySpec(QKind.JANOWSKI, A=a, B=rng.uniform(-0.8, a - 0.1)))
    return q_family(QFamilySpec(QKind.HALF_PLANE_POWER, rho=rng.uniform(0.2, 0.9)))


def test_subordination_calibration(criterion):
    positives = {s: 0 for s in Status}
    negatives = {s: 0 for s in Status}
    for i in range(100):
        rng = np.random.default_rng([7, i])
        f = _calibration_dominant(rng)
        w = random_schwarz(rng)
        positives[subordination_probe(compose_schwarz(f, w), f, GRID).status] += 1
        # every dominant here is starlike about f(0), so stretching about f(0) leaves the range
        f0 = complex(f.coeffs[0])
        g = rng.uniform(1.3, 2.0) * (f - f0) + f0
        negatives[subordination_probe(g, f, GRID).status] += 1
    ok = (positives[Status.FAILS] == 0 and negatives[Status.FAILS] >= 95 and negatives[Status.HOLDS] == 0)
    fmt = lambda d: "/".join(str(d[s]) for s in (Status.HOLDS, Status.INCONCLUSIVE, Status.FAILS))
    criterion("calibration", ok, f"positives H/I/F = {fmt(positives)}, negatives H/I/F = {fmt(negatives)}")
    assert ok


def test_determinism(criterion, tmp_path):
    identical = []
    for theorem, preset in SUITES:
        paths = [tmp_path / f"{preset}-{k}.json" for k in (0, 1)]
        for p in paths:
            code = run_command(["fuzz", "--theorem", theorem, "--preset", preset, "--trials", "20",
                                "--seed", str(SEED), "--out", str(p)])
            assert code in (0, 1)
        identical.append(paths[0].read_bytes() == paths[1].read_bytes())
    ok = all(identical)
    criterion("determinism", ok, f"{sum(identical)}/{len(identical)} suites byte-identical on repeat")
    assert ok


def test_determinism_full_suite(proven_runs):
    runs, _ = proven_runs
    again = fuzz_theorem("3.8", "cor-3.10", TRIALS, SEED)
    assert json.dumps(again.to_dict()) == json.dumps(runs["cor-3.10"].to_dict())


def test_finite_differences(criterion):
    rng = np.random.default_rng(99)
    h = 1e-5
    worst = 0.0
    for i in range(20):
        c = (rng.normal(size=65) + 1j * rng.normal(size=65)) * 0.7 ** np.arange(65)
        s = AnalyticSeries(c)
        ds = differentiate(s)
        r = np.sqrt(rng.uniform(0, 0.9 ** 2, size=10))
        zs = r * np.exp(1j * rng.uniform(0, 2 * np.pi, size=10))
        for z in zs:
            fd = (evaluate(s, z + h) - evaluate(s, z - h)) / (2 * h)
            worst = max(worst, abs(evaluate(ds, z) - fd))
    ok = worst < 1e-6
    criterion("finite-differences", ok, f"max |s' - central difference| = {worst:.2e} (< 1e-6)")
    assert ok
