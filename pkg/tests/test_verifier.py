import json

import numpy as np
import pytest

from merosub.disk import DiskGrid, Status, Verdict, Witness, grid_values, nonvanishing_verdict, subordination_probe
from merosub.errors import GeneratorStuck, UsageError
from merosub.forms import BaseMode, QFamilySpec, QKind, TheoremParams, base_series, get_preset, p_series, q_family
from merosub.lashin import LashinParams, z_lashin
from merosub.series import MeromorphicSeries
from merosub.verifier import (
    THEOREMS,
    Classification,
    HypothesisReport,
    TrialInput,
    check_hypotheses,
    classify,
    default_preset,
    fuzz_theorem,
    random_sigma_function,
    run_trial,
    sandwich_trial,
    trial_inputs,
    witness_reverifies,
)

GRID = DiskGrid()
POLE = MeromorphicSeries.pole(64)
MOB = QKind.MACOVEI_MOBIUS


def params(alpha=1.0, beta=1.0, **kw):
    return TheoremParams(LashinParams(alpha, beta), **kw)


class TestGenerator:
    def test_deterministic(self):
        a, b = random_sigma_function(42), random_sigma_function(42)
        assert np.array_equal(a.tail, b.tail) and a.constant == b.constant

    def test_seeds_differ(self):
        assert not np.array_equal(random_sigma_function(1).tail, random_sigma_function(2).tail)

    def test_small_amplitude_tends_to_pole(self):
        f = random_sigma_function(5, amplitude=1e-12)
        assert np.max(np.abs(f.tail)) < 1e-12 and f.is_strict

    def test_coefficient_envelope(self):
        amp = 0.2
        f = random_sigma_function(6, K=32, amplitude=amp)
        k = np.arange(1, 33)
        assert np.all(np.abs(f.tail) <= amp * 0.5 ** k + 1e-18)

    def test_near_one_on_outer_disk(self):
        f = random_sigma_function(7, amplitude=0.5)
        vals = z_lashin(f, 1.0, 1.0)
        assert np.max(np.abs(grid_values(vals, GRID) - 1)) < 0.5

    def test_amplitude_bounds(self):
        with pytest.raises(ValueError):
            random_sigma_function(1, amplitude=0.0)
        with pytest.raises(ValueError):
            random_sigma_function(1, amplitude=0.6)
        with pytest.raises(ValueError):
            random_sigma_function(1, K=4)

    def test_stuck_when_constant_too_large(self):
        with pytest.raises(GeneratorStuck):
            random_sigma_function(1, amplitude=0.1, constant_term=50.0)

    def test_default_sample_is_nonvanishing(self):
        f = random_sigma_function(2024, amplitude=0.1)
        prm = params(1.5, 2.0)
        assert nonvanishing_verdict(base_series(f, prm), GRID).holds
        assert nonvanishing_verdict(z_lashin(f, prm.alpha, prm.beta), GRID).holds


class TestClassify:
    def _hyp(self, *statuses):
        h = HypothesisReport()
        for i, s in enumerate(statuses):
            h.add(f"c{i}", Verdict(s, 1.0 if s is Status.HOLDS else -1.0, Witness(0j, 0j)))
        return h

    H = Verdict(Status.HOLDS, 1.0)
    F = Verdict(Status.FAILS, -1.0, Witness(0j, 0j))
    I = Verdict(Status.INCONCLUSIVE, 0.0)

    def test_counterexample_needs_everything(self):
        assert classify(self._hyp(Status.HOLDS), self.H, self.F) is Classification.COUNTEREXAMPLE

    def test_failed_hypothesis(self):
        assert classify(self._hyp(Status.HOLDS, Status.FAILS), self.H, self.F) is Classification.VACUOUS

    def test_inconclusive_hypothesis_is_vacuous(self):
        assert classify(self._hyp(Status.INCONCLUSIVE), self.H, self.F) is Classification.VACUOUS

    def test_failed_premise(self):
        assert classify(self._hyp(Status.HOLDS), self.F, self.F) is Classification.VACUOUS

    def test_inconclusive_never_refutes(self):
        assert classify(self._hyp(Status.HOLDS), self.I, self.F) is Classification.INCONCLUSIVE
        assert classify(self._hyp(Status.HOLDS), self.H, self.I) is Classification.INCONCLUSIVE

    def test_confirming(self):
        assert classify(self._hyp(Status.HOLDS), self.H, self.H) is Classification.CONFIRMING


class TestHypotheses:
    def test_quadratic_with_pole(self):
        spec = QFamilySpec(QKind.HALF_PLANE_POWER, rho=1.0)
        h = check_hypotheses("3.5", POLE, spec, params(eta=1, gamma=1, delta=0))
        entries = {e.cid: e.verdict for e in h.entries}
        assert entries["(3.17)"].holds
        assert entries["(3.18)"].margin == pytest.approx(1.0)

    def test_linear_with_exponential(self):
        spec = QFamilySpec(QKind.EXPONENTIAL, tau=1.0)
        h = check_hypotheses("3.8", POLE, spec, params(m=-1, ell=1, beta=1))
        v = {e.cid: e.verdict for e in h.entries}["(3.34)"]
        # Re(1 + z) on the outer circle
        assert v.holds and v.margin == pytest.approx(0.05)

    def test_sign_condition(self):
        spec = QFamilySpec(QKind.EXPONENTIAL, tau=0.1)
        h = check_hypotheses("4.3", POLE, spec, params(m=1, ell=1, beta=1))
        v = {e.cid: e.verdict for e in h.entries}["Re(m*beta/ell)<0"]
        assert v.fails and v.margin == pytest.approx(-1.0)

    def test_unknown_theorem(self):
        with pytest.raises(UsageError):
            check_hypotheses("9.9", POLE, QFamilySpec(QKind.EXPONENTIAL), params())

    @pytest.mark.parametrize("theorem", THEOREMS)
    def test_every_theorem_reports_conditions(self, theorem):
        t = trial_inputs(get_preset(default_preset(theorem)), 0, 1)
        ids = run_trial(t).hypotheses.ids
        assert ids and len(ids) == len(set(ids))


class TestRunTrial:
    def test_pole_fixed_point(self):
        p = get_preset("cor-3.2")
        t = TrialInput("3.1", -1, p.params, p.family)
        r = run_trial(t, GRID, f=POLE)
        assert r.classification is Classification.CONFIRMING

    def test_preset_seeded_trial(self):
        p = get_preset("cor-3.7")
        t = TrialInput("3.5", 7, p.params, p.family)
        assert run_trial(t).classification is Classification.CONFIRMING

    def test_shrunken_conclusion_is_refuted(self):
        summary = fuzz_theorem("3.8", "cor-3.10", 30, 1, mutate=True)
        assert summary.counterexamples
        r = summary.counterexamples[0]
        assert r.premise.holds and r.conclusion.fails and r.hypotheses.all_hold
        assert witness_reverifies(r)

    def test_degenerate_input_is_vacuous(self):
        p = get_preset("cor-3.3")
        # the as-written base starts at 1/lam, which falls below the floor here
        prm = TheoremParams(p.params.lashin, lam=1e9, mu=p.params.mu)
        r = run_trial(TrialInput("3.1", 1, prm, p.family, mode=BaseMode.AS_WRITTEN), GRID)
        assert r.classification is Classification.VACUOUS and r.error

    def test_report_round_trip(self):
        t = trial_inputs(get_preset("cor-3.6"), 3, 9)
        r = run_trial(t)
        d = r.to_dict()
        assert TrialInput.from_dict(json.loads(json.dumps(d["inputs"]))) == t
        assert d["params_digest"] == t.digest()


class TestSandwich:
    PRM = get_preset("thm-5.1").params
    Q1 = QFamilySpec(MOB, A=0.2)
    Q2 = QFamilySpec(MOB, A=0.8)

    def small_f(self):
        tail = random_sigma_function(3, 64, 0.02)
        return MeromorphicSeries(tail.tail, 0.6)

    def test_nested_mobius(self):
        r = sandwich_trial(self.small_f(), self.Q1, self.Q2, self.PRM)
        assert r.premise.holds and r.conclusion.holds
        assert r.classification is Classification.CONFIRMING

    def test_swapped_orientation(self):
        f = self.small_f()
        r = sandwich_trial(f, self.Q2, self.Q1, self.PRM)
        assert r.classification is Classification.VACUOUS
        # the lower end of the chain no longer sits inside p's range
        p = p_series(f, self.PRM)
        assert subordination_probe(q_family(self.Q2), p, GRID).fails

    def test_pole_middle_term(self):
        r = sandwich_trial(POLE, self.Q1, self.Q2, self.PRM)
        one = p_series(POLE, self.PRM)
        assert subordination_probe(one, q_family(self.Q2), GRID).holds
        # a non-constant q1 cannot be subordinate to a constant
        assert subordination_probe(q_family(self.Q1), one, GRID).fails
        assert r.classification is Classification.VACUOUS


class TestFuzz:
    def test_tiny_amplitude_single_trial(self):
        s = fuzz_theorem("3.1", "cor-3.3", 1, 5, amplitude=1e-9)
        assert s.counts["Confirming"] == 1

    def test_counts_sum(self):
        s = fuzz_theorem(None, "cor-3.6", 12, 2)
        assert sum(s.counts.values()) == 12 == len(s.classifications)

    def test_deterministic(self):
        a = fuzz_theorem("4.3", "cor-4.4", 8, 11).to_dict()
        b = fuzz_theorem("4.3", "cor-4.4", 8, 11).to_dict()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_thread_count_does_not_change_results(self, monkeypatch):
        monkeypatch.setenv("MEROSUB_THREADS", "1")
        serial = fuzz_theorem("3.1", "cor-3.2", 6, 4).to_dict()
        monkeypatch.setenv("MEROSUB_THREADS", "3")
        parallel = fuzz_theorem("3.1", "cor-3.2", 6, 4).to_dict()
        assert serial == parallel

    def test_preset_theorem_mismatch(self):
        with pytest.raises(UsageError):
            fuzz_theorem("3.5", "cor-3.2", 1, 1)

    def test_zero_trials(self):
        with pytest.raises(UsageError):
            fuzz_theorem("3.1", "cor-3.2", 0, 1)
