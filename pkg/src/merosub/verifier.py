"""Implication trials for the subordination, superordination and sandwich theorems.

A trial fixes one function f, one parameter bundle and one dominant, then
checks three things in order:

1. every hypothesis the theorem states (as numeric verdicts),
2. the premise subordination,
3. the conclusion subordination.

Only a trial whose hypotheses and premise all hold can refute a theorem;
anything else is recorded as vacuous or inconclusive.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .disk import (
    DECISION_TOL,
    DiskGrid,
    DominantRegion,
    Status,
    Verdict,
    Witness,
    convex_probe,
    grid_values,
    meet,
    nonvanishing_verdict,
    real_part_verdict,
    reverify_outside,
    starlike_probe,
    subordination_probe,
    univalence_probe,
)
from .errors import GeneratorStuck, MerosubError, NumericDegeneracy, UsageError
from .forms import (
    BaseMode,
    Preset,
    QFamilySpec,
    QKind,
    RhsKind,
    TheoremParams,
    base_series,
    get_preset,
    hypothesis_value,
    k_series,
    mobius_scalar_condition,
    logderiv_form,
    log_derivative,
    p_series,
    phi_series,
    psi_series,
    q_family,
    rhs_builder,
    shrink_toward_one,
    THEOREM_DEFAULT_PRESET,
)
from .lashin import LashinParams, z_lashin
from .series import AnalyticSeries, MeromorphicSeries

log = logging.getLogger(__name__)

THEOREMS = ("3.1", "3.5", "3.8", "4.1", "4.3", "5.1", "5.2", "2.6")
SHRINK_FACTOR = 0.5
JITTER = 0.2
JITTER_RETRIES = 5
GENERATOR_DECAY = 0.5
GENERATOR_RETRIES = 10
# radius of the a_0 disk, relative to the amplitude, for extended-class suites
EXTENDED_CONSTANT_SCALE = 4.0


class Classification(enum.Enum):
    CONFIRMING = "Confirming"
    VACUOUS = "Vacuous"
    COUNTEREXAMPLE = "Counterexample"
    INCONCLUSIVE = "Inconclusive"


# --- random functions -----------------------------------------------------------


def random_sigma_function(seed: int, K: int = 64, amplitude: float = 0.1, constant_term: float = 0.0) -> MeromorphicSeries:
    """Seeded f = z^{-1} + sum a_k z^k with a_k = amplitude * c_k * 0.5^k, |c_k| <= 1.

    A positive ``constant_term`` adds a free a_0 drawn uniformly from the disk
    of that radius (the extended class).  A draw is kept only if
    sum |a_k| 0.95^{k+1} < 0.5, which keeps z P^a f within 0.5 of 1 on the
    0.95-disk for every alpha > 0.
    """
    if not 0 < amplitude <= 0.5:
        raise ValueError("amplitude must lie in (0, 0.5]")
    if K < 8:
        raise ValueError("order must be >= 8")
    if constant_term < 0:
        raise ValueError("constant_term radius must be >= 0")
    rng = np.random.default_rng(seed)
    k = np.arange(0, K + 1)
    scale = amplitude * GENERATOR_DECAY**k
    scale[0] = constant_term
    for _ in range(GENERATOR_RETRIES):
        radius = np.sqrt(rng.random(k.size))
        angle = 2 * np.pi * rng.random(k.size)
        a = scale * radius * np.exp(1j * angle)
        if np.sum(np.abs(a) * 0.95 ** (k + 1)) < 0.5:
            return MeromorphicSeries(a[1:], a[0])
    raise GeneratorStuck(f"no admissible draw in {GENERATOR_RETRIES} attempts at amplitude {amplitude}")


def random_schwarz(rng: np.random.Generator, order: int = 16, strength: float = 0.9) -> AnalyticSeries:
    """w(z) = z * b(z) with sum |b_k| <= strength < 1, so |w(z)| < |z|."""
    b = rng.normal(size=order) + 1j * rng.normal(size=order)
    b *= 0.5 ** np.arange(order)
    b *= strength * rng.uniform(0.2, 1.0) / np.abs(b).sum()
    return AnalyticSeries(np.concatenate([[0.0], b]))


# --- reports --------------------------------------------------------------------


@dataclass
class ConditionEntry:
    cid: str
    verdict: Verdict

    def to_dict(self) -> dict:
        w = self.verdict.witness
        return {
            "condition": self.cid,
            "status": self.verdict.status.label,
            "margin": float(self.verdict.margin),
            "argmin": [w.z.real, w.z.imag] if w is not None else None,
            "note": self.verdict.note,
        }


@dataclass
class HypothesisReport:
    entries: list[ConditionEntry] = field(default_factory=list)

    def add(self, cid: str, verdict: Verdict) -> Verdict:
        self.entries.append(ConditionEntry(cid, verdict))
        return verdict

    @property
    def all_hold(self) -> bool:
        return all(e.verdict.holds for e in self.entries)

    @property
    def ids(self) -> list[str]:
        return [e.cid for e in self.entries]

    def first_failure(self) -> Optional[ConditionEntry]:
        for e in self.entries:
            if not e.verdict.holds:
                return e
        return None

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


@dataclass
class TrialInput:
    """Everything needed to rebuild a trial from scratch."""

    theorem: str
    f_seed: int
    params: TheoremParams
    family: QFamilySpec
    family_lower: Optional[QFamilySpec] = None
    amplitude: float = 0.1
    order: int = 64
    extended: bool = False
    mode: BaseMode = BaseMode.CONVEX
    mutate: bool = False
    condition_override: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "f_seed": int(self.f_seed),
            "amplitude": self.amplitude,
            "order": self.order,
            "extended_class": self.extended,
            "mode": self.mode.value,
            "mutate_conclusion": self.mutate,
            "params": self.params.to_dict(),
            "family": self.family.to_dict(),
        }
        if self.family_lower is not None:
            out["family_lower"] = self.family_lower.to_dict()
        if self.condition_override:
            out["condition_override"] = self.condition_override
        return out

    @classmethod
    def from_dict(cls, d: dict) -> TrialInput:
        lower = d.get("family_lower")
        return cls(
            theorem=d["theorem"],
            f_seed=d["f_seed"],
            params=TheoremParams.from_dict(d["params"]),
            family=QFamilySpec.from_dict(d["family"]),
            family_lower=QFamilySpec.from_dict(lower) if lower else None,
            amplitude=d["amplitude"],
            order=d["order"],
            extended=d["extended_class"],
            mode=BaseMode(d["mode"]),
            mutate=d["mutate_conclusion"],
            condition_override=d.get("condition_override"),
        )

    def function(self) -> MeromorphicSeries:
        radius = EXTENDED_CONSTANT_SCALE * self.amplitude if self.extended else 0.0
        return random_sigma_function(self.f_seed, self.order, self.amplitude, radius)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class TrialReport:
    inputs: TrialInput
    hypotheses: HypothesisReport
    premise: Optional[Verdict]
    conclusion: Optional[Verdict]
    classification: Classification
    error: str = ""
    trial_index: Optional[int] = None

    @property
    def theorem(self) -> str:
        return self.inputs.theorem

    @property
    def seed(self) -> int:
        return self.inputs.f_seed

    def to_dict(self) -> dict:
        out = {}
        if self.trial_index is not None:
            out["trial_index"] = self.trial_index
        out.update({
            "theorem": self.theorem,
            "seed": int(self.seed),
            "params_digest": self.inputs.digest(),
            "inputs": self.inputs.to_dict(),
            "hypotheses": self.hypotheses.to_list(),
            "premise": self.premise.to_dict() if self.premise else None,
            "conclusion": self.conclusion.to_dict() if self.conclusion else None,
            "classification": self.classification.value,
            "error": self.error,
        })
        if self.classification is Classification.COUNTEREXAMPLE:
            out["witness_sides"] = witness_sides(self)
        return out


def classify(hyp: HypothesisReport, premise: Optional[Verdict], conclusion: Optional[Verdict]) -> Classification:
    if not hyp.all_hold or premise is None or premise.fails:
        return Classification.VACUOUS
    if premise.status is Status.INCONCLUSIVE or conclusion is None or conclusion.status is Status.INCONCLUSIVE:
        return Classification.INCONCLUSIVE
    if conclusion.fails:
        return Classification.COUNTEREXAMPLE
    return Classification.CONFIRMING


# --- per-theorem checks -----------------------------------------------------------


def _equality(value: complex, target: complex, tol: float = 1e-12) -> Verdict:
    diff = abs(complex(value) - target)
    if diff <= tol:
        return Verdict(Status.HOLDS, 1.0, note="equality within 1e-12")
    return Verdict(Status.FAILS, -diff, Witness(0j, complex(value)))


def _scalar(margin: float, note: str) -> Verdict:
    return Verdict.from_margin(float(margin), Witness(0j, complex(margin)), note=note)


def _dominated(sub: AnalyticSeries, dom: AnalyticSeries, grid: DiskGrid, check_dominant: bool = True) -> Verdict:
    """sub subordinate to dom, refusing to decide when dom is not univalent."""
    if check_dominant:
        uni = univalence_probe(dom, grid)
        if not uni.holds:
            return Verdict(Status.INCONCLUSIVE, 0.0, uni.witness, uni.band, "dominant not univalent on the grid: " + uni.note)
    return subordination_probe(sub, dom, grid)


def _real_condition(hyp: HypothesisReport, cid: str, kind: str, q: AnalyticSeries, prm: TheoremParams, grid: DiskGrid, spec=None) -> None:
    integrand, bound = hypothesis_value(kind, q, prm, spec)
    hyp.add(cid, real_part_verdict(integrand, grid, bound))


def _maybe_shrink(s: AnalyticSeries, mutate: bool) -> AnalyticSeries:
    return shrink_toward_one(s, SHRINK_FACTOR) if mutate else s


def _logderiv_subordination(t: TrialInput, f, grid, hyp):
    prm = t.params
    q = q_family(t.family)
    hyp.add("q(0)=1", _equality(q.coeffs[0], 1.0))
    hyp.add("q-univalent", univalence_probe(q, grid))
    hyp.add("q-nonvanishing", nonvanishing_verdict(q, grid))
    hyp.add("(3.1)", nonvanishing_verdict(base_series(f, prm, t.mode), grid))
    hyp.add("zq'/q-starlike", starlike_probe(log_derivative(q), grid))
    _real_condition(hyp, "(3.2)", "(3.2)", q, prm, grid)
    if not hyp.all_hold:
        return None, None
    premise = _dominated(logderiv_form(f, prm, t.mode), rhs_builder(RhsKind.LOG_DERIV, q, prm), grid)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(k_series(f, prm, t.mode), _maybe_shrink(q, t.mutate), grid)
    return premise, conclusion


def _quadratic_subordination(t: TrialInput, f, grid, hyp):
    prm = t.params
    q = q_family(t.family)
    hyp.add("q(0)=1", _equality(q.coeffs[0], 1.0))
    hyp.add("q-convex", convex_probe(q, grid))
    hyp.add("gamma>0", _scalar(prm.gamma.real if prm.gamma.imag == 0 else -abs(prm.gamma.imag), "gamma real and positive"))
    hyp.add("(3.17)", nonvanishing_verdict(z_lashin(f, prm.alpha, prm.beta), grid))
    _real_condition(hyp, "(3.18)", "(3.18)", q, prm, grid)
    if not hyp.all_hold:
        return None, None
    premise = _dominated(psi_series(f, prm), rhs_builder(RhsKind.QUADRATIC, q, prm), grid)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(p_series(f, prm), _maybe_shrink(q, t.mutate), grid)
    return premise, conclusion


def _linear_subordination(t: TrialInput, f, grid, hyp):
    prm = t.params
    q = q_family(t.family)
    hyp.add("q(0)=1", _equality(q.coeffs[0], 1.0))
    hyp.add("q-univalent", univalence_probe(q, grid))
    cid = t.condition_override or "(3.34)"
    _real_condition(hyp, cid, cid, q, prm, grid, t.family)
    if not hyp.all_hold:
        return None, None
    premise = _dominated(phi_series(f, prm, t.mode), rhs_builder(RhsKind.LINEAR, q, prm), grid)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(k_series(f, prm, t.mode), _maybe_shrink(q, t.mutate), grid)
    return premise, conclusion


def _quadratic_superordination(t: TrialInput, f, grid, hyp):
    prm = t.params
    q = q_family(t.family)
    hyp.add("q(0)=1", _equality(q.coeffs[0], 1.0))
    hyp.add("q-convex", convex_probe(q, grid))
    hyp.add("gamma>0", _scalar(prm.gamma.real if prm.gamma.imag == 0 else -abs(prm.gamma.imag), "gamma real and positive"))
    _real_condition(hyp, "(4.1)", "(4.1)", q, prm, grid)
    hyp.add("(4.2)", nonvanishing_verdict(z_lashin(f, prm.alpha, prm.beta), grid))
    p = p_series(f, prm)
    hyp.add("(4.3)", univalence_probe(p, grid))
    psi = psi_series(f, prm)
    hyp.add("psi-univalent", univalence_probe(psi, grid))
    if not hyp.all_hold:
        return None, None
    premise = _dominated(rhs_builder(RhsKind.QUADRATIC, q, prm), psi, grid, check_dominant=False)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(q, _maybe_shrink(p, t.mutate), grid)
    return premise, conclusion


def _linear_superordination(t: TrialInput, f, grid, hyp):
    prm = t.params
    q = q_family(t.family)
    hyp.add("q(0)=1", _equality(q.coeffs[0], 1.0))
    hyp.add("q-convex", convex_probe(q, grid))
    hyp.add("Re(m*beta/ell)<0", _scalar(-(prm.m * prm.beta / prm.ell).real, "Re(m beta / ell) < 0"))
    hyp.add("(4.13)", nonvanishing_verdict(base_series(f, prm, t.mode), grid))
    k = k_series(f, prm, t.mode)
    hyp.add("(4.14)", univalence_probe(k, grid))
    phi = phi_series(f, prm, t.mode)
    hyp.add("Phi-univalent", univalence_probe(phi, grid))
    if not hyp.all_hold:
        return None, None
    premise = _dominated(rhs_builder(RhsKind.LINEAR, q, prm), phi, grid, check_dominant=False)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(q, _maybe_shrink(k, t.mutate), grid)
    return premise, conclusion


def _quadratic_sandwich(t: TrialInput, f, grid, hyp):
    prm = t.params
    q1 = q_family(t.family_lower)
    q2 = q_family(t.family)
    hyp.add("q1(0)=1", _equality(q1.coeffs[0], 1.0))
    hyp.add("q1-convex", convex_probe(q1, grid))
    _real_condition(hyp, "(4.1)[q1]", "(4.1)", q1, prm, grid)
    hyp.add("q2(0)=1", _equality(q2.coeffs[0], 1.0))
    hyp.add("q2-univalent", univalence_probe(q2, grid))
    _real_condition(hyp, "(3.18)[q2]", "(3.18)", q2, prm, grid)
    hyp.add("gamma>0", _scalar(prm.gamma.real if prm.gamma.imag == 0 else -abs(prm.gamma.imag), "gamma real and positive"))
    hyp.add("(5.1)", nonvanishing_verdict(z_lashin(f, prm.alpha, prm.beta), grid))
    p = p_series(f, prm)
    hyp.add("(5.2)", univalence_probe(p, grid))
    psi = psi_series(f, prm)
    hyp.add("psi-univalent", univalence_probe(psi, grid))
    if not hyp.all_hold:
        return None, None
    lower = _dominated(rhs_builder(RhsKind.QUADRATIC, q1, prm), psi, grid, check_dominant=False)
    upper = _dominated(psi, rhs_builder(RhsKind.QUADRATIC, q2, prm), grid)
    premise = meet([lower, upper])
    if not premise.holds:
        return premise, None
    conclusion = meet([
        subordination_probe(q1, _maybe_shrink(p, t.mutate), grid),
        subordination_probe(p, _maybe_shrink(q2, t.mutate), grid),
    ])
    return premise, conclusion


def _linear_sandwich(t: TrialInput, f, grid, hyp):
    prm = t.params
    q1 = q_family(t.family_lower)
    q2 = q_family(t.family)
    hyp.add("q1(0)=1", _equality(q1.coeffs[0], 1.0))
    hyp.add("q1-convex", convex_probe(q1, grid))
    hyp.add("q2(0)=1", _equality(q2.coeffs[0], 1.0))
    hyp.add("q2-univalent", univalence_probe(q2, grid))
    hyp.add("Re(m*beta/ell)<0", _scalar(-(prm.m * prm.beta / prm.ell).real, "Re(m beta / ell) < 0"))
    _real_condition(hyp, "(3.34)[q2]", "(3.34)", q2, prm, grid)
    k = k_series(f, prm, t.mode)
    hyp.add("(5.5)", univalence_probe(k, grid))
    phi = phi_series(f, prm, t.mode)
    hyp.add("Phi-univalent", univalence_probe(phi, grid))
    if not hyp.all_hold:
        return None, None
    lower = _dominated(rhs_builder(RhsKind.LINEAR, q1, prm), phi, grid, check_dominant=False)
    upper = _dominated(phi, rhs_builder(RhsKind.LINEAR, q2, prm), grid)
    premise = meet([lower, upper])
    if not premise.holds:
        return premise, None
    conclusion = meet([
        subordination_probe(q1, _maybe_shrink(k, t.mutate), grid),
        subordination_probe(k, _maybe_shrink(q2, t.mutate), grid),
    ])
    return premise, conclusion


def _mobius_implication(t: TrialInput, f, grid, hyp):
    prm = t.params
    spec = t.family
    if spec.kind is not QKind.MACOVEI_MOBIUS:
        raise UsageError("the Macovei lemma needs the Mobius family")
    q = q_family(spec)
    hyp.add("q-univalent", univalence_probe(q, grid))
    hyp.add("sigma-in-(0,1]", _scalar(min(prm.sigma, 1.0 - prm.sigma + 1.0), "0 < sigma <= 1"))
    lemma_ab = min(prm.delta.real, prm.eta.real) if prm.delta.imag == 0 and prm.eta.imag == 0 else -1.0
    hyp.add("alpha,beta>0", _scalar(lemma_ab, "lemma alpha (delta) and beta (eta) positive"))
    hyp.add("(2.7)", _scalar(mobius_scalar_condition(prm, spec.A), "scalar condition, repeated factor kept"))
    p = p_series(f, prm)
    hyp.add("p-univalent", univalence_probe(p, grid))
    hyp.add("p(0)=1", _equality(p.coeffs[0], 1.0))
    if not hyp.all_hold:
        return None, None
    # the lemma's sigma plays the role of gamma in the quadratic transform
    lemma_prm = replace(prm, gamma=complex(prm.sigma))
    premise = _dominated(psi_series(f, lemma_prm), rhs_builder(RhsKind.MACOVEI, q, prm), grid)
    if not premise.holds:
        return premise, None
    conclusion = subordination_probe(p, _maybe_shrink(q, t.mutate), grid)
    return premise, conclusion


_RUNNERS: dict[str, Callable] = {
    "3.1": _logderiv_subordination,
    "3.5": _quadratic_subordination,
    "3.8": _linear_subordination,
    "4.1": _quadratic_superordination,
    "4.3": _linear_superordination,
    "5.1": _quadratic_sandwich,
    "5.2": _linear_sandwich,
    "2.6": _mobius_implication,
}


def check_theorem_id(theorem: str) -> str:
    if theorem not in _RUNNERS:
        raise UsageError(f"unknown theorem {theorem!r}; known: {', '.join(THEOREMS)}")
    return theorem


def run_trial(t: TrialInput, grid: DiskGrid = DiskGrid(), f: Optional[MeromorphicSeries] = None) -> TrialReport:
    runner = _RUNNERS[check_theorem_id(t.theorem)]
    if t.theorem in ("5.1", "5.2") and t.family_lower is None:
        raise UsageError("sandwich trials need a lower family")
    hyp = HypothesisReport()
    premise = conclusion = None
    error = ""
    try:
        if f is None:
            f = t.function()
        premise, conclusion = runner(t, f, grid, hyp)
    except NumericDegeneracy as exc:
        error = f"{type(exc).__name__}: {exc}"
        hyp.add("arithmetic", Verdict(Status.FAILS, -1.0, Witness(0j, 0j), note=error))
    return TrialReport(t, hyp, premise, conclusion, classify(hyp, premise, conclusion), error)


def sandwich_trial(f: MeromorphicSeries, q1: QFamilySpec, q2: QFamilySpec, prm: TheoremParams, grid: DiskGrid = DiskGrid(), theorem: str = "5.1", **kw) -> TrialReport:
    t = TrialInput(theorem, kw.pop("f_seed", -1), prm, q2, q1, **kw)
    return run_trial(t, grid, f=f)


def check_hypotheses(theorem: str, f: MeromorphicSeries, spec: QFamilySpec, prm: TheoremParams, grid: DiskGrid = DiskGrid(), **kw) -> HypothesisReport:
    return run_trial(TrialInput(check_theorem_id(theorem), -1, prm, spec, **kw), grid, f=f).hypotheses


def witness_reverifies(report: TrialReport, grid: DiskGrid = DiskGrid()) -> bool:
    """Rebuild a counterexample from its inputs and recheck the violation.

    The rerun must reproduce Holds / Holds / Fails, and the failing sample
    must lie outside the dominant's outer curve by an independent winding
    number count.
    """
    rerun = run_trial(report.inputs, grid)
    if rerun.classification is not Classification.COUNTEREXAMPLE:
        return False
    w = rerun.conclusion.witness
    if w is None or w != report.conclusion.witness:
        return False
    t = report.inputs
    f = t.function()
    prm = t.params
    side = _conclusion_dominants(t, f, prm)
    return any(reverify_outside(dom, w, grid, value=complex(sub(w.z))) for sub, dom in side)


def witness_sides(report: TrialReport) -> list[dict]:
    """Subordinate and dominant values at the failing conclusion point."""
    w = report.conclusion.witness
    t = report.inputs
    out = []
    for sub, dom in _conclusion_dominants(t, t.function(), t.params):
        out.append({
            "z": [w.z.real, w.z.imag],
            "subordinate": _pair(sub(w.z)),
            "dominant": _pair(dom(w.z)),
        })
    return out


def _pair(c) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def _conclusion_dominants(t: TrialInput, f, prm) -> list[tuple[AnalyticSeries, AnalyticSeries]]:
    """(subordinate, dominant) pairs of the conclusion, mutation applied."""
    if t.theorem in ("3.1", "3.8"):
        return [(k_series(f, prm, t.mode), _maybe_shrink(q_family(t.family), t.mutate))]
    if t.theorem in ("3.5", "2.6"):
        return [(p_series(f, prm), _maybe_shrink(q_family(t.family), t.mutate))]
    if t.theorem == "4.1":
        return [(q_family(t.family), _maybe_shrink(p_series(f, prm), t.mutate))]
    if t.theorem == "4.3":
        return [(q_family(t.family), _maybe_shrink(k_series(f, prm, t.mode), t.mutate))]
    mid = p_series(f, prm) if t.theorem == "5.1" else k_series(f, prm, t.mode)
    return [
        (q_family(t.family_lower), _maybe_shrink(mid, t.mutate)),
        (mid, _maybe_shrink(q_family(t.family), t.mutate)),
    ]


# --- jitter and fuzzing -------------------------------------------------------------

_PARAM_FIELDS = ("lam", "mu", "gamma", "eta", "delta", "m", "ell")


def _factor(rng: np.random.Generator) -> float:
    return 1.0 + rng.uniform(-JITTER, JITTER)


def jitter(preset: Preset, rng: np.random.Generator) -> tuple[TheoremParams, QFamilySpec, Optional[QFamilySpec]]:
    """Multiplicative (1 + u), |u| <= 0.2, on every real-valued unpinned parameter."""
    pinned = preset.pinned
    prm = preset.params
    alpha = prm.alpha * (_factor(rng) if "alpha" not in pinned else 1.0)
    beta = prm.beta * (_factor(rng) if "beta" not in pinned else 1.0)
    kw = {}
    for name in _PARAM_FIELDS:
        v = getattr(prm, name)
        u = _factor(rng)
        if name not in pinned and v.imag == 0 and v != 0:
            v = complex(v.real * u)
        kw[name] = v
    u = _factor(rng)
    sigma = prm.sigma if "sigma" in pinned else min(1.0, prm.sigma * u)
    params = TheoremParams(LashinParams(alpha, beta), sigma=sigma, **kw)
    return params, _jitter_family(preset.family, pinned, rng), (
        _jitter_family(preset.family_lower, pinned, rng) if preset.family_lower else None
    )


def _jitter_family(spec: QFamilySpec, pinned, rng: np.random.Generator) -> QFamilySpec:
    u = [_factor(rng) for _ in range(4)]
    tau, rho, A, B = spec.tau, spec.rho, spec.A, spec.B
    if spec.kind is QKind.EXPONENTIAL and "tau" not in pinned and tau.imag == 0:
        tau = complex(max(-1.0, min(1.0, tau.real * u[0])))
    if spec.kind is QKind.HALF_PLANE_POWER and "rho" not in pinned:
        rho = min(1.0, rho * u[1])
    if spec.kind is QKind.MACOVEI_MOBIUS and "A" not in pinned:
        A = max(-0.99, min(0.99, A * u[2]))
    if spec.kind is QKind.JANOWSKI:
        if "A" not in pinned:
            A = max(-1.0, min(1.0, A * u[2]))
        if "B" not in pinned:
            B = max(-1.0, min(1.0, B * u[3]))
        if B >= A:
            B = spec.B
            A = spec.A
    return replace(spec, tau=tau, rho=rho, A=A, B=B)


@dataclass
class FuzzSummary:
    theorem: str
    preset: str
    trials: int
    seed: int
    counts: dict
    counterexamples: list[TrialReport]
    classifications: str
    wall_time: float = 0.0
    examples: dict = field(default_factory=dict)

    @property
    def vacuous_rate(self) -> float:
        return self.counts[Classification.VACUOUS.value] / self.trials

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "preset": self.preset,
            "trials": self.trials,
            "seed": self.seed,
            "counts": dict(self.counts),
            "vacuous_rate": self.vacuous_rate,
            "classifications": self.classifications,
            "counterexamples": [r.to_dict() for r in self.counterexamples],
            "first_by_class": self.examples,
        }


_LETTER = {
    Classification.CONFIRMING: "C",
    Classification.VACUOUS: "V",
    Classification.COUNTEREXAMPLE: "X",
    Classification.INCONCLUSIVE: "I",
}


def trial_inputs(preset: Preset, index: int, seed: int, amplitude: float = 0.1, order: int = 64,
                 mode: BaseMode = BaseMode.CONVEX, mutate: bool = False, grid: DiskGrid = DiskGrid()) -> TrialInput:
    """Inputs of trial ``index`` of a fuzz run; a pure function of its arguments."""
    ss = np.random.SeedSequence([seed, index])
    f_seed = int(ss.generate_state(1, dtype=np.uint32)[0])
    rng = np.random.default_rng(np.random.SeedSequence([seed, index, 1]))
    t = None
    for _ in range(JITTER_RETRIES):
        params, family, lower = jitter(preset, rng)
        t = TrialInput(preset.theorem, f_seed, params, family, lower, amplitude, order,
                       preset.extended_class, mode, mutate, preset.condition_override)
        if not _q_margins_borderline(t, grid):
            break
    return t


def _q_margins_borderline(t: TrialInput, grid: DiskGrid) -> bool:
    """True when an f-independent real-part hypothesis lands in the inconclusive band."""
    kinds = {"3.1": ["(3.2)"], "3.5": ["(3.18)"], "3.8": [t.condition_override or "(3.34)"], "4.1": ["(4.1)"]}
    try:
        q = q_family(t.family)
        for kind in kinds.get(t.theorem, []):
            integrand, bound = hypothesis_value(kind, q, t.params, t.family)
            v = real_part_verdict(integrand, grid, bound)
            if v.status is Status.INCONCLUSIVE:
                return True
    except MerosubError:
        return False
    return False


def _threads() -> int:
    raw = os.environ.get("MEROSUB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def fuzz_theorem(theorem: Optional[str], preset: str | Preset, trials: int, seed: int, grid: DiskGrid = DiskGrid(),
                 amplitude: float = 0.1, order: int = 64, mode: BaseMode = BaseMode.CONVEX,
                 mutate: bool = False) -> FuzzSummary:
    if trials < 1:
        raise UsageError("trials must be >= 1")
    if not isinstance(preset, Preset):
        preset = get_preset(preset)
    if theorem is not None and check_theorem_id(theorem) != preset.theorem:
        raise UsageError(f"preset {preset.name} belongs to theorem {preset.theorem}, not {theorem}")
    start = time.perf_counter()

    def one(i: int) -> TrialReport:
        t = trial_inputs(preset, i, seed, amplitude, order, mode, mutate, grid)
        report = run_trial(t, grid)
        report.trial_index = i
        return report

    workers = min(_threads(), trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(one, range(trials)))
    else:
        reports = [one(i) for i in range(trials)]

    counts = {c.value: 0 for c in Classification}
    examples = {}
    for r in reports:
        counts[r.classification.value] += 1
        examples.setdefault(r.classification.value, r.trial_index)
    summary = FuzzSummary(
        theorem=preset.theorem,
        preset=preset.name,
        trials=trials,
        seed=seed,
        counts=counts,
        counterexamples=[r for r in reports if r.classification is Classification.COUNTEREXAMPLE],
        classifications="".join(_LETTER[r.classification] for r in reports),
        wall_time=time.perf_counter() - start,
        examples=examples,
    )
    log.info("fuzz %s/%s: %s in %.1fs", preset.theorem, preset.name, counts, summary.wall_time)
    return summary


def default_preset(theorem: str) -> str:
    return THEOREM_DEFAULT_PRESET[check_theorem_id(theorem)]
