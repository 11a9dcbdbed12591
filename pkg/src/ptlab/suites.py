"""Verification suites: each checks one guarantee at a fixed tolerance and reports pass/fail.

``run_suite(name)`` returns a :class:`SuiteResult`; ``ptlab verify <name>``
prints it and exits nonzero on failure.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .adversaries import MirrorAdversary, SoundnessViolation, seed_cap
from .bruteforce import oracle_check
from .harness import (
    ExperimentConfig,
    prepare_instance,
    run_trials,
    trials_csv,
    verify_seed_cap,
)
from .oracles import Mode, OracleSession
from .properties import get_property, sample_far, sample_member, ww_partner
from .randomness import CountedBitSource, trial_generator, trial_seed_sequence
from .strings import RepetitionStructure
from .testers import (
    DistinctElementsTester,
    RepTest,
    WWEstimator,
    ZeroStringTester,
    base_tester,
    drive,
    make_tester,
)

# binomial margin added to the theoretical error bounds of the two-sided suites
MARGIN = 0.03


@dataclass
class SuiteResult:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def summary(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.elapsed:.1f}s)"


def _check(lines: list[str], ok: bool, text: str) -> bool:
    lines.append(f"  {'ok ' if ok else 'BAD'} {text}")
    return ok


def _run(cfg: dict):
    config = ExperimentConfig.from_dict(cfg)
    instance = prepare_instance(config)
    stats, records = run_trials(config, instance)
    return config, instance, stats, records


def suite_oracle(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    start = time.perf_counter()
    strings = bad = 0
    for res in oracle_check(10, 3):
        strings += res.strings
        if res.mismatches:
            bad += 1
            _check(lines, False, f"{res.prop} n={res.n} sigma={res.sigma}: {res.mismatches} mismatches, e.g. {res.first_mismatch}")
    elapsed = time.perf_counter() - start
    ok = _check(lines, bad == 0, f"{strings} strings (n<=10, sigma<=3): exact distance equals BFS minimum")
    ok &= _check(lines, elapsed < 120, f"runtime {elapsed:.1f}s < 120s")
    return SuiteResult("oracle", ok, lines)


def suite_rep_complete(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    _, _, stats, _ = _run(dict(property="repetition-code:m=50:sigma=3", tester="rep-test", n=1000, m=50,
                               eps=0.25, instance="member", trials=1000, seed=seed))
    ok = _check(lines, stats.acceptance_rate == 1.0, f"members accepted in {stats.accepted}/{stats.trials} trials (need all)")
    return SuiteResult("rep-complete", ok, lines)


def suite_rep_sound(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    _, inst, stats, _ = _run(dict(property="repetition-code:m=50:sigma=2", tester="rep-test", n=1000, m=50,
                                  eps=0.25, instance="far", trials=10_000, seed=seed))
    bound = 0.75**8
    ok = _check(lines, inst.certified_distance >= Fraction(1, 4), f"instance certified {inst.certified_distance}-far")
    ok &= _check(lines, stats.acceptance_rate <= 0.13,
                 f"acceptance {stats.acceptance_rate:.4f} <= 0.13 (bound {bound:.4f}; 99% CI {stats.acceptance_ci[0]:.4f}-{stats.acceptance_ci[1]:.4f})")
    return SuiteResult("rep-sound", ok, lines)


LIFT_M = 64
LIFT_EPS = 0.5


def lifting_repetitions(t: int = 1, delta: float = 0.01) -> int:
    """Smallest r with t <= delta * r / (q log2 q)^2 for the zero-string base at eps/2."""
    qf = base_tester("zero-string").qf
    q = qf(LIFT_M, Fraction(LIFT_EPS) / 2)
    return math.ceil(t * (q * math.log2(q)) ** 2 / delta)


def suite_lifted_standard(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    r = 10_000
    ok = True
    common = dict(property=f"lift:zero-string:r={r}", tester="lifted:base=zero-string", n=LIFT_M * r, m=LIFT_M,
                  eps=LIFT_EPS, trials=2000, seed=seed)
    _, _, member, _ = _run(dict(common, instance="member"))
    ok &= _check(lines, member.acceptance_rate >= 0.8, f"members accepted at rate {member.acceptance_rate:.4f} >= 0.8")
    _, inst, far, _ = _run(dict(common, instance="far"))
    ok &= _check(lines, inst.certified_distance >= Fraction(1, 2), f"far instance certified {inst.certified_distance}-far")
    ok &= _check(lines, 1 - far.acceptance_rate >= 0.8, f"far instances rejected at rate {1 - far.acceptance_rate:.4f} >= 0.8")
    return SuiteResult("lifted-standard", ok, lines)


def suite_lifted_corrupt(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    r = lifting_repetitions()
    ok = True
    common = dict(property=f"lift:zero-string:r={r}", tester="lifted:base=zero-string", n=LIFT_M * r, m=LIFT_M,
                  eps=LIFT_EPS, mode="online-corrupt", t=1, adversary="greedy-block", trials=2000, seed=seed)
    for instance in ("member", "far"):
        cfg, inst, stats, _ = _run(dict(common, instance=instance))
        hyp = cfg.hypotheses()
        ok &= _check(lines, all(hyp.values()), f"r={r}: hypotheses {hyp}")
        ok &= _check(lines, stats.error_rate <= 1 / 3 + MARGIN,
                     f"{instance}: error {stats.error_rate:.4f} <= 1/3 + {MARGIN} "
                     f"(corrupted answers seen in {stats.corruption_hit_rate:.4f} of runs)")
    return SuiteResult("lifted-corrupt", ok, lines)


def suite_de_offline(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    common = dict(property="distinct-elements:tau=5", tester="de:tau=5", tau=5, n=10_000, eps=0.3, alpha=0.2,
                  mode="offline-erase", erasure="rarest", trials=2000, seed=seed)
    _, inst, member, _ = _run(dict(common, instance="member"))
    ok = _check(lines, member.acceptance_rate == 1.0, f"members accepted in {member.accepted}/{member.trials} trials")
    _, inst, far, _ = _run(dict(common, instance="far", instance_eps=0.5))
    ok &= _check(lines, inst.certified_distance >= Fraction(3, 10),
                 f"every completion of the erased far instance is {inst.certified_distance}-far "
                 f"({len(inst.erased.erased)} rarest cells erased)")
    ok &= _check(lines, 1 - far.acceptance_rate >= 0.7, f"far instance rejected at rate {1 - far.acceptance_rate:.4f} >= 0.7")
    return SuiteResult("de-offline", ok, lines)


def suite_de_online(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    n, eps, tau = 10**6, 0.5, 5
    t = math.floor((0.01 * eps * math.sqrt(n) / tau) ** 2)
    ok = _check(lines, t == 1, f"t = floor((0.01 eps sqrt(n)/tau)^2) = {t}")
    common = dict(property=f"distinct-elements:tau={tau}", tester=f"de:tau={tau}", tau=tau, n=n, eps=eps,
                  mode="online-erase", t=t, adversary="symbol-erase", trials=2000, seed=seed)
    for instance in ("member", "far"):
        _, _, stats, _ = _run(dict(common, instance=instance))
        ok &= _check(lines, stats.erasure_hit_rate <= 0.02, f"{instance}: erasure seen in {stats.erasure_hit_rate:.4f} of runs <= 0.02")
        ok &= _check(lines, stats.error_rate <= 1 / 3 + MARGIN, f"{instance}: error {stats.error_rate:.4f} <= 1/3 + {MARGIN}")
    return SuiteResult("de-online", ok, lines)


def seed_cap_testers(rbits: int):
    """Testers spending exactly their random bits on power-of-two ranges, with an input they never stop early on."""
    if rbits == 8:
        specs = [(ZeroStringTester(4, Fraction(1, 2)), [0] * 4),
                 (RepTest(RepetitionStructure(1, 2), Fraction(1, 2)), [1, 1]),
                 (DistinctElementsTester(2, 1, Fraction(3, 4), rounds=1), [0, 0])]
    elif rbits == 10:
        specs = [(ZeroStringTester(4, Fraction(2, 5)), [0] * 4),
                 (RepTest(RepetitionStructure(2, 2), Fraction(2, 3)), [0, 1, 0, 1]),
                 (DistinctElementsTester(2, 1, Fraction(3, 5), rounds=1), [0, 0])]
    elif rbits == 16:
        specs = [(ZeroStringTester(8, Fraction(2, 5)), [0] * 8),
                 (RepTest(RepetitionStructure(1, 2), Fraction(1, 4)), [1, 1]),
                 (DistinctElementsTester(2, 1, Fraction(3, 8), rounds=1), [0, 0])]
    else:
        raise ValueError(f"no seed-cap testers for rbits={rbits}")
    return [(tester.with_rbits(rbits), np.array(x)) for tester, x in specs]


def suite_seed_cap(seed: int = 0, runs: int = 1000) -> SuiteResult:
    lines: list[str] = []
    ok = True
    for rbits in (8, 10, 16):
        for tester, x in seed_cap_testers(rbits):
            for t in (1, 3, 7):
                try:
                    rep = verify_seed_cap(tester, x, t, runs, master_seed=seed)
                except SoundnessViolation as exc:
                    ok &= _check(lines, False, f"{tester.name} rbits={rbits} t={t}: {exc}")
                    continue
                ok &= _check(lines, rep.passed,
                             f"{tester.name} rbits={rbits} t={t}: max non-erased {rep.max_non_erased} <= {rep.cap} over {runs} runs")
    return SuiteResult("seed-cap", ok, lines)


def _mirror_cases(n: int):
    struct = RepetitionStructure(8, n // 8)
    return [
        ("zero-string", ZeroStringTester(n, Fraction(1, 4))),
        ("rep-test", RepTest(struct, Fraction(1, 4))),
        ("lifted", make_tester("lifted:base=zero-string", n=n, m=8, eps=Fraction(1, 2))),
        ("de", DistinctElementsTester(n, 1, Fraction(1, 2))),
        ("ww-estimate", WWEstimator(n, Fraction(1, 4))),
    ]


def suite_mirror(seed: int = 0, trials: int = 1000) -> SuiteResult:
    lines: list[str] = []
    n = 64
    prop = get_property("ww")
    rng = np.random.default_rng([seed, 9])
    inputs = {"member": sample_member(prop, n, rng), "far": sample_far(prop, n, Fraction(1, 4), rng)}
    ok = True
    for label, tester in _mirror_cases(n):
        for kind, x in inputs.items():
            violations = 0
            for trial in range(trials):
                session = OracleSession(x, Mode.ONLINE_ERASE, 1, MirrorAdversary())
                # bypasses ww_distance_estimate's guard on purpose: this shows why it exists
                drive(tester, session, CountedBitSource.stream(trial_seed_sequence(seed, trial)))
                present = {e.index for e in session.transcript if e.answer is not None}
                violations += any(ww_partner(p, n) in present for p in present)
            ok &= _check(lines, violations == 0, f"{label} on {kind}: {violations}/{trials} transcripts with both p and its mirror present")
    return SuiteResult("mirror", ok, lines)


def suite_ww_estimate(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    _, inst, stats, records = _run(dict(property="ww", tester="ww-estimate", n=10_000, eps=0.05, instance="far",
                                        instance_eps=0.15, trials=1000, seed=seed))
    ok = _check(lines, inst.certified_distance == Fraction(3, 20), f"planted distance {inst.certified_distance}")
    pairs = WWEstimator(10_000, 0.05).pairs
    ok &= _check(lines, pairs == 800, f"{pairs} pair samples")
    close = sum(abs(Fraction(r.estimate) - Fraction(3, 20)) <= Fraction(1, 20) for r in records)
    ok &= _check(lines, close / len(records) >= 0.93, f"|estimate - 0.15| <= 0.05 in {close}/{len(records)} trials (need >= 93%)")
    return SuiteResult("ww-estimate", ok, lines)


BUDGET_CONFIGS = [
    dict(property="ww", tester="zero-string", n=64, eps=0.25, instance="far", mode="online-erase", t=1,
         adversary="mirror", trials=300),
    dict(property="lift:zero-string:r=200", tester="lifted:base=zero-string", n=64 * 200, m=64, eps=0.5,
         instance="member", mode="online-corrupt", t=3, adversary="greedy-block", trials=300),
    dict(property="distinct-elements:tau=3", tester="de:tau=3", n=5000, eps=0.5, instance="far",
         mode="online-erase", t=4, adversary="symbol-erase", trials=300),
    dict(property="zero-string", tester="zero-string", n=16, eps=0.5, instance="member", mode="online-erase",
         t=3, adversary="seed-elim", rbits=16, trials=300),
]


def suite_budget_determinism(seed: int = 0) -> SuiteResult:
    lines: list[str] = []
    ok = True
    for cfg in BUDGET_CONFIGS:
        cfg = dict(cfg, seed=seed)
        _, _, stats, records = _run(cfg)
        t = cfg["t"]
        law = all(r.manipulations <= r.queries * t and r.max_differing <= r.queries * t for r in records)
        ok &= _check(lines, law, f"{cfg['adversary']} (t={t}): manipulated cells <= k*t in all {len(records)} runs "
                                 f"(max differing {stats.max_differing})")
        again = _run(cfg)[3]
        same = trials_csv(records) == trials_csv(again)
        ok &= _check(lines, same, f"{cfg['adversary']}: identical seed reproduces a bit-identical CSV")
    return SuiteResult("budget-determinism", ok, lines)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "oracle": suite_oracle,
    "rep-complete": suite_rep_complete,
    "rep-sound": suite_rep_sound,
    "lifted-standard": suite_lifted_standard,
    "lifted-corrupt": suite_lifted_corrupt,
    "de-offline": suite_de_offline,
    "de-online": suite_de_online,
    "seed-cap": suite_seed_cap,
    "mirror": suite_mirror,
    "ww-estimate": suite_ww_estimate,
    "budget-determinism": suite_budget_determinism,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    start = time.perf_counter()
    result = SUITES[name](seed=seed)
    result.elapsed = time.perf_counter() - start
    return result
