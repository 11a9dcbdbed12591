"""Monte Carlo experiment runner: configs, per-trial records, statistics and reports.

Config files are JSON objects whose keys are the fields of
:class:`ExperimentConfig`.  A run writes ``trials.csv`` (one row per trial,
columns in :data:`CSV_COLUMNS` order) and ``summary.json`` with the keys
``config``, ``stats``, ``hypotheses`` and ``assertions``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
from scipy.stats import binomtest

from .adversaries import adversary_factory, seed_cap, standard_model_simulation
from .oracles import Mode, OracleSession, make_offline_erased, random_erasures, rarest_symbol_erasures
from .properties import GenerationError, get_property, sample_far, sample_member
from .randomness import CountedBitSource, trial_generator, trial_seed_sequence
from .strings import RepetitionStructure, as_fraction
from .testers import SeededTester, Verdict, drive, make_tester

CONFIDENCE = 0.99
CSV_COLUMNS = (
    "trial_id",
    "verdict",
    "queries",
    "erased_seen",
    "bits_consumed",
    "corrupted_seen",
    "non_erased",
    "manipulations",
    "max_differing",
    "estimate",
)
# slack constant in the lifting hypothesis t <= delta * r / (q log2 q)^2
LIFTING_DELTA = 0.01


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    property: str
    tester: str
    n: int
    eps: float
    adversary: str = "null"
    mode: str = "standard"
    instance: str = "member"
    m: Optional[int] = None
    r: Optional[int] = None
    tau: Optional[int] = None
    t: int = 0
    alpha: Optional[float] = None
    erasure: str = "rarest"
    instance_eps: Optional[float] = None
    rbits: Optional[int] = None
    trials: int = 100
    seed: int = 0
    expect: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        try:
            mode = Mode(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mode {self.mode!r}; known: {[m.value for m in Mode]}") from None
        if not 0 < self.eps < 1:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if self.instance not in ("member", "far"):
            raise ConfigError(f"instance must be 'member' or 'far', got {self.instance!r}")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if mode.online and self.adversary == "null" and self.t:
            raise ConfigError("online modes with t > 0 need an adversary")
        if not mode.online and (self.t or self.adversary != "null"):
            raise ConfigError(f"{mode.value} runs take no online adversary or budget")
        if mode is Mode.OFFLINE_ERASE and self.alpha is None:
            raise ConfigError("offline-erase runs need alpha")
        if self.erasure not in ("rarest", "random", "none"):
            raise ConfigError(f"unknown erasure strategy {self.erasure!r}")
        if self.adversary == "seed-elim" and self.rbits is None:
            raise ConfigError("seed-elim runs need a finite rbits")
        unexpected = set(self.expect) - set(EXPECTATIONS)
        if unexpected:
            raise ConfigError(f"unknown expectations {sorted(unexpected)}; known: {sorted(EXPECTATIONS)}")

    def hypotheses(self) -> dict[str, bool]:
        """Budget hypotheses the guarantees for this configuration rely on, and whether they hold."""
        out = {}
        if self.mode == Mode.ONLINE_ERASE.value and self.tester.startswith("de"):
            tau = self.tau if self.tau is not None else _tau_from(self.tester)
            out["de_online_budget"] = self.t <= (0.01 * self.eps * math.sqrt(self.n) / tau) ** 2
        if self.mode == Mode.ONLINE_CORRUPT.value and self.tester.startswith("lifted:"):
            tester = _build_tester(self)
            q = tester.qf(tester.struct.m, tester.eps / 2)
            out["lifting_budget"] = self.t <= LIFTING_DELTA * tester.struct.r / (q * math.log2(q)) ** 2
        if self.adversary == "seed-elim":
            out["seed_space_enumerable"] = self.rbits is not None and self.rbits <= 24
        return out


def _tau_from(spec: str) -> int:
    for tok in spec.split(":")[1:]:
        if tok.startswith("tau="):
            return int(tok[4:])
    raise ConfigError(f"cannot find tau in {spec!r}")


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return ExperimentConfig.from_dict(data)


@dataclass
class TrialRecord:
    trial_id: int
    verdict: str
    queries: int
    erased_seen: int
    bits_consumed: int
    corrupted_seen: int
    non_erased: int
    manipulations: int
    max_differing: int
    estimate: str = ""

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class ExperimentStats:
    trials: int
    accepted: int
    acceptance_rate: float
    acceptance_ci: tuple[float, float]
    error_rate: float
    error_ci: tuple[float, float]
    erasure_hit_rate: float
    corruption_hit_rate: float
    mean_queries: float
    max_queries: int
    mean_bits: float
    max_bits: int
    max_non_erased: int
    max_differing: int
    mean_estimate: Optional[float] = None


def clopper_pearson(k: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="exact")
    return (float(ci.low), float(ci.high))


def aggregate(records: list[TrialRecord], instance: str) -> ExperimentStats:
    n = len(records)
    accepted = sum(r.verdict == Verdict.ACCEPT.value for r in records)
    decided = sum(r.verdict in (Verdict.ACCEPT.value, Verdict.REJECT.value) for r in records)
    wrong = accepted if instance == "far" else decided - accepted
    estimates = [float(Fraction(r.estimate)) for r in records if r.estimate != ""]

    def mean(vals):
        return float(np.mean(vals)) if len(vals) else 0.0

    return ExperimentStats(
        trials=n,
        accepted=accepted,
        acceptance_rate=accepted / decided if decided else 0.0,
        acceptance_ci=clopper_pearson(accepted, decided),
        error_rate=wrong / decided if decided else 0.0,
        error_ci=clopper_pearson(wrong, decided),
        erasure_hit_rate=sum(r.erased_seen > 0 for r in records) / n if n else 0.0,
        corruption_hit_rate=sum(r.corrupted_seen > 0 for r in records) / n if n else 0.0,
        mean_queries=mean([r.queries for r in records]),
        max_queries=max((r.queries for r in records), default=0),
        mean_bits=mean([r.bits_consumed for r in records]),
        max_bits=max((r.bits_consumed for r in records), default=0),
        max_non_erased=max((r.non_erased for r in records), default=0),
        max_differing=max((r.max_differing for r in records), default=0),
        mean_estimate=mean(estimates) if estimates else None,
    )


@dataclass
class Instance:
    x: np.ndarray
    erased: Any = None
    certified_distance: Optional[Fraction] = None


def _instance_generator(cfg: ExperimentConfig) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 2**32])))


def prepare_instance(cfg: ExperimentConfig) -> Instance:
    """Generate the input (certified when far) and, offline, its erasure pattern."""
    prop = get_property(cfg.property)
    rng = _instance_generator(cfg)
    target = as_fraction(cfg.instance_eps if cfg.instance_eps is not None else cfg.eps)
    if cfg.instance == "member":
        x = sample_member(prop, cfg.n, rng)
        dist = Fraction(0)
    else:
        x = sample_far(prop, cfg.n, target, rng)
        dist = prop.distance(x)
    erased = None
    if cfg.mode == Mode.OFFLINE_ERASE.value:
        if cfg.erasure == "rarest":
            idx = rarest_symbol_erasures(x, cfg.alpha)
        elif cfg.erasure == "random":
            idx = random_erasures(x, cfg.alpha, rng)
        else:
            idx = []
        erased = make_offline_erased(x, idx, cfg.alpha)
        if cfg.instance == "far":
            if prop.completion_distance is None:
                raise GenerationError(f"{prop.name} has no completion oracle; cannot certify an erased far instance")
            dist = prop.completion_distance(erased.cells)
            if dist < as_fraction(cfg.eps):
                raise GenerationError(f"closest completion is only {dist}-far, need {cfg.eps}")
    return Instance(x, erased, dist)


def _build_tester(cfg: ExperimentConfig) -> SeededTester:
    return make_tester(cfg.tester, n=cfg.n, eps=cfg.eps, m=cfg.m, r=cfg.r, tau=cfg.tau, rbits=cfg.rbits)


def _sigma(cfg: ExperimentConfig, x: np.ndarray) -> int:
    return max(get_property(cfg.property).alphabet(cfg.n), int(x.max()) + 1 if len(x) else 1)


def run_trials(cfg: ExperimentConfig, instance: Optional[Instance] = None) -> tuple[ExperimentStats, list[TrialRecord]]:
    cfg.validate()
    if instance is None:
        instance = prepare_instance(cfg)
    x = instance.x
    tester = _build_tester(cfg)
    mode = Mode(cfg.mode)
    struct = None
    if cfg.adversary == "greedy-block":
        struct = getattr(tester, "struct", None)
        if struct is None:
            m = cfg.m if cfg.m is not None else cfg.n // cfg.r
            struct = RepetitionStructure(m, cfg.n // m)
    sigma = _sigma(cfg, x)
    factory = adversary_factory(cfg.adversary, x=x, t=cfg.t, tester=tester, struct=struct, sigma=sigma)
    records = []
    for trial in range(cfg.trials):
        if cfg.rbits is not None:
            seed = int(trial_generator(cfg.seed, trial, 2).integers(0, 1 << cfg.rbits))
            bits = CountedBitSource.from_seed(seed, cfg.rbits)
        else:
            seed = None
            bits = CountedBitSource.stream(trial_seed_sequence(cfg.seed, trial, 0))
        if mode is Mode.OFFLINE_ERASE:
            session = OracleSession.offline(instance.erased)
        elif mode.online:
            adversary = factory(trial_generator(cfg.seed, trial, 1), witness_seed=seed)
            session = OracleSession(x, mode, cfg.t, adversary, sigma=sigma)
        else:
            session = OracleSession(x)
        result = drive(tester, session, bits)
        outcome = result.outcome
        records.append(TrialRecord(
            trial_id=trial,
            verdict=outcome.value if isinstance(outcome, Verdict) else "",
            queries=result.queries,
            erased_seen=session.erased_seen,
            bits_consumed=result.bits_consumed,
            corrupted_seen=session.corrupted_seen,
            non_erased=session.queries - session.erased_seen,
            manipulations=session.manipulated_count,
            max_differing=session.max_differing,
            estimate="" if isinstance(outcome, Verdict) else str(outcome),
        ))
    return aggregate(records, cfg.instance), records


# -- expectations (assertions checked after a run) ---------------------------------------------

EXPECTATIONS = {
    "acceptance_rate_min": lambda s, v: s.acceptance_rate >= v,
    "acceptance_rate_max": lambda s, v: s.acceptance_rate <= v,
    "error_rate_max": lambda s, v: s.error_rate <= v,
    "erasure_hit_rate_max": lambda s, v: s.erasure_hit_rate <= v,
    "max_queries_max": lambda s, v: s.max_queries <= v,
    "max_non_erased_max": lambda s, v: s.max_non_erased <= v,
}


def check_expectations(cfg: ExperimentConfig, stats: ExperimentStats) -> dict[str, bool]:
    return {name: bool(EXPECTATIONS[name](stats, value)) for name, value in cfg.expect.items()}


# -- reports -------------------------------------------------------------------------------------


def trials_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def read_trials_csv(text: str) -> list[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(TrialRecord(**{
            c: (row[c] if c in ("verdict", "estimate") else int(row[c])) for c in CSV_COLUMNS
        }))
    return out


def summary_dict(cfg: ExperimentConfig, stats: ExperimentStats) -> dict:
    return {
        "config": cfg.to_dict(),
        "stats": asdict(stats),
        "hypotheses": cfg.hypotheses(),
        "assertions": check_expectations(cfg, stats),
    }


def emit_report(cfg: ExperimentConfig, stats: ExperimentStats, records: list[TrialRecord], out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.csv").write_text(trials_csv(records))
    summary = summary_dict(cfg, stats)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# -- seed-elimination cap ------------------------------------------------------------------------


@dataclass
class SeedCapReport:
    tester: str
    rbits: int
    t: int
    runs: int
    cap: int
    max_non_erased: int
    passed: bool


def verify_seed_cap(tester: SeededTester, x, t: int, runs: int, master_seed: int = 0) -> SeedCapReport:
    """Run the seed-elimination simulation on random seeds; the true seed is checked every step."""
    if tester.rbits is None:
        raise ValueError("the tester needs a finite rbits")
    cap = seed_cap(tester.rbits, t)
    worst = 0
    for run in range(runs):
        seed = int(trial_generator(master_seed, run, 2).integers(0, 1 << tester.rbits))
        worst = max(worst, standard_model_simulation(tester, x, t, seed).real_queries)
    return SeedCapReport(tester.name, tester.rbits, t, runs, cap, worst, worst <= cap)
