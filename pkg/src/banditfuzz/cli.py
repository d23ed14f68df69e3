"""Experiment runner: config parsing, multi-trial campaigns, CSV curves,
summary JSON and the speedup table."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .dut import format_bugs, format_mismatches, parse_bugs
from .fuzzer import ALGORITHMS, CampaignConfig, CampaignReport, run_campaign, speedup
from .testgen import write_test

log = logging.getLogger(__name__)

CSV_HEADER = ("t", "arm_id", "reward", "new_local", "new_global", "cum_cov", "reset", "bugs_detected", "reset_reason")
TABLE_COLUMNS = ("egreedy", "ucb", "exp3")
NOT_DETECTED = "—"

# config-file key -> CampaignConfig field
_KEYS = {
    "arms": "num_arms",
    "alpha": "alpha",
    "gamma": "gamma",
    "eta": "eta",
    "epsilon": "epsilon",
    "budget": "budget",
    "test_length": "test_length",
    "mutants": "mutants_per_interesting",
}
_FILE_KEYS = set(_KEYS) | {"algo", "bugs", "trials", "seed", "out", "jobs"}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ExperimentSpec:
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    base: CampaignConfig = field(default_factory=CampaignConfig)
    trials: int = 3
    seed: int = 0
    out: Path = Path("results")
    jobs: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")

    @property
    def configs(self) -> List[CampaignConfig]:
        return [replace(self.base, algorithm=a) for a in self.algorithms]

    def campaigns(self) -> List[CampaignConfig]:
        return [
            replace(cfg, rng_seed=self.seed + k)
            for cfg in self.configs
            for k in range(self.trials)
        ]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one-line diagnostics, no usage dump
        raise ConfigError("arguments", message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="banditfuzz", description="Bandit-scheduled fuzzing of the built-in toy core.")
    p.add_argument("--config", type=Path, help="JSON file with default values (flags override)")
    p.add_argument("--algo", help="comma list from egreedy,ucb,exp3,fifo (default: all four)")
    p.add_argument("--arms", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bugs", help='comma list from B1..B7, "all" or "none" (default: all)')
    p.add_argument("--out", type=Path)
    p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _check_range(key: str, value, lo=None, hi=None, lo_open=False):
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise ConfigError(key, f"out of range (got {value})")
    if hi is not None and value > hi:
        raise ConfigError(key, f"out of range (got {value})")


def _validate(values: Dict) -> None:
    checks = {
        "alpha": (0.0, 1.0, False),
        "epsilon": (0.0, 1.0, False),
        "eta": (0.0, 1.0, True),
        "arms": (1, None, False),
        "gamma": (1, None, False),
        "budget": (1, None, False),
        "trials": (1, None, False),
        "test_length": (1, None, False),
        "mutants": (1, None, False),
        "jobs": (0, None, False),
    }
    for key, (lo, hi, lo_open) in checks.items():
        if values.get(key) is not None:
            v = values[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(key, f"expected a number (got {v!r})")
            if isinstance(lo, int) and not isinstance(v, int):
                raise ConfigError(key, f"expected an integer (got {v!r})")
            if isinstance(v, float) and math.isnan(v):
                raise ConfigError(key, "expected a number (got nan)")
            _check_range(key, v, lo, hi, lo_open)


def parse_config(argv: Optional[Sequence[str]] = None) -> ExperimentSpec:
    ns = _parser().parse_args(argv)
    values: Dict = {}
    if ns.config is not None:
        try:
            loaded = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be a JSON object")
        unknown = sorted(set(loaded) - _FILE_KEYS)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        values.update(loaded)
    for key in _FILE_KEYS:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    _validate(values)

    algos = values.get("algo")
    if algos is None:
        algorithms = list(ALGORITHMS)
    else:
        algorithms = [a.strip() for a in (algos.split(",") if isinstance(algos, str) else algos)]
        bad = [a for a in algorithms if a not in ALGORITHMS]
        if bad or not algorithms:
            raise ConfigError("algo", f"expected egreedy, ucb, exp3 or fifo (got {algos!r})")
    try:
        bugs = parse_bugs(values.get("bugs", "all"))
    except ValueError as exc:
        raise ConfigError("bugs", str(exc)) from None

    kwargs = {_KEYS[k]: values[k] for k in _KEYS if k in values}
    try:
        base = CampaignConfig(bugs=bugs, **kwargs)
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None
    return ExperimentSpec(
        algorithms=algorithms,
        base=base,
        trials=values.get("trials", 3),
        seed=values.get("seed", 0),
        out=Path(values.get("out", "results")),
        jobs=values.get("jobs", 0),
    )


def _g(x: float) -> str:
    return format(x, ".6g")


def _num(x: Optional[float]) -> Optional[float]:
    if x is None or math.isinf(x) or math.isnan(x):
        return None
    return float(_g(x))


def write_curve(path: Path, report: CampaignReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.records:
            w.writerow(
                (r.t, r.arm_id, _g(r.reward), r.new_local, r.new_global, r.cum_cov,
                 int(r.reset), r.bugs_detected, r.reset_reason)
            )


def _median(values: Sequence[float]) -> float:
    return statistics.median(values)


def summarize(spec: ExperimentSpec, reports: Dict[str, List[CampaignReport]]) -> Dict:
    bugs = sorted(spec.base.bugs, key=lambda b: b.name)
    first = next(iter(reports.values()))[0]
    universe = first.universe_size
    out: Dict = {
        "budget": spec.base.budget,
        "bugs": format_bugs(spec.base.bugs),
        "seeds": [spec.seed + k for k in range(spec.trials)],
        "trials": spec.trials,
        "universe_size": universe,
        "algorithms": {},
    }
    medians: Dict[str, Dict[str, float]] = {}
    for algo, reps in reports.items():
        med = {
            b.name: _median([r.detections[b].index if b in r.detections else math.inf for r in reps])
            for b in bugs
        }
        medians[algo] = med
        cov = _median([r.final_coverage for r in reps])
        out["algorithms"][algo] = {
            "median_detection": {k: _num(v) for k, v in med.items()},
            "detected_trials": {b.name: sum(b in r.detections for r in reps) for b in bugs},
            "median_final_coverage": _num(cov),
            "median_final_coverage_pct": _num(100.0 * cov / universe),
            "median_resets": _num(_median([r.resets for r in reps])),
        }
    base = reports.get("fifo")
    if base is not None:
        for algo, reps in reports.items():
            entry = out["algorithms"][algo]
            entry["speedup_vs_fifo"] = {}
            for b in bugs:
                bm, tm = medians["fifo"][b.name], medians[algo][b.name]
                entry["speedup_vs_fifo"][b.name] = _num(bm / tm) if math.isfinite(bm) and math.isfinite(tm) else None
            pairs = [speedup(bb, tt) for bb, tt in zip(base, reps)]
            cs = [p.coverage_speedup for p in pairs if p.coverage_speedup is not None]
            entry["coverage_speedup_vs_fifo"] = _num(_median(cs)) if cs else None
            entry["coverage_increment_pp_vs_fifo"] = _num(_median([p.coverage_increment for p in pairs]))
    return out


def _fmt_speedup(x: Optional[float]) -> str:
    return NOT_DETECTED if x is None else f"{x:.2f}×"


def emit_table(summary: Dict) -> str:
    """One row per bug: FIFO median #tests, then per-algorithm speedups."""
    algos = summary["algorithms"]
    bug_names: List[str] = []
    for entry in algos.values():
        for name in entry["median_detection"]:
            if name not in bug_names:
                bug_names.append(name)
    cols = [c for c in TABLE_COLUMNS if c in algos]
    header = ["Bug", "FIFO #tests"] + cols
    rows = []
    for name in sorted(bug_names):
        fifo = algos.get("fifo", {}).get("median_detection", {}).get(name)
        row = [name, NOT_DETECTED if fifo is None else _g(fifo)]
        for c in cols:
            row.append(_fmt_speedup(algos[c].get("speedup_vs_fifo", {}).get(name)))
        rows.append(row)
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip() for r in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _run_one(config: CampaignConfig) -> CampaignReport:
    return run_campaign(config)


def _export_repro(out: Path, algo: str, trial: int, report: CampaignReport) -> None:
    repro = out / "repro"
    for bug, det in sorted(report.detections.items(), key=lambda kv: kv[0].name):
        stem = repro / f"{algo}_{trial}_{bug.name}"
        repro.mkdir(parents=True, exist_ok=True)
        write_test(stem.with_suffix(".bin"), det.test)
        stem.with_suffix(".txt").write_text(
            f"# {bug.name}: {bug.description}\n# detected at test {det.index}\n"
            + format_mismatches(det.mismatches),
            encoding="utf-8",
        )


def run_experiment(spec: ExperimentSpec) -> int:
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    campaigns = spec.campaigns()
    jobs = spec.jobs or os.cpu_count() or 1
    if jobs > 1 and len(campaigns) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(campaigns))) as pool:
            results = list(pool.map(_run_one, campaigns))
    else:
        results = [_run_one(c) for c in campaigns]

    reports: Dict[str, List[CampaignReport]] = {}
    for cfg, rep in zip(campaigns, results):
        trial = cfg.rng_seed - spec.seed
        reports.setdefault(cfg.algorithm, []).append(rep)
        write_curve(out / f"curve_{cfg.algorithm}_{trial}.csv", rep)
        _export_repro(out, cfg.algorithm, trial, rep)
        log.info("%s trial %d: coverage %d, %d bugs", cfg.algorithm, trial, rep.final_coverage, len(rep.detections))

    summary = summarize(spec, reports)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    table = emit_table(summary)
    (out / "table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        spec = parse_config(argv)
    except ConfigError as exc:
        print(f"banditfuzz: error: {exc}", file=sys.stderr)
        return 2
    args = list(sys.argv[1:] if argv is None else argv)
    verbose = "-v" in args or "--verbose" in args
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run_experiment(spec)
    except OSError as exc:
        print(f"banditfuzz: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
