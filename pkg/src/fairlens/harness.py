"""Experiment orchestration: audits, reproductions, the conjecture table.

A run simulates the portfolio model, prices it, applies the three
statistical checkers, pairs each with the analytic verdict for the same
(rho1, rho2), and emits a CSV/JSON report.  Reports are deterministic
functions of their configuration (the RFC 3339 timestamp is excluded
from determinism comparisons).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import fairness, model, oracles
from .errors import ConfigError, EmptyBin, TooFewSamples
from .fairness import (HOLDS, INCONCLUSIVE, VIOLATED, Axiom, FairnessVerdict,
                       TestConfig)
from .oracles import MomentEstimate

VERSION = "0.1.0"

FLOAT_FMT = "%.17g"

CSV_HEADER = ("axiom,verdict_statistical,verdict_analytic,statistic,"
              "p_value,analytic_criterion,alpha,n,seed")

TABLE_CSV_HEADER = "rho1,rho2,axiom,analytic,statistical,agree,tag"

DEFAULT_TABLE_PAIRS = ((0.3, 0.5), (0.3, 0.0), (0.0, 0.5), (0.0, 0.0))

FUNCTIONALS = ("best_estimate", "unawareness", "discrimination_free", "null",
               "subset:x1", "subset:x2", "subset:x1,x2")


@dataclass(frozen=True)
class RunConfig:
    rho1: float
    rho2: float
    n: int = 10**6
    seed: int = 42
    test: TestConfig = field(default_factory=TestConfig)
    output_path: Optional[str] = None
    output_format: str = "json"
    functional: str = "unawareness"

    def __post_init__(self):
        if not 1.0 - self.rho1**2 - self.rho2**2 > 0.0:
            raise ConfigError(
                f"(rho1, rho2)=({self.rho1}, {self.rho2}) is not a valid pair")
        if self.n < 10**3:
            raise ConfigError(f"n must be >= 1000, got {self.n}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be csv or json, got {self.output_format!r}")
        if self.functional not in FUNCTIONALS:
            raise ConfigError(f"functional must be one of {FUNCTIONALS}")


def _parse_functional(name: str) -> model.PricingFunctional:
    if name.startswith("subset:"):
        indices = frozenset(0 if tok == "x1" else 1
                            for tok in name.split(":", 1)[1].split(","))
        return model.make_functional("subset", indices)
    return model.make_functional(name)


@dataclass(frozen=True)
class AxiomOutcome:
    """Statistical and analytic verdicts for one axiom, side by side."""

    axiom: str
    statistical: FairnessVerdict
    analytic: FairnessVerdict
    tag: str = ""

    @property
    def agree(self) -> bool:
        # an inconclusive statistical verdict is absence of evidence,
        # not a disagreement with the analytic verdict
        if self.statistical.verdict == INCONCLUSIVE:
            return True
        return self.statistical.verdict == self.analytic.verdict


@dataclass(frozen=True)
class AuditReport:
    config: RunConfig
    verdicts: tuple
    reproduction_numbers: dict
    timestamp: str
    version: str = VERSION

    @property
    def all_agree(self) -> bool:
        return all(v.agree for v in self.verdicts)

    def verdict_for(self, axiom: str) -> AxiomOutcome:
        for v in self.verdicts:
            if v.axiom == axiom:
                return v
        raise KeyError(axiom)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds").replace(
        "+00:00", "Z")


def _analytic_verdict(axiom: str, cfg: RunConfig,
                      functional: model.PricingFunctional) -> FairnessVerdict:
    """Closed-form verdict for the configured pricing functional.

    Functionals that reduce to x1 follow the (rho1, rho2) criteria of
    the oracle module; negative correlations are bridged through
    absolute values, since flipping the sign of D or X2 is a
    measure-preserving relabeling that maps (rho1, rho2) to any sign
    combination while leaving all three axioms untouched.  Constant
    prices (null, subset:x2) satisfy the two price-side axioms
    trivially; their sufficiency reduces to the unconditional
    independence of Y and D, which holds iff rho1 and rho2 both vanish
    (the criterion rho1^2 + rho2^2 is zero iff so).
    """
    if functional.uses_x1:
        r1, r2 = abs(cfg.rho1), abs(cfg.rho2)
        verdict = oracles.analytic_axiom_verdict(axiom, r1, r2)
        criterion = oracles.analytic_criterion(axiom, r1, r2)
    else:
        if axiom in (fairness.INDEPENDENCE, fairness.SEPARATION):
            verdict, criterion = HOLDS, 0.0
        else:
            criterion = cfg.rho1**2 + cfg.rho2**2
            verdict = HOLDS if criterion == 0.0 else VIOLATED
    return FairnessVerdict(
        axiom=Axiom(axiom), statistic=criterion, p_value=None,
        analytic_criterion=criterion, verdict=verdict,
        alpha=cfg.test.alpha, n_used=0, seed=cfg.seed, source="analytic")


def _inconclusive(axiom: str, cfg: RunConfig, n: int) -> FairnessVerdict:
    return FairnessVerdict(
        axiom=Axiom(axiom), statistic=0.0, p_value=None, analytic_criterion=None,
        verdict=INCONCLUSIVE, alpha=cfg.test.alpha, n_used=n, seed=cfg.test.seed)


def _mc_moment(values: np.ndarray) -> MomentEstimate:
    n = values.shape[0]
    se = float(values.std(ddof=1) / np.sqrt(n))
    return MomentEstimate(value=float(values.mean()), std_error=se, n=n,
                          method="monte_carlo")


def cmd_audit(cfg: RunConfig) -> AuditReport:
    """Simulate, price, run all checkers, pair with analytic verdicts.

    Statistical checks that cannot run at the configured sample size
    (too few points per bin) are reported INCONCLUSIVE; the analytic
    verdicts are emitted regardless.
    """
    portfolio = model.make_example_model(cfg.rho1, cfg.rho2)
    data = model.simulate(portfolio, cfg.n, cfg.seed)
    functional = _parse_functional(cfg.functional)
    prices = functional.evaluate(data.x1, data.x2, data.d)

    outcomes = []
    for axiom in oracles.AXIOMS:
        try:
            if axiom == fairness.INDEPENDENCE:
                stat = fairness.check_independence(prices, data.d, cfg.test)
            elif axiom == fairness.SEPARATION:
                stat = fairness.check_separation(prices, data.d, data.y, cfg.test)
            else:
                stat = fairness.check_sufficiency(data.y, data.d, prices, cfg.test)
        except (TooFewSamples, EmptyBin):
            stat = _inconclusive(axiom, cfg, cfg.n)
        analytic = _analytic_verdict(axiom, cfg, functional)
        tag = (oracles.CONJECTURE_NUMERIC_TAG
               if functional.uses_x1 and oracles.is_conjecture_numeric(
                   axiom, cfg.rho1, cfg.rho2) else "")
        outcomes.append(AxiomOutcome(axiom=axiom, statistical=stat,
                                     analytic=analytic, tag=tag))

    x1d = (data.x1 - data.x1.mean()) * (data.d - data.d.mean())
    reproduction = {
        "cov_x1_d": _mc_moment(x1d),
        "mean_y": _mc_moment(data.y),
        "var_y": _mc_moment((data.y - data.y.mean()) ** 2),
    }
    return AuditReport(config=cfg, verdicts=tuple(outcomes),
                       reproduction_numbers=reproduction, timestamp=_utc_now())


def cmd_reproduce_separation(n: int, seed: int) -> dict:
    """The Monte Carlo moments behind the separation counterexample.

    Returns both conditional second moments (with and without D in the
    conditioning), their standard errors, and the strict-ordering check
    value1 < value2 < 1 with margins in combined standard errors.
    """
    if n < 10**6:
        raise ConfigError("reproduction requires n >= 1e6")
    with_d = oracles.second_moment_x1_given_y0_d0(
        0.1, 0.9, method="monte_carlo", n=n, seed=seed)
    without_d = oracles.second_moment_x1_given_y0_d0(
        0.0, 0.0, method="monte_carlo", n=n, seed=seed)
    gap_se = float(np.hypot(with_d.std_error, without_d.std_error))
    return {
        "e_x1sq_given_y0_d0": with_d,
        "e_x1sq_given_y0": without_d,
        "ordering_ok": bool(with_d.value < without_d.value < 1.0),
        "gap_margin_se": (without_d.value - with_d.value) / gap_se,
        "unit_margin_se": (1.0 - without_d.value) / without_d.std_error,
    }


def cmd_table(rho_pairs=None, n: int = 10**6, seed: int = 7,
              test: TestConfig | None = None) -> list[dict]:
    """YES/NO grid over (rho1, rho2) regimes, analytic and statistical.

    One row per (pair, axiom): the analytic verdict, the statistical
    verdict from an audit at sample size n, an agreement flag, and the
    conjecture_numeric tag on the separation cells of the single-zero
    regimes.
    """
    pairs = tuple(rho_pairs) if rho_pairs is not None else DEFAULT_TABLE_PAIRS
    cells = []
    for k, (rho1, rho2) in enumerate(pairs):
        cfg = RunConfig(rho1=rho1, rho2=rho2, n=n, seed=seed + k,
                        test=test if test is not None else TestConfig())
        report = cmd_audit(cfg)
        for outcome in report.verdicts:
            cells.append({
                "rho1": rho1,
                "rho2": rho2,
                "axiom": outcome.axiom,
                "analytic": _yes_no(outcome.analytic.verdict),
                "statistical": _yes_no(outcome.statistical.verdict),
                "agree": outcome.agree,
                "tag": outcome.tag,
            })
    return cells


def _yes_no(verdict: str) -> str:
    if verdict == HOLDS:
        return "YES"
    if verdict == VIOLATED:
        return "NO"
    return "INCONCLUSIVE"


def format_table(cells: list[dict]) -> str:
    """Human-readable grid, one line per (rho1, rho2) pair."""
    lines = ["(rho1, rho2)   independence  separation  sufficiency"]
    pairs = []
    for cell in cells:
        key = (cell["rho1"], cell["rho2"])
        if key not in pairs:
            pairs.append(key)
    for rho1, rho2 in pairs:
        row = {c["axiom"]: c for c in cells
               if (c["rho1"], c["rho2"]) == (rho1, rho2)}
        entries = []
        for axiom in oracles.AXIOMS:
            cell = row[axiom]
            text = f"{cell['analytic']}/{cell['statistical']}"
            if not cell["agree"]:
                text += "!"
            if cell["tag"]:
                text += "*"
            entries.append(f"{text:>12s}")
        lines.append(f"({rho1:.2f}, {rho2:.2f})  " + "  ".join(entries))
    lines.append("legend: analytic/statistical; * conjecture_numeric; ! disagreement")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _moment_to_dict(m: MomentEstimate) -> dict:
    return {"value": m.value, "std_error": m.std_error, "n": m.n,
            "method": m.method}


def _config_to_dict(cfg: RunConfig) -> dict:
    t = cfg.test
    return {
        "rho1": cfg.rho1, "rho2": cfg.rho2, "n": cfg.n, "seed": cfg.seed,
        "alpha": t.alpha, "n_permutations": t.n_permutations,
        "n_bins_y": t.n_bins_y, "test_seed": t.seed,
        "rank_transform": t.rank_transform, "n_levels": t.n_levels,
        "residualize": t.residualize,
        "output_path": cfg.output_path, "output_format": cfg.output_format,
        "functional": cfg.functional,
    }


def config_from_dict(raw: dict) -> RunConfig:
    """Build a RunConfig from the flat JSON mapping used by --config."""
    allowed = {"rho1", "rho2", "n", "seed", "alpha", "n_permutations",
               "n_bins_y", "test_seed", "rank_transform", "n_levels",
               "residualize", "output_path", "output_format", "functional"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "rho1" not in raw or "rho2" not in raw:
        raise ConfigError("config requires rho1 and rho2")
    test = TestConfig(
        alpha=raw.get("alpha", 0.01),
        n_permutations=raw.get("n_permutations", 999),
        n_bins_y=raw.get("n_bins_y", 20),
        seed=raw.get("test_seed", 0),
        rank_transform=raw.get("rank_transform", True),
        n_levels=raw.get("n_levels", 64),
        residualize=raw.get("residualize", True),
    )
    return RunConfig(
        rho1=float(raw["rho1"]), rho2=float(raw["rho2"]),
        n=int(raw.get("n", 10**6)), seed=int(raw.get("seed", 42)), test=test,
        output_path=raw.get("output_path"),
        output_format=raw.get("output_format", "json"),
        functional=raw.get("functional", "unawareness"),
    )


def report_to_dict(report: AuditReport) -> dict:
    return {
        "config": _config_to_dict(report.config),
        "verdicts": [
            {
                "axiom": v.axiom,
                "statistical": v.statistical.to_dict(),
                "analytic": v.analytic.to_dict(),
                "tag": v.tag,
                "agree": v.agree,
            }
            for v in report.verdicts
        ],
        "reproduction_numbers": {
            name: _moment_to_dict(m)
            for name, m in report.reproduction_numbers.items()
        },
        "timestamp": report.timestamp,
        "version": report.version,
    }


def _verdict_from_dict(raw: dict) -> FairnessVerdict:
    return FairnessVerdict(
        axiom=Axiom(raw["axiom"]), statistic=raw["statistic"],
        p_value=raw["p_value"], analytic_criterion=raw["analytic_criterion"],
        verdict=raw["verdict"], alpha=raw["alpha"], n_used=raw["n_used"],
        seed=raw["seed"], source=raw["source"])


def report_from_dict(raw: dict) -> AuditReport:
    """Inverse of report_to_dict; exact round trip."""
    verdicts = tuple(
        AxiomOutcome(axiom=v["axiom"],
                     statistical=_verdict_from_dict(v["statistical"]),
                     analytic=_verdict_from_dict(v["analytic"]),
                     tag=v["tag"])
        for v in raw["verdicts"])
    reproduction = {
        name: MomentEstimate(**m)
        for name, m in raw["reproduction_numbers"].items()}
    return AuditReport(config=config_from_dict(raw["config"]),
                       verdicts=verdicts, reproduction_numbers=reproduction,
                       timestamp=raw["timestamp"], version=raw["version"])


def report_json_bytes(report: AuditReport) -> bytes:
    """Serialized report; Python float repr round-trips exactly (never
    more than 17 significant digits)."""
    return (json.dumps(report_to_dict(report), indent=2, allow_nan=False)
            + "\n").encode()


def report_csv_text(report: AuditReport) -> str:
    """One row per axiom with the fixed column schema."""
    lines = [CSV_HEADER]
    for v in report.verdicts:
        stat = v.statistical
        p_text = "" if stat.p_value is None else FLOAT_FMT % stat.p_value
        criterion = v.analytic.analytic_criterion
        lines.append(",".join([
            v.axiom, stat.verdict, v.analytic.verdict,
            FLOAT_FMT % stat.statistic, p_text, FLOAT_FMT % criterion,
            FLOAT_FMT % stat.alpha, str(report.config.n),
            str(report.config.seed)]))
    return "\n".join(lines) + "\n"


def emit_report(report: AuditReport, output_format: str, path) -> None:
    """Write the report as CSV or JSON with deterministic field order."""
    path = Path(path)
    if output_format == "json":
        path.write_bytes(report_json_bytes(report))
    elif output_format == "csv":
        path.write_text(report_csv_text(report))
    else:
        raise ConfigError(f"unknown output format {output_format!r}")


def table_csv_text(cells: list[dict]) -> str:
    lines = [TABLE_CSV_HEADER]
    for c in cells:
        lines.append(",".join([
            FLOAT_FMT % c["rho1"], FLOAT_FMT % c["rho2"], c["axiom"],
            c["analytic"], c["statistical"], str(c["agree"]).lower(), c["tag"]]))
    return "\n".join(lines) + "\n"


def emit_table(cells: list[dict], output_format: str, path) -> None:
    path = Path(path)
    if output_format == "json":
        path.write_text(json.dumps(cells, indent=2, allow_nan=False) + "\n")
    elif output_format == "csv":
        path.write_text(table_csv_text(cells))
    else:
        raise ConfigError(f"unknown output format {output_format!r}")


def determinism_digest(report_bytes: bytes) -> str:
    """SHA-256 of the report with the timestamp field removed."""
    raw = json.loads(report_bytes.decode())
    raw.pop("timestamp", None)
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True).encode()).hexdigest()
