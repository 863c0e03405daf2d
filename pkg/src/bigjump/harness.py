"""Experiment orchestration: declarative scenario configs, deterministic
seeded execution, and CSV/JSON report emission.

A config file is TOML with one table per scenario; the table name is the
scenario id.  Sub-specs (marginals, dependence structures, counting
processes, random horizons) are written in a compact call syntax, e.g.::

    [c_class_scan]
    kind = "deviation_scan"
    marginal = "shifted(pareto(alpha=2, scale=1), offset=2)"
    dependence = "fgm_chain(theta=0.5)"
    gamma = 1.0
    n_list = [20, 50]
    x_multipliers = [2, 4, 8]
    samples = 1000000
    method = "CrudeMC"
    seed = 42

Every scenario carries its own mandatory seed; there is no wall-clock
default anywhere.  Rerunning a config with the same seeds reproduces all
report files byte for byte, for any thread count and scenario order (the
manifest's wall-time fields are the only non-reproducible output bytes).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import counting as ct
from . import dependence as dp
from . import deviation as dv
from . import diagnostics as dg
from . import marginals as mg
from . import risk as rk
from .errors import ParseError, ValidationError
from .streams import stream_key, substream

SCHEMA_VERSION = "1"
TOOL_VERSION = "0.1.0"

KINDS = (
    "deviation_scan", "random_sum_scan", "reinsurance_scan", "ruin",
    "random_time_ruin", "diagnostics", "dominating_estimate", "condition_check",
)

_INT_FIELDS = {"samples", "seed", "n", "replications"}
_FLOAT_FIELDS = {"gamma", "q1", "q2", "premium_rate", "retention", "x", "t",
                 "delta", "tol_lo", "tol_hi", "tol_c"}
_FLOAT_LIST_FIELDS = {"x_multipliers", "t_list", "t_grid", "x_grid", "y_grid",
                      "q_exponents", "left_tail_grid"}
_INT_LIST_FIELDS = {"n_list"}


@dataclass(frozen=True)
class ScenarioConfig:
    """One validated scenario: id, kind, seed, and normalized options."""

    id: str
    kind: str
    seed: int
    options: dict = field(default_factory=dict)

    def opt(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ScenarioConfig)
                and (self.id, self.kind, self.seed) == (other.id, other.kind, other.seed)
                and self.options == other.options)

    def __hash__(self) -> int:
        return hash((self.id, self.kind, self.seed))


# ---------------------------------------------------------------------------
# call-syntax sub-spec parsing

def _parse_call(text: str):
    """Parse ``name(arg, key=value, ...)`` into (name, args, kwargs)."""
    s = text.strip()
    pos = 0

    def error(msg):
        return ParseError(f"{msg} at position {pos} in {text!r}")

    def skip_ws():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def parse_ident():
        nonlocal pos
        start = pos
        while pos < len(s) and (s[pos].isalnum() or s[pos] == "_"):
            pos += 1
        if start == pos:
            raise error("expected a name")
        return s[start:pos]

    def parse_number():
        nonlocal pos
        start = pos
        while pos < len(s) and (s[pos].isdigit() or s[pos] in "+-.eE"):
            pos += 1
        try:
            return float(s[start:pos])
        except ValueError:
            raise error(f"bad number {s[start:pos]!r}") from None

    def parse_value():
        nonlocal pos
        skip_ws()
        if pos < len(s) and (s[pos].isdigit() or s[pos] in "+-."):
            return parse_number()
        node = parse_node()
        return node

    def parse_node():
        nonlocal pos
        skip_ws()
        name = parse_ident()
        skip_ws()
        args, kwargs = [], {}
        if pos < len(s) and s[pos] == "(":
            pos += 1
            skip_ws()
            while pos < len(s) and s[pos] != ")":
                mark = pos
                skip_ws()
                if s[pos].isalpha():
                    ident = parse_ident()
                    skip_ws()
                    if pos < len(s) and s[pos] == "=":
                        pos += 1
                        kwargs[ident] = parse_value()
                    else:
                        pos = mark
                        args.append(parse_node())
                else:
                    args.append(parse_value())
                skip_ws()
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    skip_ws()
            if pos >= len(s) or s[pos] != ")":
                raise error("expected ')'")
            pos += 1
        return (name, args, kwargs)

    node = parse_node()
    skip_ws()
    if pos != len(s):
        raise error("trailing text")
    return node


def _build_marginal(node) -> mg.MarginalSpec:
    name, args, kw = node
    if name == "pareto":
        return mg.pareto(alpha=kw["alpha"], scale=kw.get("scale", 1.0))
    if name == "steppareto":
        return mg.steppareto(alpha=kw["alpha"])
    if name == "exponential":
        return mg.exponential(rate=kw["rate"])
    if name == "fixed":
        return mg.fixed(value=kw["value"])
    if name == "shifted":
        if len(args) != 1:
            raise ParseError("shifted(...) takes one base spec")
        return mg.shifted(_build_marginal(args[0]), offset=kw["offset"])
    if name == "netloss":
        if len(args) != 2:
            raise ParseError("netloss(...) takes a base and a companion spec")
        return mg.net_loss(_build_marginal(args[0]), _build_marginal(args[1]),
                           factor=kw.get("factor", 1.0))
    raise ParseError(f"unknown marginal family {name!r}")


def marginal_from_text(text: str) -> mg.MarginalSpec:
    try:
        return _build_marginal(_parse_call(text))
    except KeyError as exc:
        raise ParseError(f"missing parameter {exc} in {text!r}") from None


def _build_dependence(node) -> dp.DependenceSpec:
    name, _args, kw = node
    if name == "independent":
        return dp.independent()
    if name == "comonotone":
        return dp.comonotone()
    if name == "fgm_pair":
        return dp.fgm_pair(theta=kw["theta"])
    if name == "fgm_chain":
        return dp.fgm_chain(theta=kw["theta"])
    if name == "gaussian_ar1":
        return dp.gaussian_ar1(rho=kw["rho"])
    raise ParseError(f"unknown dependence kind {name!r}")


def dependence_from_text(text: str) -> dp.DependenceSpec:
    try:
        return _build_dependence(_parse_call(text))
    except KeyError as exc:
        raise ParseError(f"missing parameter {exc} in {text!r}") from None


def counting_from_text(text: str) -> ct.CountingSpec:
    name, args, kw = _parse_call(text)
    if name == "poisson":
        return ct.poisson(rate=kw["rate"])
    if name == "renewal":
        if not 1 <= len(args) <= 2:
            raise ParseError("renewal(...) takes a marginal and optional dependence")
        inter = _build_marginal(args[0])
        dep = _build_dependence(args[1]) if len(args) == 2 else dp.independent()
        return ct.renewal(inter, dep)
    raise ParseError(f"unknown counting kind {name!r}")


def tau_from_text(text: str) -> rk.TauSpec:
    name, _args, kw = _parse_call(text)
    if name == "deterministic":
        return rk.deterministic(t=kw["t"])
    if name == "exponential_tau":
        return rk.exponential_tau(rate=kw["rate"])
    if name == "geometric_tau":
        return rk.geometric_tau(p=kw["p"])
    raise ParseError(f"unknown tau kind {name!r}")


# ---------------------------------------------------------------------------
# config parse / serialize

_REQUIRED = {
    "deviation_scan": ("marginal", "dependence", "gamma", "n_list",
                       "x_multipliers", "samples"),
    "random_sum_scan": ("counting", "marginal", "dependence", "gamma", "t_list",
                        "x_multipliers", "samples"),
    "reinsurance_scan": ("claim_marginal", "inter_marginal", "premium_rate",
                         "q1", "q2", "functional", "t_list", "gamma",
                         "x_multipliers", "samples"),
    "ruin": ("claim_marginal", "inter_marginal", "premium_rate", "x", "t",
             "samples"),
    "random_time_ruin": ("claim_marginal", "inter_marginal", "premium_rate",
                         "x", "tau", "samples"),
    "diagnostics": ("marginal",),
    "dominating_estimate": ("dependence", "marginal", "n", "thresholds",
                            "samples"),
    "condition_check": ("counting", "t_grid", "q_exponents", "delta",
                        "replications"),
}

_SPEC_FIELDS = {
    "marginal": marginal_from_text,
    "claim_marginal": marginal_from_text,
    "inter_marginal": marginal_from_text,
    "dependence": dependence_from_text,
    "claim_dep": dependence_from_text,
    "inter_dep": dependence_from_text,
    "counting": counting_from_text,
    "tau": tau_from_text,
}


def _normalize(sid: str, key: str, value, errors: list):
    where = f"{sid}.{key}"
    try:
        if key in _INT_FIELDS:
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
        if key in _FLOAT_LIST_FIELDS:
            return [float(v) for v in value]
        if key in _INT_LIST_FIELDS:
            return [int(v) for v in value]
        if key == "samples_by_n":
            return {str(k): int(v) for k, v in value.items()}
        if key == "thresholds":
            return [[float(v) for v in row] for row in value]
        if key in _SPEC_FIELDS:
            _SPEC_FIELDS[key](value)  # validates; stored as text
            return str(value)
        return value
    except (TypeError, ValueError, KeyError, ParseError) as exc:
        errors.append(f"{where}: {exc}")
        return value


def parse_config(text: str) -> list[ScenarioConfig]:
    """Parse and validate config text; errors name the offending fields."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"config is not valid TOML: {exc}") from None
    errors: list[str] = []
    configs: list[ScenarioConfig] = []
    for sid, table in data.items():
        if not isinstance(table, dict):
            errors.append(f"{sid}: top-level values must be scenario tables")
            continue
        kind = table.get("kind")
        if kind not in KINDS:
            errors.append(f"{sid}.kind: must be one of {KINDS}, got {kind!r}")
            continue
        if "seed" not in table:
            errors.append(f"{sid}.seed: mandatory (no wall-clock default)")
            continue
        for req in _REQUIRED[kind]:
            if req not in table:
                errors.append(f"{sid}.{req}: required for kind {kind!r}")
        options = {}
        seed = 0
        for key, value in table.items():
            if key == "kind":
                continue
            if key == "seed":
                seed = int(value)
                continue
            options[key] = _normalize(sid, key, value, errors)
        configs.append(ScenarioConfig(id=sid, kind=kind, seed=seed, options=options))
    if errors:
        exc = ValidationError("; ".join(errors))
        exc.errors = errors
        raise exc
    return configs


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{json.dumps(k)} = {_toml_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    raise ValidationError(f"cannot serialize value {v!r}")


def serialize_config(configs: list[ScenarioConfig]) -> str:
    lines = []
    for cfg in configs:
        lines.append(f"[{cfg.id}]")
        lines.append(f'kind = "{cfg.kind}"')
        lines.append(f"seed = {cfg.seed}")
        for key in sorted(cfg.options):
            lines.append(f"{key} = {_toml_value(cfg.options[key])}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# scenario execution

@dataclass
class ScenarioResult:
    config: ScenarioConfig
    verdict: str
    rows: list
    columns: list
    summary: dict
    wall_time_s: float
    error: Optional[str] = None
    substreams: dict = field(default_factory=dict)


def _risk_model(cfg: ScenarioConfig) -> rk.RiskModelSpec:
    return rk.RiskModelSpec(
        claim_marginal=marginal_from_text(cfg.opt("claim_marginal")),
        claim_dep=dependence_from_text(cfg.opt("claim_dep", "independent")),
        inter_marginal=marginal_from_text(cfg.opt("inter_marginal")),
        inter_dep=dependence_from_text(cfg.opt("inter_dep", "independent")),
        premium_rate=cfg.opt("premium_rate"),
        q1=cfg.opt("q1", 1.0),
        q2=cfg.opt("q2", 1.0),
        retention=cfg.opt("retention", 0.0),
        allow_unsafe=bool(cfg.opt("allow_unsafe", False)),
    )


_RATIO_COLUMNS = ["schema_version", "scenario_id", "seed", "n", "t", "x",
                  "method", "samples", "p_hat", "stderr", "hits", "n_fbar",
                  "ratio", "ci_lo", "ci_hi", "verdict"]


def _ratio_rows(report: dv.RatioReport, cfg: ScenarioConfig, extra: dict | None = None):
    extra = extra or {}
    columns = _RATIO_COLUMNS + sorted(extra)
    rows = []
    for e in report.entries:
        verdict = "Inconclusive" if e.status != "ok" else report.verdict
        row = {
            "schema_version": SCHEMA_VERSION, "scenario_id": cfg.id,
            "seed": cfg.seed, "n": e.n, "t": e.t, "x": e.x,
            "method": e.estimate.method, "samples": e.estimate.samples,
            "p_hat": e.estimate.p_hat, "stderr": e.estimate.stderr,
            "hits": e.estimate.hits, "n_fbar": e.denom, "ratio": e.ratio,
            "ci_lo": e.ci_lo, "ci_hi": e.ci_hi, "verdict": verdict,
        }
        row.update(extra)
        rows.append([row[c] for c in columns])
    return rows, columns


def _ratio_entries_json(report: dv.RatioReport) -> list[dict]:
    return [
        {"n": e.n, "t": e.t, "x": e.x, "p_hat": e.estimate.p_hat,
         "stderr": e.estimate.stderr, "hits": e.estimate.hits,
         "denom": e.denom, "ratio": e.ratio, "ci": [e.ci_lo, e.ci_hi],
         "status": e.status}
        for e in report.entries
    ]


def _scaled(value: int, scale: float, floor: int = 1_000) -> int:
    return max(int(value * scale), floor)


def run_scenario(config: ScenarioConfig, parallelism: int = 1,
                 samples_scale: float = 1.0) -> ScenarioResult:
    """Execute one scenario; output is independent of ``parallelism``."""
    t0 = time.perf_counter()
    cfg = config
    kind = cfg.kind
    rows: list = []
    columns: list = []
    summary: dict = {}
    verdict = ""
    subs: dict = {}

    if kind == "deviation_scan":
        marginal = marginal_from_text(cfg.opt("marginal"))
        dep = dependence_from_text(cfg.opt("dependence"))
        by_n = cfg.opt("samples_by_n")
        scan = dv.RatioScanConfig(
            gamma=cfg.opt("gamma"), n_list=tuple(cfg.opt("n_list")),
            x_multipliers=tuple(cfg.opt("x_multipliers")),
            samples=_scaled(cfg.opt("samples"), samples_scale),
            method=cfg.opt("method", dv.CRUDE_MC), seed=cfg.seed,
            samples_by_n={int(k): _scaled(v, samples_scale) for k, v in by_n.items()} if by_n else None,
            tol_lo=cfg.opt("tol_lo", dv.TOL_LO), tol_hi=cfg.opt("tol_hi", dv.TOL_HI),
            tol_c=cfg.opt("tol_c", dv.TOL_C))
        report = dv.uniform_ratio_scan(scan, marginal, dep, threads=parallelism,
                                       scope=cfg.id)
        for n in scan.n_list:
            subs[f"n={n}"] = "%016x%016x" % stream_key(cfg.seed, "deviation-scan", cfg.id, f"n={n}")
        rows, columns = _ratio_rows(report, cfg)
        verdict = report.verdict
        summary = {"verdict": report.verdict, "sup_ratio": report.sup_ratio,
                   "inf_ratio": report.inf_ratio, "L": report.L,
                   "band": list(report.band), "regime": report.regime,
                   "entries": _ratio_entries_json(report)}

    elif kind == "random_sum_scan":
        counting = counting_from_text(cfg.opt("counting"))
        marginal = marginal_from_text(cfg.opt("marginal"))
        dep = dependence_from_text(cfg.opt("dependence"))
        stream = substream(cfg.seed, "random-sum", cfg.id)
        subs["scan"] = "%016x%016x" % stream_key(cfg.seed, "random-sum", cfg.id)
        report = ct.random_sum_ratio_scan(
            counting, marginal, dep, cfg.opt("gamma"), cfg.opt("t_list"),
            cfg.opt("x_multipliers"), _scaled(cfg.opt("samples"), samples_scale),
            stream, method=cfg.opt("method", dv.CRUDE_MC), threads=parallelism,
            seed=cfg.seed)
        rows, columns = _ratio_rows(report, cfg)
        verdict = report.verdict
        summary = {"verdict": report.verdict, "sup_ratio": report.sup_ratio,
                   "inf_ratio": report.inf_ratio, "L": report.L,
                   "band": list(report.band),
                   "entries": _ratio_entries_json(report)}

    elif kind == "reinsurance_scan":
        model = _risk_model(cfg)
        functional = cfg.opt("functional")
        stream = substream(cfg.seed, "reinsurance", cfg.id, functional)
        subs["scan"] = "%016x%016x" % stream_key(cfg.seed, "reinsurance", cfg.id, functional)
        report = rk.reinsurance_tail_scan(
            model, cfg.opt("t_list"), cfg.opt("gamma"), cfg.opt("x_multipliers"),
            functional, _scaled(cfg.opt("samples"), samples_scale), stream,
            method=cfg.opt("method", dv.CRUDE_MC), threads=parallelism,
            seed=cfg.seed)
        extra = {"functional": functional, "q1": model.q1, "q2": model.q2,
                 "c": model.premium_rate, "D": model.retention, "tau_kind": ""}
        rows, columns = _ratio_rows(report, cfg, extra)
        verdict = report.verdict
        summary = {"verdict": report.verdict, "sup_ratio": report.sup_ratio,
                   "inf_ratio": report.inf_ratio, "note": report.note,
                   "entries": _ratio_entries_json(report)}

    elif kind in ("ruin", "random_time_ruin"):
        model = _risk_model(cfg)
        stream = substream(cfg.seed, kind, cfg.id)
        subs["paths"] = "%016x%016x" % stream_key(cfg.seed, kind, cfg.id)
        samples = _scaled(cfg.opt("samples"), samples_scale)
        if kind == "ruin":
            est = rk.finite_time_ruin(model, cfg.opt("x"), cfg.opt("t"),
                                      samples, stream, threads=parallelism,
                                      seed=cfg.seed)
        else:
            tau = tau_from_text(cfg.opt("tau"))
            est = rk.random_time_ruin(model, cfg.opt("x"), tau, samples, stream,
                                      threads=parallelism, seed=cfg.seed)
        columns = ["schema_version", "scenario_id", "seed", "x", "tau_kind",
                   "samples", "psi_hat", "stderr", "denom",
                   "ratio_vs_asymptotic", "final_exceed_hat",
                   "claims_exceed_hat", "sandwich_violations", "e_lambda_tau",
                   "q1", "q2", "c", "D", "verdict"]
        verdict = ""
        rows = [[SCHEMA_VERSION, cfg.id, cfg.seed, est.x, est.horizon.kind,
                 est.samples, est.psi_hat, est.stderr, est.denom,
                 est.ratio_vs_asymptotic, est.final_exceed_hat,
                 est.claims_exceed_hat, est.sandwich_violations,
                 est.e_lambda_tau, model.q1, model.q2, model.premium_rate,
                 model.retention, verdict]]
        summary = {"psi_hat": est.psi_hat, "ratio": est.ratio_vs_asymptotic,
                   "sandwich_violations": est.sandwich_violations,
                   "e_lambda_tau": est.e_lambda_tau}

    elif kind == "diagnostics":
        marginal = marginal_from_text(cfg.opt("marginal"))
        y_grid = tuple(cfg.opt("y_grid", dg.DEFAULT_Y_GRID))
        columns = ["schema_version", "scenario_id", "seed", "y", "x", "ratio"]
        curves = {y: dg.empirical_tail_ratio(marginal, y) for y in y_grid}
        for y, curve in curves.items():
            for x, r in zip(curve.x_grid, curve.ratios):
                rows.append([SCHEMA_VERSION, cfg.id, cfg.seed, y, float(x), float(r)])
        idx = dg.estimate_matuszewska(marginal, y_grid=y_grid)
        summary = {"L": idx.L, "J_plus": idx.J_plus, "J_minus": idx.J_minus,
                   "in_D": idx.in_D, "in_C": idx.in_C}
        left_grid = cfg.opt("left_tail_grid")
        if left_grid:
            stream = substream(cfg.seed, "diagnostics", cfg.id)
            subs["left-tail"] = "%016x%016x" % stream_key(cfg.seed, "diagnostics", cfg.id)
            trend = dg.check_left_tail_negligible(marginal, left_grid,
                                                  stream=stream)
            summary["left_tail_verdict"] = trend.verdict
            verdict = trend.verdict
        else:
            verdict = "evidence"

    elif kind == "dominating_estimate":
        dep = dependence_from_text(cfg.opt("dependence"))
        marginal = marginal_from_text(cfg.opt("marginal"))
        stream = substream(cfg.seed, "dominating", cfg.id)
        subs["estimate"] = "%016x%016x" % stream_key(cfg.seed, "dominating", cfg.id)
        est = dp.estimate_dominating_coefficients(
            dep, marginal, cfg.opt("n"), cfg.opt("thresholds"),
            _scaled(cfg.opt("samples"), samples_scale, floor=10_000), stream,
            threads=parallelism)
        columns = ["schema_version", "scenario_id", "seed", "grid_index",
                   "thresholds", "gU", "gL", "skipped_upper", "skipped_lower"]
        for i, vec in enumerate(est.grid):
            rows.append([SCHEMA_VERSION, cfg.id, cfg.seed, i,
                         " ".join(repr(v) for v in vec),
                         est.gU_by_threshold[i], est.gL_by_threshold[i],
                         i in est.skipped_upper, i in est.skipped_lower])
        summary = {"gU_hat": est.gU_hat, "gL_hat": est.gL_hat,
                   "stderr_max": est.stderr_max, "samples": est.samples}
        verdict = "estimated"

    elif kind == "condition_check":
        counting = counting_from_text(cfg.opt("counting"))
        stream = substream(cfg.seed, "conditions", cfg.id)
        subs["counts"] = "%016x%016x" % stream_key(cfg.seed, "conditions", cfg.id)
        rep = ct.check_counting_conditions(
            counting, cfg.opt("t_grid"), cfg.opt("q_exponents"),
            cfg.opt("delta"), _scaled(cfg.opt("replications"), samples_scale),
            stream, threads=parallelism)
        columns = ["schema_version", "scenario_id", "seed", "t", "lambda_hat",
                   "metric", "value"]
        for i, t in enumerate(rep.t_grid):
            for eps, vals in rep.concentration.items():
                rows.append([SCHEMA_VERSION, cfg.id, cfg.seed, t,
                             rep.lambda_hats[i], f"concentration_eps={eps:g}",
                             vals[i]])
            for q, vals in rep.truncated_moments.items():
                rows.append([SCHEMA_VERSION, cfg.id, cfg.seed, t,
                             rep.lambda_hats[i], f"trunc_moment_q={q:g}",
                             vals[i]])
        summary = {"verdicts": rep.verdicts, "lambda_hats": list(rep.lambda_hats)}
        verdict = "Pass" if all(v == "Pass" for v in rep.verdicts.values()) else "Fail"

    else:  # pragma: no cover - kinds validated at parse time
        raise ValidationError(f"unknown scenario kind {kind!r}")

    return ScenarioResult(config=cfg, verdict=verdict, rows=rows,
                          columns=columns, summary=summary,
                          wall_time_s=time.perf_counter() - t0,
                          substreams=subs)


def run_config(configs: list[ScenarioConfig], parallelism: int = 1,
               samples_scale: float = 1.0,
               seed_override: int | None = None) -> list[ScenarioResult]:
    """Run all scenarios; one scenario's failure never aborts its siblings."""
    results = []
    for cfg in configs:
        if seed_override is not None:
            cfg = ScenarioConfig(id=cfg.id, kind=cfg.kind, seed=seed_override,
                                 options=cfg.options)
        try:
            results.append(run_scenario(cfg, parallelism, samples_scale))
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            results.append(ScenarioResult(
                config=cfg, verdict="Error", rows=[], columns=[], summary={},
                wall_time_s=0.0, error=f"{type(exc).__name__}: {exc}"))
    return results


# ---------------------------------------------------------------------------
# output emission

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_outputs(results: list[ScenarioResult], out_dir, config_text: str = "",
                 seed_override: int | None = None) -> list[Path]:
    """Write per-scenario CSVs, a consolidated summary, and the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for res in results:
        if not res.rows:
            continue
        path = out / f"{res.config.id}.{res.config.kind}.csv"
        lines = [",".join(res.columns)]
        lines += [",".join(_csv_cell(v) for v in row) for row in res.rows]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    summary = {
        "schema_version": SCHEMA_VERSION,
        "scenarios": {
            res.config.id: {"kind": res.config.kind, "seed": res.config.seed,
                            "verdict": res.verdict, "summary": res.summary,
                            "error": res.error}
            for res in results
        },
    }
    spath = out / "summary.json"
    spath.write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    written.append(spath)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "seed_override": seed_override,
        "scenarios": [
            {"id": res.config.id, "kind": res.config.kind,
             "seed": res.config.seed, "verdict": res.verdict,
             "substreams": res.substreams, "error": res.error,
             "wall_time_s": round(res.wall_time_s, 6)}
            for res in results
        ],
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(mpath)
    return written
