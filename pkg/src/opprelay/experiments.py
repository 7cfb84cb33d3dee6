"""Scenario-driven experiments: config parsing, dispatch, CSV emission.

A config file is a YAML mapping with three top-level keys: `experiment`
(the kind), `seed` (mandatory), optional `out`, plus one section named
after the kind. See README for the full schema. Every Monte Carlo result
is a pure function of (config, seed): trial blocks are keyed by index, so
the emitted rows do not depend on the worker-thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .dmt import (DmtScenario, FixedRate, InsufficientTrialsError,
                  MultiplexRate, Scheme, diversity_slope, outage_curve)
from .fading import FadingKind, RelayProfile, Topology, TopologyCase, topology_case
from .orderstats import (CollisionQuery, TimerDistribution,
                         collision_prob_analytic, mc_collision_rate)
from .protosim import NodeGeometry, simulate_round
from .rng import substream
from .selection import Policy, TimingParams, collision_window
from .fading import sample_hop_gains

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "parse_config",
    "run_experiment",
    "emit_csv",
    "read_csv",
]

KINDS = ("collision_curve", "topology_study", "proto_trace", "outage_curve", "oracle_audit")

_POLICIES = {"min": Policy.MIN, "harmonic": Policy.HARMONIC}
_SCHEMES = {"direct": Scheme.DIRECT, "opp_df": Scheme.OPP_DF, "opp_af": Scheme.OPP_AF}
_CASES = {c.value: c for c in TopologyCase if c is not TopologyCase.CUSTOM}


class ConfigError(ValueError):
    """Invalid experiment config; message carries the offending field path."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _require(section: dict, path: str, key: str, types, check=None, note=""):
    if key not in section:
        _fail(f"{path}.{key}", "missing required field" + (f" ({note})" if note else ""))
    val = section[key]
    if types is not None and not isinstance(val, types):
        _fail(f"{path}.{key}", f"expected {types}, got {type(val).__name__}")
    if check is not None and not check(val):
        _fail(f"{path}.{key}", f"invalid value {val!r}" + (f" ({note})" if note else ""))
    return val


def _optional(section: dict, path: str, key: str, default, types, check=None, note=""):
    if key not in section:
        return default
    return _require(section, path, key, types, check, note)


def _positive_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 and math.isfinite(v)


def _parse_policies(section, path):
    raw = _optional(section, path, "policies", ["min", "harmonic"], list)
    out = []
    for i, name in enumerate(raw):
        if name not in _POLICIES:
            _fail(f"{path}.policies[{i}]", f"unknown policy {name!r}; choose from {sorted(_POLICIES)}")
        out.append(_POLICIES[name])
    if not out:
        _fail(f"{path}.policies", "must list at least one policy")
    return out


def _parse_fading(section, path, default_betas=(1.0, 1.0)):
    sub = _optional(section, path, "fading", {}, dict)
    p = f"{path}.fading"
    kind_name = _optional(sub, p, "kind", "rayleigh", str,
                          lambda v: v in ("rayleigh", "ricean"), "rayleigh or ricean")
    kind = FadingKind.RAYLEIGH if kind_name == "rayleigh" else FadingKind.RICEAN
    k_factor = _optional(sub, p, "k_factor", 1.0 if kind is FadingKind.RICEAN else 0.0,
                         (int, float), lambda v: v >= 0, ">= 0")
    if kind is FadingKind.RAYLEIGH and k_factor != 0.0:
        _fail(f"{p}.k_factor", "must be 0 for rayleigh fading")
    beta1 = _optional(sub, p, "beta1", default_betas[0], (int, float), _positive_number, "> 0")
    beta2 = _optional(sub, p, "beta2", default_betas[1], (int, float), _positive_number, "> 0")
    return kind, float(k_factor), float(beta1), float(beta2)


def _parse_trials(section, path, default, minimum=10_000):
    trials = _optional(section, path, "trials", default, (int, list))
    if isinstance(trials, list):
        for i, t in enumerate(trials):
            if not (isinstance(t, int) and t >= minimum):
                _fail(f"{path}.trials[{i}]", f"must be an integer >= {minimum}")
        return trials
    if not (isinstance(trials, int) and trials >= minimum):
        _fail(f"{path}.trials", f"must be an integer >= {minimum}")
    return trials


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out: Optional[str]
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a loaded YAML mapping and normalize it into an ExperimentConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a mapping")
    kind = _require(doc, "config", "experiment", str,
                    lambda v: v in KINDS, f"one of {KINDS}")
    seed = _require(doc, "config", "seed", int, lambda v: 0 <= v < 2 ** 64,
                    "mandatory unsigned 64-bit seed")
    out = _optional(doc, "config", "out", None, str)
    section = _optional(doc, "config", kind, {}, dict)
    params = _VALIDATORS[kind](section, kind)
    return ExperimentConfig(kind=kind, seed=seed, out=out, params=params, raw=doc)


def _validate_collision_curve(section, path):
    m = _require(section, path, "m", int, lambda v: v >= 2,
                 "analytic two-smallest law needs m >= 2")
    ratios = _require(section, path, "lambda_over_c", list,
                      lambda v: len(v) > 0 and all(_positive_number(x) for x in v),
                      "positive ratios")
    policies = _parse_policies(section, path)
    kind, k_factor, beta1, beta2 = _parse_fading(section, path)
    trials = _parse_trials(section, path, 1_000_000)
    if isinstance(trials, list):
        _fail(f"{path}.trials", "per-point lists are not supported here; use one count")
    analytic = _optional(section, path, "analytic", kind is FadingKind.RAYLEIGH, bool)
    if analytic and kind is not FadingKind.RAYLEIGH:
        _fail(f"{path}.analytic", "closed forms exist only for rayleigh fading")
    return dict(m=m, ratios=[float(r) for r in ratios], policies=policies,
                fading_kind=kind, k_factor=k_factor, beta1=beta1, beta2=beta2,
                trials=trials, analytic=analytic)


def _validate_topology_study(section, path):
    m = _require(section, path, "m", int, lambda v: v >= 2, ">= 2")
    exponents = _optional(section, path, "exponents", [3.0, 4.0], list,
                          lambda v: len(v) > 0 and all(_positive_number(x) for x in v))
    col = _optional(section, path, "c_over_lambda", 1.0 / 200.0, (int, float),
                    lambda v: 0 <= v, ">= 0")
    policies = _parse_policies(section, path)
    raw_cases = _optional(section, path, "cases", ["midway", "third", "tenth", "line"], list)
    cases = []
    for i, name in enumerate(raw_cases):
        if name not in _CASES:
            _fail(f"{path}.cases[{i}]", f"unknown case {name!r}; choose from {sorted(_CASES)}")
        cases.append(_CASES[name])
    trials = _parse_trials(section, path, 1_000_000)
    if isinstance(trials, list):
        _fail(f"{path}.trials", "use a single trial count")
    return dict(m=m, exponents=[float(v) for v in exponents], c_over_lambda=float(col),
                policies=policies, cases=cases, trials=trials)


def _validate_proto_trace(section, path):
    rounds = _optional(section, path, "rounds", 200, int, lambda v: 1 <= v <= 1_000_000)
    lam = _optional(section, path, "lambda_us", 1000.0, (int, float), _positive_number)
    policy_name = _optional(section, path, "policy", "min", str, lambda v: v in _POLICIES)
    geo = _require(section, path, "geometry", dict)
    gp = f"{path}.geometry"
    def point(v):
        return (isinstance(v, list) and len(v) == 2
                and all(isinstance(x, (int, float)) and math.isfinite(x) for x in v))
    src = _require(geo, gp, "source", list, point, "[x, y] meters")
    dst = _require(geo, gp, "destination", list, point, "[x, y] meters")
    relays = _require(geo, gp, "relays", list,
                      lambda v: len(v) >= 1 and all(point(r) for r in v), "list of [x, y]")
    speed = _optional(geo, gp, "signal_speed", 300.0, (int, float), _positive_number)
    timing = _optional(section, path, "timing", {}, dict)
    tp = f"{path}.timing"
    tkw = {}
    for name, default in (("r_max", 1 / 3), ("n_max", 1 / 3), ("cts_skew_max", 1 / 3),
                          ("d_s", 5.0), ("dur", 1.0)):
        tkw[name] = float(_optional(timing, tp, name, default, (int, float),
                                    lambda v: v >= 0 and math.isfinite(v), ">= 0"))
    tkw["hidden"] = _optional(timing, tp, "hidden", False, bool)
    kind, k_factor, beta1, beta2 = _parse_fading(section, path)
    geometry = NodeGeometry(tuple(src), tuple(dst),
                            tuple(tuple(r) for r in relays), float(speed))
    timing_params = TimingParams(**tkw)
    # fail fast on geometry/timing inconsistency rather than during the run
    n = geometry.relay_dest_delays()
    r = geometry.relay_relay_delays()
    if np.max(n) > timing_params.n_max:
        _fail(f"{gp}", f"relay-destination delay {np.max(n):.6g} us exceeds timing.n_max")
    if np.max(r) > timing_params.r_max:
        _fail(f"{gp}", f"relay-relay delay {np.max(r):.6g} us exceeds timing.r_max")
    if np.max(n) - np.min(n) > timing_params.cts_skew_max:
        _fail(f"{gp}", "CTS arrival skew exceeds timing.cts_skew_max")
    return dict(rounds=rounds, lambda_us=float(lam), policy=_POLICIES[policy_name],
                geometry=geometry, timing=timing_params,
                fading_kind=kind, k_factor=k_factor, beta1=beta1, beta2=beta2)


def _validate_outage_curve(section, path):
    scheme_name = _require(section, path, "scheme", str, lambda v: v in _SCHEMES,
                           f"one of {sorted(_SCHEMES)}")
    scheme = _SCHEMES[scheme_name]
    m = _optional(section, path, "m", 1, int, lambda v: v >= 1, ">= 1")
    snr = _require(section, path, "snr_db", list,
                   lambda v: len(v) >= 1 and all(isinstance(x, (int, float)) for x in v))
    rate_raw = _require(section, path, "rate", dict)
    rp = f"{path}.rate"
    if set(rate_raw) == {"fixed"}:
        if not _positive_number(rate_raw["fixed"]):
            _fail(f"{rp}.fixed", "rate must be a positive number of bits per use")
        rate_rule = FixedRate(float(rate_raw["fixed"]))
    elif set(rate_raw) == {"multiplex"}:
        r = rate_raw["multiplex"]
        if not (isinstance(r, (int, float)) and 0.0 < r < 0.5):
            _fail(f"{rp}.multiplex", "multiplexing gain must lie in (0, 0.5)")
        rate_rule = MultiplexRate(float(r))
    else:
        _fail(rp, "exactly one of 'fixed' or 'multiplex' is required")
    trials = _parse_trials(section, path, 10_000_000)
    if isinstance(trials, list) and len(trials) != len(snr):
        _fail(f"{path}.trials", f"per-point list must have {len(snr)} entries")
    estimator = _optional(section, path, "estimator", "indicator", str,
                          lambda v: v in ("indicator", "conditional"))
    if estimator == "conditional" and scheme is Scheme.DIRECT:
        _fail(f"{path}.estimator", "conditional estimator is undefined for the direct link")
    window = _optional(section, path, "fit_window", None, list,
                       lambda v: len(v) == 2 and v[0] < v[1], "[lo_db, hi_db]")
    return dict(scheme=scheme, m=m, snr_db=[float(x) for x in snr], rate_rule=rate_rule,
                trials=trials, estimator=estimator,
                fit_window=tuple(float(x) for x in window) if window else None)


def _validate_oracle_audit(section, path):
    beta1 = _optional(section, path, "beta1", 1.0, (int, float), _positive_number)
    beta2 = _optional(section, path, "beta2", 1.0, (int, float), _positive_number)
    trials = _parse_trials(section, path, 10_000_000)
    if isinstance(trials, list):
        _fail(f"{path}.trials", "use a single trial count")
    cells = []
    if "grid" in section:
        grid = _require(section, path, "grid", dict)
        gp = f"{path}.grid"
        ms = _require(grid, gp, "m", list, lambda v: all(isinstance(x, int) and x >= 2 for x in v))
        pols = _require(grid, gp, "policies", list, lambda v: all(p in _POLICIES for p in v))
        ratios = _require(grid, gp, "lambda_over_c", list,
                          lambda v: all(_positive_number(x) for x in v))
        for m in ms:
            for pol in pols:
                for ratio in ratios:
                    cells.append((m, _POLICIES[pol], float(ratio)))
    if "cells" in section:
        for i, cell in enumerate(section["cells"]):
            cp = f"{path}.cells[{i}]"
            if not isinstance(cell, dict):
                _fail(cp, "each cell is a mapping {m, policy, lambda_over_c}")
            m = _require(cell, cp, "m", int, lambda v: v >= 2, ">= 2")
            pol = _require(cell, cp, "policy", str, lambda v: v in _POLICIES)
            ratio = _require(cell, cp, "lambda_over_c", (int, float), _positive_number)
            cells.append((m, _POLICIES[pol], float(ratio)))
    if not cells:
        _fail(path, "provide 'grid' and/or 'cells'")
    return dict(beta1=float(beta1), beta2=float(beta2), trials=trials, cells=cells)


_VALIDATORS = {
    "collision_curve": _validate_collision_curve,
    "topology_study": _validate_topology_study,
    "proto_trace": _validate_proto_trace,
    "outage_curve": _validate_outage_curve,
    "oracle_audit": _validate_oracle_audit,
}

_LAMBDA_US = 1000.0  # collision statistics depend only on the ratio c/lambda


def _run_collision_curve(cfg: ExperimentConfig, threads: int) -> ResultTable:
    p = cfg.params
    rows = []
    warnings = []
    for policy in p["policies"]:
        for ratio in p["ratios"]:
            window = _LAMBDA_US / ratio
            if p["analytic"]:
                dist = TimerDistribution(policy, p["beta1"], p["beta2"], _LAMBDA_US)
                analytic = collision_prob_analytic(CollisionQuery(p["m"], 1.0 / ratio, dist))
            else:
                analytic = math.nan
            profiles = [RelayProfile(p["beta1"], p["beta2"])] * p["m"]
            rate, se = mc_collision_rate(
                policy, _LAMBDA_US, window, profiles, p["trials"], cfg.seed,
                kind=p["fading_kind"], k_factor=p["k_factor"], threads=threads,
                stream_tags=("collision-curve", policy.value, f"{ratio:.12g}"))
            if rate == 0.0:
                warnings.append(f"no collisions at lambda/c={ratio:g} ({policy.value}); "
                                "raise trials for a usable estimate")
            rows.append((ratio, policy.value, analytic, rate, se, p["trials"]))
    return ResultTable(
        ["lambda_over_c", "policy", "analytic", "mc_rate", "mc_stderr", "trials"],
        rows, {"warnings": warnings})


def _run_topology_study(cfg: ExperimentConfig, threads: int) -> ResultTable:
    p = cfg.params
    rows = []
    for v in p["exponents"]:
        for case in p["cases"]:
            topo = topology_case(case, v, p["m"])
            iid = all(pr == topo.profiles[0] for pr in topo.profiles)
            for policy in p["policies"]:
                if iid:
                    prof = topo.profiles[0]
                    dist = TimerDistribution(policy, prof.beta1, prof.beta2, _LAMBDA_US)
                    val = collision_prob_analytic(
                        CollisionQuery(p["m"], p["c_over_lambda"], dist))
                    rows.append((v, case.value, policy.value, "analytic", val, math.nan, 0))
                else:
                    rate, se = mc_collision_rate(
                        policy, _LAMBDA_US, p["c_over_lambda"] * _LAMBDA_US,
                        topo.profiles, p["trials"], cfg.seed, threads=threads,
                        stream_tags=("topology", case.value, policy.value, f"{v:.12g}"))
                    rows.append((v, case.value, policy.value, "mc", rate, se, p["trials"]))
    return ResultTable(
        ["exponent_v", "case", "policy", "method", "collision", "stderr", "trials"],
        rows, {})


def _run_proto_trace(cfg: ExperimentConfig, threads: int) -> ResultTable:
    p = cfg.params
    geom = p["geometry"]
    profiles = [RelayProfile(p["beta1"], p["beta2"])] * geom.m
    rng = substream(cfg.seed, "proto-trace")
    g1, g2 = sample_hop_gains(profiles, rng, p["rounds"],
                              kind=p["fading_kind"], k_factor=p["k_factor"])
    rows = []
    collisions = 0
    for i in range(p["rounds"]):
        gains = np.stack([g1[i], g2[i]], axis=1)
        trace = simulate_round(geom, p["timing"], p["policy"], p["lambda_us"], gains)
        collisions += trace.outcome.collided
        winner = trace.outcome.winner if trace.outcome.winner is not None else -1
        for j in range(geom.m):
            rows.append((i, j, trace.cts_arrivals[j], trace.outcome.timers[j],
                         trace.scheduled_fire[j], int(trace.fired[j]),
                         trace.hear_times[j], winner, int(trace.outcome.collided)))
    meta = {"collision_rate": collisions / p["rounds"],
            "window_c": collision_window(p["timing"])}
    return ResultTable(
        ["round", "relay", "cts_arrival", "timer", "scheduled_fire", "fired",
         "hear_time", "winner", "collided"],
        rows, meta)


def _run_outage_curve(cfg: ExperimentConfig, threads: int) -> ResultTable:
    p = cfg.params
    trials = p["trials"]
    schedule = trials if isinstance(trials, list) else None
    base_trials = trials[0] if isinstance(trials, list) else trials
    scn = DmtScenario(m=p["m"], snr_db_grid=tuple(p["snr_db"]), rate_rule=p["rate_rule"],
                      scheme=p["scheme"], trials_per_point=base_trials)
    curve = outage_curve(scn, cfg.seed, estimator=p["estimator"], threads=threads,
                         trials_schedule=schedule)
    warnings = []
    rows = []
    for i, (rho_db, pe, se) in enumerate(curve):
        rho = 10.0 ** (rho_db / 10.0)
        n = schedule[i] if schedule else base_trials
        rows.append((rho_db, p["rate_rule"].rate_at(rho), pe, se, n))
        if pe == 0.0:
            warnings.append(f"Pe = 0 at {rho_db} dB; raise trials to resolve the tail")
    meta = {"scheme": p["scheme"].value, "estimator": p["estimator"], "warnings": warnings}
    if p["fit_window"]:
        meta["diversity_slope"] = diversity_slope(curve, p["fit_window"])
        meta["fit_window_db"] = list(p["fit_window"])
    return ResultTable(["snr_db", "rate_bits", "pe", "stderr", "trials"], rows, meta)


def _run_oracle_audit(cfg: ExperimentConfig, threads: int) -> ResultTable:
    p = cfg.params
    rows = []
    worst = 0.0
    for m, policy, ratio in p["cells"]:
        dist = TimerDistribution(policy, p["beta1"], p["beta2"], _LAMBDA_US)
        query = CollisionQuery(m, 1.0 / ratio, dist)
        analytic = collision_prob_analytic(query)
        rate, se = mc_collision_rate(
            policy, _LAMBDA_US, query.window_c, [RelayProfile(p["beta1"], p["beta2"])] * m,
            p["trials"], cfg.seed, threads=threads,
            stream_tags=("oracle-audit", policy.value, m, f"{ratio:.12g}"))
        z = (rate - analytic) / se if se > 0 else math.inf
        worst = max(worst, abs(z))
        rows.append((m, policy.value, ratio, analytic, rate, se, z, p["trials"]))
    return ResultTable(
        ["m", "policy", "lambda_over_c", "analytic", "mc_rate", "mc_stderr",
         "z_score", "trials"],
        rows, {"worst_abs_z": worst})


_RUNNERS = {
    "collision_curve": _run_collision_curve,
    "topology_study": _run_topology_study,
    "proto_trace": _run_proto_trace,
    "outage_curve": _run_outage_curve,
    "oracle_audit": _run_oracle_audit,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Dispatch a validated config and stamp provenance metadata."""
    start = time.perf_counter()
    table = _RUNNERS[cfg.kind](cfg, threads)
    elapsed = time.perf_counter() - start
    meta = {"experiment": cfg.kind, "config_hash": cfg.config_hash, "seed": cfg.seed,
            "tool_version": __version__}
    meta.update(table.metadata)
    meta["wall_clock_s"] = round(elapsed, 3)
    table.metadata = meta
    return table


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def rows_as_csv(table: ResultTable) -> str:
    """Header plus data rows only (no metadata); byte-stable across reruns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def emit_csv(table: ResultTable, path) -> None:
    """Write '#'-commented metadata, one header row, then the data rows."""
    lines = []
    for key, val in table.metadata.items():
        if key == "warnings":
            for w in val:
                lines.append(f"# warning: {w}")
            continue
        lines.append(f"# {key}: {val}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for line in lines:
                fh.write(line + "\n")
            fh.write(rows_as_csv(table))
    except OSError as exc:
        raise OSError(f"cannot write results to {path!r}: {exc}") from exc


def read_csv(path) -> ResultTable:
    """Parse a file produced by emit_csv back into a ResultTable."""
    metadata = {}
    warnings = []
    rows = []
    columns = None
    with open(path, encoding="utf-8", newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                key, _, val = body.partition(":")
                if key.strip() == "warning":
                    warnings.append(val.strip())
                else:
                    metadata[key.strip()] = val.strip()
            else:
                data_lines.append(line)
    for record in csv.reader(data_lines):
        if not record:
            continue
        if columns is None:
            columns = record
            continue
        parsed = []
        for cell in record:
            try:
                parsed.append(int(cell))
            except ValueError:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
        rows.append(tuple(parsed))
    if warnings:
        metadata["warnings"] = warnings
    return ResultTable(columns or [], rows, metadata)
