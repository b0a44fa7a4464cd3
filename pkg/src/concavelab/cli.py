"""Experiment driver: the verifications as reproducible subcommands.

Configs are YAML (nested key/value); artifacts are CSV for tables and
JSON for reports, written into ``--out``.  Every artifact embeds the
tool version and a SHA-256 hash of the canonical config so reruns can be
diffed byte for byte; nothing time- or machine-dependent is emitted.

Exit codes: 0 when every configured assertion passes, 1 on a numerical
or assertion failure (a diagnostic JSON is still written), 2 on an
invalid config.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, concavity, oned, reactions, solver
from .grid import Domain, ball, box, interval, make_grid
from .linops import apply_laplacian, principal_eigenpair
from .reactions import Reaction, Transform
from .solver import (
    InitialGuessError,
    continuation_branch,
    energy_upper_bound,
    initial_guess,
    log_residual_sup,
    newton_solve,
    pohozaev_check,
)

__all__ = ["main", "run", "ConfigError", "ExperimentConfig", "load_config", "config_hash"]


class ConfigError(ValueError):
    pass


DEFAULT_TOLERANCES = {"newton": 1e-10, "eigen": 1e-12, "quad": 1e-10}
DEFAULT_RESOLUTION = {"interval": 401, "box": 81, "ball": 401}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; round-trips through YAML losslessly."""

    data: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.data, dict):
            raise ConfigError("config root must be a mapping")
        for key, value in {**DEFAULT_TOLERANCES, **self.data.get("tolerances", {})}.items():
            if not value > 0:
                raise ConfigError(f"tolerance {key} must be positive")
        seed = self.data.get("seed")
        if seed is not None and (not isinstance(seed, int) or seed < 0):
            raise ConfigError("seed must be a nonnegative integer")

    @property
    def experiment(self):
        return self.data.get("experiment")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls(load_config(path))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        loaded = yaml.safe_load(text)
        return cls(loaded if loaded is not None else {})

    def hash(self) -> str:
        return config_hash(self.data)


# ---------------------------------------------------------------------------
# config handling


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(canon.encode()).hexdigest()


def _domain_from(cfg: dict) -> Domain:
    section = cfg.get("domain")
    if section is None:
        raise ConfigError("config needs a 'domain' section")
    kind = section.get("kind")
    try:
        if kind == "interval":
            return interval(section["halfwidth"])
        if kind == "box":
            return box(*section["halfwidths"])
        if kind == "ball":
            return ball(section["radius"], section["ambient_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain section {section}: {exc}") from exc
    raise ConfigError(f"unknown domain kind {kind!r}")


def _resolution_from(cfg: dict, domain: Domain):
    res = cfg.get("resolution")
    if res is None:
        return DEFAULT_RESOLUTION[domain.kind]
    return res


def _reaction_from(section) -> Reaction:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError(f"bad reaction section {section!r}")
    kind = section["kind"]
    try:
        if kind == "lane_emden":
            return reactions.lane_emden(section["q"], section["sigma"])
        if kind == "log_schrodinger":
            return reactions.log_schrodinger()
        if kind == "dispersive_lane_emden":
            return reactions.dispersive_lane_emden(section["q"], section["sigma"])
        if kind == "dispersive_log":
            return reactions.dispersive_log()
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad reaction section {section}: {exc}") from exc
    raise ConfigError(f"unknown reaction kind {kind!r}")


def _transform_from(section) -> Transform:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError(f"bad transform section {section!r}")
    kind = section["kind"]
    try:
        if kind == "power":
            tr = reactions.power(section["alpha"])
        elif kind == "log":
            tr = reactions.log_transform()
        elif kind == "neg_log":
            tr = reactions.neg_log()
        elif kind == "sqrt_log":
            tr = reactions.sqrt_log(section["m"])
        elif kind == "atanh_poly":
            tr = reactions.atanh_poly(section["q"])
        elif kind == "sqrt_one_minus_log":
            tr = reactions.sqrt_one_minus_log()
        else:
            raise ConfigError(f"unknown transform kind {kind!r}")
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad transform section {section}: {exc}") from exc
    if section.get("negate"):
        tr = tr.negate()
    return tr


def _tolerances(cfg: dict) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    for key, value in tol.items():
        if not value > 0:
            raise ConfigError(f"tolerance {key} must be positive")
    return tol


def _schedule_from(cfg: dict):
    sched = cfg.get("schedule")
    if not isinstance(sched, dict):
        raise ConfigError("config needs a 'schedule' section")
    rule = sched.get("sigma_rule", "fixed")
    sigma = sched.get("sigma")
    if rule == "fixed" and sigma is None:
        raise ConfigError("fixed sigma rule needs schedule.sigma")
    if "qs" in sched:
        qs = [float(q) for q in sched["qs"]]
    else:
        try:
            qs = solver.geometric_q_schedule(
                sched["q_hi"], sched["q_lo"], sched.get("steps")
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad schedule {sched}: {exc}") from exc
    return qs, rule, sigma


# ---------------------------------------------------------------------------
# artifact writers


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows, cfg_hash: str) -> None:
    lines = [f"# version={__version__} config_sha256={cfg_hash}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: Path, payload: dict, cfg_hash: str) -> None:
    body = {"version": __version__, "config_sha256": cfg_hash}
    body.update(_jsonable(payload))
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")


def _field_rows(field):
    grid = field.grid
    if grid.is_radial:
        return ["r", "u"], [
            (float(r), float(v)) for r, v in zip(grid.axes[0], field.values)
        ]
    names = ["x", "y", "z"][: grid.ndim]
    coords = grid.coordinate_arrays()
    flat = [c.ravel() for c in coords] + [field.values.ravel()]
    return names + ["u"], list(zip(*(map(float, col) for col in flat)))


def _solve_payload(result) -> dict:
    return {
        "status": result.status,
        "converged": result.converged,
        "residual_sup": result.residual_sup,
        "newton_iters": result.newton_iters,
        "sup_norm": result.sup_norm,
        "energy": result.energy,
        "nehari_residual": result.nehari_residual,
    }


# ---------------------------------------------------------------------------
# runners

BRANCH_CSV_COLUMNS = [
    "q",
    "sigma",
    "sup_norm",
    "sup_norm_pow_qm1",
    "energy",
    "nehari_residual",
    "residual_sup",
    "newton_iters",
]


def _branch_rows(branch):
    rows = []
    for e in branch.entries:
        rows.append(
            (
                e.q,
                e.sigma,
                e.result.sup_norm,
                e.result.sup_norm ** (e.q - 1.0),
                e.result.energy,
                e.result.nehari_residual,
                e.result.residual_sup,
                e.result.newton_iters,
            )
        )
    return rows


def _run_solve(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    reaction = _reaction_from(cfg.get("reaction"))
    tol = _tolerances(cfg)
    result = newton_solve(grid, reaction, initial_guess(grid, reaction), tol["newton"])
    payload = {"experiment": "solve", "reaction": reaction.label}
    payload.update(_solve_payload(result))
    _write_json(out / "solve.json", payload, cfg_hash)
    header, rows = _field_rows(result.field)
    _write_csv(out / "field.csv", header, rows, cfg_hash)
    return (0 if result.converged else 1), payload


def _run_branch(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    qs, rule, sigma = _schedule_from(cfg)
    tol = _tolerances(cfg)
    branch = continuation_branch(
        grid, sigma_rule=rule, sigma=sigma, qs=qs, tol=tol["newton"]
    )
    _write_csv(out / "branch.csv", BRANCH_CSV_COLUMNS, _branch_rows(branch), cfg_hash)
    payload = {
        "experiment": "branch",
        "complete": branch.complete,
        "points": len(branch.entries),
    }
    _write_json(out / "branch.json", payload, cfg_hash)
    return (0 if branch.complete else 1), payload


def _run_converge_eigen(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    qs, rule, sigma = _schedule_from(cfg)
    if rule != "fixed":
        raise ConfigError("converge-eigen runs at fixed sigma")
    tol = _tolerances(cfg)
    pair = principal_eigenpair(grid, tol["eigen"])
    target = 1.0 + pair.lambda1 / sigma
    branch = continuation_branch(
        grid, sigma_rule="fixed", sigma=sigma, qs=qs, tol=tol["newton"]
    )
    rows = []
    errors = []
    for e in branch.entries:
        err = abs(e.result.sup_norm ** (e.q - 1.0) - target)
        errors.append(err)
        norm_dist = float(
            np.max(np.abs(e.result.field.values / e.result.sup_norm - pair.phi1.values))
        )
        rows.append(
            (
                e.q,
                e.sigma,
                e.result.sup_norm,
                e.result.sup_norm ** (e.q - 1.0),
                err,
                norm_dist,
                e.result.residual_sup,
                e.result.newton_iters,
            )
        )
    _write_csv(
        out / "branch.csv",
        ["q", "sigma", "sup_norm", "sup_norm_pow_qm1", "limit_error", "phi1_sup_dist",
         "residual_sup", "newton_iters"],
        rows,
        cfg_hash,
    )
    decreasing = all(a > b for a, b in zip(errors, errors[1:]))
    payload = {
        "experiment": "converge-eigen",
        "lambda1": pair.lambda1,
        "target": target,
        "limit_errors": errors,
        "strictly_decreasing": decreasing,
        "complete": branch.complete,
    }
    _write_json(out / "converge_eigen.json", payload, cfg_hash)
    return (0 if branch.complete and decreasing else 1), payload


def _run_converge_log(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    qs, rule, _sigma = _schedule_from(cfg)
    if rule != "log_path":
        raise ConfigError("converge-log requires schedule.sigma_rule: log_path")
    tol = _tolerances(cfg)
    branch = continuation_branch(grid, sigma_rule="log_path", qs=qs, tol=tol["newton"])
    rows = []
    residuals = []
    for e in branch.entries:
        rel = log_residual_sup(e.result.field) / max(1.0, e.result.sup_norm)
        residuals.append(rel)
        rows.append(
            (
                e.q,
                e.sigma,
                e.result.sup_norm,
                rel,
                e.result.energy,
                e.result.newton_iters,
            )
        )
    _write_csv(
        out / "branch.csv",
        ["q", "sigma", "sup_norm", "log_residual_rel", "energy", "newton_iters"],
        rows,
        cfg_hash,
    )
    decreasing = all(a > b for a, b in zip(residuals, residuals[1:]))
    payload = {
        "experiment": "converge-log",
        "log_residuals_rel": residuals,
        "strictly_decreasing": decreasing,
        "complete": branch.complete,
        "terminal_sup": branch.entries[-1].result.sup_norm if branch.entries else None,
    }
    _write_json(out / "converge_log.json", payload, cfg_hash)
    return (0 if branch.complete and decreasing else 1), payload


def _concavity_report_payload(rep) -> dict:
    return {
        "transform": rep.transform,
        "check_mode": rep.check_mode,
        "verdict": rep.verdict,
        "extreme_eigenvalue": rep.extreme_eigenvalue,
        "witness": list(rep.witness),
        "margins": {"eps_floor": rep.eps_floor, "layer_k": rep.layer_k,
                    "strict_margin": rep.margin},
        "check_set_size": rep.check_set_size,
    }


def _run_concavity(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    reaction = _reaction_from(cfg.get("reaction"))
    tol = _tolerances(cfg)
    result = newton_solve(grid, reaction, initial_guess(grid, reaction), tol["newton"])
    if not result.converged:
        payload = {"experiment": "concavity", "error": f"solve failed: {result.status}"}
        _write_json(out / "concavity.json", payload, cfg_hash)
        return 1, payload

    checks = cfg.get("transforms", [])
    failures = []
    report_payloads = []
    sample_columns = []
    for entry in checks:
        tr = _transform_from(entry)
        rep = concavity.check_transform_concavity(
            result.field,
            tr,
            eps_floor=entry.get("eps_floor"),
            layer_k=entry.get("layer_k", 3),
        )
        entry = _concavity_report_payload(rep)
        expect = entry.get("expect")
        if expect is not None:
            entry["expect"] = expect
            if rep.verdict != expect:
                failures.append(f"{rep.transform}: {rep.verdict} (expected {expect})")
        report_payloads.append(entry)
        lo, hi = tr.validity
        u_vals = result.field.values
        in_dom = (u_vals > lo) & (u_vals <= hi)
        vals = np.full(u_vals.shape, float("nan"))
        with np.errstate(divide="ignore", invalid="ignore"):
            vals[in_dom] = np.atleast_1d(reactions.transform_value(tr, u_vals[in_dom]))
        sample_columns.append((rep.transform, vals))

    sweep_payload = None
    if cfg.get("alphas"):
        sweep = concavity.alpha_sweep(result.field, sorted(cfg["alphas"]))
        sweep_payload = {
            "alphas": list(sweep.alphas),
            "verdicts": list(sweep.verdicts),
            "largest_passing": sweep.largest_passing,
            "consistent": sweep.consistent,
        }
        if strict and not sweep.consistent:
            failures.append("alpha sweep verdicts not monotone")

    payload = {
        "experiment": "concavity",
        "reaction": reaction.label,
        "solve": _solve_payload(result),
        "reports": report_payloads,
        "alpha_sweep": sweep_payload,
        "failures": failures,
    }
    _write_json(out / "concavity.json", payload, cfg_hash)
    header, rows = _field_rows(result.field)
    for name, vals in sample_columns:
        header.append(name)
        flat = vals.ravel()
        rows = [row + (float(flat[i]),) for i, row in enumerate(rows)]
    _write_csv(out / "field.csv", header, rows, cfg_hash)
    return (0 if not failures else 1), payload


def _run_quasiconcavity(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    reaction = _reaction_from(cfg.get("reaction"))
    tol = _tolerances(cfg)
    if cfg.get("seed") is None:
        raise ConfigError("quasiconcavity sampling needs a seed")
    result = newton_solve(grid, reaction, initial_guess(grid, reaction), tol["newton"])
    level_fracs = cfg.get("level_fractions", [0.25, 0.5, 0.75])
    report = concavity.quasiconcavity_check(
        result.field,
        [f * result.sup_norm for f in level_fracs],
        sample_pairs=cfg.get("sample_pairs", 200),
        seed=cfg["seed"],
    )
    payload = {
        "experiment": "quasiconcavity",
        "passed": report.passed,
        "levels": list(report.levels),
        "sample_pairs": report.sample_pairs,
        "seed": report.seed,
        "slack": report.slack,
        "failures": [list(f[1]) for f in report.failures],
    }
    _write_json(out / "quasiconcavity.json", payload, cfg_hash)
    return (0 if report.passed and result.converged else 1), payload


def _run_pohozaev(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    tol = _tolerances(cfg)
    reaction = reactions.log_schrodinger()
    result = newton_solve(grid, reaction, initial_guess(grid, reaction), tol["newton"])
    report = pohozaev_check(result, domain)
    payload = {
        "experiment": "pohozaev",
        "sup_norm": report.sup_norm,
        "threshold": report.threshold,
        "ambient_dim": report.ambient_dim,
        "passed": report.passed and result.converged,
    }
    _write_json(out / "pohozaev.json", payload, cfg_hash)
    return (0 if payload["passed"] else 1), payload


def _run_dispersive(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    tol = _tolerances(cfg)
    q = cfg.get("q", 2.0)
    sigma = cfg.get("sigma", 4.0)
    failures = []
    payload = {"experiment": "dispersive", "q": q, "sigma": sigma}

    poly = reactions.dispersive_lane_emden(q, sigma)
    try:
        res_poly = newton_solve(grid, poly, initial_guess(grid, poly), tol["newton"])
        rep_poly = concavity.check_transform_concavity(
            res_poly.field, reactions.atanh_poly(q)
        )
        payload["polynomial"] = {
            "solve": _solve_payload(res_poly),
            "transform": _concavity_report_payload(rep_poly),
        }
        if not res_poly.converged:
            failures.append(f"polynomial solve: {res_poly.status}")
        elif res_poly.sup_norm >= 1.0 - 1e-3:
            failures.append("polynomial sup norm not below 1 - 1e-3")
        elif rep_poly.verdict != "holds strictly":
            failures.append(f"atanh transform: {rep_poly.verdict}")
    except InitialGuessError as exc:
        payload["polynomial"] = {"error": str(exc)}
        failures.append(f"polynomial: {exc}")

    logd = reactions.dispersive_log()
    res_log = newton_solve(grid, logd, initial_guess(grid, logd), tol["newton"])
    rep_log = concavity.check_transform_concavity(
        res_log.field, reactions.sqrt_one_minus_log()
    )
    payload["logarithmic"] = {
        "solve": _solve_payload(res_log),
        "transform": _concavity_report_payload(rep_log),
    }
    if not res_log.converged:
        failures.append(f"logarithmic solve: {res_log.status}")
    elif res_log.sup_norm >= 1.0 - 1e-3:
        failures.append("logarithmic sup norm not below 1 - 1e-3")
    elif rep_log.verdict != "holds strictly":
        failures.append(f"sqrt(1 - log) transform: {rep_log.verdict}")

    payload["failures"] = failures
    _write_json(out / "dispersive.json", payload, cfg_hash)
    return (0 if not failures else 1), payload


def _run_oned_table(cfg, out, strict, cfg_hash):
    bspec = cfg.get("b_grid", {"lo": 0.4, "hi": 4.0, "count": 20})
    if isinstance(bspec, dict):
        bs = np.geomspace(bspec["lo"], bspec["hi"], int(bspec["count"]))
    else:
        bs = np.asarray([float(b) for b in bspec])
    samples = int(cfg.get("samples_per_unit", 10_000))
    rows = []
    for b in bs:
        sol = oned.solve_interval(float(b), n=samples)
        shot = oned.shoot_profile(sol.m, samples)
        rows.append(
            (
                float(b),
                sol.m,
                sol.slope,
                sol.alpha_star,
                sol.x_star,
                abs(shot.b - float(b)),
                shot.energy_drift,
            )
        )
    _write_csv(
        out / "oned_table.csv",
        ["b", "m", "slope", "alpha_star", "x_star", "b_shoot_error", "energy_drift"],
        rows,
        cfg_hash,
    )
    ms = [r[1] for r in rows]
    slopes = [r[2] for r in rows]
    alphas = [r[3] for r in rows]
    monotone = {
        "m_decreasing": all(a > b for a, b in zip(ms, ms[1:])),
        "slope_decreasing": all(a > b for a, b in zip(slopes, slopes[1:])),
        "alpha_decreasing": all(a > b for a, b in zip(alphas, alphas[1:])),
    }
    payload = {"experiment": "oned-table", "rows": len(rows), **monotone}
    _write_json(out / "oned_table.json", payload, cfg_hash)
    return (0 if all(monotone.values()) else 1), payload


def _run_tensor_check(cfg, out, strict, cfg_hash):
    bs = cfg.get("halfwidths")
    if not bs:
        raise ConfigError("tensor-check needs 'halfwidths'")
    resolution = int(cfg.get("resolution", 161))
    field = oned.tensor_solution(bs, resolution)
    sup = field.sup_norm()
    expected = 1.0
    for b in bs:
        expected *= oned.solve_m_of_b(float(b))
    margin = 0.1 * min(float(b) for b in bs)
    residual = log_residual_sup(field, boundary_margin=margin)
    refined = oned.tensor_solution(bs, 2 * resolution - 1)
    residual_half = log_residual_sup(refined, boundary_margin=margin)
    ratio = residual / residual_half
    payload = {
        "experiment": "tensor-check",
        "halfwidths": [float(b) for b in bs],
        "sup_norm": sup,
        "expected_sup": expected,
        "sup_error": abs(sup - expected),
        "residual": residual,
        "residual_half_h": residual_half,
        "residual_ratio": ratio,
        "boundary_margin": margin,
    }
    failures = []
    if abs(sup - expected) > 1e-6:
        failures.append("sup norm does not match the product of factor maxima")
    if not 3.0 <= ratio <= 5.0:
        failures.append("residual does not contract like h^2")
    if cfg.get("alphas"):
        sweep = concavity.alpha_sweep(field, sorted(cfg["alphas"]))
        payload["alpha_sweep"] = {
            "alphas": list(sweep.alphas),
            "verdicts": list(sweep.verdicts),
            "largest_passing": sweep.largest_passing,
        }
    payload["failures"] = failures
    _write_json(out / "tensor.json", payload, cfg_hash)
    return (0 if not failures else 1), payload


def _run_gausson_residual(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    if domain.kind != "box":
        raise ConfigError("gausson-residual runs on box domains")
    res = cfg.get("resolutions", [41, 81])
    if len(res) != 2:
        raise ConfigError("gausson-residual needs two resolutions")
    values = []
    for n in res:
        grid = make_grid(domain, n)
        field = oned.gausson_field(grid)
        r = -apply_laplacian(field).values - reactions.f(
            reactions.log_schrodinger(), field.values
        )
        values.append(float(np.max(np.abs(r[grid.interior_mask]))))
    ratio = values[0] / values[1]
    payload = {
        "experiment": "gausson-residual",
        "resolutions": [int(n) for n in res],
        "residuals": values,
        "ratio": ratio,
        "ratio_in_band": bool(3.5 <= ratio <= 4.5),
    }
    _write_json(out / "gausson.json", payload, cfg_hash)
    return (0 if payload["ratio_in_band"] else 1), payload


def _run_energy_bound(cfg, out, strict, cfg_hash):
    domain = _domain_from(cfg)
    grid = make_grid(domain, _resolution_from(cfg, domain))
    tol = _tolerances(cfg)
    q = cfg["q"]
    sigma = cfg["sigma"]
    reaction = reactions.lane_emden(q, sigma)
    result = newton_solve(grid, reaction, initial_guess(grid, reaction), tol["newton"])
    pair = principal_eigenpair(grid, tol["eigen"])
    bound = energy_upper_bound(grid, q, sigma, pair.phi1)
    payload = {
        "experiment": "energy-bound",
        "q": q,
        "sigma": sigma,
        "energy": result.energy,
        "bound": bound,
        "passed": bool(result.converged and result.energy <= bound),
    }
    _write_json(out / "energy_bound.json", payload, cfg_hash)
    return (0 if payload["passed"] else 1), payload


RUNNERS = {
    "solve": _run_solve,
    "branch": _run_branch,
    "converge-eigen": _run_converge_eigen,
    "converge-log": _run_converge_log,
    "concavity": _run_concavity,
    "quasiconcavity": _run_quasiconcavity,
    "pohozaev": _run_pohozaev,
    "dispersive": _run_dispersive,
    "oned-table": _run_oned_table,
    "tensor-check": _run_tensor_check,
    "gausson-residual": _run_gausson_residual,
    "energy-bound": _run_energy_bound,
}


def run(experiment: str, cfg, out_dir, strict: bool = False) -> int:
    """Execute one subcommand; returns the process exit code."""
    if isinstance(cfg, ExperimentConfig):
        cfg = cfg.to_dict()
    if experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    declared = cfg.get("experiment")
    if declared is not None and declared != experiment:
        raise ConfigError(
            f"config declares experiment {declared!r} but {experiment!r} was requested"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    code, _payload = RUNNERS[experiment](cfg, out, strict, config_hash(cfg))
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="concavelab",
        description="Verifications for the logarithmic and power Dirichlet problems",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--out", type=str, default="out")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--resolution", type=int, default=None)
        p.add_argument("--strict", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else {}
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.resolution is not None:
            cfg["resolution"] = args.resolution
        code = run(args.experiment, cfg, args.out, strict=args.strict)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (solver.InitialGuessError, ValueError) as exc:
        diag = {"error": str(exc), "experiment": args.experiment}
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "failure.json", diag, config_hash(cfg))
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        print(f"{args.experiment}: ok")
    else:
        print(f"{args.experiment}: FAILED (see artifacts)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
