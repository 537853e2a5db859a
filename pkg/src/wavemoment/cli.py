"""Command-line interface: analyze / synthesize / verify / sweep.

Configs are JSON; reports are JSON with all timing data segregated under a
separate key so the remainder is byte-identical across repeated runs.  Exit
codes: 0 success, 2 controllability conditions violated, 3 numerical failure
during synthesis or verification, 4 bad input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from . import coupling, moments, spectrum, waveform
from .exceptions import (BadInput, BetaZero, CollisionInBlock,
                         ConditioningExceeded, DegenerateEigenvector,
                         GridTooCoarse, ModeOutOfRange, NonConvergence,
                         RepeatedEigenvalues, SingularSystem)
from .tolerances import Tolerances, from_profile

__all__ = ["ProblemConfig", "SweepSpec", "parse_config", "serialize_config",
           "run", "main"]

EXIT_OK = 0
EXIT_CONDITIONS = 2
EXIT_NUMERICAL = 3
EXIT_BAD_INPUT = 4

METHODS = ("raw", "edd", "n2_sharp")
STATE_POINTS = 513
DEFAULT_SAMPLES = 2048

_NUMERICAL_ERRORS = (SingularSystem, ConditioningExceeded, BetaZero,
                     CollisionInBlock, GridTooCoarse, NonConvergence,
                     DegenerateEigenvector)


@dataclasses.dataclass
class SweepSpec:
    parameter: str  # "T" or "K"
    values: list


@dataclasses.dataclass
class ProblemConfig:
    a: np.ndarray
    b: np.ndarray
    duration: float
    k_max: int = 16
    method: str = "raw"
    target: moments.TargetSpec = dataclasses.field(
        default_factory=lambda: moments.TargetSpec({}, {}))
    samples: int = DEFAULT_SAMPLES
    tolerance_overrides: dict = dataclasses.field(default_factory=dict)
    sweep: SweepSpec | None = None

    @property
    def n(self) -> int:
        return self.a.shape[0]


def _check_target_entry(raw, n_comp, label, errors):
    table = {}
    if not isinstance(raw, list):
        errors.append(f"target.{label} must be a list of [mode, coefficients]")
        return table
    for item in raw:
        if (not isinstance(item, list) or len(item) != 2
                or not isinstance(item[0], int) or isinstance(item[0], bool)):
            errors.append(f"target.{label} entries must be [int mode, [coefficients]]")
            continue
        mode, coefs = item
        if mode < 1:
            errors.append(f"target.{label}: mode {mode} must be >= 1")
            continue
        if (not isinstance(coefs, list) or len(coefs) != n_comp
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                           and math.isfinite(c) for c in coefs)):
            errors.append(f"target.{label} mode {mode}: expected {n_comp} "
                          "finite numbers")
            continue
        if mode in table:
            errors.append(f"target.{label}: duplicate mode {mode}")
            continue
        table[mode] = [float(c) for c in coefs]
    return table


def parse_config(source: str) -> ProblemConfig:
    """Parse a JSON config from a path or a literal JSON string.

    All validation problems are gathered and raised together as BadInput.
    """
    text = source
    if not source.lstrip().startswith("{"):
        if not os.path.exists(source):
            raise BadInput(f"config file not found: {source}")
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadInput(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise BadInput("config must be a JSON object")

    errors = []
    known = {"A", "b", "T", "K", "method", "target", "samples",
             "tolerances", "sweep"}
    for key in doc:
        if key not in known:
            errors.append(f"unknown config key {key!r}")

    def is_num(x):
        return isinstance(x, (int, float)) and not isinstance(x, bool) \
            and math.isfinite(x)

    a_raw = doc.get("A")
    n_comp = 0
    a = np.zeros((0, 0))
    if (isinstance(a_raw, list) and a_raw
            and all(isinstance(r, list) and len(r) == len(a_raw)
                    and all(is_num(x) for x in r) for r in a_raw)):
        a = np.array(a_raw, dtype=float)
        n_comp = a.shape[0]
    else:
        errors.append("A must be a nonempty square matrix of finite numbers")

    b_raw = doc.get("b")
    b = np.zeros(0)
    if isinstance(b_raw, list) and all(is_num(x) for x in b_raw):
        b = np.array(b_raw, dtype=float)
        if n_comp and b.shape != (n_comp,):
            errors.append(f"b must have {n_comp} entries to match A")
        elif not np.any(b):
            errors.append("b must not be identically zero")
    else:
        errors.append("b must be a list of finite numbers")

    duration = doc.get("T")
    if not (is_num(duration) and duration > 0):
        errors.append("T must be a positive number")
        duration = 1.0

    k_max = doc.get("K", 16)
    if not (isinstance(k_max, int) and not isinstance(k_max, bool) and k_max >= 1):
        errors.append("K must be an integer >= 1")
        k_max = 16

    method = doc.get("method", "raw")
    if method not in METHODS:
        errors.append(f"method must be one of {METHODS}")
        method = "raw"

    target_raw = doc.get("target", {})
    z0, z1 = {}, {}
    if isinstance(target_raw, dict):
        for key in target_raw:
            if key not in ("z0", "z1"):
                errors.append(f"unknown target key {key!r}")
        if n_comp:
            z0 = _check_target_entry(target_raw.get("z0", []), n_comp, "z0", errors)
            z1 = _check_target_entry(target_raw.get("z1", []), n_comp, "z1", errors)
    else:
        errors.append("target must be an object with z0/z1 lists")
    top_mode = max(list(z0) + list(z1), default=0)
    if top_mode > k_max:
        errors.append(f"K = {k_max} is below the largest target mode {top_mode}")

    samples = doc.get("samples", DEFAULT_SAMPLES)
    if not (isinstance(samples, int) and not isinstance(samples, bool)
            and samples >= 2):
        errors.append("samples must be an integer >= 2")
        samples = DEFAULT_SAMPLES

    tol_over = doc.get("tolerances", {})
    if isinstance(tol_over, dict):
        valid = {f.name for f in dataclasses.fields(Tolerances)}
        for key, val in tol_over.items():
            if key not in valid:
                errors.append(f"unknown tolerance {key!r}")
            elif not (is_num(val) and val > 0):
                errors.append(f"tolerance {key!r} must be a positive number")
    else:
        errors.append("tolerances must be an object")
        tol_over = {}

    sweep = None
    sweep_raw = doc.get("sweep")
    if sweep_raw is not None:
        if (not isinstance(sweep_raw, dict)
                or sweep_raw.get("parameter") not in ("T", "K")
                or not isinstance(sweep_raw.get("values"), list)
                or not sweep_raw["values"]):
            errors.append('sweep must be {"parameter": "T"|"K", "values": [...]}')
        else:
            vals = sweep_raw["values"]
            if sweep_raw["parameter"] == "K":
                if not all(isinstance(v, int) and not isinstance(v, bool)
                           and v >= max(1, top_mode) for v in vals):
                    errors.append("sweep K values must be integers >= the "
                                  "largest target mode")
                else:
                    sweep = SweepSpec("K", [int(v) for v in vals])
            else:
                if not all(is_num(v) and v > 0 for v in vals):
                    errors.append("sweep T values must be positive numbers")
                else:
                    sweep = SweepSpec("T", [float(v) for v in vals])

    if method == "n2_sharp" and n_comp and n_comp != 2:
        errors.append("method n2_sharp requires a two-component system")
    if method == "n2_sharp" and n_comp == 2 and b.shape == (2,):
        if b[0] == 0 or abs(b[1]) > 1e-12 * abs(b[0]):
            errors.append("method n2_sharp requires b proportional to (1, 0)")

    if errors:
        raise BadInput(errors)
    return ProblemConfig(
        a=a, b=b, duration=float(duration), k_max=k_max, method=method,
        target=moments.TargetSpec(z0, z1), samples=samples,
        tolerance_overrides={k: float(v) for k, v in tol_over.items()},
        sweep=sweep)


def serialize_config(config: ProblemConfig) -> dict:
    """Inverse of parse_config, up to field ordering."""
    doc = {
        "A": [[float(x) for x in row] for row in config.a],
        "b": [float(x) for x in config.b],
        "T": config.duration,
        "K": config.k_max,
        "method": config.method,
        "target": {
            "z0": [[n, [float(c.real) for c in config.target.z0[n]]]
                   for n in sorted(config.target.z0)],
            "z1": [[n, [float(c.real) for c in config.target.z1[n]]]
                   for n in sorted(config.target.z1)],
        },
        "samples": config.samples,
        "tolerances": dict(sorted(config.tolerance_overrides.items())),
    }
    if config.sweep is not None:
        doc["sweep"] = {"parameter": config.sweep.parameter,
                        "values": list(config.sweep.values)}
    return doc


def _resolve_tolerances(config: ProblemConfig) -> Tolerances:
    tol = from_profile()
    if config.tolerance_overrides:
        tol = tol.replace(**config.tolerance_overrides)
    return tol


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _conditions_dict(report: coupling.ConditionsReport) -> dict:
    return {
        "kalman_rank": report.kalman_rank,
        "kalman_ok": report.kalman_ok,
        "beta_magnitudes": report.beta_magnitudes,
        "beta_ok": report.beta_ok,
        "resonances": [list(r) for r in report.resonances],
        "t_min": report.t_min,
        "t_ok": report.t_ok,
        "overall_controllable": report.overall_controllable,
    }


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_control_files(out_dir: str, control, samples: int):
    t = np.linspace(0.0, control.duration, samples)
    values = control.evaluate(t)
    path = os.path.join(out_dir, "control.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,f\n")
        for ti, fi in zip(t, values):
            fh.write(f"{_fmt(ti)},{_fmt(fi.real)}\n")
    combo = {
        "duration": control.duration,
        "terms": [
            {"frequency_re": float(nu.real), "frequency_im": float(nu.imag),
             "amplitude_re": float(am.real), "amplitude_im": float(am.imag)}
            for nu, am in zip(control.frequencies, control.amplitudes)
        ],
    }
    with open(os.path.join(out_dir, "control_modes.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(combo), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_state_file(out_dir: str, modal, spec):
    x = np.linspace(0.0, math.pi, STATE_POINTS)
    u, ut = waveform.reconstruct(modal, spec, x)
    n = u.shape[1]
    header = "x," + ",".join(f"u{j}" for j in range(1, n + 1)) \
        + "," + ",".join(f"ut{j}" for j in range(1, n + 1))
    with open(os.path.join(out_dir, "state.csv"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for i, xi in enumerate(x):
            row = [_fmt(xi)]
            row += [_fmt(u[i, j].real) for j in range(n)]
            row += [_fmt(ut[i, j].real) for j in range(n)]
            fh.write(",".join(row) + "\n")


def _write_report(out_dir: str | None, report: dict):
    if out_dir is None:
        return
    with open(os.path.join(out_dir, "report.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare(config: ProblemConfig, tol: Tolerances):
    """Shared pipeline head: decomposition, grid, modal target, moments."""
    system = coupling.CouplingSystem(config.a, config.b)
    spec = coupling.decompose(system, tol=tol)
    grid = spectrum.build_frequencies(spec, config.k_max, tol=tol)
    if config.method == "n2_sharp":
        norm = moments.n2_normalize_eigvecs(spec, tol=tol, b=system.b)
        spec_used = norm.decomposition
        modal = moments.n2_sharp_targets(config.target, norm, grid)
    else:
        spec_used = spec
        modal = moments.target_to_modal(config.target, spec, grid)
    gamma = moments.moments_from_target(modal, spec_used, grid,
                                        config.duration, tol=tol)
    basis = "raw" if config.method == "raw" else "edd"
    edd = spectrum.build_edd(grid, tol=tol) if basis == "edd" else None
    ms = moments.assemble_gram(grid, config.duration, basis_kind=basis,
                               edd=edd, tol=tol)
    ms.gamma = gamma
    return spec_used, grid, modal, ms, edd


def _synthesis_dict(control, ms) -> dict:
    return {
        "basis": ms.basis_kind,
        "size": int(ms.gram.shape[0]),
        "cond_estimate": ms.cond_estimate,
        "control_norm": control.l2_norm(),
        "moment_residual": control.moment_residual,
        "realification_residual": control.realification_residual,
    }


def _sweep_point(config: ProblemConfig, tol: Tolerances) -> dict:
    row = {"T": config.duration, "K": config.k_max, "status": "ok",
           "cond_estimate": None, "control_norm": None,
           "moment_residual": None, "max_rel_error": None}
    try:
        spec_used, grid, modal, ms, edd = _prepare(config, tol)
        row["cond_estimate"] = ms.cond_estimate
        control = moments.synthesize(ms, grid, edd=edd, tol=tol)
        control = moments.realify(control, tol=tol)
        row["control_norm"] = control.l2_norm()
        row["moment_residual"] = control.moment_residual
        report = waveform.verify(spec_used, grid, control, modal,
                                 config.duration, tol=tol)
        row["max_rel_error"] = report.max_rel_error
        if not report.passed:
            row["status"] = "verify_failed"
    except _NUMERICAL_ERRORS as exc:
        row["status"] = type(exc).__name__
    return row


def run(command: str, config: ProblemConfig, out_dir: str | None = None,
        method: str | None = None, force: bool = False):
    """Execute one CLI command; returns (report dict, exit code).

    ``method`` overrides the config method.  ``force`` skips the
    controllability gate so that failure modes downstream stay observable;
    forced runs are outside the normal report guarantees.
    """
    if method is not None:
        if method not in METHODS:
            raise BadInput(f"method must be one of {METHODS}")
        config = dataclasses.replace(config, method=method)
    tol = _resolve_tolerances(config)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    timings = {}
    report = {"command": command, "method": config.method,
              "T": config.duration, "K": config.k_max, "forced": force}
    started = time.perf_counter()

    def finish(code: int) -> tuple:
        timings["total_s"] = time.perf_counter() - started
        out = {"data": report, "timings": timings}
        _write_report(out_dir, out)
        return out, code

    try:
        system = coupling.CouplingSystem(config.a, config.b)
    except ValueError as exc:
        report["error"] = str(exc)
        return finish(EXIT_BAD_INPUT)

    try:
        conditions = coupling.analyze(system, config.duration, tol=tol)
    except (RepeatedEigenvalues, NonConvergence) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return finish(EXIT_CONDITIONS if isinstance(exc, RepeatedEigenvalues)
                      else EXIT_NUMERICAL)
    report["conditions"] = _conditions_dict(conditions)

    if command == "analyze":
        return finish(EXIT_OK if conditions.overall_controllable
                      else EXIT_CONDITIONS)

    if command == "sweep":
        if config.sweep is None:
            raise BadInput("sweep command requires a sweep section in the config")
        rows = []
        for value in config.sweep.values:
            if config.sweep.parameter == "T":
                point = dataclasses.replace(config, duration=float(value))
            else:
                point = dataclasses.replace(config, k_max=int(value))
            t0 = time.perf_counter()
            rows.append(_sweep_point(point, tol))
            timings[f"point_{value}_s"] = time.perf_counter() - t0
        report["sweep"] = {"parameter": config.sweep.parameter,
                           "values": list(config.sweep.values), "rows": rows}
        if out_dir is not None:
            with open(os.path.join(out_dir, "sweep.csv"), "w",
                      encoding="utf-8", newline="\n") as fh:
                cols = ["T", "K", "cond_estimate", "control_norm",
                        "moment_residual", "max_rel_error", "status"]
                fh.write(",".join(cols) + "\n")
                for row in rows:
                    cells = []
                    for col in cols:
                        val = row[col]
                        if val is None:
                            cells.append("")
                        elif isinstance(val, str):
                            cells.append(val)
                        else:
                            cells.append(_fmt(val))
                    fh.write(",".join(cells) + "\n")
        return finish(EXIT_OK)

    if command not in ("synthesize", "verify"):
        raise BadInput(f"unknown command {command!r}")

    if not conditions.overall_controllable and not force:
        report["error"] = "controllability conditions violated"
        return finish(EXIT_CONDITIONS)

    try:
        t0 = time.perf_counter()
        spec_used, grid, modal, ms, edd = _prepare(config, tol)
        timings["setup_s"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        control = moments.synthesize(ms, grid, edd=edd, tol=tol)
        control = moments.realify(control, tol=tol)
        timings["synthesis_s"] = time.perf_counter() - t0
    except ModeOutOfRange as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return finish(EXIT_BAD_INPUT)
    except _NUMERICAL_ERRORS as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return finish(EXIT_NUMERICAL)

    report["synthesis"] = _synthesis_dict(control, ms)
    if out_dir is not None:
        _write_control_files(out_dir, control, config.samples)

    if command == "synthesize":
        return finish(EXIT_OK)

    t0 = time.perf_counter()
    result = waveform.verify(spec_used, grid, control, modal,
                             config.duration, tol=tol)
    timings["verification_s"] = time.perf_counter() - t0
    report["verification"] = {
        "max_rel_error": result.max_rel_error,
        "passed": result.passed,
        "wellposedness_ratio": result.wellposedness_ratio,
    }
    if out_dir is not None:
        achieved = waveform.duhamel_exact(spec_used, grid, control,
                                          config.duration, tol=tol)
        _write_state_file(out_dir, achieved, spec_used)
    return finish(EXIT_OK if result.passed else EXIT_NUMERICAL)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wavemoment",
        description="Boundary control synthesis for coupled wave systems "
                    "via the moment method.")
    parser.add_argument("command", choices=["analyze", "synthesize",
                                            "verify", "sweep"])
    parser.add_argument("--config", required=True,
                        help="path to a JSON problem description")
    parser.add_argument("--out", default=None,
                        help="directory for report/control/state files")
    parser.add_argument("--method", choices=list(METHODS), default=None,
                        help="override the config synthesis method")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized self-tests (unused by the "
                             "four standard commands)")
    parser.add_argument("--force", action="store_true",
                        help="attempt synthesis even when conditions fail")
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config)
        report, code = run(args.command, config, out_dir=args.out,
                           method=args.method, force=args.force)
    except BadInput as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(json.dumps(_json_safe(report), indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
