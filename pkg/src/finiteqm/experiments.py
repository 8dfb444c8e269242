"""Experiment runner: flat config files in, result files plus manifest out.

Config files are one `key = value` pair per line, `#` for comments.
Every run computes all results in memory first and only then writes,
atomically (temp file + rename), so an interrupted run leaves nothing
partial behind.  Result files are deterministic for a fixed (config,
seed): floats are printed with 17 significant digits, wall-clock times
go to the manifest only.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .box import BoxState, BoxSystem, energy, eval_wavefunction
from .ccr import CcrScheme, build_pair, ccr_report
from .errors import ConfigError, DomainError
from .gaussian import limit_trichotomy, precision_requirement
from .propagator import (Configuration, Grid, PotentialSpec, PropagatorRequest,
                         convergence_scan, default_half_width, sliced_amplitude)

EXPERIMENTS = ("ccr", "box", "propagate", "gaussian")
FORMATS = ("csv", "json")

# 17 significant digits round-trip a double exactly.
_FLOAT_FMT = "%.16e"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    output_dir: Path
    seed: int = 0
    format: str = "csv"
    key_lines: dict = field(default_factory=dict)

    def line_of(self, key: str):
        return self.key_lines.get(key)


@dataclass(frozen=True)
class RunManifest:
    experiment: str
    config: dict
    version: str
    seed: int
    duration_seconds: float
    outputs: tuple  # (filename, sha256 hex digest) pairs
    path: Path


def parse_config(path, output_dir=None, seed=None, fmt=None) -> ExperimentConfig:
    """Parse a key = value config file; CLI overrides win over file values."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("cannot read config file %s: %s" % (path, exc))
    params = {}
    key_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value', got %r" % line, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in params:
            raise ConfigError("duplicate key %r (first set on line %d)"
                              % (key, key_lines[key]), line=lineno)
        params[key] = value
        key_lines[key] = lineno
    experiment = params.pop("experiment", None)
    if experiment is None:
        raise ConfigError("config must set 'experiment' to one of %s" % (EXPERIMENTS,))
    if experiment not in EXPERIMENTS:
        raise ConfigError("unknown experiment %r; expected one of %s" % (experiment, EXPERIMENTS),
                          line=key_lines.get("experiment"))
    file_seed = params.pop("seed", None)
    if seed is None:
        if file_seed is not None:
            try:
                seed = int(file_seed)
            except ValueError:
                raise ConfigError("seed must be an integer, got %r" % file_seed,
                                  line=key_lines.get("seed"))
        else:
            seed = 0
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    file_fmt = params.pop("format", None)
    fmt = fmt or file_fmt or "csv"
    if fmt not in FORMATS:
        raise ConfigError("format must be one of %s, got %r" % (FORMATS, fmt),
                          line=key_lines.get("format"))
    file_out = params.pop("output_dir", None)
    out = Path(output_dir) if output_dir is not None else Path(file_out or "runs")
    return ExperimentConfig(experiment=experiment, parameters=params, output_dir=out,
                            seed=seed, format=fmt, key_lines=key_lines)


def _bad_key(config, key, message):
    return ConfigError("parameter %r: %s" % (key, message), line=config.line_of(key), key=key)


def _get_float(config, key, default=None):
    raw = config.parameters.get(key)
    if raw is None:
        if default is None:
            raise _bad_key(config, key, "required")
        return default
    if raw == "pi":
        return math.pi
    try:
        return float(raw)
    except ValueError:
        raise _bad_key(config, key, "expected a number, got %r" % raw)


def _get_int(config, key, default=None):
    raw = config.parameters.get(key)
    if raw is None:
        if default is None:
            raise _bad_key(config, key, "required")
        return default
    try:
        return int(raw)
    except ValueError:
        raise _bad_key(config, key, "expected an integer, got %r" % raw)


def _get_choice(config, key, choices, default=None):
    raw = config.parameters.get(key, default)
    if raw is None:
        raise _bad_key(config, key, "required; one of %s" % (choices,))
    if raw not in choices:
        raise _bad_key(config, key, "expected one of %s, got %r" % (choices, raw))
    return raw


def _get_float_list(config, key, default=None):
    raw = config.parameters.get(key)
    if raw is None:
        if default is None:
            raise _bad_key(config, key, "required")
        return list(default)
    out = []
    for piece in raw.split(","):
        piece = piece.strip()
        if piece == "pi":
            out.append(math.pi)
            continue
        try:
            out.append(float(piece))
        except ValueError:
            raise _bad_key(config, key, "expected comma-separated numbers, got %r" % raw)
    if not out:
        raise _bad_key(config, key, "expected at least one value")
    return out


def _get_int_list(config, key, default=None):
    vals = _get_float_list(config, key, default=default)
    out = []
    for v in vals:
        if v != int(v):
            raise _bad_key(config, key, "expected integers, got %r" % (v,))
        out.append(int(v))
    return out


def _check_known_keys(config, known):
    for key in config.parameters:
        if key not in known:
            raise _bad_key(config, key, "unknown parameter for experiment %r" % config.experiment)


def _fmt(x) -> str:
    return _FLOAT_FMT % float(x)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(_fmt(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_doc(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _run_ccr(config: ExperimentConfig) -> dict:
    _check_known_keys(config, {"scheme", "dim", "hbar", "mass", "omega", "half_width"})
    scheme = CcrScheme(
        kind=_get_choice(config, "scheme", ("ladder", "grid")),
        dim=_get_int(config, "dim"),
        hbar=_get_float(config, "hbar", 1.0),
        mass=_get_float(config, "mass", 1.0),
        omega=_get_float(config, "omega", 1.0),
        half_width=_get_float(config, "half_width", 1.0),
    )
    try:
        P, Q = build_pair(scheme)
    except DomainError as exc:
        raise ConfigError(str(exc), line=config.line_of("dim"))
    report = ccr_report(P, Q, scheme.hbar)
    residual_rows = [(n, r.real, r.imag) for n, r in enumerate(report.diagonal_residuals)]
    summary = {
        "scheme": scheme.kind,
        "dim": scheme.dim,
        "hbar": scheme.hbar,
        "trace_re": report.trace.real,
        "trace_im": report.trace.imag,
        "deviation": report.deviation,
        "lower_bound": report.lower_bound,
    }
    if config.format == "json":
        doc = dict(summary)
        doc["diagonal_residuals"] = [{"n": n, "re": re, "im": im} for n, re, im in residual_rows]
        return {"ccr_result.json": _json_doc(doc)}
    return {
        "ccr_residuals.csv": _csv(("n", "residual_re", "residual_im"), residual_rows),
        "ccr_summary.csv": _csv(
            ("scheme", "dim", "hbar", "trace_re", "trace_im", "deviation", "lower_bound"),
            [(summary["scheme"], summary["dim"], summary["hbar"], summary["trace_re"],
              summary["trace_im"], summary["deviation"], summary["lower_bound"])]),
    }


def _run_box(config: ExperimentConfig) -> dict:
    _check_known_keys(config, {"mass", "width", "hbar", "cutoff", "level", "samples"})
    system = BoxSystem(
        mass=_get_float(config, "mass", 1.0),
        width=_get_float(config, "width", 1.0),
        hbar=_get_float(config, "hbar", 1.0),
        cutoff=_get_int(config, "cutoff"),
    )
    level = _get_int(config, "level", 1)
    if not 1 <= level <= system.cutoff:
        raise _bad_key(config, "level", "must lie in 1..cutoff")
    samples = _get_int(config, "samples", 101)
    if samples < 2:
        raise _bad_key(config, "samples", "need at least 2 sample points")
    level_rows = [(n, energy(n, system)) for n in range(1, system.cutoff + 1)]
    coeffs = np.zeros(system.cutoff, dtype=complex)
    coeffs[level - 1] = 1.0
    state = BoxState(system, coeffs, normalized=True)
    xs = np.linspace(0.0, system.width, samples)
    psi = eval_wavefunction(state, xs)
    sample_rows = [(x, p.real, p.imag) for x, p in zip(xs, psi)]
    if config.format == "json":
        doc = {
            "system": {"mass": system.mass, "width": system.width,
                       "hbar": system.hbar, "cutoff": system.cutoff},
            "levels": [{"n": n, "energy": e} for n, e in level_rows],
            "wavefunction": {"level": level,
                             "samples": [{"x": x, "re": re, "im": im}
                                         for x, re, im in sample_rows]},
        }
        return {"box_result.json": _json_doc(doc)}
    return {
        "box_levels.csv": _csv(("n", "energy"), level_rows),
        "box_wavefunction.csv": _csv(("x", "psi_re", "psi_im"), sample_rows),
    }


def _run_propagate(config: ExperimentConfig) -> dict:
    _check_known_keys(config, {"mode", "potential", "omega", "width", "coefficients",
                               "x_start", "x_end", "mass", "hbar", "duration", "slices",
                               "grid_half_width", "grid_points", "mc_samples"})
    mode = _get_choice(config, "mode", ("real_time", "imaginary_time"), "imaginary_time")
    kind = _get_choice(config, "potential", ("free", "harmonic", "box", "polynomial"), "free")
    potential = PotentialSpec(
        kind=kind,
        omega=_get_float(config, "omega", 1.0) if kind == "harmonic" else 0.0,
        width=_get_float(config, "width", 1.0) if kind == "box" else 0.0,
        coefficients=tuple(_get_float_list(config, "coefficients", default=(0.0,)))
        if kind == "polynomial" else (),
    )
    q_start = Configuration(np.array(_get_float_list(config, "x_start")))
    q_end = Configuration(np.array(_get_float_list(config, "x_end")))
    mass = _get_float(config, "mass", 1.0)
    hbar = _get_float(config, "hbar", 1.0)
    duration = _get_float(config, "duration")
    k_values = _get_int_list(config, "slices")
    endpoint_scale = float(max(np.max(np.abs(q_start.coords)), np.max(np.abs(q_end.coords))))
    half_width = _get_float(config, "grid_half_width",
                            default_half_width(endpoint_scale, mass, hbar, duration))
    points = _get_int(config, "grid_points", 257)
    try:
        grid = Grid(half_width=half_width, points_per_dim=points)
        request = PropagatorRequest(
            q_start=q_start, q_end=q_end, mass=mass, hbar=hbar, duration=duration,
            slices=k_values[0], mode=mode, grid=grid,
            mc_samples=_get_int(config, "mc_samples", 0), seed=config.seed,
        )
    except DomainError as exc:
        raise ConfigError(str(exc))
    rows = []
    if len(k_values) > 1 and potential.kind in ("free", "harmonic"):
        # scan mode: the error column is the relative error against the
        # closed-form kernel, which is what a convergence plot wants
        scan = convergence_scan(request, potential, k_values)
        for (K, err), K_raw in zip(scan, k_values):
            from dataclasses import replace
            res = sliced_amplitude(replace(request, slices=K_raw), potential)
            rows.append((K, res.amplitude.real, res.amplitude.imag, err, res.quadrature_points))
    else:
        from dataclasses import replace
        for K in k_values:
            res = sliced_amplitude(replace(request, slices=K), potential)
            rows.append((K, res.amplitude.real, res.amplitude.imag,
                         res.estimated_error, res.quadrature_points))
    if config.format == "json":
        doc = [{"K": K, "re": re, "im": im, "error": err, "nodes": nodes}
               for K, re, im, err, nodes in rows]
        return {"propagate_result.json": _json_doc(doc)}
    return {"propagate_result.csv": _csv(("K", "re", "im", "error", "nodes"), rows)}


def _run_gaussian(config: ExperimentConfig) -> dict:
    _check_known_keys(config, {"a", "a_precision", "n_max", "epsilon", "precision_n"})
    a = _get_float(config, "a", math.pi)
    a_precision = _get_float(config, "a_precision", 0.0)
    n_max = _get_int(config, "n_max", 100)
    epsilon = _get_float(config, "epsilon", 0.01)
    precision_n = _get_int_list(config, "precision_n", default=(10, 20, 40, 80, 160))
    result = limit_trichotomy(a, n_max, input_precision=a_precision)
    norm_rows = [(n, a, v.log_f, v.flag) for n, v in zip(result.scan.N_values, result.scan.values)]
    reports = [precision_requirement(n, epsilon) for n in precision_n]
    precision_rows = [(r.N, r.epsilon, r.delta_max, r.pi_digits_required) for r in reports]
    if config.format == "json":
        doc = {
            "a": a,
            "classification": result.classification,
            "norm_scan": [{"N": n, "a": av, "log_f": lf, "f_flag": fl}
                          for n, av, lf, fl in norm_rows],
            "precision": [{"N": n, "epsilon": e, "delta_max": d, "pi_digits": p}
                          for n, e, d, p in precision_rows],
        }
        return {"gaussian_result.json": _json_doc(doc)}
    return {
        "gaussian_norm.csv": _csv(("N", "a", "log_f", "f_flag"), norm_rows),
        "gaussian_precision.csv": _csv(("N", "epsilon", "delta_max", "pi_digits"), precision_rows),
        "gaussian_trichotomy.csv": _csv(("a", "a_precision", "classification"),
                                        [(a, a_precision, result.classification)]),
    }


_RUNNERS = {
    "ccr": _run_ccr,
    "box": _run_box,
    "propagate": _run_propagate,
    "gaussian": _run_gaussian,
}


def atomic_write_text(path: Path, content: str):
    """Write via a sibling temp file and rename, so readers never see partial data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _sha256(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def run(config: ExperimentConfig) -> RunManifest:
    """Execute one experiment and persist its results plus a manifest.

    All content is rendered before the first byte hits disk.  Identical
    (config, seed) pairs produce byte-identical result files; only the
    manifest carries wall-clock timing.
    """
    started = time.perf_counter()
    files = _RUNNERS[config.experiment](config)
    outputs = []
    for name, content in sorted(files.items()):
        atomic_write_text(config.output_dir / name, content)
        outputs.append((name, _sha256(content)))
    manifest = RunManifest(
        experiment=config.experiment,
        config=dict(sorted(config.parameters.items())),
        version=__version__,
        seed=config.seed,
        duration_seconds=time.perf_counter() - started,
        outputs=tuple(outputs),
        path=config.output_dir / "manifest.json",
    )
    atomic_write_text(manifest.path, _json_doc({
        "experiment": manifest.experiment,
        "config": manifest.config,
        "version": manifest.version,
        "seed": manifest.seed,
        "format": config.format,
        "duration_seconds": manifest.duration_seconds,
        "outputs": [{"file": name, "sha256": digest} for name, digest in manifest.outputs],
    }))
    return manifest
