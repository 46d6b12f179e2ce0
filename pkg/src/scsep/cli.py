"""
Command-line entry point ``sc-sep``.

    sc-sep params|spectrum|peaks|evolve --config run.toml [--out DIR] [--q 1,2,3]

Every section of the config is validated before anything is computed or
written.  Exit codes: 0 success, 1 config error, 2 regime failure,
3 analysis failure.  Outputs are deterministic: JSON keys are sorted,
floats are written with 17 significant digits and nothing depends on the
clock.

Plot recipe for the spectrum, e.g. with gnuplot::

    set datafile separator ','; splot 'spectrum.csv' skip 1 using 1:2:5 with pm3d
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
import warnings
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import dynamics, params, spectral
from .specfun import QuadratureSpec, SpecialFunctionError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_REGIME = 2
EXIT_ANALYSIS = 3

_OPTICAL_FIELDS = [f.name for f in dataclasses.fields(params.OpticalConfig)]
_LUTTINGER_FIELDS = ("u_charge", "u_spin", "k_charge", "k_spin")
_SPECTRUM_FIELDS = ("rho0", "alpha", "omega_min", "omega_max", "omega_steps",
                    "q_min", "q_max", "q_steps")
_QUAD_FIELDS = [f.name for f in dataclasses.fields(QuadratureSpec)]
_PEAK_AXIS_FIELDS = ("omega_min", "omega_max", "omega_steps")
_EVOLUTION_FIELDS = ("dt", "steps", "record_every", "grid_points", "box_length",
                     "perturbation", "amplitude", "width", "center")
_EFFECTIVE_FIELDS = ("mass", "chi", "cross", "density")


class ConfigError(Exception):
    """Invalid or unreadable configuration; exit code 1."""


class RegimeFailure(Exception):
    """Physical regime check failed; exit code 2."""


class AnalysisFailure(Exception):
    """Post-processing could not produce a result; exit code 3."""


@dataclasses.dataclass
class RunConfig:
    """Validated contents of a config file."""

    path: str
    units: dict
    optical: params.OpticalConfig | None = None
    luttinger: params.LuttingerParameters | None = None
    spectrum: spectral.SpectrumRequest | None = None
    normalize_velocities: bool = False
    peak_qs: tuple = (2.0,)
    peak_request: spectral.SpectrumRequest | None = None
    evolution: dynamics.EvolutionSpec | None = None
    initial_state: dynamics.FieldState | None = None
    perturbation: dynamics.Perturbation | None = None
    output_dir: str = "out"


def _section(raw, name, allowed, required=False):
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section [{name}]")
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = sorted(k for k, v in sec.items() if k not in allowed and not isinstance(v, dict))
    if unknown:
        raise ConfigError(f"[{name}] unknown field(s): {', '.join(unknown)}")
    return sec


def _number(sec, section, key, integer=False):
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{section}] {key}: expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"[{section}] {key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _numbers(sec, section, keys, integers=()):
    return {k: _number(sec, section, k, k in integers) for k in keys if k in sec}


def _build(section, factory, **kwargs):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", params.AdiabaticityWarning)
            return factory(**kwargs)
    except params.AdiabaticityWarning as w:
        warnings.warn(f"[{section}] {w}", params.AdiabaticityWarning, stacklevel=2)
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def _luttinger_for_spectrum(cfg):
    if cfg.luttinger is not None:
        lutt = cfg.luttinger
    elif cfg.optical is not None:
        eff = params.derive_effective(cfg.optical)
        try:
            lutt = params.derive_luttinger(eff)
        except params.RegimeError as exc:
            raise RegimeFailure(str(exc)) from exc
    else:
        raise ConfigError("the spectrum needs an [optical] or [luttinger] section")
    if cfg.normalize_velocities:
        lutt = lutt.with_velocity_unit(lutt.u_charge)
    return lutt


def load_config(path, command):
    """Parse and validate every section of the config file at `path`."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    unknown = sorted(set(raw) - {"units", "optical", "luttinger", "spectrum", "peaks",
                                 "evolution", "output"})
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")

    units = _section(raw, "units", ("length_unit", "time_unit", "normalized")) or {}
    units = {"length_unit": str(units.get("length_unit", "1")),
             "time_unit": str(units.get("time_unit", "1")),
             "normalized": bool(units.get("normalized", True))}
    cfg = RunConfig(path=str(path), units=units)

    sec = _section(raw, "optical", _OPTICAL_FIELDS, required=command == "params")
    if sec is not None:
        missing = [k for k in _OPTICAL_FIELDS[:14] if k not in sec]
        if missing:
            raise ConfigError(f"[optical] missing field(s): {', '.join(missing)}")
        cfg.optical = _build("optical", params.OpticalConfig, **_numbers(sec, "optical", _OPTICAL_FIELDS))

    sec = _section(raw, "luttinger", _LUTTINGER_FIELDS)
    if sec is not None:
        missing = [k for k in _LUTTINGER_FIELDS if k not in sec]
        if missing:
            raise ConfigError(f"[luttinger] missing field(s): {', '.join(missing)}")
        cfg.luttinger = _build("luttinger", params.LuttingerParameters.from_sectors,
                               **_numbers(sec, "luttinger", _LUTTINGER_FIELDS))

    spec_sec = _section(raw, "spectrum", _SPECTRUM_FIELDS + ("normalize_velocities",),
                        required=command == "spectrum")
    peaks_sec = _section(raw, "peaks", ("q",) + _PEAK_AXIS_FIELDS)
    if spec_sec is not None or command in ("spectrum", "peaks"):
        spec_sec = spec_sec or {}
        cfg.normalize_velocities = bool(spec_sec.get("normalize_velocities", False))
        quad_sec = _section(spec_sec, "quadrature", _QUAD_FIELDS) or {}
        quad_kw = _numbers(quad_sec, "spectrum.quadrature", _QUAD_FIELDS[:-1], integers=("max_levels",))
        if "retarded" in quad_sec:
            quad_kw["retarded"] = bool(quad_sec["retarded"])
        quad = _build("spectrum.quadrature", QuadratureSpec, **quad_kw)
        lutt = _luttinger_for_spectrum(cfg)
        kw = _numbers(spec_sec, "spectrum", _SPECTRUM_FIELDS, integers=("omega_steps", "q_steps"))
        cfg.spectrum = _build("spectrum", spectral.SpectrumRequest, lutt=lutt, quad=quad, **kw)
        peaks_sec = peaks_sec or {}
        qs = peaks_sec.get("q", [2.0])
        if not isinstance(qs, list) or not qs:
            raise ConfigError("[peaks] q must be a non-empty list of numbers")
        cfg.peak_qs = tuple(_number({"q": q}, "peaks", "q") for q in qs)
        axis = _numbers(peaks_sec, "peaks", _PEAK_AXIS_FIELDS, integers=("omega_steps",))
        base = cfg.spectrum
        cfg.peak_request = _build("peaks", lambda **kw: dataclasses.replace(base, **kw), **axis)

    sec = _section(raw, "evolution", _EVOLUTION_FIELDS, required=command == "evolve")
    if sec is not None:
        for key in ("dt", "steps"):
            if key not in sec:
                raise ConfigError(f"[evolution] missing field: {key}")
        kw = _numbers(sec, "evolution", [k for k in _EVOLUTION_FIELDS if k != "perturbation"],
                      integers=("steps", "record_every", "grid_points"))
        eff_sec = _section(sec, "effective", _EFFECTIVE_FIELDS)
        if eff_sec is not None:
            missing = [k for k in _EFFECTIVE_FIELDS if k not in eff_sec]
            if missing:
                raise ConfigError(f"[evolution.effective] missing field(s): {', '.join(missing)}")
            eff = _build("evolution.effective", params.EffectiveLiebLiniger.symmetric,
                         **_numbers(eff_sec, "evolution.effective", _EFFECTIVE_FIELDS))
        elif cfg.optical is not None:
            eff = params.derive_effective(cfg.optical)
        else:
            raise ConfigError("[evolution] needs an [evolution.effective] table or an [optical] section")
        cfg.perturbation = _build("evolution", dynamics.Perturbation,
                                  kind=str(sec.get("perturbation", "none")),
                                  amplitude=kw.get("amplitude", 0.0),
                                  width=kw.get("width", 1.0),
                                  center=kw.get("center", 0.5 * kw.get("box_length", 1024.0)))
        cfg.evolution = _build("evolution", dynamics.EvolutionSpec, dt=kw["dt"], steps=kw["steps"],
                               eff=eff, record_every=kw.get("record_every", 1))
        if kw["dt"] < 0:
            raise ConfigError("[evolution] dt must be > 0")
        cfg.initial_state = _build("evolution", dynamics.init_state,
                                   rho0_up=eff.density_up, rho0_down=eff.density_down,
                                   perturbation=cfg.perturbation,
                                   grid_points=kw.get("grid_points", 4096),
                                   box_length=kw.get("box_length", 1024.0))
        try:
            dynamics._Stepper(cfg.initial_state.grid_points, cfg.initial_state.box_length,
                              cfg.evolution).check(cfg.initial_state.psi_up, cfg.initial_state.psi_down)
        except dynamics.StabilityError as exc:
            raise ConfigError(f"[evolution] {exc}") from exc

    sec = _section(raw, "output", ("dir",)) or {}
    cfg.output_dir = str(sec.get("dir", "out"))
    return cfg


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x):
    return "%.17g" % x


def _write(out, name, text):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def cmd_params(cfg, out):
    cfg_opt = cfg.optical
    eff = params.derive_effective(cfg_opt)
    repulsive = params.check_repulsive(cfg_opt)
    separation = params.check_separation(eff)
    report = {
        "config": dataclasses.asdict(cfg_opt),
        "units": cfg.units,
        "optical_depth": cfg_opt.optical_depth,
        "cooperativity": cfg_opt.cooperativity,
        "effective": eff.as_dict(),
        "repulsive_report": repulsive.as_dict(),
        "separation_report": separation.as_dict(),
        "repulsive": repulsive.repulsive,
        "separated": bool(separation.separated),
        "sine_gordon_coefficient": params.sine_gordon_coefficient(eff),
        "luttinger": None,
        "messages": list(repulsive.messages) + list(separation.messages),
    }
    code = EXIT_OK
    try:
        report["luttinger"] = params.derive_luttinger(eff).as_dict()
    except params.RegimeError as exc:
        report["messages"].append(str(exc))
        code = EXIT_REGIME
    if not repulsive.ok or not separation.ok:
        code = EXIT_REGIME
    _write(out, "report.json", _dumps(report))
    for msg in report["messages"]:
        print(msg, file=sys.stderr)
    return code


def cmd_spectrum(cfg, out):
    grid = spectral.density_spectrum_grid(cfg.spectrum)
    buf = io.StringIO()
    buf.write("omega,q,re,im,abs\n")
    for j, q in enumerate(grid.qs):
        for i, w in enumerate(grid.omegas):
            v = grid.values[j, i]
            buf.write(",".join(map(_fmt, (w, q, v.real, v.imag, abs(v)))) + "\n")
    meta = dict(grid.metadata)
    meta["units_config"] = cfg.units
    meta["normalize_velocities"] = cfg.normalize_velocities
    _write(out, "spectrum.csv", buf.getvalue())
    _write(out, "spectrum_meta.json", _dumps(meta))
    return EXIT_OK


def cmd_peaks(cfg, out, q_override=None):
    req = cfg.peak_request
    qs = tuple(q_override) if q_override else cfg.peak_qs
    result = {"luttinger": req.lutt.as_dict(), "omega_axis": [req.omega_min, req.omega_max, req.omega_steps]}
    try:
        cuts = []
        for q in qs:
            grid = spectral.density_spectrum_grid(req.column(q))
            p = spectral.extract_peaks(grid, q)
            cuts.append({"q": p.q, "peak_omegas": p.peak_omegas.tolist(),
                         "peak_heights": p.peak_heights.tolist(),
                         "u_spin": p.inferred_u_spin, "u_charge": p.inferred_u_charge})
    except (spectral.PeakError, ValueError) as exc:
        raise AnalysisFailure(f"peaks unresolved: {exc}") from exc
    result["cuts"] = cuts
    if len(cuts) == 1:
        result["u_spin"] = cuts[0]["u_spin"]
        result["u_charge"] = cuts[0]["u_charge"]
    else:
        us, uc = spectral.fit_slopes([c["q"] for c in cuts],
                                     [c["peak_omegas"][0] for c in cuts],
                                     [c["peak_omegas"][1] for c in cuts])
        result["u_spin"] = us
        result["u_charge"] = uc
    result["analytic_u_spin"] = req.lutt.u_spin
    result["analytic_u_charge"] = req.lutt.u_charge
    _write(out, "peaks.json", _dumps(result))
    return EXIT_OK


def _trace_csv(times, z, rho):
    buf = io.StringIO()
    buf.write("time," + ",".join("z=" + _fmt(v) for v in z) + "\n")
    for t, row in zip(times, rho):
        buf.write(_fmt(t) + "," + ",".join(map(_fmt, row)) + "\n")
    return buf.getvalue()


def cmd_evolve(cfg, out):
    trace = dynamics.evolve(cfg.initial_state, cfg.evolution)
    eff = cfg.evolution.eff
    pred_c, pred_s = dynamics.bogoliubov_velocities(eff)
    kind = cfg.perturbation.kind
    summary = {
        "perturbation": dataclasses.asdict(cfg.perturbation),
        "effective": eff.as_dict(),
        "dt": cfg.evolution.dt,
        "steps": cfg.evolution.steps,
        "frames": int(len(trace.times)),
        "norm_drift": trace.norm_drift,
        "predicted_velocity_charge": pred_c,
        "predicted_velocity_spin": pred_s,
        "predicted_ratio": pred_c / pred_s,
        "measured_velocity": None,
        "velocity_ratio_measured_over_predicted": None,
    }
    if kind != "none":
        try:
            v = dynamics.front_velocity(trace, kind)
        except (dynamics.NoFrontError, ValueError) as exc:
            raise AnalysisFailure(f"front velocity unresolved: {exc}") from exc
        pred = pred_c if kind == "charge" else pred_s
        summary["measured_velocity"] = v
        summary["velocity_ratio_measured_over_predicted"] = v / pred
    _write(out, "trace_charge.csv", _trace_csv(trace.times, trace.z, trace.rho_charge))
    _write(out, "trace_spin.csv", _trace_csv(trace.times, trace.z, trace.rho_spin))
    _write(out, "summary.json", _dumps(summary))
    return EXIT_OK


def _parse_qs(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--q expects a comma-separated list of numbers: {text!r}") from exc


def build_parser():
    p = argparse.ArgumentParser(prog="sc-sep", description="Spin-charge separation of slow-light polaritons.")
    p.add_argument("command", choices=("params", "spectrum", "peaks", "evolve"))
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--q", type=_parse_qs, help="comma-separated q values for 'peaks'")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        if args.q is not None:
            if not args.q or any(q == 0 or not math.isfinite(q) for q in args.q):
                raise ConfigError("--q values must be finite and nonzero")
        if args.command == "evolve" and cfg.evolution is None:
            raise ConfigError("missing section [evolution]")
        out = Path(args.out or cfg.output_dir)
        if args.command == "params":
            return cmd_params(cfg, out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        if args.command == "peaks":
            return cmd_peaks(cfg, out, args.q)
        return cmd_evolve(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeFailure as exc:
        print(f"regime failure: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except AnalysisFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ANALYSIS
    except (SpecialFunctionError, spectral.SpectrumGridError) as exc:
        print(f"analysis failure: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
