"""Command-line driver: ``eolink <subcommand> -c scenario.yaml``.

Every subcommand reads its own section of a YAML scenario file, writes
plot-ready CSV/JSON into the output directory and a ``manifest_<cmd>.json``
recording the config hash, seed and tool version. On failure a single
``error code=... message=...`` line goes to stderr, files written by the
run are removed, and the exit status is 1 (usage/config) or 2 (domain).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__, comm, devices, fields, link, matcher, noise, spectra
from .errors import EOLinkError
from .model import PumpSpec, coupling_state, efficiency, efficiency_sweep

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class ConfigError(Exception):
    code = "config-error"


class UsageError(Exception):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Run:
    """Resolved config plus bookkeeping of emitted files."""

    def __init__(self, config: dict, base: Path, out_dir: Path, seed: int):
        self.config = config
        self.base = base
        self.out_dir = out_dir
        self.seed = seed
        self.written: list[Path] = []
        self._devices: dict[str, Any] = {}

    def section(self, name: str) -> dict:
        sec = self.config.get(name)
        if not isinstance(sec, dict):
            raise ConfigError(f"missing '{name}' section")
        return sec

    def device(self, ref: str):
        if ref not in self._devices:
            table = self.config.get("devices") or {}
            source = table.get(ref, ref)
            if ref not in table and str(ref).lower() in devices.BUILTIN:
                source = f"builtin:{ref}"
            if not str(source).startswith("builtin:"):
                source = self.base / str(source)
                if not source.exists():
                    raise ConfigError(f"device '{ref}' not found (looked for {source})")
            try:
                self._devices[ref] = devices.load_device(source)
            except KeyError as exc:
                raise ConfigError(str(exc)) from exc
        return self._devices[ref]

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def write_json(self, name: str, payload: Any) -> None:
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _num(sec: dict, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing required key '{key}'")
        return default
    try:
        return float(sec[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' must be a number, got {sec[key]!r}") from exc


def _nums(sec: dict, key: str) -> list[float]:
    if key not in sec:
        raise ConfigError(f"missing required key '{key}'")
    values = sec[key]
    if not isinstance(values, list) or not values:
        raise ConfigError(f"'{key}' must be a non-empty list")
    return [float(v) for v in values]


# --- subcommands -----------------------------------------------------------


def cmd_efficiency(run: Run) -> None:
    sec = run.section("efficiency")
    spec = run.device(sec.get("device", "felix"))
    powers = _nums(sec, "powers_w")
    rows = efficiency_sweep(spec, powers)
    with open(run.path("efficiency.csv"), "w", encoding="utf-8") as fh:
        fh.write("power_w,eta,n_minus,g_enh_hz,cooperativity\n")
        for p, eta in rows:
            st = coupling_state(spec, PumpSpec(p, spec.red_mode.frequency))
            fh.write(",".join(repr(float(v)) for v in (p, eta, st.n_minus, st.G_eo, st.cooperativity)) + "\n")


def _spectra_grid(sec: dict, spec) -> spectra.FrequencyGrid:
    return spectra.FrequencyGrid(
        center=_num(sec, "center_hz", spec.microwave.frequency),
        span=_num(sec, "span_hz"),
        points=int(_num(sec, "points")),
    )


def _fine_bandwidth(spec, pump) -> float:
    kappa = spec.microwave.kappa_total
    grid = spectra.FrequencyGrid(spec.microwave.frequency, 20 * kappa, 20001)
    return spectra.conversion_bandwidth(spectra.scattering_spectra(spec, pump, grid))


def cmd_spectra(run: Run) -> None:
    sec = run.section("spectra")
    spec = run.device(sec.get("device", "felix"))
    pump = PumpSpec(_num(sec, "power_w"), spec.red_mode.frequency)
    sp = spectra.scattering_spectra(spec, pump, _spectra_grid(sec, spec))
    spectra.write_spectra_csv(sp, run.path("spectra.csv"))
    eta, state = efficiency(spec, pump)
    run.write_json("spectra_report.json", {
        "device": spec.name,
        "power_w": pump.on_chip_power,
        "eta_model": eta,
        "eta_calibrated": spectra.calibrate_efficiency(sp),
        "cooperativity": state.cooperativity,
        "bandwidth_hz": _fine_bandwidth(spec, pump),
    })


def cmd_calibrate(run: Run, spectra_csv: str | None) -> None:
    if spectra_csv is None:
        spectra_csv = run.section("calibrate").get("spectra_csv")
        if spectra_csv is None:
            raise ConfigError("calibrate needs --spectra or calibrate.spectra_csv")
        spectra_csv = run.base / spectra_csv
    if not Path(spectra_csv).exists():
        raise ConfigError(f"spectra file {spectra_csv} not found")
    sp = spectra.read_spectra_csv(spectra_csv)
    try:
        bw = spectra.conversion_bandwidth(sp)
    except EOLinkError:
        bw = None
    run.write_json("calibration.json", {
        "eta_calibrated": spectra.calibrate_efficiency(sp),
        "bandwidth_hz": bw,
    })


def cmd_noise(run: Run) -> None:
    sec = run.section("noise")
    spec = run.device(sec.get("device", "albert"))
    mw = spec.microwave
    grid = spectra.FrequencyGrid(
        _num(sec, "center_hz", mw.frequency),
        _num(sec, "span_hz", 20 * mw.kappa_total),
        int(_num(sec, "points", 2001)),
    )
    levels = sec.get("levels")
    if not isinstance(levels, list) or not levels:
        raise ConfigError("noise.levels must be a non-empty list")
    rows = []
    for idx, level in enumerate(levels):
        delta = _num(level, "delta_n_out_add", 0.0)
        if "s_dev_on" in level or "s_dev_off" in level:
            baths = noise.infer_baths(_num(level, "s_dev_on"), _num(level, "s_dev_off"), mw, delta)
        else:
            baths = noise.BathOccupancies(_num(level, "n_ex"), _num(level, "n_en"), delta)
        out = noise.output_noise_spectrum(mw, baths, grid)
        noise.write_noise_spectrum_csv(out, mw.frequency, run.path(f"s_dev_{idx:03d}.csv"))
        rows.append((_num(level, "power_w"), baths.n_ex, baths.n_en, out.n_mode))
    with open(run.path("noise.csv"), "w", encoding="utf-8") as fh:
        fh.write("power_w,n_ex,n_en,n_mode\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_match(run: Run) -> None:
    sec = run.config.get("match") or {}
    felix = run.device(sec.get("felix", "felix"))
    albert = run.device(sec.get("albert", "albert"))
    window = sec.get("window_hz")
    if window is not None:
        window = (float(window[0]), float(window[1]))
    plan = matcher.solve_matching(
        felix, albert, search_window=window,
        tolerance=_num(sec, "tolerance_hz", matcher.MATCH_TOLERANCE_HZ),
    )
    run.write_json("match_plan.json", plan.as_dict())


def cmd_budget(run: Run) -> None:
    sec = run.section("budget")
    rows = link.budget_table(
        _nums(sec, "distances_m"),
        coupling_loss_db=_num(sec, "coupling_loss_db", link.FIBER_TO_CHIP_TOTAL_DB),
        fiber_db_per_km=_num(sec, "fiber_db_per_km", link.FIBER_DB_PER_KM),
    )
    link.write_budget_csv(rows, run.path("budget.csv"))


def _link_from_config(run: Run) -> link.LinkResponse:
    sec = run.section("link")
    fsec = sec.get("fiber") or {}
    fiber = link.FiberSpec(
        length=_num(fsec, "length_m", 1000.0),
        attenuation=_num(fsec, "attenuation_db_per_km", link.FIBER_DB_PER_KM),
        effective_index=_num(fsec, "effective_index", link.DEFAULT_EFFECTIVE_INDEX),
        carrier_frequency=_num(fsec, "carrier_hz", link.DEFAULT_CARRIER_HZ),
    )
    couplers = None
    if sec.get("couplers") is not None:
        c = sec["couplers"]
        couplers = link.CouplerSpec(_num(c, "insertion_loss_db", 5.93), int(_num(c, "passes", 4)))
    return link.link_response(
        run.device(sec.get("felix", "felix")),
        run.device(sec.get("albert", "albert")),
        felix_power=_num(sec, "felix_power_w"),
        albert_power=_num(sec, "albert_power_w"),
        span=_num(sec, "span_hz"),
        points=int(_num(sec, "points")),
        fiber=fiber,
        couplers=couplers,
        inter_residual=_num(sec, "inter_residual_hz", 0.0),
    )


def _center_gain(resp: link.LinkResponse) -> complex:
    return complex(resp.s_link[resp.grid.points // 2])


def cmd_link(run: Run) -> None:
    resp = _link_from_config(run)
    link.write_link_csv(resp, run.path("link.csv"))
    g = _center_gain(resp)
    run.write_json("link_report.json", {
        "peak_transmission_db": resp.peak_transmission_db,
        "bandwidth_hz": resp.bandwidth,
        "gain_at_zero_detuning": {"re": g.real, "im": g.imag},
    })


def cmd_qpsk(run: Run) -> None:
    sec = run.section("qpsk")
    if sec.get("gain_from_link"):
        gain = _center_gain(_link_from_config(run))
    else:
        gain = complex(_num(sec, "gain_re", 1.0), _num(sec, "gain_im", 0.0))
    amplitude = _num(sec, "amplitude_in", 1.0)
    if "noise_sigma" in sec:
        sigma = _num(sec, "noise_sigma")
    elif "n_mode" in sec:
        sigma = comm.sigma_from_occupancy(_num(sec, "n_mode"), _num(sec, "sigma_scale", 1.0))
    else:
        sigma = comm.sigma_for_snr(abs(gain) * amplitude, _num(sec, "snr_db"))
    qrun = comm.QpskRun(
        repeats_per_phase=int(_num(sec, "repeats_per_phase", 50)),
        amplitude_in=amplitude,
        noise_sigma=sigma,
        seed=run.seed,
    )
    samples = comm.qpsk_constellation(gain, qrun)
    comm.write_constellation_csv(samples, run.path("constellation.csv"))
    means = comm.cluster_means(samples)
    run.write_json("qpsk_report.json", {
        "seed": run.seed,
        "noise_sigma": sigma,
        "link_gain": {"re": gain.real, "im": gain.imag},
        "symbol_errors": comm.symbol_errors(samples, gain, amplitude),
        "samples": len(samples),
        "cluster_means": {str(k): {"i": v.real, "q": v.imag} for k, v in means.items()},
    })


def cmd_fringe(run: Run) -> None:
    sec = run.section("fringe")
    n = int(_num(sec, "points", 73))
    phases = tuple(2 * math.pi * k / (n - 1) for k in range(n))
    scan = comm.FringeScan(phases, _num(sec, "signal_amplitude", 1.0), _num(sec, "lo_amplitude", 1.0))
    samples = comm.interference_fringe(scan, _num(sec, "signal_phase_rad", 0.0))
    comm.write_fringe_csv(samples, run.path("fringe.csv"))
    fit = comm.fit_sine(samples)
    run.write_json("fringe_fit.json", {
        "offset": fit.offset,
        "amplitude": fit.amplitude,
        "phase0_rad": fit.phase0,
        "rms_residual": fit.rms_residual,
        "visibility": comm.visibility([p for _, p in samples]),
    })


def cmd_geo(run: Run) -> None:
    sec = run.section("geo")
    profiles = sec.get("profiles")
    if not isinstance(profiles, dict) or not profiles:
        raise ConfigError("geo.profiles must map components to files")
    paths = {k: run.base / v for k, v in profiles.items()}
    for p in paths.values():
        if not p.exists():
            raise ConfigError(f"profile file {p} not found")
    pset = fields.load_profile_set(
        paths,
        r33=_num(sec, "r33_m_per_v"),
        ring_radius=_num(sec, "ring_radius_m"),
        omega_o=_num(sec, "omega_o_hz"),
        omega_m=_num(sec, "omega_m_hz"),
        constants=sec.get("constants"),
    )
    res = fields.compute_geo(pset)
    run.write_json("geo.json", {
        "g_eo_hz": res.g_eo,
        "v_eff_optical": res.v_eff_optical,
        "v_eff_microwave": res.v_eff_microwave,
        "overlap_numerator": res.overlap_numerator,
    })


COMMANDS: dict[str, Callable] = {
    "efficiency": cmd_efficiency,
    "spectra": cmd_spectra,
    "calibrate": cmd_calibrate,
    "noise": cmd_noise,
    "match": cmd_match,
    "budget": cmd_budget,
    "link": cmd_link,
    "qpsk": cmd_qpsk,
    "fringe": cmd_fringe,
    "geo": cmd_geo,
}


# --- manifest --------------------------------------------------------------


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def semantic_config(run: Run) -> dict:
    """Config with output location dropped and referenced files replaced by their content."""
    cfg = {k: v for k, v in run.config.items() if k != "output_dir"}
    cfg["seed"] = run.seed
    table = cfg.get("devices") or {}
    cfg["devices"] = {name: devices.spec_to_dict(run.device(name)) for name in table}
    for ref, spec in run._devices.items():
        cfg["devices"].setdefault(ref, devices.spec_to_dict(spec))
    geo = cfg.get("geo")
    if isinstance(geo, dict) and isinstance(geo.get("profiles"), dict):
        geo = dict(geo)
        geo["profiles"] = {
            k: _file_digest(run.base / v) if (run.base / v).exists() else str(v)
            for k, v in geo["profiles"].items()
        }
        cfg["geo"] = geo
    return cfg


def config_hash(run: Run) -> str:
    canon = json.dumps(semantic_config(run), sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(canon.encode()).hexdigest()


# --- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eolink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eolink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", help="scenario YAML file")
        p.add_argument("-o", "--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="RNG seed (overrides seed)")
        if name == "calibrate":
            p.add_argument("--spectra", help="spectra CSV written by the spectra subcommand")
    return parser


def _fail(code: str, message: str) -> None:
    print(f"error code={code} message={json.dumps(message)}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    run = None
    try:
        args = build_parser().parse_args(argv)
        if args.config:
            cfg_path = Path(args.config)
            if not cfg_path.exists():
                raise ConfigError(f"config file {cfg_path} not found")
            config = yaml.safe_load(cfg_path.read_text(encoding="utf-8")) or {}
            if not isinstance(config, dict):
                raise ConfigError("config must be a mapping")
            base = cfg_path.resolve().parent
        else:
            config, base = {}, Path.cwd()
        out_dir = Path(args.out) if args.out else base / str(config.get("output_dir", "out"))
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        run = Run(config, base, out_dir, seed)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "calibrate":
            cmd_calibrate(run, args.spectra)
        else:
            COMMANDS[args.command](run)
        run.write_json(f"manifest_{args.command}.json", {
            "command": args.command,
            "config_hash": config_hash(run),
            "seed": seed,
            "tool_version": __version__,
            "outputs": sorted(p.name for p in run.written),
        })
        return EXIT_OK
    except (UsageError, ConfigError, yaml.YAMLError) as exc:
        _fail(getattr(exc, "code", "config-error"), str(exc))
        status = EXIT_USAGE
    except EOLinkError as exc:
        _fail(exc.code, str(exc))
        status = EXIT_DOMAIN
    except ValueError as exc:
        _fail("invalid-value", str(exc))
        status = EXIT_DOMAIN
    if run is not None:
        for p in run.written:
            p.unlink(missing_ok=True)
    return status


if __name__ == "__main__":
    sys.exit(main())
