"""Configuration-driven command-line front end.

Subcommands: simulate, sweep-detuning, render-beams, fit,
optimize-attenuation, presets. Outputs are deterministic for a fixed config
and seed; every file embeds the config hash and tool version.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .channels import GainPair, apply_channel, channel_gains, fit_channel
from .config import ConfigError, RunConfig, parse_config, write_presets
from .detection import (
    from_decibel,
    measure_noise,
    optimize_probe_attenuation,
    to_decibel,
)
from .gaincurves import gain_curves
from .gaussian import ModeLabel, beamsplit_loss, displace, vacuum_state
from .oam import (
    LGModeSpec,
    conjugate_charge,
    check_oam_conservation,
    fork_dislocation_order,
    interfere_plane_wave,
    lg_field,
    tilt_for_fringes,
    topological_charge,
)
from .output import fmt9, write_csv, write_json, write_kv_csv, write_pgm

SWEEP_COLUMNS = ["delta_mhz", "g_p", "g_c", "g_sum", "nsf_linear", "nsf_db",
                 "t_star", "nsf_star_db"]


def _twin_labels(cfg: RunConfig) -> tuple[ModeLabel, ModeLabel]:
    l_seed = cfg.seed.topological_charge
    return (ModeLabel(0, "probe", l_seed),
            ModeLabel(1, "conjugate", conjugate_charge(0, l_seed)))


def _channel_output(cfg: RunConfig):
    probe, conj = _twin_labels(cfg)
    state = displace(vacuum_state(2, [probe, conj]), probe, cfg.seed.amplitude)
    return apply_channel(state, probe, conj, cfg.channel.spec()), probe, conj


def _flatten(tree: dict, prefix: str = "config") -> list[tuple[str, object]]:
    rows = []
    for key in sorted(tree):
        value = tree[key]
        name = f"{prefix}.{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, name))
        elif isinstance(value, (list, tuple)):
            rows.extend(_flatten(dict(enumerate(value)), name))
        elif value is None:
            rows.append((name, "none"))
        elif isinstance(value, (str, bool)):
            rows.append((name, str(value)))
        else:
            rows.append((name, value))
    return rows


def _write_summary(cfg: RunConfig, out: Path, name: str, payload: dict) -> Path:
    if cfg.run.summary_format == "json":
        return write_json(out / f"{name}.json",
                          {**payload, "config": cfg.resolved()}, cfg.config_hash)
    pairs = _flatten(payload, name) + _flatten(cfg.resolved())
    return write_kv_csv(out / f"{name}.csv", pairs, cfg.config_hash)


def _noise_block(state, probe, conj, chain) -> dict:
    block = {}
    for which in ("probe", "conjugate", "difference"):
        m = measure_noise(state, probe, conj, chain, which)
        block[which] = {"nsf_linear": m.nsf_linear, "nsf_db": m.nsf_db}
    return block


def cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    state, probe, conj = _channel_output(cfg)
    gains = channel_gains(cfg.channel.spec())
    payload = {
        "scenario": cfg.run.scenario,
        "two_photon_detuning_mhz": cfg.run.two_photon_detuning_mhz,
        "channel_family": cfg.channel.family,
        "gains": {"g_p": gains.g_p, "g_c": gains.g_c,
                  "g_sum": gains.total, "difference": gains.difference},
        "noise": _noise_block(state, probe, conj, cfg.detection),
        "seed_flux": cfg.seed.amplitude ** 2,
    }
    if cfg.context:
        payload["context"] = dict(cfg.context)
    _write_summary(cfg, out, "summary", payload)
    return payload


def _sweep_deltas(cfg: RunConfig) -> np.ndarray:
    sweep = cfg.sweep
    count = int(round((sweep.delta_max_mhz - sweep.delta_min_mhz)
                      / sweep.delta_step_mhz)) + 1
    deltas = sweep.delta_min_mhz + sweep.delta_step_mhz * np.arange(count)
    return deltas[deltas <= sweep.delta_max_mhz + 1e-9]


def cmd_sweep(cfg: RunConfig, out: Path) -> dict:
    probe, conj = _twin_labels(cfg)
    vacuum = vacuum_state(2, [probe, conj])
    t_range = (cfg.attenuation.t_min, cfg.attenuation.t_max)

    def point(delta: float) -> tuple:
        pair = gain_curves(cfg.gain_curve, float(delta))
        fit = fit_channel(pair, cfg.sweep.fit_family, steps=cfg.channel.steps)
        state = apply_channel(displace(vacuum, probe, cfg.seed.amplitude),
                              probe, conj, fit.spec)
        noise = measure_noise(state, probe, conj, cfg.detection, "difference")
        t_star, nsf_star = optimize_probe_attenuation(state, probe, conj,
                                                      cfg.detection, t_range)
        return (delta, pair.g_p, pair.g_c, pair.total,
                noise.nsf_linear, noise.nsf_db, t_star, to_decibel(nsf_star))

    deltas = _sweep_deltas(cfg)
    if cfg.run.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.run.threads) as pool:
            rows = list(pool.map(point, deltas))
    else:
        rows = [point(d) for d in deltas]

    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows, cfg.config_hash)
    squeezed = sum(1 for r in rows if r[4] < 1.0)
    payload = {
        "scenario": cfg.run.scenario,
        "points": len(rows),
        "squeezed_points": squeezed,
        "fit_family": cfg.sweep.fit_family,
        "delta_range_mhz": [cfg.sweep.delta_min_mhz, cfg.sweep.delta_max_mhz],
    }
    _write_summary(cfg, out, "sweep_summary", payload)
    return payload


def cmd_render(cfg: RunConfig, out: Path) -> dict:
    r = cfg.render
    l_seed = r.l
    beams = {
        "seed": l_seed,
        "probe": l_seed,
        "conjugate": conjugate_charge(0, l_seed),
    }
    payload = {"waist_um": r.waist_um, "extent_um": r.extent_um,
               "resolution": r.resolution, "beams": {}}
    for name, charge in beams.items():
        spec = LGModeSpec(charge, r.p, r.waist_um, r.wavelength_nm)
        fld = lg_field(spec, r.extent_um, r.resolution, r.z_um)
        tilt = tilt_for_fringes(fld, r.fringes)
        fork = interfere_plane_wave(fld, tilt)
        write_pgm(out / f"beam_{name}.pgm", np.abs(fld.grid) ** 2, cfg.config_hash)
        write_pgm(out / f"fork_{name}.pgm", fork.values, cfg.config_hash)
        payload["beams"][name] = {
            "charge": charge,
            "charge_extracted": topological_charge(fld),
            "fork_order": fork_dislocation_order(fork, tilt),
            "truncated": fld.truncated,
        }
    payload["oam_conserved"] = check_oam_conservation(
        0, beams["probe"], beams["conjugate"])
    _write_summary(cfg, out, "render_summary", payload)
    return payload


def cmd_fit(cfg: RunConfig, out: Path) -> dict:
    target = GainPair(cfg.fit.target_g_p, cfg.fit.target_g_c)
    target_nsf = (None if cfg.fit.target_nsf_db is None
                  else from_decibel(cfg.fit.target_nsf_db))
    result = fit_channel(target, cfg.fit.family, target_nsf, cfg.fit.steps)
    achieved = channel_gains(result.spec)
    from .channels import channel_nsf

    payload = {
        "family": result.family,
        "converged": result.converged,
        "residual": result.residual,
        "spec": dataclasses.asdict(result.spec),
        "achieved": {"g_p": achieved.g_p, "g_c": achieved.g_c,
                     "nsf_db": to_decibel(channel_nsf(result.spec))},
        "target": {"g_p": target.g_p, "g_c": target.g_c,
                   "nsf_db": cfg.fit.target_nsf_db},
    }
    _write_summary(cfg, out, "fit_summary", payload)
    return payload


def cmd_optimize(cfg: RunConfig, out: Path) -> dict:
    state, probe, conj = _channel_output(cfg)
    t_range = (cfg.attenuation.t_min, cfg.attenuation.t_max)
    t_star, nsf_star = optimize_probe_attenuation(state, probe, conj,
                                                  cfg.detection, t_range)
    base = measure_noise(state, probe, conj, cfg.detection, "difference")
    payload = {
        "t_star": t_star,
        "nsf_star_linear": nsf_star,
        "nsf_star_db": to_decibel(nsf_star),
        "unattenuated_nsf_db": base.nsf_db,
    }
    if cfg.attenuation.fixed_attenuation is not None:
        fixed = cfg.attenuation.fixed_attenuation
        m = measure_noise(beamsplit_loss(state, probe, fixed), probe, conj,
                          cfg.detection, "difference")
        payload["fixed_attenuation"] = fixed
        payload["fixed_attenuation_nsf_db"] = m.nsf_db
    _write_summary(cfg, out, "attenuation_summary", payload)
    return payload


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinbeams",
        description="Quantum-correlated OAM twin-beam simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_config=True):
        p = sub.add_parser(name, help=help_text)
        if needs_config:
            p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the RNG seed")
        p.add_argument("--threads", type=int, default=None,
                       help="override the worker count")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="summary file format")
        return p

    add("simulate", "run one channel scenario and report noise levels")
    add("sweep-detuning", "sweep two-photon detuning, write sweep.csv")
    render = add("render-beams", "write beam and interferogram PGM images")
    render.add_argument("--l", type=int, default=None,
                        help="override the seed topological charge")
    add("fit", "invert a channel family from target gains")
    add("optimize-attenuation", "find the probe attenuation minimizing the NSF")
    add("presets", "write the paper preset configs", needs_config=False)
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    run = cfg.run
    if args.seed is not None:
        run = dataclasses.replace(run, rng_seed=args.seed)
    if args.threads is not None:
        run = dataclasses.replace(run, threads=max(1, args.threads))
    if args.format is not None:
        run = dataclasses.replace(run, summary_format=args.format)
    render = cfg.render
    if getattr(args, "l", None) is not None:
        render = dataclasses.replace(render, l=args.l)
    return dataclasses.replace(cfg, run=run, render=render)


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-detuning": cmd_sweep,
    "render-beams": cmd_render,
    "fit": cmd_fit,
    "optimize-attenuation": cmd_optimize,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "presets":
            out.mkdir(parents=True, exist_ok=True)
            for path in write_presets(out):
                print(path)
            return 0
        cfg = _apply_overrides(parse_config(args.config), args)
        out.mkdir(parents=True, exist_ok=True)
        payload = HANDLERS[args.command](cfg, out)
        for key in ("nsf_star_db", "points", "converged"):
            if key in payload:
                print(f"{key}: {payload[key]}")
        suffix = cfg.run.summary_format
        print(f"wrote {out} (summary .{suffix}, config {cfg.config_hash})")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
