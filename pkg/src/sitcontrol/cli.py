"""Command-line front end: simulate, batch, heatmap, sweep, env-rollout
and equilibria subcommands.

Configuration resolution: values from --params FILE first, then explicit
flags override. Every output file starts with a '#'-commented provenance
header holding the fully resolved configuration and seed, and
--dump-config writes that configuration back out as a reusable file.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .model import (ModelParams, SitState, PARAM_CONFIG_KEYS,
                    params_from_config, persistence_equilibrium,
                    critical_constant_control)
from .controls import CONTROL_NAMES, law_from_config
from .integrators import SimConfig, IntegrationBlowup, simulate
from .experiments import (BatchConfig, BatchError, run_batch, emit_heatmap,
                          write_heatmap, umin_sweep)
from .environment import EnvConfig, rollout, write_transcript


def build_parser():
    p = argparse.ArgumentParser(
        prog="sitcontrol",
        description="Simulation and control evaluation for the SIT "
                    "mosquito population model.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, t_end_default):
        sp.add_argument("--params", metavar="FILE",
                        help="key-value configuration file")
        sp.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default: current)")
        sp.add_argument("--seed", type=int, default=None, metavar="U64")
        sp.add_argument("--force", action="store_true",
                        help="allow overwriting existing output files")
        sp.add_argument("--dump-config", action="store_true",
                        help="write the resolved configuration to "
                             "<out>/config.txt")
        sp.add_argument("--control", choices=CONTROL_NAMES, default=None)
        for flag in ("u-bar", "u-min", "u-max", "alpha1", "alpha2", "m-thr",
                     "noise-sigma"):
            sp.add_argument(f"--{flag}", type=float, default=None)
        sp.add_argument("--scheme", choices=("euler", "rk4"), default=None)
        sp.add_argument("--dt", type=float, default=None)
        sp.add_argument("--t-end", type=float, default=None)
        sp.add_argument("--control-update-interval", type=int, default=None)
        sp.add_argument("--output-stride", type=int, default=None)
        sp.set_defaults(t_end_default=t_end_default)

    sp = sub.add_parser("simulate", help="one trajectory under a control law")
    add_common(sp, t_end_default=1000.0)
    sp.add_argument("--ic", metavar="E,M,F,MS",
                    help="initial condition (default: uniform in "
                         "[0,10K]^4 from the seed)")

    sp = sub.add_parser("batch", help="Monte Carlo statistics over random "
                                      "initial conditions")
    add_common(sp, t_end_default=1000.0)
    sp.add_argument("--n-sims", type=int, default=100)
    sp.add_argument("--checkpoints", default="200,400,600,800",
                    metavar="D1,D2,...")

    sp = sub.add_parser("heatmap", help="control law on a log-spaced "
                                        "observation grid")
    add_common(sp, t_end_default=1000.0)
    sp.add_argument("--grid-size", type=int, default=50)
    sp.add_argument("--grid-min", type=float, default=1.0)
    sp.add_argument("--grid-max", type=float, default=1e5)

    sp = sub.add_parser("sweep", help="rerun one initial condition across "
                                      "u_min values")
    add_common(sp, t_end_default=2000.0)
    sp.add_argument("--umin-values", default="0,0.001,1,5", metavar="V1,V2,...")
    sp.add_argument("--ic", metavar="E,M,F,MS")

    sp = sub.add_parser("env-rollout", help="replay an action file through "
                                            "the training environment")
    add_common(sp, t_end_default=1000.0)
    sp.add_argument("--actions", required=True, metavar="FILE",
                    help="one action in [-1,1] per line")
    sp.add_argument("--episode-seed", type=int, default=None)

    sp = sub.add_parser("equilibria", help="print the persistence "
                                           "equilibrium and U*")
    sp.add_argument("--params", metavar="FILE")

    return p


# config key -> argparse attribute name
_FLAG_KEYS = {
    "control": "control", "u_bar": "u_bar", "u_min": "u_min",
    "u_max": "u_max", "alpha1": "alpha1", "alpha2": "alpha2",
    "m_thr": "m_thr", "noise_sigma": "noise_sigma",
    "scheme": "scheme", "dt": "dt", "t_end": "t_end",
    "control_update_interval": "control_update_interval",
    "output_stride": "output_stride", "seed": "seed",
}


def _resolve(args):
    """Merge file configuration and flag overrides into one dict of
    strings, then materialize params / law / sim config / seed."""
    cfg = cfgmod.load_config(args.params) if args.params else {}
    for key, attr in _FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            cfg[key] = str(v)

    params = params_from_config(cfg)
    law = law_from_config(cfg)
    dt = float(cfg.get("dt", 0.01))
    t_end = float(cfg.get("t_end", args.t_end_default))
    stride = int(cfg.get("output_stride", max(1, int(round(1.0 / dt)))))
    sim = SimConfig(dt=dt, t_end=t_end, scheme=cfg.get("scheme", "euler"),
                    control_update_interval=int(cfg.get("control_update_interval", 1)),
                    output_stride=stride)
    seed = int(cfg.get("seed", 0))

    # Fully resolved provenance: explicit values for every relevant key.
    resolved = {k: str(getattr(params, f)) for k, f in PARAM_CONFIG_KEYS.items()}
    resolved.update({k: cfg[k] for k in cfgmod.CONTROL_KEYS if k in cfg})
    resolved.setdefault("control", cfg.get("control", "constant"))
    resolved.update(dt=str(sim.dt), t_end=str(sim.t_end), scheme=sim.scheme,
                    control_update_interval=str(sim.control_update_interval),
                    output_stride=str(sim.output_stride), seed=str(seed))
    return params, law, sim, seed, resolved


def _out_path(args, name):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    if path.exists() and not args.force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    return path


def _maybe_dump(args, resolved):
    if args.dump_config:
        path = _out_path(args, "config.txt")
        path.write_text(cfgmod.format_config(resolved))
        print(f"wrote {path}")


def _parse_ic(text, params, seed):
    if text is None:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        vals = rng.uniform(0.0, 10.0 * params.K, size=4)
    else:
        vals = [float(v) for v in text.split(",")]
        if len(vals) != 4:
            raise ValueError("--ic needs four comma-separated values E,M,F,MS")
    return SitState(*vals)


def _cmd_simulate(args):
    params, law, sim, seed, resolved = _resolve(args)
    ic = _parse_ic(args.ic, params, seed)
    resolved["_ic"] = f"{ic.E:.8g},{ic.M:.8g},{ic.F:.8g},{ic.Ms:.8g}"
    traj = simulate(ic, params, law, sim, seed=seed)
    path = _out_path(args, "trajectory.csv")
    traj.to_csv(path, header_lines=cfgmod.provenance_lines(resolved))
    _maybe_dump(args, {k: v for k, v in resolved.items() if not k.startswith("_")})
    print(f"wrote {path}")
    return 0


def _cmd_batch(args):
    params, law, sim, seed, resolved = _resolve(args)
    checkpoints = tuple(float(v) for v in args.checkpoints.split(","))
    cfg = BatchConfig(law=law, sim=sim, params=params, n_sims=args.n_sims,
                      checkpoints=checkpoints, master_seed=seed)
    report = run_batch(cfg)
    resolved["_n_sims"] = str(args.n_sims)
    resolved["_checkpoints"] = args.checkpoints
    header = cfgmod.provenance_lines(resolved)
    csv_path = _out_path(args, "stats.csv")
    report.to_csv(csv_path, header_lines=header)
    txt_path = _out_path(args, "report.txt")
    txt_path.write_text("".join(f"# {line}\n" for line in header)
                        + report.to_text())
    _maybe_dump(args, {k: v for k, v in resolved.items() if not k.startswith("_")})
    print(report.to_text(), end="")
    print(f"wrote {csv_path} and {txt_path}")
    return 0


def _cmd_heatmap(args):
    params, law, sim, seed, resolved = _resolve(args)
    lo, hi = np.log10(args.grid_min), np.log10(args.grid_max)
    grid = np.logspace(lo, hi, args.grid_size)
    rows = emit_heatmap(law, m_grid=grid, f_grid=grid)
    path = _out_path(args, "heatmap.csv")
    write_heatmap(path, rows, header_lines=cfgmod.provenance_lines(resolved))
    _maybe_dump(args, resolved)
    print(f"wrote {path}")
    return 0


def _cmd_sweep(args):
    params, law, sim, seed, resolved = _resolve(args)
    ic = _parse_ic(args.ic, params, seed)
    values = [float(v) for v in args.umin_values.split(",")]
    entries = umin_sweep(law, values, ic, params, sim, seed=seed)
    header = cfgmod.provenance_lines(
        dict(resolved, _ic=f"{ic.E:.8g},{ic.M:.8g},{ic.F:.8g},{ic.Ms:.8g}"))
    verdict_lines = []
    for j, entry in enumerate(entries):
        path = _out_path(args, f"sweep_{j}_umin_{entry.u_min:g}.csv")
        entry.trajectory.to_csv(path, header_lines=header)
        verdict_lines.append(f"u_min={entry.u_min:g}: {entry.verdict}")
    vpath = _out_path(args, "verdicts.txt")
    vpath.write_text("".join(f"# {line}\n" for line in header)
                     + "\n".join(verdict_lines) + "\n")
    _maybe_dump(args, resolved)
    print("\n".join(verdict_lines))
    print(f"wrote {vpath}")
    return 0


def _cmd_env_rollout(args):
    params, law, sim, seed, resolved = _resolve(args)
    actions = [float(line) for line in Path(args.actions).read_text().split()]
    episode_seed = args.episode_seed if args.episode_seed is not None else seed
    env_cfg = EnvConfig(params=params, seed=episode_seed)
    records = rollout(env_cfg, episode_seed, actions)
    resolved["_episode_seed"] = str(episode_seed)
    path = _out_path(args, "rollout.csv")
    write_transcript(path, records,
                     header_lines=cfgmod.provenance_lines(resolved))
    _maybe_dump(args, {k: v for k, v in resolved.items() if not k.startswith("_")})
    print(f"wrote {path}")
    return 0


def _cmd_equilibria(args):
    cfg = cfgmod.load_config(args.params) if args.params else {}
    params = params_from_config(cfg)
    e, m, f = persistence_equilibrium(params)
    u_star = critical_constant_control(params)
    print(f"E* = {e:.6f}")
    print(f"M* = {m:.6f}")
    print(f"F* = {f:.6f}")
    print(f"U* = {u_star:.6f}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "batch": _cmd_batch,
    "heatmap": _cmd_heatmap,
    "sweep": _cmd_sweep,
    "env-rollout": _cmd_env_rollout,
    "equilibria": _cmd_equilibria,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (cfgmod.ConfigError, ValueError, FileNotFoundError,
            FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationBlowup, BatchError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
