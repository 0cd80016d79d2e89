"""Batch Monte Carlo harness: checkpoint statistics over random initial
conditions, control heatmaps, u_min sweeps and cycle detection.

Seeding is reproducible and order-independent: simulation i draws from
`np.random.SeedSequence(master_seed, spawn_key=(i,))` and aggregation runs
in simulation-index order, so parallel or vectorized execution cannot
change the report.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, SitState
from .controls import NoisyLaw, strip_noise
from .integrators import (SimConfig, Trajectory, simulate, simulate_batch,
                          convergence_check)


class BatchError(RuntimeError):
    """Raised when too large a fraction of a batch blows up."""


def derive_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """The fixed mixing function from master seed to per-simulation seed."""
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


@dataclass(frozen=True)
class BatchConfig:
    law: object
    sim: SimConfig
    params: ModelParams = field(default_factory=ModelParams)
    n_sims: int = 100
    ic_max: float | None = None               # default 10*K
    checkpoints: tuple = (200.0, 400.0, 600.0, 800.0)
    master_seed: int = 0
    # Optional convergence verdict per simulation.
    conv_target_ms: float | None = None
    conv_eps: float = 1.0
    conv_t_check: float | None = None
    max_failure_fraction: float = 0.1

    def __post_init__(self):
        if self.n_sims < 1:
            raise ValueError("n_sims must be >= 1")
        cps = tuple(self.checkpoints)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoints must be sorted ascending")
        if cps and cps[-1] > self.sim.t_end:
            raise ValueError("checkpoints must not exceed t_end")

    @property
    def ic_bound(self) -> float:
        return 10.0 * self.params.K if self.ic_max is None else self.ic_max


@dataclass
class CheckpointStats:
    t: float
    pest_avg: float   # |E|+|M|+|F|
    pest_var: float   # population variance (divide by n)
    pest_max: float
    ms_avg: float
    ms_var: float
    ms_max: float


@dataclass
class StatsReport:
    checkpoints: list            # of CheckpointStats
    final_states: np.ndarray     # (n_sims, 4), NaN rows for failures
    failed: np.ndarray           # (n_sims,) bool
    converged: np.ndarray | None # (n_sims,) bool, None if not requested
    n_sims: int

    @property
    def convergence_count(self):
        return None if self.converged is None else int(self.converged.sum())

    def to_text(self):
        """Human-readable table mirroring the reference layout (variance
        is the population variance, divide-by-n)."""
        lines = ["statistics over %d simulations (%d failed)"
                 % (self.n_sims, int(self.failed.sum()))]
        header = "%-24s" % "" + "".join("%14s" % (f"{c.t:g} days")
                                        for c in self.checkpoints)
        lines.append(header)
        rows = [
            ("average |E|+|M|+|F|", "pest_avg"),
            ("variance |E|+|M|+|F|", "pest_var"),
            ("maximum |E|+|M|+|F|", "pest_max"),
            ("average |Ms|", "ms_avg"),
            ("variance |Ms|", "ms_var"),
            ("maximum |Ms|", "ms_max"),
        ]
        for label, attr in rows:
            lines.append("%-24s" % label +
                         "".join("%14.6g" % getattr(c, attr)
                                 for c in self.checkpoints))
        if self.converged is not None:
            lines.append("converged: %d / %d" % (self.convergence_count,
                                                 self.n_sims))
        return "\n".join(lines) + "\n"

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t,pest_avg,pest_var,pest_max,ms_avg,ms_var,ms_max\n")
            for c in self.checkpoints:
                fh.write(",".join(format(v, ".8g") for v in
                                  (c.t, c.pest_avg, c.pest_var, c.pest_max,
                                   c.ms_avg, c.ms_var, c.ms_max)) + "\n")


def run_batch(cfg: BatchConfig) -> StatsReport:
    """Simulate n_sims random initial conditions in [0, ic_bound]^4 under
    one law and aggregate checkpoint statistics. Individual blowups are
    recorded and skipped; more than max_failure_fraction of them aborts."""
    n = cfg.n_sims
    gens = [np.random.default_rng(derive_seed(cfg.master_seed, i))
            for i in range(n)]
    ics = np.array([g.uniform(0.0, cfg.ic_bound, size=4) for g in gens])
    # Noise streams continue the same per-simulation generators.
    rngs = gens if isinstance(cfg.law, NoisyLaw) else None
    batch = simulate_batch(ics, cfg.params, cfg.law, cfg.sim, rngs=rngs)

    if batch.failed.sum() > cfg.max_failure_fraction * n:
        raise BatchError(f"{int(batch.failed.sum())} of {n} simulations blew up")

    ok = ~batch.failed
    stats = []
    for t_cp in cfg.checkpoints:
        idx = int(np.argmin(np.abs(batch.t - t_cp)))
        if abs(batch.t[idx] - t_cp) > cfg.sim.dt * cfg.sim.output_stride:
            raise ValueError(f"checkpoint {t_cp:g} days not covered by "
                             "recorded samples; adjust output_stride")
        s = batch.states[idx][ok]
        pest = np.abs(s[:, :3]).sum(axis=1)
        ms = np.abs(s[:, 3])
        stats.append(CheckpointStats(
            t=float(batch.t[idx]),
            pest_avg=float(pest.mean()), pest_var=float(pest.var()),
            pest_max=float(pest.max()),
            ms_avg=float(ms.mean()), ms_var=float(ms.var()),
            ms_max=float(ms.max())))

    converged = None
    if cfg.conv_target_ms is not None:
        t_check = cfg.conv_t_check
        if t_check is None:
            t_check = cfg.checkpoints[-1] if cfg.checkpoints else cfg.sim.t_end
        converged = np.zeros(n, dtype=bool)
        for i in range(n):
            if batch.failed[i]:
                continue
            converged[i] = convergence_check(batch.member(i), cfg.conv_target_ms,
                                             cfg.conv_eps, t_check)

    return StatsReport(checkpoints=stats, final_states=batch.states[-1].copy(),
                       failed=batch.failed.copy(), converged=converged, n_sims=n)


def emit_heatmap(law, m_grid=None, f_grid=None, grid_size=50):
    """Evaluate a law (noise disabled) on a log-spaced observation grid.
    Returns an array of rows (m_total, f_total, u), m-major order."""
    if m_grid is None:
        m_grid = np.logspace(0.0, 5.0, grid_size)
    if f_grid is None:
        f_grid = np.logspace(0.0, 5.0, grid_size)
    m_grid = np.asarray(m_grid, dtype=float)
    f_grid = np.asarray(f_grid, dtype=float)
    if m_grid.min() <= 0 or f_grid.min() <= 0:
        raise ValueError("grid bounds must be positive")
    core = strip_noise(law)
    mm, ff = np.meshgrid(m_grid, f_grid, indexing="ij")
    uu = core.evaluate(mm.ravel(), ff.ravel())
    return np.column_stack([mm.ravel(), ff.ravel(), np.asarray(uu)])


def write_heatmap(path, rows, header_lines=()):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("m_total,f_total,u\n")
        for m, f, u in rows:
            fh.write(f"{m:.8g},{f:.8g},{u:.8g}\n")


@dataclass
class SweepEntry:
    u_min: float
    trajectory: Trajectory
    converged: bool
    cyclic: bool

    @property
    def verdict(self) -> str:
        if self.converged:
            return "converged"
        return "cyclic" if self.cyclic else "not-converged"


def umin_sweep(base_law, umin_values, ic: SitState, params: ModelParams,
               sim: SimConfig, seed: int = 0, conv_eps: float = 1.0,
               conv_t_check: float = 1500.0, cycle_threshold: float = 100.0,
               cycle_settle: float = 500.0):
    """Rerun one initial condition under copies of base_law with different
    u_min floors; each entry carries a convergence/cycling verdict."""
    if sim.t_end < 2000.0:
        raise ValueError("u_min sweeps need t_end >= 2000 days")
    if not hasattr(base_law, "u_min"):
        raise ValueError("base law has no u_min to sweep")
    entries = []
    for v in umin_values:
        law = dataclasses.replace(base_law, u_min=float(v))
        traj = simulate(ic, params, law, sim, seed=seed)
        conv = convergence_check(traj, float(v) / params.delta_s, conv_eps,
                                 conv_t_check)
        cyc = detect_cycle(traj, cycle_threshold, cycle_settle)
        entries.append(SweepEntry(float(v), traj, conv, cyc))
    return entries


def detect_cycle(traj: Trajectory, threshold: float, settle_time: float) -> bool:
    """True when, after settle_time, the (E,M,F) norm crosses `threshold`
    from below to above at least twice (recurrent excursions)."""
    if traj.t[-1] <= settle_time:
        raise ValueError("trajectory shorter than settle_time")
    norms = traj.pest_norm()[traj.t >= settle_time]
    above = norms > threshold
    up_crossings = int(np.sum(~above[:-1] & above[1:]))
    return up_crossings >= 2
