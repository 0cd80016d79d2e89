"""Time discretization of the SIT system: explicit Euler and classical
RK4 steps, trajectory simulation (single and batched), and the empirical
global-stability checker.

States are clamped to the non-negative orthant after every step; the
continuous system is positively invariant but explicit schemes can
overshoot near extinction. Any component exceeding BLOWUP_LIMIT (or going
non-finite) aborts a single simulation with `IntegrationBlowup`; in
batched runs the offending member is frozen to NaN and flagged so the
rest can continue.

Alongside the four dynamical compartments, simulations carry the tracked
unfertilized-female observable (initialized from the instantaneous ratio,
then advanced by its own emergence/death balance); feedback laws see the
observation (M + Ms, F + Fs) built from it.
"""

from dataclasses import dataclass, field

import numpy as np

from .model import (ModelParams, SitState, derivative_arrays,
                    unfertilized_flow)
from .controls import NoisyLaw

BLOWUP_LIMIT = 1e12

SCHEMES = ("euler", "rk4")


class IntegrationBlowup(RuntimeError):
    """Raised when a trajectory leaves the trusted numeric range."""

    def __init__(self, t, state_values):
        self.t = t
        self.state_values = tuple(state_values)
        super().__init__(f"integration blowup at t={t:g} days, "
                         f"state (E,M,F,Ms)={self.state_values}")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01                  # step size, days
    t_end: float = 1000.0             # horizon, days
    scheme: str = "euler"
    control_update_interval: int = 1  # steps between control re-evaluations
    output_stride: int = 100          # steps between recorded samples

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be > 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.control_update_interval < 1 or self.output_stride < 1:
            raise ValueError("control_update_interval and output_stride must be >= 1")


@dataclass
class Trajectory:
    """Recorded samples of a single simulation. `states` has one row per
    sample, columns (E, M, F, Ms); `fs` is the tracked unfertilized-female
    observable; `obs` columns (m_total, f_total)."""

    t: np.ndarray
    states: np.ndarray
    u: np.ndarray
    obs: np.ndarray
    fs: np.ndarray

    @property
    def final_state(self) -> SitState:
        e, m, f, ms = self.states[-1]
        return SitState(e, m, f, ms)

    def pest_norm(self, ord=2):
        """Norm of (E, M, F) at every sample."""
        return np.linalg.norm(self.states[:, :3], ord=ord, axis=1)

    def to_csv(self, path, header_lines=()):
        """Delimited-text export, one row per sample. Extra header lines
        are written as '#'-prefixed provenance."""
        e, m, f, ms = (self.states[:, i] for i in range(4))
        cols = np.column_stack([self.t, e, m, f, ms, self.fs, self.u,
                                self.obs[:, 0], self.obs[:, 1]])
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t,E,M,F,Ms,Fs,u,m_total,f_total\n")
            for row in cols:
                fh.write(",".join(format(v, ".8g") for v in row) + "\n")


@dataclass
class BatchTrajectories:
    """Recorded samples of a batch run: `states` is (samples, sims, 4),
    `fs` (samples, sims) holds the tracked unfertilized-female observable."""

    t: np.ndarray
    states: np.ndarray
    u: np.ndarray             # (samples, sims)
    failed: np.ndarray        # (sims,) bool
    fail_time: np.ndarray     # (sims,) NaN where not failed
    fs: np.ndarray            # (samples, sims)

    def member(self, i) -> Trajectory:
        s = self.states[:, i, :]
        fs = self.fs[:, i]
        obs = np.column_stack([s[:, 1] + s[:, 3], s[:, 2] + fs])
        return Trajectory(self.t.copy(), s.copy(), self.u[:, i].copy(), obs,
                          fs.copy())


def _deriv5(E, M, F, Ms, Fs, params, u):
    dE, dM, dF, dMs = derivative_arrays(E, M, F, Ms, params, u)
    return dE, dM, dF, dMs, unfertilized_flow(E, M, Ms, Fs, params)


def _clamped_euler(E, M, F, Ms, Fs, params, u, dt):
    k = _deriv5(E, M, F, Ms, Fs, params, u)
    return tuple(np.maximum(y + dt * dy, 0.0)
                 for y, dy in zip((E, M, F, Ms, Fs), k))


def _clamped_rk4(E, M, F, Ms, Fs, params, u, dt):
    y0 = (E, M, F, Ms, Fs)
    k1 = _deriv5(*y0, params, u)
    h = dt / 2.0
    k2 = _deriv5(*(y + h * dy for y, dy in zip(y0, k1)), params, u)
    k3 = _deriv5(*(y + h * dy for y, dy in zip(y0, k2)), params, u)
    k4 = _deriv5(*(y + dt * dy for y, dy in zip(y0, k3)), params, u)
    return tuple(np.maximum(y + dt / 6.0 * (a + 2 * b + 2 * c + d), 0.0)
                 for y, a, b, c, d in zip(y0, k1, k2, k3, k4))


_STEPPERS = {"euler": _clamped_euler, "rk4": _clamped_rk4}


def euler_step(state: SitState, params: ModelParams, u: float, dt: float) -> SitState:
    """One explicit-Euler update, clamped non-negative."""
    return _scalar_step("euler", state, params, u, dt)


def rk4_step(state: SitState, params: ModelParams, u: float, dt: float) -> SitState:
    """One classical Runge-Kutta update with u held constant across the
    stages, clamped non-negative."""
    return _scalar_step("rk4", state, params, u, dt)


def _scalar_step(scheme, state, params, u, dt):
    if dt < 0:
        raise ValueError("dt must be >= 0")
    arrs = tuple(np.asarray([v], dtype=float)
                 for v in (state.E, state.M, state.F, state.Ms, 0.0))
    E, M, F, Ms, _ = _STEPPERS[scheme](*arrs, params, float(u), dt)
    vals = (E[0], M[0], F[0], Ms[0])
    if not all(np.isfinite(v) and v < BLOWUP_LIMIT for v in vals):
        raise IntegrationBlowup(dt, vals)
    return SitState(*vals)


def ratio_fs(M, F, Ms):
    """Instantaneous unfertilized-female estimate F*Ms/M (0 when M = 0);
    used to initialize the tracked observable."""
    M, F, Ms = (np.asarray(v, dtype=float) for v in (M, F, Ms))
    return np.divide(F * Ms, M, out=np.zeros_like(M), where=M > 0)


class _FanoutStreams:
    """Adapter presenting per-simulation generators as one vector stream,
    so a batch draws exactly what each member would draw on its own."""

    def __init__(self, gens):
        self.gens = gens

    def normal(self, loc=0.0, scale=1.0, size=None):
        return np.array([g.normal(loc, scale) for g in self.gens])


def simulate_batch(ics, params: ModelParams, law, cfg: SimConfig,
                   rngs=None) -> BatchTrajectories:
    """Advance `n` simulations in lockstep from initial conditions `ics`
    (shape (n, 4)). `rngs` is a per-simulation list of generators, needed
    only for noise-wrapped laws."""
    ics = np.asarray(ics, dtype=float)
    if ics.ndim != 2 or ics.shape[1] != 4:
        raise ValueError("ics must have shape (n, 4)")
    n = ics.shape[0]
    noisy = isinstance(law, NoisyLaw)
    if noisy and (rngs is None or len(rngs) != n):
        raise ValueError("noise-wrapped laws need one rng per simulation")
    stream = _FanoutStreams(rngs) if noisy else None

    n_steps = int(round(cfg.t_end / cfg.dt))
    stride = cfg.output_stride
    rec_idx = list(range(stride, n_steps + 1, stride))
    if not rec_idx or rec_idx[-1] != n_steps:
        rec_idx.append(n_steps)
    n_rec = 1 + len(rec_idx)

    t_out = np.empty(n_rec)
    s_out = np.empty((n_rec, n, 4))
    u_out = np.empty((n_rec, n))
    fs_out = np.empty((n_rec, n))
    failed = np.zeros(n, dtype=bool)
    fail_time = np.full(n, np.nan)

    E, M, F, Ms = (ics[:, i].copy() for i in range(4))
    Fs = ratio_fs(M, F, Ms)
    u = np.asarray(law.evaluate(M + Ms, F + Fs, rng=stream), dtype=float)
    u = np.broadcast_to(u, (n,)).copy()

    def record(slot, k):
        t_out[slot] = k * cfg.dt
        s_out[slot, :, 0], s_out[slot, :, 1] = E, M
        s_out[slot, :, 2], s_out[slot, :, 3] = F, Ms
        u_out[slot] = u
        fs_out[slot] = Fs

    record(0, 0)
    stepper = _STEPPERS[cfg.scheme]
    slot = 1
    next_rec = rec_idx[0]
    ri = 0
    for k in range(1, n_steps + 1):
        if k > 1 and (k - 1) % cfg.control_update_interval == 0:
            u = np.asarray(law.evaluate(M + Ms, F + Fs, rng=stream),
                           dtype=float)
            u = np.broadcast_to(u, (n,)).copy()
            u[failed] = np.nan
        E, M, F, Ms, Fs = stepper(E, M, F, Ms, Fs, params, u, cfg.dt)
        # NaN compares false, so non-finite members register as bad too.
        ok = (E < BLOWUP_LIMIT) & (M < BLOWUP_LIMIT) & \
             (F < BLOWUP_LIMIT) & (Ms < BLOWUP_LIMIT) & (Fs < BLOWUP_LIMIT)
        new_bad = ~ok & ~failed
        if new_bad.any():
            bad_vals = np.column_stack([E, M, F, Ms])[new_bad]
            if n == 1:
                raise IntegrationBlowup(k * cfg.dt, bad_vals[0])
            failed |= new_bad
            fail_time[new_bad] = k * cfg.dt
            for arr in (E, M, F, Ms, Fs, u):
                arr[new_bad] = np.nan
        if k == next_rec:
            record(slot, k)
            slot += 1
            ri += 1
            next_rec = rec_idx[ri] if ri < len(rec_idx) else -1
    return BatchTrajectories(t_out, s_out, u_out, failed, fail_time, fs_out)


def simulate(initial: SitState, params: ModelParams, law, cfg: SimConfig,
             seed: int = 0) -> Trajectory:
    """Simulate one trajectory. The control is recomputed from the
    observation every `control_update_interval` steps and held constant in
    between; noise-wrapped laws draw from a stream derived from `seed`."""
    rngs = [np.random.default_rng(np.random.SeedSequence(seed))] \
        if isinstance(law, NoisyLaw) else None
    batch = simulate_batch(initial.as_array()[None, :], params, law, cfg,
                           rngs=rngs)
    return batch.member(0)


def convergence_check(traj: Trajectory, target_ms: float, eps: float,
                      t_check: float) -> bool:
    """Empirical stability verdict: every sample from t_check onward must
    have E, M, F and |Ms - target_ms| all within eps."""
    if traj.t[-1] < t_check:
        raise ValueError(f"trajectory ends at t={traj.t[-1]:g} "
                         f"before t_check={t_check:g}")
    s = traj.states[traj.t >= t_check]
    worst = np.max(np.column_stack([s[:, 0], s[:, 1], s[:, 2],
                                    np.abs(s[:, 3] - target_ms)]), axis=1)
    return bool(np.all(worst <= eps))


def euler_advance_scalar(E, M, F, Ms, Fs, params: ModelParams, u, dt, n_sub):
    """Fast scalar explicit-Euler advance with fixed u (plain floats),
    including the tracked unfertilized-female observable. Used by the
    training environment's action repeat."""
    p = params
    coef_e = p.nu_E + p.delta_E
    for i in range(n_sub):
        tot = M + Ms
        frac = M / tot if tot > 0 else 0.0
        sfrac = Ms / tot if tot > 0 else 0.0
        dE = p.beta_E * F * (1.0 - E / p.K) - coef_e * E
        dM = (1.0 - p.nu) * p.nu_E * E - p.delta_M * M
        dF = p.nu * p.nu_E * E * frac - p.delta_F * F
        dMs = u - p.delta_s * Ms
        dFs = p.nu * p.nu_E * E * sfrac - p.delta_F * Fs
        E = max(E + dt * dE, 0.0)
        M = max(M + dt * dM, 0.0)
        F = max(F + dt * dF, 0.0)
        Ms = max(Ms + dt * dMs, 0.0)
        Fs = max(Fs + dt * dFs, 0.0)
        if not (E < BLOWUP_LIMIT and M < BLOWUP_LIMIT and F < BLOWUP_LIMIT
                and Ms < BLOWUP_LIMIT and Fs < BLOWUP_LIMIT):
            raise IntegrationBlowup((i + 1) * dt, (E, M, F, Ms))
    return E, M, F, Ms, Fs
