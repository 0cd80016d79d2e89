"""Training environment over the SIT dynamics: reset/step semantics with
partial observations, action remapping, action repeat and penalty-shaped
rewards.

Episodes run `horizon_steps` actions; each action is held fixed across
`substeps_per_action` explicit-Euler substeps (with defaults, one action
per week for 1001 simulated days). Only the two totals (M+Ms, F+Fs) are
observable, normalized into [0, 1].
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, SitState
from .integrators import euler_advance_scalar, ratio_fs


@dataclass(frozen=True)
class EnvConfig:
    params: ModelParams = field(default_factory=ModelParams)
    dt: float = 0.01
    substeps_per_action: int = 700
    horizon_steps: int = 143
    c1: float = 0.1
    c3: float = 0.001
    c4: float = 0.01
    switch_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.substeps_per_action < 1 or self.horizon_steps < 1:
            raise ValueError("dt, substeps_per_action, horizon_steps must be positive")
        if min(self.c1, self.c3, self.c4) < 0:
            raise ValueError("reward weights must be >= 0")
        if not 0.0 < self.switch_fraction < 1.0:
            raise ValueError("switch_fraction must be in (0,1)")

    @property
    def ic_max(self) -> float:
        """Upper bound of the uniform initial-condition box (10*K)."""
        return 10.0 * self.params.K

    @property
    def action_u_max(self) -> float:
        """Release rate the action endpoint a=1 maps to (10*K)."""
        return 10.0 * self.params.K

    @property
    def obs_scale(self) -> float:
        """Divisor for observation normalization (2 * ic_max)."""
        return 2.0 * self.ic_max

    @property
    def switch_step(self) -> int:
        """First action step at which the heavier Ms penalty applies."""
        return math.ceil(self.switch_fraction * self.horizon_steps)

    @property
    def duration_days(self) -> float:
        return self.dt * self.substeps_per_action * self.horizon_steps


@dataclass
class EnvState:
    state: SitState
    fs: float          # tracked unfertilized-female observable
    step_index: int
    rng: np.random.Generator


class EpisodeDone(RuntimeError):
    """Raised when stepping an episode past its horizon."""


def _normalized_obs(env: EnvState, cfg: EnvConfig) -> np.ndarray:
    s = env.state
    return np.array([min((s.M + s.Ms) / cfg.obs_scale, 1.0),
                     min((s.F + env.fs) / cfg.obs_scale, 1.0)])


def reset(cfg: EnvConfig, episode_seed: int):
    """Start an episode: E, M, F, Ms drawn independently uniform on
    [0, ic_max] from a stream derived from episode_seed."""
    rng = np.random.default_rng(np.random.SeedSequence(episode_seed))
    e, m, f, ms = rng.uniform(0.0, cfg.ic_max, size=4)
    env = EnvState(state=SitState(e, m, f, ms),
                   fs=float(ratio_fs(m, f, ms)), step_index=0, rng=rng)
    return env, _normalized_obs(env, cfg)


def map_action(a: float, cfg: EnvConfig) -> float:
    """Affine remap of a policy action in [-1, 1] (clamped) to a release
    rate in [0, action_u_max]."""
    if not math.isfinite(a):
        raise ValueError(f"action must be finite, got {a}")
    a = min(max(a, -1.0), 1.0)
    return (a + 1.0) / 2.0 * cfg.action_u_max


def compute_reward(state: SitState, step_index: int, cfg: EnvConfig) -> float:
    """Penalty on remaining populations: -(c1*||(E,M,F)||_2 + c2*Ms), with
    the Ms weight stepping up from c3 to c3+c4 near the horizon's end to
    steer toward the extinction equilibrium."""
    c2 = cfg.c3 if step_index < cfg.switch_step else cfg.c3 + cfg.c4
    pest = math.sqrt(state.E ** 2 + state.M ** 2 + state.F ** 2)
    return -(cfg.c1 * pest + c2 * state.Ms)


def step(env: EnvState, a: float, cfg: EnvConfig):
    """Apply one action: remap it, hold it for substeps_per_action Euler
    substeps, then return (observation, reward, done). The reward uses the
    post-advance state and the incremented step index."""
    if env.step_index >= cfg.horizon_steps:
        raise EpisodeDone(f"episode finished after {cfg.horizon_steps} steps")
    u = map_action(a, cfg)
    s = env.state
    e, m, f, ms, fs = euler_advance_scalar(s.E, s.M, s.F, s.Ms, env.fs,
                                           cfg.params, u, cfg.dt,
                                           cfg.substeps_per_action)
    env.state = SitState(e, m, f, ms)
    env.fs = fs
    env.step_index += 1
    reward = compute_reward(env.state, env.step_index, cfg)
    done = env.step_index == cfg.horizon_steps
    return _normalized_obs(env, cfg), reward, done


class SitEnv:
    """Small stateful wrapper with the usual reset()/step() surface."""

    def __init__(self, cfg: EnvConfig | None = None):
        self.cfg = cfg if cfg is not None else EnvConfig()
        self._env = None

    def reset(self, episode_seed: int | None = None):
        seed = self.cfg.seed if episode_seed is None else episode_seed
        self._env, obs = reset(self.cfg, seed)
        return obs

    def step(self, a: float):
        if self._env is None:
            raise RuntimeError("call reset() before step()")
        obs, reward, done = step(self._env, a, self.cfg)
        return obs, reward, done

    @property
    def state(self) -> SitState:
        return self._env.state

    @property
    def step_index(self) -> int:
        return self._env.step_index


def rollout(cfg: EnvConfig, episode_seed: int, actions):
    """Run a fixed action sequence through one episode, returning one
    record per step: (step, action, u, E, M, F, Ms, reward, done)."""
    env, _ = reset(cfg, episode_seed)
    records = []
    for a in actions:
        if env.step_index >= cfg.horizon_steps:
            break
        u = map_action(a, cfg)
        _, reward, done = step(env, a, cfg)
        s = env.state
        records.append((env.step_index, float(a), u, s.E, s.M, s.F, s.Ms,
                        reward, done))
        if done:
            break
    return records


def write_transcript(path, records, header_lines=()):
    """Rollout transcript as delimited text so external trainers can be
    validated bit-exactly."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("step,action,u,E,M,F,Ms,reward,done\n")
        for rec in records:
            step_i, a, u, e, m, f, ms, r, done = rec
            fh.write(f"{step_i},{a:.8g},{u:.8g},{e:.8g},{m:.8g},{f:.8g},"
                     f"{ms:.8g},{r:.8g},{int(done)}\n")
