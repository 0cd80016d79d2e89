"""Simulation and feedback-control evaluation toolkit for the sterile
insect technique (SIT) mosquito population model."""

from .model import (ModelParams, SitState, Observation, StateDerivative,
                    derivative, unfertilized_females, observe,
                    persistence_equilibrium, critical_constant_control)
from .controls import (ConstantLaw, RegPiecewiseLaw, SimplifiedBangLaw,
                       NoisyLaw, law_from_config)
from .integrators import (SimConfig, Trajectory, IntegrationBlowup,
                          euler_step, rk4_step, simulate, simulate_batch,
                          convergence_check)
from .environment import EnvConfig, SitEnv, map_action, compute_reward
from .experiments import (BatchConfig, StatsReport, run_batch, emit_heatmap,
                          umin_sweep, detect_cycle)

__version__ = "0.1.0"
