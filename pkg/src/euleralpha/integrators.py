"""
Time integration of the vorticity-form dynamics.

Three steppers are provided:

* ``rk4``: classical explicit Runge-Kutta on the full (viscous or
  inviscid) right-hand side;
* ``lie_trotter``: first-order product formula, the exact diffusion
  semigroup over dt followed by one inviscid RK4 transport step over dt;
* ``strang``: the symmetric second-order variant with half-step
  diffusion on each side.

The diffusion sub-flow dq/dt = nu * Lap (1 - alpha^2 Lap)^{-1} q is solved
in closed form: each mode is multiplied by exp(-nu dt k^2 / (1 + a^2 k^2)),
a contraction for every nonzero mode. The splitting order within a
Lie-Trotter step is fixed as diffusion first (both orders are first-order
accurate; one had to be picked).

Every step re-pins the mean of q to zero and advances t; a step whose CFL
number max|u| dt / h exceeds the configured limit is rejected by raising
:class:`CflViolation`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import SimState, compute_diagnostics, max_speed, rhs_vorticity

SCHEMES = ("rk4", "lie_trotter", "strang")

#: leave sub-femtosecond residual intervals to roundoff
_TIME_ATOL = 1e-12


class CflViolation(RuntimeError):
    """Step rejected: advective CFL number beyond the configured limit."""

    def __init__(self, cfl: float, limit: float, t: float):
        super().__init__(f"CFL number {cfl:.3f} exceeds limit {limit:.3f} at t={t:.6g}")
        self.cfl = cfl
        self.limit = limit
        self.t = t


class NumericsFailure(RuntimeError):
    """Integration produced non-finite values."""

    def __init__(self, t: float):
        super().__init__(f"non-finite state at t={t:.6g}")
        self.t = t


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping configuration."""

    dt: float
    scheme: str = "rk4"
    cfl_limit: float = 0.5

    def __post_init__(self) -> None:
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (0.0 < self.cfl_limit <= 1.0):
            raise ValueError(f"cfl_limit must lie in (0, 1], got {self.cfl_limit}")


def cfl_number(state: SimState, dt: float) -> float:
    """Advective CFL number max|u| * dt / h."""
    return max_speed(state) * dt / state.grid.h


def _check_cfl(state: SimState, dt: float, cfl_limit: Optional[float]) -> None:
    if cfl_limit is None:
        return
    cfl = cfl_number(state, dt)
    if cfl > cfl_limit:
        raise CflViolation(cfl, cfl_limit, state.t)


def _rk4_increment(state: SimState, dt: float) -> np.ndarray:
    k1 = rhs_vorticity(state)
    k2 = rhs_vorticity(state.replace(q_hat=state.q_hat + 0.5 * dt * k1, t=state.t + 0.5 * dt))
    k3 = rhs_vorticity(state.replace(q_hat=state.q_hat + 0.5 * dt * k2, t=state.t + 0.5 * dt))
    k4 = rhs_vorticity(state.replace(q_hat=state.q_hat + dt * k3, t=state.t + dt))
    return (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(state: SimState, dt: float, cfl_limit: Optional[float] = 0.5) -> SimState:
    """One classical RK4 step of the full vorticity equation."""
    _check_cfl(state, dt, cfl_limit)
    q_new = state.q_hat + _rk4_increment(state, dt)
    q_new[0, 0] = 0.0
    return state.replace(q_hat=q_new, t=state.t + dt)


def diffusion_semigroup(state: SimState, dt: float) -> SimState:
    """
    Exact flow of dq/dt = nu * Lap (1 - alpha^2 Lap)^{-1} q over dt.

    Multiplies q_hat(k) by exp(-nu dt k^2 / (1 + alpha^2 k^2)); the
    identity for nu = 0. Satisfies the semigroup law F_t F_s = F_{t+s}
    to roundoff by construction.
    """
    if state.nu == 0.0 or dt == 0.0:
        return state.replace(q_hat=state.q_hat.copy(), t=state.t + dt)
    grid = state.grid
    decay = np.exp(-state.nu * dt * grid.K2 / (1.0 + state.alpha**2 * grid.K2))
    return state.replace(q_hat=state.q_hat * decay, t=state.t + dt)


def _inviscid_rk4(state: SimState, dt: float, cfl_limit: Optional[float]) -> SimState:
    inviscid = state.replace(nu=0.0)
    stepped = step_rk4(inviscid, dt, cfl_limit)
    return stepped.replace(nu=state.nu)


def step_lie_trotter(state: SimState, dt: float, cfl_limit: Optional[float] = 0.5) -> SimState:
    """Diffusion semigroup over dt, then one inviscid transport step over dt."""
    _check_cfl(state, dt, cfl_limit)
    diffused = diffusion_semigroup(state, dt)
    out = _inviscid_rk4(diffused.replace(t=state.t), dt, cfl_limit=None)
    return out.replace(t=state.t + dt)


def step_strang(state: SimState, dt: float, cfl_limit: Optional[float] = 0.5) -> SimState:
    """Half-step diffusion, inviscid transport over dt, half-step diffusion."""
    _check_cfl(state, dt, cfl_limit)
    half = diffusion_semigroup(state, 0.5 * dt)
    mid = _inviscid_rk4(half.replace(t=state.t), dt, cfl_limit=None)
    out = diffusion_semigroup(mid, 0.5 * dt)
    return out.replace(t=state.t + dt)


STEPPERS: dict[str, Callable[..., SimState]] = {
    "rk4": step_rk4,
    "lie_trotter": step_lie_trotter,
    "strang": step_strang,
}


def advance(state: SimState, t_final: float, config: StepperConfig):
    """
    Generate ``(step_index, state)`` pairs from ``state.t`` to ``t_final``.

    The final partial step is shortened so the last state lands exactly on
    t_final. Non-finite states abort with :class:`NumericsFailure`.
    """
    if t_final < state.t:
        raise ValueError(f"t_final={t_final} precedes the state time {state.t}")
    stepper = STEPPERS[config.scheme]
    t0 = state.t
    atol = _TIME_ATOL * max(1.0, abs(t_final))
    step = 0
    yield step, state
    while t_final - state.t > atol:
        dt = min(config.dt, t_final - state.t)
        state = stepper(state, dt, config.cfl_limit)
        step += 1
        # land on the exact step grid: accumulation drift would otherwise
        # leave the end time (and sweep comparability) off by roundoff
        t_exact = t0 + step * config.dt
        state = state.replace(t=t_final if t_final - t_exact <= atol else t_exact)
        if not np.all(np.isfinite(state.q_hat)):
            raise NumericsFailure(state.t)
        yield step, state


def integrate(
    state: SimState,
    t_final: float,
    config: StepperConfig,
    observer: Optional[Callable] = None,
    observe_every: int = 1,
) -> SimState:
    """
    Step ``state`` to ``t_final``.

    ``observer(step, state, diagnostics)`` is invoked at step 0, every
    ``observe_every``-th step, and at the final step. Returns the final
    state (t == t_final exactly).
    """
    final = state
    final_step = 0
    last_observed = -1
    for step, current in advance(state, t_final, config):
        final = current
        final_step = step
        if observer is not None and step % observe_every == 0:
            observer(step, current, compute_diagnostics(current, config.dt))
            last_observed = step
    if observer is not None and last_observed != final_step:
        # the terminal state is always reported, even off-cadence
        observer(final_step, final, compute_diagnostics(final, config.dt))
    return final
