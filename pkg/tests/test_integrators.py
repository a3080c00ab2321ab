"""
Tests for the steppers: exact decay, semigroup laws, splitting behavior,
convergence orders, CFL rejection, and the integrate driver.
"""

import numpy as np
import pytest

from euleralpha.dynamics import compute_diagnostics, omega_from_q, state_from_omega
from euleralpha.integrators import (
    CflViolation,
    NumericsFailure,
    STEPPERS,
    StepperConfig,
    advance,
    cfl_number,
    diffusion_semigroup,
    integrate,
    step_lie_trotter,
    step_rk4,
)
from euleralpha.spectral import forward_transform, l2_norm

from conftest import random_state


def single_shell(grid, alpha, nu=0.0):
    return state_from_omega(grid, forward_transform(np.cos(2 * grid.X)), alpha, nu=nu)


def omega_amplitude(state):
    return np.fft.ifft2(omega_from_q(state.grid, state.q_hat, state.alpha)).real.max()


def observed_order(dts, errors):
    slope, _ = np.polyfit(np.log(dts), np.log(errors), 1)
    return slope


class TestStepperConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=0.0)
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, scheme="euler")
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, cfl_limit=0.0)
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, cfl_limit=1.5)


class TestStepRk4:
    def test_zero_state_only_time_advances(self, grid16):
        state = state_from_omega(grid16, np.zeros((16, 16), dtype=complex), 0.4)
        out = step_rk4(state, 0.1)
        assert out.t == pytest.approx(0.1)
        assert not out.q_hat.any()

    def test_single_shell_viscous_decay(self, grid32):
        # omega(t) = exp(-nu k^2 t / (1 + a^2 k^2)) cos(2x); factor exp(-0.02)
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        for _ in range(100):
            state = step_rk4(state, 0.01)
        exact = np.exp(-0.02)
        assert abs(omega_amplitude(state) - exact) / exact <= 1e-9

    def test_local_order_from_step_halving(self, grid32):
        # one dt step vs two dt/2 steps differ at O(dt^5): slope >= 3.8 observed
        state = random_state(grid32, alpha=0.25, nu=0.01, seed=1)
        dts = (0.08, 0.04, 0.02, 0.01)
        errs = []
        for dt in dts:
            one = step_rk4(state, dt, cfl_limit=None)
            two = step_rk4(step_rk4(state, dt / 2, cfl_limit=None), dt / 2, cfl_limit=None)
            errs.append(l2_norm(grid32, one.q_hat - two.q_hat))
        assert observed_order(dts, errs) >= 3.8

    def test_cfl_rejection_carries_number(self, grid32):
        state = single_shell(grid32, alpha=0.0)  # max|u| = 1/2
        dt = 1.5 * grid32.h  # cfl = 0.75
        with pytest.raises(CflViolation) as err:
            step_rk4(state, dt, cfl_limit=0.5)
        assert err.value.cfl == pytest.approx(0.75, rel=1e-12)
        assert cfl_number(state, dt) == pytest.approx(0.75, rel=1e-12)

    def test_mean_mode_stays_zero(self, grid32):
        state = random_state(grid32, alpha=0.25, nu=0.01, seed=2)
        for stepper in STEPPERS.values():
            out = stepper(state, 1e-2)
            assert out.q_hat[0, 0] == 0.0


class TestDiffusionSemigroup:
    def test_inviscid_identity(self, grid16):
        state = random_state(grid16, alpha=0.3, nu=0.0, seed=3)
        out = diffusion_semigroup(state, 0.5)
        assert np.array_equal(out.q_hat, state.q_hat)
        assert out.t == pytest.approx(0.5)

    def test_single_mode_exact_factor(self, grid32):
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        out = diffusion_semigroup(state, 1.0)
        ratio = out.q_hat[2, 0] / state.q_hat[2, 0]
        assert abs(ratio - np.exp(-0.02)) <= 1e-14

    def test_semigroup_law(self, grid32):
        state = random_state(grid32, alpha=0.5, nu=0.7, seed=4)
        once = diffusion_semigroup(state, 1.1)
        twice = diffusion_semigroup(diffusion_semigroup(state, 0.4), 0.7)
        assert np.abs(once.q_hat - twice.q_hat).max() <= 1e-14 * np.abs(state.q_hat).max()

    def test_strict_contraction_of_nonzero_modes(self, grid32):
        state = random_state(grid32, alpha=0.5, nu=0.2, seed=5)
        out = diffusion_semigroup(state, 0.3)
        nz = np.abs(state.q_hat) > 0
        nz[0, 0] = False
        assert np.all(np.abs(out.q_hat[nz]) < np.abs(state.q_hat[nz]))


class TestSplittingSteppers:
    def test_lie_trotter_inviscid_equals_rk4(self, grid32):
        state = random_state(grid32, alpha=0.25, nu=0.0, seed=6)
        a = step_lie_trotter(state, 5e-3)
        b = step_rk4(state, 5e-3)
        assert np.abs(a.q_hat - b.q_hat).max() <= 1e-15 * np.abs(b.q_hat).max()

    def test_single_shell_splitting_exact(self, grid32):
        # diagonal commuting sub-flows: the splitting is exact on one shell
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        for _ in range(100):
            state = step_lie_trotter(state, 0.01)
        exact = np.exp(-0.02)
        assert abs(omega_amplitude(state) - exact) / exact <= 1e-12

    def test_observed_orders(self, grid32):
        # generic viscous problem: first order for Lie-Trotter, second for Strang
        state = random_state(grid32, alpha=0.25, nu=0.05, seed=7)
        t_final = 0.25
        ref = state
        cfg = StepperConfig(dt=0.25e-3, scheme="rk4")
        ref = integrate(state, t_final, cfg)
        dts = (0.025, 0.0125, 0.00625)
        for scheme, window in (("lie_trotter", (0.8, 1.2)), ("strang", (1.8, 2.2))):
            errs = []
            for dt in dts:
                out = integrate(state, t_final, StepperConfig(dt=dt, scheme=scheme))
                errs.append(l2_norm(grid32, out.q_hat - ref.q_hat))
            order = observed_order(dts, errs)
            assert window[0] <= order <= window[1], (scheme, order, errs)


class TestIntegrate:
    def test_zero_span_returns_state_observer_once(self, grid16):
        state = random_state(grid16, alpha=0.2, seed=8)
        calls = []
        out = integrate(state, state.t, StepperConfig(dt=0.1),
                        observer=lambda s, st, d: calls.append((s, d.t)))
        assert out is state
        assert calls == [(0, 0.0)]

    def test_rejects_backward_target(self, grid16):
        state = random_state(grid16, alpha=0.2, seed=9).replace(t=1.0)
        with pytest.raises(ValueError):
            integrate(state, 0.5, StepperConfig(dt=0.1))

    def test_final_partial_step_lands_exactly(self, grid32):
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        out = integrate(state, 0.25, StepperConfig(dt=0.1))
        assert out.t == 0.25

    def test_single_shell_decay_through_driver(self, grid32):
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        out = integrate(state, 1.0, StepperConfig(dt=0.01))
        exact = np.exp(-0.02)
        assert abs(omega_amplitude(out) - exact) / exact <= 1e-9

    def test_observer_cadence_and_final_report(self, grid32):
        state = single_shell(grid32, alpha=0.5, nu=0.01)
        steps = []
        integrate(state, 0.05, StepperConfig(dt=0.01),
                  observer=lambda s, st, d: steps.append(s), observe_every=2)
        assert steps == [0, 2, 4, 5]  # cadence plus the off-cadence terminal step

    def test_nan_state_aborts(self, grid16):
        state = random_state(grid16, alpha=0.2, nu=0.0, seed=10)
        bad = state.replace(q_hat=state.q_hat * np.nan)
        with pytest.raises(NumericsFailure):
            list(advance(bad, 1.0, StepperConfig(dt=0.1, scheme="rk4")))

    def test_energy_drift_tiny_over_unit_time(self, grid32):
        state = random_state(grid32, alpha=0.25, seed=11)
        e0 = compute_diagnostics(state).energy
        out = integrate(state, 1.0, StepperConfig(dt=2e-3))
        ef = compute_diagnostics(out).energy
        assert abs(ef - e0) / e0 <= 1e-8


class TestTimeReversal:
    @pytest.mark.parametrize("scheme", ["rk4", "lie_trotter", "strang"])
    def test_inviscid_reversal_recovers_ic(self, grid32, scheme):
        state = random_state(grid32, alpha=0.25, seed=12)
        cfg = StepperConfig(dt=2e-3, scheme=scheme)
        fwd = integrate(state, 0.5, cfg)
        rev = fwd.replace(q_hat=-fwd.q_hat, t=0.0)
        back = integrate(rev, 0.5, cfg)
        err = l2_norm(grid32, -back.q_hat - state.q_hat) / l2_norm(grid32, state.q_hat)
        assert err <= 1e-10
