"""
Experiment harness: run configuration, initial conditions, persisted runs,
and the headline parameter sweeps (vanishing viscosity, alpha -> 0 Euler
limit, splitting-order study).

Configuration is flat key=value text (one per line, ``#`` comments),
mirrored 1:1 by CLI flags; a flag overrides the file. Runs are fully
deterministic: a (config, seed) pair produces byte-identical diagnostics
CSV and snapshot files on a fixed platform.

Sweep distances are reported two ways: L2 on the prognostic field q and
the H^1_alpha-weighted norm on the velocity; fitted log-log slopes always
come with their residual. Observed convergence rates (e.g. the O(nu) rate
of the vanishing-viscosity sweep) are empirical findings of this harness,
not guaranteed rates.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import (
    SimState,
    compute_diagnostics,
    energy_hats,
    omega_from_q,
    state_from_omega,
    velocity_hats_from_q,
)
from .integrators import SCHEMES, CflViolation, NumericsFailure, StepperConfig, advance
from .output import DiagnosticsLog, snapshot_name, write_manifest, write_snapshot
from .spectral import TorusGrid, _ifft_real, dealias, l2_norm

IC_NAMES = ("single_mode", "taylor_green", "random_bandlimited")


class ConfigError(ValueError):
    """Invalid run configuration (bad key, value, or combination)."""


@dataclass(frozen=True)
class RunConfig:
    """One run of the solver, fully specified."""

    n: int = 64
    alpha: float = 0.25
    nu: float = 0.0
    dt: float = 1e-3
    t_final: float = 1.0
    scheme: str = "rk4"
    ic: str = "random_bandlimited"
    ic_kx: int = 2
    ic_ky: int = 0
    ic_band: int = 4
    ic_energy: float = 1.0
    ic_amplitude: float = 1.0
    seed: int = 0
    out: Optional[str] = None
    save_every: int = 100
    diag_every: int = 10
    workers: int = 1
    nu_list: tuple = ()
    alpha_list: tuple = ()
    dt_list: tuple = ()

    def validate(self) -> "RunConfig":
        if self.n < 8 or self.n % 2 != 0:
            raise ConfigError(f"n must be even and >= 8, got {self.n}")
        for name in ("alpha", "nu", "dt", "t_final", "ic_energy", "ic_amplitude"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
        if self.alpha < 0 or self.nu < 0:
            raise ConfigError("alpha and nu must be >= 0")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ConfigError(f"t_final must be >= 0, got {self.t_final}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.ic not in IC_NAMES:
            raise ConfigError(f"unknown ic {self.ic!r}; expected one of {IC_NAMES}")
        if self.save_every < 1 or self.diag_every < 1:
            raise ConfigError("save_every and diag_every must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.ic_band < 1:
            raise ConfigError(f"ic_band must be >= 1, got {self.ic_band}")
        if self.ic_energy <= 0:
            raise ConfigError(f"ic_energy must be positive, got {self.ic_energy}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def stepper(self) -> StepperConfig:
        return StepperConfig(dt=self.dt, scheme=self.scheme)


_INT_KEYS = ("n", "seed", "save_every", "diag_every", "workers", "ic_kx", "ic_ky", "ic_band")
_FLOAT_KEYS = ("alpha", "nu", "dt", "t_final", "ic_energy", "ic_amplitude")
_STR_KEYS = ("scheme", "ic", "out")
_LIST_KEYS = ("nu_list", "alpha_list", "dt_list")
CONFIG_KEYS = _INT_KEYS + _FLOAT_KEYS + _STR_KEYS + _LIST_KEYS


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            return tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    entries: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        entries[key] = value
    return entries


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a validated RunConfig from an optional file plus overrides."""
    entries: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        entries.update(parse_config_text(text))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        entries[key] = value
    typed = {key: _coerce(key, value) for key, value in entries.items()}
    return RunConfig(**typed).validate()


def config_entries(cfg: RunConfig) -> dict:
    """Flat key=value echo of a config (lists comma-joined)."""
    out = {}
    for key in CONFIG_KEYS:
        value = getattr(cfg, key)
        if key in _LIST_KEYS:
            value = ",".join(repr(float(v)) for v in value)
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# initial conditions

def make_omega0(cfg: RunConfig, grid: TorusGrid) -> np.ndarray:
    """
    Spectral initial vorticity for the configured initial condition.

    ``random_bandlimited`` draws independent unit-normal real/imag parts on
    the modes 1 <= |k|_inf <= ic_band, Hermitian-symmetrizes, zeroes the
    mean, and rescales so the H^1_alpha energy (measured with cfg.alpha)
    equals ic_energy exactly.
    """
    n = grid.n
    if cfg.ic == "single_mode":
        k = (cfg.ic_kx, cfg.ic_ky)
        if max(abs(k[0]), abs(k[1])) > grid.kmax_dealias or k == (0, 0):
            raise ConfigError(f"single_mode wavevector {k} outside the resolved band")
        omega = cfg.ic_amplitude * np.cos(k[0] * grid.X + k[1] * grid.Y)
        return np.fft.fft2(omega)
    if cfg.ic == "taylor_green":
        omega = cfg.ic_amplitude * 2.0 * np.cos(grid.X) * np.cos(grid.Y)
        return np.fft.fft2(omega)
    # random_bandlimited
    K = cfg.ic_band
    if K > grid.kmax_dealias:
        raise ConfigError(f"ic_band={K} outside the dealiased band of n={n}")
    rng = np.random.default_rng(cfg.seed)
    shape = (2 * K + 1, 2 * K + 1)
    block = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    omega_hat = np.zeros((n, n), dtype=np.complex128)
    kvec = np.arange(-K, K + 1)
    omega_hat[np.ix_(kvec % n, kvec % n)] = block
    idx = (-np.arange(n)) % n
    omega_hat = 0.5 * (omega_hat + np.conj(omega_hat[np.ix_(idx, idx)]))
    omega_hat[0, 0] = 0.0
    current = _omega_energy(grid, omega_hat, cfg.alpha)
    omega_hat *= np.sqrt(cfg.ic_energy / current)
    return omega_hat


def _omega_energy(grid: TorusGrid, omega_hat: np.ndarray, alpha: float) -> float:
    q_hat = (1.0 + alpha**2 * grid.K2) * omega_hat
    ux_hat, uy_hat = velocity_hats_from_q(grid, q_hat, alpha)
    return energy_hats(grid, ux_hat, uy_hat, alpha)


def make_initial_condition(cfg: RunConfig, grid: Optional[TorusGrid] = None) -> SimState:
    """Initial SimState: q_hat = (1 - alpha^2 Lap) omega0_hat, dealiased."""
    grid = grid or TorusGrid(cfg.n)
    return state_from_omega(grid, make_omega0(cfg, grid), cfg.alpha, nu=cfg.nu)


# ---------------------------------------------------------------------------
# persisted runs

def run(cfg: RunConfig, omega_hat: Optional[np.ndarray] = None) -> SimState:
    """
    Integrate the configured problem, writing diagnostics CSV, snapshots,
    and a run manifest into ``cfg.out``. Returns the final state.
    """
    cfg.validate()
    if cfg.out is None:
        raise ConfigError("run requires an output directory (out)")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    grid = TorusGrid(cfg.n)
    if omega_hat is None:
        omega_hat = make_omega0(cfg, grid)
    state = state_from_omega(grid, omega_hat, cfg.alpha, nu=cfg.nu)

    log = DiagnosticsLog()
    final = state
    final_step = 0
    last_diag = last_snap = -1
    for step, current in advance(state, cfg.t_final, cfg.stepper()):
        final, final_step = current, step
        if step % cfg.diag_every == 0:
            log.append(compute_diagnostics(current, cfg.dt))
            last_diag = step
        if step % cfg.save_every == 0:
            _save_snapshot(out_dir, step, current)
            last_snap = step
    if last_diag != final_step:
        log.append(compute_diagnostics(final, cfg.dt))
    if last_snap != final_step:
        _save_snapshot(out_dir, final_step, final)

    log.write(out_dir / "diagnostics.csv")
    entries = dict(config_entries(cfg))
    entries["code_version"] = __version__
    entries["wall_time_s"] = f"{time.perf_counter() - started:.3f}"
    write_manifest(out_dir / "manifest.txt", entries)
    return final


def _save_snapshot(out_dir: Path, step: int, state: SimState) -> None:
    omega = _ifft_real(omega_from_q(state.grid, state.q_hat, state.alpha))
    write_snapshot(
        out_dir / snapshot_name(step),
        state.grid.n, state.alpha, state.nu, state.t, omega,
    )


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepResult:
    """Distances to a reference run over a swept parameter, with a log-log fit."""

    parameter: str
    values: tuple
    distances_q: tuple   # L2 distance on q
    distances_u: tuple   # H^1_alpha-weighted distance on u
    slope: float         # least-squares slope of log d_q vs log value
    residual: float      # RMS residual of that fit (log units)


def _loglog_fit(values: Sequence[float], dists: Sequence[float]) -> tuple[float, float]:
    pairs = [(v, d) for v, d in zip(values, dists) if v > 0 and d > 0]
    if len(pairs) < 2:
        return float("nan"), float("nan")
    lv = np.log([p[0] for p in pairs])
    ld = np.log([p[1] for p in pairs])
    slope, intercept = np.polyfit(lv, ld, 1)
    resid = ld - (slope * lv + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def _terminal_q(args) -> np.ndarray:
    """Sweep member: integrate one configuration, return the terminal q_hat."""
    cfg, omega_bytes, n = args
    grid = TorusGrid(n)
    omega_hat = np.frombuffer(omega_bytes, dtype=np.complex128).reshape(n, n)
    q_hat = dealias(grid, (1.0 + cfg.alpha**2 * grid.K2) * omega_hat)
    q_hat[0, 0] = 0.0
    if cfg.out is not None:
        return run(cfg, omega_hat=omega_hat).q_hat
    state = SimState(grid=grid, q_hat=q_hat, alpha=cfg.alpha, nu=cfg.nu)
    final = state
    for _, current in advance(state, cfg.t_final, cfg.stepper()):
        final = current
    return final.q_hat


def _map_members(worker_args, labels, workers: int):
    """Run sweep members; a failing member aborts the sweep, labeled."""
    def _annotate(exc, label):
        exc.args = (f"sweep member {label} failed: {exc}",)
        return exc

    if workers <= 1:
        out = []
        for label, args in zip(labels, worker_args):
            try:
                out.append(_terminal_q(args))
            except (CflViolation, NumericsFailure) as exc:
                raise _annotate(exc, label)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_terminal_q, args) for args in worker_args]
        out = []
        for label, future in zip(labels, futures):
            try:
                out.append(future.result())
            except (CflViolation, NumericsFailure) as exc:
                raise _annotate(exc, label)
        return out


def _u_distance(grid: TorusGrid, qa, alpha_a, qb, alpha_b, weight_alpha) -> float:
    uxa, uya = velocity_hats_from_q(grid, qa, alpha_a)
    uxb, uyb = velocity_hats_from_q(grid, qb, alpha_b)
    w = 1.0 + weight_alpha**2 * grid.K2
    total = np.sum(w * (np.abs(uxa - uxb) ** 2 + np.abs(uya - uyb) ** 2))
    return float(np.sqrt(total * (2.0 * np.pi) ** 2)) / grid.n**2


def _member_out(cfg: RunConfig, label: str) -> Optional[str]:
    return None if cfg.out is None else str(Path(cfg.out) / label)


def sweep_nu(cfg: RunConfig, nu_list: Sequence[float], workers: int = 1) -> SweepResult:
    """
    Vanishing-viscosity sweep: distance of each viscous terminal state to
    the inviscid (nu = 0) reference from the identical initial condition.
    """
    cfg.validate()
    nu_list = tuple(float(v) for v in nu_list)
    if not nu_list or any(v <= 0 for v in nu_list):
        raise ConfigError("nu_list must be non-empty and positive")
    if any(b >= a for a, b in zip(nu_list, nu_list[1:])):
        raise ConfigError("nu_list must be strictly descending")
    grid = TorusGrid(cfg.n)
    omega_bytes = make_omega0(cfg, grid).tobytes()
    members = [cfg.replace(nu=v, out=_member_out(cfg, f"nu_{v:g}")) for v in nu_list]
    reference = cfg.replace(nu=0.0, out=_member_out(cfg, "nu_0"))
    args = [(m, omega_bytes, cfg.n) for m in (*members, reference)]
    labels = [f"nu={v:g}" for v in nu_list] + ["nu=0 (reference)"]
    *q_members, q_ref = _map_members(args, labels, workers)

    d_q = tuple(l2_norm(grid, qm - q_ref) for qm in q_members)
    d_u = tuple(
        _u_distance(grid, qm, cfg.alpha, q_ref, cfg.alpha, cfg.alpha) for qm in q_members
    )
    slope, residual = _loglog_fit(nu_list, d_q)
    result = SweepResult("nu", nu_list, d_q, d_u, slope, residual)
    _write_sweep_summary(cfg, result)
    return result


def sweep_alpha(cfg: RunConfig, alpha_list: Sequence[float], workers: int = 1) -> SweepResult:
    """
    alpha -> 0 sweep against the classical Euler reference (alpha = 0),
    inviscid, from the identical initial velocity field. Each member forms
    its own q0 = (1 - alpha^2 Lap) omega0 from the shared omega0.
    """
    cfg.validate()
    alpha_list = tuple(float(v) for v in alpha_list)
    if not alpha_list or any(v < 0 for v in alpha_list):
        raise ConfigError("alpha_list must be non-empty and >= 0")
    if any(b >= a for a, b in zip(alpha_list, alpha_list[1:])):
        raise ConfigError("alpha_list must be strictly descending")
    grid = TorusGrid(cfg.n)
    omega_bytes = make_omega0(cfg, grid).tobytes()
    members = [
        cfg.replace(alpha=v, nu=0.0, out=_member_out(cfg, f"alpha_{v:g}")) for v in alpha_list
    ]
    reference = cfg.replace(alpha=0.0, nu=0.0, out=_member_out(cfg, "alpha_0"))
    args = [(m, omega_bytes, cfg.n) for m in (*members, reference)]
    labels = [f"alpha={v:g}" for v in alpha_list] + ["alpha=0 (reference)"]
    *q_members, q_ref = _map_members(args, labels, workers)

    d_q = tuple(l2_norm(grid, qm - q_ref) for qm in q_members)
    d_u = tuple(
        _u_distance(grid, qm, a, q_ref, 0.0, cfg.alpha)
        for qm, a in zip(q_members, alpha_list)
    )
    slope, residual = _loglog_fit(alpha_list, d_q)
    result = SweepResult("alpha", alpha_list, d_q, d_u, slope, residual)
    _write_sweep_summary(cfg, result)
    return result


def splitting_order_study(
    cfg: RunConfig, dt_list: Sequence[float], workers: int = 1
) -> dict[str, SweepResult]:
    """
    Observed convergence orders of the product-formula steppers (and RK4
    self-convergence) against an RK4 reference at min(dt_list)/16.
    """
    cfg.validate()
    dt_list = tuple(float(v) for v in dt_list)
    if len(dt_list) < 3 or any(v <= 0 for v in dt_list):
        raise ConfigError("dt_list needs at least 3 positive entries")
    for a, b in zip(dt_list, dt_list[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError("dt_list must be dyadic descending (each entry half the last)")
    if cfg.nu <= 0:
        raise ConfigError("splitting order study requires nu > 0")
    grid = TorusGrid(cfg.n)
    omega_bytes = make_omega0(cfg, grid).tobytes()
    dt_ref = min(dt_list) / 16.0
    schemes = ("lie_trotter", "strang", "rk4")
    members = [
        cfg.replace(
            scheme=s, dt=dt, out=_member_out(cfg, f"split_{s}_dt_{dt:g}")
        )
        for s in schemes
        for dt in dt_list
    ]
    reference = cfg.replace(scheme="rk4", dt=dt_ref, out=_member_out(cfg, "split_reference"))
    args = [(m, omega_bytes, cfg.n) for m in (*members, reference)]
    labels = [f"{s} dt={dt:g}" for s in schemes for dt in dt_list] + ["reference"]
    *q_members, q_ref = _map_members(args, labels, workers)

    results: dict[str, SweepResult] = {}
    for i, s in enumerate(schemes):
        qs = q_members[i * len(dt_list): (i + 1) * len(dt_list)]
        d_q = tuple(l2_norm(grid, qm - q_ref) for qm in qs)
        d_u = tuple(
            _u_distance(grid, qm, cfg.alpha, q_ref, cfg.alpha, cfg.alpha) for qm in qs
        )
        slope, residual = _loglog_fit(dt_list, d_q)
        results[s] = SweepResult(f"dt[{s}]", dt_list, d_q, d_u, slope, residual)
    if cfg.out is not None:
        for s, res in results.items():
            _write_sweep_summary(cfg, res, filename=f"sweep_summary_{s}.csv")
    return results


def _write_sweep_summary(cfg: RunConfig, result: SweepResult, filename="sweep_summary.csv"):
    if cfg.out is None:
        return
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"# parameter = {result.parameter}"]
    lines.append(f"# slope = {result.slope!r}")
    lines.append(f"# residual = {result.residual!r}")
    lines.append("value,distance_q_l2,distance_u_h1alpha")
    for v, dq, du in zip(result.values, result.distances_q, result.distances_u):
        lines.append(f"{float(v)!r},{float(dq)!r},{float(du)!r}")
    (out_dir / filename).write_text("\n".join(lines) + "\n")
