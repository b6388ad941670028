"""Time propagation of the driven qubit-plus-manifold system.

Three tiers of the same physical problem, all expressed in the
interaction picture of the static spectrum (amplitudes c_n with the
free phases e^{-i eps_n t / hbar} factored out):

propagate_bare
    Keeps the full optical carriers, cos(omega t + phi), including
    counter-rotating terms.  Exact but expensive: the integrator has to
    resolve the optical period, so runtime grows like omega0 * T.

propagate_rwa
    Drops the counter-rotating terms only.  Each manifold level k is
    coupled to |0> and |1> through its detuning phase e^{i delta_k t},
    and the crossed couplings (pulse 0 on the 1<->k transition and
    pulse 1 on 0<->k) ride on an extra beat factor e^{+-i Delta t} at
    the qubit splitting.  This is the workhorse "exact" tier.

propagate_averaged
    Additionally drops the crossed couplings, which average out when
    the envelopes change slowly compared to the beat period
    2 pi hbar / Delta.  Uses the shifted manifold variables
    b_k = c_k e^{i delta_k t}, which makes the system autonomous up to
    the envelopes; fast and the direct counterpart of the analytic
    effective model.

Norms are monitored, never renormalized: drift beyond the configured
bound raises PropagationError instead of silently hiding an integrator
problem.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .drive import CouplingSet, PulsePair
from .spectrum import SpectrumModel
from .units import DIPOLE_FIELD_TO_UEV, HBAR

logger = logging.getLogger(__name__)

FRAMES = ("bare", "rwa", "averaged")

# steps per fastest oscillation period, for fixed-step integration and
# for the carrier-resolution clamp of the bare tier
_STEPS_PER_PERIOD = 50.0


class PropagationError(RuntimeError):
    """Integration failed or produced an untrustworthy result."""


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes (c_0, c_1, c_k...) in a named frame."""

    amplitudes: np.ndarray
    frame: str = "rwa"

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1 or len(amps) < 2:
            raise ValueError("state needs at least the two qubit amplitudes")
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm}")

    @classmethod
    def qubit(cls, alpha: complex, beta: complex, n_excited: int, frame: str = "rwa") -> "StateVector":
        """State with qubit amplitudes (alpha, beta) and empty manifold."""
        amps = np.zeros(2 + n_excited, dtype=complex)
        amps[0] = alpha
        amps[1] = beta
        return cls(amps, frame)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class IntegratorSettings:
    """Numerical controls for the propagators.

    method "adaptive" uses an 8th-order adaptive Runge-Kutta scheme;
    "rk4" is a fixed-step classic RK4 fallback whose step defaults to
    resolving the fastest phase in the problem with 50 points per
    period.  max_step is in ns and bounds either method.
    """

    method: str = "adaptive"
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: Optional[float] = None
    save_points: int = 201
    norm_tol: float = 1e-6

    def __post_init__(self):
        if self.method not in ("adaptive", "rk4"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be > 0")
        if self.save_points < 2:
            raise ValueError("save_points must be >= 2")
        if self.norm_tol <= 0:
            raise ValueError("norm_tol must be > 0")


@dataclass
class Trajectory:
    """Saved time grid and amplitudes from one propagation run."""

    times: np.ndarray
    amplitudes: np.ndarray  # shape (n_times, dim), complex
    frame: str
    couplings: Optional[CouplingSet] = None
    pulses: Optional[PulsePair] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if self.amplitudes.shape[0] != len(self.times):
            raise ValueError("amplitude rows must match the time grid")

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.sum(self.populations, axis=1)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))

    @property
    def manifold_population(self) -> np.ndarray:
        """Total population outside the qubit subspace, per saved time."""
        return np.sum(self.populations[:, 2:], axis=1)

    @property
    def final_state(self) -> StateVector:
        amps = self.amplitudes[-1]
        norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
        return StateVector(amps / norm, self.frame)

    @property
    def final_amplitudes(self) -> np.ndarray:
        return self.amplitudes[-1]

    def csv_text(self, stride: int = 1) -> str:
        """Render t, Re/Im of each amplitude, and populations as CSV.

        Comma-separated, '.' decimal, LF line endings, one header row.
        With stride > 1 every stride-th sample is kept; the final row
        is always included.
        """
        if stride < 1:
            raise ValueError("stride must be >= 1")
        idx = list(range(0, len(self.times), stride))
        if idx[-1] != len(self.times) - 1:
            idx.append(len(self.times) - 1)
        dim = self.amplitudes.shape[1]
        header = ["t"]
        for i in range(dim):
            header += [f"a{i}_re", f"a{i}_im"]
        header += [f"p{i}" for i in range(dim)]
        pops = self.populations
        lines = [",".join(header)]
        for j in idx:
            row = [f"{self.times[j]:.17g}"]
            for i in range(dim):
                row += [f"{self.amplitudes[j, i].real:.17g}", f"{self.amplitudes[j, i].imag:.17g}"]
            row += [f"{pops[j, i]:.17g}" for i in range(dim)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_csv(self, path, stride: int = 1) -> None:
        """Write csv_text to a file."""
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text(stride))


# ---------------------------------------------------------------------
# integration backends
# ---------------------------------------------------------------------


def _run_adaptive(rhs, y0, grid, settings, max_step):
    sol = solve_ivp(
        rhs,
        (grid[0], grid[-1]),
        y0,
        method="DOP853",
        t_eval=grid,
        rtol=settings.rtol,
        atol=settings.atol,
        max_step=max_step if max_step is not None else np.inf,
    )
    if not sol.success:
        raise PropagationError(f"adaptive integrator failed: {sol.message}")
    return sol.y.T.copy()


def _run_rk4(rhs, y0, grid, step):
    out = np.empty((len(grid), len(y0)), dtype=complex)
    y = np.array(y0, dtype=complex)
    out[0] = y
    for j in range(len(grid) - 1):
        t0, t1 = grid[j], grid[j + 1]
        n = max(1, int(math.ceil((t1 - t0) / step)))
        h = (t1 - t0) / n
        if h <= 0 or t0 + h == t0:
            raise PropagationError(f"step size underflow near t={t0}")
        t = t0
        for _ in range(n):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[j + 1] = y
    return out


def _check_norm(traj: Trajectory, settings: IntegratorSettings, tier: str) -> None:
    drift = traj.norm_drift
    if drift > settings.norm_tol:
        raise PropagationError(
            f"{tier} propagation lost norm: max |sum|c|^2 - 1| = {drift:.3e} "
            f"exceeds {settings.norm_tol:.1e}; tighten tolerances or reduce the step"
        )


def _default_step(scale_uev: float, duration: float) -> float:
    """Fixed step resolving the fastest phase at _STEPS_PER_PERIOD points."""
    if scale_uev <= 0:
        return duration / 100.0
    return 2.0 * math.pi * HBAR / (_STEPS_PER_PERIOD * scale_uev)


def _require_frame(psi0: StateVector, frame: str) -> None:
    if psi0.frame != frame:
        raise ValueError(f"initial state is in frame {psi0.frame!r}, expected {frame!r}")


def _require_dim(psi0: StateVector, n_excited: int) -> None:
    if len(psi0.amplitudes) != 2 + n_excited:
        raise ValueError(
            f"state has {len(psi0.amplitudes)} amplitudes, structure needs {2 + n_excited}"
        )


# ---------------------------------------------------------------------
# propagators
# ---------------------------------------------------------------------


def propagate_rwa(
    couplings: CouplingSet,
    pulses: PulsePair,
    psi0: StateVector,
    settings: IntegratorSettings | None = None,
) -> Trajectory:
    """Integrate the rotating-wave equations over [0, duration].

    The couplings must have been derived from the same pulse pair (the
    detuning list and the crossed couplings are trusted as given).
    """
    settings = settings or IntegratorSettings()
    _require_frame(psi0, "rwa")
    _require_dim(psi0, couplings.n_levels)

    wd = couplings.delta / HBAR           # detuning phases, rad/ns
    wq = couplings.delta_qubit / HBAR     # beat phase, rad/ns
    lam0 = couplings.lambda0 * np.exp(1j * pulses.phi0) / HBAR
    lam1 = couplings.lambda1 * np.exp(1j * pulses.phi1) / HBAR
    mu0 = couplings.mu0 * np.exp(1j * pulses.phi0) / HBAR
    mu1 = couplings.mu1 * np.exp(1j * pulses.phi1) / HBAR
    env0, env1 = pulses.envelope0, pulses.envelope1

    def rhs(t, y):
        f0 = env0(t)
        f1 = env1(t)
        phase_k = np.exp(1j * wd * t)
        beat = np.exp(1j * wq * t)
        g0 = (lam0 * f0 + mu1 * f1 / beat) * phase_k
        g1 = (mu0 * f0 * beat + lam1 * f1) * phase_k
        ck = y[2:]
        dy = np.empty_like(y)
        dy[0] = -1j * np.dot(g0, ck)
        dy[1] = -1j * np.dot(g1, ck)
        dy[2:] = -1j * (np.conj(g0) * y[0] + np.conj(g1) * y[1])
        return dy

    grid = np.linspace(0.0, pulses.duration, settings.save_points)
    if settings.method == "adaptive":
        ys = _run_adaptive(rhs, psi0.amplitudes, grid, settings, settings.max_step)
    else:
        scale = max(
            float(np.max(np.abs(couplings.delta), initial=0.0)),
            abs(couplings.delta_qubit),
            float(np.max(couplings.lambda_scale, initial=0.0)),
        )
        step = settings.max_step or _default_step(scale, pulses.duration)
        ys = _run_rk4(rhs, psi0.amplitudes, grid, step)

    traj = Trajectory(grid, ys, "rwa", couplings=couplings, pulses=pulses)
    _check_norm(traj, settings, "rwa")
    return traj


def propagate_averaged(
    couplings: CouplingSet,
    pulses: PulsePair,
    psi0: StateVector,
    settings: IntegratorSettings | None = None,
) -> Trajectory:
    """Integrate the beat-averaged equations in the b_k variables.

    Valid when the envelopes switch slowly compared to the beat period
    2 pi hbar / Delta; a violation is reported as a warning, not an
    error, since the comparison against the rwa tier is itself a useful
    diagnostic.
    """
    from .drive import slow_switching_ok  # local import to keep module load light

    settings = settings or IntegratorSettings()
    _require_frame(psi0, "averaged")
    _require_dim(psi0, couplings.n_levels)
    if not slow_switching_ok(pulses, couplings.delta_qubit):
        warnings.warn(
            "envelope switching time is short against the beat period; "
            "the averaged tier may deviate from the rwa tier",
            stacklevel=2,
        )

    wd = couplings.delta / HBAR
    lam0 = couplings.lambda0 * np.exp(1j * pulses.phi0) / HBAR
    lam1 = couplings.lambda1 * np.exp(1j * pulses.phi1) / HBAR
    env0, env1 = pulses.envelope0, pulses.envelope1

    def rhs(t, y):
        f0 = env0(t)
        f1 = env1(t)
        g0 = lam0 * f0
        g1 = lam1 * f1
        bk = y[2:]
        dy = np.empty_like(y)
        dy[0] = -1j * np.dot(g0, bk)
        dy[1] = -1j * np.dot(g1, bk)
        dy[2:] = -1j * (-wd * bk + np.conj(g0) * y[0] + np.conj(g1) * y[1])
        return dy

    grid = np.linspace(0.0, pulses.duration, settings.save_points)
    if settings.method == "adaptive":
        ys = _run_adaptive(rhs, psi0.amplitudes, grid, settings, settings.max_step)
    else:
        scale = max(
            float(np.max(np.abs(couplings.delta), initial=0.0)),
            float(np.max(couplings.lambda_scale, initial=0.0)),
        )
        step = settings.max_step or _default_step(scale, pulses.duration)
        ys = _run_rk4(rhs, psi0.amplitudes, grid, step)

    traj = Trajectory(grid, ys, "averaged", couplings=couplings, pulses=pulses)
    _check_norm(traj, settings, "averaged")
    return traj


def propagate_bare(
    spectrum: SpectrumModel,
    pulses: PulsePair,
    psi0: StateVector,
    settings: IntegratorSettings | None = None,
) -> Trajectory:
    """Integrate with the full carriers, no rotating-wave approximation.

    The step is clamped to resolve the fastest carrier with 50 points
    per period, whatever the caller asked for, so runtime is
    proportional to omega0 * duration.
    """
    settings = settings or IntegratorSettings()
    _require_frame(psi0, "bare")
    _require_dim(psi0, spectrum.n_excited)

    w0 = pulses.omega0 / HBAR
    w1 = pulses.omega1 / HBAR
    w0k = (spectrum.manifold_energies - spectrum.epsilon0) / HBAR
    w1k = (spectrum.manifold_energies - spectrum.epsilon1) / HBAR
    d0 = spectrum.dipoles_to_0 * DIPOLE_FIELD_TO_UEV / HBAR
    d1 = spectrum.dipoles_to_1 * DIPOLE_FIELD_TO_UEV / HBAR
    amp0, amp1 = pulses.amp0, pulses.amp1
    phi0, phi1 = pulses.phi0, pulses.phi1
    env0, env1 = pulses.envelope0, pulses.envelope1

    carrier_step = 2.0 * math.pi / (_STEPS_PER_PERIOD * max(w0, w1))
    max_step = carrier_step if settings.max_step is None else min(settings.max_step, carrier_step)
    n_steps_est = pulses.duration / max_step
    logger.info("bare propagation: ~%.0f carrier-resolving steps", n_steps_est)
    if n_steps_est > 5e5:
        warnings.warn(
            f"bare propagation needs about {n_steps_est:.1e} steps "
            "(runtime grows with omega0 * duration); consider the rwa tier",
            stacklevel=2,
        )

    def rhs(t, y):
        e_field = amp0 * env0(t) * math.cos(w0 * t + phi0) + amp1 * env1(t) * math.cos(w1 * t + phi1)
        ph0 = np.exp(-1j * w0k * t)
        ph1 = np.exp(-1j * w1k * t)
        ck = y[2:]
        dy = np.empty_like(y)
        dy[0] = -1j * e_field * np.dot(d0 * ph0, ck)
        dy[1] = -1j * e_field * np.dot(d1 * ph1, ck)
        dy[2:] = -1j * e_field * (np.conj(d0 * ph0) * y[0] + np.conj(d1 * ph1) * y[1])
        return dy

    grid = np.linspace(0.0, pulses.duration, settings.save_points)
    if settings.method == "adaptive":
        ys = _run_adaptive(rhs, psi0.amplitudes, grid, settings, max_step)
    else:
        ys = _run_rk4(rhs, psi0.amplitudes, grid, max_step)

    traj = Trajectory(grid, ys, "bare", couplings=None, pulses=pulses)
    _check_norm(traj, settings, "bare")
    return traj


# ---------------------------------------------------------------------
# adiabatic elimination diagnostic
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class EliminationReport:
    """How well the manifold amplitudes track their quasistatic value.

    residual[j] is max_k |b_k(t_j) - b_k^qs(t_j)| where b_k^qs is the
    instantaneous quasistatic solution (couplings * qubit amplitudes /
    detuning).  The elimination is declared invalid when the peak
    residual exceeds the threshold.
    """

    times: np.ndarray
    residual: np.ndarray
    peak_residual: float
    peak_manifold_population: float
    threshold: float = 0.1

    @property
    def valid(self) -> bool:
        return self.peak_residual <= self.threshold


def check_adiabatic_elimination(
    trajectory: Trajectory,
    couplings: CouplingSet | None = None,
    threshold: float = 0.1,
) -> EliminationReport:
    """Compare manifold amplitudes against their quasistatic estimate."""
    couplings = couplings or trajectory.couplings
    if couplings is None:
        raise ValueError("no coupling set attached to the trajectory or passed in")
    if trajectory.pulses is None:
        raise ValueError("trajectory carries no pulse metadata (envelopes needed)")
    if trajectory.frame not in ("rwa", "averaged"):
        raise ValueError("elimination check needs an rwa or averaged trajectory")
    if np.any(couplings.delta == 0.0):
        raise ValueError("quasistatic estimate undefined: some delta_k is zero")

    pulses = trajectory.pulses
    t = trajectory.times
    c0 = trajectory.amplitudes[:, 0]
    c1 = trajectory.amplitudes[:, 1]
    ck = trajectory.amplitudes[:, 2:]

    if trajectory.frame == "rwa":
        bk = ck * np.exp(1j * np.outer(t, couplings.delta / HBAR))
    else:
        bk = ck

    f0 = np.asarray(pulses.envelope0(t))[:, None]
    f1 = np.asarray(pulses.envelope1(t))[:, None]
    lam0c = np.conj(couplings.lambda0 * np.exp(1j * pulses.phi0))[None, :]
    lam1c = np.conj(couplings.lambda1 * np.exp(1j * pulses.phi1))[None, :]
    bqs = (lam0c * f0 * c0[:, None] + lam1c * f1 * c1[:, None]) / couplings.delta[None, :]

    residual = np.max(np.abs(bk - bqs), axis=1)
    return EliminationReport(
        times=t,
        residual=residual,
        peak_residual=float(np.max(residual)),
        peak_manifold_population=float(np.max(np.sum(np.abs(ck) ** 2, axis=1))),
        threshold=threshold,
    )
