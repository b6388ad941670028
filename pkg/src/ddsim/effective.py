"""Analytic two-level reduction of the Raman-driven system.

When every manifold level is far detuned, the manifold follows the
qubit quasistatically and can be eliminated.  What remains is a 2x2
Hamiltonian for (c_0, c_1) built from three detuning-weighted dipole
sums (ueV):

    Lambda_0 = sum_k |lambda_0k|^2 / delta_k      (light shift of |0>)
    Lambda_1 = sum_k |lambda_1k|^2 / delta_k      (light shift of |1>)
    Lambda_2 = e^{i(phi0-phi1)} sum_k lambda_0k lambda_1k^* / delta_k
                                                  (two-photon coupling)

with the envelopes riding on top: the instantaneous matrix is

    [[Lambda_0 f0^2,        Lambda_2 f0 f1],
     [Lambda_2^* f0 f1,     Lambda_1 f1^2 ]].

Diagonalizing at each instant gives dressed states split by 2*Omega,
mixed by the angle Theta with tan(Theta) = 2|Lambda_2(t)| /
(Lambda_0(t) - Lambda_1(t)).  If Theta varies slowly against the
dressed splitting, each dressed amplitude just accumulates phase, and
the qubit propagator has a closed form assembled from Theta at the two
endpoints, the integrated splitting, and the integrated mean shift.
`evolution_matrix` builds exactly that, including the free phases of
the lab frame and the beat factors at the qubit splitting, so the
result maps lab-frame qubit amplitudes at t0 to lab-frame amplitudes
at t.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .drive import CouplingSet
from .spectrum import SpectrumModel
from .units import HBAR

_QUAD_LIMIT = 400


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """The three detuning-weighted sums, at peak envelopes (ueV)."""

    Lambda0: float
    Lambda1: float
    Lambda2: complex

    @property
    def rabi(self) -> float:
        """Dressed half-splitting Omega at peak envelopes, ueV."""
        return math.sqrt(0.25 * (self.Lambda0 - self.Lambda1) ** 2 + abs(self.Lambda2) ** 2)

    @property
    def mixing_angle(self) -> float:
        """Constant-envelope mixing angle Theta_0 in [0, pi]."""
        return math.atan2(abs(self.Lambda2), 0.5 * (self.Lambda0 - self.Lambda1))

    def rescaled(self, ratio: float) -> "EffectiveHamiltonian":
        """Sums after scaling the second pulse amplitude by `ratio`.

        Lambda_1 goes with the square of the field, Lambda_2 linearly.
        """
        return EffectiveHamiltonian(self.Lambda0, ratio**2 * self.Lambda1, ratio * self.Lambda2)

    def scaled(self, s2: float) -> "EffectiveHamiltonian":
        """Sums after scaling both pulse amplitudes by sqrt(s2)."""
        return EffectiveHamiltonian(s2 * self.Lambda0, s2 * self.Lambda1, s2 * self.Lambda2)


def effective_hamiltonian(couplings: CouplingSet, phi0: float = 0.0, phi1: float = 0.0) -> EffectiveHamiltonian:
    """Build the detuning-weighted sums from a coupling set.

    Every manifold level must be off resonance (delta_k != 0); a
    resonant level has no quasistatic response and the reduction does
    not exist.
    """
    delta = couplings.delta
    if np.any(delta == 0.0):
        raise ValueError("effective model undefined: some delta_k is exactly zero")
    lam0 = couplings.lambda0
    lam1 = couplings.lambda1
    l0 = float(np.sum(np.abs(lam0) ** 2 / delta))
    l1 = float(np.sum(np.abs(lam1) ** 2 / delta))
    l2 = complex(cmath.exp(1j * (phi0 - phi1)) * np.sum(lam0 * np.conj(lam1) / delta))

    if np.all(delta > 0) or np.all(delta < 0):
        # single-sign detunings make the sums a Gram family: the cross
        # sum is Cauchy-Schwarz bounded by the diagonal ones
        bound = math.sqrt(max(l0 * l1, 0.0))
        if abs(l2) > bound * (1.0 + 1e-9) + 1e-300:
            raise RuntimeError(
                f"inconsistent sums: |Lambda2|={abs(l2)} exceeds sqrt(Lambda0*Lambda1)={bound}"
            )
    return EffectiveHamiltonian(l0, l1, l2)


class EffectiveEvolution:
    """Time-dependent dressed-frame quantities over a pulse window.

    Wraps an EffectiveHamiltonian and the two envelopes on [t0, t1].
    Scalar methods evaluate closed forms; the integrated splitting
    omega_integral and mean shift phi_lambda use adaptive quadrature
    and are cached per requested time.

    Where both envelopes vanish the mixing angle is defined by its
    limit along the window (evaluated just inside); across regions
    where the dressed splitting is exactly zero Theta is held at its
    last defined value and `has_omega_gap` is set.
    """

    def __init__(
        self,
        ham: EffectiveHamiltonian,
        f0: Callable,
        f1: Callable,
        t0: float,
        t1: float,
        grid_points: int = 2001,
    ):
        if t1 <= t0:
            raise ValueError("window must have t1 > t0")
        self.ham = ham
        self.f0 = f0
        self.f1 = f1
        self.t0 = float(t0)
        self.t1 = float(t1)
        self._span = self.t1 - self.t0
        self._omega_cache: dict[float, float] = {}
        self._phi_cache: dict[float, float] = {}
        self._check_cache = None

        self.grid = np.linspace(self.t0, self.t1, grid_points)
        g0 = np.asarray(f0(self.grid), dtype=float)
        g1 = np.asarray(f1(self.grid), dtype=float)
        self._grid_omega = self._omega_from(g0, g1)
        scale = float(np.max(self._grid_omega, initial=0.0))
        dead = self._grid_omega <= 1e-15 * max(scale, 1.0)
        # a gap is a run of dead points away from the edges
        interior = dead[1:-1]
        self.has_omega_gap = bool(np.any(interior[1:] & interior[:-1]))
        self._grid_theta = self._theta_grid(g0, g1)

    # -- pointwise closed forms ----------------------------------------

    def _lams(self, t):
        f0 = self.f0(t)
        f1 = self.f1(t)
        return (
            self.ham.Lambda0 * np.asarray(f0) ** 2,
            self.ham.Lambda1 * np.asarray(f1) ** 2,
            abs(self.ham.Lambda2) * np.asarray(f0) * np.asarray(f1),
        )

    def _omega_from(self, f0, f1):
        gap = self.ham.Lambda0 * f0**2 - self.ham.Lambda1 * f1**2
        return np.sqrt(0.25 * gap**2 + (abs(self.ham.Lambda2) * f0 * f1) ** 2)

    def omega(self, t):
        """Dressed half-splitting Omega(t), ueV."""
        l0, l1, l2m = self._lams(t)
        out = np.sqrt(0.25 * (l0 - l1) ** 2 + l2m**2)
        return float(out) if np.ndim(out) == 0 else out

    def E_plus(self, t):
        l0, l1, _ = self._lams(t)
        out = 0.5 * (l0 + l1) + self.omega(t)
        return float(out) if np.ndim(out) == 0 else out

    def E_minus(self, t):
        l0, l1, _ = self._lams(t)
        out = 0.5 * (l0 + l1) - self.omega(t)
        return float(out) if np.ndim(out) == 0 else out

    def _theta_point(self, t: float) -> float | None:
        l0, l1, l2m = self._lams(t)
        y = float(l2m)
        x = 0.5 * float(l0 - l1)
        if x == 0.0 and y == 0.0:
            return None
        return math.atan2(y, x)

    def theta(self, t: float) -> float:
        """Mixing angle Theta(t) in [0, pi], limit-valued at dead times."""
        val = self._theta_point(t)
        if val is not None:
            return val
        # nudge inward to pick up the limiting envelope ratio
        direction = 1.0 if t <= 0.5 * (self.t0 + self.t1) else -1.0
        for mag in (1e-12, 1e-9, 1e-6, 1e-3):
            val = self._theta_point(t + direction * mag * self._span)
            if val is not None:
                return val
        # fully dead neighborhood: hold the nearest defined grid value
        idx = int(np.argmin(np.abs(self.grid - t)))
        return float(self._grid_theta[idx])

    def _theta_grid(self, g0, g1) -> np.ndarray:
        y = abs(self.ham.Lambda2) * g0 * g1
        x = 0.5 * (self.ham.Lambda0 * g0**2 - self.ham.Lambda1 * g1**2)
        defined = ~((x == 0.0) & (y == 0.0))
        th = np.where(defined, np.arctan2(y, x), np.nan)
        if not np.any(defined):
            return np.zeros_like(th)
        # hold last defined value across gaps (and backfill the lead-in)
        filled = th.copy()
        last = np.nan
        for i in range(len(filled)):
            if math.isnan(filled[i]):
                filled[i] = last
            else:
                last = filled[i]
        first = filled[~np.isnan(filled)][0]
        filled[np.isnan(filled)] = first
        return filled

    def theta_dot(self, t):
        """Mixing-angle rate used for the adiabaticity diagnostic, rad/ns.

        Evaluates the ratio-of-derivatives expression
        |dGap * |L2| - d|L2| * Gap| / (Gap^2/4 + |L2|^2) with
        Gap = Lambda_0 f0^2 - Lambda_1 f1^2 and L2 = Lambda_2 f0 f1.
        This is intentionally the conservative (doubled) form; the
        adiabaticity threshold absorbs the factor.
        """
        t_arr = np.asarray(t, dtype=float)
        f0 = np.asarray(self.f0(t_arr))
        f1 = np.asarray(self.f1(t_arr))
        df0 = np.asarray(self._env_derivative(self.f0, t_arr))
        df1 = np.asarray(self._env_derivative(self.f1, t_arr))
        gap = self.ham.Lambda0 * f0**2 - self.ham.Lambda1 * f1**2
        dgap = 2.0 * (self.ham.Lambda0 * f0 * df0 - self.ham.Lambda1 * f1 * df1)
        l2m = abs(self.ham.Lambda2) * f0 * f1
        dl2m = abs(self.ham.Lambda2) * (df0 * f1 + f0 * df1)
        den = 0.25 * gap**2 + l2m**2
        num = np.abs(dgap * l2m - dl2m * gap)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den > 0.0, num / np.where(den > 0, den, 1.0), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    @staticmethod
    def _env_derivative(env, t):
        deriv = getattr(env, "derivative", None)
        if deriv is not None:
            return deriv(t)
        h = 1e-7
        return (np.asarray(env(np.asarray(t) + h)) - np.asarray(env(np.asarray(t) - h))) / (2 * h)

    # -- integrated quantities -----------------------------------------

    def omega_integral(self, t: float) -> float:
        """Accumulated dressed phase integral of Omega/hbar on [t0, t], rad."""
        key = float(t)
        if key not in self._omega_cache:
            val, _ = quad(
                lambda s: self.omega(s), self.t0, key, limit=_QUAD_LIMIT, epsabs=1e-13, epsrel=1e-12
            )
            self._omega_cache[key] = val / HBAR
        return self._omega_cache[key]

    def phi_lambda(self, t: float) -> float:
        """Accumulated mean light-shift phase on [t0, t], rad."""
        key = float(t)
        if key not in self._phi_cache:
            val, _ = quad(
                lambda s: 0.5 * (self._lams(s)[0] + self._lams(s)[1]),
                self.t0,
                key,
                limit=_QUAD_LIMIT,
                epsabs=1e-13,
                epsrel=1e-12,
            )
            self._phi_cache[key] = val / HBAR
        return self._phi_cache[key]

    def dressed_amplitudes(self, a_plus0: complex, a_minus0: complex, t: float) -> tuple[complex, complex]:
        """Phase-accumulated dressed amplitudes at time t.

        Valid in the diagonal regime (mixing angle effectively frozen):
        each dressed amplitude only picks up the integral of its own
        energy.
        """
        phi = self.phi_lambda(t)
        om = self.omega_integral(t)
        return (
            a_plus0 * cmath.exp(-1j * (phi + om)),
            a_minus0 * cmath.exp(-1j * (phi - om)),
        )


def mixing_angle_and_rabi(
    ham: EffectiveHamiltonian,
    f0: Callable,
    f1: Callable,
    duration: float,
    t0: float = 0.0,
    grid_points: int = 2001,
) -> EffectiveEvolution:
    """Wrap the sums and envelopes into an EffectiveEvolution window."""
    return EffectiveEvolution(ham, f0, f1, t0, t0 + duration, grid_points=grid_points)


@dataclass(frozen=True)
class AdiabaticityReport:
    """Peak of theta_dot * hbar / (2 Omega) over the window."""

    max_ratio: float
    time_of_max: float
    threshold: float = 0.1

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.threshold


def diagonal_evolution_check(evolution: EffectiveEvolution, threshold: float = 0.1) -> AdiabaticityReport:
    """Test whether the mixing angle moves slowly against the splitting."""
    om = evolution._grid_omega
    td = np.asarray(evolution.theta_dot(evolution.grid))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(om > 0, td * HBAR / (2.0 * np.where(om > 0, om, 1.0)), np.where(td > 0, np.inf, 0.0))
    i = int(np.argmax(ratio))
    return AdiabaticityReport(
        max_ratio=float(ratio[i]), time_of_max=float(evolution.grid[i]), threshold=threshold
    )


@dataclass(frozen=True)
class GateMatrix:
    """Closed-form qubit propagator between two times.

    The inner block (u00, u01, u10, u11) is the special-unitary part;
    `global_phase` carries the free evolution of |0> together with the
    mean light shift, and the full `matrix` additionally includes the
    beat factors at the qubit splitting that convert between the two
    interaction pictures at t0 and t.  `matrix` maps lab-frame qubit
    amplitudes at t0 to lab-frame amplitudes at t.
    """

    u00: complex
    u01: complex
    u10: complex
    u11: complex
    global_phase: complex
    delta_qubit: float
    t0: float
    t: float
    adiabatic: bool = True

    def __post_init__(self):
        norm = abs(self.u00) ** 2 + abs(self.u01) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"inner block not unitary: |u00|^2+|u01|^2 = {norm}")
        if abs(self.u11 - self.u00.conjugate()) > 1e-9 or abs(self.u10 + self.u01.conjugate()) > 1e-9:
            raise ValueError("inner block lacks the su(2) structure u11=u00*, u10=-u01*")

    @property
    def core(self) -> np.ndarray:
        """The su(2) block alone, no phases."""
        return np.array([[self.u00, self.u01], [self.u10, self.u11]], dtype=complex)

    @property
    def interaction_matrix(self) -> np.ndarray:
        """Propagator for the interaction-picture amplitudes (c_0, c_1)."""
        return self.global_phase * self.core

    @property
    def matrix(self) -> np.ndarray:
        """Full lab-frame propagator including the beat factors."""
        dp0 = cmath.exp(1j * self.delta_qubit * self.t0 / HBAR)
        dp1 = cmath.exp(-1j * self.delta_qubit * self.t / HBAR)
        m = np.array(
            [[self.u00, self.u01 * dp0], [self.u10 * dp1, self.u11 * dp1 * dp0]], dtype=complex
        )
        return self.global_phase * m


def evolution_matrix(
    evolution: EffectiveEvolution,
    spectrum: SpectrumModel | None = None,
    t0: float | None = None,
    t: float | None = None,
    *,
    epsilon0: float | None = None,
    delta_qubit: float | None = None,
) -> GateMatrix:
    """Assemble the closed-form propagator between t0 and t.

    The qubit energies enter only through the ground energy (a global
    phase) and the splitting (the beat factors); they are read from the
    spectrum when one is given, otherwise epsilon0 and delta_qubit must
    be supplied directly.  Runs the adiabaticity diagnostic first; a
    failing check produces a warning and is recorded on the result,
    since the closed form assumes frozen dressed states.
    """
    if spectrum is not None:
        epsilon0 = spectrum.epsilon0
        delta_qubit = spectrum.delta
    elif epsilon0 is None or delta_qubit is None:
        raise ValueError("without a spectrum both epsilon0 and delta_qubit are required")
    if t0 is None:
        t0 = evolution.t0
    if t is None:
        t = evolution.t1
    if not (evolution.t0 <= t0 <= t <= evolution.t1):
        raise ValueError("requested times fall outside the evolution window")

    report = _cached_check(evolution)
    if not report.passed:
        warnings.warn(
            f"mixing angle is not adiabatic (max ratio {report.max_ratio:.3g} at "
            f"t={report.time_of_max:.3g} ns); the closed-form propagator may be inaccurate",
            stacklevel=2,
        )

    th0 = evolution.theta(t0)
    th1 = evolution.theta(t)
    om = evolution.omega_integral(t) - evolution.omega_integral(t0)
    phi = evolution.phi_lambda(t) - evolution.phi_lambda(t0)
    arg2 = cmath.phase(evolution.ham.Lambda2) if evolution.ham.Lambda2 != 0 else 0.0

    c1, s1 = math.cos(0.5 * th1), math.sin(0.5 * th1)
    c0, s0 = math.cos(0.5 * th0), math.sin(0.5 * th0)
    em, ep = cmath.exp(-1j * om), cmath.exp(1j * om)
    u00 = em * c1 * c0 + ep * s1 * s0
    u01 = cmath.exp(1j * arg2) * (em * c1 * s0 - ep * s1 * c0)
    u10 = -u01.conjugate()
    u11 = u00.conjugate()
    phase = cmath.exp(-1j * (epsilon0 * (t - t0) / HBAR + phi))

    return GateMatrix(
        u00=u00,
        u01=u01,
        u10=u10,
        u11=u11,
        global_phase=phase,
        delta_qubit=delta_qubit,
        t0=t0,
        t=t,
        adiabatic=report.passed,
    )


def _cached_check(evolution: EffectiveEvolution) -> AdiabaticityReport:
    if evolution._check_cache is None:
        evolution._check_cache = diagonal_evolution_check(evolution)
    return evolution._check_cache


def apply(gate: GateMatrix, state) -> np.ndarray:
    """Apply the full propagator to normalized qubit amplitudes."""
    vec = np.asarray(state, dtype=complex)
    if vec.shape != (2,):
        raise ValueError("state must be a 2-vector of qubit amplitudes")
    norm = float(np.sum(np.abs(vec) ** 2))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"input state not normalized: sum |c|^2 = {norm}")
    return gate.matrix @ vec
