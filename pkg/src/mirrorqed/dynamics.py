"""Open-system dynamics: two-channel atom-cavity model vs single-rate decay.

Implements the resonant atom-cavity master equation (coherent exchange g,
cavity loss kappa, atomic loss gamma), the two-level single-rate master
equation it reduces to when the cavity follows adiabatically, and a
quantum-jump unraveling of the latter. The two models disagree outside
the small-cooperativity regime; model_discrepancy measures by how much.

Basis and conventions: product basis |atom> (x) |n photons>, flat index
a * (n_fock + 1) + n with a = 0 ground, a = 1 excited. Dissipators use
the decaying (trace-preserving) Lindblad convention throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, StepTooLarge, TruncationLeak

__all__ = [
    "ModelParams",
    "AtomCavityState",
    "JCTrajectory",
    "AtomTrajectory",
    "TrajectoryEnsemble",
    "DiscrepancyResult",
    "evolve_jc",
    "evolve_single_rate",
    "unravel_jumps",
    "cooperativity",
    "coupling_regime",
    "effective_decay_rate",
    "model_discrepancy",
    "fit_decay_rate",
]

_HERM_TOL = 1e-10
_TRACE_TOL = 1e-9
_DIAG_TOL = 1e-10
_LEAK_TOL = 1e-8
_STABILITY_CAP = 0.1


@dataclass(frozen=True)
class ModelParams:
    """Rates of the resonant atom-cavity model.

    g is the coherent atom-cavity coupling, kappa the cavity field decay
    rate, gamma the free atomic decay rate; all in the same inverse-time
    unit, which fixes the time unit of every trajectory.
    """

    g: float
    kappa: float
    gamma: float

    def __post_init__(self):
        for name in ("g", "kappa", "gamma"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParams(f"{name} must be a finite real, got {v!r}")
        if self.kappa < 0.0 or self.gamma < 0.0:
            raise InvalidParams("kappa and gamma must be >= 0")

    @property
    def max_rate(self) -> float:
        return max(abs(self.g), self.kappa, self.gamma)


def _atom_cavity_ops(n_fock: int):
    """Lowering operators (atomic sigma-, photon a) on the product basis."""
    dim_ph = n_fock + 1
    a_ph = np.diag(np.sqrt(np.arange(1.0, dim_ph)), 1).astype(complex)
    sm_at = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    sm = np.kron(sm_at, np.eye(dim_ph, dtype=complex))
    a = np.kron(np.eye(2, dtype=complex), a_ph)
    return sm, a


@dataclass(frozen=True, eq=False)
class AtomCavityState:
    """Density matrix of the atom-cavity system at a Fock truncation.

    Validates hermiticity (1e-10), unit trace (1e-9) and nonnegative
    diagonal (within 1e-10) on construction, so states that circulate in
    the library are always physical.
    """

    rho: np.ndarray
    n_fock: int = 5

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        dim = 2 * (self.n_fock + 1)
        if self.n_fock < 1:
            raise InvalidParams(f"n_fock must be >= 1, got {self.n_fock!r}")
        if rho.shape != (dim, dim):
            raise InvalidParams(
                f"rho must be {dim}x{dim} for n_fock={self.n_fock}, "
                f"got shape {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > _HERM_TOL:
            raise InvalidParams(f"rho not Hermitian (deviation {herm:.3g})")
        tr = rho.trace()
        if abs(tr - 1.0) > _TRACE_TOL:
            raise InvalidParams(f"rho trace {tr!r} differs from 1")
        dmin = float(np.min(rho.diagonal().real))
        if dmin < -_DIAG_TOL:
            raise InvalidParams(f"negative population {dmin:.3g} on diagonal")

    @property
    def dim(self) -> int:
        return 2 * (self.n_fock + 1)

    @classmethod
    def from_atom(cls, rho_atom, n_fock: int = 5) -> "AtomCavityState":
        """Atom state (basis ground, excited) tensored with the vacuum."""
        rho_atom = np.asarray(rho_atom, dtype=complex)
        if rho_atom.shape != (2, 2):
            raise InvalidParams(f"rho_atom must be 2x2, got {rho_atom.shape}")
        vac = np.zeros((n_fock + 1, n_fock + 1), dtype=complex)
        vac[0, 0] = 1.0
        return cls(rho=np.kron(rho_atom, vac), n_fock=n_fock)

    @classmethod
    def excited_vacuum(cls, n_fock: int = 5) -> "AtomCavityState":
        """Excited atom, empty cavity: the canonical initial condition."""
        return cls.from_atom(np.diag([0.0, 1.0]), n_fock=n_fock)

    @property
    def excited_population(self) -> float:
        n1 = self.n_fock + 1
        return float(self.rho.diagonal().real[n1:].sum())

    @property
    def photon_number(self) -> float:
        n1 = self.n_fock + 1
        weights = np.tile(np.arange(n1, dtype=float), 2)
        return float(np.dot(weights, self.rho.diagonal().real))


def _liouvillian(params: ModelParams, n_fock: int) -> np.ndarray:
    """Matrix of the master-equation generator on row-major vec(rho)."""
    sm, a = _atom_cavity_ops(n_fock)
    h = params.g * (sm @ a.conj().T + sm.conj().T @ a)
    dim = 2 * (n_fock + 1)
    eye = np.eye(dim, dtype=complex)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, op in ((params.kappa, a), (params.gamma, sm)):
        if rate == 0.0:
            continue
        opd_op = op.conj().T @ op
        lv += rate * (np.kron(op, op.conj())
                      - 0.5 * np.kron(opd_op, eye)
                      - 0.5 * np.kron(eye, opd_op.T))
    return lv


def _rk4_propagate(lv: np.ndarray, y: np.ndarray, h: float,
                   n_steps: int, out: np.ndarray | None = None) -> np.ndarray:
    """Fixed-step RK4 on vec(rho); records every step when out is given."""
    for k in range(n_steps):
        k1 = lv @ y
        k2 = lv @ (y + (0.5 * h) * k1)
        k3 = lv @ (y + (0.5 * h) * k2)
        k4 = lv @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if out is not None:
            out[k] = y
    return y


@dataclass(frozen=True, eq=False)
class JCTrajectory:
    """Recorded atom-cavity evolution: rho at every integrator step."""

    times: np.ndarray
    rhos: np.ndarray
    n_fock: int

    @property
    def excited_population(self) -> np.ndarray:
        n1 = self.n_fock + 1
        diag = np.einsum("tii->ti", self.rhos).real
        return diag[:, n1:].sum(axis=1)

    @property
    def photon_number(self) -> np.ndarray:
        n1 = self.n_fock + 1
        diag = np.einsum("tii->ti", self.rhos).real
        weights = np.tile(np.arange(n1, dtype=float), 2)
        return diag @ weights

    @property
    def excitation_number(self) -> np.ndarray:
        return self.excited_population + self.photon_number

    @property
    def trace_error(self) -> float:
        traces = np.einsum("tii->t", self.rhos).real
        return float(np.max(np.abs(traces - 1.0)))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rhos
                                   - self.rhos.conj().transpose(0, 2, 1))))

    @property
    def top_fock_max(self) -> float:
        """Largest population ever seen in the highest Fock level."""
        n1 = self.n_fock + 1
        diag = np.einsum("tii->ti", self.rhos).real
        return float(np.max(diag[:, n1 - 1] + diag[:, 2 * n1 - 1]))

    @property
    def final_state(self) -> AtomCavityState:
        return AtomCavityState(rho=self.rhos[-1], n_fock=self.n_fock)


def evolve_jc(params: ModelParams, rho0: AtomCavityState, t_final: float,
              dt: float) -> JCTrajectory:
    """Integrate the two-channel master equation with fixed-step RK4.

    The step must satisfy dt * max(g, kappa, gamma) < 0.1 (StepTooLarge
    otherwise); the actual step is t_final / ceil(t_final / dt), so the
    grid lands on t_final exactly. Every step is recorded. Population of
    the top Fock level is monitored and TruncationLeak raised if it ever
    exceeds 1e-8, since then the truncation basis is too small for the
    requested dynamics.
    """
    if not t_final >= 0.0:
        raise InvalidParams(f"t_final must be >= 0, got {t_final!r}")
    if not dt > 0.0:
        raise InvalidParams(f"dt must be positive, got {dt!r}")
    if dt * params.max_rate >= _STABILITY_CAP:
        raise StepTooLarge(
            f"dt*max_rate = {dt * params.max_rate:.3g} >= {_STABILITY_CAP}; "
            "reduce dt for a stable fourth-order step")
    n_steps = max(1, math.ceil(t_final / dt - 1e-12)) if t_final > 0 else 0
    h = t_final / n_steps if n_steps else 0.0

    lv = _liouvillian(params, rho0.n_fock)
    dim = rho0.dim
    out = np.empty((n_steps + 1, dim * dim), dtype=complex)
    out[0] = rho0.rho.ravel()
    if n_steps:
        _rk4_propagate(lv, out[0], h, n_steps, out=out[1:])
    times = h * np.arange(n_steps + 1)
    rhos = out.reshape(n_steps + 1, dim, dim)

    n1 = rho0.n_fock + 1
    diag = np.einsum("tii->ti", rhos).real
    leak = float(np.max(diag[:, n1 - 1] + diag[:, 2 * n1 - 1]))
    if leak > _LEAK_TOL:
        raise TruncationLeak(
            f"top Fock level reached population {leak:.3g} > {_LEAK_TOL:g}; "
            f"raise n_fock above {rho0.n_fock}")
    return JCTrajectory(times=times, rhos=rhos, n_fock=rho0.n_fock)


@dataclass(frozen=True, eq=False)
class AtomTrajectory:
    """Closed-form single-rate evolution of the bare two-level atom."""

    times: np.ndarray
    rhos: np.ndarray

    @property
    def excited_population(self) -> np.ndarray:
        return self.rhos[:, 1, 1].real

    @property
    def coherence(self) -> np.ndarray:
        """Off-diagonal element <g|rho|e> per time."""
        return self.rhos[:, 0, 1]


def _check_atom_rho(rho_atom) -> np.ndarray:
    rho = np.asarray(rho_atom, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidParams(f"rho_atom must be 2x2, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > _HERM_TOL:
        raise InvalidParams("rho_atom not Hermitian")
    if abs(rho.trace() - 1.0) > _TRACE_TOL:
        raise InvalidParams(f"rho_atom trace {rho.trace()!r} differs from 1")
    if min(rho[0, 0].real, rho[1, 1].real) < -_DIAG_TOL:
        raise InvalidParams("rho_atom has a negative population")
    return rho


def evolve_single_rate(gamma_cav: float, rho_atom0,
                       t_final) -> AtomTrajectory:
    """Closed-form two-level decay at the single effective rate.

    Excited population decays as exp(-gamma_cav t), coherences as
    exp(-gamma_cav t / 2), ground population takes up the rest. t_final
    may be a scalar (sampled on 101 equally spaced points from 0) or an
    explicit array of sample times.
    """
    if not gamma_cav >= 0.0:
        raise InvalidParams(f"gamma_cav must be >= 0, got {gamma_cav!r}")
    rho0 = _check_atom_rho(rho_atom0)
    if np.ndim(t_final) == 0:
        if not float(t_final) >= 0.0:
            raise InvalidParams(f"t_final must be >= 0, got {t_final!r}")
        times = np.linspace(0.0, float(t_final), 101)
    else:
        times = np.asarray(t_final, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(times < 0.0):
            raise InvalidParams("time grid must be 1-D, nonempty, >= 0")
    decay = np.exp(-gamma_cav * times)
    half = np.exp(-0.5 * gamma_cav * times)
    rhos = np.empty((times.size, 2, 2), dtype=complex)
    rhos[:, 1, 1] = rho0[1, 1].real * decay
    rhos[:, 0, 0] = 1.0 - rhos[:, 1, 1]
    rhos[:, 0, 1] = rho0[0, 1] * half
    rhos[:, 1, 0] = rho0[1, 0] * half
    return AtomTrajectory(times=times, rhos=rhos)


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Quantum-jump ensemble statistics on a fixed time grid.

    excited_population is the trajectory mean; stderr the standard error
    from the per-trajectory sample variance (ddof=1). jump_times holds
    one entry per trajectory, +inf when that trajectory never jumped.
    """

    n_traj: int
    seed: int
    times: np.ndarray
    excited_population: np.ndarray
    stderr: np.ndarray
    jump_times: np.ndarray

    def __post_init__(self):
        if not (self.times.shape == self.excited_population.shape
                == self.stderr.shape):
            raise InvalidParams("ensemble arrays must share one shape")
        if self.jump_times.shape != (self.n_traj,):
            raise InvalidParams("jump_times must have one entry per trajectory")


def unravel_jumps(gamma_cav: float, rho_atom0, n_traj: int, seed: int,
                  t_grid) -> TrajectoryEnsemble:
    """Monte Carlo wave-function unraveling of single-rate atomic decay.

    Each trajectory evolves under the non-Hermitian no-jump generator
    (norm of the conditional state decays as pg0 + pe0 exp(-gamma t))
    and collapses to the ground state at a jump time drawn exactly by
    inverting that norm decay; no time-step discretization enters.

    Trajectory i uses its own generator seeded with (seed, i) and draws
    exactly two uniforms (initial-state selection, jump clock), so the
    ensemble is bit-reproducible for any execution order or parallelism.
    """
    if not gamma_cav >= 0.0:
        raise InvalidParams(f"gamma_cav must be >= 0, got {gamma_cav!r}")
    if n_traj < 1:
        raise InvalidParams(f"n_traj must be >= 1, got {n_traj!r}")
    rho0 = _check_atom_rho(rho_atom0)
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times < 0.0):
        raise InvalidParams("t_grid must be 1-D, nonempty, >= 0")

    # mixed initial state: decompose into pure states, then select per draw
    evals, evecs = np.linalg.eigh(rho0)
    probs = np.clip(evals.real, 0.0, None)
    probs = probs / probs.sum()
    pe_pure = np.abs(evecs[1, :]) ** 2

    draws = np.empty((n_traj, 2))
    for i in range(n_traj):
        rng = np.random.default_rng([seed, i])
        draws[i] = rng.random(2)

    which = np.searchsorted(np.cumsum(probs), draws[:, 0], side="right")
    which = np.minimum(which, probs.size - 1)
    pe0 = pe_pure[which]
    pg0 = 1.0 - pe0

    u = draws[:, 1]
    jump_times = np.full(n_traj, np.inf)
    if gamma_cav > 0.0:
        jumps = u > pg0
        jump_times[jumps] = (-np.log((u[jumps] - pg0[jumps]) / pe0[jumps])
                             / gamma_cav)

    surv = np.exp(-gamma_cav * times)
    norm_sq = pg0[:, None] + pe0[:, None] * surv[None, :]
    pop = np.where(times[None, :] < jump_times[:, None],
                   pe0[:, None] * surv[None, :] / norm_sq, 0.0)
    mean = pop.mean(axis=0)
    if n_traj > 1:
        stderr = pop.std(axis=0, ddof=1) / math.sqrt(n_traj)
    else:
        stderr = np.zeros_like(mean)
    return TrajectoryEnsemble(n_traj=n_traj, seed=seed, times=times,
                              excited_population=mean, stderr=stderr,
                              jump_times=jump_times)


def cooperativity(params: ModelParams) -> float:
    """Dimensionless g^2 / (kappa gamma); both rates must be positive."""
    if params.kappa <= 0.0 or params.gamma <= 0.0:
        raise InvalidParams("cooperativity needs kappa > 0 and gamma > 0")
    return params.g ** 2 / (params.kappa * params.gamma)


def coupling_regime(params: ModelParams) -> str:
    """Human-readable regime label from the cooperativity."""
    c = cooperativity(params)
    if c < 0.1:
        return "weak coupling regime"
    if c >= 1.0:
        return "strong coupling regime"
    return "intermediate coupling"


def effective_decay_rate(params: ModelParams) -> float:
    """Adiabatic single-rate reduction: gamma + 4 g^2 / kappa.

    Valid when the cavity relaxes much faster than every other rate; the
    cavity channel then adds the resonant enhancement 4 g^2 / kappa to
    the free atomic rate.
    """
    if params.kappa <= 0.0:
        raise InvalidParams("effective rate needs kappa > 0")
    return params.gamma + 4.0 * params.g ** 2 / params.kappa


@dataclass(frozen=True, eq=False)
class DiscrepancyResult:
    """Atomic excited populations of the two models on a shared grid."""

    times: np.ndarray
    pop_jc: np.ndarray
    pop_single: np.ndarray

    @property
    def difference(self) -> np.ndarray:
        return self.pop_jc - self.pop_single

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.difference)))


def model_discrepancy(params: ModelParams, gamma_cav: float, t_grid,
                      n_fock: int = 5,
                      dt_target: float | None = None) -> DiscrepancyResult:
    """Excited-population gap between the two models, excited-atom start.

    Integrates the two-channel model segment by segment so every grid
    time is hit exactly (no interpolation), and evaluates the single-rate
    model in closed form on the same grid. Small when the cooperativity
    is small and gamma_cav is the adiabatic effective rate; order one
    when coherent exchange is resolved.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times < 0.0):
        raise InvalidParams("t_grid must be 1-D, nonempty, >= 0")
    if np.any(np.diff(times) <= 0.0):
        raise InvalidParams("t_grid must be strictly increasing")
    if dt_target is None:
        dt_target = 0.01 / max(params.max_rate, 1e-12)

    state = AtomCavityState.excited_vacuum(n_fock=n_fock)
    lv = _liouvillian(params, n_fock)
    dim = state.dim
    n1 = n_fock + 1
    y = state.rho.ravel().copy()

    pop_jc = np.empty(times.size)
    diag_idx = (dim + 1) * np.arange(dim)

    def excited(yvec):
        return float(yvec[diag_idx].real[n1:].sum())

    def leak(yvec):
        d = yvec[diag_idx].real
        return d[n1 - 1] + d[2 * n1 - 1]

    t_prev = 0.0
    if times[0] == 0.0:
        pop_jc[0] = excited(y)
        start = 1
    else:
        start = 0
    for k in range(start, times.size):
        span = times[k] - t_prev
        n_steps = max(1, math.ceil(span / dt_target - 1e-12))
        y = _rk4_propagate(lv, y, span / n_steps, n_steps)
        t_prev = times[k]
        if leak(y) > _LEAK_TOL:
            raise TruncationLeak(
                f"top Fock level leaked at t={times[k]:g}; raise n_fock")
        pop_jc[k] = excited(y)

    pop_single = evolve_single_rate(gamma_cav, np.diag([0.0, 1.0]),
                                    times).excited_population
    return DiscrepancyResult(times=times, pop_jc=pop_jc,
                             pop_single=pop_single)


def fit_decay_rate(times, pops, t_min: float, t_max: float) -> float:
    """Decay rate from a straight-line fit to log population on a window."""
    times = np.asarray(times, dtype=float)
    pops = np.asarray(pops, dtype=float)
    mask = (times >= t_min) & (times <= t_max) & (pops > 0.0)
    if int(mask.sum()) < 2:
        raise InvalidParams(
            "decay-rate fit needs at least two positive samples in window")
    slope = np.polyfit(times[mask], np.log(pops[mask]), 1)[0]
    return -float(slope)
