"""Mean-field steady states of the zero-noise Langevin equations.

The dynamical variables are the two intracavity amplitudes ``a``, ``b`` and
the positions/momenta of the two mirrors.  In the flow ordering used
throughout (``Re a, Im a, Re b, Im b, x1, p1, x2, p2``)::

    da/dt  = (i D1 - kappa/2) a - i g b + sqrt(kappa) eps_c
    db/dt  = (i D2 - kappa/2) b - i g a
    dxj/dt = pj / mj
    dp1/dt = -m1 W1^2 x1 + hbar (G1 |a|^2 - G2 |b|^2) - gamma1/2 p1
    dp2/dt = -m2 W2^2 x2 + hbar G2 |b|^2 - gamma2/2 p2

with effective detunings ``D1 = Delta1 + G1 x1`` and
``D2 = Delta2 + G2 (x2 - x1)``.

Passing ``equal_detunings=True`` replaces ``D2`` by ``D1`` everywhere (the
equal-effective-detuning reduction under which the displacement of mirror 1
obeys a quintic, see :mod:`omsim.multistability`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, NoConvergence
from .params import SystemParams

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class SteadyState:
    a_bar: complex
    b_bar: complex
    x1_bar: float
    x2_bar: float
    delta1_eff: float
    delta2_eff: float
    n_a: float
    n_b: float
    residual_norm: float
    equal_detunings: bool = False
    iterations: int = 0

    def as_dict(self) -> dict:
        return {
            "a_bar_re": self.a_bar.real,
            "a_bar_im": self.a_bar.imag,
            "b_bar_re": self.b_bar.real,
            "b_bar_im": self.b_bar.imag,
            "x1_bar_m": self.x1_bar,
            "x2_bar_m": self.x2_bar,
            "delta1_eff": self.delta1_eff,
            "delta2_eff": self.delta2_eff,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "residual_norm": self.residual_norm,
            "equal_detunings": self.equal_detunings,
            "iterations": self.iterations,
        }


# --------------------------------------------------------------------------
# natural scales

def length_scale(params: SystemParams) -> float:
    """Displacement that shifts cavity A by one linewidth [m]."""
    if params.G1 != 0:
        return params.kappa / abs(params.G1)
    if params.G2 != 0:
        return params.kappa / abs(params.G2)
    return 1.0


def field_scale(params: SystemParams) -> float:
    """Resonant empty-cavity amplitude ``2 eps_c / sqrt(kappa)``."""
    eps = params.eps_c
    return 2.0 * eps / math.sqrt(params.kappa) if eps > 0 else 1.0


def displacement_bounds(params: SystemParams) -> tuple[float, float]:
    """Interval guaranteed to contain ``x1`` at any steady state.

    Neither cavity can hold more than ``4 eps_c**2 / kappa`` photons.
    """
    p = params
    n_max = 4.0 * p.eps_c**2 / p.kappa
    k1 = p.m1 * p.Omega1**2
    return (-p.hbar * abs(p.G2) * n_max / k1, p.hbar * abs(p.G1) * n_max / k1)


# --------------------------------------------------------------------------
# fields and intensities

def effective_detunings(params, x1, x2, equal_detunings=False):
    d1 = params.Delta1 + params.G1 * x1
    if equal_detunings:
        return d1, d1
    return d1, params.Delta2 + params.G2 * (x2 - x1)


def cavity_fields(params: SystemParams, x1: float, x2: float,
                  equal_detunings: bool = False) -> tuple[complex, complex]:
    """Steady intracavity amplitudes for fixed mirror positions."""
    d1, d2 = effective_detunings(params, x1, x2, equal_detunings)
    th1 = 1j * d1 - params.kappa / 2
    th2 = 1j * d2 - params.kappa / 2
    den = th1 * th2 + params.g**2
    if abs(den) < 1e-30:
        raise DegenerateDenominator(f"cavity denominator vanishes (|den|={abs(den):.3e})")
    drive = math.sqrt(params.kappa) * params.eps_c
    return complex(-th2 * drive / den), complex(-1j * params.g * drive / den)


def _intensities(params, d1, d2):
    """Photon numbers and their derivatives w.r.t. (d1, d2).

    Written as real rational functions so the derivatives are exact.
    """
    p = params
    k2 = p.kappa**2 / 4
    drive2 = p.kappa * p.eps_c**2
    u = k2 + p.g**2 - d1 * d2
    v = -0.5 * p.kappa * (d1 + d2)
    q = u * u + v * v
    q1 = -2 * u * d2 - p.kappa * v
    q2 = -2 * u * d1 - p.kappa * v
    n2 = d2 * d2 + k2
    na = drive2 * n2 / q
    nb = p.g**2 * drive2 / q
    dna = (-drive2 * n2 * q1 / q**2, drive2 * (2 * d2 * q - n2 * q2) / q**2)
    dnb = (-p.g**2 * drive2 * q1 / q**2, -p.g**2 * drive2 * q2 / q**2)
    return na, nb, dna, dnb


def _detuning_chain(params, equal_detunings):
    # rows: d1, d2; columns: x1, x2
    if equal_detunings:
        return np.array([[params.G1, 0.0], [params.G1, 0.0]])
    return np.array([[params.G1, 0.0], [-params.G2, params.G2]])


def displacement_map(params: SystemParams, x1: float, x2: float,
                     equal_detunings: bool = False) -> tuple[float, float]:
    """Mirror displacements balancing the radiation forces of fields set by (x1, x2)."""
    p = params
    d1, d2 = effective_detunings(p, x1, x2, equal_detunings)
    na, nb, _, _ = _intensities(p, d1, d2)
    return (p.hbar * (p.G1 * na - p.G2 * nb) / (p.m1 * p.Omega1**2),
            p.hbar * p.G2 * nb / (p.m2 * p.Omega2**2))


def _map_jacobian(params, x1, x2, equal_detunings):
    p = params
    d1, d2 = effective_detunings(p, x1, x2, equal_detunings)
    _, _, dna, dnb = _intensities(p, d1, d2)
    chain = _detuning_chain(p, equal_detunings)
    dna_dx = np.array(dna) @ chain
    dnb_dx = np.array(dnb) @ chain
    k1 = p.m1 * p.Omega1**2
    k2 = p.m2 * p.Omega2**2
    return np.array([
        p.hbar * (p.G1 * dna_dx - p.G2 * dnb_dx) / k1,
        p.hbar * p.G2 * dnb_dx / k2,
    ])


# --------------------------------------------------------------------------
# flow, residual, Jacobian

def flow(params: SystemParams, z, equal_detunings: bool = False) -> np.ndarray:
    """Right-hand side of the zero-noise mean-field equations."""
    p = params
    ar, ai, br, bi, x1, p1, x2, p2 = z
    d1, d2 = effective_detunings(p, x1, x2, equal_detunings)
    k = p.kappa / 2
    na = ar * ar + ai * ai
    nb = br * br + bi * bi
    return np.array([
        -d1 * ai + p.g * bi + math.sqrt(p.kappa) * p.eps_c - k * ar,
        d1 * ar - p.g * br - k * ai,
        -d2 * bi + p.g * ai - k * br,
        d2 * br - p.g * ar - k * bi,
        p1 / p.m1,
        -p.m1 * p.Omega1**2 * x1 + p.hbar * (p.G1 * na - p.G2 * nb) - 0.5 * p.gamma1 * p1,
        p2 / p.m2,
        -p.m2 * p.Omega2**2 * x2 + p.hbar * p.G2 * nb - 0.5 * p.gamma2 * p2,
    ])


def state_vector(state: SteadyState) -> np.ndarray:
    return np.array([state.a_bar.real, state.a_bar.imag, state.b_bar.real,
                     state.b_bar.imag, state.x1_bar, 0.0, state.x2_bar, 0.0])


def variable_scales(params: SystemParams) -> np.ndarray:
    """Natural magnitude of each flow variable, used for conditioning."""
    a = field_scale(params)
    ell = length_scale(params)
    return np.array([a, a, a, a, ell, params.m1 * params.Omega1 * ell,
                     ell, params.m2 * params.Omega2 * ell])


def langevin_residual(params: SystemParams, state: SteadyState) -> np.ndarray:
    """Time derivatives ``[Re a', Im a', Re b', Im b', p1', p2']`` at ``state``."""
    f = flow(params, state_vector(state), state.equal_detunings)
    return f[[0, 1, 2, 3, 5, 7]]


def residual_norm(params: SystemParams, residual) -> float:
    """Max-norm of a :func:`langevin_residual` vector in natural units.

    Optical rates are divided by ``Omega1 * field_scale``, forces by
    ``m_j Omega_j**2 * length_scale``.
    """
    p = params
    ell = length_scale(p)
    s = np.array([p.Omega1 * field_scale(p)] * 4
                 + [p.m1 * p.Omega1**2 * ell, p.m2 * p.Omega2**2 * ell])
    return float(np.max(np.abs(np.asarray(residual) / s)))


def jacobian(params: SystemParams, state: SteadyState) -> np.ndarray:
    """Analytic 8x8 Jacobian of :func:`flow` at ``state``."""
    p = params
    ar, ai, br, bi = state.a_bar.real, state.a_bar.imag, state.b_bar.real, state.b_bar.imag
    d1, d2 = state.delta1_eff, state.delta2_eff
    chain = _detuning_chain(p, state.equal_detunings)
    k = p.kappa / 2
    g = p.g
    J = np.zeros((8, 8))
    # cavity A
    J[0, :4] = [-k, -d1, 0.0, g]
    J[1, :4] = [d1, -k, -g, 0.0]
    J[0, 4], J[0, 6] = -ai * chain[0, 0], -ai * chain[0, 1]
    J[1, 4], J[1, 6] = ar * chain[0, 0], ar * chain[0, 1]
    # cavity B
    J[2, :4] = [0.0, g, -k, -d2]
    J[3, :4] = [-g, 0.0, d2, -k]
    J[2, 4], J[2, 6] = -bi * chain[1, 0], -bi * chain[1, 1]
    J[3, 4], J[3, 6] = br * chain[1, 0], br * chain[1, 1]
    # mirrors
    J[4, 5] = 1.0 / p.m1
    J[6, 7] = 1.0 / p.m2
    h = p.hbar
    J[5, :4] = [2 * h * p.G1 * ar, 2 * h * p.G1 * ai, -2 * h * p.G2 * br, -2 * h * p.G2 * bi]
    J[5, 4] = -p.m1 * p.Omega1**2
    J[5, 5] = -0.5 * p.gamma1
    J[7, :4] = [0.0, 0.0, 2 * h * p.G2 * br, 2 * h * p.G2 * bi]
    J[7, 6] = -p.m2 * p.Omega2**2
    J[7, 7] = -0.5 * p.gamma2
    return J


def eigenvalues(params: SystemParams, state: SteadyState) -> np.ndarray:
    """Eigenvalues of :func:`jacobian`, computed on the rescaled matrix."""
    s = variable_scales(params)
    J = jacobian(params, state)
    return np.linalg.eigvals(J * s[None, :] / s[:, None])


def max_real_eigenvalue(params: SystemParams, state: SteadyState) -> float:
    return float(np.max(eigenvalues(params, state).real))


# --------------------------------------------------------------------------
# solvers

def state_at(params: SystemParams, x1: float, x2: float,
             equal_detunings: bool = False, iterations: int = 0) -> SteadyState:
    """Assemble a :class:`SteadyState` for given mirror positions."""
    a, b = cavity_fields(params, x1, x2, equal_detunings)
    d1, d2 = effective_detunings(params, x1, x2, equal_detunings)
    trial = SteadyState(a, b, float(x1), float(x2), float(d1), float(d2),
                        abs(a)**2, abs(b)**2, 0.0, equal_detunings, iterations)
    res = residual_norm(params, langevin_residual(params, trial))
    return SteadyState(a, b, float(x1), float(x2), float(d1), float(d2),
                       trial.n_a, trial.n_b, res, equal_detunings, iterations)


def state_from_x1(params: SystemParams, x1: float,
                  equal_detunings: bool = True) -> SteadyState:
    """Reconstruct the full state for a known ``x1`` (e.g. a quintic root).

    ``x2`` follows from the force balance on mirror 2, which under
    ``equal_detunings`` does not feed back on the fields.  In the general
    case ``x2`` is found by a short 1-D fixed-point iteration.
    """
    x2 = displacement_map(params, x1, 0.0, equal_detunings)[1]
    if not equal_detunings:
        for _ in range(200):
            new = displacement_map(params, x1, x2, False)[1]
            if new == x2:
                break
            x2 = new
    return state_at(params, x1, x2, equal_detunings)


def _scaled_residual(params, x, equal_detunings):
    F = displacement_map(params, x[0], x[1], equal_detunings)
    return (np.asarray(x) - np.asarray(F)) / length_scale(params)


def solve_fixed_point(params: SystemParams, x1_init: float = 0.0,
                      x2_init: float = 0.0, tol: float = DEFAULT_TOL,
                      max_iter: int = 10000, *, damping: float = 0.5,
                      method: str = "picard",
                      equal_detunings: bool = False) -> SteadyState:
    """Self-consistent steady state reached from the seed ``(x1_init, x2_init)``.

    ``method="picard"`` iterates ``x <- (1-lam) x + lam F(x)`` with ``lam``
    halved whenever the residual grows; it can only settle on branches where
    the map is contracting.  ``method="newton"`` runs a damped Newton
    iteration on ``x - F(x)`` and reaches any simple root whose basin
    contains the seed.

    Raises :class:`NoConvergence` if the residual does not drop below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if method not in ("picard", "newton"):
        raise ValueError(f"unknown method {method!r}")

    ell = length_scale(params)
    x = np.array([x1_init, x2_init], dtype=float)
    r = _scaled_residual(params, x, equal_detunings)
    rn = float(np.max(np.abs(r)))
    lam = damping
    it = 0
    while it < max_iter:
        if rn < tol:
            state = state_at(params, x[0], x[1], equal_detunings, it)
            if state.residual_norm < tol:
                return state
        it += 1
        if method == "picard":
            F = x - r * ell
            trial = (1 - lam) * x + lam * F
        else:
            Jm = np.eye(2) - _map_jacobian(params, x[0], x[1], equal_detunings)
            try:
                step = np.linalg.solve(Jm, r * ell)
            except np.linalg.LinAlgError:
                step = r * ell
            trial = x - step
        r_trial = _scaled_residual(params, trial, equal_detunings)
        rn_trial = float(np.max(np.abs(r_trial)))
        if method == "newton":
            # backtracking keeps the step inside the basin
            t = 1.0
            while not rn_trial < rn and t > 1e-6:
                t *= 0.5
                trial = x - t * step
                r_trial = _scaled_residual(params, trial, equal_detunings)
                rn_trial = float(np.max(np.abs(r_trial)))
            if not rn_trial < rn and rn >= tol:
                break
        elif not rn_trial <= rn:
            lam *= 0.5
            if lam < 1e-10:
                break
            continue
        x, r, rn = trial, r_trial, rn_trial
    raise NoConvergence(it, rn)


def seed_grid(params: SystemParams, n: int = 64) -> np.ndarray:
    """Deterministic ``x1`` seeds spanning the reachable displacements, plus 0."""
    lo, hi = displacement_bounds(params)
    seeds = np.unique(np.append(np.linspace(lo, hi, max(n, 2)), 0.0))
    return seeds


def find_steady_states(params: SystemParams, n_seeds: int = 64,
                       tol: float = DEFAULT_TOL, equal_detunings: bool = False,
                       method: str = "newton", seeds=None) -> list[SteadyState]:
    """All distinct steady states reached from a seed grid, sorted by ``x1``."""
    if seeds is None:
        seeds = seed_grid(params, n_seeds)
    lo, hi = displacement_bounds(params)
    merge = 1e-9 * max(hi - lo, length_scale(params) * 1e-6)
    found: list[SteadyState] = []
    for x1 in seeds:
        x2 = displacement_map(params, x1, 0.0, equal_detunings)[1]
        try:
            st = solve_fixed_point(params, x1, x2, tol, 200, method=method,
                                   equal_detunings=equal_detunings)
        except NoConvergence:
            continue
        if all(abs(st.x1_bar - other.x1_bar) > merge for other in found):
            found.append(st)
    return sorted(found, key=lambda s: s.x1_bar)
