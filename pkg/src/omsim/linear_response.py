"""Weak-probe response of the linearised system.

Fluctuations around a steady state are expanded in sidebands at the
probe–control detuning ``Omega``::

    da = A1m e^{-i Omega t} + A1p e^{+i Omega t}
    db = B1m e^{-i Omega t} + B1p e^{+i Omega t}
    dxj = qj e^{-i Omega t} + c.c.

which turns the linearised equations into six algebraic equations for
``(A1m, conj(A1p), B1m, conj(B1p), q1, q2)``.  The production route solves
them directly (valid for arbitrary effective detunings).  Closed-form
expressions, valid only for equal effective detunings, are provided for
cross-validation.

Mechanical damping follows the mean-field equations, ``m (x'' + gamma/2 x'
+ Omega_j**2 x) = F``, so the amplitude linewidth of mirror ``j`` is
``gamma_j / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleEncountered, SingularSystem
from .params import SystemParams
from .steady_state import SteadyState

COND_LIMIT = 1e13


def susceptibility(params: SystemParams, j: int, Omega):
    """Mechanical susceptibility ``1 / (m_j (Omega_j**2 - Omega**2 - i gamma_j Omega / 2))``."""
    if j == 1:
        m, W, gam = params.m1, params.Omega1, params.gamma1
    elif j == 2:
        m, W, gam = params.m2, params.Omega2, params.gamma2
    else:
        raise ValueError("mirror index must be 1 or 2")
    Omega = np.asarray(Omega, dtype=float)
    out = 1.0 / (m * (W**2 - Omega**2 - 0.5j * gam * Omega))
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class SidebandSolution:
    A1_minus: complex
    A1_plus: complex
    B1_minus: complex
    B1_plus: complex
    q1: complex
    q2: complex
    Omega: float
    eps_p: float

    def unknowns(self) -> np.ndarray:
        """Vector ``(A1m, conj(A1p), B1m, conj(B1p), q1, q2)`` of the linear system."""
        return np.array([self.A1_minus, np.conj(self.A1_plus), self.B1_minus,
                         np.conj(self.B1_plus), self.q1, self.q2])


def _assemble(params, state, Omega, eps_p):
    """Batched matrices ``M @ u = rhs`` for an array of ``Omega``."""
    p = params
    W = np.atleast_1d(np.asarray(Omega, dtype=float))
    n = W.size
    a, b = state.a_bar, state.b_bar
    ac, bc = np.conj(a), np.conj(b)
    th1 = 1j * state.delta1_eff - p.kappa / 2
    th2 = 1j * state.delta2_eff - p.kappa / 2
    D1 = th1 + 1j * W
    D2c = np.conj(th1 - 1j * W)
    D3 = th2 + 1j * W
    D4c = np.conj(th2 - 1j * W)
    g = p.g
    h = p.hbar
    M = np.zeros((n, 6, 6), dtype=complex)
    # A1m:  D1 A1m - i g B1m + i G1 a q1 = -sqrt(kappa) eps_p
    M[:, 0, 0] = D1
    M[:, 0, 2] = -1j * g
    M[:, 0, 4] = 1j * p.G1 * a
    # conj(A1p):  conj(D2) At + i g Bt - i G1 conj(a) q1 = 0
    M[:, 1, 1] = D2c
    M[:, 1, 3] = 1j * g
    M[:, 1, 4] = -1j * p.G1 * ac
    # B1m:  D3 B1m - i g A1m + i G2 b (q2 - q1) = 0
    M[:, 2, 2] = D3
    M[:, 2, 0] = -1j * g
    M[:, 2, 4] = -1j * p.G2 * b
    M[:, 2, 5] = 1j * p.G2 * b
    # conj(B1p):  conj(D4) Bt + i g At - i G2 conj(b) (q2 - q1) = 0
    M[:, 3, 3] = D4c
    M[:, 3, 1] = 1j * g
    M[:, 3, 4] = 1j * p.G2 * bc
    M[:, 3, 5] = -1j * p.G2 * bc
    # q1 / chi1 = hbar G1 (a* A1m + a At) - hbar G2 (b* B1m + b Bt)
    M[:, 4, 0] = -h * p.G1 * ac
    M[:, 4, 1] = -h * p.G1 * a
    M[:, 4, 2] = h * p.G2 * bc
    M[:, 4, 3] = h * p.G2 * b
    M[:, 4, 4] = 1.0 / susceptibility(p, 1, W)
    # q2 / chi2 = hbar G2 (b* B1m + b Bt)
    M[:, 5, 2] = -h * p.G2 * bc
    M[:, 5, 3] = -h * p.G2 * b
    M[:, 5, 5] = 1.0 / susceptibility(p, 2, W)
    rhs = np.zeros((n, 6), dtype=complex)
    rhs[:, 0] = -math.sqrt(p.kappa) * eps_p
    return W, M, rhs


def _equilibrate(M):
    r = 1.0 / np.max(np.abs(M), axis=2)
    Mr = M * r[:, :, None]
    c = 1.0 / np.max(np.abs(Mr), axis=1)
    return Mr * c[:, None, :], r, c


def _solve_batch(params, state, Omega, eps_p):
    W, M, rhs = _assemble(params, state, Omega, eps_p)
    Ms, r, c = _equilibrate(M)
    cond = np.linalg.cond(Ms)
    bad = ~(cond < COND_LIMIT)
    u = np.full((W.size, 6), np.nan, dtype=complex)
    ok = ~bad
    if np.any(ok):
        y = np.linalg.solve(Ms[ok], (rhs[ok] * r[ok])[..., None])[..., 0]
        u[ok] = y * c[ok]
    return W, u, cond, M, rhs


def _to_solution(W, u, eps_p):
    return SidebandSolution(complex(u[0]), complex(np.conj(u[1])), complex(u[2]),
                            complex(np.conj(u[3])), complex(u[4]), complex(u[5]),
                            float(W), float(eps_p))


def solve_sidebands_direct(params: SystemParams, state: SteadyState,
                           Omega: float, eps_p: float | None = None) -> SidebandSolution:
    """Exact solution of the six sideband equations at one ``Omega``.

    Raises :class:`SingularSystem` at parametric-resonance points.
    """
    eps_p = params.eps_p if eps_p is None else eps_p
    W, u, cond, _, _ = _solve_batch(params, state, Omega, eps_p)
    if not cond[0] < COND_LIMIT:
        raise SingularSystem("sideband equations are singular", float(cond[0]))
    return _to_solution(W[0], u[0], eps_p)


def back_substitution_residual(params: SystemParams, state: SteadyState,
                               sol: SidebandSolution) -> float:
    """Largest relative residual of the six sideband equations.

    Each equation's residual is divided by the sum of the magnitudes of its
    terms.
    """
    _, M, rhs = _assemble(params, state, sol.Omega, sol.eps_p)
    u = sol.unknowns()
    terms = M[0] * u[None, :]
    resid = terms.sum(axis=1) - rhs[0]
    size = np.abs(terms).sum(axis=1) + np.abs(rhs[0])
    size[size == 0] = 1.0
    return float(np.max(np.abs(resid) / size))


def _require_probe(eps_p):
    if not eps_p > 0:
        raise ValueError("probe amplitude must be > 0")


def response_epsT(params: SystemParams, state: SteadyState, Omega: float) -> complex:
    """Probe response ``sqrt(kappa) A1m / eps_p``."""
    _require_probe(params.eps_p)
    sol = solve_sidebands_direct(params, state, Omega)
    return math.sqrt(params.kappa) * sol.A1_minus / params.eps_p


def transmission_direct(params: SystemParams, state: SteadyState,
                        Omega: float) -> tuple[float, float]:
    """``(T_b, T_f)`` from the direct sideband solution."""
    _require_probe(params.eps_p)
    sol = solve_sidebands_direct(params, state, Omega)
    sk = math.sqrt(params.kappa)
    return (abs(1 - sk * sol.A1_minus / params.eps_p) ** 2,
            abs(sk * sol.B1_minus / params.eps_p) ** 2)


# --------------------------------------------------------------------------
# closed forms

def _require_equal_detunings(state):
    if not math.isclose(state.delta1_eff, state.delta2_eff, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError("closed-form transmission needs equal effective detunings")


def _pole(name, value, scale):
    if not abs(value) > POLE_REL * scale:
        raise PoleEncountered(name, abs(value))


POLE_REL = 1e-12


def transmission_closed_form(params: SystemParams, state: SteadyState,
                             Omega: float) -> tuple[float, float]:
    """``(T_b, T_f)`` from the elimination formulas for equal effective detunings.

    Raises :class:`PoleEncountered` if ``B`` or ``C1 + C2 + C3`` vanishes.
    """
    _require_equal_detunings(state)
    p = params
    k = p.kappa
    g = p.g
    G1, G2 = p.G1, p.G2
    h = p.hbar
    a, b = state.a_bar, state.b_bar
    ac, bc = np.conj(a), np.conj(b)
    na, nb = abs(a) ** 2, abs(b) ** 2
    th = 1j * state.delta1_eff - k / 2
    D1 = th + 1j * Omega
    D2s = np.conj(th - 1j * Omega)
    S = D1**2 + g**2
    Ss = D2s**2 + g**2
    chi1 = susceptibility(p, 1, Omega)
    chi2 = susceptibility(p, 2, Omega)

    A = -(g * G1 * a * bc + 1j * D1 * G2 * nb) / S - (g * G1 * ac * b - 1j * G2 * D2s * nb) / Ss
    B_opt = (1j * G2 * D2s * nb / Ss, -1j * D1 * G2 * nb / S)
    B_mech = -1 / (h * G2 * chi2)
    B = B_opt[0] + B_opt[1] + B_mech
    _pole("B", B, abs(B_opt[0]) + abs(B_opt[1]) + abs(B_mech))
    u = 1 - A / B
    C1 = (-g * G2 * (u * a * bc + ac * b) + 1j * G2**2 * u * nb * D2s / G1
          + 1j * G1 * na * D2s) / Ss
    C2 = (-g * G2 * (u * ac * b + a * bc) - 1j * G2**2 * u * nb * D1 / G1
          - 1j * G1 * na * D1) / S
    C3 = -1 / (h * G1 * chi1)
    Csum = C1 + C2 + C3
    _pole("C1 + C2 + C3", Csum, abs(C1) + abs(C2) + abs(C3))
    C11 = (g * G1 * ac * b + 1j * G2 * D1 * nb) / (B * S)
    C22 = (g * G1 * a * bc - 1j * G2 * D2s * nb) / (B * Ss)
    v = 1 + C11 + C22

    back = ((1j * g**2 * G2**2 * u * v * nb / G1 - 1j * G1 * D1**2 * na
             - D1 * g * G2 * (u * ac * b + v * a * bc)) / (S**2 * Csum)
            + 1j * g**2 * G2 * nb / (B * S**2) - D1 / S)
    fwd = ((g * D1 * (G2**2 * u * v * nb / G1 + G1 * na)
            - 1j * G2 * (g**2 * v * a * bc - D1**2 * u * ac * b)) / (S**2 * Csum)
           + g * D1 * G2 * nb / (B * S**2) - 1j * g / S)
    return float(abs(1 - k * back) ** 2), float(abs(-k * fwd) ** 2)


def _require_single_cavity(params):
    if params.g != 0:
        raise ValueError("single-cavity forms need g = 0")


def epsT_single_cavity(params: SystemParams, state: SteadyState, Omega):
    """Probe response for ``g = 0`` after eliminating the mirror amplitude."""
    _require_single_cavity(params)
    p = params
    d = state.delta1_eff
    D1 = 1j * (Omega + d) - p.kappa / 2
    D2s = 1j * (Omega - d) - p.kappa / 2
    na = state.n_a
    G1 = p.G1
    chi1 = susceptibility(p, 1, Omega)
    inner = -1j * na * G1 / D1 - 1 / (p.hbar * chi1 * G1) + 1j * na * G1 / D2s
    return p.kappa * (-1 / D1 - 1j * na * G1 / (D1**2 * inner))


def coupling_beta(params: SystemParams, state: SteadyState) -> float:
    """``|a|**2 G1**2 x_zpf**2`` with ``x_zpf = sqrt(hbar / (2 m1 Omega1))``."""
    p = params
    x_zpf2 = p.hbar / (2 * p.m1 * p.Omega1)
    return state.n_a * p.G1**2 * x_zpf2


def epsT_rational(params: SystemParams, state: SteadyState, Omega):
    """Same response as :func:`epsT_single_cavity`, as one rational function."""
    _require_single_cavity(params)
    p = params
    d = state.delta1_eff
    k2 = p.kappa / 2
    Wm = p.Omega1
    lw = p.gamma1 / 2
    beta = coupling_beta(p, state)
    mech = Omega**2 - Wm**2 + 1j * lw * Omega
    num = mech * (k2 - 1j * (Omega - d)) - 2j * beta * Wm
    den = mech * ((k2 - 1j * Omega) ** 2 + d**2) - 4 * d * beta * Wm
    return p.kappa * num / den


def epsT_near_resonance(params: SystemParams, state: SteadyState, Omega):
    """Lorentzian-dressed response near ``Omega = Omega_m`` for red detuning
    ``delta1_eff ~ -Omega_m`` in the resolved-sideband limit."""
    _require_single_cavity(params)
    p = params
    y = Omega - p.Omega1
    beta = coupling_beta(p, state)
    lw = p.gamma1 / 2
    return p.kappa / (p.kappa / 2 - 1j * y + beta / (lw / 2 - 1j * y))


# --------------------------------------------------------------------------
# spectra

@dataclass(frozen=True)
class SpectrumPoint:
    Omega: float
    eps_T: complex
    T_b: float
    T_f: float
    sidebands: SidebandSolution | None
    method: str = "direct"
    branch_index: int = 0
    error: str | None = None


def spectrum(params: SystemParams, state: SteadyState, omega_grid,
             branch_index: int = 0, method: str = "direct") -> list[SpectrumPoint]:
    """Probe response over ``omega_grid`` (ascending, rad/s).

    Points where the solve fails carry ``error`` and NaN values.
    """
    W = np.asarray(omega_grid, dtype=float)
    if W.size == 0:
        return []
    if np.any(np.diff(W) < 0):
        raise ValueError("omega grid must be sorted ascending")
    if method not in ("direct", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    eps_p = params.eps_p
    _require_probe(eps_p)
    sk = math.sqrt(params.kappa)
    W, u, cond, _, _ = _solve_batch(params, state, W, eps_p)
    out = []
    for i, w in enumerate(W):
        if not cond[i] < COND_LIMIT:
            out.append(SpectrumPoint(float(w), complex(np.nan, np.nan), np.nan, np.nan,
                                     None, method, branch_index,
                                     f"SingularSystem: condition {cond[i]:.3e}"))
            continue
        sol = _to_solution(w, u[i], eps_p)
        eps_T = sk * sol.A1_minus / eps_p
        error = None
        if method == "direct":
            T_b = abs(1 - eps_T) ** 2
            T_f = abs(sk * sol.B1_minus / eps_p) ** 2
        else:
            try:
                T_b, T_f = transmission_closed_form(params, state, float(w))
            except PoleEncountered as exc:
                T_b = T_f = np.nan
                error = f"PoleEncountered: {exc.name}"
        out.append(SpectrumPoint(float(w), complex(eps_T), float(T_b), float(T_f),
                                 sol, method, branch_index, error))
    return out
