"""Static effective masses of the two mirrors.

Displacements are measured from the positions set by the constant part of
the radiation pressure.  To first order in the displacements the photon
numbers respond linearly, mirror 1 stays in force balance, and the residual
force on mirror ``j`` is written ``F_j = M_j Omega_j**2 x_j``.

Two independent routes are provided:

* :func:`closed_form_masses` evaluates the explicit expressions built from
  the coefficient groups of :func:`coefficients`;
* :func:`oracle_masses` differentiates the exact photon-number balance
  numerically (complex step) and solves the resulting small linear problem.

The drive group ``B1`` is taken as ``kappa eps_c**2 / (Delta1**2 + kappa**2/4)``,
the intracavity photon number of cavity A without tunnelling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PoleEncountered, SingularSystem
from .params import SystemParams
from .steady_state import _intensities

POLE_TOL = 1e-12
KG_PER_NG = 1e-12


@dataclass(frozen=True)
class MassCoefficients:
    A1: float
    A2: float
    B1: float
    B2: float
    C1: float
    zeta1: float
    zeta2: float
    zeta3: float
    psi1: float
    psi2: float
    psi3: float
    Lambda1: float
    Lambda2: float
    # magnitude of the terms summed into each Lambda, for pole detection
    Lambda1_scale: float = field(default=0.0, repr=False)
    Lambda2_scale: float = field(default=0.0, repr=False)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "A1", "A2", "B1", "B2", "C1", "zeta1", "zeta2", "zeta3",
            "psi1", "psi2", "psi3", "Lambda1", "Lambda2")}


def coefficients(params: SystemParams) -> MassCoefficients:
    """Linear-response coefficient groups.

    Raises :class:`PoleEncountered` when ``A1 A2`` reaches 1.
    """
    p = params
    d1 = p.Delta1**2 + p.kappa**2 / 4
    d2 = p.Delta2**2 + p.kappa**2 / 4
    A1 = p.g**2 / d1
    A2 = p.g**2 / d2
    B1 = p.kappa * p.eps_c**2 / d1
    B2 = 2 * p.Delta2 * p.G2 / d2
    C1 = -2 * p.Delta1 * p.G1 / d1
    det = 1 - A1 * A2
    if abs(det) < POLE_TOL:
        raise PoleEncountered("1 - A1*A2", det)
    zeta1 = B1 / det
    zeta2 = B1 * (A1 * A2 * B2 + C1) / det**2
    zeta3 = A1 * A2 * B1 * B2 / det**2
    psi1 = A2 * zeta1
    psi2 = A2 * (zeta2 + B2 * zeta1)
    psi3 = A2 * (zeta3 + B2 * zeta1)
    k = p.hbar / (p.m1 * p.Omega1**2)
    l1 = (zeta2 * p.G1 * k, p.G2 * psi2 * k)
    l2 = (p.G2 * psi3 * k, zeta3 * p.G1 * k)
    return MassCoefficients(
        A1, A2, B1, B2, C1, zeta1, zeta2, zeta3, psi1, psi2, psi3,
        l1[0] - l1[1], l2[0] - l2[1],
        abs(l1[0]) + abs(l1[1]), abs(l2[0]) + abs(l2[1]),
    )


def _check_poles(c: MassCoefficients):
    if c.Lambda2_scale == 0 or abs(c.Lambda2) <= POLE_TOL * c.Lambda2_scale:
        raise PoleEncountered("Lambda2", c.Lambda2)
    one_minus = 1 - c.Lambda1
    if abs(one_minus) <= POLE_TOL * max(1.0, abs(c.Lambda1)):
        raise PoleEncountered("1 - Lambda1", one_minus)


def closed_form_masses(params: SystemParams) -> tuple[float, float]:
    """Effective masses ``(M', M'')`` in kg from the explicit expressions.

    With both optomechanical couplings zero every optical term vanishes and
    the bare values ``(-m1, -m2)`` are returned.
    """
    p = params
    if p.G1 == 0 and p.G2 == 0:
        return -p.m1, -p.m2
    c = coefficients(p)
    _check_poles(c)
    h = p.hbar
    g2 = p.g**2
    d2 = p.Delta2**2 + p.kappa**2 / 4
    W1 = p.Omega1**2
    W2 = p.Omega2**2
    ratio = (1 - c.Lambda1) / c.Lambda2  # x2 / x1 with mirror 1 balanced

    m_prime = (
        -p.m1
        + 2 * p.Delta2 * c.zeta1 * g2 * p.G2**2 * ratio * h / (W1 * d2 * d2)
        - 2 * p.Delta2 * c.zeta1 * g2 * p.G2**2 * h / (W1 * d2 * d2)
        - c.zeta2 * g2 * p.G2 * h / (W1 * d2)
        + c.zeta3 * g2 * p.G2 * ratio * h / (W1 * d2)
        + c.zeta2 * p.G1 * h / W1
        - c.zeta3 * p.G1 * ratio * h / W1
    )
    m_doubleprime = (
        -p.m2
        + 2 * p.Delta2 * c.zeta1 * g2 * p.G2**2 * h / (ratio * W2 * d2 * d2)
        - 2 * p.Delta2 * c.zeta1 * g2 * p.G2**2 * h / (W2 * d2 * d2)
        + c.zeta2 * g2 * p.G2 * h / (ratio * W2 * d2)
        - c.zeta3 * g2 * p.G2 * h / (W2 * d2)
    )
    return float(m_prime), float(m_doubleprime)


# --------------------------------------------------------------------------
# numeric route

def _photon_numbers(params, x1, x2, exact=False):
    """Photon numbers for given (possibly complex) displacements.

    By default the intensity balance ``(Delta1'**2 + kappa**2/4) n_a -
    g**2 n_b = kappa eps_c**2`` is solved together with the exact
    ``n_b = g**2 n_a / (Delta2'**2 + kappa**2/4)``; the expressions for the
    masses are built on the same balance.  It leaves out the interference
    term ``2 g sqrt(kappa) eps_c Im b``, which ``exact=True`` keeps by using
    the full field solution.
    """
    p = params
    d1 = p.Delta1 + p.G1 * x1
    d2 = p.Delta2 + p.G2 * (x2 - x1)
    if exact:
        na, nb, _, _ = _intensities(p, d1, d2)
        return np.array([na, nb])
    M = np.array([[d1**2 + p.kappa**2 / 4, -p.g**2],
                  [-p.g**2, d2**2 + p.kappa**2 / 4]], dtype=complex)
    rhs = np.array([p.kappa * p.eps_c**2, 0.0], dtype=complex)
    return np.linalg.solve(M, rhs)


def photon_number_gradient(params: SystemParams, exact: bool = False) -> np.ndarray:
    """``d(n_a, n_b)/d(x1, x2)`` at zero displacement, by complex step."""
    h = 1e-20 * params.kappa / max(abs(params.G1), abs(params.G2), 1e-300)
    grad = np.empty((2, 2))
    for k in range(2):
        x = [0j, 0j]
        x[k] = 1j * h
        grad[:, k] = np.imag(_photon_numbers(params, *x, exact=exact)) / h
    return grad


@dataclass(frozen=True)
class OracleMasses:
    M_prime: float
    M_doubleprime: float
    x1: float
    x2: float
    limits: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.M_prime, self.M_doubleprime))


def oracle_solution(params: SystemParams, exact: bool = False) -> OracleMasses:
    """Numeric effective masses with the displacement pattern used.

    The displacement direction ``(x1, x2)`` (unit norm, in metres) is the
    one leaving mirror 1 in force balance.  A mirror that does not move in
    that direction has no defined mass ratio; its bare ``-m_j`` is returned
    and the name ``"ZeroDisplacement:M'"`` / ``"ZeroDisplacement:M''"`` is
    added to ``limits``.  ``exact`` selects the photon numbers, see
    :func:`_photon_numbers`.
    """
    p = params
    N = photon_number_gradient(p, exact)
    h = p.hbar
    k1 = p.m1 * p.Omega1**2
    k2 = p.m2 * p.Omega2**2
    # force-balance row on mirror 1: c1 x1 + c2 x2 = 0
    row = np.array([k1, 0.0]) - h * (p.G1 * N[0] - p.G2 * N[1])
    norm = np.hypot(*row)
    if norm == 0 or not np.isfinite(norm):
        raise SingularSystem("force balance on mirror 1 leaves no unique direction")
    # solve [row; orthogonal normalisation] for the direction
    A = np.array([row / norm, [-row[1] / norm, row[0] / norm]])
    x1, x2 = np.linalg.solve(A, [0.0, 1.0])
    dn = N @ np.array([x1, x2])
    F1 = h * (p.G1 * dn[0] - p.G2 * dn[1]) - k1 * x1
    F2 = h * p.G2 * dn[1] - k2 * x2
    limits = []
    if abs(x1) < 1e-30:
        m_prime = -p.m1
        limits.append("ZeroDisplacement:M'")
    else:
        m_prime = F1 / (p.Omega1**2 * x1)
    if abs(x2) < 1e-30:
        m_doubleprime = -p.m2
        limits.append("ZeroDisplacement:M''")
    else:
        m_doubleprime = F2 / (p.Omega2**2 * x2)
    return OracleMasses(float(m_prime), float(m_doubleprime), float(x1), float(x2),
                        tuple(limits))


def oracle_masses(params: SystemParams, exact: bool = False) -> tuple[float, float]:
    """Effective masses ``(M', M'')`` in kg by the numeric route."""
    sol = oracle_solution(params, exact)
    return sol.M_prime, sol.M_doubleprime


def relative_deviation(a: float, b: float, bare: float) -> float:
    """``|a - b|`` relative to the larger of ``|a|``, ``|b|`` and ``|bare|``."""
    return abs(a - b) / max(abs(a), abs(b), abs(bare))


@dataclass(frozen=True)
class EffectiveMassReport:
    M_prime: float | None
    M_doubleprime: float | None
    M_prime_oracle: float
    M_doubleprime_oracle: float
    coefficients: MassCoefficients | None
    params: SystemParams
    pole: str | None = None
    limits: tuple[str, ...] = ()

    @property
    def deviation(self) -> tuple[float, float] | None:
        if self.M_prime is None:
            return None
        return (relative_deviation(self.M_prime, self.M_prime_oracle, self.params.m1),
                relative_deviation(self.M_doubleprime, self.M_doubleprime_oracle,
                                   self.params.m2))


def report(params: SystemParams) -> EffectiveMassReport:
    """Both routes side by side.  A pole in the closed form is recorded,
    not raised."""
    oracle = oracle_solution(params)
    coeffs = None
    pole = None
    mp = mpp = None
    try:
        mp, mpp = closed_form_masses(params)
        if not (params.G1 == 0 and params.G2 == 0):
            coeffs = coefficients(params)
    except PoleEncountered as exc:
        pole = exc.name
    return EffectiveMassReport(mp, mpp, oracle.M_prime, oracle.M_doubleprime,
                               coeffs, params, pole, oracle.limits)
