"""Quintic for the displacement of mirror 1 and branch classification.

With both cavities held at the same effective detuning
``Delta1 + G1 x1`` the force balance on mirror 1 becomes a fifth-order
polynomial in ``x1``.  Its coefficients span roughly eighty decades in SI
units, so roots are computed for ``xi = G1 x1 / kappa`` with every frequency
measured in units of ``kappa``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import steady_state as ss
from .errors import NumericalFailure
from .params import SystemParams

REAL_TOL = 1e-7
MARGINAL_BAND = 1e-6


@dataclass(frozen=True)
class QuinticCoefficients:
    """Coefficients ``a1..a6`` of ``a1 x^5 + ... + a6`` (SI) and their
    nondimensional counterparts for ``xi = x / scale``.

    ``scale`` is the displacement ``kappa / G1`` in metres.
    """

    a: tuple[float, ...]
    nondimensional: tuple[float, ...]
    scale: float

    def __getattr__(self, name):
        if len(name) == 2 and name[0] == "a" and name[1] in "123456":
            return self.a[int(name[1]) - 1]
        raise AttributeError(name)

    @classmethod
    def from_nondimensional(cls, coeffs, scale: float = 1.0) -> "QuinticCoefficients":
        b = tuple(float(c) for c in coeffs)
        if len(b) != 6:
            raise ValueError("a quintic needs six coefficients")
        a = tuple(c / scale ** (5 - k) for k, c in enumerate(b))
        return cls(a, b, scale)


def _coefficients(G1, G2, g, Delta1, kappa, drive):
    """The six coefficients, ``drive = hbar kappa eps_c**2 / (m1 Omega1**2)``."""
    D = Delta1
    return (
        G1**4,
        4 * D * G1**3,
        -2 * g**2 * G1**2 + 6 * D**2 * G1**2 + G1**2 * kappa**2 / 2,
        -4 * D * g**2 * G1 - G1**3 * drive + 4 * D**3 * G1 + D * G1 * kappa**2,
        (D**4 + D**2 * kappa**2 / 2 + g**4 - 2 * D**2 * g**2 + g**2 * kappa**2 / 2
         - 2 * D * G1**2 * drive + kappa**4 / 16),
        g**2 * G2 * drive - D**2 * G1 * drive - G1 * kappa**2 * drive / 4,
    )


def _drive(params):
    p = params
    return p.hbar * p.kappa * p.eps_c**2 / (p.m1 * p.Omega1**2)


def quintic_coefficients(params: SystemParams) -> QuinticCoefficients:
    p = params
    if p.G1 == 0:
        raise ValueError("the quintic needs G1 != 0")
    k = p.kappa
    a = _coefficients(p.G1, p.G2, p.g, p.Delta1, k, _drive(p))
    # same expressions with kappa = G1 = 1
    b = _coefficients(1.0, p.G2 / p.G1, p.g / k, p.Delta1 / k, 1.0,
                      _drive(p) * p.G1**2 / k**3)
    return QuinticCoefficients(tuple(float(v) for v in a),
                               tuple(float(v) for v in b), k / p.G1)


def _polish(coeffs, roots, steps=8):
    der = np.polyder(coeffs)
    out = []
    for z in roots:
        for _ in range(steps):
            d = np.polyval(der, z)
            if d == 0:
                break
            dz = np.polyval(coeffs, z) / d
            z = z - dz
            if abs(dz) <= 1e-15 * max(1.0, abs(z)):
                break
        out.append(z)
    return np.array(out)


def solve_quintic(coeffs: QuinticCoefficients) -> list[float]:
    """Real roots of the quintic in metres, ascending.

    Companion-matrix eigenvalues refined by Newton steps; a root counts as
    real when ``|Im xi| < 1e-7``.
    """
    b = np.asarray(coeffs.nondimensional, dtype=float)
    if b[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if not np.all(np.isfinite(b)):
        raise NumericalFailure("non-finite quintic coefficients")
    try:
        roots = np.roots(b)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"companion eigensolve failed: {exc}") from exc
    roots = _polish(b, roots.astype(complex))
    real = sorted(float(z.real) for z in roots if abs(z.imag) < REAL_TOL)
    return [xi * coeffs.scale for xi in real]


def _fields_equal_detuning(params, x1):
    p = params
    d = p.Delta1 + p.G1 * x1
    k = p.kappa / 2
    num_a = (-1j * d + k) * (1j * d + k) * p.kappa * p.eps_c**2
    den = ((1j * d - k) ** 2 + p.g**2) * ((1j * d + k) ** 2 + p.g**2)
    return (num_a / den).real, (p.g**2 * p.kappa * p.eps_c**2 / den).real


def displacement_reference(params: SystemParams) -> float:
    """``hbar G1 eps_c**2 / (m1 Omega1**2 kappa)``, a quarter of the largest
    radiation-pressure displacement; ``kappa / G1`` when undriven."""
    p = params
    ref = p.hbar * abs(p.G1) * p.eps_c**2 / (p.m1 * p.Omega1**2 * p.kappa)
    return ref if ref > 0 else ss.length_scale(p)


def consistency_check(params: SystemParams, root: float) -> float:
    """Force-balance mismatch on mirror 1 at ``x1 = root``, nondimensional.

    Photon numbers come straight from the equal-detuning field expressions,
    not from the expanded polynomial, so this is an independent check on the
    quintic coefficients.
    """
    p = params
    na, nb = _fields_equal_detuning(p, root)
    f = p.m1 * p.Omega1**2 * root - p.hbar * (p.G1 * na - p.G2 * nb)
    return abs(f) / (p.m1 * p.Omega1**2 * displacement_reference(p))


# --------------------------------------------------------------------------
# branches

@dataclass(frozen=True)
class BranchRoot:
    x1: float
    stability: str
    eigen_max_real: float

    @property
    def stable(self) -> bool:
        return self.stability == "stable"


@dataclass(frozen=True)
class BranchSet:
    sweep_value: float
    roots: tuple[BranchRoot, ...] = field(default=())
    error: str | None = None

    @property
    def count(self) -> int:
        return len(self.roots)

    @property
    def stable_count(self) -> int:
        return sum(r.stable for r in self.roots)


def classify(params: SystemParams, state: ss.SteadyState) -> tuple[str, float]:
    lam = ss.max_real_eigenvalue(params, state)
    if abs(lam) <= MARGINAL_BAND * params.Omega1:
        return "marginal", lam
    return ("stable" if lam < 0 else "unstable"), lam


def branches(params: SystemParams, sweep_value: float = float("nan")) -> BranchSet:
    """Quintic roots at one parameter point with their Jacobian stability."""
    try:
        roots = solve_quintic(quintic_coefficients(params))
        out = []
        for x1 in roots:
            state = ss.state_from_x1(params, x1, equal_detunings=True)
            label, lam = classify(params, state)
            out.append(BranchRoot(x1, label, lam))
        return BranchSet(sweep_value, tuple(out))
    except (ArithmeticError, ValueError) as exc:
        return BranchSet(sweep_value, (), f"{type(exc).__name__}: {exc}")


SWEEP_VARIABLES = ("Pc", "Delta1")


def sweep_branches(params: SystemParams, variable: str, start: float,
                   stop: float, points: int) -> list[BranchSet]:
    """Branch sets along a sweep of ``Pc`` [W] or ``Delta1`` [rad/s].

    A failure at one point is recorded in that point's ``error`` field.
    """
    if variable not in SWEEP_VARIABLES:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
    if points < 2:
        raise ValueError("points must be >= 2")
    out = []
    for value in np.linspace(start, stop, points):
        value = float(value)
        if variable == "Pc":
            p = params.replace(Pc=value)
        else:
            p = params.replace(Delta1=value, Delta2=value)
        out.append(branches(p, value))
    return out


def multi_root_intervals(sets: list[BranchSet], count: int) -> list[tuple[float, float]]:
    """Contiguous sweep ranges where exactly ``count`` real roots exist."""
    intervals = []
    start = None
    prev = None
    for bs in sets:
        if bs.count == count and bs.error is None:
            if start is None:
                start = bs.sweep_value
            prev = bs.sweep_value
        elif start is not None:
            intervals.append((start, prev))
            start = None
    if start is not None:
        intervals.append((start, prev))
    return intervals


def equal_detuning_states(params: SystemParams) -> list[ss.SteadyState]:
    """Full steady states for every quintic root, ascending in ``x1``."""
    roots = solve_quintic(quintic_coefficients(params))
    return [ss.state_from_x1(params, x1, equal_detunings=True) for x1 in roots]
