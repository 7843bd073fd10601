"""Physical parameter set of the driven double-cavity system.

All quantities are stored in SI units with angular frequencies in rad/s.
Configuration files use ordinary frequencies in Hz and express detunings and
the tunnelling rate as multiples of the mechanical frequency; the conversion
happens only in :func:`from_config` / :func:`to_config`.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .errors import NegativeParameter, NonPositiveParameter, ParameterError

HBAR = 1.054571817e-34
TWO_PI = 2.0 * math.pi

#: Default control-laser frequency in Hz (about 1064 nm).
DEFAULT_OMEGA_C_HZ = 2.82e14

#: Omega/kappa below this ratio raises the resolved-sideband advisory.
RESOLVED_SIDEBAND_RATIO = 3.0

ADVISORY_RESOLVED_SIDEBAND = "not-resolved-sideband"
ADVISORY_WEAK_COUPLING = "not-strong-coupling"

_STRICTLY_POSITIVE = ("m1", "m2", "Omega1", "Omega2", "kappa", "omega_c", "hbar")
_NON_NEGATIVE = ("gamma1", "gamma2", "g", "Pc", "Pp")


@dataclass(frozen=True)
class SystemParams:
    """Constants and drive settings of the two-cavity, two-mirror model.

    Angular frequencies in rad/s, couplings ``G1``, ``G2`` in rad/(s m),
    masses in kg and powers in W.  ``Delta1``/``Delta2`` are the bare
    detunings of the control laser from cavities A and B.
    """

    m1: float
    m2: float
    Omega1: float
    Omega2: float
    gamma1: float
    gamma2: float
    kappa: float
    G1: float
    G2: float
    g: float
    Delta1: float
    Delta2: float
    Pc: float
    Pp: float
    omega_c: float = TWO_PI * DEFAULT_OMEGA_C_HZ
    hbar: float = HBAR
    L1: float | None = None
    L2: float | None = None
    advisories: tuple[str, ...] = field(default=(), compare=False)

    @property
    def eps_c(self) -> float:
        """Control drive amplitude in sqrt(photons/s)."""
        return drive_amplitude(self.Pc, self.omega_c, self.hbar)

    @property
    def eps_p(self) -> float:
        """Probe drive amplitude, evaluated at the control frequency."""
        return drive_amplitude(self.Pp, self.omega_c, self.hbar)

    @property
    def Omega_m(self) -> float:
        return self.Omega1

    def replace(self, **changes) -> "SystemParams":
        """Copy with ``changes`` applied; advisories are recomputed."""
        return validate(dataclasses.replace(self, advisories=(), **changes))


def drive_amplitude(P: float, omega: float, hbar: float = HBAR) -> float:
    """Input field amplitude ``sqrt(P / (hbar omega))`` for power ``P``."""
    if P < 0:
        raise NegativeParameter("P")
    if omega <= 0:
        raise NonPositiveParameter("omega")
    return math.sqrt(P / (hbar * omega))


def radiation_shift_scale(params: SystemParams) -> float:
    """Largest detuning shift the control drive can induce on cavity A [rad/s].

    Uses the resonant photon number ``4 eps_c**2 / kappa``.
    """
    p = params
    n_max = 4.0 * p.eps_c**2 / p.kappa
    return p.hbar * p.G1**2 * n_max / (p.m1 * p.Omega1**2)


def validate(params: SystemParams) -> SystemParams:
    """Check parameter invariants and attach advisory flags.

    Raises :class:`NonPositiveParameter` / :class:`NegativeParameter` on
    violations.  Advisories never raise.
    """
    for name in _STRICTLY_POSITIVE:
        value = getattr(params, name)
        if not value > 0 or not math.isfinite(value):
            raise NonPositiveParameter(name)
    for name in _NON_NEGATIVE:
        value = getattr(params, name)
        if not value >= 0 or not math.isfinite(value):
            raise NegativeParameter(name)
    for name in ("G1", "G2", "Delta1", "Delta2"):
        if not math.isfinite(getattr(params, name)):
            raise ParameterError(name, f"parameter {name!r} must be finite")

    advisories = []
    if min(params.Omega1, params.Omega2) < RESOLVED_SIDEBAND_RATIO * params.kappa:
        advisories.append(ADVISORY_RESOLVED_SIDEBAND)
    if radiation_shift_scale(params) <= params.kappa:
        advisories.append(ADVISORY_WEAK_COUPLING)
    advisories = tuple(advisories)
    if advisories == params.advisories:
        return params
    return dataclasses.replace(params, advisories=advisories)


# --------------------------------------------------------------------------
# configuration files

REQUIRED_KEYS = (
    "m1_kg", "m2_kg", "omega_m_hz", "gamma_hz", "kappa_hz",
    "g1_hz_per_m", "g2_hz_per_m", "g_tunnel_over_omega_m",
    "delta1_over_omega_m", "delta2_over_omega_m", "pc_w", "pp_w",
)
OPTIONAL_KEYS = ("omega_c_hz", "l1_m", "l2_m", "omega_m2_hz", "gamma2_hz")
CONFIG_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS

#: Reference device parameters shared by the figure presets (config units).
REFERENCE_DEFAULTS = {
    "m1_kg": 2e-11,
    "m2_kg": 2e-11,
    "omega_m_hz": 5.18e7,
    "gamma_hz": 4.1e4,
    "kappa_hz": 1.5e7,
    "g1_hz_per_m": 1.8e19,
    "g2_hz_per_m": 6.0e18,
}


def from_config(cfg: dict) -> SystemParams:
    """Build validated :class:`SystemParams` from a config mapping."""
    unknown = sorted(set(cfg) - set(CONFIG_KEYS))
    if unknown:
        raise ParameterError(unknown[0], f"unknown config key {unknown[0]!r}")
    missing = [k for k in REQUIRED_KEYS if k not in cfg]
    if missing:
        raise ParameterError(missing[0], f"missing config key {missing[0]!r}")

    def num(key, default=None):
        value = cfg.get(key, default)
        if value is None:
            return None
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ParameterError(key, f"config key {key!r} is not a number: {value!r}")

    omega1 = TWO_PI * num("omega_m_hz")
    omega2 = TWO_PI * num("omega_m2_hz", cfg["omega_m_hz"])
    gamma1 = TWO_PI * num("gamma_hz")
    gamma2 = TWO_PI * num("gamma2_hz", cfg["gamma_hz"])
    params = SystemParams(
        m1=num("m1_kg"),
        m2=num("m2_kg"),
        Omega1=omega1,
        Omega2=omega2,
        gamma1=gamma1,
        gamma2=gamma2,
        kappa=TWO_PI * num("kappa_hz"),
        G1=TWO_PI * num("g1_hz_per_m"),
        G2=TWO_PI * num("g2_hz_per_m"),
        g=num("g_tunnel_over_omega_m") * omega1,
        Delta1=num("delta1_over_omega_m") * omega1,
        Delta2=num("delta2_over_omega_m") * omega1,
        Pc=num("pc_w"),
        Pp=num("pp_w"),
        omega_c=TWO_PI * num("omega_c_hz", DEFAULT_OMEGA_C_HZ),
        L1=num("l1_m"),
        L2=num("l2_m"),
    )
    return validate(params)


def to_config(params: SystemParams) -> dict:
    """Inverse of :func:`from_config`."""
    p = params
    cfg = {
        "m1_kg": p.m1,
        "m2_kg": p.m2,
        "omega_m_hz": p.Omega1 / TWO_PI,
        "gamma_hz": p.gamma1 / TWO_PI,
        "kappa_hz": p.kappa / TWO_PI,
        "g1_hz_per_m": p.G1 / TWO_PI,
        "g2_hz_per_m": p.G2 / TWO_PI,
        "g_tunnel_over_omega_m": p.g / p.Omega1,
        "delta1_over_omega_m": p.Delta1 / p.Omega1,
        "delta2_over_omega_m": p.Delta2 / p.Omega1,
        "pc_w": p.Pc,
        "pp_w": p.Pp,
        "omega_c_hz": p.omega_c / TWO_PI,
    }
    if p.Omega2 != p.Omega1:
        cfg["omega_m2_hz"] = p.Omega2 / TWO_PI
    if p.gamma2 != p.gamma1:
        cfg["gamma2_hz"] = p.gamma2 / TWO_PI
    if p.L1 is not None:
        cfg["l1_m"] = p.L1
    if p.L2 is not None:
        cfg["l2_m"] = p.L2
    return cfg


def reference_params(**overrides) -> SystemParams:
    """Reference parameter set with config-unit ``overrides`` applied.

    Detunings default to ``-Omega_m`` and the tunnelling rate to zero.
    """
    cfg = dict(REFERENCE_DEFAULTS)
    cfg.update(
        g_tunnel_over_omega_m=0.0,
        delta1_over_omega_m=-1.0,
        delta2_over_omega_m=-1.0,
        pc_w=0.03,
        pp_w=1e-6,
    )
    cfg.update(overrides)
    return from_config(cfg)
