"""Closed-form phase-space descriptions of the supported input states.

Four pure states are modelled: vacuum, squeezed vacuum (BSV), the single
photon, and the squeezed single photon (SSP).  All formulas use the
convention in which the vacuum quadrature variance is 1/2, i.e. the vacuum
Wigner function is ``exp(-q^2 - p^2) / pi`` and its characteristic function
is ``exp(-|z|^2 / 4)``.

With ``s = exp(2 r1)`` (``r1`` the preparation squeezing parameter):

* BSV:  ``W(q, p) = exp(-q^2/s - s p^2) / pi``
* SSP:  ``W(q, p) = (2 q^2/s + 2 s p^2 - 1) exp(-q^2/s - s p^2) / pi``

Vacuum and the single photon are the ``r1 = 0`` special cases.  Everything
here is a pure function of immutable inputs and is safe to evaluate in
parallel over grid points.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

#: Largest accepted squeezing parameter; e^{2*10} still fits comfortably in a
#: double, anything larger risks overflow in the s = e^{2 r1} factors.
R1_MAX = 10.0


class StateKind(enum.Enum):
    VACUUM = "vacuum"
    SQUEEZED_VACUUM = "squeezed_vacuum"
    SINGLE_PHOTON = "single_photon"
    SQUEEZED_SINGLE_PHOTON = "squeezed_single_photon"


_SQUEEZED = {StateKind.SQUEEZED_VACUUM, StateKind.SQUEEZED_SINGLE_PHOTON}
_PHOTONIC = {StateKind.SINGLE_PHOTON, StateKind.SQUEEZED_SINGLE_PHOTON}


@dataclass(frozen=True)
class StateSpec:
    """Immutable choice of input state plus its preparation squeezing ``r1``.

    ``r1`` is ignored (fixed to 0) for the vacuum and the bare single photon.
    """

    kind: StateKind
    r1: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, StateKind):
            raise ValueError(f"kind must be a StateKind, got {self.kind!r}")
        r1 = float(self.r1)
        if not math.isfinite(r1) or r1 < 0.0:
            raise ValueError(f"r1 must be finite and >= 0, got {self.r1!r}")
        if r1 > R1_MAX:
            raise ValueError(f"r1 = {r1} exceeds the supported range [0, {R1_MAX}]")
        if self.kind not in _SQUEEZED:
            r1 = 0.0
        object.__setattr__(self, "r1", r1)

    @property
    def s(self) -> float:
        """Squeezing factor ``exp(2 r1)``."""
        return math.exp(2.0 * self.r1)

    @property
    def has_photon(self) -> bool:
        return self.kind in _PHOTONIC


def vacuum() -> StateSpec:
    return StateSpec(StateKind.VACUUM)


def squeezed_vacuum(r1: float) -> StateSpec:
    return StateSpec(StateKind.SQUEEZED_VACUUM, r1)


def single_photon() -> StateSpec:
    return StateSpec(StateKind.SINGLE_PHOTON)


def squeezed_single_photon(r1: float) -> StateSpec:
    return StateSpec(StateKind.SQUEEZED_SINGLE_PHOTON, r1)


def _check_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name}: inputs must be finite")


def wigner(state: StateSpec, q, p):
    """Wigner function of the ideal state at phase-space point(s) ``(q, p)``.

    Accepts scalars or broadcastable arrays; returns a float or ndarray.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    _check_finite("wigner", q, p)
    s = state.s
    gauss = np.exp(-q * q / s - s * p * p) / np.pi
    if state.has_photon:
        out = (2.0 * q * q / s + 2.0 * s * p * p - 1.0) * gauss
    else:
        out = gauss
    return out if out.ndim else float(out)


def _exponent_and_prefactor(state: StateSpec, z_re, z_im):
    """Gaussian exponent ``u`` and polynomial prefactor of ``C(z)``.

    The characteristic function factors as ``pref * exp(-u)`` with
    ``u = (s z'^2 + z''^2/s) / 4`` and ``pref = 1 - 2 u`` for the
    photon-bearing states (1 otherwise).  Exposing the pieces lets callers
    combine ``u`` with further damping exponents in log space.
    """
    s = state.s
    u = (s * z_re * z_re + z_im * z_im / s) / 4.0
    pref = (1.0 - 2.0 * u) if state.has_photon else np.ones_like(u)
    return u, pref


def char_fn(state: StateSpec, z_re, z_im):
    """Symmetrized characteristic function ``C(z) = <exp(i(z' q + z'' p))>``.

    Closed forms, with ``u = (s z'^2 + z''^2/s) / 4``:

    * Gaussian states: ``C = exp(-u)``
    * photon-bearing states: ``C = (1 - 2 u) exp(-u)``

    ``C(0) = 1`` and ``|C| <= 1`` everywhere.  The returned dtype is complex
    for interface uniformity with damped characteristic functions, although
    these ideal states have real ``C``.
    """
    z_re = np.asarray(z_re, dtype=float)
    z_im = np.asarray(z_im, dtype=float)
    _check_finite("char_fn", z_re, z_im)
    u, pref = _exponent_and_prefactor(state, z_re, z_im)
    # Guard the pref*exp(-u) product against inf*0 for extreme arguments.
    vals = np.where(u > 746.0, 0.0, pref * np.exp(-np.minimum(u, 746.0)))
    out = vals.astype(complex)
    return out if out.ndim else complex(out)


def marginal_variance(state: StateSpec, theta: float) -> float:
    """Variance of the ideal quadrature ``q_theta``.

    For the Gaussian states this is ``t/2`` with
    ``t = s cos^2(theta) + sin^2(theta)/s``; the photon-bearing states carry
    three units of it, ``3 t / 2``.
    """
    _check_theta(theta)
    s = state.s
    c, sn = math.cos(theta), math.sin(theta)
    t = s * c * c + sn * sn / s
    return 1.5 * t if state.has_photon else 0.5 * t


def _check_theta(theta: float):
    if not (0.0 <= theta < math.pi):
        raise ValueError(f"theta must lie in [0, pi), got {theta}; "
                         "callers own phase wrapping")


def marginal_pdf(state: StateSpec, theta: float, q):
    """Probability density of the quadrature ``q_theta`` for the ideal state.

    One-dimensional inverse Fourier transform of ``C(xi e^{i theta})`` in
    closed form, with ``t = s cos^2(theta) + sin^2(theta)/s``:

    * Gaussian states: normal density with variance ``t/2``
    * photon-bearing states: ``2 q^2 t^{-3/2} exp(-q^2/t) / sqrt(pi)``

    Both integrate to 1 over ``q``.
    """
    _check_theta(theta)
    q = np.asarray(q, dtype=float)
    _check_finite("marginal_pdf", q)
    s = state.s
    c, sn = math.cos(theta), math.sin(theta)
    t = s * c * c + sn * sn / s
    gauss = np.exp(-q * q / t)
    if state.has_photon:
        out = 2.0 * q * q * t ** -1.5 * gauss / math.sqrt(math.pi)
    else:
        out = gauss / math.sqrt(math.pi * t)
    return out if out.ndim else float(out)


def mean_photon_number(state: StateSpec) -> float:
    """Mean photon number: ``sinh^2 r1`` for BSV, ``3 sinh^2 r1 + 1`` for SSP."""
    n_sq = math.sinh(state.r1) ** 2
    if state.kind is StateKind.VACUUM:
        return 0.0
    if state.kind is StateKind.SINGLE_PHOTON:
        return 1.0
    if state.kind is StateKind.SQUEEZED_VACUUM:
        return n_sq
    return 3.0 * n_sq + 1.0
