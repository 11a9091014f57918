"""Loss and amplification model of the detection chain.

The chain consists of an input beamsplitter (power transmissivity ``eta_i``),
an optional travelling-wave phase-sensitive amplifier with bulk absorption,
and a detection beamsplitter (``eta_d``) that also absorbs the amplifier's
output losses.  Any chain reduces to two numbers used by the reconstruction:

* the effective loss factor
  ``eps_r = eps_i + (2 sigma_a^2 + eps_d e^{-2r}) / eta_i`` with
  ``eps_i = (1 - eta_i)/eta_i`` and ``eps_d = (1 - eta_d)/eta_d``,
* the rescaling gain ``g = sqrt(eta_i eta_d) e^r``.

Here ``r = r_raw - k d / 2`` is the effective squeezing of a crystal with
bulk absorption coefficient ``k`` and length ``d``, and
``sigma_a^2 = (k d / 4r)(1 - e^{-2r})`` is the variance of the absorption
noise translated to the amplifier input.

The measured quadrature then has the characteristic function

``C'_theta(xi) = C_theta(g xi) exp(-eps_r g^2 xi^2 / 4)``

which expands, in terms of the individual noise ports, to a damping factor
``exp[-(xi^2/2)((1-eta_i) eta_d e^{2r}/2 + sigma_a^2 eta_d e^{2r}
+ (1-eta_d)/2)]``.  Note the ``e^{2r}`` on the absorption term: the bulk
noise enters before the full gain and is amplified with it, which is what
makes the expansion consistent with ``eps_r`` above.

All operations are pure functions over frozen parameter records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CharFnOverflowError
from .states import StateSpec, _exponent_and_prefactor

#: Exponents below this underflow double precision; the factor is clamped to 0.
_EXP_UNDERFLOW = -745.0


@dataclass(frozen=True)
class CrystalParams:
    """Bulk absorption coefficient ``k`` (1/m) and crystal length ``d`` (m)."""

    k: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 0.0):
            raise ValueError(f"absorption coefficient k must be >= 0, got {self.k}")
        if not (math.isfinite(self.d) and self.d > 0.0):
            raise ValueError(f"crystal length d must be > 0, got {self.d}")
        if self.k * self.d >= 1.0:
            raise ValueError(
                f"k*d = {self.k * self.d} is outside the thin-absorber regime (k*d < 1)")

    @property
    def kd(self) -> float:
        return self.k * self.d


#: 1 mm BBO crystal with k = 0.1 / m bulk absorption.
BBO_CRYSTAL = CrystalParams(k=0.1, d=1e-3)


@dataclass(frozen=True)
class AmplifierParams:
    """Raw (lossless) parametric gain plus the crystal it is realised in."""

    r_raw: float
    crystal: CrystalParams = BBO_CRYSTAL

    def __post_init__(self):
        if not (math.isfinite(self.r_raw) and self.r_raw >= 0.0):
            raise ValueError(f"r_raw must be finite and >= 0, got {self.r_raw}")
        if self.r_raw < self.crystal.kd / 2.0:
            raise ValueError(
                f"r_raw = {self.r_raw} below absorption floor k*d/2 = "
                f"{self.crystal.kd / 2.0}; effective squeezing would be negative")


@dataclass(frozen=True)
class DetectionChain:
    """Input loss, detector efficiency and the optional pre-amplifier.

    An absent amplifier is equivalent to ``r_raw = 0`` with a lossless
    crystal.  The amplifier's output losses are not a separate port; fold
    them into ``eta_d``.
    """

    eta_i: float = 1.0
    eta_d: float = 1.0
    amp: AmplifierParams | None = None

    def __post_init__(self):
        for name in ("eta_i", "eta_d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")


@dataclass(frozen=True)
class EffectiveLoss:
    """Chain reduction: loss factor, rescaling gain, effective squeezing.

    ``gain_scale`` is stored rather than recomputed so that a measured
    calibration value can be injected in its place.
    """

    epsilon_r: float
    gain_scale: float
    r_eff: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon_r) and self.epsilon_r >= 0.0):
            raise ValueError(f"epsilon_r must be >= 0, got {self.epsilon_r}")
        if not (math.isfinite(self.gain_scale) and self.gain_scale > 0.0):
            raise ValueError(f"gain_scale must be > 0, got {self.gain_scale}")


def chain_to_dict(chain: DetectionChain) -> dict:
    """JSON-ready description of a chain (sidecars, manifests)."""
    amp = None
    if chain.amp is not None:
        amp = {"r_raw": chain.amp.r_raw,
               "crystal_k": chain.amp.crystal.k,
               "crystal_d": chain.amp.crystal.d}
    return {"eta_i": chain.eta_i, "eta_d": chain.eta_d, "amp": amp}


def chain_from_dict(data: dict) -> DetectionChain:
    """Inverse of :func:`chain_to_dict`."""
    amp = None
    if data.get("amp") is not None:
        a = data["amp"]
        amp = AmplifierParams(r_raw=float(a["r_raw"]),
                              crystal=CrystalParams(k=float(a["crystal_k"]),
                                                    d=float(a["crystal_d"])))
    return DetectionChain(eta_i=float(data["eta_i"]), eta_d=float(data["eta_d"]), amp=amp)


def effective_squeezing(amp: AmplifierParams) -> float:
    """Total detected squeezing ``r = r_raw - k d / 2``."""
    r = amp.r_raw - amp.crystal.kd / 2.0
    if r < 0.0:
        raise ValueError(f"effective squeezing is negative: {r}")
    return r


def bulk_noise_variance(amp: AmplifierParams) -> float:
    """Variance ``sigma_a^2 = (k d / 4r)(1 - e^{-2r})`` of the bulk noise.

    ``r = 0`` is a removable singularity; the analytic limit ``k d / 2`` is
    returned there.
    """
    kd = amp.crystal.kd
    r = effective_squeezing(amp)
    if r == 0.0:
        return kd / 2.0
    return kd / (4.0 * r) * -math.expm1(-2.0 * r)


def bulk_noise_variance_layered(amp: AmplifierParams, n_layers: int) -> float:
    """Finite-layer bulk noise ``(kd/2N)(1 - e^{-2r}) / (e^{2r/N} - 1)``.

    Discretises the crystal into ``n_layers`` slabs; converges to
    :func:`bulk_noise_variance` as ``O(1/N)`` and serves as its oracle.
    """
    n = int(n_layers)
    if n < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    kd = amp.crystal.kd
    r = effective_squeezing(amp)
    if r == 0.0:
        return kd / 2.0
    return kd / (2.0 * n) * -math.expm1(-2.0 * r) / math.expm1(2.0 * r / n)


def _chain_parts(chain: DetectionChain) -> tuple[float, float]:
    """Effective squeezing and bulk noise variance, zero without amplifier."""
    if chain.amp is None:
        return 0.0, 0.0
    return effective_squeezing(chain.amp), bulk_noise_variance(chain.amp)


def effective_loss(chain: DetectionChain) -> EffectiveLoss:
    """Reduce a chain to ``(epsilon_r, gain_scale, r_eff)``.

    Without an amplifier and with ``eta_i = 1`` this recovers the plain
    detection-loss factor ``eps_d = (1 - eta_d)/eta_d``.
    """
    r, sigma2 = _chain_parts(chain)
    if r > 700.0:
        raise CharFnOverflowError(f"gain sqrt(eta_i eta_d) e^r overflows for r = {r}")
    eps_i = (1.0 - chain.eta_i) / chain.eta_i
    eps_d = (1.0 - chain.eta_d) / chain.eta_d
    eps_r = eps_i + (2.0 * sigma2 + eps_d * math.exp(-2.0 * r)) / chain.eta_i
    gain = math.sqrt(chain.eta_i * chain.eta_d) * math.exp(r)
    return EffectiveLoss(epsilon_r=eps_r, gain_scale=gain, r_eff=r)


def damped_char_fn(state: StateSpec, chain: DetectionChain, theta: float, xi):
    """Characteristic function of the measured (raw-scale) quadrature.

    Evaluates ``C_theta(g xi) exp(-eps_r g^2 xi^2 / 4)`` with
    ``g = sqrt(eta_i eta_d) e^r``; the combined exponent is assembled in
    log space and clamped to zero once it underflows double precision, so
    the result is always finite.  Non-finite intermediates raise
    ``CharFnOverflowError`` instead of propagating silently.
    """
    xi = np.asarray(xi, dtype=float)
    if not np.all(np.isfinite(xi)):
        raise ValueError("damped_char_fn: xi must be finite")
    if not (0.0 <= theta < math.pi):
        raise ValueError(f"theta must lie in [0, pi), got {theta}")

    loss = effective_loss(chain)
    g = loss.gain_scale
    arg = g * xi
    if not np.all(np.isfinite(arg)):
        raise CharFnOverflowError(
            f"scaled argument g*xi overflows (g = {g}, max |xi| = {np.max(np.abs(xi))})")

    u, pref = _exponent_and_prefactor(state, arg * math.cos(theta), arg * math.sin(theta))
    exponent = -u - loss.epsilon_r * arg * arg / 4.0
    if not np.all(exponent <= 0.0):
        raise CharFnOverflowError("non-finite exponent in damped characteristic function")
    vals = np.where(exponent < _EXP_UNDERFLOW, 0.0,
                    pref * np.exp(np.maximum(exponent, _EXP_UNDERFLOW)))
    if not np.all(np.isfinite(vals)):
        raise CharFnOverflowError("non-finite value in damped characteristic function")
    out = vals.astype(complex)
    return out if out.ndim else complex(out)
