"""Wigner-function reconstruction through the characteristic-function chain.

The reconstruction route is: per-phase characteristic functions (empirical
from samples, or tabulated analytically), unbiased axis rescaling by the
chain gain, then the 2-D inverse Fourier integral in polar coordinates

``W(q,p) = (1/(2 pi)^2) int_0^pi dtheta int_{-ximax}^{ximax}
           |xi| C(xi e^{i theta}) e^{-i xi (q cos theta + p sin theta)} dxi``

computed by trapezoid quadrature in both variables (the theta rule is the
uniform periodic trapezoid).  Statistical noise in empirical grids is tamed
by a Gaussian taper ``exp(-alpha xi^2)`` -- never by noise deconvolution,
which would amplify the tail noise exponentially.

The closed-form references: blurring a state by the Gaussian kernel
``B(q,p) = exp(-(q^2+p^2)/eps) / (pi eps)`` has an exact result for all four
supported states, used as the oracle for the numerical chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .channels import DetectionChain, damped_char_fn, effective_loss
from .errors import ConvolutionMarginError
from .homodyne import QuadratureDataset, uniform_phases
from .states import StateKind, StateSpec

#: An analytic characteristic grid should have decayed below this at xi_max.
_TRUNCATION_LIMIT = 0.01


@dataclass(frozen=True)
class PolarCharGrid:
    """Samples of ``C(xi e^{i theta})`` on a uniform polar grid.

    ``values[j, k]`` is ``C_theta_j(xi_k)``; ``xi`` runs uniformly from 0 and
    ``theta`` uniformly over ``[0, pi)``.  The Hermitian extension
    ``C(-xi) = conj(C(xi))`` is implied and used by the inversion.
    """

    xi: np.ndarray
    theta: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if xi.ndim != 1 or xi.size < 2 or xi[0] != 0.0:
            raise ValueError("xi must be a 1-D grid starting at 0")
        dxi = np.diff(xi)
        if dxi[0] <= 0 or np.max(np.abs(dxi - dxi[0])) > 1e-9 * dxi[0]:
            raise ValueError("xi grid must be uniform and increasing")
        if theta.ndim != 1 or theta.size < 1 or theta[0] != 0.0:
            raise ValueError("theta must be a 1-D grid starting at 0")
        if theta.size > 1:
            dth = np.diff(theta)
            if dth[0] <= 0 or np.max(np.abs(dth - dth[0])) > 1e-9 * dth[0]:
                raise ValueError("theta grid must be uniform and increasing")
            if theta[-1] >= math.pi * (1 + 1e-12):
                raise ValueError("theta grid must stay inside [0, pi)")
        if values.shape != (theta.size, xi.size):
            raise ValueError("values must have shape (n_theta, n_xi)")
        if not np.all(np.isfinite(values.view(float))):
            raise ValueError("characteristic values must be finite")
        for name, arr in (("xi", xi), ("theta", theta), ("values", values)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def xi_max(self) -> float:
        return float(self.xi[-1])


@dataclass(frozen=True)
class WignerGrid:
    """Real ``W(q, p)`` on a rectangular grid; ``values[i, j] = W(q_i, p_j)``."""

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("q_axis", "p_axis"):
            ax = np.asarray(getattr(self, name), dtype=float)
            if ax.ndim != 1 or ax.size < 2:
                raise ValueError(f"{name} must be a 1-D axis")
            d = np.diff(ax)
            if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
                raise ValueError(f"{name} must be uniform and strictly increasing")
            ax.flags.writeable = False
            object.__setattr__(self, name, ax)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.q_axis.size, self.p_axis.size):
            raise ValueError("values must have shape (len(q_axis), len(p_axis))")
        if not np.all(np.isfinite(values)):
            raise ValueError("Wigner values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dq(self) -> float:
        return float(self.q_axis[1] - self.q_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    def normalization(self) -> float:
        """Trapezoid integral of W over the grid."""
        return float(np.trapezoid(np.trapezoid(self.values, self.p_axis, axis=1),
                                  self.q_axis))


@dataclass(frozen=True)
class ReconstructionConfig:
    """Knobs of the characteristic-function chain.

    ``xi_max`` is the raw transform range (before gain rescaling); ``None``
    asks for an automatic choice.  ``grid_half_width`` may be a scalar, a
    ``(q, p)`` pair, or ``None`` for an estimate from the grid itself.
    ``apodization_alpha = None`` resolves to the default taper
    ``1e-3 / xi_max^2`` (on the rescaled axis); pass 0 for none.
    ``rescale_gain = None`` takes the gain from the chain.
    """

    xi_max: float | None = None
    n_xi: int = 512
    n_theta: int = 180
    grid_half_width: float | tuple[float, float] | None = None
    grid_n: int = 257
    apodization_alpha: float | None = None
    rescale_gain: float | None = None

    def __post_init__(self):
        if self.xi_max is not None and not self.xi_max > 0:
            raise ValueError("xi_max must be positive")
        if self.n_xi < 16:
            raise ValueError("n_xi must be >= 16")
        if self.n_theta < 8:
            raise ValueError("n_theta must be >= 8")
        if self.grid_n < 32:
            raise ValueError("grid_n must be >= 32")

    def resolved_alpha(self, xi_max: float) -> float:
        if self.apodization_alpha is not None:
            return float(self.apodization_alpha)
        return 1e-3 / xi_max ** 2

    def half_widths(self) -> tuple[float, float] | None:
        if self.grid_half_width is None:
            return None
        if np.isscalar(self.grid_half_width):
            w = float(self.grid_half_width)
            return (w, w)
        wq, wp = self.grid_half_width
        return (float(wq), float(wp))


def symmetric_axis(half_width: float, n: int) -> np.ndarray:
    """Uniform axis over ``[-half_width, half_width]``; exactly antisymmetric
    about 0 when ``n`` is odd, which enables the mirrored inversion path."""
    if n % 2 == 0:
        return np.linspace(-half_width, half_width, n)
    half = np.linspace(0.0, half_width, n // 2 + 1)
    return np.concatenate((-half[:0:-1], half))


def recommended_xi_max(state: StateSpec, chain: DetectionChain) -> float:
    """Raw transform range so the rescaled grid reaches ``12 / sqrt(lam_min)``,
    where ``lam_min = 1/s + eps_r`` is the slowest Gaussian decay rate of the
    rescaled characteristic function (its value there is ~1e-16)."""
    loss = effective_loss(chain)
    lam_min = 1.0 / state.s + loss.epsilon_r
    return 12.0 / math.sqrt(lam_min) / loss.gain_scale


def empirical_char_fn(dataset: QuadratureDataset, config: ReconstructionConfig) -> PolarCharGrid:
    """Direct empirical characteristic function, no histogram intermediary.

    ``C_theta(xi_k) = mean_j exp(i xi_k q_j)`` evaluated on the uniform xi
    grid through the power recurrence ``exp(i xi_k q) = exp(i dxi q)^k``
    (one complex exponential per sample, unit-modulus factors thereafter).
    """
    if config.xi_max is not None:
        xi_max = float(config.xi_max)
    else:
        # Past |C| ~ 1/sqrt(n) the empirical CF is pure noise; stop slightly
        # beyond that floor, set by the narrowest per-phase distribution.
        sigma_min = float(np.min(np.std(dataset.samples, axis=1)))
        if sigma_min <= 0:
            raise ValueError("cannot infer xi_max from a degenerate dataset")
        xi_max = 1.3 * math.sqrt(math.log(max(dataset.n_per_phase, 100))) / sigma_min
    xi = np.linspace(0.0, xi_max, config.n_xi)
    dxi = xi[1] - xi[0]

    values = np.empty((dataset.n_phases, config.n_xi), dtype=complex)
    for j in range(dataset.n_phases):
        row = dataset.samples[j]
        if row.size == 0:
            raise ValueError(f"phase {j} holds no samples")
        z = np.exp(1j * dxi * row)
        acc = np.ones_like(z)
        values[j, 0] = 1.0
        for k in range(1, config.n_xi):
            acc *= z
            values[j, k] = acc.mean()
    return PolarCharGrid(xi=xi, theta=dataset.phases, values=values)


def analytic_char_grid(state: StateSpec, chain: DetectionChain,
                       config: ReconstructionConfig) -> PolarCharGrid:
    """Noiseless reference: tabulated damped characteristic function."""
    xi_max = config.xi_max if config.xi_max is not None else recommended_xi_max(state, chain)
    xi = np.linspace(0.0, float(xi_max), config.n_xi)
    theta = uniform_phases(config.n_theta)
    values = np.empty((config.n_theta, config.n_xi), dtype=complex)
    for j, th in enumerate(theta):
        values[j] = damped_char_fn(state, chain, float(th), xi)
    return PolarCharGrid(xi=xi, theta=theta, values=values)


def unbiased_rescale(grid: PolarCharGrid, g: float) -> PolarCharGrid:
    """Reinterpret the xi axis in input-state units: axis times ``g``,
    values untouched (no interpolation).  The stored function then samples
    the unbiased reconstruction ``C'(z) = C(z) exp(-eps_r |z|^2 / 4)``."""
    if not g > 0:
        raise ValueError("rescale gain must be positive")
    return PolarCharGrid(xi=grid.xi * g, theta=grid.theta, values=grid.values)


def _estimate_half_widths(grid: PolarCharGrid) -> tuple[float, float]:
    """Grid extents from the CF curvature of each phase row: the marginal
    variance along direction theta is ``2 (1 - Re C_theta(xi)) / xi^2`` for
    small xi."""
    hw_q = hw_p = 0.0
    for j, th in enumerate(grid.theta):
        row = grid.values[j].real
        defect = 1.0 - row
        idx = np.argmax(defect > 1e-4)
        if defect[idx] <= 1e-4:
            continue
        var = 2.0 * defect[idx] / grid.xi[idx] ** 2
        sigma = math.sqrt(max(var, 0.0))
        hw_q = max(hw_q, 4.5 * sigma * abs(math.cos(th)))
        hw_p = max(hw_p, 4.5 * sigma * abs(math.sin(th)))
    if hw_q == 0.0 or hw_p == 0.0:
        raise ValueError("cannot estimate grid extents from this characteristic grid")
    return hw_q, hw_p


def _weighted_rows(grid: PolarCharGrid, alpha: float) -> np.ndarray:
    """Per-node quadrature weight |xi| * trapezoid * taper, applied to C."""
    xi = grid.xi
    w = np.full(xi.size, xi[1] - xi[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return grid.values * (w * xi * np.exp(-alpha * xi * xi))


def _invert_mirrored(grid, weighted, q_axis, p_axis):
    """Quadrant-factorized quadrature for axes antisymmetric about 0.

    For each theta the kernel ``exp(-i xi (q cos + p sin))`` splits into
    cos/sin outer factors; parity in q and p lets one quarter-size set of
    real matrix products serve all four quadrants exactly.
    """
    m = q_axis.size // 2
    qh = q_axis[m:]
    ph = p_axis[m:]
    n_half = m + 1
    sums = [np.zeros((n_half, n_half)) for _ in range(4)]  # cc, ss, sc, cs
    complex_grid = bool(np.any(weighted.imag != 0.0))

    for j, th in enumerate(grid.theta):
        aq = np.outer(grid.xi * math.cos(th), qh)
        bp = np.outer(grid.xi * math.sin(th), ph)
        cos_q, sin_q = np.cos(aq), np.sin(aq)
        cos_p, sin_p = np.cos(bp), np.sin(bp)
        d_re = weighted[j].real[:, None]
        sums[0] += cos_q.T @ (d_re * cos_p)
        sums[1] += sin_q.T @ (d_re * sin_p)
        if complex_grid:
            d_im = weighted[j].imag[:, None]
            sums[2] += sin_q.T @ (d_im * cos_p)
            sums[3] += cos_q.T @ (d_im * sin_p)

    ucc, uss, usc, ucs = sums
    quadrant = {
        (1, 1): ucc - uss + usc + ucs,
        (-1, 1): ucc + uss - usc + ucs,
        (1, -1): ucc + uss + usc - ucs,
        (-1, -1): ucc - uss - usc - ucs,
    }
    n = q_axis.size
    w = np.empty((n, n))
    w[m:, m:] = quadrant[(1, 1)]
    w[:m, m:] = quadrant[(-1, 1)][m:0:-1, :]
    w[m:, :m] = quadrant[(1, -1)][:, m:0:-1]
    w[:m, :m] = quadrant[(-1, -1)][m:0:-1, m:0:-1]
    return w


def _invert_general(grid, weighted, q_axis, p_axis):
    """Direct quadrature for arbitrary axes."""
    w = np.zeros((q_axis.size, p_axis.size))
    for j, th in enumerate(grid.theta):
        aq = np.outer(q_axis, grid.xi * math.cos(th))
        bp = np.outer(grid.xi * math.sin(th), p_axis)
        cos_q, sin_q = np.cos(aq), np.sin(aq)
        cos_p, sin_p = np.cos(bp), np.sin(bp)
        d_re = weighted[j].real[:, None]
        d_im = weighted[j].imag[:, None]
        # Re[C e^{-i xi u}] with u = q cos + p sin, expanded by angle addition.
        w += cos_q @ (d_re * cos_p) - sin_q @ (d_re * sin_p)
        if np.any(weighted[j].imag != 0.0):
            w += sin_q @ (d_im * cos_p) + cos_q @ (d_im * sin_p)
    return w


def invert_to_wigner(grid: PolarCharGrid, config: ReconstructionConfig) -> WignerGrid:
    """Evaluate the polar inverse-Fourier integral of a characteristic grid.

    Emits a truncation warning into the result metadata when the grid has
    not decayed below 1% at its edge.  The result also records the applied
    taper and its own normalization integral.
    """
    widths = config.half_widths()
    if widths is None:
        widths = _estimate_half_widths(grid)
    q_axis = symmetric_axis(widths[0], config.grid_n)
    p_axis = symmetric_axis(widths[1], config.grid_n)

    alpha = config.resolved_alpha(grid.xi_max)
    weighted = _weighted_rows(grid, alpha)

    mirrored = (q_axis.size % 2 == 1 and p_axis.size % 2 == 1
                and np.array_equal(q_axis, -q_axis[::-1])
                and np.array_equal(p_axis, -p_axis[::-1]))
    if mirrored:
        values = _invert_mirrored(grid, weighted, q_axis, p_axis)
    else:
        values = _invert_general(grid, weighted, q_axis, p_axis)
    dtheta = math.pi / grid.theta.size
    values *= dtheta / (2.0 * math.pi ** 2)
    # Euler-Maclaurin endpoint correction of the xi trapezoid: the integrand
    # xi*C*e^{-i xi u} has slope C_theta(0) at xi = 0, contributing the exact,
    # (q,p)-independent offset h^2/12 * sum_theta Re C_theta(0) to every node.
    dxi = float(grid.xi[1] - grid.xi[0])
    values += (dtheta / (2.0 * math.pi ** 2)) * (dxi * dxi / 12.0) * float(
        np.sum(grid.values[:, 0].real))

    warnings = []
    edge = float(np.max(np.abs(grid.values[:, -1])))
    if edge > _TRUNCATION_LIMIT:
        warnings.append(
            f"truncation: |C| = {edge:.3g} at xi_max = {grid.xi_max:.3g} "
            f"exceeds {_TRUNCATION_LIMIT}")
    out = WignerGrid(q_axis=q_axis, p_axis=p_axis, values=values,
                     meta={"warnings": warnings, "apodization_alpha": alpha,
                           "method": "polar-trapezoid"})
    out.meta["normalization"] = out.normalization()
    return out


def blur_kernel(epsilon: float, q, p):
    """Gaussian blurring kernel ``exp(-(q^2+p^2)/eps) / (pi eps)``."""
    if not epsilon > 0:
        raise ValueError("blur kernel requires epsilon > 0")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    out = np.exp(-(q * q + p * p) / epsilon) / (math.pi * epsilon)
    return out if out.ndim else float(out)


def convolve_blur(grid: WignerGrid, epsilon: float) -> WignerGrid:
    """Blur a Wigner grid by the Gaussian kernel of loss factor ``epsilon``.

    Method (bit-level): the kernel is sampled on the grid spacing out to a
    radius of ``5 sqrt(eps)``, renormalized to unit discrete mass, and
    applied with zero-padded FFT convolution
    (``scipy.signal.fftconvolve(..., mode="same")``), so the grid
    normalization is preserved to FFT round-off.  The kernel radius must fit
    in the grid margins: the band of that width along the border must carry
    a negligible fraction of the state.
    """
    if not epsilon > 0:
        raise ValueError("convolve_blur requires epsilon > 0")
    radius = 5.0 * math.sqrt(epsilon)
    half_q = float(grid.q_axis[-1])
    half_p = float(grid.p_axis[-1])
    if radius >= half_q or radius >= half_p:
        raise ConvolutionMarginError(
            f"kernel radius {radius:.3g} exceeds the grid half-extent; "
            f"pad the grid to at least +/-{radius:.3g} of clear margin")
    abs_w = np.abs(grid.values)
    total = abs_w.sum()
    iq = int(np.ceil(radius / grid.dq))
    ip = int(np.ceil(radius / grid.dp))
    border = total - abs_w[iq:-iq or None, ip:-ip or None].sum() if total > 0 else 0.0
    if total > 0 and border > 1e-9 * total:
        raise ConvolutionMarginError(
            f"grid border band of width {radius:.3g} carries {border / total:.2e} "
            f"of the state; pad the grid by {radius:.3g} on each side")

    nk_q = np.arange(-iq, iq + 1) * grid.dq
    nk_p = np.arange(-ip, ip + 1) * grid.dp
    kernel = blur_kernel(epsilon, nk_q[:, None], nk_p[None, :])
    kernel /= kernel.sum() * grid.dq * grid.dp
    blurred = fftconvolve(grid.values, kernel, mode="same") * grid.dq * grid.dp
    meta = dict(grid.meta)
    meta.update({"blur_epsilon": epsilon, "blur_method": "fftconvolve-same"})
    return WignerGrid(q_axis=grid.q_axis, p_axis=grid.p_axis, values=blurred, meta=meta)


def blurred_wigner_closed_form(state: StateSpec, epsilon_r: float, q, p):
    """Exact unbiased reconstruction of a state through loss ``epsilon_r``.

    With ``s = exp(2 r1)`` and ``e = epsilon_r``:

    * Gaussian states:
      ``exp(-q^2/(e+s) - p^2/(e+1/s)) / (pi sqrt((e+s)(e+1/s)))``
    * photon-bearing states, an extra polynomial factor:
      ``(2 q^2 (s e + 1)/(e + s) + 2 p^2 (e + s)/(s e + 1) + e^2 - 1)
      / ((e+s)(e+1/s))`` relative to the same Gaussian.

    ``epsilon_r = 0`` recovers the ideal Wigner functions.
    """
    if epsilon_r < 0:
        raise ValueError("epsilon_r must be >= 0")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    s = state.s
    e = float(epsilon_r)
    aq = e + s
    ap = e + 1.0 / s
    gauss = np.exp(-q * q / aq - p * p / ap) / (math.pi * math.sqrt(aq * ap))
    if state.kind in (StateKind.SINGLE_PHOTON, StateKind.SQUEEZED_SINGLE_PHOTON):
        poly = (2.0 * q * q * (s * e + 1.0) / aq
                + 2.0 * p * p * aq / (s * e + 1.0)
                + e * e - 1.0) / (aq * ap)
        out = poly * gauss
    else:
        out = gauss
    return out if out.ndim else float(out)


def closed_form_grid(state: StateSpec, epsilon_r: float, q_axis, p_axis) -> WignerGrid:
    """Closed-form (blurred) Wigner function evaluated on a grid."""
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    values = blurred_wigner_closed_form(state, epsilon_r,
                                        q_axis[:, None], p_axis[None, :])
    return WignerGrid(q_axis=q_axis, p_axis=p_axis, values=values,
                      meta={"warnings": [], "method": "closed-form",
                            "epsilon_r": float(epsilon_r)})


_GRID_SCHEMA = 1


def save_wigner_grid(grid: WignerGrid, csv_path, sidecar_path=None,
                     extras: dict | None = None) -> None:
    """Write the grid as CSV (axis header rows + value matrix) plus sidecar.

    Layout: row 1 is ``q_axis`` and row 2 ``p_axis`` (label then values);
    the following ``len(q_axis)`` rows hold ``W(q_i, p_j)`` for ascending
    ``j``.  All numbers carry 17 significant digits so the file round-trips
    bit exactly.
    """
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    with csv_path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("q_axis," + ",".join(f"{v:.17g}" for v in grid.q_axis) + "\n")
        fh.write("p_axis," + ",".join(f"{v:.17g}" for v in grid.p_axis) + "\n")
        for row in grid.values:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    sidecar = {
        "schema_version": _GRID_SCHEMA,
        "shape": [int(grid.q_axis.size), int(grid.p_axis.size)],
        "q_extent": [float(grid.q_axis[0]), float(grid.q_axis[-1])],
        "p_extent": [float(grid.p_axis[0]), float(grid.p_axis[-1])],
        "q_step": grid.dq,
        "p_step": grid.dp,
        "meta": grid.meta,
    }
    if extras:
        sidecar.update(extras)
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")


def load_wigner_grid(csv_path, sidecar_path=None) -> WignerGrid:
    """Inverse of :func:`save_wigner_grid`."""
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    meta = {}
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        if sidecar.get("schema_version") != _GRID_SCHEMA:
            raise ValueError(f"unsupported grid schema: {sidecar.get('schema_version')!r}")
        meta = sidecar.get("meta", {})
    with csv_path.open("r", encoding="utf-8") as fh:
        q_line = fh.readline().strip().split(",")
        p_line = fh.readline().strip().split(",")
        if q_line[0] != "q_axis" or p_line[0] != "p_axis":
            raise ValueError("missing q_axis/p_axis header rows")
        q_axis = np.array([float(v) for v in q_line[1:]])
        p_axis = np.array([float(v) for v in p_line[1:]])
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    return WignerGrid(q_axis=q_axis, p_axis=p_axis, values=values, meta=meta)
