"""Least-squares estimation of model parameters from power curves and noise spectra.

Three fits live here:

* :func:`fit_linear` -- ordinary least squares of output vs pump power,
  reporting the slope (conversion efficiency) and the x-intercept as the
  linear-model threshold.
* :func:`fit_power_curve` -- two-parameter fit of the square-root power law
  ``2*eps*(sqrt(P_th*P_p) - P_th)`` for ``(P_th, eps)``.
* :func:`fit_diff_spectrum` -- fit of the Lorentzian twin-beam dip
  ``1 - eta/(1 + (f/gamma)**2)`` for ``(gamma, eta)`` with box constraints
  ``gamma > 0``, ``0 <= eta <= 1``.

The nonlinear fits run a damped Gauss-Newton iteration with analytic
Jacobians and a Levenberg-Marquardt damping schedule: damping multiplies by
10 on a rejected step, divides by 10 on an accepted one, starting from 1e-3,
with the damping applied to the scaled diagonal of the normal matrix (which
makes the iteration invariant under rescaling of either parameter axis).
Convergence is declared when the relative parameter change of an accepted
step drops below 1e-9, with a cap of 200 iterations.

Data points below the current threshold iterate contribute a residual equal
to the full observed output (the model is clamped to zero there), which
keeps the objective continuous while the threshold moves.

Parameter uncertainties are 1-sigma values from the residual-variance-scaled
inverse normal matrix; :func:`bootstrap_power_fit` cross-checks them by
resampling.  :func:`grid_search_oracle` is a deliberately brute-force
reference minimizer used by the test suite to bound the fitter's optimality
gap; it shares nothing with the Gauss-Newton path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DomainViolationError,
    InsufficientDataError,
    InvalidParameterError,
    SingularFitError,
    UnidentifiableError,
)
from .opo import NoiseSpectrum, OperatingPoint

__all__ = [
    "PowerDataset",
    "FitResult",
    "power_model",
    "power_model_jacobian",
    "fit_linear",
    "fit_power_curve",
    "fit_diff_spectrum",
    "grid_search_oracle",
    "bootstrap_power_fit",
]


@dataclass(frozen=True)
class PowerDataset:
    """Measured (pump power, output power) pairs in mW, optionally weighted."""

    p_pump_mw: NDArray[np.float64]
    p_out_mw: NDArray[np.float64]
    weights: NDArray[np.float64] | None = None

    def __post_init__(self):
        pump = np.atleast_1d(np.asarray(self.p_pump_mw, dtype=float))
        out = np.atleast_1d(np.asarray(self.p_out_mw, dtype=float))
        if pump.shape != out.shape or pump.ndim != 1:
            raise InvalidParameterError("pump and output arrays must be 1-D, same length")
        if pump.size < 2:
            raise InsufficientDataError("need at least two data points")
        if np.any(pump <= 0):
            raise InvalidParameterError("pump powers must be positive")
        if np.unique(pump).size != pump.size:
            raise InvalidParameterError("pump powers must be distinct")
        w = self.weights
        if w is not None:
            w = np.atleast_1d(np.asarray(w, dtype=float))
            if w.shape != pump.shape or np.any(w <= 0):
                raise InvalidParameterError("weights must be positive, one per point")
            w.setflags(write=False)
        pump.setflags(write=False)
        out.setflags(write=False)
        object.__setattr__(self, "p_pump_mw", pump)
        object.__setattr__(self, "p_out_mw", out)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.p_pump_mw.size


@dataclass(frozen=True)
class FitResult:
    """Parameter estimates with 1-sigma uncertainties and fit diagnostics.

    ``residual_norm`` is the (weighted) sum of squared residuals.
    """

    params: dict[str, float]
    sigmas: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    message: str = ""


def power_model(p_pump_mw, p_threshold_mw: float, epsilon: float):
    """Square-root power law, clamped to zero below threshold."""
    pump = np.atleast_1d(np.asarray(p_pump_mw, dtype=float))
    out = np.zeros(pump.shape)
    above = pump >= p_threshold_mw
    out[above] = 2.0 * epsilon * (
        np.sqrt(p_threshold_mw * pump[above]) - p_threshold_mw
    )
    return float(out[0]) if np.ndim(p_pump_mw) == 0 else out


def power_model_jacobian(p_pump_mw, p_threshold_mw: float, epsilon: float):
    """Analytic partials of :func:`power_model` w.r.t. (P_th, eps).

    Rows for points below the threshold are zero, matching the clamp.
    """
    pump = np.atleast_1d(np.asarray(p_pump_mw, dtype=float))
    jac = np.zeros((pump.size, 2))
    above = pump >= p_threshold_mw
    ratio = np.sqrt(pump[above] / p_threshold_mw)
    jac[above, 0] = 2.0 * epsilon * (0.5 * ratio - 1.0)
    jac[above, 1] = 2.0 * (np.sqrt(p_threshold_mw * pump[above]) - p_threshold_mw)
    return jac


def _lm_minimize(fun_jac, p0, *, guard=None, guard_message="iterate left the model domain",
                 max_iter=200, rel_tol=1e-9, damping=1e-3, damping_max=1e15):
    """Damped Gauss-Newton core shared by the nonlinear fits.

    ``fun_jac(p) -> (residuals, model_jacobian)`` with residuals y - f(p).
    ``guard(p) -> bool`` vetoes candidate iterates outside the domain; a veto
    counts as a rejected step, and persistent vetoes at maximum damping raise
    :class:`DomainViolationError`.
    """
    p = np.array(p0, dtype=float)
    if guard is not None and not guard(p):
        raise DomainViolationError(guard_message)
    r, jac = fun_jac(p)
    rss = float(r @ r)
    lam = damping
    converged = False
    message = "iteration cap reached"
    iterations = 0
    tiny = np.finfo(float).tiny
    while iterations < max_iter:
        iterations += 1
        normal = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(normal).copy()
        scale = diag.max()
        if scale <= 0:  # zero Jacobian: nothing left to do
            message = "zero gradient"
            break
        diag[diag <= 0] = scale
        try:
            step = np.linalg.solve(normal + lam * np.diag(diag), grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            if lam > damping_max:
                message = "singular normal matrix"
                break
            continue
        candidate = p + step
        if guard is not None and not guard(candidate):
            lam *= 10.0
            if lam > damping_max:
                raise DomainViolationError(guard_message)
            continue
        r_new, jac_new = fun_jac(candidate)
        rss_new = float(r_new @ r_new)
        if rss_new <= rss:
            rel_change = np.max(np.abs(step) / np.maximum(np.abs(p), tiny))
            p, r, jac, rss = candidate, r_new, jac_new, rss_new
            lam = max(lam / 10.0, 1e-15)
            if rel_change < rel_tol:
                converged = True
                message = "converged"
                break
        else:
            lam *= 10.0
            if lam > damping_max:
                message = "damping overflow without improvement"
                break
    return p, r, jac, rss, iterations, converged, message


def _covariance_sigmas(jac, rss, n_points, n_params):
    """1-sigma uncertainties from the residual-scaled inverse normal matrix."""
    dof = n_points - n_params
    if dof < 1:
        return np.zeros(n_params)
    normal = jac.T @ jac
    cov = np.linalg.pinv(normal) * (rss / dof)
    diag = np.clip(np.diag(cov), 0.0, None)
    return np.sqrt(diag)


def fit_linear(data: PowerDataset) -> FitResult:
    """Ordinary least squares line through the power data.

    Reports ``slope`` (conversion efficiency), ``intercept`` and
    ``x_intercept = -intercept/slope`` (the linear-model threshold), each
    with a 1-sigma uncertainty (zero when there are no degrees of freedom,
    i.e. exact two-point interpolation).
    """
    x = data.p_pump_mw
    y = data.p_out_mw
    if np.ptp(x) == 0:
        raise SingularFitError("all pump powers equal; line is undetermined")
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise SingularFitError("degenerate design matrix")
    slope, intercept = float(coef[0]), float(coef[1])
    resid = y - design @ coef
    rss = float(resid @ resid)
    dof = x.size - 2
    if dof >= 1:
        cov = np.linalg.inv(design.T @ design) * (rss / dof)
        sig_slope = float(np.sqrt(cov[0, 0]))
        sig_intercept = float(np.sqrt(cov[1, 1]))
        cov_ab = float(cov[0, 1])
    else:
        sig_slope = sig_intercept = cov_ab = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = -intercept / slope
        # delta method, including the slope/intercept covariance
        var_x0 = (
            (intercept / slope**2) ** 2 * sig_slope**2
            + sig_intercept**2 / slope**2
            - 2.0 * intercept / slope**3 * cov_ab
        )
    sig_x0 = float(np.sqrt(var_x0)) if np.isfinite(var_x0) and var_x0 > 0 else 0.0
    params = {"slope": slope, "intercept": intercept, "x_intercept": float(x0)}
    sigmas = {"slope": sig_slope, "intercept": sig_intercept, "x_intercept": sig_x0}
    ok = all(np.isfinite(v) for v in params.values())
    return FitResult(params, sigmas, rss, converged=ok, iterations=1,
                     message="ordinary least squares")


def _init_guess(init) -> tuple[float, float]:
    if isinstance(init, OperatingPoint):
        return init.p_threshold_mw, init.epsilon
    p_th, eps = init
    return float(p_th), float(eps)


def _fit_power_arrays(pump, out, weights, p_th0, eps0, *, max_iter=200) -> FitResult:
    sqrt_w = np.sqrt(weights) if weights is not None else None

    def fun_jac(p):
        residual = out - power_model(pump, p[0], p[1])
        jac = power_model_jacobian(pump, p[0], p[1])
        if sqrt_w is not None:
            residual = residual * sqrt_w
            jac = jac * sqrt_w[:, None]
        return residual, jac

    p, _, jac, rss, iterations, converged, message = _lm_minimize(
        fun_jac,
        (p_th0, eps0),
        guard=lambda q: q[0] > 0,
        guard_message="threshold iterate driven non-positive",
        max_iter=max_iter,
    )
    sig = _covariance_sigmas(jac, rss, pump.size, 2)
    return FitResult(
        params={"p_threshold_mw": float(p[0]), "epsilon": float(p[1])},
        sigmas={"p_threshold_mw": float(sig[0]), "epsilon": float(sig[1])},
        residual_norm=rss,
        converged=converged,
        iterations=iterations,
        message=message,
    )


def fit_power_curve(
    data: PowerDataset,
    init,
    *,
    window_factor: float | None = 13.0,
    weighting: str = "uniform",
    max_iter: int = 200,
) -> FitResult:
    """Two-parameter fit of the square-root power law for (P_th, eps).

    Parameters
    ----------
    data : PowerDataset
    init : OperatingPoint or (p_threshold_mw, epsilon)
        Starting point; the threshold guess also anchors the fit window.
    window_factor : float or None
        Keep only points with ``P_p <= window_factor * P_th_guess`` (the
        square-root law is known to hold only at moderate pump); ``None``
        fits everything.
    weighting : {"uniform", "inverse-y"}
        ``inverse-y`` down-weights large outputs (multiplicative noise).
    """
    p_th0, eps0 = _init_guess(init)
    if not p_th0 > 0 or not eps0 > 0:
        raise InvalidParameterError("initial guess must have positive parameters")
    pump, out = data.p_pump_mw, data.p_out_mw
    weights = data.weights
    if window_factor is not None:
        if not window_factor > 0:
            raise InvalidParameterError("window_factor must be positive")
        keep = pump <= window_factor * p_th0
        pump, out = pump[keep], out[keep]
        weights = weights[keep] if weights is not None else None
    if weighting == "inverse-y":
        if np.any(out <= 0):
            raise InvalidParameterError("inverse-y weighting needs positive outputs")
        extra = 1.0 / out
        weights = extra if weights is None else weights * extra
    elif weighting != "uniform":
        raise InvalidParameterError(f"unknown weighting {weighting!r}")
    if pump.size < 4:
        raise InsufficientDataError(
            f"need at least 4 points in the fit window, have {pump.size}"
        )
    return _fit_power_arrays(pump, out, weights, p_th0, eps0, max_iter=max_iter)


def fit_diff_spectrum(spec: NoiseSpectrum, *, init=None, max_iter: int = 200) -> FitResult:
    """Fit the twin-beam dip ``1 - eta/(1 + (f/gamma)**2)`` for (gamma, eta).

    ``gamma`` is returned in the unit of the spectrum's frequency axis; the
    efficiency product ``eta`` is constrained to [0, 1].  The starting point
    is derived from the data itself (dip depth and half-depth frequency)
    unless ``init=(gamma0, eta0)`` is given.

    Raises
    ------
    UnidentifiableError
        If the spectrum is flat (no dip to fit).
    """
    freqs = spec.freqs_hz
    values = spec.values
    if freqs.size < 5:
        raise InsufficientDataError("need at least 5 frequency bins")
    depth = 1.0 - values
    if np.ptp(values) < 1e-14 or depth.max() <= 0:
        raise UnidentifiableError("spectrum is flat: dip parameters are unidentifiable")
    if init is None:
        eta0 = float(np.clip(depth.max(), 1e-6, 1.0))
        # frequency where the dip reaches half its depth ~ gamma
        half_idx = int(np.argmin(np.abs(depth - 0.5 * eta0)))
        gamma0 = float(freqs[half_idx])
        if gamma0 <= 0:
            gamma0 = float(np.sqrt(freqs[0] * freqs[-1]))
    else:
        gamma0, eta0 = float(init[0]), float(init[1])

    def fun_jac(p):
        gamma, eta = p
        x2 = (freqs / gamma) ** 2
        denom = 1.0 + x2
        residual = values - (1.0 - eta / denom)
        jac = np.empty((freqs.size, 2))
        jac[:, 0] = -2.0 * eta * freqs**2 / (gamma**3 * denom**2)
        jac[:, 1] = -1.0 / denom
        return residual, jac

    p, _, jac, rss, iterations, converged, message = _lm_minimize(
        fun_jac,
        (gamma0, eta0),
        guard=lambda q: q[0] > 0 and 0.0 <= q[1] <= 1.0,
        guard_message="dip parameters driven outside their box",
        max_iter=max_iter,
    )
    sig = _covariance_sigmas(jac, rss, freqs.size, 2)
    return FitResult(
        params={"gamma_hz": float(p[0]), "eta_product": float(p[1])},
        sigmas={"gamma_hz": float(sig[0]), "eta_product": float(sig[1])},
        residual_norm=rss,
        converged=converged,
        iterations=iterations,
        message=message,
    )


def grid_search_oracle(objective, bounds, resolution: int = 64):
    """Exhaustive minimum of a two-parameter objective on a regular grid.

    Deliberately brute force: evaluates ``objective(a, b)`` at every grid
    node and returns ``((a_best, b_best), value)``.  Used to bound the
    nonlinear fitter's optimality gap in tests.

    Parameters
    ----------
    objective : callable
        ``objective(a, b) -> float``.
    bounds : ((a_lo, a_hi), (b_lo, b_hi))
        Finite bounds, inclusive.
    resolution : int
        Nodes per axis, at least 32.
    """
    if resolution < 32:
        raise InvalidParameterError("resolution must be at least 32 per axis")
    (a_lo, a_hi), (b_lo, b_hi) = bounds
    if not (np.isfinite([a_lo, a_hi, b_lo, b_hi]).all() and a_lo < a_hi and b_lo < b_hi):
        raise InvalidParameterError("bounds must be finite, ordered intervals")
    a_grid = np.linspace(a_lo, a_hi, resolution)
    b_grid = np.linspace(b_lo, b_hi, resolution)
    best = (a_grid[0], b_grid[0])
    best_value = np.inf
    for a in a_grid:
        for b in b_grid:
            value = float(objective(a, b))
            if value < best_value:
                best_value = value
                best = (float(a), float(b))
    return best, best_value


def bootstrap_power_fit(
    data: PowerDataset,
    init,
    *,
    n_replicates: int = 500,
    seed: int = 0,
    window_factor: float | None = 13.0,
    weighting: str = "uniform",
) -> dict[str, float]:
    """Bootstrap cross-check of the power-curve fit uncertainties.

    Resamples data points with replacement, refits each replicate, and
    returns the standard deviation of the estimates as
    ``{"p_threshold_mw": ..., "epsilon": ..., "n_converged": ...}``.
    Deterministic for a given seed; replicates are independent, so the loop
    could be farmed out as long as results are merged in index order.
    """
    p_th0, eps0 = _init_guess(init)
    pump, out = data.p_pump_mw, data.p_out_mw
    weights = data.weights
    if window_factor is not None:
        keep = pump <= window_factor * p_th0
        pump, out = pump[keep], out[keep]
        weights = weights[keep] if weights is not None else None
    if weighting == "inverse-y":
        extra = 1.0 / out
        weights = extra if weights is None else weights * extra
    n = pump.size
    if n < 4:
        raise InsufficientDataError("need at least 4 points to bootstrap")
    rng = np.random.default_rng(seed)
    index_sets = rng.integers(0, n, size=(n_replicates, n))
    estimates = []
    for idx in index_sets:
        w = weights[idx] if weights is not None else None
        try:
            result = _fit_power_arrays(pump[idx], out[idx], w, p_th0, eps0)
        except (DomainViolationError, np.linalg.LinAlgError):
            continue
        if result.converged:
            estimates.append(
                (result.params["p_threshold_mw"], result.params["epsilon"])
            )
    if len(estimates) < 2:
        raise UnidentifiableError("bootstrap produced fewer than two converged fits")
    arr = np.asarray(estimates)
    return {
        "p_threshold_mw": float(np.std(arr[:, 0], ddof=1)),
        "epsilon": float(np.std(arr[:, 1], ddof=1)),
        "n_converged": float(len(estimates)),
    }
