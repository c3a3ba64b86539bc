"""ARMA(2,1) contact-duration model: identification tools, estimation, forecasting.

Durations of successive contacts (and of the gaps between them) are modelled as

    C_i = mu + phi1 (C_{i-1} - mu) + phi2 (C_{i-2} - mu) + theta1 eps_{i-1} + eps_i

The AR part is estimated with the order-2 Yule-Walker equations on biased
sample autocovariances. The MA coefficient is identified from the lag-1
autocorrelation of the AR residuals. :class:`ArmaOnlineState` keeps only a
handful of running sums, so a node can refit after every new observation
without storing the series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

MIN_HISTORY = 5
"""Observations required before the AR/MA parameters are estimated."""

_MAX_LAG = 3  # residual lag-1 correlation needs autocovariances up to lag 3


class DegenerateSeriesError(ValueError):
    """Raised when a series has zero variance."""


class InsufficientDataError(ValueError):
    """Raised when a series is too short for the requested computation."""


class SingularSystemError(ValueError):
    """Raised when a Yule-Walker or Durbin-Levinson system cannot be solved."""


class NonStationaryError(ValueError):
    """Raised when AR coefficients fall outside the stationarity triangle."""


def is_stationary_ar2(phi1: float, phi2: float) -> bool:
    return phi1 + phi2 < 1.0 and phi2 - phi1 < 1.0 and abs(phi2) < 1.0


@dataclass
class ArmaParams:
    mu: float
    phi1: float = 0.0
    phi2: float = 0.0
    theta1: float = 0.0
    sigma2: float = 0.0

    @property
    def stationary(self) -> bool:
        return is_stationary_ar2(self.phi1, self.phi2)

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.mu, self.phi1, self.phi2, self.theta1, self.sigma2)


@dataclass
class StationarityReport:
    mean_stable: bool
    autocov_stable: bool

    @property
    def passed(self) -> bool:
        return self.mean_stable and self.autocov_stable


# --- identification ---------------------------------------------------------


def _autocov(y: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (denominator n) sample autocovariances for lags 0..max_lag."""
    n = len(y)
    d = y - y.mean()
    out = np.zeros(max_lag + 1)
    for k in range(min(max_lag, n - 1) + 1):
        out[k] = np.dot(d[: n - k], d[k:]) / n
    return out


def acf(series: Sequence[float], max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho_0..rho_max_lag.

    Uses the biased autocovariance estimator, which keeps every |rho_k| <= 1.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be positive")
    y = np.asarray(series, dtype=float)
    if len(y) < max_lag + 2:
        raise InsufficientDataError(
            f"need at least {max_lag + 2} values for max_lag={max_lag}, got {len(y)}"
        )
    gamma = _autocov(y, max_lag)
    if gamma[0] <= 0.0:
        raise DegenerateSeriesError("series has zero variance")
    rho = gamma / gamma[0]
    rho[0] = 1.0
    return rho


def pacf(acf_values: Sequence[float], max_lag: int) -> np.ndarray:
    """Partial autocorrelations alpha_1..alpha_max_lag via Durbin-Levinson."""
    rho = np.asarray(acf_values, dtype=float)
    if max_lag < 1:
        raise ValueError("max_lag must be positive")
    if len(rho) < max_lag + 1:
        raise InsufficientDataError(f"need {max_lag + 1} autocorrelations, got {len(rho)}")
    if rho[0] != 1.0:
        raise ValueError("acf_values[0] must be 1")

    alphas = np.zeros(max_lag)
    phi = np.zeros(0)
    v = 1.0  # normalized prediction-error variance
    for k in range(1, max_lag + 1):
        if v <= 0.0:
            raise SingularSystemError(f"prediction-error variance vanished at lag {k - 1}")
        a = (rho[k] - np.dot(phi, rho[k - 1 : 0 : -1])) / v
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
        alphas[k - 1] = a
    return alphas


def _bartlett_lags(n: int) -> int:
    return max(1, min(n - 3, int(4.0 * (n / 100.0) ** (2.0 / 9.0))))


def _long_run_factor(gamma: np.ndarray, lags: int) -> float:
    """Variance inflation of a sample mean under autocorrelation (Bartlett weights)."""
    rho = gamma[1 : lags + 1] / gamma[0]
    weights = 1.0 - np.arange(1, lags + 1) / (lags + 1.0)
    return max(1.0, 1.0 + 2.0 * float(np.dot(weights, rho)))


def _gamma1_variance(gamma: np.ndarray, lags: int) -> float:
    """Bartlett's n * Var(gamma_hat_1): sum over k of gamma_k^2 + gamma_{k+1} gamma_{k-1}."""
    g = lambda k: gamma[abs(k)]  # noqa: E731
    return max(
        gamma[0] ** 2, sum(g(k) ** 2 + g(k + 1) * g(k - 1) for k in range(-lags, lags + 1))
    )


def stationarity_check(
    series: Sequence[float], num_windows: int = 4, tolerance_sigma: float = 3.0
) -> StationarityReport:
    """Windowed test of constant mean and lag-only dependent autocovariance.

    Bands are widened by the long-run variance factor so that ordinary serial
    correlation is not mistaken for a drifting mean.
    """
    if num_windows < 2:
        raise ValueError("num_windows must be at least 2")
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 4 * num_windows:
        raise InsufficientDataError(f"need at least {4 * num_windows} values, got {n}")

    if float(np.var(y)) == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    lags = _bartlett_lags(n)
    gamma = _autocov(y, lags + 1)

    mean = y.mean()
    s = y.std(ddof=1)
    n_w = n // num_windows
    band = tolerance_sigma * math.sqrt(_long_run_factor(gamma, lags)) * s / math.sqrt(n_w)
    window_means = [y[i * n_w : (i + 1) * n_w].mean() for i in range(num_windows)]
    mean_stable = all(abs(m - mean) <= band for m in window_means)

    # the two halves' lag-1 autocovariances differ by noise of variance ~ 2 V / (n / 2)
    half = n // 2
    g1_first = _autocov(y[:half], 1)[1]
    g1_second = _autocov(y[half:], 1)[1]
    autocov_band = tolerance_sigma * math.sqrt(4.0 * _gamma1_variance(gamma, lags) / n)
    autocov_stable = abs(g1_first - g1_second) <= autocov_band
    return StationarityReport(bool(mean_stable), bool(autocov_stable))


# --- estimation -------------------------------------------------------------


def yule_walker_ar2(gamma0: float, gamma1: float, gamma2: float) -> Tuple[float, float, float]:
    """Solve the order-2 Yule-Walker system; returns (phi1, phi2, sigma2)."""
    if gamma0 <= 0.0 or abs(gamma1) >= gamma0:
        raise SingularSystemError(
            f"Yule-Walker matrix singular (gamma0={gamma0!r}, gamma1={gamma1!r})"
        )
    det = gamma0 * gamma0 - gamma1 * gamma1
    phi1 = gamma1 * (gamma0 - gamma2) / det
    phi2 = (gamma0 * gamma2 - gamma1 * gamma1) / det
    sigma2 = max(0.0, gamma0 - phi1 * gamma1 - phi2 * gamma2)
    return phi1, phi2, sigma2


def estimate_ma1(residual_rho1: float) -> float:
    """Invertible MA(1) coefficient matching a lag-1 autocorrelation.

    Solves rho = theta / (1 + theta^2). No real invertible root exists for
    |rho| >= 0.5, so the result is clamped to +/-1 there.
    """
    r = float(residual_rho1)
    if r == 0.0:
        return 0.0
    if abs(r) >= 0.5:
        return math.copysign(1.0, r)
    # rationalized form of (1 - sqrt(1 - 4r^2)) / 2r; no cancellation for small r
    return 2.0 * r / (1.0 + math.sqrt(1.0 - 4.0 * r * r))


def _residual_rho1(phi1: float, phi2: float, gamma: Sequence[float]) -> float:
    """Lag-1 autocorrelation of x_t - phi1 x_{t-1} - phi2 x_{t-2}.

    Expressed through the autocovariances of x (lags 0..3) so it can be
    evaluated from running aggregates.
    """
    g0, g1, g2, g3 = gamma[0], gamma[1], gamma[2], gamma[3]
    a1, a2 = -phi1, -phi2
    c0 = g0 * (1.0 + a1 * a1 + a2 * a2) + 2.0 * g1 * (a1 + a1 * a2) + 2.0 * g2 * a2
    c1 = g1 * (1.0 + a2 + a1 * a1 + a2 * a2) + (g0 + g2) * (a1 + a1 * a2) + g3 * a2
    if c0 <= 0.0:
        return 0.0
    return max(-1.0, min(1.0, c1 / c0))


def params_from_autocov(mu: float, gamma: Sequence[float]) -> ArmaParams:
    """ARMA(2,1) estimate from a mean and autocovariances for lags 0..3.

    Falls back to a mean-only model when the Yule-Walker system is singular
    or its solution is not stationary.
    """
    gamma = [float(g) for g in gamma]
    try:
        phi1, phi2, sigma2 = yule_walker_ar2(gamma[0], gamma[1], gamma[2])
    except SingularSystemError:
        return ArmaParams(mu=mu, sigma2=max(0.0, gamma[0]))
    if not is_stationary_ar2(phi1, phi2):
        return ArmaParams(mu=mu, sigma2=max(0.0, gamma[0]))
    theta1 = estimate_ma1(_residual_rho1(phi1, phi2, gamma))
    return ArmaParams(mu=mu, phi1=phi1, phi2=phi2, theta1=theta1, sigma2=sigma2)


def fit_batch(series: Sequence[float]) -> ArmaParams:
    """Fit ARMA(2,1) to a whole series in one pass over centred data.

    This is the reference path for :func:`online_update`; both must agree
    to rounding.
    """
    y = np.asarray(series, dtype=float)
    if len(y) < MIN_HISTORY:
        mu = float(y.mean()) if len(y) else 0.0
        return ArmaParams(mu=mu)
    return params_from_autocov(float(y.mean()), _autocov(y, _MAX_LAG))


# --- online estimation ------------------------------------------------------


@dataclass
class ArmaOnlineState:
    """Running aggregates and current ARMA(2,1) estimate for one series.

    ``delta_t`` is the forecast returned before any observation arrives.
    """

    delta_t: float = 1.0
    n: int = 0
    sum_y: float = 0.0
    sum_sq: float = 0.0
    lag_products: List[float] = field(default_factory=lambda: [0.0] * _MAX_LAG)
    head: List[float] = field(default_factory=list)
    recent: List[float] = field(default_factory=list)  # last three values, newest last
    last_residual: float = 0.0
    last_forecast: float = 0.0
    params: ArmaParams = field(default_factory=lambda: ArmaParams(mu=0.0))

    @property
    def last_two(self) -> Tuple[float, float]:
        """(C_{i-1}, C_{i-2}); missing entries are reported as the mean."""
        r = self.recent
        mu = self.params.mu
        prev1 = r[-1] if len(r) >= 1 else mu
        prev2 = r[-2] if len(r) >= 2 else mu
        return prev1, prev2

    def mean(self) -> float:
        return self.sum_y / self.n if self.n else 0.0

    def autocov(self) -> List[float]:
        """Biased autocovariances for lags 0..3 from the running sums."""
        n = self.n
        gamma = [0.0] * (_MAX_LAG + 1)
        if n == 0:
            return gamma
        m = self.sum_y / n
        gamma[0] = max(0.0, self.sum_sq / n - m * m)
        tail = self.recent
        head_sum = tail_sum = 0.0
        for k in range(1, min(_MAX_LAG, n - 1) + 1):
            tail_sum += tail[-k]
            head_sum += self.head[k - 1]
            # sum(y_1..y_{n-k}) + sum(y_{k+1}..y_n) = 2 S - tail_sum - head_sum
            s = self.lag_products[k - 1] - m * (2.0 * self.sum_y - tail_sum - head_sum) + (n - k) * m * m
            gamma[k] = s / n
        return gamma

    def update(self, y_new: float) -> "ArmaOnlineState":
        return online_update(self, y_new)

    def forecast(self) -> float:
        return forecast_next(self)


def _predict(state: ArmaOnlineState) -> float:
    if state.n == 0:
        return state.delta_t
    p = state.params
    if state.n < MIN_HISTORY:
        return max(0.0, p.mu)
    prev1, prev2 = state.last_two
    value = (
        p.mu
        + p.phi1 * (prev1 - p.mu)
        + p.phi2 * (prev2 - p.mu)
        + p.theta1 * state.last_residual
    )
    return max(0.0, value)


def online_update(state: ArmaOnlineState, y_new: float) -> ArmaOnlineState:
    """Fold one observation into ``state`` and refit; returns the same object.

    The residual stored for the MA term is the error of the one-step
    forecast the state made before seeing ``y_new``.
    """
    y = float(y_new)
    if y < 0.0 or not math.isfinite(y):
        raise ValueError(f"durations must be finite and non-negative, got {y_new!r}")

    prediction = _predict(state)
    active = state.n >= MIN_HISTORY

    tail = state.recent
    lp = state.lag_products
    for k in range(1, len(tail) + 1):
        lp[k - 1] += y * tail[-k]
    state.n += 1
    state.sum_y += y
    state.sum_sq += y * y
    if len(state.head) < _MAX_LAG:
        state.head.append(y)
    tail.append(y)
    if len(tail) > _MAX_LAG:
        del tail[0]

    state.last_forecast = prediction
    state.last_residual = y - prediction if active else 0.0

    mu = state.sum_y / state.n
    if state.n >= MIN_HISTORY:
        state.params = params_from_autocov(mu, state.autocov())
    else:
        state.params = ArmaParams(mu=mu)
    return state


def forecast_next(state: ArmaOnlineState) -> float:
    """One-step-ahead forecast of the next value (never negative).

    The value is remembered as ``state.last_forecast``.
    """
    value = _predict(state)
    state.last_forecast = value
    return value


def simulate_arma(params: ArmaParams, n: int, seed: int, burn_in: int = 100) -> np.ndarray:
    """Draw ``n`` samples of a Gaussian ARMA(2,1) process with mean ``params.mu``."""
    if not params.stationary:
        raise NonStationaryError(
            f"(phi1, phi2)=({params.phi1}, {params.phi2}) is outside the stationarity triangle"
        )
    if params.sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    total = n + burn_in
    eps = rng.normal(0.0, math.sqrt(params.sigma2), size=total)
    x = np.zeros(total)
    for t in range(total):
        x1 = x[t - 1] if t >= 1 else 0.0
        x2 = x[t - 2] if t >= 2 else 0.0
        e1 = eps[t - 1] if t >= 1 else 0.0
        x[t] = params.phi1 * x1 + params.phi2 * x2 + params.theta1 * e1 + eps[t]
    return params.mu + x[burn_in:]
