"""Time sweeps, peak extraction and parameter scans over the two-qubit model."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.optimize import minimize_scalar

from .entanglement import concurrence, concurrence_initial
from .model import InitialStateParams, analytic_state
from .qfi import qfi_gamma_closed, qfi_v_closed

__all__ = [
    "QUANTITIES",
    "DISPLAY_SCALE",
    "DEFAULT_POINTS",
    "TimeSeries",
    "PeakResult",
    "GammaTmScan",
    "MaxVsA",
    "normalize_quantity",
    "default_t_max",
    "evaluate",
    "sweep_time",
    "find_peak",
    "local_maxima",
    "gamma_tm_scan",
    "scan_summary",
    "max_qfi_vs_a",
    "oscillation_frequency",
    "coupling_from_frequency",
]

QUANTITIES = ("f_gamma", "f_v", "concurrence")
# figure-only amplification of the concurrence overlay; never applied to stored data
DISPLAY_SCALE = {"f_gamma": 50.0, "f_v": 15.0}
DEFAULT_POINTS = 2000

_ALIASES = {
    "f_gamma": "f_gamma", "fgamma": "f_gamma", "gamma": "f_gamma",
    "f_v": "f_v", "fv": "f_v", "v": "f_v",
    "concurrence": "concurrence", "concurrence_of_state": "concurrence",
}


def normalize_quantity(name):
    key = name.strip().lower().replace("-", "_")
    if key not in _ALIASES:
        raise ValueError(f"quantity must be one of {', '.join(QUANTITIES)}; got {name!r}")
    return _ALIASES[key]


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if t.shape != y.shape or t.ndim != 1:
            raise ValueError(f"times and values must be 1-d of equal length, got {t.shape} and {y.shape}")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(y)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class PeakResult:
    t_peak: float
    value_peak: float
    refinement_width: float


def default_t_max(quantity, gamma, v=0.0):
    """8/gamma covers rise and decay; for F_v at least three periods of cos(2vt)."""
    quantity = normalize_quantity(quantity)
    decay = 8.0 / gamma if gamma > 0 else 0.0
    if quantity == "f_v" and v != 0:
        return max(decay, 6 * math.pi / (2 * abs(v)))
    if decay == 0:
        raise ValueError("cannot choose t_max with gamma = 0 (and v = 0); pass t_max explicitly")
    return decay


def evaluate(quantity, times, a, chi=0.0, gamma=0.1, v=0.0):
    """Values of ``quantity`` on ``times`` (array)."""
    quantity = normalize_quantity(quantity)
    times = np.asarray(times, dtype=float)
    if quantity == "f_gamma":
        return np.asarray(qfi_gamma_closed(a, gamma, times), dtype=float)
    if quantity == "f_v":
        return np.asarray(qfi_v_closed(a, chi, gamma, v, times), dtype=float)
    p = InitialStateParams(a, chi)
    return np.array([concurrence(analytic_state(p, gamma, v, t)) for t in times])


def sweep_time(quantity, a, chi=0.0, gamma=0.1, v=0.0, t_max=None, n_points=DEFAULT_POINTS):
    """Sample ``quantity`` on the uniform grid ``[0, t_max]``."""
    quantity = normalize_quantity(quantity)
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if t_max is None:
        t_max = default_t_max(quantity, gamma, v)
    if not t_max > 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    t = np.linspace(0.0, t_max, int(n_points))
    meta = {"quantity": quantity, "a": a, "chi": chi, "gamma": gamma, "v": v,
            "t_max": float(t_max), "n_points": int(n_points)}
    return TimeSeries(t, evaluate(quantity, t, a, chi, gamma, v), meta)


def find_peak(series):
    """Global maximum refined by a parabola through the bracketing samples."""
    y = series.values
    if len(y) < 3 or np.ptp(y) == 0:
        raise ValueError("series is constant or too short to have a peak")
    k = int(np.argmax(y))
    if k == 0 or k == len(y) - 1:
        raise ValueError("maximum lies on the boundary of the grid; increase t_max or refine the grid")
    t = series.times
    h = t[k + 1] - t[k]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    curv = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
    t_peak = t[k] + shift * h
    value = y1 - 0.25 * (y0 - y2) * shift
    return PeakResult(float(t_peak), float(value), float(h))


def local_maxima(series):
    """Indices of strict interior local maxima."""
    y = series.values
    idx = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]))[0] + 1
    return idx


@dataclass(frozen=True)
class GammaTmScan:
    a: float
    gammas: np.ndarray
    t_peaks: np.ndarray
    products: np.ndarray  # gamma * t_M
    slope: float
    intercept: float
    r2: float
    cv: float


def _fit_line(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def scan_summary(a, gammas, t_peaks):
    """Linear fit of 1/t_M against gamma plus the spread of gamma*t_M."""
    gammas = np.asarray(gammas, dtype=float)
    t_peaks = np.asarray(t_peaks, dtype=float)
    prod = gammas * t_peaks
    slope, intercept, r2 = _fit_line(gammas, 1.0 / t_peaks)
    cv = float(np.std(prod) / np.mean(prod))
    return GammaTmScan(a, gammas, t_peaks, prod, slope, intercept, r2, cv)


def gamma_tm_scan(a, gammas, n_points=DEFAULT_POINTS):
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas <= 0):
        raise ValueError("all gammas must be > 0")
    if len(np.unique(gammas)) < 4:
        raise ValueError("need at least 4 distinct gamma values")
    t_peaks = [find_peak(sweep_time("f_gamma", a, gamma=g, n_points=n_points)).t_peak for g in gammas]
    return scan_summary(a, gammas, t_peaks)


@dataclass(frozen=True)
class MaxVsA:
    quantity: str
    a: np.ndarray
    max_values: np.ndarray
    t_peaks: np.ndarray
    concurrence: np.ndarray
    display_scale: float


def max_qfi_vs_a(quantity, a_grid, chi=0.0, gamma=0.1, v=0.0, t_max=None, n_points=DEFAULT_POINTS):
    """Peak QFI over time for each ``a``, with the initial-state concurrence."""
    quantity = normalize_quantity(quantity)
    if quantity == "concurrence":
        raise ValueError("max_qfi_vs_a takes f_gamma or f_v")
    a_grid = np.asarray(a_grid, dtype=float)
    peaks = [find_peak(sweep_time(quantity, a, chi, gamma, v, t_max, n_points)) for a in a_grid]
    return MaxVsA(
        quantity,
        a_grid,
        np.array([p.value_peak for p in peaks]),
        np.array([p.t_peak for p in peaks]),
        np.array([concurrence_initial(a) for a in a_grid]),
        DISPLAY_SCALE[quantity],
    )


def _dominant_frequency(t, y, pad):
    n = len(y)
    dt = t[1] - t[0]
    w = np.hanning(n)
    yw = (y - y.mean()) * w
    spec = np.abs(np.fft.rfft(yw, pad * n))
    freqs = np.fft.rfftfreq(pad * n, dt)
    k = int(np.argmax(spec[1:])) + 1
    if spec[k] <= 1e-12 * np.abs(yw).sum():
        raise ValueError("no oscillation: spectrum has no nonzero-frequency component")
    df = freqs[1] - freqs[0]

    def neg_power(f):
        return -abs(np.dot(yw, np.exp(-2j * np.pi * f * t)))

    res = minimize_scalar(neg_power, bounds=(max(freqs[k] - df, 0.0), freqs[k] + df),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def oscillation_frequency(series, pad=64):
    """Dominant cyclic frequency of a (possibly decaying) oscillation.

    A first DFT pass fixes a nominal period; the series is then divided by
    its moving maximum over that period to flatten the decay envelope, and
    the peak of the zero-padded, Hann-windowed spectrum of the flattened
    series is refined on the continuous transform. For F_v(t) the result is
    ``2v/pi``.
    """
    t, y = series.times, series.values
    if len(y) < 64:
        raise ValueError(f"need at least 64 samples, got {len(y)}")
    if np.ptp(y) == 0:
        raise ValueError("no oscillation: series is constant")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise ValueError("oscillation_frequency needs a uniform time grid")
    f0 = _dominant_frequency(t, y, pad)
    if f0 * (t[-1] - t[0]) < 3:
        raise ValueError("series covers fewer than 3 oscillation periods")
    win = max(3, int(round(1.0 / (f0 * dt))))
    env = maximum_filter1d(np.abs(y), win, mode="nearest")
    flat = np.where(env > 0, y / np.where(env > 0, env, 1.0), 0.0)
    return _dominant_frequency(t, flat, pad)


def coupling_from_frequency(freq):
    """Invert ``freq = 2v/pi``."""
    return 0.5 * math.pi * freq

