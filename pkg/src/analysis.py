"""
Diagnostics extracted from simulation output
Peak trains, the decaying sin^2 envelope, central-amplitude decay laws,
train speeds and the standing wave inside the well.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from src.errors import ConfigurationError, WindowError
from src.state import (
    AngularProfile,
    EnvelopeFit,
    ExponentialFit,
    InteriorWavenumber,
    ObservableSeries,
    PacketSpec,
    PeakTrain,
    PotentialSpec,
    PowerLawFit,
    TrainSpeed,
)

logger = logging.getLogger(__name__)

MIN_WINDOW_SAMPLES = 20
FORMATION_FRACTION = 0.1


def reflected_region_1d(potential: PotentialSpec, x_min: float) -> Tuple[float, float]:
    return x_min, -5.0 * potential.width


def reflected_region_2d(potential: PotentialSpec, r_max: float) -> Tuple[float, float]:
    return 2.5 * potential.width, r_max


def default_power_law_window(packet: PacketSpec, mass: float, t_final: float) -> Tuple[float, float]:
    v = abs(packet.q) / mass
    start = 2.0 * abs(packet.x0) / v if v > 0 else 0.0
    return start, t_final


def _restrict(profile: AngularProfile, region: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = region
    mask = (profile.coordinate >= lo) & (profile.coordinate <= hi)
    if np.count_nonzero(mask) < 3:
        raise ConfigurationError(
            f"region [{lo}, {hi}] holds fewer than 3 samples of the profile", key="analysis.region"
        )
    return profile.coordinate[mask], profile.amplitude[mask]


def detect_peaks(
    profile: AngularProfile, region: Tuple[float, float], prominence: float = 0.05
) -> PeakTrain:
    """
    Local maxima of |psi| in region rising at least prominence * max above
    their higher flanking minimum.

    Args:
        profile: Amplitude samples
        region: Closed coordinate interval
        prominence: Fraction of the regional maximum

    Returns:
        PeakTrain with increasing positions
    """
    if not 0 < prominence < 1:
        raise ConfigurationError(f"prominence must lie in (0, 1), got {prominence}", key="analysis.prominence")
    x, y = _restrict(profile, region)
    peak_max = float(np.max(y))
    if peak_max <= 0:
        return PeakTrain(positions=[], heights=[], mean_spacing=0.0, spacing_cv=0.0)

    floor = prominence * peak_max
    indices, _ = find_peaks(y, height=floor, prominence=floor)
    positions = x[indices]
    heights = y[indices]

    mean_spacing, spacing_cv = 0.0, 0.0
    if indices.size >= 2:
        spacings = np.diff(positions)
        mean_spacing = float(np.mean(spacings))
        spacing_cv = float(min(np.std(spacings) / mean_spacing, 1.0))
    logger.debug("detected %d peaks in [%g, %g]", indices.size, region[0], region[1])
    return PeakTrain(
        positions=positions.tolist(),
        heights=heights.tolist(),
        mean_spacing=mean_spacing,
        spacing_cv=spacing_cv,
    )


def is_polychotomous(train: PeakTrain) -> bool:
    return train.count >= 3


def _envelope(x, amplitude, decay_rate, k, phase):
    return amplitude * np.exp(-decay_rate * np.abs(x)) * np.sin(k * x + phase) ** 2


def fit_envelope(
    profile: AngularProfile, region: Tuple[float, float], prominence: float = 0.05
) -> Optional[EnvelopeFit]:
    """
    Least-squares fit of A e^{-lambda|x|} sin^2(kx + phase) to |psi| in region.

    Seeds k from the mean peak spacing and lambda from a log-linear fit of the
    peak heights. Returns None (wide-packet regime) when fewer than 3 peaks exist.
    """
    train = detect_peaks(profile, region, prominence)
    if train.count < 3:
        logger.warning("envelope fit not applicable: %d peak(s) in region", train.count)
        return None

    x, y = _restrict(profile, region)
    positions = np.asarray(train.positions)
    heights = np.asarray(train.heights)
    k0 = math.pi / train.mean_spacing
    slope, intercept = np.polyfit(np.abs(positions), np.log(heights), 1)
    lambda0 = max(-slope, 1e-6)
    amplitude0 = math.exp(intercept)
    phase0 = (math.pi / 2 - k0 * positions[0]) % math.pi

    try:
        params, _ = curve_fit(
            _envelope, x, y, p0=[amplitude0, lambda0, k0, phase0], maxfev=20000
        )
    except RuntimeError as e:
        logger.warning("envelope fit did not converge: %s", e)
        return None
    amplitude, decay_rate, k, phase = (float(v) for v in params)
    if k < 0:
        k, phase = -k, -phase
    residual = float(np.sqrt(np.mean((_envelope(x, *params) - y) ** 2)) / np.max(y))
    if decay_rate <= 0:
        logger.warning("fitted decay rate %.3g is not positive", decay_rate)
        return None
    return EnvelopeFit(
        decay_rate=decay_rate,
        k=k,
        amplitude=amplitude,
        phase=phase % math.pi,
        residual=residual,
    )


def _window(
    series: ObservableSeries, channel: str, window: Tuple[float, float]
) -> Tuple[np.ndarray, np.ndarray]:
    t = series.times(channel)
    values = series.values(channel)
    mask = (t >= window[0]) & (t <= window[1])
    t, values = t[mask], values[mask]
    if t.size < MIN_WINDOW_SAMPLES:
        raise WindowError(
            f"window [{window[0]}, {window[1]}] holds {t.size} samples of '{channel}', "
            f"need at least {MIN_WINDOW_SAMPLES}",
            key="analysis.fit_window",
        )
    if np.any(values <= 0) or np.any(t <= 0):
        raise WindowError(
            f"'{channel}' has non-positive samples in [{window[0]}, {window[1]}]",
            key="analysis.fit_window",
        )
    return t, values


def fit_power_law(
    series: ObservableSeries, window: Tuple[float, float], channel: str = "center_amplitude"
) -> PowerLawFit:
    """Ordinary least squares of log value against log t: value = C t^-exponent"""
    t, values = _window(series, channel, window)
    slope, intercept = np.polyfit(np.log(t), np.log(values), 1)
    predicted = intercept + slope * np.log(t)
    residual = float(np.sqrt(np.mean((np.log(values) - predicted) ** 2)))
    return PowerLawFit(
        exponent=float(-slope),
        prefactor=float(math.exp(intercept)),
        fit_window=(float(window[0]), float(window[1])),
        residual=residual,
        n_samples=int(t.size),
    )


def fit_exponential_decay(
    series: ObservableSeries, window: Tuple[float, float], channel: str = "center_amplitude"
) -> ExponentialFit:
    """Least squares of log value against t: value = C e^{-rate t}"""
    t, values = _window(series, channel, window)
    slope, intercept = np.polyfit(t, np.log(values), 1)
    predicted = intercept + slope * t
    residual = float(np.sqrt(np.mean((np.log(values) - predicted) ** 2)))
    return ExponentialFit(
        rate=float(-slope),
        prefactor=float(math.exp(intercept)),
        fit_window=(float(window[0]), float(window[1])),
        residual=residual,
    )


def centroid(profile: AngularProfile, region: Tuple[float, float]) -> float:
    """Norm-weighted mean position of the profile inside region"""
    x, y = _restrict(profile, region)
    density = y * y
    mass = trapezoid(density, x)
    if mass <= 0:
        raise ConfigurationError("profile vanishes in region", key="analysis.region")
    return float(trapezoid(density * x, x) / mass)


def train_speed(
    early: AngularProfile,
    late: AngularProfile,
    region: Tuple[float, float],
    mass: Optional[float] = None,
    prominence: float = 0.05,
) -> TrainSpeed:
    """
    Centroid speed of the wave train in region between two profile times.

    When mass is given, k/m from an envelope fit of the later profile is
    reported alongside.
    """
    dt = late.time - early.time
    if dt <= 0:
        raise ConfigurationError("profiles must be ordered in time", key="analysis")
    start = centroid(early, region)
    end = centroid(late, region)

    matched = detect_peaks(early, region, prominence).count >= 2 and detect_peaks(late, region, prominence).count >= 2
    if not matched:
        logger.warning("peak trains at t=%.4g and t=%.4g are not matchable", early.time, late.time)

    envelope_speed = None
    if mass is not None:
        fit = fit_envelope(late, region, prominence)
        if fit is not None:
            envelope_speed = fit.k / mass
    return TrainSpeed(
        speed=(end - start) / dt,
        centroid_start=start,
        centroid_end=end,
        envelope_speed=envelope_speed,
        trains_matched=matched,
    )


def zero_crossings(coordinate: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Linearly interpolated positions where values changes sign"""
    sign = np.sign(values)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    x0, x1 = coordinate[idx], coordinate[idx + 1]
    y0, y1 = values[idx], values[idx + 1]
    return x0 - y0 * (x1 - x0) / (y1 - y0)


def count_zero_crossings(profile: AngularProfile, region: Tuple[float, float]) -> int:
    """Sign changes of Re field inside region"""
    if profile.field is None:
        raise ConfigurationError("profile carries no complex field", key="output.profile_field")
    mask = (profile.coordinate > region[0]) & (profile.coordinate < region[1])
    return int(zero_crossings(profile.coordinate[mask], profile.field.real[mask]).size)


def interior_wavenumber(
    profile: AngularProfile,
    well_width: float,
    mass: Optional[float] = None,
    depth: Optional[float] = None,
) -> Optional[InteriorWavenumber]:
    """
    Wavenumber of the standing wave Re Phi inside the well.

    k' = pi / mean crossing spacing, using the crossings with r <= w and the
    first one beyond. n_wavelengths = round(k' w / 2pi) counts whole
    wavelengths across r < w, not the half-wavelengths k' w / pi.
    The implied k^2 = k'^2 - 2 m V0 is reported as computed, sign included.
    Returns None when fewer than two crossings are usable.
    """
    if profile.field is None:
        raise ConfigurationError("profile carries no complex field", key="output.profile_field")
    mask = (profile.coordinate > 0) & (profile.coordinate < 2.0 * well_width)
    if np.count_nonzero(mask) < 40:
        raise ConfigurationError(
            "interior profile needs at least 40 samples on (0, 2w)", key="output.profiles"
        )
    crossings = zero_crossings(profile.coordinate[mask], profile.field.real[mask])
    inside = crossings[crossings <= well_width]
    beyond = crossings[crossings > well_width]
    usable = np.concatenate([inside, beyond[:1]])
    if usable.size < 2:
        logger.warning("interior wavenumber not applicable: %d usable zero crossing(s)", usable.size)
        return None

    k_prime = math.pi / float(np.mean(np.diff(usable)))
    implied = None
    if mass is not None and depth is not None:
        implied = k_prime ** 2 - 2.0 * mass * depth
    return InteriorWavenumber(
        k_prime=k_prime,
        n_wavelengths=int(round(k_prime * well_width / (2.0 * math.pi))),
        implied_k_squared=implied,
        crossings=int(crossings.size),
    )


def formation_time(
    series: ObservableSeries, threshold: float = FORMATION_FRACTION, channel: str = "reflected_fraction"
) -> Optional[float]:
    """First sampled time at which the reflected-region fraction exceeds threshold"""
    t = series.times(channel)
    values = series.values(channel)
    above = np.nonzero(values > threshold)[0]
    if above.size == 0:
        logger.warning("reflected fraction never exceeds %.2f", threshold)
        return None
    return float(t[above[0]])


def formation_speed(
    profile: AngularProfile, region: Tuple[float, float], mass: float, prominence: float = 0.05
) -> Optional[float]:
    """k(t_formation) / m from the envelope fit of the profile at formation"""
    fit = fit_envelope(profile, region, prominence)
    return None if fit is None else fit.k / mass
