"""Azimuth radiation patterns of a two-port dual-polarized antenna.

A pattern holds co- and cross-polarized power gains sampled uniformly
around the azimuth cut for both ports. Gains are stored linear; files
carry them in dBi. Patterns are immutable after construction and all
operations are pure, so they can be shared freely across workers.

File format (plain text CSV):

    azimuth_deg, port1_co_dBi, port1_cross_dBi, port2_co_dBi, port2_cross_dBi

One header line, then data rows; ``#`` starts a comment. Azimuths are
strictly increasing degrees spanning exactly one full turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RadiationPattern",
    "Xpd",
    "PatternFormatError",
    "InfiniteXpdError",
    "load_pattern",
    "gain_at",
    "xpd_at",
    "scale_to_xpd",
]

MIN_SAMPLES = 8

_TWO_PI = 2.0 * math.pi


class PatternFormatError(ValueError):
    """Raised for a malformed pattern file; the message names the line."""


class InfiniteXpdError(ArithmeticError):
    """Signals a zero cross-polarized gain (XPD is infinite, not a number)."""


def _wrap_angle(phi: float | np.ndarray):
    """Wrap radians into [-pi, pi)."""
    return (np.asarray(phi) + math.pi) % _TWO_PI - math.pi


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """Uniformly sampled azimuth gains for two ports.

    ``angles`` are radians, strictly ascending over [-pi, pi);
    ``co`` and ``cross`` are (2, n) arrays of linear power gains,
    one row per port.
    """

    angles: np.ndarray
    co: np.ndarray
    cross: np.ndarray

    def __post_init__(self) -> None:
        angles = np.array(self.angles, dtype=float)
        co = np.array(self.co, dtype=float)
        cross = np.array(self.cross, dtype=float)
        n = angles.size
        if n < MIN_SAMPLES:
            raise ValueError(f"too few samples: {n} < {MIN_SAMPLES}")
        if co.shape != (2, n) or cross.shape != (2, n):
            raise ValueError("gain arrays must have shape (2, n_samples)")
        for name, arr in (("angle", angles), ("co", co), ("cross", cross)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} values must be finite")
        if np.any(co < 0) or np.any(cross < 0):
            raise ValueError("linear gains must be >= 0")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        if angles[0] < -math.pi or angles[-1] >= math.pi:
            raise ValueError("angles must lie in [-pi, pi)")
        step = _TWO_PI / n
        if np.max(np.abs(np.diff(angles) - step)) > 1e-9:
            raise ValueError("sampling must be uniform over one full turn")
        for arr in (angles, co, cross):
            arr.flags.writeable = False
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "co", co)
        object.__setattr__(self, "cross", cross)

    @property
    def n_samples(self) -> int:
        return self.angles.size

    @property
    def step(self) -> float:
        return _TWO_PI / self.n_samples

    def total_power(self) -> float:
        """Azimuth-trapezoid integral of co+cross gain summed over ports.

        On the closed periodic grid the trapezoid rule reduces to
        step * sum(gain).
        """
        return float(self.step * (self.co.sum() + self.cross.sum()))


@dataclass(frozen=True)
class Xpd:
    """Cross-polarization discrimination at one azimuth of one port."""

    value: float
    port: int
    azimuth: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValueError(f"XPD must be a positive finite ratio, got {self.value}")
        if self.port not in (1, 2):
            raise ValueError("port must be 1 or 2")

    def db(self) -> float:
        return 10.0 * math.log10(self.value)


def load_pattern(source: str) -> RadiationPattern:
    """Parse pattern-file content into a :class:`RadiationPattern`.

    The first non-comment line is the header and is skipped. Gains are
    converted from dBi to linear; azimuths are wrapped into [-pi, pi)
    and rotated into ascending order.

    Raises
    ------
    PatternFormatError
        Empty file, malformed row, non-monotone or duplicate angles,
        bad turn coverage, or too few samples; the message names the
        offending line where one exists.
    """
    rows: list[tuple[int, float, float, float, float, float]] = []
    header_seen = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            header_seen = True
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 5:
            raise PatternFormatError(
                f"line {lineno}: expected 5 comma-separated fields, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise PatternFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
        rows.append((lineno, *values))

    if not header_seen:
        raise PatternFormatError("empty pattern file")
    if not rows:
        raise PatternFormatError("pattern file has a header but no data rows")

    for (ln_a, deg_a, *_), (ln_b, deg_b, *_) in zip(rows[:-1], rows[1:]):
        if deg_b == deg_a:
            raise PatternFormatError(f"line {ln_b}: duplicate angle {deg_b} deg")
        if deg_b < deg_a:
            raise PatternFormatError(
                f"line {ln_b}: angle {deg_b} deg is not increasing (previous {deg_a})"
            )

    if len(rows) < MIN_SAMPLES:
        raise PatternFormatError(
            f"too few samples: {len(rows)} rows, need at least {MIN_SAMPLES}"
        )

    deg = np.array([r[1] for r in rows])
    span = deg[-1] - deg[0]
    step = 360.0 / len(rows)
    if abs(span - (360.0 - step)) > 1e-6:
        raise PatternFormatError(
            f"angles span {span:.6g} deg; rows must cover one full turn "
            f"(expected span {360.0 - step:.6g} deg for {len(rows)} samples)"
        )
    if np.max(np.abs(np.diff(deg) - step)) > 1e-6:
        raise PatternFormatError("angle sampling must be uniform")

    gains_db = np.array([r[2:] for r in rows])  # columns: co1, x1, co2, x2
    angles = np.asarray(_wrap_angle(np.radians(deg)))
    order = np.argsort(angles)
    angles = angles[order]
    gains = 10.0 ** (gains_db[order] / 10.0)
    return RadiationPattern(
        angles=angles,
        co=np.stack([gains[:, 0], gains[:, 2]]),
        cross=np.stack([gains[:, 1], gains[:, 3]]),
    )


def _interp_gain(pattern: RadiationPattern, azimuth: float, gains: np.ndarray) -> float:
    """Periodic interpolation, linear in dB between bracketing samples."""
    phi = float(_wrap_angle(azimuth))
    u = (phi - pattern.angles[0]) / pattern.step
    n = pattern.n_samples
    i0 = int(math.floor(u)) % n
    frac = u - math.floor(u)
    if frac < 1e-12:
        return float(gains[i0])
    if frac > 1.0 - 1e-12:
        return float(gains[(i0 + 1) % n])
    g_a = float(gains[i0])
    g_b = float(gains[(i0 + 1) % n])
    if g_a <= 0.0 or g_b <= 0.0:
        # dB interpolation is undefined at a null; fall back to linear
        return (1.0 - frac) * g_a + frac * g_b
    db = (1.0 - frac) * (10.0 * math.log10(g_a)) + frac * (10.0 * math.log10(g_b))
    return 10.0 ** (db / 10.0)


def gain_at(pattern: RadiationPattern, azimuth: float, port: int, pol: str) -> float:
    """Linear gain of ``port`` at ``azimuth`` for polarization ``co``/``cross``.

    Interpolates linearly in the dB domain between the two bracketing
    samples, periodically across +-pi; queries at sample angles return
    the stored value exactly.
    """
    if port not in (1, 2):
        raise ValueError("port must be 1 or 2")
    if pol == "co":
        gains = pattern.co[port - 1]
    elif pol == "cross":
        gains = pattern.cross[port - 1]
    else:
        raise ValueError("pol must be 'co' or 'cross'")
    return _interp_gain(pattern, azimuth, gains)


def xpd_at(pattern: RadiationPattern, azimuth: float, port: int) -> Xpd:
    """Co-to-cross gain ratio of ``port`` in the direction ``azimuth``.

    Raises
    ------
    InfiniteXpdError
        If the cross-polarized gain vanishes at the queried direction.
    """
    co = gain_at(pattern, azimuth, port, "co")
    cross = gain_at(pattern, azimuth, port, "cross")
    if cross == 0.0:
        raise InfiniteXpdError(
            f"cross-polarized gain of port {port} is zero at azimuth {azimuth:.6g}"
        )
    return Xpd(value=co / cross, port=port, azimuth=float(_wrap_angle(azimuth)))


def scale_to_xpd(
    pattern: RadiationPattern, target_xpd_db: float, reference_azimuth: float
) -> RadiationPattern:
    """Rescale the pattern so each port's XPD at the reference equals the target.

    Each port's co and cross cuts are multiplied by constants chosen so
    that (a) the XPD at ``reference_azimuth`` becomes ``target_xpd_db``
    for both ports and (b) each port's radiated power, the azimuth
    trapezoid integral of co+cross, is unchanged. Shapes within one
    polarization cut are untouched, so dB differences between angles
    are preserved.
    """
    if not math.isfinite(target_xpd_db):
        raise ValueError("target XPD must be finite (in dB)")
    target = 10.0 ** (target_xpd_db / 10.0)

    co_new = np.array(pattern.co)
    cross_new = np.array(pattern.cross)
    for port in (1, 2):
        current = xpd_at(pattern, reference_azimuth, port).value
        ratio = target / current
        p_co = float(pattern.co[port - 1].sum())
        p_cross = float(pattern.cross[port - 1].sum())
        cross_scale = (p_co + p_cross) / (ratio * p_co + p_cross)
        co_scale = ratio * cross_scale
        co_new[port - 1] *= co_scale
        cross_new[port - 1] *= cross_scale

    return RadiationPattern(angles=pattern.angles, co=co_new, cross=cross_new)
