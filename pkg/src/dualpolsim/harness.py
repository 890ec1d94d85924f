"""Scenario layer: config parsing, synthetic users, sweeps and reports.

A scenario is an INI-style text file with sections

* ``[users]`` or ``[generator]`` -- explicit user list, or bounds for a
  synthetic population standing in for a site-measured one,
* ``[sweep]``   -- XPD values (dB), models, trials per user, optional
  antenna pattern file,
* ``[link]``    -- system constants (all optional, LTE defaults),
* ``[seed]``    -- master seed.

Running a scenario produces, per (model, XPD) pair, a pooled empirical
throughput CDF over all users, plus a summary table mapping each XPD to
its correlation coefficient and equivalent antenna spacings. Outputs
are plain CSV plus one metadata text file.

Reproducibility: every (user, xpd, model) task draws from its own
generator seeded by the master seed and the task indices, so reports
are byte-identical for identical (config, seed) and pooling order does
not matter.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import (
    AodDistribution,
    SpacingQuery,
    dualpole_corr_approx,
    dualpole_corr_exact,
    equivalent_spacing,
)
from .chanmodel import PropagationGains
from .link import MODELS, LinkParams, UserChannel, cdf, evaluate_user
from .pattern import RadiationPattern, gain_at, load_pattern, scale_to_xpd, xpd_at

__all__ = [
    "ConfigError",
    "UserSpec",
    "GeneratorBounds",
    "Scenario",
    "TableRow",
    "RunReport",
    "parse_scenario",
    "generate_users",
    "run",
    "write_report",
]

DEFAULT_XPD_SWEEP_DB = (3.0, 5.0, 10.0, 20.0, 30.0)
DEFAULT_TABLE_SPREAD_DEG = 26.0


class ConfigError(ValueError):
    """Raised for malformed scenario configuration; names the location."""


@dataclass(frozen=True)
class UserSpec:
    """One simulated user position, reduced to link-relevant quantities."""

    user_id: str
    path_loss_db: float
    mean_aod: float
    aod_spread: float
    tap_powers: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if not math.isfinite(self.path_loss_db) or self.path_loss_db < 0:
            raise ValueError(f"user {self.user_id}: path loss must be >= 0 dB")
        if not self.aod_spread > 0:
            raise ValueError(f"user {self.user_id}: AoD spread must be positive")
        if len(self.tap_powers) == 0 or min(self.tap_powers) < 0 or sum(self.tap_powers) <= 0:
            raise ValueError(f"user {self.user_id}: invalid tap powers")


@dataclass(frozen=True)
class GeneratorBounds:
    """Knobs of the synthetic user population.

    Path loss follows a log-distance model over uniformly drawn
    distances; mean AoD is uniform in a sector; the Laplacian spread is
    fixed or drawn uniformly from a range.
    """

    distance_m: tuple[float, float] = (3.0, 60.0)
    path_loss_exponent: float = 3.0
    reference_loss_db: float = 41.0
    sector_deg: float = 120.0
    sector_center_deg: float = 0.0
    aod_spread_deg: tuple[float, float] = (26.0, 26.0)
    tap_powers: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        lo, hi = self.distance_m
        if not (0 < lo <= hi):
            raise ValueError("degenerate distance bounds: need 0 < min <= max")
        if not self.path_loss_exponent > 0:
            raise ValueError("path loss exponent must be positive")
        if not 0.0 <= self.sector_deg <= 360.0:
            raise ValueError("sector width must lie in [0, 360] degrees")
        s_lo, s_hi = self.aod_spread_deg
        if not (0 < s_lo <= s_hi):
            raise ValueError("degenerate AoD spread bounds")

    def path_loss_db(self, distance_m) -> np.ndarray:
        return self.reference_loss_db + 10.0 * self.path_loss_exponent * np.log10(
            np.asarray(distance_m, dtype=float)
        )


@dataclass(frozen=True)
class Scenario:
    """Fully validated simulation description."""

    users: tuple[UserSpec, ...]
    xpd_sweep_db: tuple[float, ...] = DEFAULT_XPD_SWEEP_DB
    models: tuple[str, ...] = ("ii",)
    link: LinkParams = field(default_factory=LinkParams)
    seed: int = 0
    trials_per_user: int = 1000
    pattern_file: str | None = None
    pattern_reference_deg: float = 0.0
    table_spread_deg: float = DEFAULT_TABLE_SPREAD_DEG
    wavelength: float = 1.0

    def __post_init__(self) -> None:
        if len(self.users) == 0:
            raise ValueError("scenario needs at least one user")
        if len(self.xpd_sweep_db) == 0:
            raise ValueError("scenario needs at least one XPD value")
        if self.trials_per_user < 1:
            raise ValueError("trials_per_user must be >= 1")
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ValueError(f"unknown models {bad}; expected subset of {MODELS}")


@dataclass(frozen=True)
class TableRow:
    """One XPD point of the summary table."""

    xpd_db: float
    rho_exact: float
    rho_approx: float
    d_iso_lambda: float
    d_lap_lambda: float
    spread_deg: float


@dataclass(frozen=True)
class RunReport:
    """Everything a scenario run produces."""

    table_rows: tuple[TableRow, ...]
    cdf_series: dict
    metadata: dict


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_SECTION_KEYS = {
    "generator": {
        "count", "distance_m", "path_loss_exponent", "reference_loss_db",
        "sector_deg", "sector_center_deg", "aod_spread_deg", "tap_powers",
    },
    "sweep": {
        "xpd_db", "models", "trials_per_user", "pattern_file",
        "pattern_reference_deg", "table_spread_deg",
    },
    "link": {
        "bandwidth_hz", "overhead", "max_spectral_efficiency",
        "noise_density_dbm_hz",
    },
    "seed": {"value"},
}

_USER_KEYS = {"path_loss_db", "mean_aod_deg", "spread_deg", "taps"}


def _floats(raw: str, where: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{where}: expected numbers, got {raw!r}") from None


def _one_float(raw: str, where: str) -> float:
    vals = _floats(raw, where)
    if len(vals) != 1:
        raise ConfigError(f"{where}: expected a single number, got {raw!r}")
    return vals[0]


def _one_int(raw: str, where: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None


def _range(raw: str, where: str) -> tuple[float, float]:
    vals = _floats(raw, where)
    if len(vals) == 1:
        return (vals[0], vals[0])
    if len(vals) == 2:
        return (vals[0], vals[1])
    raise ConfigError(f"{where}: expected one or two numbers, got {raw!r}")


def _parse_user_line(user_id: str, raw: str) -> UserSpec:
    where = f"[users] {user_id}"
    fields = {}
    for token in raw.split():
        if "=" not in token:
            raise ConfigError(f"{where}: expected key=value tokens, got {token!r}")
        key, _, value = token.partition("=")
        if key not in _USER_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        fields[key] = value
    missing = {"path_loss_db", "mean_aod_deg"} - fields.keys()
    if missing:
        raise ConfigError(f"{where}: missing required keys {sorted(missing)}")
    try:
        return UserSpec(
            user_id=user_id,
            path_loss_db=float(fields["path_loss_db"]),
            mean_aod=math.radians(float(fields["mean_aod_deg"])),
            aod_spread=math.radians(float(fields.get("spread_deg", "26"))),
            tap_powers=tuple(float(t) for t in fields.get("taps", "1").split(",")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_scenario(source: str) -> Scenario:
    """Parse and validate scenario text into a :class:`Scenario`.

    Omitted link parameters fall back to the LTE defaults. Raises
    :class:`ConfigError` naming the offending section and key for
    unknown keys, out-of-range values, duplicate user ids and missing
    required sections.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    known_sections = set(_SECTION_KEYS) | {"users"}
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown section [{section}]")
        if section == "users":
            continue
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    has_users = parser.has_section("users")
    has_gen = parser.has_section("generator")
    if not has_users and not has_gen:
        raise ConfigError("missing required section: provide [users] or [generator]")
    if has_users and has_gen:
        raise ConfigError("provide either [users] or [generator], not both")

    seed = 0
    if parser.has_section("seed"):
        seed = _one_int(parser["seed"].get("value", "0"), "[seed] value")
        if seed < 0:
            raise ConfigError("[seed] value: must be >= 0")

    # sweep
    sweep = parser["sweep"] if parser.has_section("sweep") else {}
    xpd_sweep = (
        _floats(sweep["xpd_db"], "[sweep] xpd_db")
        if "xpd_db" in sweep
        else DEFAULT_XPD_SWEEP_DB
    )
    models_raw = sweep.get("models", "ii")
    models = tuple(tok.strip() for tok in models_raw.replace(",", " ").split())
    trials = _one_int(sweep.get("trials_per_user", "1000"),
                      "[sweep] trials_per_user")
    pattern_file = sweep.get("pattern_file") or None
    pattern_ref = _one_float(sweep.get("pattern_reference_deg", "0"),
                             "[sweep] pattern_reference_deg")
    table_spread = _one_float(
        sweep.get("table_spread_deg", str(DEFAULT_TABLE_SPREAD_DEG)),
        "[sweep] table_spread_deg",
    )
    if not table_spread > 0:
        raise ConfigError("[sweep] table_spread_deg: must be positive")

    # link
    link_kwargs = {}
    if parser.has_section("link"):
        sec = parser["link"]
        mapping = {
            "bandwidth_hz": "effective_bandwidth",
            "overhead": "overhead_fraction",
            "max_spectral_efficiency": "max_spectral_efficiency",
            "noise_density_dbm_hz": "noise_density_dbm_hz",
        }
        for key, attr in mapping.items():
            if key in sec:
                link_kwargs[attr] = _one_float(sec[key], f"[link] {key}")
    try:
        link = LinkParams(**link_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[link]: {exc}") from None

    # users
    if has_users:
        try:
            users = tuple(
                _parse_user_line(uid, raw) for uid, raw in parser["users"].items()
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[users]: {exc}") from None
        if not users:
            raise ConfigError("[users] section is empty")
    else:
        sec = parser["generator"]
        count = _one_int(sec.get("count", "100"), "[generator] count")
        if count < 1:
            raise ConfigError("[generator] count: must be >= 1")
        try:
            bounds = GeneratorBounds(
                distance_m=_range(sec.get("distance_m", "3, 60"),
                                  "[generator] distance_m"),
                path_loss_exponent=_one_float(sec.get("path_loss_exponent", "3.0"),
                                              "[generator] path_loss_exponent"),
                reference_loss_db=_one_float(sec.get("reference_loss_db", "41.0"),
                                             "[generator] reference_loss_db"),
                sector_deg=_one_float(sec.get("sector_deg", "120"),
                                      "[generator] sector_deg"),
                sector_center_deg=_one_float(sec.get("sector_center_deg", "0"),
                                             "[generator] sector_center_deg"),
                aod_spread_deg=_range(sec.get("aod_spread_deg", "26"),
                                      "[generator] aod_spread_deg"),
                tap_powers=_floats(sec.get("tap_powers", "1.0"),
                                   "[generator] tap_powers"),
            )
        except ValueError as exc:
            raise ConfigError(f"[generator]: {exc}") from None
        # population substream: keyed away from the per-task streams,
        # which use small (xpd, model, user) indices
        population_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA0D]))
        users = tuple(generate_users(count, population_rng, bounds))

    try:
        return Scenario(
            users=users,
            xpd_sweep_db=xpd_sweep,
            models=models,
            link=link,
            seed=seed,
            trials_per_user=trials,
            pattern_file=pattern_file,
            pattern_reference_deg=pattern_ref,
            table_spread_deg=table_spread,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def generate_users(
    count: int, rng: np.random.Generator, bounds: GeneratorBounds
) -> list[UserSpec]:
    """Draw a synthetic user population within the given bounds.

    Distances are uniform between the bounds and mapped through the
    log-distance path loss; mean AoDs are uniform in the sector. The
    draw is fully determined by the generator state.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    d_lo, d_hi = bounds.distance_m
    distances = rng.uniform(d_lo, d_hi, count)
    half_sector = math.radians(bounds.sector_deg) / 2.0
    center = math.radians(bounds.sector_center_deg)
    mean_aods = center + rng.uniform(-half_sector, half_sector, count)
    s_lo, s_hi = bounds.aod_spread_deg
    spreads = np.radians(rng.uniform(s_lo, s_hi, count))
    losses = bounds.path_loss_db(distances)
    return [
        UserSpec(
            user_id=f"u{k:04d}",
            path_loss_db=float(losses[k]),
            mean_aod=float(mean_aods[k]),
            aod_spread=float(spreads[k]),
            tap_powers=bounds.tap_powers,
        )
        for k in range(count)
    ]


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _user_channel(
    user: UserSpec,
    xpd_db: float,
    scenario: Scenario,
    pattern: RadiationPattern | None,
) -> UserChannel:
    """Resolve one (user, XPD) pair into link-model inputs."""
    loss = 10.0 ** (user.path_loss_db / 10.0)
    if pattern is not None:
        scaled = scale_to_xpd(pattern, xpd_db,
                              math.radians(scenario.pattern_reference_deg))
        phi = user.mean_aod
        alpha = np.array([gain_at(scaled, phi, t, "co") for t in (1, 2)]) / loss
        # cross-polarized power radiated by port t arrives through the
        # opposite polarization, hence the swapped beta indexing
        beta = np.array([gain_at(scaled, phi, 2, "cross"),
                         gain_at(scaled, phi, 1, "cross")]) / loss
        gains = PropagationGains(alpha=alpha, beta=beta, path_loss=loss)
        chi = (xpd_at(scaled, phi, 1).value, xpd_at(scaled, phi, 2).value)
    else:
        chi_lin = 10.0 ** (xpd_db / 10.0)
        gains = PropagationGains.from_xpd(chi_lin, path_loss=loss)
        chi = (chi_lin, chi_lin)
    return UserChannel(
        gains=gains,
        xpd=chi,
        omni_gain=1.0 / loss,
        aod=AodDistribution.laplacian(user.mean_aod, user.aod_spread),
        tap_powers=user.tap_powers,
        wavelength=scenario.wavelength,
    )


def _task_rng(seed: int, xpd_index: int, model_index: int, user_index: int):
    seq = np.random.SeedSequence([seed, xpd_index, model_index, user_index])
    return np.random.default_rng(seq)


def _summary_table(scenario: Scenario) -> tuple[TableRow, ...]:
    spread = math.radians(scenario.table_spread_deg)
    lap = AodDistribution.laplacian(0.0, spread)
    iso = AodDistribution.isotropic()
    rows = []
    for xpd_db in scenario.xpd_sweep_db:
        chi = 10.0 ** (xpd_db / 10.0)
        rho_exact = abs(dualpole_corr_exact(chi).coefficient)
        rho_approx = abs(dualpole_corr_approx(chi).corr.coefficient)
        d_iso = equivalent_spacing(SpacingQuery(rho_exact, iso))
        d_lap = equivalent_spacing(SpacingQuery(rho_exact, lap))
        rows.append(
            TableRow(
                xpd_db=xpd_db,
                rho_exact=rho_exact,
                rho_approx=rho_approx,
                d_iso_lambda=d_iso,
                d_lap_lambda=d_lap,
                spread_deg=scenario.table_spread_deg,
            )
        )
    return tuple(rows)


def run(scenario: Scenario) -> RunReport:
    """Execute the full sweep and assemble a report.

    For every XPD value and requested model, each user is evaluated for
    ``trials_per_user`` independent realizations on its own seeded
    substream; throughput samples are pooled across users into one
    empirical CDF per (model, XPD). A summary table covering the sweep
    is always included. Module errors are re-raised with the failing
    user and XPD attached.
    """
    pattern = None
    if scenario.pattern_file is not None:
        path = Path(scenario.pattern_file)
        try:
            pattern = load_pattern(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read pattern file {path}: {exc}") from None

    # canonical user order: substreams and pooling are keyed by the
    # sorted user id, so the config listing order cannot change results
    ordered_users = sorted(scenario.users, key=lambda u: u.user_id)

    results: dict[tuple[str, float, str], np.ndarray] = {}
    for xi, xpd_db in enumerate(scenario.xpd_sweep_db):
        for mi, model in enumerate(scenario.models):
            for ui, user in enumerate(ordered_users):
                rng = _task_rng(scenario.seed, xi, mi, ui)
                try:
                    channel = _user_channel(user, xpd_db, scenario, pattern)
                    samples = evaluate_user(
                        channel, model, rng, scenario.trials_per_user, scenario.link
                    )
                except (ValueError, ArithmeticError) as exc:
                    raise type(exc)(
                        f"user {user.user_id}, xpd {xpd_db:g} dB, model {model}: {exc}"
                    ) from exc
                results[(model, xpd_db, user.user_id)] = np.array(
                    [r.throughput for r in samples]
                )

    cdf_series = {}
    for xpd_db in scenario.xpd_sweep_db:
        for model in scenario.models:
            pooled = np.concatenate(
                [results[(model, xpd_db, u.user_id)] for u in ordered_users]
            )
            cdf_series[(model, xpd_db)] = cdf(pooled)

    metadata = {
        "version": __version__,
        "seed": scenario.seed,
        "trials_per_user": scenario.trials_per_user,
        "users": len(scenario.users),
        "models": ",".join(scenario.models),
        "xpd_db": ",".join(f"{x:g}" for x in scenario.xpd_sweep_db),
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return RunReport(
        table_rows=_summary_table(scenario),
        cdf_series=cdf_series,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# report output
# ---------------------------------------------------------------------------


def format_table_csv(rows) -> str:
    out = io.StringIO()
    out.write("xpd_db,rho_exact,rho_approx,d_iso_lambda,d_lap_lambda,spread_deg\n")
    for r in rows:
        out.write(
            f"{r.xpd_db:g},{r.rho_exact:.6f},{r.rho_approx:.6f},"
            f"{r.d_iso_lambda:.6f},{r.d_lap_lambda:.6f},{r.spread_deg:g}\n"
        )
    return out.getvalue()


def format_cdf_csv(series) -> str:
    out = io.StringIO()
    out.write("throughput_bps,cum_prob\n")
    for value, prob in series:
        out.write(f"{value:.3f},{prob:.10g}\n")
    return out.getvalue()


def write_report(report: RunReport, out_dir) -> list[Path]:
    """Write table, per-(model, XPD) CDFs and metadata under ``out_dir``.

    CSV content is a pure function of the scenario and seed; only the
    metadata file carries a timestamp.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    table_path = out_dir / "table1.csv"
    table_path.write_text(format_table_csv(report.table_rows))
    written.append(table_path)

    for (model, xpd_db), series in sorted(report.cdf_series.items()):
        path = out_dir / f"cdf_{model}_{xpd_db:g}.csv"
        path.write_text(format_cdf_csv(series))
        written.append(path)

    meta_path = out_dir / "run_metadata.txt"
    meta_path.write_text(
        "".join(f"{k}={v}\n" for k, v in report.metadata.items())
    )
    written.append(meta_path)
    return written
