"""Type-II SPDC source with timing compensation.

Maps the trombone delay ``tau`` (fs) to the weight ``p`` of the Bell state in
the colored-noise mixture.  With ``x = tau / (D_G L)`` and
``kappa = sigma_p * Lambda_p * L``::

    p(tau) = rect(x) * (1 - 2|x|) * exp(-2 kappa^2 x^2)

Units are femtoseconds and millimetres throughout.  No material dispersion
data is embedded: ``D_G`` and ``Lambda_p`` (or ``kappa``) come from the
caller or from a config file.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qcore import DensityMatrix, colored_state

CRYSTAL_LENGTH_MM = 3.0
PULSE_FWHM_FS = 120.0


class ConfigError(ValueError):
    """Malformed or inconsistent source configuration."""


class DegenerateDispersionError(ValueError):
    pass


def rect(x):
    """Window function: 1 where |x| < 1/2 (strict), 0 elsewhere."""
    out = (np.abs(np.asarray(x, dtype=float)) < 0.5).astype(float)
    return float(out) if out.ndim == 0 else out


def derive_dispersion(u_p: float, u_o: float, u_e: float) -> tuple[float, float]:
    """(Lambda_p, D_G) in fs/mm from pump, o- and e-photon group velocities in mm/fs."""
    for name, u in (("u_p", u_p), ("u_o", u_o), ("u_e", u_e)):
        if not u > 0:
            raise ValueError(f"group velocity {name} must be positive, got {u!r}")
    lambda_p = 1.0 / u_p - 0.5 * (1.0 / u_o + 1.0 / u_e)
    d_g = 1.0 / u_o - 1.0 / u_e
    return lambda_p, d_g


def sigma_from_pulse_fwhm(fwhm_fs: float) -> float:
    """Pump bandwidth (rad/fs) for a transform-limited Gaussian pulse.

    Uses ``sigma_p = 2 sqrt(2 ln 2) / FWHM``, i.e. the inverse of the rms
    duration of a Gaussian intensity profile with the given FWHM.
    """
    if not fwhm_fs > 0:
        raise ValueError("pulse FWHM must be positive")
    return 2.0 * math.sqrt(2.0 * math.log(2.0)) / fwhm_fs


@dataclass(frozen=True)
class SourceParams:
    """Crystal and pump parameters.

    Give either ``kappa`` directly or the pair ``sigma_p`` / ``lambda_p``,
    never both.
    """

    crystal_length_mm: float
    d_g_fs_per_mm: float
    lambda_p_fs_per_mm: float | None = None
    sigma_p_rad_per_fs: float | None = None
    kappa_value: float | None = None

    def __post_init__(self):
        if not self.crystal_length_mm > 0:
            raise ValueError("crystal length must be positive")
        has_sigma = self.sigma_p_rad_per_fs is not None or self.lambda_p_fs_per_mm is not None
        if self.kappa_value is not None and has_sigma:
            raise ValueError("give either kappa or sigma_p/lambda_p, not both")
        if self.kappa_value is None:
            if self.sigma_p_rad_per_fs is None or self.lambda_p_fs_per_mm is None:
                raise ValueError("sigma_p and lambda_p are both required when kappa is not given")
            if self.sigma_p_rad_per_fs < 0:
                raise ValueError("sigma_p must be non-negative")

    @property
    def kappa(self) -> float:
        if self.kappa_value is not None:
            return float(self.kappa_value)
        return self.sigma_p_rad_per_fs * self.lambda_p_fs_per_mm * self.crystal_length_mm

    @property
    def delay_scale(self) -> float:
        """D_G * L in fs; the window is |tau| < |D_G L| / 2."""
        return self.d_g_fs_per_mm * self.crystal_length_mm

    @property
    def half_window(self) -> float:
        return 0.5 * abs(self.delay_scale)

    def to_dict(self) -> dict:
        out = {
            "crystal_length_mm": self.crystal_length_mm,
            "d_g_fs_per_mm": self.d_g_fs_per_mm,
        }
        if self.kappa_value is not None:
            out["kappa"] = self.kappa_value
        else:
            out["lambda_p_fs_per_mm"] = self.lambda_p_fs_per_mm
            out["sigma_p_rad_per_fs"] = self.sigma_p_rad_per_fs
        return out


def _scaled_delay(tau, params: SourceParams):
    scale = params.delay_scale
    if scale == 0:
        raise DegenerateDispersionError("degenerate dispersion: delay map undefined (D_G * L = 0)")
    return np.asarray(tau, dtype=float) / scale


def p_of_tau(tau, params: SourceParams):
    """Bell-state weight at delay ``tau`` (fs). Vectorized over ``tau``."""
    x = _scaled_delay(tau, params)
    ax = np.abs(x)
    k = params.kappa
    out = np.where(ax < 0.5, (1.0 - 2.0 * ax) * np.exp(-2.0 * k * k * x * x), 0.0)
    return float(out) if out.ndim == 0 else out


def tau_for_p(p_target: float, params: SourceParams, tol: float = 1e-10) -> float:
    """Smallest tau >= 0 with p_of_tau(tau) == p_target, by bisection."""
    p_target = float(p_target)
    if not (0.0 < p_target <= 1.0):
        raise ValueError(f"p_target must lie in (0, 1], got {p_target!r}")
    _scaled_delay(0.0, params)
    if p_target == 1.0:
        return 0.0
    lo, hi = 0.0, params.half_window
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        diff = p_of_tau(mid, params) - p_target
        if abs(diff) <= tol:
            return mid
        if diff > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def state_at_delay(tau: float, params: SourceParams) -> DensityMatrix:
    return colored_state(p_of_tau(tau, params))


@dataclass(frozen=True)
class DelayPoint:
    tau: float
    p: float


def delay_sweep(taus, params: SourceParams) -> list[DelayPoint]:
    taus = np.asarray(taus, dtype=float).reshape(-1)
    if not np.all(np.isfinite(taus)):
        raise ValueError("delays must be finite")
    ps = np.atleast_1d(p_of_tau(taus, params))
    return [DelayPoint(float(t), float(p)) for t, p in zip(taus, ps)]


# ---------------------------------------------------------------------------
# config files

SECTION = "source"
_FLOAT_KEYS = ("crystal_length_mm", "d_g_fs_per_mm", "lambda_p_fs_per_mm", "sigma_p_rad_per_fs", "kappa")


def _key_line(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for n, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return n
    return None


def _where(path: str, text: str, key: str) -> str:
    line = _key_line(text, key)
    return f"{path}:{line}" if line else path


def parse_source_config(text: str, path: str = "<config>") -> SourceParams:
    """Parse an INI-style ``[source]`` section into :class:`SourceParams`.

    Recognized keys: crystal_length_mm, d_g_fs_per_mm and either kappa or
    both lambda_p_fs_per_mm and sigma_p_rad_per_fs.  Errors carry
    ``path:line`` anchors where a line can be identified.
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: expected a [{SECTION}] section header first") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{path}:{lineno}: cannot parse line {line}") from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        anchor = f"{path}:{lineno}" if lineno else path
        raise ConfigError(f"{anchor}: {exc.message.splitlines()[0]}") from None
    if not cp.has_section(SECTION):
        raise ConfigError(f"{path}:1: missing [{SECTION}] section")
    sec = cp[SECTION]

    for key in sec:
        if key not in _FLOAT_KEYS:
            raise ConfigError(f"{_where(path, text, key)}: unknown key {key!r}")

    values: dict[str, float] = {}
    for key in _FLOAT_KEYS:
        if key in sec:
            try:
                values[key] = float(sec[key])
            except ValueError:
                raise ConfigError(f"{_where(path, text, key)}: {key} is not a number: {sec[key]!r}") from None
            if not math.isfinite(values[key]):
                raise ConfigError(f"{_where(path, text, key)}: {key} must be finite")

    for key in ("crystal_length_mm", "d_g_fs_per_mm"):
        if key not in values:
            raise ConfigError(f"{path}: missing required key {key!r}")
    sigma_path = [k for k in ("lambda_p_fs_per_mm", "sigma_p_rad_per_fs") if k in values]
    if "kappa" in values and sigma_path:
        raise ConfigError(
            f"{_where(path, text, 'kappa')}: kappa conflicts with {sigma_path[0]} "
            f"(line {_key_line(text, sigma_path[0])}); give one or the other"
        )
    if "kappa" not in values and len(sigma_path) != 2:
        missing = {"lambda_p_fs_per_mm", "sigma_p_rad_per_fs"} - set(sigma_path)
        raise ConfigError(f"{path}: missing {sorted(missing)[0]!r} (or give kappa instead)")

    try:
        return SourceParams(
            crystal_length_mm=values["crystal_length_mm"],
            d_g_fs_per_mm=values["d_g_fs_per_mm"],
            lambda_p_fs_per_mm=values.get("lambda_p_fs_per_mm"),
            sigma_p_rad_per_fs=values.get("sigma_p_rad_per_fs"),
            kappa_value=values.get("kappa"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_source_params(path) -> SourceParams:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_source_config(text, str(path))
