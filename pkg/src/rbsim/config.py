"""Run configuration: one JSON document feeding every module.

The document carries plain experimental units (Hz, um, seconds) and is
converted to the angular/SI quantities the library works in at access
time.  Defaults reproduce the reference operating point: global drive
2pi x 4.74 kHz, addressing drive 2pi x 8.5 kHz detuned by 2pi x 33 kHz,
a 7x7 array at 3.8 um pitch under a 3.2 x 2.7 um elliptical beam.

A user file may specify any subset of keys; the rest keep their
defaults.  Unknown keys are rejected so typos cannot silently fall back.
"""

import copy
import hashlib
import json
import math

from .noise import NoiseParams, SpamParams
from .sites import ArrayGeometry, DriveParams, ReadoutModel, StarkBeam

TWO_PI = 2.0 * math.pi

# Used when no seed is given anywhere (config file or --seed).
DEFAULT_SEED = 12345

# Truncation-length presets: the ten global-drive lengths spanning 1..100
# and the eight addressed-site lengths spanning 1..50.
GLOBAL_RB_LENGTHS = (1, 12, 23, 34, 45, 56, 67, 78, 89, 100)
SITE_RB_LENGTHS = (1, 8, 15, 22, 29, 36, 43, 50)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def default_config():
    """The canonical document, every knob at its documented default."""
    return {
        "seed": DEFAULT_SEED,
        "out": "out",
        "format": "csv",
        "noise": {
            "rabi_hz": 4740.0,
            "static_detuning_hz": 100.0,
            "timing_error_fraction": 0.002,
            "timing_correlation": "per_pulse",
            "t2_star_s": 2.7e-3,
            "t2star_coupling": "per_pulse",
            "depolarization": 0.0,
            "t1_s": None,
            "spam": {
                "prep_error": 0.04,
                "pushout_error": 0.01,
                "readout_overlap": 0.0004,
            },
        },
        "drive": {"delta_hz": 33000.0, "omega_hz": 8500.0},
        "geometry": {"rows": 7, "cols": 7, "pitch_um": 3.8},
        "beam": {
            "waist_x_um": 3.2,
            "waist_y_um": 2.7,
            "pointing_jitter_um": 0.0,
            "intensity_jitter": 0.0,
        },
        "rb": {
            "lengths": list(GLOBAL_RB_LENGTHS),
            "n_sequences": 7,
            "shots": 50,
            "shared_prefix": True,
        },
        "select": {
            "lengths": list(SITE_RB_LENGTHS),
            "n_sequences": 10,
            "shots": 50,
            "target": 31,
        },
        "readout": {"dark_mean": 10.0, "bright_mean": 40.0, "sigma": 4.24},
        "loading": {"p_fill": 0.6, "runs": 500},
    }


def _merge(base, override, path):
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here}: expected an object")
            _merge(base[key], value, here)
        else:
            base[key] = value
    return base


def _number(doc, path, lo=None, hi=None, allow_none=False):
    node = doc
    for part in path.split("."):
        node = node[part]
    if node is None:
        if allow_none:
            return None
        raise ConfigError(f"{path}: must be a number")
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: must be a number, got {node!r}")
    value = float(node)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {value}")
    return value


def _integer(doc, path, lo=None):
    value = _number(doc, path, lo=lo)
    if value != int(value):
        raise ConfigError(f"{path}: must be an integer, got {value}")
    return int(value)


def _lengths(doc, section):
    raw = doc[section]["lengths"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{section}.lengths: must be a non-empty list")
    out = []
    for i, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, int) or item < 1:
            raise ConfigError(
                f"{section}.lengths[{i}]: must be a positive integer, got {item!r}"
            )
        out.append(item)
    return out


class RunConfig:
    """Validated configuration with converters into each module's types."""

    def __init__(self, doc):
        self.doc = doc
        # Fail fast: build every domain object once so a bad document is
        # rejected before any simulation starts.
        self.seed = _integer(doc, "seed", lo=0)
        self.out_dir = doc["out"]
        if not isinstance(self.out_dir, str) or not self.out_dir:
            raise ConfigError("out: must be a non-empty string")
        self.format = doc["format"]
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be 'csv' or 'json', got {self.format!r}")
        self.noise_params()
        self.drive()
        self.geometry()
        self.beam()
        self.readout()
        self.rb_lengths = _lengths(doc, "rb")
        self.rb_sequences = _integer(doc, "rb.n_sequences", lo=1)
        self.rb_shots = _integer(doc, "rb.shots", lo=1)
        self.shared_prefix = doc["rb"]["shared_prefix"]
        if not isinstance(self.shared_prefix, bool):
            raise ConfigError("rb.shared_prefix: must be true or false")
        self.select_lengths = _lengths(doc, "select")
        self.select_sequences = _integer(doc, "select.n_sequences", lo=1)
        self.select_shots = _integer(doc, "select.shots", lo=1)
        self.select_target = _integer(doc, "select.target", lo=0)
        if self.select_target >= self.geometry().n_sites:
            raise ConfigError(
                f"select.target: site {self.select_target} outside the array"
            )
        self.p_fill = _number(doc, "loading.p_fill", lo=0.0, hi=1.0)
        self.loading_runs = _integer(doc, "loading.runs", lo=1)

    def _wrap(self, section, builder):
        try:
            return builder()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{section}: {exc}") from exc

    def noise_params(self):
        d = self.doc["noise"]
        spam = d["spam"]
        mode = d["timing_correlation"]
        coupling = d["t2star_coupling"]
        if not isinstance(mode, str):
            raise ConfigError("noise.timing_correlation: must be a string")
        if not isinstance(coupling, str):
            raise ConfigError("noise.t2star_coupling: must be a string")
        # null switches the corresponding decay channel off entirely
        t1 = _number(self.doc, "noise.t1_s", lo=0.0, allow_none=True)
        t2 = _number(self.doc, "noise.t2_star_s", lo=0.0, allow_none=True)
        return self._wrap(
            "noise",
            lambda: NoiseParams(
                omega=TWO_PI * _number(self.doc, "noise.rabi_hz", lo=0.0),
                static_detuning=TWO_PI
                * _number(self.doc, "noise.static_detuning_hz"),
                timing_error_fraction=_number(
                    self.doc, "noise.timing_error_fraction", lo=0.0
                ),
                timing_correlation=mode,
                t2_star=math.inf if t2 is None else t2,
                t2star_coupling=coupling,
                depolarization=_number(self.doc, "noise.depolarization"),
                t1=math.inf if t1 is None else t1,
                spam=SpamParams(
                    prep_error=_number(self.doc, "noise.spam.prep_error"),
                    pushout_error=_number(self.doc, "noise.spam.pushout_error"),
                    readout_overlap=_number(
                        self.doc, "noise.spam.readout_overlap"
                    ),
                ),
            ),
        )

    def drive(self):
        return self._wrap(
            "drive",
            lambda: DriveParams(
                delta=TWO_PI * _number(self.doc, "drive.delta_hz"),
                omega=TWO_PI * _number(self.doc, "drive.omega_hz", lo=0.0),
            ),
        )

    def geometry(self):
        return self._wrap(
            "geometry",
            lambda: ArrayGeometry(
                rows=_integer(self.doc, "geometry.rows", lo=1),
                cols=_integer(self.doc, "geometry.cols", lo=1),
                pitch=1e-6 * _number(self.doc, "geometry.pitch_um", lo=0.0),
            ),
        )

    def beam(self):
        return self._wrap(
            "beam",
            lambda: StarkBeam(
                waist_x=1e-6 * _number(self.doc, "beam.waist_x_um", lo=0.0),
                waist_y=1e-6 * _number(self.doc, "beam.waist_y_um", lo=0.0),
                pointing_jitter=1e-6
                * _number(self.doc, "beam.pointing_jitter_um", lo=0.0),
                intensity_jitter=_number(self.doc, "beam.intensity_jitter", lo=0.0),
            ),
        )

    def readout(self):
        return self._wrap(
            "readout",
            lambda: ReadoutModel(
                dark_mean=_number(self.doc, "readout.dark_mean"),
                bright_mean=_number(self.doc, "readout.bright_mean"),
                sigma=_number(self.doc, "readout.sigma"),
            ),
        )

    def digest(self):
        return config_digest(self.doc)


def config_digest(doc):
    """Hex digest of the canonical (sorted, compact) JSON encoding.

    The output directory is where results land, not what they are, so it
    is excluded; two runs differing only in --out hash identically.
    """
    trimmed = {k: v for k, v in doc.items() if k != "out"}
    blob = json.dumps(trimmed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path=None, overrides=None):
    """Merge defaults <- optional file <- optional override dict, validate."""
    doc = default_config()
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        _merge(doc, user, "")
    if overrides:
        _merge(doc, copy.deepcopy(overrides), "")
    return RunConfig(doc)
