import hashlib
import logging
import os
from pathlib import Path
from typing import Dict, Any, Iterable, Optional, Tuple, Union

from ..exceptions import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = 'SHAPESTRING_'

# Flat key=value defaults. Every key is also a CLI flag (--key-with-dashes)
# and an environment variable (SHAPESTRING_KEY).
DEFAULTS: Dict[str, Any] = {
    # Contour sampling
    'resample_n': 200,

    # Shape context histograms and matching
    'sc_radial_bins': 5,
    'sc_angular_bins': 12,
    'sc_r_inner': 0.125,
    'sc_r_outer': 2.0,
    'sc_dummy_cost': 0.25,

    # Angular radial partitioning
    'arp_radial_count': 4,
    'arp_angular_count': 8,
    'arp_start_angle': 0.0,
    'arp_circle': 'centroid',

    # Inflexion segmentation
    'section_window': 5,
    'section_eps_line': 1e-6,

    # Quantizer
    'q_area_threshold': 0.01,
    'q_dist_edges': (1.0 / 3.0, 2.0 / 3.0),
    'q_angle_bins': 6,
    'q_degree_threshold': 0.25,

    # Substitution scores
    'score_match': 2.0,
    'score_gap': -2.0,
    'score_mismatch': -2.0,

    # Retrieval
    'pose_mode': 'canonical',
    'retrieval_prefilter': True,
    'n_jobs': 1,

    # Logging
    'log_level': 'INFO',
}

CHOICES: Dict[str, Tuple[str, ...]] = {
    'arp_circle': ('centroid', 'minimal'),
    'pose_mode': ('canonical', 'pairwise'),
    'log_level': ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'),
}

HELP: Dict[str, str] = {
    'resample_n': 'points per contour after arc-length resampling',
    'sc_radial_bins': 'log-polar radial bins of the shape context',
    'sc_angular_bins': 'angular bins of the shape context',
    'sc_r_inner': 'inner radius as a fraction of the mean pairwise distance',
    'sc_r_outer': 'outer radius as a fraction of the mean pairwise distance',
    'sc_dummy_cost': 'cost of dummy pairs when point counts differ',
    'arp_radial_count': 'concentric rings M of the surrounding circle',
    'arp_angular_count': 'wedges N of the surrounding circle',
    'arp_start_angle': 'clockwise angle (radians) where wedge 0 starts',
    'arp_circle': 'surrounding circle construction',
    'section_window': 'moving-average window of the curvature sign',
    'section_eps_line': 'curvature magnitude below which a stretch is a line',
    'q_area_threshold': 'S/L threshold on area divided by pi R^2',
    'q_dist_edges': 'comma separated S/M/L edges on d/R',
    'q_angle_bins': 'angle bins K over [0, pi)',
    'q_degree_threshold': 'D1/D2 threshold on the convexity degree',
    'score_match': 'score of identical symbols',
    'score_gap': 'gap penalty',
    'score_mismatch': 'score of symbols from different families',
    'pose_mode': 'query pose: canonical frame or pairwise alignment',
    'retrieval_prefilter': 'skip records whose length bound cannot reach the top k',
    'n_jobs': 'parallel workers for record scoring',
    'log_level': 'logging level',
}

# Keys that change the symbols produced for a contour
FINGERPRINT_PREFIXES = ('resample_n', 'sc_', 'arp_', 'section_', 'q_')


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ','.join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def coerce_value(key: str, raw: Any) -> Any:
    """Coerce ``raw`` to the type of the default for ``key``"""
    if key not in DEFAULTS:
        raise ConfigError(f"Unknown configuration key: {key}")
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ('true', '1', 'yes', 'on'):
                return True
            if text in ('false', '0', 'no', 'off'):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if isinstance(default, int):
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(f"not an integer: {raw!r}")
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            if isinstance(raw, str):
                parts = [p for p in raw.replace(' ', '').split(',') if p]
            else:
                parts = list(raw)
            return tuple(float(p) for p in parts)
        value = str(raw).strip()
        if key == 'log_level':
            value = value.upper()
        if key in CHOICES and value not in CHOICES[key]:
            raise ValueError(f"expected one of {', '.join(CHOICES[key])}")
        return value
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for {key}: {e}") from e


class RunConfig:
    """Configuration management for the shape encoding and retrieval pipeline"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None, use_env: bool = True):
        self._config: Dict[str, Any] = {}
        self.load_config(config_file, use_env)

    def load_config(self, config_file: Optional[Union[str, Path]] = None, use_env: bool = True):
        """Load defaults, then environment overrides, then the config file"""
        self._config = dict(DEFAULTS)

        if use_env:
            for key in DEFAULTS:
                env_value = os.getenv(f'{ENV_PREFIX}{key.upper()}')
                if env_value is not None:
                    self._config[key] = coerce_value(key, env_value)

        if config_file is None and use_env:
            config_file = os.getenv(f'{ENV_PREFIX}CONFIG_FILE')
        if config_file:
            self.load_from_file(config_file)

    def load_from_file(self, config_file: Union[str, Path]):
        """Load a flat key=value file; blank lines and '#' comments are skipped"""
        path = Path(config_file)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise ConfigError(f"Could not read config file {path}: {e}") from e

        for line_no, line in enumerate(text.splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith('#'):
                continue
            if '=' not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key=value")
            key, value = (part.strip() for part in stripped.split('=', 1))
            self._config[key] = coerce_value(key, value)
        logger.debug(f"Loaded configuration from {path}")

    def update(self, overrides: Dict[str, Any]):
        """Apply several overrides; every key must be known"""
        for key, value in overrides.items():
            self.set(key, value)

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self._config.get(key, default)

    def set(self, key: str, value: Any):
        """Set configuration value"""
        self._config[key] = coerce_value(key, value)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary"""
        return self._config.copy()

    def to_lines(self, keys: Optional[Iterable[str]] = None) -> list:
        """Sorted ``key=value`` lines"""
        selected = sorted(keys if keys is not None else self._config)
        return [f"{key}={format_value(self._config[key])}" for key in selected]

    def save_to_file(self, filename: Union[str, Path]):
        """Save configuration as a flat key=value file"""
        from .io_utils import atomic_write_text
        atomic_write_text(filename, '\n'.join(self.to_lines()) + '\n')

    def fingerprint(self) -> str:
        """Stable hash of every setting that changes an encoding"""
        keys = [k for k in self._config if k.startswith(FINGERPRINT_PREFIXES)]
        payload = '\n'.join(self.to_lines(keys)).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()[:16]

    def encoding_settings(self) -> Dict[str, str]:
        """Fingerprinted settings, recorded in index metadata"""
        keys = sorted(k for k in self._config if k.startswith(FINGERPRINT_PREFIXES))
        return {k: format_value(self._config[k]) for k in keys}

    def sc_config(self):
        from ..services.shape_context import ScConfig
        return ScConfig(
            radial_bins=self._config['sc_radial_bins'],
            angular_bins=self._config['sc_angular_bins'],
            r_inner=self._config['sc_r_inner'],
            r_outer=self._config['sc_r_outer'],
            dummy_cost=self._config['sc_dummy_cost'],
        )

    def arp_config(self):
        from ..services.arp import ArpConfig
        return ArpConfig(
            radial_count=self._config['arp_radial_count'],
            angular_count=self._config['arp_angular_count'],
            start_angle=self._config['arp_start_angle'],
            circle_method=self._config['arp_circle'],
        )

    def section_config(self):
        from ..services.sections import SectionConfig
        return SectionConfig(
            window=self._config['section_window'],
            eps_line=self._config['section_eps_line'],
        )

    def quantizer_config(self):
        from ..services.encoding import QuantizerConfig
        return QuantizerConfig(
            area_threshold=self._config['q_area_threshold'],
            dist_edges=self._config['q_dist_edges'],
            angle_bins=self._config['q_angle_bins'],
            degree_threshold=self._config['q_degree_threshold'],
        )

    def score_table(self):
        from ..services.alignment import ScoreTable
        return ScoreTable(
            match_score=self._config['score_match'],
            gap=self._config['score_gap'],
            mismatch=self._config['score_mismatch'],
        )


# Global configuration instance, created on first use
_config: Optional[RunConfig] = None


def get_config() -> RunConfig:
    """Get the global configuration instance"""
    global _config
    if _config is None:
        _config = RunConfig()
    return _config
