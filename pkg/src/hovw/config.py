"""Flat ``key = value`` configuration files for the preprocessing stage.

Lines are ``key = value``; blank lines and ``#`` comments are ignored.
Unknown keys and unparsable values are errors.
"""

from dataclasses import replace

from .errors import InvalidParameterError
from .preprocess import PreprocessConfig

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(text):
    t = str(text).strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise InvalidParameterError(f"not a boolean: {text!r}")


# config key -> (PreprocessConfig field, parser)
KEYS = {
    "median.window": ("median_window", int),
    "bilateral.enabled": ("bilateral_enabled", parse_bool),
    "bilateral.sigma_spatial": ("sigma_spatial", float),
    "bilateral.sigma_range": ("sigma_range", float),
    "binarize.invert": ("invert", parse_bool),
}


def parse_config_text(text):
    """Parse config text into a ``{key: raw string}`` dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise InvalidParameterError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def apply_overrides(config, values):
    """New config with ``values`` (key -> raw string or typed value) applied."""
    changes = {}
    for key, value in values.items():
        if value is None:
            continue
        if key not in KEYS:
            raise InvalidParameterError(f"unknown key {key!r}")
        name, parse = KEYS[key]
        try:
            changes[name] = parse(value) if isinstance(value, str) else type(getattr(config, name))(value)
        except ValueError as exc:
            raise InvalidParameterError(f"{key}: {exc}") from exc
    cfg = replace(config, **changes)
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg.median_window < 1 or cfg.median_window % 2 == 0:
        raise InvalidParameterError("median.window must be a positive odd integer")
    if not (cfg.sigma_spatial > 0 and cfg.sigma_range > 0):
        raise InvalidParameterError("bilateral sigmas must be positive")


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    cfg = PreprocessConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = apply_overrides(cfg, parse_config_text(fh.read()))
    return apply_overrides(cfg, overrides or {})


def format_config(cfg):
    lines = []
    for key, value in cfg.as_dict().items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
