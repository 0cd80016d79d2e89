"""Flat key-value configuration files.

Grammar: one `key = value` pair per line; blank lines and lines starting
with '#' are ignored. Keys are lowercase identifiers; unknown keys are
rejected so typos cannot silently fall back to defaults.
"""

from .model import PARAM_CONFIG_KEYS

CONTROL_KEYS = ("control", "u_bar", "u_min", "u_max", "alpha1", "alpha2",
                "m_thr", "noise_sigma")
SIM_KEYS = ("dt", "t_end", "scheme", "control_update_interval",
            "output_stride", "seed")
KNOWN_KEYS = tuple(PARAM_CONFIG_KEYS) + CONTROL_KEYS + SIM_KEYS


class ConfigError(ValueError):
    pass


def parse_kv_text(text, source="<config>"):
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in cfg:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        cfg[key] = value
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_kv_text(fh.read(), source=str(path))


def format_config(cfg):
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def provenance_lines(cfg):
    """Resolved configuration as comment-ready lines for output headers."""
    return [f"{k} = {cfg[k]}" for k in sorted(cfg)]
