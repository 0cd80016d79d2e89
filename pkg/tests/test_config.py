"""Configuration-file parser tests."""

import pytest

from sitcontrol.config import (ConfigError, parse_kv_text, load_config,
                               format_config, provenance_lines)


def test_parse_basic():
    cfg = parse_kv_text("""
    # comment
    beta_e = 8.0

    control = vreg
    u_min=5
    """)
    assert cfg == {"beta_e": "8.0", "control": "vreg", "u_min": "5"}


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_kv_text("betae = 8.0")


def test_parse_rejects_duplicates():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_kv_text("u_min = 1\nu_min = 2")


def test_parse_rejects_garbage_line():
    with pytest.raises(ConfigError, match="expected"):
        parse_kv_text("just some words")


def test_errors_carry_source_location():
    with pytest.raises(ConfigError, match=r"<config>:3"):
        parse_kv_text("u_min = 1\n\nnope nope")


def test_load_and_format_roundtrip(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("u_min = 5\ncontrol = ureg\n")
    cfg = load_config(path)
    assert cfg == {"u_min": "5", "control": "ureg"}
    assert format_config(cfg) == "control = ureg\nu_min = 5\n"
    assert provenance_lines(cfg) == ["control = ureg", "u_min = 5"]
