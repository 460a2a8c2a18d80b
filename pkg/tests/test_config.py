"""
Tests for configuration loading, merging, and run manifests.

This module focuses on:

* Parsing the three accepted config shapes (JSON with a ``"config"`` block,
  flat JSON, and ``key = value`` text) via
  :func:`lupaxa.s2df.config.load_config_file`.
* Type coercion, rejection of unknown keys, and the
  defaults < file < flags precedence of
  :func:`lupaxa.s2df.config.resolve_run_config`.
* Writing, loading, and comparing ``run.json`` manifests.
"""

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import hashlib
import json
from pathlib import Path

# ---------------------------------------------------------------------------
# Third-party imports
# ---------------------------------------------------------------------------
import pytest

# ---------------------------------------------------------------------------
# Internal configuration helpers
# ---------------------------------------------------------------------------
from lupaxa.s2df.config import (  # pyright: ignore[reportMissingImports]
    MANIFEST_NAME,
    RunConfig,
    coerce_settings,
    compare_manifests,
    load_config_file,
    load_run_manifest,
    resolve_run_config,
    write_run_manifest,
)
from lupaxa.s2df.exceptions import ConfigError  # pyright: ignore[reportMissingImports]
from lupaxa.s2df.utils import RUN_DEFAULTS  # pyright: ignore[reportMissingImports]


def test_coerce_settings_converts_strings() -> None:
    """Strings from text configs become ints, floats, bools, lists, and ``None``."""
    out = coerce_settings(
        {
            "iterations": "500",
            "K": "1e3",
            "deterministic": "no",
            "hidden": "64, 64 64",
            "decay_iters": "[100, 200]",
            "resolution": "none",
            "loss": "Eikonal-Prime",
        }
    )
    assert out == {
        "iterations": 500,
        "K": 1000.0,
        "deterministic": False,
        "hidden": [64, 64, 64],
        "decay_iters": [100, 200],
        "resolution": None,
        "loss": "eikonal_prime",
    }

    with pytest.raises(ConfigError):
        coerce_settings({"iterations": "many"})
    with pytest.raises(ConfigError):
        coerce_settings({"deterministic": "maybe"})


def test_unknown_keys_are_rejected(tmp_path: Path) -> None:
    """A typo in a config key is an error, not a silent default."""
    with pytest.raises(ConfigError) as exc_info:
        coerce_settings({"iteration": 10})
    assert "iteration" in str(exc_info.value)

    path = tmp_path / "typo.cfg"
    path.write_text("lr = 0.1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_load_config_file_shapes(tmp_path: Path) -> None:
    """Manifest-style JSON, flat JSON, and ``key = value`` text load alike."""
    block = tmp_path / "run.json"
    block.write_text(json.dumps({"command": "train", "config": {"iterations": 7, "weights": "watertight"}, "outputs": {}}), encoding="utf-8")
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"iterations": "7", "weights": "watertight"}), encoding="utf-8")
    text = tmp_path / "settings.cfg"
    text.write_text("# comment\niterations = 7  # trailing\n\nweights = 'watertight'\n", encoding="utf-8")

    for path in (block, flat, text):
        assert load_config_file(path) == {"iterations": 7, "weights": "watertight"}


def test_load_config_file_errors(tmp_path: Path) -> None:
    """Missing files, bad JSON, non-object JSON, and malformed lines fail."""
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.json")

    cases = {"bad.json": "{not json", "list.json": "[1, 2]", "line.cfg": "iterations 7\n"}
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config_file(path)


def test_resolve_run_config_precedence(tmp_path: Path) -> None:
    """Flags beat the file, the file beats defaults, and ``None`` flags are ignored."""
    path = tmp_path / "settings.cfg"
    path.write_text("iterations = 50\nseed = 3\nsigma = 0.02\n", encoding="utf-8")

    cfg = resolve_run_config(path, {"seed": 9, "sigma": None})

    assert cfg.iterations == 50
    assert cfg.seed == 9
    assert cfg.sigma == 0.02
    assert cfg.lr0 == RUN_DEFAULTS["lr0"]
    assert resolve_run_config() == RunConfig.from_settings(RUN_DEFAULTS)


def test_run_config_builds_component_configs() -> None:
    """Training, sampling, and extraction settings are derived from one config."""
    cfg = resolve_run_config(overrides={"iterations": 1000, "hidden": [32, 32], "batch_size": 64, "resolution": 64})

    train = cfg.train_config()
    assert train.iterations == 1000
    assert train.decay_iters == (450, 600, 700, 800, 900)
    assert train.hidden == (32, 32)
    assert train.sampler.batch_size == 64
    assert cfg.extraction_settings().resolution == 64


@pytest.mark.parametrize(
    "overrides",
    [
        {"weights": "closed"},
        {"loss": "eikonal"},
        {"dim": 4},
        {"iso": 0.0},
        {"tau": -1.0},
        {"n_samples": 0},
        {"resolution": 1},
        {"threads": -2},
        {"iterations": 0},
        {"decay_iters": [5, 1]},
    ],
)
def test_run_config_validation(overrides: dict) -> None:
    """Out-of-range or unknown values raise :class:`ConfigError`."""
    with pytest.raises(ConfigError):
        resolve_run_config(overrides=overrides)


def test_run_manifest_round_trip(tmp_path: Path) -> None:
    """
    ``run.json`` records command, config, and SHA-256 digests keyed by
    relative path; a manifest can be reloaded as a config file.
    """
    (tmp_path / "sub").mkdir()
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "sub" / "b.csv"
    out_a.write_text("x\n1\n", encoding="utf-8")
    out_b.write_bytes(b"")
    cfg = resolve_run_config(overrides={"iterations": 12, "seed": 5})

    path = write_run_manifest(tmp_path, "train", cfg, [out_b, out_a], threads=2)
    assert path == tmp_path / MANIFEST_NAME

    manifest = load_run_manifest(path)
    assert manifest["command"] == "train"
    assert manifest["threads"] == 2
    assert manifest["outputs"] == {
        "a.csv": hashlib.sha256(b"x\n1\n").hexdigest(),
        "sub/b.csv": hashlib.sha256(b"").hexdigest(),
    }
    assert resolve_run_config(path) == cfg


def test_compare_manifests_and_bad_manifests(tmp_path: Path) -> None:
    """Differing or missing outputs are reported; non-manifests are rejected."""
    first = {"outputs": {"a": "1", "b": "2"}}
    second = {"outputs": {"a": "1", "b": "3", "c": "4"}}
    assert compare_manifests(first, second) == ["b", "c"]
    assert compare_manifests(first, first) == []

    path = tmp_path / "other.json"
    path.write_text(json.dumps({"iterations": 3}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_manifest(path)


# EOF
