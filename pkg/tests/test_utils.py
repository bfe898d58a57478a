import json
import logging

import pytest

from src.utils import AppConfig, load_yaml, setup_logging


def test_default_settings_load():
    config = AppConfig.load()
    assert config.max_denominator_bits() == 64
    assert config.default_dim() == 4
    assert config.default_output() == "human"
    assert config.settings["harness"]["seed"] == 1


def test_missing_keys_fall_back_to_defaults(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({}))
    config = AppConfig.load(path)
    assert config.max_denominator_bits() == 64
    assert config.default_dim() == 4


def test_missing_config_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_yaml(tmp_path / "nope.yml")


def test_setup_logging_honours_override_and_log_file(tmp_path):
    log_file = tmp_path / "logs" / "specrel.log"
    setup_logging({"logging": {"level": "WARNING", "log_file": str(log_file)}}, "debug")
    assert logging.getLogger().level == logging.DEBUG
    logging.getLogger("src.test").debug("hello %s", "file")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "[DEBUG] src.test: hello file" in log_file.read_text()
    setup_logging({})
    assert logging.getLogger().level == logging.WARNING


def test_yaml_only_syntax_loads(tmp_path):
    path = tmp_path / "settings.yml"
    path.write_text("search:\n  max_denominator_bits: 40   # tighter search\ncli:\n  output: json\n")
    config = AppConfig.load(path)
    assert config.max_denominator_bits() == 40
    assert config.default_output() == "json"
    assert load_yaml(path)["cli"] == {"output": "json"}
