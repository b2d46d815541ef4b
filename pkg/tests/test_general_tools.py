import json

import pytest

from tools.errors import ConfigError
from tools.general_tools import (PROJECT_ROOT, load_config, parse_float_list,
                                 resolve_config, resolve_project_path,
                                 write_json_file)

DEFAULTS = {"seed": 0, "law": "two_point:0.3", "n": [100]}


class TestResolveConfig:
    def test_precedence(self, monkeypatch):
        monkeypatch.setenv("DECOMPOUND_LAW", "geometric:0.5")
        monkeypatch.setenv("DECOMPOUND_N", "[10, 20]")
        resolved = resolve_config(DEFAULTS, {"seed": 3, "law": "two_point:0.9"}, {"seed": 5, "law": None})
        assert resolved == {"seed": 5, "law": "geometric:0.5", "n": [10, 20]}

    def test_defaults_only(self):
        assert resolve_config(DEFAULTS) == DEFAULTS

    def test_unknown_keys(self):
        with pytest.raises(ConfigError) as info:
            resolve_config(DEFAULTS, {"sed": 1})
        assert info.value.keys == ["sed"]
        with pytest.raises(ConfigError):
            resolve_config(DEFAULTS, None, {"bogus": 1})


class TestFiles:
    def test_default_configs_exist(self):
        for command in ("simulate", "estimate", "adapt", "realdata", "check"):
            assert isinstance(load_config(None, command), dict)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{seed: 1", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_write_json_is_stable(self, tmp_path):
        path = write_json_file(tmp_path / "out" / "x.json", {"b": 1, "a": [1.5]})
        text = open(path, encoding="utf-8").read()
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1.5], "b": 1}

    def test_resolve_project_path(self, tmp_path):
        assert resolve_project_path(tmp_path) == tmp_path
        assert resolve_project_path("no/such/file.csv") == PROJECT_ROOT / "no/such/file.csv"


class TestParsing:
    def test_float_list(self):
        assert parse_float_list("100,1000, 5000") == [100.0, 1000.0, 5000.0]
        assert parse_float_list([1, 2]) == [1.0, 2.0]
        assert parse_float_list(3) == [3.0]

    def test_bad_list(self):
        with pytest.raises(ConfigError):
            parse_float_list("1,x")
