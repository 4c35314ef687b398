import pytest
from harmonizer.config import resolve_config, layered_options
from harmonizer.errors import ConfigError, UsageError

@pytest.fixture
def coco(tmp_path):
    path = tmp_path / "in.json"
    path.write_text("{}", encoding="utf-8")
    return str(path)

def test_shipped_defaults():
    options = layered_options("evaluate", {}, environ={})
    assert options == {"log_level": "INFO", "workers": 1, "seed": 0, "iou_threshold": 0.5, "shift_window": 2}

def test_layers_take_precedence_in_order(tmp_path):
    ini = tmp_path / "job.ini"
    ini.write_text("[default]\nworkers = 3\n\n[evaluate]\niou_threshold = 0.7\n", encoding="utf-8")
    env = {"HARMONIZER_WORKERS": "2", "HARMONIZER_IOU_THRESHOLD": "0.6", "HARMONIZER_SHIFT_WINDOW": "4"}

    assert layered_options("evaluate", {}, environ=env)["workers"] == 2
    options = layered_options("evaluate", {}, str(ini), environ=env)
    assert (options["workers"], options["iou_threshold"], options["shift_window"]) == (3, 0.7, 4)
    options = layered_options("evaluate", {"workers": 5, "iou_threshold": None}, str(ini), environ=env)
    assert (options["workers"], options["iou_threshold"]) == (5, 0.7)

def test_options_of_other_subcommands_are_ignored_from_flags():
    options = layered_options("merge", {"k": 7, "name": "train"}, environ={})
    assert "k" not in options
    assert options["name"] == "train"

def test_unknown_config_option(tmp_path):
    ini = tmp_path / "job.ini"
    ini.write_text("[evaluate]\nbogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="bogus"):
        layered_options("evaluate", {}, str(ini), environ={})

def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        layered_options("evaluate", {}, str(tmp_path / "absent.ini"), environ={})

def test_bad_environment_value():
    with pytest.raises(ConfigError, match="HARMONIZER_WORKERS"):
        layered_options("evaluate", {}, environ={"HARMONIZER_WORKERS": "many"})

@pytest.mark.parametrize("flags", [
    {"iou_threshold": 0.0},
    {"iou_threshold": 1.5},
    {"shift_window": -1},
    {"workers": 0},
    {"log_level": "chatty"},
])
def test_out_of_range_values(coco, flags):
    with pytest.raises(ConfigError):
        resolve_config("evaluate", {"pred": coco, "ref": coco, "out": "o", **flags}, environ={})

def test_vlm_agent_needs_endpoint(coco):
    with pytest.raises(ConfigError, match="endpoint"):
        resolve_config("harmonize", {"input": coco, "out": "o", "agent": "vlm"}, environ={})
    config = resolve_config("harmonize", {"input": coco, "out": "o", "agent": "vlm"},
                            environ={"HARMONIZER_VLM_ENDPOINT": "http://localhost:1/v1/chat/completions"})
    assert config["endpoint"].startswith("http://localhost:1")

def test_missing_inputs_are_usage_errors(coco, tmp_path):
    with pytest.raises(UsageError, match="--ref"):
        resolve_config("evaluate", {"pred": coco, "out": "o"}, environ={})
    with pytest.raises(UsageError, match="not found"):
        resolve_config("analyze", {"inputs": [coco, str(tmp_path / "nope.json")], "out": "o"}, environ={})
    with pytest.raises(UsageError, match="--out"):
        resolve_config("remap", {"input": coco}, environ={})
    with pytest.raises(UsageError):
        resolve_config("shuffle", {}, environ={})

def test_config_hash_is_stable(coco):
    flags = {"input": coco, "out": "o"}
    first = resolve_config("remap", flags, environ={})
    assert first.config_hash() == resolve_config("remap", dict(flags), environ={}).config_hash()
    other = resolve_config("remap", {**flags, "mapping": "heron"}, environ={})
    assert other.config_hash() != first.config_hash()
    assert first.input_paths() == [coco]
