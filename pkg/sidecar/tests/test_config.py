import pytest

from scorer_sidecar.bindings import load_bindings
from scorer_sidecar.config import DEFAULT_SPECS, SidecarConfig, load_config, parse_config_text
from scorer_sidecar.errors import ConfigError


def test_no_config_file_gives_defaults():
    config = load_config(None)
    assert config == SidecarConfig()
    assert config.role_specs == DEFAULT_SPECS
    assert config.role_specs is not DEFAULT_SPECS


def test_config_file_overrides_selected_keys(tmp_path):
    path = tmp_path / "sidecar.conf"
    path.write_text(
        "# scoring roles\n"
        "coherence = llm-judge  # remote judge\n"
        "asr = none\n"
        "\n"
        "port = 9100\n"
        "host = 0.0.0.0\n"
        "llm_api_url = http://judge.internal/score\n",
        encoding="utf-8",
    )
    config = load_config(path)
    assert config.role_specs["coherence"] == "llm-judge"
    assert config.role_specs["quality"] == "dsp-proxy"
    assert config.port == 9100
    assert config.host == "0.0.0.0"
    assert config.llm_api_url == "http://judge.internal/score"


def test_later_keys_win():
    values = parse_config_text("port = 1\nport = 2\n")
    assert values["port"] == "2"


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError, match="line 2: unknown key 'quolity'"):
        parse_config_text("quality = dsp-proxy\nquolity = dsp-proxy\n")


def test_line_without_equals_rejected():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("just some words\n")


def test_non_integer_port_rejected(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("port = soon\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="port must be an integer"):
        load_config(path)


def test_missing_config_file_rejected(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config file"):
        load_config(tmp_path / "absent.conf")


def test_default_bindings_leave_asr_unbound():
    bindings, failures = load_bindings(SidecarConfig())
    assert failures == {}
    assert "asr" not in bindings
    assert sorted(bindings) == [
        "coherence",
        "emotion_embed",
        "quality",
        "semantic",
        "speaker_embed_a",
        "speaker_embed_b",
        "tts",
    ]
    for role, binding in bindings.items():
        assert binding.role == role
        assert binding.model_id


def test_role_set_to_none_is_skipped():
    specs = dict(DEFAULT_SPECS, quality="none")
    bindings, failures = load_bindings(SidecarConfig(role_specs=specs))
    assert "quality" not in bindings
    assert failures == {}


def test_unknown_adapter_name_aborts_startup():
    specs = dict(DEFAULT_SPECS, quality="mosnet")
    with pytest.raises(ConfigError, match="unknown adapter 'mosnet' for role 'quality'"):
        load_bindings(SidecarConfig(role_specs=specs))
    # The error lists what would have worked.
    with pytest.raises(ConfigError, match="dsp-proxy, none"):
        load_bindings(SidecarConfig(role_specs=specs))


def test_llm_judge_without_key_leaves_only_that_role_down(monkeypatch):
    monkeypatch.delenv("SIDECAR_LLM_API_KEY", raising=False)
    specs = dict(DEFAULT_SPECS, coherence="llm-judge")
    config = SidecarConfig(role_specs=specs, llm_api_url="http://judge.internal/score")
    bindings, failures = load_bindings(config)
    assert "coherence" not in bindings
    assert "SIDECAR_LLM_API_KEY" in failures["coherence"]
    assert "quality" in bindings


def test_llm_judge_without_url_is_a_load_failure(monkeypatch):
    monkeypatch.setenv("SIDECAR_LLM_API_KEY", "sekrit")
    specs = dict(DEFAULT_SPECS, coherence="llm-judge")
    bindings, failures = load_bindings(SidecarConfig(role_specs=specs))
    assert "coherence" not in bindings
    assert "llm_api_url" in failures["coherence"]


def test_llm_judge_with_key_and_url_binds(monkeypatch):
    monkeypatch.setenv("SIDECAR_LLM_API_KEY", "sekrit")
    specs = dict(DEFAULT_SPECS, coherence="llm-judge")
    config = SidecarConfig(role_specs=specs, llm_api_url="http://judge.internal/score")
    bindings, failures = load_bindings(config)
    assert failures == {}
    assert bindings["coherence"].model_id == "llm-judge-judge-1"
