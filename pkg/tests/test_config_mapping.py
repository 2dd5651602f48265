import pytest

from cdpa_lab.exceptions import ConfigError
from cdpa_lab.models import BridgeTopology, ExperimentConfig, ModelKind
from cdpa_lab.utils.mapping_engine import ConfigMappingEngine, load_config
from cdpa_lab.utils.validators import ConfigKeyValidator, ValidationResult, ValidationRule


@pytest.fixture
def engine():
    return ConfigMappingEngine()


def test_parse_scalars(engine):
    """Scalars are coerced by the field types"""
    cfg = engine.parse_text(
        """
        circuit.input_freq = 3000
        circuit.bridge_topology = single_ended
        circuit.edge_interpolation = true
        train.model_kind = benn
        train.eta1 = 2e-3   # trailing comment
        data.trace_file = traces.csv
        """
    )
    assert cfg.circuit.input_freq == 3000.0
    assert cfg.circuit.bridge_topology == BridgeTopology.SINGLE_ENDED
    assert cfg.circuit.edge_interpolation is True
    assert cfg.train.model_kind == ModelKind.BENN
    assert cfg.train.eta1 == 0.002
    assert cfg.data.trace_file == "traces.csv"
    assert cfg.train.hidden_count == 30


def test_parse_lists_and_ranges(engine):
    """Comma lists and inclusive start:step:stop ranges"""
    cfg = engine.parse_text(
        "sweep.hidden_benn = 10:10:110\n"
        "sweep.hidden_ewnn = 10, 15, 20\n"
        "sweep.frequencies = 1900:100:4300\n"
    )
    assert cfg.sweep.hidden_benn == list(range(10, 111, 10))
    assert cfg.sweep.hidden_ewnn == [10, 15, 20]
    assert len(cfg.sweep.frequencies) == 25
    assert cfg.sweep.frequencies[0] == 1900.0
    assert cfg.sweep.frequencies[-1] == 4300.0


def test_descending_range(engine):
    """Negative steps count down"""
    cfg = engine.parse_text("sweep.hidden_benn = 30:-10:10")
    assert cfg.sweep.hidden_benn == [30, 20, 10]


def test_empty_text_gives_defaults(engine):
    """Comments and blank lines only"""
    assert engine.parse_text("# nothing here\n\n") == ExperimentConfig()


@pytest.mark.parametrize("text,field,rule", [
    ("circuit.nonsense = 1", "circuit.nonsense", "known_field"),
    ("engine.speed = 1", "engine.speed", "known_section"),
    ("Circuit-InputFreq = 1", "Circuit-InputFreq", "key_format"),
    ("just some words", "syntax", "line_format"),
    ("sweep.hidden_benn = 10:0:20", "sweep.hidden_benn", "value_format"),
    ("sweep.hidden_benn = 20:10:10", "sweep.hidden_benn", "value_format"),
    ("sweep.frequencies = 1000, abc", "sweep.frequencies", "value_format"),
    ("sweep.frequencies = 1:2", "sweep.frequencies", "value_format"),
    ("sweep.frequencies = nan", "sweep.frequencies", "value_format"),
    ("circuit.input_freq =", "circuit.input_freq", "value_format"),
])
def test_malformed_lines(engine, text, field, rule):
    """Every kind of bad line is reported with its field and rule"""
    with pytest.raises(ConfigError) as exc_info:
        engine.parse_text(text)
    errors = exc_info.value.errors
    assert len(errors) == 1
    assert errors[0]["field"] == field
    assert errors[0]["rule"] == rule
    assert errors[0]["line"] == 1


def test_duplicate_key(engine):
    """A key may be set once"""
    with pytest.raises(ConfigError) as exc_info:
        engine.parse_text("train.seed = 1\ntrain.seed = 2\n")
    (error,) = exc_info.value.errors
    assert error["rule"] == "duplicate"
    assert error["line"] == 2
    assert "line 1" in error["message"]


def test_all_errors_are_collected(engine):
    """Line errors are reported together, as are field constraint violations"""
    with pytest.raises(ConfigError) as exc_info:
        engine.parse_text("bad line\ncircuit.unknown = 1\nsweep.hidden_benn = x\n")
    assert [e["line"] for e in exc_info.value.errors] == [1, 2, 3]

    with pytest.raises(ConfigError) as exc_info:
        engine.parse_text("train.hidden_count = 0\ncircuit.ripple_fraction = -0.5\n")
    fields = {e["field"] for e in exc_info.value.errors}
    assert fields == {"train.hidden_count", "circuit.ripple_fraction"}
    assert "train.hidden_count" in str(exc_info.value)


def test_cross_field_violation(engine):
    """Model-level checks surface as configuration errors"""
    with pytest.raises(ConfigError):
        engine.parse_text("circuit.input_amp = 5\n")


def test_load_missing_file(tmp_path):
    """An unreadable file is a configuration error"""
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_load_config_defaults_and_file(experiment_file):
    """None gives defaults; a path is parsed"""
    assert load_config(None) == ExperimentConfig()
    cfg = load_config(experiment_file)
    assert cfg.circuit.window_end == 0.003
    assert cfg.sweep.hidden_benn == [5, 10]
    assert cfg.sweep.hidden_ewnn == [4, 8]


def test_validation_result_describe():
    """Errors invalidate the result and describe lists them with line numbers"""
    result = ValidationResult()
    assert result.is_valid
    result.add_error("train.eta1", "negative", -1.0, "ge", 4)
    result.add_error("train.seed", "not an integer", "x")

    assert result.is_valid is False
    assert [err["rule"] for err in result.errors] == ["ge", None]
    assert result.describe() == "line 4: train.eta1: negative\ntrain.seed: not an integer"


def test_rule_that_raises_is_recorded_as_error():
    """An exception inside a rule counts as a failure"""
    rule = ValidationRule("boom", lambda v: 1 / 0, "never shown")
    result = ValidationResult()
    assert rule.check("train.seed", "train.seed", result, 2) is False
    assert result.errors[0]["message"].startswith("Validation error:")
    assert result.errors[0]["line"] == 2


def test_key_validator_stops_at_first_failure():
    """A malformed key is not also reported as unknown"""
    validator = ConfigKeyValidator({"train": ["seed"]})
    result = ValidationResult()
    assert validator.validate_key("train.seed", result)
    assert not validator.validate_key("TRAIN", result, 3)
    assert [e["rule"] for e in result.errors] == ["key_format"]
