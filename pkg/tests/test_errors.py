from starspec.errors import (
    ConfigError,
    ConfigNotFound,
    NewtonDiverged,
    NumericalError,
    PoleProximity,
    RequiresIndependentLengths,
    StarSpecError,
)


def test_config_errors_exit_with_two():
    assert ConfigError.exit_code == 2
    assert ConfigNotFound("x").exit_code == 2
    assert RequiresIndependentLengths("x").exit_code == 2


def test_numerical_errors_exit_with_three():
    assert NumericalError.exit_code == 3
    assert NewtonDiverged("x").exit_code == 3
    assert PoleProximity("x").exit_code == 3


def test_hierarchy():
    assert issubclass(ConfigNotFound, ConfigError)
    assert issubclass(NewtonDiverged, NumericalError)
    assert issubclass(NumericalError, StarSpecError)


def test_index_in_message():
    exc = NewtonDiverged("no root", index=7)
    assert exc.index == 7
    assert str(exc) == "no root (index n=7)"


def test_with_index_returns_same_error():
    exc = PoleProximity("near a pole")
    assert exc.with_index(3) is exc
    assert "n=3" in str(exc)


def test_message_without_index():
    assert str(ConfigNotFound("missing")) == "missing"
