import pytest

from lib.enums import Stage
from lib.states import AppState


def test_new_state_starts_empty():
    state = AppState()
    assert state.stage is Stage.START and state.scenario is None and state.result is None


@pytest.mark.parametrize("field, value", [("stage", "results"), ("scenario", {"name": "flood"}), ("result", 1)])
def test_setters_reject_wrong_types(field, value):
    with pytest.raises(TypeError):
        setattr(AppState(), field, value)


def test_reset_returns_to_the_start():
    state = AppState()
    state.stage = Stage.RESULTS
    state.reset()
    assert state.stage is Stage.START
