""" This module contains the AppState class. """
from lib.enums import Stage
from features.sim import ScenarioConfig, ScenarioResult

class AppState:
    """
    A class to represent the state of the dashboard.

    The dashboard moves from choosing a scenario (START) to showing the outcome of its run
    (RESULTS); the state keeps the chosen scenario and the result between Streamlit reruns.

    References:
    - Lavsani, A. (2023, Nov 14). Design Patterns in Python: State. The Magic of Transitions. https://medium.com/@amirm.lavasani/design-patterns-in-python-state-8916b2f65f69
    """
    def __init__(self):
        self.stage = Stage.START
        self.scenario = None
        self.result = None

    def reset(self):
        """ Reset the state. """
        self.stage = Stage.START
        self.scenario = None
        self.result = None

    @property
    def stage(self):
        """Return the stage."""
        return self._stage

    @stage.setter
    def stage(self, stage: Stage):
        """
        Set a new stage.

        :param stage: The new stage to set.

        :raises TypeError: If the stage is not of type Stage.
        """
        if isinstance(stage, Stage):
            self._stage = stage
        else:
            raise TypeError("Please provide a valid Stage object.")

    @property
    def scenario(self):
        """Return the chosen scenario."""
        return self._scenario

    @scenario.setter
    def scenario(self, scenario: ScenarioConfig):
        """
        Set the scenario.

        :raises TypeError: If the scenario is not a ScenarioConfig.
        """
        if scenario is not None and not isinstance(scenario, ScenarioConfig):
            raise TypeError("Please provide a valid scenario.")
        self._scenario = scenario

    @property
    def result(self):
        """Return the result of the last run."""
        return self._result

    @result.setter
    def result(self, result: ScenarioResult):
        """
        Set the run result.

        :raises TypeError: If the result is not a ScenarioResult.
        """
        if result is not None and not isinstance(result, ScenarioResult):
            raise TypeError("Please provide a valid scenario result.")
        self._result = result
