"""This module contains handler functions for the different stages of the dashboard.

Each handler function is responsible for rendering the UI for a specific stage.
Each handler function should be named handle_<stage_name> and accept no arguments.
"""
from pathlib import Path

import streamlit as st

from components.verdict_component import verdict_component
from features.sim import load_scenario, run_scenario
from lib.config import get_settings
from lib.errors import FairError, ScenarioValidationError
from lib.states import Stage

# Get the app state from the session state
if "app_state" not in st.session_state:
    st.error("App state not found. Please restart the app.")
    st.stop()
app_state = st.session_state.app_state

def update_ui():
    """ Rerun the app to render the next stage. """
    st.rerun()

def scenario_files() -> list[str]:
    """ Return the scenario names available in the scenario directory. """
    return sorted(path.stem for path in Path(get_settings().scenario_dir).glob("*.json"))

@st.fragment
def handle_start():
    """ Render the UI for the start stage: choose a scenario and a seed. """
    st.title(":red[:material/policy:] FAIR Simulator")
    st.write("Run a channel through cooperating and misbehaving ASes and see who the protest blames.")

    st.divider()

    names = scenario_files()
    if not names:
        st.warning(f"No scenario files found in `{get_settings().scenario_dir}`.")
        return

    with st.container(border=True):
        name = st.selectbox("Scenario", names)
        try:
            scenario = load_scenario(name)
        except ScenarioValidationError as exc:
            st.error(str(exc))
            return
        seed = st.number_input("Seed", min_value=0, value=scenario.seed, step=1)

        with st.expander("Scenario"):
            st.json(scenario.model_dump(mode="json"))

        if st.button("Run", type="primary", icon=":material/play_arrow:"):
            app_state.scenario = scenario.with_seed(int(seed))
            with st.spinner("Simulating the channel..."):
                try:
                    app_state.result = run_scenario(app_state.scenario)
                except FairError as exc:
                    st.error(f"The run failed: {exc}")
                    return
            app_state.stage = Stage.RESULTS
            st.session_state.app_state = app_state
            update_ui()

@st.fragment
def handle_results():
    """ Render the UI for the results stage. """
    st.title(f"Scenario {app_state.scenario.name}")
    st.write(f"Seed {app_state.scenario.seed}")

    verdict_component(app_state.result)

    st.divider()
    if st.button("Choose another scenario", icon=":material/restart_alt:"):
        app_state.reset()
        st.session_state.app_state = app_state
        update_ui()
