import pandas as pd
import streamlit as st

from features.protest import detect_replay
from features.sim import ScenarioResult

def verdict_component(result: ScenarioResult):
    """
    A Streamlit component that displays the outcome of a scenario run.

    :param result: The result of the run.
    """
    summary = result.summary()
    verdict = summary["verdict"]

    # Verdict and localization
    st.subheader("Verdict")
    if result.verdict is None:
        st.success("No violation was observed, so the destination filed no complaint.")
    else:
        col_1, col_2 = st.columns(2)
        with col_1:
            st.metric("Outcome", verdict["outcome"])
        with col_2:
            interval = verdict["interval"]
            st.metric("Adversary between", "-" if interval == "none" else f"AS{interval[0]} and AS{interval[1]}")
        st.write(f"**Admitting ASes**: {', '.join(f'AS{asn}' for asn in verdict['admitting']) or 'none'}")
        if verdict["reason"]:
            st.caption(verdict["reason"])

    # Counters
    st.subheader("Counters")
    counters = pd.DataFrame(sorted(result.counters.items()), columns=["counter", "value"]).set_index("counter")
    st.dataframe(counters, use_container_width=True)

    # Per-AS MAC failures from the complaint responses
    if result.responses:
        st.subheader("MAC failures per AS")
        failures = pd.DataFrame(
            {"AS": [f"AS{asn}" for asn in result.mac_failure_fraction()], "failure fraction": list(result.mac_failure_fraction().values())}
        ).set_index("AS")
        st.bar_chart(failures, y_label="Fraction of evidence records", use_container_width=True)

    # Duplicate (timestamp, seqno) groups in the stored evidence
    groups = detect_replay(result.bundle.records if result.bundle else result.records)
    with st.expander(f"Duplicate groups ({len(groups)})"):
        if groups:
            st.dataframe(
                pd.DataFrame(
                    [{"timestamp": group[0].fair.src_timestamp, "seqno": group[0].fair.seqno, "copies": len(group)} for group in groups]
                ),
                use_container_width=True,
            )
        else:
            st.write("No duplicates in the evidence.")

    st.caption(f"Determinism hash: `{result.determinism_hash}`")
