"""Scenario derivation from distressing abstract edges."""

from __future__ import annotations

from eskg.kg.model import AbstractKG, Scenario

PROMPT_TEMPLATE = "A child {relation} {object}."


def derive_scenarios(abstract: AbstractKG) -> list[Scenario]:
    """One scenario per negative-polarity edge, rendered from a fixed template.

    Edges that already carry a scenario id keep it; fresh ids are assigned
    deterministically by position. Mutates the graph (version bump) when any
    edge gains a scenario id.
    """
    scenarios = []
    used = {e.scenario_id for e in abstract.edges if e.scenario_id}
    assigned = False
    counter = 1
    for edge in abstract.negative_edges():
        if edge.scenario_id is None:
            while f"scn-{counter:02d}" in used:
                counter += 1
            edge.scenario_id = f"scn-{counter:02d}"
            used.add(edge.scenario_id)
            assigned = True
        text = abstract.edge_text(edge)
        scenarios.append(
            Scenario(
                id=edge.scenario_id,
                edge_key=edge.key,
                prompt_text=PROMPT_TEMPLATE.format(relation=text.relation, object=text.object),
            )
        )
    if assigned:
        abstract.bump()
    return scenarios
