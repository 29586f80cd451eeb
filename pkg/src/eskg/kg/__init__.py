from eskg.kg.model import (
    AbstractEdge,
    AbstractKG,
    ChildTKG,
    Entity,
    EntityType,
    Introductions,
    Polarity,
    Provenance,
    RelationType,
    Scenario,
    TemporalTriple,
    TimeKind,
    TimeRef,
    Triple,
    TripleText,
    init_child_tkg,
    map_intake_entity,
    normalize_label,
)
from eskg.kg.io import (
    load_abstract_kg,
    load_child_snapshot,
    load_child_tkg,
    read_event_log,
    replay_events,
    save_abstract_kg,
    save_child_snapshot,
    write_event_log,
)
from eskg.kg.scenarios import derive_scenarios

__all__ = [
    "AbstractEdge",
    "AbstractKG",
    "ChildTKG",
    "Entity",
    "EntityType",
    "Introductions",
    "Polarity",
    "Provenance",
    "RelationType",
    "Scenario",
    "TemporalTriple",
    "TimeKind",
    "TimeRef",
    "Triple",
    "TripleText",
    "derive_scenarios",
    "init_child_tkg",
    "load_abstract_kg",
    "load_child_snapshot",
    "load_child_tkg",
    "map_intake_entity",
    "normalize_label",
    "read_event_log",
    "replay_events",
    "save_abstract_kg",
    "save_child_snapshot",
    "write_event_log",
]
