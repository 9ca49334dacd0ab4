"""Slot-based domain definitions and the canonical vector orderings.

An ontology fixes the informable slots (with their value sets), the
requestable slots, the search methods and the backend entity database.
All vector layouts used elsewhere (belief vectors, feature frames,
agent inputs/outputs) are derived from the orderings frozen here.
"""

import json
from dataclasses import dataclass, field


class OntologyError(ValueError):
    """Raised when an ontology document violates its invariants."""


@dataclass(frozen=True)
class FlatIndex:
    """Bijection between vector positions and (slot, value) pairs.

    slot_type is one of "goal", "request", "method".  For "goal" the
    pairs are (slot, value) tuples; for the other two they are plain
    names.
    """

    slot_type: str
    pairs: tuple
    position: dict = field(repr=False)

    @property
    def dimension(self):
        return len(self.pairs)

    def index_of(self, pair):
        return self.position[pair]


class Ontology:
    """Immutable slot-based domain. Orderings are fixed at construction."""

    def __init__(self, name, informable, requestable, methods, entities):
        self.name = name
        self.informable = {slot: list(values) for slot, values in informable.items()}
        self.requestable = list(requestable)
        self.methods = list(methods)
        self.entities = [dict(e) for e in entities]
        _validate(self)

    @property
    def informable_slots(self):
        return list(self.informable.keys())

    def goal_pairs(self):
        return [(s, v) for s in self.informable for v in self.informable[s]]

    def matching_entities(self, constraints):
        """Entities consistent with a constraint dict; 'dontcare' matches all."""
        out = []
        for i, ent in enumerate(self.entities):
            if all(v == "dontcare" or ent.get(s) == v for s, v in constraints.items()):
                out.append(i)
        return out

    def to_document(self):
        return {
            "name": self.name,
            "informable": {s: list(vs) for s, vs in self.informable.items()},
            "requestable": list(self.requestable),
            "methods": list(self.methods),
            "entities": [dict(e) for e in self.entities],
        }

    def __eq__(self, other):
        return isinstance(other, Ontology) and self.to_document() == other.to_document()


def _validate(ont):
    seen_slots = set()
    for slot, values in ont.informable.items():
        if not slot:
            raise OntologyError("empty informable slot name")
        if slot in seen_slots:
            raise OntologyError(f"duplicate slot name: {slot!r}")
        seen_slots.add(slot)
        if len(values) < 2:
            raise OntologyError(f"informable slot {slot!r} needs >= 2 values")
        if len(set(values)) != len(values):
            raise OntologyError(f"duplicate values in slot {slot!r}")
        if any(not v for v in values):
            raise OntologyError(f"empty value name in slot {slot!r}")
    for slot in ont.requestable:
        if not slot:
            raise OntologyError("empty requestable slot name")
    if len(set(ont.requestable)) != len(ont.requestable):
        raise OntologyError("duplicate requestable slot")
    if len(set(ont.methods)) != len(ont.methods) or not ont.methods:
        raise OntologyError("methods must be nonempty and duplicate-free")
    for i, ent in enumerate(ont.entities):
        for slot, values in ont.informable.items():
            if slot not in ent:
                raise OntologyError(f"entity {i} missing informable slot {slot!r}")
            if ent[slot] not in values:
                raise OntologyError(
                    f"entity {i} has unknown value {ent[slot]!r} for slot {slot!r}"
                )


def load_ontology(path_or_text):
    """Parse and validate an ontology document (JSON).

    Accepts a file path or a raw JSON string.  The document has
    top-level keys name, informable, requestable, methods, entities.
    """
    text = path_or_text
    if not str(path_or_text).lstrip().startswith("{"):
        with open(path_or_text) as f:
            text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise OntologyError(f"ontology document does not parse: {e}") from e
    missing = {"name", "informable", "requestable", "methods", "entities"} - set(doc)
    if missing:
        raise OntologyError(f"missing top-level keys: {sorted(missing)}")
    return Ontology(
        doc["name"], doc["informable"], doc["requestable"], doc["methods"], doc["entities"]
    )


def serialize_ontology(ont, path=None):
    """Dump an ontology back to its JSON document form (round-trips exactly)."""
    text = json.dumps(ont.to_document(), indent=2)
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def flat_index(ont, slot_type):
    """Canonical coordinate system for one slot type.

    Ordering: slots in ontology order, values in value-list order.
    Pure function of the ontology.
    """
    if slot_type == "goal":
        pairs = tuple(ont.goal_pairs())
    elif slot_type == "request":
        pairs = tuple(ont.requestable)
    elif slot_type == "method":
        pairs = tuple(ont.methods)
    else:
        raise ValueError(f"unknown slot type: {slot_type!r}")
    return FlatIndex(slot_type, pairs, {p: i for i, p in enumerate(pairs)})


# --- built-in synthetic domains -------------------------------------------
#
# The DSTC corpora themselves are not used; these synthetic domains only
# mirror the slot counts (dstc2-like: 4 informable / 8 requestable,
# dstc3-like: 8 informable / 12 requestable).  Value-set sizes and entity
# tables are fixed synthetic choices.

METHODS = ["none", "byconstraints", "byalternatives", "finished"]


def _toy():
    informable = {
        "food": ["chinese", "indian"],
        "area": ["north", "south"],
    }
    requestable = ["phone", "addr"]
    entities = [
        {"food": "chinese", "area": "north", "phone": "555-0001", "addr": "1 main st"},
        {"food": "chinese", "area": "south", "phone": "555-0002", "addr": "2 main st"},
        {"food": "indian", "area": "north", "phone": "555-0003", "addr": "3 main st"},
    ]
    return Ontology("toy", informable, requestable, METHODS, entities)


def _dstc2_like():
    informable = {
        "food": ["chinese", "indian", "italian", "french", "thai"],
        "pricerange": ["cheap", "moderate", "expensive"],
        "area": ["north", "south", "centre"],
        "kidsallowed": ["yes", "no"],
    }
    requestable = ["phone", "addr", "postcode", "food", "pricerange",
                   "area", "kidsallowed", "signature"]
    rng_values = []
    foods = informable["food"]
    prices = informable["pricerange"]
    areas = informable["area"]
    kids = informable["kidsallowed"]
    k = 0
    for f in foods:
        for p in prices:
            for a in areas:
                rng_values.append({
                    "food": f, "pricerange": p, "area": a,
                    "kidsallowed": kids[k % 2],
                    "phone": f"555-1{k:03d}", "addr": f"{k} river st",
                    "postcode": f"cb{k % 5 + 1}", "signature": f"dish-{k}",
                })
                k += 1
    # keep a moderate database: every (food, price) combo appears at least once
    entities = [e for i, e in enumerate(rng_values) if i % 2 == 0]
    return Ontology("dstc2-like", informable, requestable, METHODS, entities)


def _dstc3_like():
    informable = {
        "food": ["chinese", "indian", "italian", "french", "thai"],
        "pricerange": ["cheap", "moderate", "expensive"],
        "area": ["north", "south", "centre", "riverside"],
        "kidsallowed": ["yes", "no"],
        "type": ["restaurant", "pub", "coffeeshop"],
        "hastv": ["yes", "no"],
        "hasinternet": ["yes", "no"],
        "near": ["museum", "park", "station"],
    }
    requestable = ["phone", "addr", "postcode", "food", "pricerange", "area",
                   "kidsallowed", "type", "hastv", "hasinternet", "near", "price"]
    entities = []
    foods = informable["food"]
    prices = informable["pricerange"]
    areas = informable["area"]
    types = informable["type"]
    nears = informable["near"]
    k = 0
    for f in foods:
        for p in prices:
            for a in areas:
                entities.append({
                    "food": f, "pricerange": p, "area": a,
                    "kidsallowed": "yes" if k % 2 == 0 else "no",
                    "type": types[k % 3],
                    "hastv": "yes" if k % 3 == 0 else "no",
                    "hasinternet": "yes" if k % 5 < 3 else "no",
                    "near": nears[k % 3],
                    "phone": f"555-2{k:03d}", "addr": f"{k} hill rd",
                    "postcode": f"cb{k % 7 + 1}", "price": f"{5 + k % 20} pounds",
                })
                k += 1
    entities = [e for i, e in enumerate(entities) if i % 2 == 0]
    return Ontology("dstc3-like", informable, requestable, METHODS, entities)


_BUILTINS = {"toy": _toy, "dstc2-like": _dstc2_like, "dstc3-like": _dstc3_like}


def builtin_ontology(name):
    """One of the fixed synthetic domains: toy, dstc2-like, dstc3-like."""
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise OntologyError(f"unknown builtin ontology: {name!r}") from None
