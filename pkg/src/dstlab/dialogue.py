"""Semantic acts, SLU hypothesis lists, user goals and belief states.

Everything here is a plain value type; dialogues are exchanges of
DialogueActs, the SLU channel emits scored SluHypotheses, and trackers
emit BeliefStates.
"""

import json
from dataclasses import dataclass, field

import numpy as np

ACT_TYPES = frozenset({
    "hello", "inform", "request", "confirm", "deny", "affirm", "negate",
    "offer", "bye", "reqalts", "repeat", "canthelp",
})

# which act types each side may utter
USER_ACTS = frozenset({
    "hello", "inform", "request", "deny", "affirm", "negate", "bye",
    "reqalts", "repeat",
})
SYSTEM_ACTS = frozenset({
    "hello", "inform", "request", "confirm", "offer", "bye", "canthelp",
    "repeat",
})

TURN_LOG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DialogueAct:
    """A semantic frame: actor, act type and slot-value arguments."""

    actor: str
    act_type: str
    args: tuple = ()

    def __post_init__(self):
        if self.act_type not in ACT_TYPES:
            raise ValueError(f"unknown act type {self.act_type!r}")
        legal = USER_ACTS if self.actor == "user" else SYSTEM_ACTS
        if self.actor not in ("user", "system"):
            raise ValueError(f"unknown actor {self.actor!r}")
        if self.act_type not in legal:
            raise ValueError(f"{self.actor} may not utter {self.act_type!r}")
        object.__setattr__(self, "args", tuple(tuple(a) for a in self.args))
        if self.act_type in ("inform", "confirm", "deny"):
            if not self.args or any(v is None for _, v in self.args):
                raise ValueError(f"{self.act_type} needs slot and value")
        if self.act_type == "request":
            if not self.args or any(v is not None for _, v in self.args):
                raise ValueError("request carries slot only")
        if self.act_type == "offer" and not self.args:
            raise ValueError("offer carries an entity reference")

    def __str__(self):
        inner = ",".join(s if v is None else f"{s}={v}" for s, v in self.args)
        return f"{self.act_type}({inner})"


def user_act(act_type, *args):
    return DialogueAct("user", act_type, args)


def system_act(act_type, *args):
    return DialogueAct("system", act_type, args)


@dataclass(frozen=True)
class SluHypotheses:
    """Scored N-best list of act-list hypotheses; scores sum to <= 1."""

    items: tuple  # of (acts tuple, confidence)

    def __post_init__(self):
        object.__setattr__(
            self, "items", tuple((tuple(acts), float(c)) for acts, c in self.items)
        )
        confs = [c for _, c in self.items]
        if sum(confs) > 1.0 + 1e-9:
            raise ValueError(f"confidences sum to {sum(confs)} > 1")
        if any(c < 0 for c in confs):
            raise ValueError("negative confidence")
        if any(confs[i] < confs[i + 1] for i in range(len(confs) - 1)):
            raise ValueError("confidences must be non-increasing")

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class UserGoal:
    constraints: dict  # informable slot -> value (or "dontcare")
    requests: frozenset  # requestable slot names
    method: str


class BeliefState:
    """Per-slot goal distributions (with a None mass), independent request
    probabilities, and a method distribution."""

    def __init__(self, goal, goal_none, request, method):
        self.goal = {s: dict(d) for s, d in goal.items()}
        self.goal_none = dict(goal_none)
        self.request = dict(request)
        self.method = dict(method)

    def copy(self):
        return BeliefState(self.goal, self.goal_none, self.request, self.method)

    def top_goal(self, slot):
        """(value, mass) of the strongest value hypothesis for a slot."""
        d = self.goal[slot]
        v = max(d, key=lambda k: d[k])
        return v, d[v]

    def validate(self, atol=1e-6):
        for slot, d in self.goal.items():
            masses = list(d.values()) + [self.goal_none[slot]]
            if any(m < -atol or m > 1 + atol for m in masses):
                raise ValueError(f"goal slot {slot!r} mass out of [0,1]")
            if abs(sum(masses) - 1.0) > atol:
                raise ValueError(f"goal slot {slot!r} masses sum to {sum(masses)}")
        for slot, p in self.request.items():
            if p < -atol or p > 1 + atol:
                raise ValueError(f"request {slot!r} probability out of [0,1]")
        if any(p < -atol or p > 1 + atol for p in self.method.values()):
            raise ValueError("method mass out of [0,1]")
        if abs(sum(self.method.values()) - 1.0) > atol:
            raise ValueError("method distribution does not sum to 1")
        return self


def uniform_belief(ont):
    """Turn-0 belief: all None mass on goals, no requests, first method."""
    goal = {s: {v: 0.0 for v in vs} for s, vs in ont.informable.items()}
    goal_none = {s: 1.0 for s in ont.informable}
    request = {s: 0.0 for s in ont.requestable}
    method = {m: 0.0 for m in ont.methods}
    method[ont.methods[0]] = 1.0
    return BeliefState(goal, goal_none, request, method)


def belief_vector(belief, index):
    """Belief masses laid out per a FlatIndex. Goal vectors exclude the
    None mass (recoverable as 1 minus the slot sum)."""
    out = np.empty(index.dimension)
    if index.slot_type == "goal":
        for i, (slot, value) in enumerate(index.pairs):
            out[i] = belief.goal[slot][value]
    elif index.slot_type == "request":
        for i, slot in enumerate(index.pairs):
            out[i] = belief.request[slot]
    else:
        for i, m in enumerate(index.pairs):
            out[i] = belief.method[m]
    return out


def vector_to_belief(raw, index, ont):
    """Map an unconstrained vector onto a valid belief fragment.

    Entries are clamped to [0,1]; a goal slot whose clamped sum exceeds 1
    is rescaled to sum 1 (None mass 0), otherwise the None mass absorbs
    the residual; the method vector is renormalized (all-zero -> uniform);
    request entries are only clamped.  Returns the same dict shapes as the
    matching BeliefState fragment.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (index.dimension,):
        raise ValueError(f"raw vector has shape {raw.shape}, index dimension {index.dimension}")
    x = np.clip(raw, 0.0, 1.0)
    if index.slot_type == "goal":
        goal, goal_none = {}, {}
        pos = 0
        for slot, values in ont.informable.items():
            n = len(values)
            seg = x[pos:pos + n]
            total = seg.sum()
            if total > 1.0:
                seg = seg / total
                goal_none[slot] = 0.0
            else:
                goal_none[slot] = 1.0 - total
            goal[slot] = {v: float(m) for v, m in zip(values, seg)}
            pos += n
        return goal, goal_none
    if index.slot_type == "request":
        return {slot: float(p) for slot, p in zip(index.pairs, x)}
    total = x.sum()
    if total <= 0.0:
        x = np.full(index.dimension, 1.0 / index.dimension)
    else:
        x = x / total
    return {m: float(p) for m, p in zip(index.pairs, x)}


@dataclass
class TurnRecord:
    """One turn of an episode: what the user said, what the SLU heard,
    what the trackers produced and what the system did next."""

    turn_index: int
    system_act: DialogueAct  # act chosen by the system at the end of this turn
    user_acts: tuple
    slu: SluHypotheses
    belief_aux: BeliefState
    belief_executed: BeliefState
    rewards: dict = field(default_factory=dict)

    def to_json(self):
        def act(a):
            return {"actor": a.actor, "type": a.act_type, "args": [list(x) for x in a.args]}

        return json.dumps({
            "v": TURN_LOG_SCHEMA_VERSION,
            "turn": self.turn_index,
            "system_act": act(self.system_act),
            "user_acts": [act(a) for a in self.user_acts],
            "slu": [{"acts": [act(a) for a in acts], "conf": c} for acts, c in self.slu],
            "rewards": self.rewards,
        })
