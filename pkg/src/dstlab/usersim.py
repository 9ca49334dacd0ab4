"""Agenda-based simulated user plus the semantic error channel.

The user keeps a stack of pending acts derived from a sampled goal and
reacts to each system act with standard agenda dynamics.  The error
channel turns the true user acts into a scored N-best list the way a
noisy SLU front-end would.
"""

from dataclasses import dataclass, field

import numpy as np

from .dialogue import DialogueAct, SluHypotheses, UserGoal, user_act


@dataclass
class ErrorModel:
    """Schatzmann-style semantic confusion channel.

    With probability error_rate the top hypothesis is a confusion of the
    true acts (value substitution / act-type flip / act deletion, per the
    confusion weights); the remaining n-best slots hold distractor
    confusions.  All parameters are synthetic choices.
    """

    error_rate: float = 0.15
    nbest: int = 3
    w_value_sub: float = 0.6
    w_act_sub: float = 0.25
    w_deletion: float = 0.15
    temperature: float = 1.0
    total_mass: float = 0.9  # residual 1 - total_mass models unseen hypotheses

    def __post_init__(self):
        if self.nbest < 1:
            raise ValueError("n-best size must be >= 1")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error rate must be in [0,1]")
        w = self.w_value_sub + self.w_act_sub + self.w_deletion
        if abs(w - 1.0) > 1e-9:
            raise ValueError(f"confusion weights sum to {w}, expected 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass
class Agenda:
    """Pending user acts plus goal bookkeeping for one dialogue."""

    goal: UserGoal
    stack: list = field(default_factory=list)
    patience: int = 20
    offered_entity: tuple = None  # args of the accepted system offer
    matched_offer: bool = False
    fulfilled: set = field(default_factory=set)
    informed: set = field(default_factory=set)  # constraint slots already stated


def sample_goal(ont, rng):
    """Random reachable goal: constraints over a nonempty slot subset such
    that at least one entity matches, 1-3 requested slots, a method."""
    rng = _as_rng(rng)
    slots = ont.informable_slots
    while True:
        k = int(rng.integers(1, len(slots) + 1))
        chosen = list(rng.choice(len(slots), size=k, replace=False))
        constraints = {}
        for i in sorted(chosen):
            slot = slots[i]
            if rng.random() < 0.1:
                constraints[slot] = "dontcare"
            else:
                values = ont.informable[slot]
                constraints[slot] = values[int(rng.integers(len(values)))]
        if ont.matching_entities(constraints):
            break
    n_req = int(rng.integers(1, min(3, len(ont.requestable)) + 1))
    req_idx = rng.choice(len(ont.requestable), size=n_req, replace=False)
    requests = frozenset(ont.requestable[int(i)] for i in req_idx)
    methods = ont.methods[1:] if len(ont.methods) > 1 else ont.methods
    method = methods[int(rng.integers(len(methods)))]
    return UserGoal(constraints, requests, method)


def new_agenda(goal, rng, patience=20):
    """Seed the agenda with the goal constraints in random order."""
    rng = _as_rng(rng)
    agenda = Agenda(goal=goal, patience=patience)
    slots = list(goal.constraints)
    order = rng.permutation(len(slots))
    for i in order:
        slot = slots[int(i)]
        agenda.stack.append(user_act("inform", (slot, goal.constraints[slot])))
    return agenda


def _offer_matches(goal, offer_args):
    offered = dict(offer_args)
    return all(
        v == "dontcare" or offered.get(s) == v for s, v in goal.constraints.items()
    )


def user_respond(agenda, sys_act, rng):
    """React to a system act: returns (true user acts, updated agenda).

    The agenda is mutated in place and also returned.
    """
    rng = _as_rng(rng)
    goal = agenda.goal
    agenda.patience -= 1
    if agenda.patience <= 0:
        return (user_act("bye"),), agenda

    t = sys_act.act_type
    if t == "request" and sys_act.args:
        slot = sys_act.args[0][0]
        value = goal.constraints.get(slot, "dontcare")
        agenda.stack = [a for a in agenda.stack
                        if not (a.act_type == "inform" and a.args[0][0] == slot)]
        agenda.stack.append(user_act("inform", (slot, value)))
        agenda.informed.add(slot)
    elif t == "confirm" and sys_act.args:
        slot, value = sys_act.args[0]
        truth = goal.constraints.get(slot, "dontcare")
        if truth == value:
            agenda.stack.append(user_act("affirm"))
        else:
            agenda.stack.append(user_act("inform", (slot, truth)))
            agenda.stack.append(user_act("negate"))
    elif t == "offer":
        if _offer_matches(goal, sys_act.args):
            agenda.matched_offer = True
            agenda.offered_entity = sys_act.args
            pending = sorted(goal.requests - agenda.fulfilled)
            if pending:
                agenda.stack = [a for a in agenda.stack if a.act_type != "request"]
                for slot in pending:
                    agenda.stack.append(user_act("request", (slot, None)))
            else:
                agenda.stack.append(user_act("bye"))
        else:
            violated = [s for s, v in goal.constraints.items()
                        if v != "dontcare" and dict(sys_act.args).get(s) != v]
            slot = violated[0]
            agenda.matched_offer = False
            agenda.stack.append(user_act("inform", (slot, goal.constraints[slot])))
            agenda.stack.append(user_act("reqalts"))
    elif t == "inform":
        # system answering requests about the offered entity
        for slot, _ in sys_act.args:
            agenda.fulfilled.add(slot)
            agenda.stack = [a for a in agenda.stack
                            if not (a.act_type == "request" and a.args[0][0] == slot)]
        if agenda.matched_offer and not (goal.requests - agenda.fulfilled):
            agenda.stack.append(user_act("bye"))
    elif t == "canthelp":
        agenda.stack.append(user_act("bye"))
    # hello / repeat / other: fall through to the backlog below

    if not agenda.stack:
        if agenda.matched_offer:
            pending = sorted(goal.requests - agenda.fulfilled)
            if pending:
                agenda.stack.append(user_act("request", (pending[0], None)))
            else:
                agenda.stack.append(user_act("bye"))
        elif goal.constraints:
            # restate a constraint the system apparently missed
            slots = sorted(goal.constraints)
            slot = slots[int(rng.integers(len(slots)))]
            agenda.stack.append(user_act("inform", (slot, goal.constraints[slot])))
        else:
            agenda.stack.append(user_act("repeat"))

    n = min(len(agenda.stack), 2)
    acts = tuple(agenda.stack.pop() for _ in range(n))
    return acts, agenda


# --- error channel ---------------------------------------------------------

def _confuse(acts, model, ont, rng):
    """One confusion of a true act list per the confusion weights."""
    acts = list(acts)
    r = rng.random()
    valued = [i for i, a in enumerate(acts)
              if a.act_type in ("inform", "deny") and a.args]
    if r < model.w_value_sub and valued:
        i = valued[int(rng.integers(len(valued)))]
        slot, value = acts[i].args[0]
        values = [v for v in ont.informable.get(slot, []) if v != value]
        if values:
            wrong = values[int(rng.integers(len(values)))]
            acts[i] = DialogueAct("user", acts[i].act_type, ((slot, wrong),))
            return tuple(acts)
        # slot has no alternatives; fall through to act substitution
    if r < model.w_value_sub + model.w_act_sub or not acts:
        if not acts:
            return (user_act("repeat"),)
        i = int(rng.integers(len(acts)))
        a = acts[i]
        if a.act_type == "inform" and a.args:
            acts[i] = DialogueAct("user", "deny", a.args)
        elif a.act_type == "deny" and a.args:
            acts[i] = DialogueAct("user", "inform", a.args)
        elif a.act_type == "affirm":
            acts[i] = user_act("negate")
        elif a.act_type == "negate":
            acts[i] = user_act("affirm")
        elif a.act_type == "request" and a.args and ont.requestable:
            others = [s for s in ont.requestable if s != a.args[0][0]]
            if others:
                acts[i] = user_act("request", (others[int(rng.integers(len(others)))], None))
            else:
                acts[i] = user_act("repeat")
        else:
            acts[i] = user_act("repeat")
        return tuple(acts)
    # deletion
    i = int(rng.integers(len(acts)))
    del acts[i]
    return tuple(acts)


def corrupt(true_acts, model, ont, rng):
    """Noisy SLU channel: scored N-best list over act-list hypotheses.

    With probability 1 - error_rate the top hypothesis is the truth;
    otherwise it is a confusion.  Confidences come from a temperature
    softmax over exponential noise, scaled so they sum to total_mass.
    """
    rng = _as_rng(rng)
    true_acts = tuple(true_acts)
    top_is_true = rng.random() >= model.error_rate
    hyps = []
    top = true_acts if top_is_true else _confuse(true_acts, model, ont, rng)
    hyps.append(top)
    for _ in range(model.nbest - 1):
        hyps.append(_confuse(true_acts, model, ont, rng))
    noise = rng.exponential(1.0, size=len(hyps))
    z = noise / model.temperature
    z -= z.max()
    w = np.exp(z)
    w /= w.sum()
    w = np.sort(w)[::-1] * model.total_mass  # top hypothesis keeps the largest share
    return SluHypotheses(tuple(zip(hyps, w)))


def is_success(goal, episode):
    """True iff a goal-consistent entity was offered and every requested
    slot of that entity was informed afterwards, all before dialogue end."""
    offered = None
    pending = set(goal.requests)
    for rec in episode:
        act = rec.system_act
        if act is None:
            continue
        if act.act_type == "offer" and _offer_matches(goal, act.args):
            offered = dict(act.args)
            pending = set(goal.requests)
        elif act.act_type == "offer":
            offered = None  # a mismatched offer supersedes a previous match
            pending = set(goal.requests)
        elif act.act_type == "inform" and offered is not None:
            for slot, _ in act.args:
                pending.discard(slot)
    return offered is not None and not pending


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
