"""Polynomial auxiliary tracker (the teacher).

Each (slot, value) pair is summarized by six probabilistic features and
updated by a fixed low-order polynomial, one polynomial per slot type.
The goal polynomial is

    b'(v) = (b(v) + p_plus * (1 - b(v))) * (1 - p_minus - p_plus_other)

The request and method rules are not pinned down by the goal rule's
source; the defaults below (requests accumulate evidence, methods mix
evidence with persistence) follow common DSTC tracker conventions and
can be swapped via the ``rules`` argument of :func:`track`.
"""

from dataclasses import dataclass

import numpy as np

from .dialogue import BeliefState


@dataclass(frozen=True)
class SlotValueFeatures:
    """Six probabilistic features for one (slot, value) pair."""

    p_plus: float
    p_minus: float
    p_plus_other: float
    p_minus_other: float
    b_rest: float
    b_prev: float

    def clamped(self):
        c = lambda x: min(1.0, max(0.0, x))
        return SlotValueFeatures(
            c(self.p_plus), c(self.p_minus), c(self.p_plus_other),
            c(self.p_minus_other), c(self.b_rest), c(self.b_prev),
        )


@dataclass
class FeatureFrame:
    """Per-slot-type feature lists in FlatIndex order for one turn."""

    goal: list  # SlotValueFeatures per goal (slot, value) pair
    request: list  # per requestable slot
    method: list  # per method
    turn_index: int = 0

    def vector(self, slot_type):
        feats = getattr(self, slot_type)
        out = np.empty(6 * len(feats))
        for i, f in enumerate(feats):
            out[6 * i:6 * i + 6] = (f.p_plus, f.p_minus, f.p_plus_other,
                                    f.p_minus_other, f.b_rest, f.b_prev)
        return out


def _hyp_has(acts, act_type, slot=None, value=None):
    for a in acts:
        if a.act_type != act_type:
            continue
        if slot is None:
            return True
        for s, v in a.args:
            if s == slot and (value is None or v == value):
                return True
    return False


def _method_of(acts):
    """Which search method an act list signals, if any."""
    for a in acts:
        if a.act_type == "bye":
            return "finished"
    for a in acts:
        if a.act_type == "reqalts":
            return "byalternatives"
    for a in acts:
        if a.act_type == "inform":
            return "byconstraints"
    return None


def extract_features(slu, prev, sys_act, ont, turn_index=0):
    """Aggregate SLU confidences into the six features per pair.

    p_plus(v) sums the confidences of hypotheses informing v (or
    affirming while the system confirmed v); p_minus(v) the ones denying
    it (or negating under the same confirm).  The *_other features sum
    the same quantities over the slot's other values.
    """
    confirm_slot = confirm_value = None
    if sys_act is not None and sys_act.act_type == "confirm" and sys_act.args:
        confirm_slot, confirm_value = sys_act.args[0]

    goal_feats = []
    for slot, values in ont.informable.items():
        p_plus = dict.fromkeys(values, 0.0)
        p_minus = dict.fromkeys(values, 0.0)
        for acts, conf in slu:
            for v in values:
                if _hyp_has(acts, "inform", slot, v):
                    p_plus[v] += conf
                if _hyp_has(acts, "deny", slot, v):
                    p_minus[v] += conf
            if confirm_slot == slot and confirm_value in values:
                if _hyp_has(acts, "affirm"):
                    p_plus[confirm_value] += conf
                if _hyp_has(acts, "negate"):
                    p_minus[confirm_value] += conf
        sum_plus = sum(p_plus.values())
        sum_minus = sum(p_minus.values())
        for v in values:
            goal_feats.append(SlotValueFeatures(
                p_plus=p_plus[v], p_minus=p_minus[v],
                p_plus_other=sum_plus - p_plus[v],
                p_minus_other=sum_minus - p_minus[v],
                b_rest=prev.goal_none[slot], b_prev=prev.goal[slot][v],
            ).clamped())

    req_plus = {s: 0.0 for s in ont.requestable}
    for acts, conf in slu:
        for s in ont.requestable:
            if _hyp_has(acts, "request", s):
                req_plus[s] += conf
    sum_req = sum(req_plus.values())
    request_feats = [
        SlotValueFeatures(
            p_plus=req_plus[s], p_minus=0.0,
            p_plus_other=sum_req - req_plus[s], p_minus_other=0.0,
            b_rest=1.0 - prev.request[s], b_prev=prev.request[s],
        ).clamped()
        for s in ont.requestable
    ]

    m_plus = {m: 0.0 for m in ont.methods}
    for acts, conf in slu:
        m = _method_of(acts)
        if m in m_plus:
            m_plus[m] += conf
    sum_m = sum(m_plus.values())
    method_feats = [
        SlotValueFeatures(
            p_plus=m_plus[m], p_minus=0.0,
            p_plus_other=sum_m - m_plus[m], p_minus_other=0.0,
            b_rest=0.0, b_prev=prev.method[m],
        ).clamped()
        for m in ont.methods
    ]
    return FeatureFrame(goal_feats, request_feats, method_feats, turn_index)


def cmbp_goal_update(f):
    """Goal polynomial, clamped to [0,1]."""
    b = (f.b_prev + f.p_plus * (1.0 - f.b_prev)) * (1.0 - f.p_minus - f.p_plus_other)
    return min(1.0, max(0.0, b))


def cmbp_request_update(f):
    """Requests accumulate evidence (probabilistic OR with the previous
    mass); requests are independent, so other slots do not inhibit."""
    b = f.p_plus + f.b_prev * (1.0 - f.p_plus)
    return min(1.0, max(0.0, b))


def cmbp_method_update(f):
    """Evidence plus persistence of the previous mass; renormalized by
    the caller across methods."""
    b = f.p_plus + f.b_prev * (1.0 - f.p_plus_other - f.p_plus)
    return min(1.0, max(0.0, b))


DEFAULT_RULES = {
    "goal": cmbp_goal_update,
    "request": cmbp_request_update,
    "method": cmbp_method_update,
}


def track(prev, slu, sys_act, ont, rules=None, turn_index=0):
    """One tracker turn: features -> polynomials -> valid BeliefState."""
    rules = rules or DEFAULT_RULES
    frame = extract_features(slu, prev, sys_act, ont, turn_index)
    return track_frame(frame, ont, rules)


def track_frame(frame, ont, rules=None):
    """Apply the per-type polynomials to an already-extracted frame."""
    rules = rules or DEFAULT_RULES
    goal, goal_none = {}, {}
    i = 0
    for slot, values in ont.informable.items():
        masses = np.array([rules["goal"](frame.goal[i + k]) for k in range(len(values))])
        i += len(values)
        total = masses.sum()
        if total > 1.0:
            masses = masses / total
            goal_none[slot] = 0.0
        else:
            goal_none[slot] = 1.0 - total
        goal[slot] = {v: float(m) for v, m in zip(values, masses)}

    request = {s: rules["request"](f) for s, f in zip(ont.requestable, frame.request)}

    m_raw = np.array([rules["method"](f) for f in frame.method])
    total = m_raw.sum()
    if total <= 0:
        m_raw = np.full(len(m_raw), 1.0 / len(m_raw))
    else:
        m_raw = m_raw / total
    method = {m: float(p) for m, p in zip(ont.methods, m_raw)}
    return BeliefState(goal, goal_none, request, method)
