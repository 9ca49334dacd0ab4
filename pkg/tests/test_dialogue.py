import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dstlab.dialogue import (BeliefState, DialogueAct, SluHypotheses, uniform_belief,
                             belief_vector, vector_to_belief, user_act, system_act)
from dstlab.ontology import flat_index


class TestDialogueAct:
    def test_inform_needs_value(self):
        with pytest.raises(ValueError):
            user_act("inform", ("food", None))

    def test_request_carries_slot_only(self):
        with pytest.raises(ValueError):
            user_act("request", ("phone", "123"))
        act = user_act("request", ("phone", None))
        assert act.args == (("phone", None),)

    def test_actor_legality(self):
        with pytest.raises(ValueError):
            user_act("offer", ("food", "chinese"))  # system-only
        with pytest.raises(ValueError):
            system_act("affirm")  # user-only
        with pytest.raises(ValueError):
            DialogueAct("narrator", "hello")

    def test_unknown_act_type(self):
        with pytest.raises(ValueError):
            user_act("shout")

    def test_str_form(self):
        assert str(user_act("inform", ("food", "thai"))) == "inform(food=thai)"


class TestSluHypotheses:
    def test_sum_cap(self):
        with pytest.raises(ValueError):
            SluHypotheses((((), 0.7), ((), 0.6)))

    def test_non_increasing(self):
        with pytest.raises(ValueError):
            SluHypotheses((((), 0.2), ((), 0.3)))

    def test_valid(self):
        h = SluHypotheses((((user_act("affirm"),), 0.6), ((), 0.3)))
        assert len(h) == 2


class TestUniformBelief:
    def test_goal_all_none(self, toy):
        b = uniform_belief(toy)
        assert b.goal_none["food"] == 1.0
        assert b.goal["food"] == {"chinese": 0.0, "indian": 0.0}

    def test_requests_zero(self, toy):
        assert uniform_belief(toy).request["phone"] == 0.0

    def test_method_mass_on_first(self, toy):
        b = uniform_belief(toy)
        assert b.method[toy.methods[0]] == 1.0
        assert sum(b.method.values()) == 1.0

    def test_validates(self, dstc3):
        uniform_belief(dstc3).validate()


class TestBeliefVector:
    def test_uniform_is_zero(self, toy):
        gi = flat_index(toy, "goal")
        assert belief_vector(uniform_belief(toy), gi).tolist() == [0.0] * 4

    def test_position(self, toy):
        gi = flat_index(toy, "goal")
        b = uniform_belief(toy)
        b.goal["food"]["chinese"] = 0.7
        b.goal_none["food"] = 0.3
        v = belief_vector(b, gi)
        assert v[gi.index_of(("food", "chinese"))] == 0.7

    def test_round_trip(self, toy):
        gi = flat_index(toy, "goal")
        b = uniform_belief(toy)
        b.goal["food"] = {"chinese": 0.4, "indian": 0.3}
        b.goal_none["food"] = 0.3
        goal, goal_none = vector_to_belief(belief_vector(b, gi), gi, toy)
        for slot in toy.informable:
            for v in toy.informable[slot]:
                assert abs(goal[slot][v] - b.goal[slot][v]) < 1e-12


class TestVectorToBelief:
    def test_none_mass_absorbs_residual(self, toy):
        gi = flat_index(toy, "goal")
        goal, goal_none = vector_to_belief([0.3, 0.4, 0.0, 0.0], gi, toy)
        assert goal["food"] == {"chinese": 0.3, "indian": 0.4}
        assert abs(goal_none["food"] - 0.3) < 1e-12

    def test_rescale_when_over_one(self, toy):
        gi = flat_index(toy, "goal")
        goal, goal_none = vector_to_belief([0.8, 0.6, 0.0, 0.0], gi, toy)
        assert abs(goal["food"]["chinese"] - 0.8 / 1.4) < 1e-12
        assert abs(goal["food"]["indian"] - 0.6 / 1.4) < 1e-12
        assert goal_none["food"] == 0.0

    def test_clamp_negative(self, toy):
        ri = flat_index(toy, "request")
        req = vector_to_belief([-0.2, 0.5], ri, toy)
        assert req["phone"] == 0.0 and req["addr"] == 0.5

    def test_method_all_zero_goes_uniform(self, toy):
        mi = flat_index(toy, "method")
        m = vector_to_belief([0.0] * mi.dimension, mi, toy)
        assert all(abs(p - 1 / mi.dimension) < 1e-12 for p in m.values())

    def test_dimension_mismatch(self, toy):
        with pytest.raises(ValueError):
            vector_to_belief([0.1], flat_index(toy, "goal"), toy)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=10, max_size=10))
    def test_any_raw_vector_yields_valid_belief(self, raw):
        # toy: goal dim 4, request dim 2, method dim 4
        from dstlab.ontology import builtin_ontology
        toy = builtin_ontology("toy")
        goal, goal_none = vector_to_belief(raw[:4], flat_index(toy, "goal"), toy)
        request = vector_to_belief(raw[4:6], flat_index(toy, "request"), toy)
        method = vector_to_belief(raw[6:10], flat_index(toy, "method"), toy)
        BeliefState(goal, goal_none, request, method).validate()

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 0.45), min_size=4, max_size=4))
    def test_idempotent_on_valid_vectors(self, raw):
        from dstlab.ontology import builtin_ontology
        toy = builtin_ontology("toy")
        gi = flat_index(toy, "goal")
        goal, goal_none = vector_to_belief(raw, gi, toy)
        b = uniform_belief(toy)
        b.goal, b.goal_none = goal, goal_none
        v1 = belief_vector(b, gi)
        goal2, goal_none2 = vector_to_belief(v1, gi, toy)
        b2 = uniform_belief(toy)
        b2.goal, b2.goal_none = goal2, goal_none2
        assert np.allclose(v1, belief_vector(b2, gi))


def test_turn_record_serializes(toy):
    from dstlab.dialogue import TurnRecord
    slu = SluHypotheses((((user_act("inform", ("food", "thai")),), 0.8),))
    rec = TurnRecord(0, system_act("hello"), (user_act("affirm"),), slu,
                     uniform_belief(toy), uniform_belief(toy), {"r_tp": -0.05})
    import json
    doc = json.loads(rec.to_json())
    assert doc["v"] == 1 and doc["turn"] == 0
    assert doc["system_act"]["type"] == "hello"
    assert doc["slu"][0]["conf"] == 0.8
