import numpy as np
import pytest

from dstlab.dialogue import SluHypotheses, TurnRecord, UserGoal, uniform_belief, system_act, user_act
from dstlab.ontology import Ontology
from dstlab.usersim import (ErrorModel, corrupt, is_success, new_agenda, sample_goal,
                            user_respond)


class TestSampleGoal:
    def test_reachable(self, toy):
        for seed in range(50):
            g = sample_goal(toy, np.random.default_rng(seed))
            assert toy.matching_entities(g.constraints), g

    def test_deterministic(self, dstc2):
        g1 = sample_goal(dstc2, np.random.default_rng(7))
        g2 = sample_goal(dstc2, np.random.default_rng(7))
        assert g1 == g2

    def test_reachability_filter(self):
        ont = Ontology(
            "mono",
            {"food": ["chinese", "indian"]},
            ["phone"], ["byconstraints"],
            [{"food": "chinese", "phone": "1"}],
        )
        for seed in range(100):
            g = sample_goal(ont, np.random.default_rng(seed))
            assert g.constraints.get("food") in (None, "chinese", "dontcare")

    def test_request_count(self, dstc2):
        for seed in range(50):
            g = sample_goal(dstc2, np.random.default_rng(seed))
            assert 1 <= len(g.requests) <= 3


class TestAgendaDynamics:
    def _agenda(self, toy, constraints, requests, seed=0):
        goal = UserGoal(constraints, frozenset(requests), "byconstraints")
        return new_agenda(goal, np.random.default_rng(seed))

    def test_request_pushes_inform(self, toy):
        agenda = self._agenda(toy, {"food": "chinese"}, {"phone"})
        acts, _ = user_respond(agenda, system_act("request", ("food", None)),
                               np.random.default_rng(0))
        assert ("inform", (("food", "chinese"),)) in [(a.act_type, a.args) for a in acts]

    def test_wrong_confirm_negates_and_corrects(self, toy):
        agenda = self._agenda(toy, {"food": "chinese"}, {"phone"})
        acts, _ = user_respond(agenda, system_act("confirm", ("food", "indian")),
                               np.random.default_rng(0))
        kinds = [a.act_type for a in acts]
        assert "negate" in kinds
        assert any(a.act_type == "inform" and a.args == (("food", "chinese"),)
                   for a in acts)

    def test_right_confirm_affirms(self, toy):
        agenda = self._agenda(toy, {"food": "chinese"}, {"phone"})
        acts, _ = user_respond(agenda, system_act("confirm", ("food", "chinese")),
                               np.random.default_rng(0))
        assert acts[0].act_type == "affirm"

    def test_matching_offer_triggers_requests(self, toy):
        agenda = self._agenda(toy, {"food": "chinese"}, {"phone"})
        offer = system_act("offer", ("food", "chinese"), ("area", "north"))
        acts, _ = user_respond(agenda, offer, np.random.default_rng(0))
        assert any(a.act_type == "request" and a.args[0][0] == "phone" for a in acts)

    def test_mismatched_offer_gets_reqalts(self, toy):
        agenda = self._agenda(toy, {"food": "indian"}, {"phone"})
        offer = system_act("offer", ("food", "chinese"), ("area", "north"))
        acts, _ = user_respond(agenda, offer, np.random.default_rng(0))
        assert any(a.act_type == "reqalts" for a in acts)

    def test_bye_after_all_requests_answered(self, toy):
        agenda = self._agenda(toy, {"food": "chinese"}, {"phone"})
        rng = np.random.default_rng(0)
        offer = system_act("offer", ("food", "chinese"), ("area", "north"))
        user_respond(agenda, offer, rng)
        acts, _ = user_respond(agenda, system_act("inform", ("phone", "555")), rng)
        assert any(a.act_type == "bye" for a in acts)

    def test_patience_exhaustion(self, toy):
        goal = UserGoal({"food": "chinese"}, frozenset({"phone"}), "byconstraints")
        agenda = new_agenda(goal, np.random.default_rng(0), patience=1)
        acts, _ = user_respond(agenda, system_act("repeat"), np.random.default_rng(0))
        assert acts == (user_act("bye"),)

    def test_no_system_only_acts_on_stack(self, toy):
        agenda = self._agenda(toy, {"food": "chinese", "area": "north"}, {"phone"})
        rng = np.random.default_rng(3)
        sys = system_act("hello")
        for _ in range(30):
            acts, agenda = user_respond(agenda, sys, rng)
            for a in agenda.stack + list(acts):
                assert a.actor == "user"
            if any(a.act_type == "bye" for a in acts):
                break

    def test_determinism(self, dstc2):
        def roll(seed):
            goal = sample_goal(dstc2, np.random.default_rng(seed))
            agenda = new_agenda(goal, np.random.default_rng(seed))
            rng = np.random.default_rng(seed + 1)
            seq = []
            for sys in (system_act("hello"), system_act("request", ("food", None)),
                        system_act("repeat")):
                acts, agenda = user_respond(agenda, sys, rng)
                seq.append(acts)
            return seq

        assert roll(11) == roll(11)


class TestCorrupt:
    def test_no_error_limit(self, toy):
        model = ErrorModel(error_rate=0.0)
        truth = (user_act("inform", ("food", "chinese")),)
        for seed in range(50):
            hyps = corrupt(truth, model, toy, np.random.default_rng(seed))
            (top, conf), *rest = list(hyps)
            assert top == truth
            assert all(conf >= c for _, c in rest)

    def test_always_error_value_substitution(self, toy):
        model = ErrorModel(error_rate=1.0, w_value_sub=1.0, w_act_sub=0.0, w_deletion=0.0)
        truth = (user_act("inform", ("food", "chinese")),)
        for seed in range(100):
            hyps = corrupt(truth, model, toy, np.random.default_rng(seed))
            top, _ = list(hyps)[0]
            assert not any(a.act_type == "inform" and ("food", "chinese") in a.args
                           for a in top)

    def test_monte_carlo_calibration(self, toy):
        # top hypothesis should equal the truth in 70% +- 2% of trials at e=0.3
        model = ErrorModel(error_rate=0.3)
        truth = (user_act("inform", ("food", "chinese")),)
        rng = np.random.default_rng(99)
        hits = sum(list(corrupt(truth, model, toy, rng))[0][0] == truth
                   for _ in range(10_000))
        assert abs(hits / 10_000 - 0.7) < 0.02

    def test_confidence_invariants_property(self, toy):
        model = ErrorModel(error_rate=0.5, nbest=4)
        rng = np.random.default_rng(5)
        truth = (user_act("inform", ("food", "indian")), user_act("request", ("phone", None)))
        for _ in range(2_000):
            hyps = corrupt(truth, model, toy, rng)  # constructor checks invariants
            confs = [c for _, c in hyps]
            assert sum(confs) <= 1 + 1e-9
            assert all(confs[i] >= confs[i + 1] for i in range(len(confs) - 1))

    def test_bad_nbest(self):
        with pytest.raises(ValueError):
            ErrorModel(nbest=0)

    def test_noisier_profile_is_noisier(self, toy):
        # measured top-hypothesis accuracy strictly lower at the higher rate
        truth = (user_act("inform", ("food", "chinese")),)
        rng = np.random.default_rng(3)

        def accuracy(rate):
            model = ErrorModel(error_rate=rate)
            return sum(list(corrupt(truth, model, toy, rng))[0][0] == truth
                       for _ in range(10_000)) / 10_000

        assert accuracy(0.30) < accuracy(0.15)


class TestIsSuccess:
    def _record(self, i, act):
        slu = SluHypotheses(())
        from dstlab.ontology import builtin_ontology
        toy = builtin_ontology("toy")
        b = uniform_belief(toy)
        return TurnRecord(i, act, (), slu, b, b)

    def test_success(self):
        goal = UserGoal({"food": "chinese"}, frozenset({"phone"}), "byconstraints")
        episode = [
            self._record(0, system_act("offer", ("food", "chinese"), ("area", "north"))),
            self._record(1, system_act("inform", ("phone", "555"))),
        ]
        assert is_success(goal, episode)

    def test_unanswered_request_fails(self):
        goal = UserGoal({"food": "chinese"}, frozenset({"phone", "addr"}), "byconstraints")
        episode = [
            self._record(0, system_act("offer", ("food", "chinese"), ("area", "north"))),
            self._record(1, system_act("inform", ("phone", "555"))),
        ]
        assert not is_success(goal, episode)

    def test_no_offer_fails(self):
        goal = UserGoal({"food": "chinese"}, frozenset(), "byconstraints")
        episode = [self._record(0, system_act("request", ("food", None)))]
        assert not is_success(goal, episode)

    def test_mismatched_offer_fails(self):
        goal = UserGoal({"food": "indian"}, frozenset(), "byconstraints")
        episode = [self._record(0, system_act("offer", ("food", "chinese"), ("area", "north")))]
        assert not is_success(goal, episode)
