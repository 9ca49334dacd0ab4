"""Agenda-based user simulator plus the injectable semantic error channel.

Runs one clean scripted dialogue end to end, then sweeps the error rate
and measures how often the top SLU hypothesis still carries the truth.
"""

import numpy as np

from dstlab import builtin_ontology
from dstlab.orchestrator import DialogueEnv, run_dialogue, scripted_greedy_policy
from dstlab.reward import RewardConfig
from dstlab.usersim import ErrorModel, corrupt, new_agenda, sample_goal, user_respond
from dstlab.dialogue import system_act


def clean_dialogue():
    ont = builtin_ontology("toy")
    env = DialogueEnv(ont, ErrorModel(error_rate=0.0, nbest=1), RewardConfig())
    out = run_dialogue(env, None, rng=7, scripted=scripted_greedy_policy)
    print(f"clean toy dialogue: success={out.success} in {out.turns} turns")
    for rec in out.records:
        user = ", ".join(str(a) for a in rec.user_acts)
        print(f"  t{rec.turn_index}  user: {user:<45s} system: {rec.system_act}")


def error_sweep():
    ont = builtin_ontology("dstc2-like")
    rng = np.random.default_rng(0)
    print("\ntop-hypothesis accuracy vs channel error rate (5000 turns each):")
    for e in (0.0, 0.15, 0.30, 0.5):
        model = ErrorModel(error_rate=e)
        hits = trials = 0
        goal = sample_goal(ont, rng)
        agenda = new_agenda(goal, rng)
        sys = system_act("hello")
        while trials < 5000:
            acts, agenda = user_respond(agenda, sys, rng)
            slu = corrupt(acts, model, ont, rng)
            hits += slu.items[0][0] == tuple(acts)
            trials += 1
            if any(a.act_type == "bye" for a in acts):
                goal = sample_goal(ont, rng)
                agenda = new_agenda(goal, rng)
        print(f"  e={e:.2f}: accuracy={hits / trials:.3f}")


if __name__ == "__main__":
    clean_dialogue()
    error_sweep()
