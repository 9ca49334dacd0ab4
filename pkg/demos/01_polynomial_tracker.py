"""Walk the polynomial auxiliary tracker through a short conversation.

Shows how the six probabilistic features drive the per-slot-value belief
update, how repeated evidence strengthens belief, and how contradictions
weaken it.
"""

from dstlab import builtin_ontology
from dstlab.cmbp import track
from dstlab.dialogue import SluHypotheses, system_act, uniform_belief, user_act


def show(belief, ont):
    for slot in ont.informable_slots:
        masses = {v: round(m, 3) for v, m in belief.goal[slot].items() if m > 0.001}
        print(f"    {slot}: {masses} none={belief.goal_none[slot]:.3f}")


def main():
    ont = builtin_ontology("toy")
    belief = uniform_belief(ont)
    print("initial belief (everything on 'none'):")
    show(belief, ont)

    turns = [
        ("user informs food=chinese with confidence 0.7",
         SluHypotheses((((user_act("inform", ("food", "chinese")),), 0.7),)),
         system_act("hello")),
        ("same evidence again: belief strengthens toward 0.91",
         SluHypotheses((((user_act("inform", ("food", "chinese")),), 0.7),)),
         system_act("request", ("area", None))),
        ("contradiction: inform food=indian at 0.6 weakens chinese",
         SluHypotheses((((user_act("inform", ("food", "indian")),), 0.6),)),
         system_act("request", ("area", None))),
        ("affirm under confirm(food=indian) counts as positive evidence",
         SluHypotheses((((user_act("affirm"),), 0.9),)),
         system_act("confirm", ("food", "indian"))),
    ]
    for label, slu, sys_act in turns:
        belief = track(belief, slu, sys_act, ont)
        print(f"\nafter: {label}")
        show(belief, ont)


if __name__ == "__main__":
    main()
