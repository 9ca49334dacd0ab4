"""Companion teaching: the distance-penalty reward and actor pre-training.

First illustrates the basic score r_bs = -alpha * ||b^e - b^a||_2, then
pre-trains a tracking agent's actor toward the polynomial teacher and
reports how the imitation gap shrinks.
"""

import numpy as np

from dstlab import agents as ag
from dstlab.config import ExperimentConfig
from dstlab.orchestrator import Experiment, TrainSchedule, run_dialogue
from dstlab.reward import basic_score


def show_basic_score():
    teacher = np.array([0.8, 0.1, 0.0, 0.1])
    print("teaching penalty for increasingly wrong executed beliefs (alpha=0.2):")
    for shift in (0.0, 0.1, 0.3, 0.6):
        student = np.clip(teacher + shift, 0, 1)
        print(f"  shift {shift:.1f}: r_bs = {basic_score(student, teacher, 0.2):+.4f}")


def pretrain_demo():
    cfg = ExperimentConfig(ontology="toy", variant="ta-g")
    env = cfg.build_env()
    sched = TrainSchedule(n1=150, n2=150, n3=0, n4=0, window=50)
    exp = Experiment(env, "ta-g", sched, seed=0)
    exp.run_phase1()

    def gap(n=300):
        pairs = {"goal": []}
        rng = np.random.default_rng(123)
        while len(pairs["goal"]) < n:
            run_dialogue(env, exp.policy, rng=rng, collect_pretrain=pairs)
        errs = [np.mean(np.abs(ag.ddpg_act(exp.trackers["goal"], s) - t))
                for s, t in pairs["goal"][:n]]
        return float(np.mean(errs))

    print(f"\nmean |actor - teacher| before pre-training: {gap():.4f}")
    exp.run_phase2()
    print(f"mean |actor - teacher| after  pre-training: {gap():.4f}")


if __name__ == "__main__":
    show_basic_score()
    pretrain_demo()
