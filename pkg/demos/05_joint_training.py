"""The full four-phase joint-training schedule on the toy domain.

Phase 1 trains the dialogue policy with the polynomial tracker; phase 2
pre-trains the tracking agents' actors toward the teacher; phase 3
optimizes the tracking agents by DDPG with the policy frozen; phase 4
re-trains the policy against the (now frozen) learned trackers.
"""

from dstlab.config import ExperimentConfig
from dstlab.orchestrator import TrainSchedule, joint_train


def main():
    cfg = ExperimentConfig(ontology="toy", variant="ta-all")
    env = cfg.build_env()
    sched = TrainSchedule(n1=400, n2=80, n3=400, n4=400, window=100)
    exp, metrics = joint_train(env, "ta-all", sched, seed=2,
                               eval_episodes=200, eval_seed=31)
    summary = metrics.summary()
    for phase in ("phase1", "phase2", "phase3", "phase4"):
        s = summary[phase]
        print(f"{phase}: {s['episodes']:4d} episodes, "
              f"success {s['success_rate']:.3f}, "
              f"final moving reward {s['final_moving_reward']:+.3f}")
    for phase, ev in metrics.phase_evals.items():
        print(f"greedy eval after {phase}: success={ev['success_rate']:.3f} "
              f"turns={ev['mean_turns']:.2f} reward={ev['mean_reward']:+.3f}")


if __name__ == "__main__":
    main()
