"""Train the DQN dialogue policy against the polynomial tracker (phase 1).

A small toy-domain run: prints the moving-average reward as the policy
learns to fill slots, offer, and answer requests.
"""

from dstlab.config import ExperimentConfig
from dstlab.orchestrator import Experiment, TrainSchedule


def main():
    cfg = ExperimentConfig(ontology="toy", variant="polynomial")
    env = cfg.build_env()
    sched = TrainSchedule(n1=600, n2=0, n3=0, n4=0, window=100)
    exp = Experiment(env, "polynomial", sched, seed=1)
    print("phase 1: DQN policy training on the toy domain (noisy channel)")
    for chunk in range(6):
        exp.run_phase1(100)
        m = exp.metrics
        print(f"  episode {len(m):4d}: moving reward {m.moving_reward[-1]:+.3f} "
              f"moving success {m.moving_success[-1]:.3f}")
    ev = exp.evaluate(episodes=200, seed=99)
    print(f"greedy evaluation: success={ev['success_rate']:.3f} "
          f"turns={ev['mean_turns']:.2f} reward={ev['mean_reward']:+.3f}")


if __name__ == "__main__":
    main()
