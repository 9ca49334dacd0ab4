"""Saving and restoring trained experiments.

A checkpoint directory holds one npz per network (with optimizer state)
plus a manifest with the resolved config and schedule positions, so a
reloaded experiment behaves identically.
"""

import json
import os

from . import nn
from .config import ExperimentConfig
from .orchestrator import Experiment


def save_experiment(exp, cfg, seed, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    nn.save_net(exp.policy.online, os.path.join(out_dir, "policy_online.npz"),
                exp.policy.opt)
    nn.save_net(exp.policy.target, os.path.join(out_dir, "policy_target.npz"))
    for st in exp.trackers.enabled():
        a = exp.trackers[st]
        nn.save_net(a.actor, os.path.join(out_dir, f"tracker_{st}_actor.npz"), a.actor_opt)
        nn.save_net(a.critic, os.path.join(out_dir, f"tracker_{st}_critic.npz"), a.critic_opt)
        nn.save_net(a.actor_target, os.path.join(out_dir, f"tracker_{st}_actor_target.npz"))
        nn.save_net(a.critic_target, os.path.join(out_dir, f"tracker_{st}_critic_target.npz"))
    manifest = {
        "config": cfg.to_dict(),
        "seed": seed,
        "policy_episodes": exp._policy_episodes,
        "phase3_episodes": exp._phase3_episodes,
        "phase4_episodes": exp._phase4_episodes,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)


def load_experiment(ckpt_dir):
    """Rebuild an Experiment from a checkpoint directory."""
    manifest_path = os.path.join(ckpt_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"no manifest.json in {ckpt_dir}")
    with open(manifest_path) as f:
        manifest = json.load(f)
    cfg = ExperimentConfig.from_dict(manifest["config"])
    env = cfg.build_env()
    exp = Experiment(env, cfg.variant, cfg.schedule, cfg.hyper,
                     seed=manifest["seed"])
    exp.policy.online, exp.policy.opt = nn.load_net(
        os.path.join(ckpt_dir, "policy_online.npz"))
    exp.policy.target, _ = nn.load_net(os.path.join(ckpt_dir, "policy_target.npz"))
    for st in exp.trackers.enabled():
        a = exp.trackers[st]
        a.actor, a.actor_opt = nn.load_net(os.path.join(ckpt_dir, f"tracker_{st}_actor.npz"))
        a.critic, a.critic_opt = nn.load_net(os.path.join(ckpt_dir, f"tracker_{st}_critic.npz"))
        a.actor_target, _ = nn.load_net(os.path.join(ckpt_dir, f"tracker_{st}_actor_target.npz"))
        a.critic_target, _ = nn.load_net(os.path.join(ckpt_dir, f"tracker_{st}_critic_target.npz"))
    exp._policy_episodes = manifest["policy_episodes"]
    exp._phase3_episodes = manifest["phase3_episodes"]
    exp._phase4_episodes = manifest["phase4_episodes"]
    return exp, cfg
