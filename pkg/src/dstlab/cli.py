"""Command-line front door: train, eval, chat, export.

Exit codes: 0 on success, 2 when a training run crashed (partial metrics
are still written), 1 on any other error.  The default output root comes
from the DSTLAB_OUT environment variable.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import checkpoint
from .config import ConfigError, ExperimentConfig
from .dialogue import (SluHypotheses, TurnRecord, belief_vector, system_act,
                       uniform_belief, user_act, vector_to_belief)
from .orchestrator import joint_train, policy_state, execute_system_act
from .reward import basic_score
from . import agents as ag
from . import cmbp
from . import usersim

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CRASHED = 2


def _fail(reason):
    print(f"error: {reason}", file=sys.stderr)
    return EXIT_ERROR


def _resolve_config(args):
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = list(args.override or [])
    if getattr(args, "variant", None):
        overrides.append(f"variant={args.variant}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seeds=[{args.seed}]")
    if getattr(args, "seeds", None):
        overrides.append(f"seeds={json.dumps([int(s) for s in args.seeds.split(',')])}")
    if getattr(args, "out", None):
        overrides.append(f"out_dir={json.dumps(args.out)}")
    cfg = cfg.with_overrides(overrides)
    if not args.out and not args.config and "DSTLAB_OUT" in os.environ:
        cfg = cfg.with_overrides([f"out_dir={json.dumps(os.environ['DSTLAB_OUT'])}"])
    return cfg


def _train_one_seed(cfg_dict, seed, out_dir):
    cfg = ExperimentConfig.from_dict(cfg_dict)
    env = cfg.build_env()
    exp, metrics = joint_train(env, cfg.variant, cfg.schedule, cfg.hyper,
                               seed=seed, eval_episodes=cfg.eval_episodes,
                               eval_seed=cfg.eval_seed)
    seed_dir = os.path.join(out_dir, f"seed{seed}")
    os.makedirs(seed_dir, exist_ok=True)
    with open(os.path.join(seed_dir, "metrics.tsv"), "w") as f:
        f.write(metrics.to_tsv())
    summary = metrics.summary()
    summary["variant"] = cfg.variant
    summary["seed"] = seed
    with open(os.path.join(seed_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2)
    checkpoint.save_experiment(exp, cfg, seed, os.path.join(seed_dir, "checkpoint"))
    return summary


def cmd_train(args):
    try:
        cfg = _resolve_config(args)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        return _fail(f"config: {e}")
    out_dir = os.path.join(cfg.out_dir, cfg.variant)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        return _fail(f"output dir: {e}")
    with open(os.path.join(out_dir, "config.json"), "w") as f:
        f.write(cfg.to_json())
    summaries = []
    if args.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_train_one_seed, cfg.to_dict(), s, out_dir)
                       for s in cfg.seeds]
            summaries = [f.result() for f in futures]
    else:
        for s in cfg.seeds:
            summaries.append(_train_one_seed(cfg.to_dict(), s, out_dir))
    crashed = [s for s in summaries if s["crashed"]]
    finals = [s["final_moving_reward"] for s in summaries if not s["crashed"]]
    agg = {
        "variant": cfg.variant,
        "seeds": list(cfg.seeds),
        "crashed_seeds": [s["seed"] for s in crashed],
        "final_moving_reward_mean": float(np.mean(finals)) if finals else None,
        "final_moving_reward_std": float(np.std(finals)) if finals else None,
    }
    with open(os.path.join(out_dir, "aggregate.json"), "w") as f:
        json.dump(agg, f, indent=2)
    for s in summaries:
        tag = "CRASHED in " + s["crash_phase"] if s["crashed"] else "ok"
        print(f"seed {s['seed']}: {tag}, episodes {s['episodes']}")
    print(f"wrote {out_dir}")
    return EXIT_CRASHED if crashed else EXIT_OK


def cmd_eval(args):
    try:
        exp, cfg = checkpoint.load_experiment(args.checkpoint)
    except (FileNotFoundError, ConfigError, KeyError, ValueError) as e:
        return _fail(f"checkpoint: {e}")
    summary = exp.evaluate(args.episodes, args.seed)
    print("DST\tSuccess\t#Turn\tReward")
    print(f"{cfg.variant}\t{summary['success_rate']:.3f}\t{summary['mean_turns']:.3f}\t"
          f"{summary['mean_reward']:.3f} +- {summary['std_reward']:.3f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "evaluation.json"), "w") as f:
            json.dump({"variant": cfg.variant, **summary}, f, indent=2)
    return EXIT_OK


def _parse_user_act(text):
    """Parse `inform(food=chinese)` / `request(phone)` / `bye`, with an
    optional trailing confidence."""
    text = text.strip()
    conf = 0.9
    if " " in text:
        text, conf_str = text.rsplit(" ", 1)
        try:
            conf = float(conf_str)
        except ValueError:
            raise ValueError(f"bad confidence {conf_str!r}")
        if not 0.0 <= conf <= 1.0:
            raise ValueError("confidence must be in [0,1]")
    if "(" in text:
        if not text.endswith(")"):
            raise ValueError("missing closing parenthesis")
        name, inner = text[:-1].split("(", 1)
        args = []
        if inner.strip():
            for part in inner.split(","):
                if "=" in part:
                    s, v = part.split("=", 1)
                    if not s.strip() or not v.strip():
                        raise ValueError(f"bad argument {part!r}")
                    args.append((s.strip(), v.strip()))
                else:
                    if not part.strip():
                        raise ValueError(f"bad argument {part!r}")
                    args.append((part.strip(), None))
        return user_act(name.strip(), *args), conf
    return user_act(text), conf


def cmd_chat(args):
    try:
        exp, cfg = checkpoint.load_experiment(args.checkpoint)
    except (FileNotFoundError, ConfigError, KeyError, ValueError) as e:
        return _fail(f"checkpoint: {e}")
    env = exp.env
    belief = uniform_belief(env.ont)
    last_sys = system_act("hello")
    last_action_index = None
    offered = None
    records = []
    turn = 0
    use_agents = bool(exp.trackers.enabled())
    print("semantic-level chat; type acts like inform(food=chinese) [confidence],")
    print("request(phone), affirm, negate, bye; quit to exit")
    print(f"system: {last_sys}")
    goal_constraints = {}
    while True:
        try:
            line = input("user> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line == "quit":
            break
        try:
            act, conf = _parse_user_act(line)
        except ValueError as e:
            print(f"could not parse ({e}); example: inform(food=chinese) 0.8")
            continue
        slu = SluHypotheses((((act,), conf),))
        frame = cmbp.extract_features(slu, belief, last_sys, env.ont, turn)
        b_aux = cmbp.track_frame(frame, env.ont)
        exec_belief = b_aux
        if use_agents:
            exec_belief = b_aux.copy()
            for st in exp.trackers.enabled():
                vec = ag.ddpg_act(exp.trackers[st], frame.vector(st))
                frag = vector_to_belief(vec, env.indices[st], env.ont)
                if st == "goal":
                    exec_belief.goal, exec_belief.goal_none = frag
                elif st == "request":
                    exec_belief.request = frag
                else:
                    exec_belief.method = frag
        _print_belief("auxiliary b^a", b_aux, env)
        if use_agents:
            _print_belief("executed b^e", exec_belief, env)
        for st in exp.trackers.enabled():
            alpha = exp.trackers.trust.get(st, 0.0)
            d = basic_score(belief_vector(exec_belief, env.indices[st]),
                            belief_vector(b_aux, env.indices[st]), alpha)
            print(f"  r_bs[{st}] = {d:+.4f} (alpha={alpha})")
        print(f"  r_tp = {env.reward_cfg.turn_penalty:+.3f}")
        if act.act_type == "bye":
            print("dialogue ended by user")
            break
        state = policy_state(env, exec_belief, last_action_index, turn)
        action = ag.dqn_select(exp.policy, state, 0.0)
        sys_response, offered = execute_system_act(env, action, exec_belief, offered)
        records.append(TurnRecord(turn, sys_response, (act,), slu, b_aux, exec_belief))
        print(f"system: {sys_response}")
        if act.act_type == "inform" and act.args:
            goal_constraints[act.args[0][0]] = act.args[0][1]
        belief = exec_belief
        last_sys = sys_response
        last_action_index = action
        turn += 1
        if sys_response.act_type == "bye":
            print("dialogue ended by system")
            break
    goal = usersim.UserGoal(goal_constraints, frozenset(), env.ont.methods[0])
    verdict = usersim.is_success(goal, records)
    print(f"success (against the constraints you informed): {verdict}")
    return EXIT_OK


def _print_belief(label, belief, env):
    print(f"  {label}:")
    for slot in env.ont.informable_slots:
        v, m = belief.top_goal(slot)
        if m > 0.01:
            print(f"    goal {slot}: {v}={m:.3f} (none={belief.goal_none[slot]:.3f})")
    req = {s: p for s, p in belief.request.items() if p > 0.05}
    if req:
        print(f"    requests: {req}")


def cmd_export(args):
    if not os.path.isdir(args.metrics_dir):
        return _fail(f"no such metrics dir: {args.metrics_dir}")
    tables = []
    for root, _, files in os.walk(args.metrics_dir):
        for name in files:
            if name == "metrics.tsv":
                tables.append(os.path.join(root, name))
    if not tables:
        return _fail(f"no metrics.tsv files under {args.metrics_dir}")
    os.makedirs(args.out, exist_ok=True)
    for path in sorted(tables):
        rel = os.path.relpath(path, args.metrics_dir).replace(os.sep, "_")
        tag = rel[:-len("_metrics.tsv")] if rel.endswith("_metrics.tsv") else rel
        with open(path) as f:
            lines = f.read().splitlines()
        header = lines[0].split("\t")
        ep_i, mr_i, ph_i = (header.index(c) for c in ("episode", "moving_reward", "phase"))
        if args.format == "table":
            out_path = os.path.join(args.out, f"curve_{tag}.tsv")
            with open(out_path, "w") as f:
                f.write("episode\tmoving_reward\n")
                for line in lines[1:]:
                    cols = line.split("\t")
                    f.write(f"{cols[ep_i]}\t{cols[mr_i]}\n")
        else:
            bounds = {}
            for line in lines[1:]:
                cols = line.split("\t")
                bounds.setdefault(cols[ph_i], [int(cols[ep_i]), int(cols[ep_i])])[1] = int(cols[ep_i])
            out_path = os.path.join(args.out, f"summary_{tag}.json")
            with open(out_path, "w") as f:
                json.dump({"phase_boundaries": bounds, "episodes": len(lines) - 1},
                          f, indent=2)
        print(f"wrote {out_path}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="dstlab",
                                description="online DST optimization laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="run the joint-training schedule")
    t.add_argument("--config", help="path to an experiment config (JSON)")
    t.add_argument("--variant", choices=["polynomial", "ta-g", "ta-r", "ta-m",
                                         "ta-all", "ta-noteaching"])
    t.add_argument("--seed", type=int)
    t.add_argument("--seeds", help="comma-separated seed list")
    t.add_argument("--out", help="output directory")
    t.add_argument("--override", action="append", metavar="KEY=VALUE")
    t.add_argument("--workers", type=int, default=1)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a trained checkpoint")
    e.add_argument("checkpoint")
    e.add_argument("--episodes", type=int, default=500)
    e.add_argument("--seed", type=int, default=12345)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("chat", help="interactive semantic-level REPL")
    c.add_argument("checkpoint")
    c.set_defaults(func=cmd_chat)

    x = sub.add_parser("export", help="export learning-curve tables")
    x.add_argument("metrics_dir")
    x.add_argument("--out", default="export")
    x.add_argument("--format", choices=["table", "summary"], default="table")
    x.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
