"""Experiment command line: every module behind a seeded subcommand.

Each invocation runs one experiment from a JSON config, writing
machine-readable metrics (CSV), an event log (JSONL), rendered figures
(PNG), checkpoints, and a resolved-config snapshot into the output
directory. Identical (config, seed) runs produce byte-identical metrics at
any --threads value. Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .circuit import (
    Binding,
    GateOp,
    ParamCircuit,
    build_layered,
    final_state,
    load_circuit,
    save_circuit,
)
from .checkpoint import save_checkpoint
from .classical import MlpSpec
from .config import (
    SCHEMAS,
    SUBCOMMANDS,
    ConfigError,
    describe_schema,
    load_config,
    resolve_config,
    validate_config,
)
from .datasets import make_blobs, make_damped_sine, make_xor, sliding_windows
from .federated import run_federated
from .models import (
    qfwp_init,
    qt_init,
    qt_train,
    regressor_init,
    regressor_predict,
    reservoir_init,
    train_qfwp,
    train_qlstm,
    train_readout,
    train_vqc,
    vqc_forward_batch,
    vqc_init,
)
from .models.reservoir import reservoir_predict
from .models.vqc import default_classifier
from .parallel import thread_mapper
from .qas import (
    CircuitBuilderEnv,
    EvolveConfig,
    QasTask,
    bell_library,
    decode,
    diffqas_train,
    evolve,
    qas_rl_train,
)
from .qas.rl_search import bell_actions
from .reporting import (
    save_curves,
    write_csv,
    write_jsonl,
    write_resolved_config,
)
from .rl import frozen_lake_4x4, greedy_success, qagent_init, train_qrl
from .statevec import Statevector, basis_probabilities, pauli_z

__all__ = ["main", "cli_main", "ENV_OUT_ROOT"]

ENV_OUT_ROOT = "QMLKIT_OUT_ROOT"


def _bell_state() -> Statevector:
    return Statevector(2, np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0))


def _loss_rows(losses) -> list[dict]:
    return [{"step": i, "loss": float(v)} for i, v in enumerate(losses)]


def _sine_windows(cfg) -> tuple[np.ndarray, np.ndarray]:
    series = make_damped_sine(cfg["series_len"], omega=cfg["omega"],
                              decay=cfg["decay"])
    return sliding_windows(series, cfg["window"])


def _run_train_vqc(cfg, out, mapper, config_dir):
    if cfg["dataset"] == "blobs":
        X, y = make_blobs(cfg["dataset_size"], seed=cfg["seed"])
    else:
        X, y = make_xor(n_repeats=cfg["dataset_size"])
    model = default_classifier(cfg["n_qubits"], 2, cfg["n_layers"],
                               cfg["seed"])
    model, losses = train_vqc(model, X, y, steps=cfg["steps"], lr=cfg["lr"])
    pred = np.where(vqc_forward_batch(model, X)[:, 0] >= 0.0, 1.0, -1.0)
    accuracy = float(np.mean(pred == y))
    write_csv(out / "loss.csv", _loss_rows(losses), ["step", "loss"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "loss": losses[-1],
                  "accuracy": accuracy}])
    save_checkpoint(out / "model.json", model, seed=cfg["seed"])
    save_curves(out / "loss.png", {"train loss": losses},
                title="VQC training", xlabel="step", ylabel="mse")
    return f"final loss {losses[-1]:.6f}, train accuracy {accuracy:.3f}"


def _run_train_qlstm(cfg, out, mapper, config_dir):
    X, y = _sine_windows(cfg)
    X_seq = X[:, :, None]
    model = regressor_init(cfg["hidden_dim"], 1, cfg["n_qubits"],
                           cfg["n_layers"], cfg["seed"])
    model, losses = train_qlstm(model, X_seq, y, steps=cfg["steps"],
                                lr=cfg["lr"])
    pred = regressor_predict(model, X_seq)
    write_csv(out / "loss.csv", _loss_rows(losses), ["step", "loss"])
    write_csv(out / "predictions.csv",
              [{"index": i, "target": float(t), "prediction": float(p)}
               for i, (t, p) in enumerate(zip(y, pred))],
              ["index", "target", "prediction"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "loss": losses[-1]}])
    save_checkpoint(out / "model.json", model, seed=cfg["seed"])
    save_curves(out / "loss.png", {"train loss": losses},
                title="QLSTM training", xlabel="step", ylabel="mse")
    save_curves(out / "fit.png", {"target": y, "prediction": pred},
                title="Next-step prediction", xlabel="window index",
                ylabel="value")
    return f"final loss {losses[-1]:.6f}"


def _run_train_reservoir(cfg, out, mapper, config_dir):
    X, y = _sine_windows(cfg)
    X_seq = X[:, :, None]
    model = reservoir_init(cfg["hidden_dim"], 1, cfg["n_qubits"],
                           cfg["n_layers"], cfg["seed"])
    model, mse = train_readout(model, X_seq, y, ridge=cfg["ridge"])
    pred = reservoir_predict(model, X_seq)
    write_csv(out / "predictions.csv",
              [{"index": i, "target": float(t), "prediction": float(p)}
               for i, (t, p) in enumerate(zip(y, pred))],
              ["index", "target", "prediction"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "train_mse": mse}])
    save_checkpoint(out / "model.json", model, seed=cfg["seed"])
    save_curves(out / "fit.png", {"target": y, "prediction": pred},
                title="Reservoir readout fit", xlabel="window index",
                ylabel="value")
    return f"readout mse {mse:.6f}"


def _run_train_qfwp(cfg, out, mapper, config_dir):
    X, y = _sine_windows(cfg)
    length = cfg["episode_len"]
    episodes = [(X[i:i + length], y[i:i + length, None])
                for i in range(0, len(X) - length + 1, length)]
    circuit = build_layered(cfg["n_qubits"], cfg["window"], cfg["n_layers"],
                            observables=(pauli_z(0),))
    fast = vqc_init(circuit, seed=cfg["seed"])
    model = qfwp_init(fast, cfg["slow_hidden"], seed=cfg["seed"] + 1)
    model, losses = train_qfwp(model, episodes, steps=cfg["steps"],
                               lr=cfg["lr"])
    write_csv(out / "loss.csv", _loss_rows(losses), ["step", "loss"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "loss": losses[-1],
                  "episodes": len(episodes)}])
    save_checkpoint(out / "model.json", model, seed=cfg["seed"])
    save_curves(out / "loss.png", {"summed episode loss": losses},
                title="Fast-weight programmer training", xlabel="step",
                ylabel="loss")
    return f"final loss {losses[-1]:.6f} over {len(episodes)} episodes"


def _run_qt_compress(cfg, out, mapper, config_dir):
    spec = MlpSpec(tuple(cfg["layer_sizes"]))
    comp = qt_init(spec.n_weights, n_layers=cfg["n_layers"],
                   seed=cfg["seed"])
    X, y = make_xor(n_repeats=cfg["dataset_size"])
    comp, losses = qt_train(comp, spec, X, y, epochs=cfg["epochs"],
                            lr=cfg["lr"])
    write_csv(out / "loss.csv", _loss_rows(losses), ["step", "loss"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "loss": losses[-1],
                  "target_weights": spec.n_weights,
                  "register_qubits": comp.qnn.circuit.n_qubits,
                  "quantum_params": comp.qnn.circuit.n_params}])
    save_checkpoint(out / "model.json", comp, seed=cfg["seed"])
    save_curves(out / "loss.png", {"train loss": losses},
                title="Quantum-train compression", xlabel="epoch",
                ylabel="loss")
    return (f"compressed {spec.n_weights} weights into "
            f"{comp.qnn.circuit.n_qubits}-qubit register, "
            f"final loss {losses[-1]:.6f}")


def _run_qrl(cfg, out, mapper, config_dir):
    env = frozen_lake_4x4(slippery=cfg["slippery"],
                          step_limit=cfg["step_limit"])
    agent = qagent_init(cfg["n_qubits"], cfg["n_layers"], seed=cfg["seed"],
                        gamma=cfg["gamma"])
    agent, log = train_qrl(env, agent, episodes=cfg["episodes"],
                           seed=cfg["seed"], lr=cfg["lr"],
                           batch_size=cfg["batch_size"],
                           warmup=cfg["warmup"],
                           eval_every=cfg["eval_every"],
                           stop_when_solved=cfg["stop_when_solved"])
    solved = greedy_success(agent, env)
    write_csv(out / "episodes.csv", log,
              ["episode", "return", "length", "epsilon"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "solved": solved,
                  "episodes_run": len(log)}])
    save_curves(out / "returns.png",
                {"return": [row["return"] for row in log],
                 "epsilon": [row["epsilon"] for row in log]},
                title="Deep-Q on the 4x4 lake", xlabel="episode")
    return f"solved={solved} after {len(log)} episodes"


def _run_fed_sim(cfg, out, mapper, config_dir):
    X, y = make_blobs(cfg["dataset_size"], seed=cfg["seed"])
    clients = cfg["clients"]
    shards = [(X[k::clients], y[k::clients]) for k in range(clients)]
    model = default_classifier(cfg["n_qubits"], 2, cfg["n_layers"],
                               cfg["seed"])
    model, history = run_federated(model, shards, rounds=cfg["rounds"],
                                   epochs=cfg["local_epochs"], lr=cfg["lr"],
                                   eval_set=(X, y), mapper=mapper)
    write_csv(out / "rounds.csv", history, ["round", "client", "loss"])
    global_curve = [row["loss"] for row in history if row["client"] == -1]
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "initial_global_loss": global_curve[0],
                  "final_global_loss": global_curve[-1],
                  "improved": global_curve[-1] < global_curve[0]}])
    save_checkpoint(out / "global_model.json", model, seed=cfg["seed"])
    save_curves(out / "global_loss.png", {"global eval loss": global_curve},
                title="Federated averaging", xlabel="round", ylabel="mse")
    return (f"global eval loss {global_curve[0]:.6f} -> "
            f"{global_curve[-1]:.6f} over {cfg['rounds']} rounds")


def _run_qas_evo(cfg, out, mapper, config_dir):
    library = bell_library()
    task = QasTask(kind="state-fidelity", target=_bell_state(),
                   depth_penalty=cfg["depth_penalty"])
    econf = EvolveConfig(population=cfg["population"],
                         generations=cfg["generations"],
                         mutation_rate=cfg["mutation_rate"],
                         seed=cfg["seed"])
    genome, score, history = evolve(library, task, econf, mapper=mapper)
    write_csv(out / "history.csv", history,
              ["generation", "best", "mean", "best_ever"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "best_genome": list(genome),
                  "best_score": score}])
    save_circuit(decode(genome, library), out / "best_circuit.json")
    save_curves(out / "fitness.png",
                {"best": [row["best"] for row in history],
                 "mean": [row["mean"] for row in history],
                 "best ever": [row["best_ever"] for row in history]},
                title="Evolutionary architecture search",
                xlabel="generation", ylabel="fitness")
    return f"best genome {list(genome)} with score {score:.6f}"


def _run_qas_rl(cfg, out, mapper, config_dir):
    task = QasTask(kind="state-fidelity", target=_bell_state())
    env = CircuitBuilderEnv(n_qubits=2, actions=bell_actions(), task=task,
                            budget=cfg["budget"])
    circuit, best, curve = qas_rl_train(env, episodes=cfg["episodes"],
                                        seed=cfg["seed"],
                                        alpha=cfg["alpha"],
                                        gamma=cfg["gamma"])
    write_csv(out / "rewards.csv",
              [{"episode": i, "reward": r} for i, r in enumerate(curve)],
              ["episode", "reward"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "best_reward": best,
                  "gates": [op.gate for op in circuit.ops]}])
    save_circuit(circuit, out / "best_circuit.json")
    save_curves(out / "rewards.png", {"terminal reward": curve},
                title="RL circuit builder", xlabel="episode",
                ylabel="fidelity")
    return f"best reward {best:.6f} with gates {[op.gate for op in circuit.ops]}"


def _gap_candidates() -> list[ParamCircuit]:
    aware = ParamCircuit(
        n_qubits=1,
        ops=(GateOp("RY", (0,), Binding.input_slot(0)),
             GateOp("RY", (0,), Binding.var_slot(0))),
        observables=(pauli_z(0),), input_dim=1, n_params=1)
    blind = ParamCircuit(
        n_qubits=1,
        ops=(GateOp("RY", (0,), Binding.var_slot(0)),),
        observables=(pauli_z(0),), input_dim=1, n_params=1)
    return [aware, blind]


def _run_qas_diff(cfg, out, mapper, config_dir):
    X = np.linspace(-np.pi, np.pi, cfg["n_points"]).reshape(-1, 1)
    y = np.cos(X)
    candidates = _gap_candidates()
    sw, thetas, picked, losses = diffqas_train(candidates, X, y,
                                               epochs=cfg["epochs"],
                                               lr=cfg["lr"],
                                               seed=cfg["seed"])
    write_csv(out / "loss.csv", _loss_rows(losses), ["step", "loss"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "loss": losses[-1], "picked": picked,
                  "weights": sw.weights.tolist(),
                  "picked_theta": thetas[picked].tolist()}])
    save_circuit(candidates[picked], out / "best_circuit.json")
    save_curves(out / "loss.png", {"ensemble loss": losses},
                title="Differentiable architecture search", xlabel="epoch",
                ylabel="mse")
    return (f"picked candidate {picked} with weight "
            f"{sw.weights[picked]:.3f}, final loss {losses[-1]:.6f}")


def _run_simulate(cfg, out, mapper, config_dir):
    path = Path(cfg["circuit"])
    if not path.is_absolute():
        path = config_dir / path
    circuit = load_circuit(path)
    x = None if cfg["x"] is None else np.asarray(cfg["x"], dtype=np.float64)
    theta = None if cfg["theta"] is None \
        else np.asarray(cfg["theta"], dtype=np.float64)
    psi = final_state(circuit, x, theta)
    probs = np.round(basis_probabilities(psi), 12)
    write_csv(out / "probabilities.csv",
              [{"state": format(i, f"0{circuit.n_qubits}b"),
                "probability": float(p)} for i, p in enumerate(probs)],
              ["state", "probability"])
    write_jsonl(out / "events.jsonl",
                [{"event": "final", "n_qubits": circuit.n_qubits,
                  "probabilities": probs.tolist()}])
    return json.dumps(probs.tolist())


_RUNNERS = {
    "train-vqc": _run_train_vqc,
    "train-qlstm": _run_train_qlstm,
    "train-reservoir": _run_train_reservoir,
    "train-qfwp": _run_train_qfwp,
    "qt-compress": _run_qt_compress,
    "qrl": _run_qrl,
    "fed-sim": _run_fed_sim,
    "qas-evo": _run_qas_evo,
    "qas-rl": _run_qas_rl,
    "qas-diff": _run_qas_diff,
    "simulate": _run_simulate,
}

_HELP = {
    "train-vqc": "train a layered circuit classifier",
    "train-qlstm": "train a quantum LSTM on damped-sine prediction",
    "train-reservoir": "fit a ridge readout on a frozen quantum LSTM",
    "train-qfwp": "train a fast-weight programmer",
    "qt-compress": "train a small MLP through a quantum weight generator",
    "qrl": "deep-Q agent on the 4x4 gridworld",
    "fed-sim": "in-process federated averaging simulation",
    "qas-evo": "evolutionary architecture search",
    "qas-rl": "RL agent that builds circuits gate by gate",
    "qas-diff": "differentiable architecture search",
    "simulate": "print basis probabilities of a stored circuit",
}


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmlkit",
        description="Seeded, config-driven hybrid quantum-classical "
                    "experiment runner.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(
            name, help=_HELP[name], description=_HELP[name],
            epilog="config keys:\n" + describe_schema(name),
            formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument("--config", required=True,
                         help="JSON config path")
        sub.add_argument("--seed", type=_non_negative_int, default=None,
                         help="override the config's master seed")
        sub.add_argument("--out", default=None,
                         help="output directory (default: config out_dir, "
                              f"then ${ENV_OUT_ROOT}/<subcommand>)")
        sub.add_argument("--threads", type=_non_negative_int, default=None,
                         help="cap on worker threads (default: serial)")
        sub.add_argument("--validate-only", action="store_true",
                         help="validate the config and exit")
    return parser


def _resolve_out_dir(cli_out, cfg: dict, subcommand: str) -> Path:
    if cli_out:
        return Path(cli_out)
    if cfg.get("out_dir"):
        return Path(cfg["out_dir"])
    root = os.environ.get(ENV_OUT_ROOT, "runs")
    return Path(root) / subcommand


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.subcommand
    try:
        doc = load_config(args.config)
    except ConfigError as exc:
        for error in exc.errors:
            print(f"config error: {error}", file=sys.stderr)
        return 2
    if args.seed is not None and "seed" in SCHEMAS[name]:
        doc = {**doc, "seed": args.seed}
    errors = validate_config(doc, name)
    if errors:
        for error in errors:
            print(f"config error: {error}", file=sys.stderr)
        return 2
    cfg = resolve_config(doc, name)
    if args.validate_only:
        print(f"{args.config}: ok")
        return 0
    out_dir = _resolve_out_dir(args.out, cfg, name)
    config_dir = Path(args.config).resolve().parent
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_resolved_config(out_dir, name, cfg)
        with thread_mapper(args.threads) as mapper:
            summary = _RUNNERS[name](cfg, out_dir, mapper, config_dir)
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(summary)
    return 0


def cli_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
