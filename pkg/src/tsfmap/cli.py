"""Command-line interface.

Every command that writes files takes ``--out DIR`` and leaves a
``manifest.json`` there; ``tsfmap replay`` re-runs a manifest into a new
directory. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chunking import METHODS as LINKAGES
from .chunking import ChunkMatrix, LinkageMatrix, branch_gaps, cut, linkage, select_levels
from .dynamics import DynamicsConfig, SigmaMap, run
from .encoding import SequenceConfig, read_sequence, write_sequence
from .envgen import PRESETS, graph_env, load_env, load_graph, preset_env, run_env
from .envgen.presets import EXTRA_PRESETS, GRAPH_PRESETS
from .evaluation import hierarchical_score, numerical_rank, phase_trace
from .experiment import METHODS, run_experiment

log = logging.getLogger("tsfmap")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, argv: list[str], params: dict, inputs, outputs):
    manifest = {
        "tsfmap_version": __version__,
        "command": command,
        "argv": argv,
        "params": params,
        "inputs": {str(Path(p).resolve()): sha256(p) for p in inputs},
        "outputs": {Path(p).name: sha256(p) for p in outputs},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_weights(path, w) -> None:
    np.savetxt(path, w, fmt="%.17g", delimiter=",")


def read_weights(path) -> np.ndarray:
    w = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.isfinite(w).all():
        raise ValueError(f"{path}: weights contain non-finite values")
    return w


def _environment(args):
    sources = [s for s in (args.env, args.spec, args.graph) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --env, --spec or --graph")
    if args.env is not None:
        return preset_env(args.env)
    if args.spec is not None:
        return load_env(args.spec)
    graph = load_graph(args.graph, args.graph_format)
    return graph_env(graph, args.truth_attr, Path(args.graph).stem)


def _dynamics(args) -> DynamicsConfig:
    return DynamicsConfig(k=args.k, alpha=args.alpha, theta=args.theta, mu1=args.mu1,
                          mu2=args.mu2, mu3=args.mu3, activation_threshold=args.threshold,
                          epsilon=args.epsilon)


def cmd_generate(args, argv):
    env = _environment(args)
    tau = args.steps if args.steps is not None else env.tau
    data = run_env(env, args.seed, tau)
    out = _out_dir(args.out)
    seq_path, truth_path = out / "sequence.txt", out / "truth.json"
    write_sequence(seq_path, data.sequence)
    truth = {
        "levels": data.truths[-1].tolist(),
        "phases": [{"start": int(s), "levels": t.tolist()}
                   for s, t in zip(data.starts, data.truths)],
    }
    truth_path.write_text(json.dumps(truth) + "\n", encoding="utf-8")
    inputs = [p for p in (args.spec, args.graph) if p]
    write_manifest(out, "generate", argv, {"env": env.name, "tau": tau, "seed": args.seed},
                   inputs, [seq_path, truth_path])
    print(f"wrote {data.sequence.size} symbols over {env.n} variables to {seq_path}")


def cmd_train(args, argv):
    seq = read_sequence(args.input)
    n = args.n if args.n is not None else int(seq.max()) + 1
    cfg_s = SequenceConfig(n=n, tau=seq.size, tstep=args.tstep, m=args.m)
    cfg_d = _dynamics(args)
    out = _out_dir(args.out)
    init = SigmaMap.random(n, cfg_d.k, args.seed)
    snapshots = run(seq, cfg_s, cfg_d, snapshot_every=args.snapshot_every, init=init)
    paths = []
    for snap in snapshots:
        path = out / f"weights_{snap.step}.csv"
        write_weights(path, snap.w)
        paths.append(path)
    params = {"n": n, "tau": seq.size, "tstep": args.tstep, "m": args.m, "seed": args.seed,
              "snapshot_every": args.snapshot_every, **cfg_d.__dict__}
    write_manifest(out, "train", argv, params, [args.input], paths)
    print(f"trained {snapshots[-1].step} steps; final weights in {paths[-1]}")


def cmd_chunk(args, argv):
    w = read_weights(args.weights)
    Z = linkage(w, args.linkage)
    sel = select_levels(branch_gaps(Z))
    result = ChunkMatrix(np.array([cut(Z, Z.n - i - 1) for i in sel.kept_ids]),
                         sel.kept_ids, args.linkage)
    out = _out_dir(args.out)
    chunk_path, link_path = out / "chunks.json", out / "linkage.csv"
    result.to_json(chunk_path)
    Z.to_csv(link_path)
    write_manifest(out, "chunk", argv, {"linkage": args.linkage}, [args.weights],
                   [chunk_path, link_path])
    counts = [len(set(row)) for row in result.levels.tolist()]
    print(f"{result.L} levels with cluster counts {counts}")


def _truth_levels(path, phase):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if phase is not None and "phases" in data:
        return np.asarray(data["phases"][phase]["levels"])
    return np.asarray(data["levels"])


def cmd_eval(args, argv):
    pred = ChunkMatrix.from_json(args.pred)
    truth = _truth_levels(args.truth, args.phase)
    report = hierarchical_score(pred, truth)
    print(report.score)
    if args.verbose:
        for i, v in enumerate(report.per_level):
            print(f"level {i}: {v}")


def cmd_experiment(args, argv):
    env = _environment(args)
    seeds = [args.seed + i for i in range(args.seeds)]
    link = args.linkage
    if link is None:
        link = "ward" if env.name.upper() in GRAPH_PRESETS or args.graph else "single"
        if args.method == "tp":
            link = "single"
    result = run_experiment(env, args.method, seeds, args.eval_every, args.steps, link,
                            _dynamics(args), args.tstep, args.m)
    out = _out_dir(args.out)
    paths = [out / "results.csv", out / "summary.csv"]
    result.write_results(paths[0], args.smooth)
    result.write_summary(paths[1])
    if result.rates is not None:
        paths.append(out / "trace.csv")
        result.write_trace(paths[2])
    inputs = [p for p in (args.spec, args.graph) if p]
    params = {"env": env.name, "method": args.method, "seeds": seeds,
              "eval_every": args.eval_every, "tau": args.steps or env.tau, "linkage": link}
    write_manifest(out, "experiment", argv, params, inputs, paths)
    final = result.final_scores()
    print(f"{args.method} on {env.name}: final score {final.mean():.4f} +- {final.std():.4f} "
          f"over {len(seeds)} seeds")


_SNAPSHOT = re.compile(r"weights_(\d+)\.csv$")


def cmd_analyze(args, argv):
    run_dir = Path(args.run)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"{run_dir}: not a directory")
    files = sorted(((int(m.group(1)), p) for p in run_dir.iterdir()
                    if (m := _SNAPSHOT.search(p.name))), key=lambda t: t[0])
    if not files:
        raise ValueError(f"{run_dir}: no weights_<step>.csv snapshots")
    if not (args.phase or args.rank):
        raise UsageError("choose at least one of --phase and --rank")
    snaps = [SigmaMap(w=read_weights(p), v=np.zeros(0), step=s) for s, p in files]
    header, rows = ["step"], [[s] for s, _ in files]
    if args.phase:
        if len(snaps) < 2:
            raise ValueError("phase analysis needs at least two snapshots")
        trace = phase_trace(snaps)
        header.append("rate")
        rows[0].append("")
        for row, rate in zip(rows[1:], trace.rates):
            row.append(repr(float(rate)))
    if args.rank:
        header.append("rank")
        for row, snap in zip(rows, snaps):
            row.append(numerical_rank(snap.w, args.tol))
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        out = _out_dir(args.out)
        path = out / "analysis.csv"
        path.write_text(text, encoding="utf-8")
        write_manifest(out, "analyze", argv, {"phase": args.phase, "rank": args.rank},
                       [p for _, p in files], [path])
    else:
        sys.stdout.write(text)


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    replay_argv = list(manifest["argv"])
    if "--out" in replay_argv:
        i = replay_argv.index("--out")
        del replay_argv[i:i + 2]
    return main(replay_argv + ["--out", args.out])


def _add_source(p):
    p.add_argument("--env", help=f"preset: {', '.join(PRESETS + EXTRA_PRESETS + GRAPH_PRESETS)}")
    p.add_argument("--spec", help="hierarchy or environment JSON file")
    p.add_argument("--graph", help="graph file (GML or edge list)")
    p.add_argument("--graph-format", choices=("gml", "edge-list"))
    p.add_argument("--truth-attr", help="node attribute holding the ground-truth group")
    p.add_argument("--steps", type=int, help="number of transitions (default: environment tau)")


def _add_dynamics(p):
    d = DynamicsConfig()
    p.add_argument("--k", type=int, default=d.k)
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--theta", type=float, default=d.theta)
    p.add_argument("--mu1", type=float, default=d.mu1)
    p.add_argument("--mu2", type=float, default=d.mu2)
    p.add_argument("--mu3", type=float, default=d.mu3)
    p.add_argument("--threshold", type=float, default=d.activation_threshold)
    p.add_argument("--epsilon", type=float, default=d.epsilon)
    p.add_argument("--tstep", type=int, default=10)
    p.add_argument("--m", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsfmap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a symbol sequence and its ground truth")
    _add_source(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a map on a sequence file")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, help="alphabet size (default: max symbol + 1)")
    _add_dynamics(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--snapshot-every", type=int, help="simulation steps between snapshots")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("chunk", help="extract hierarchy levels from a weight file")
    p.add_argument("--weights", required=True)
    p.add_argument("--linkage", choices=LINKAGES, default="single")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("eval", help="score a chunk file against a truth file")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--phase", type=int, help="truth phase index (default: last)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="multi-seed benchmark run")
    _add_source(p)
    p.add_argument("--method", choices=METHODS, default="tsfmap")
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--seed", type=int, required=True, help="first seed")
    p.add_argument("--eval-every", type=int, default=1000)
    p.add_argument("--linkage", choices=LINKAGES)
    p.add_argument("--smooth", type=int, default=10, help="moving-average window")
    _add_dynamics(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", help="phase-transition and rank traces of a training run")
    p.add_argument("--run", required=True, help="directory with weights_<step>.csv files")
    p.add_argument("--phase", action="store_true")
    p.add_argument("--rank", action="store_true")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    recorded = [a for a in argv if a not in ("-v", "--verbose")]
    try:
        code = args.func(args, recorded)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tsfmap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"tsfmap: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
