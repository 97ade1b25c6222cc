"""Command-line interface: benchmark, verification battery, trace dumps.

Subcommands:

* ``bench``          -- Procrustes benchmark, one CSV (+ figure) per size
* ``verify``         -- run the verification battery; exit 1 on any failure
* ``counterexample`` -- emit the stalling-rule traces as CSV
* ``instance``       -- dump a generated Procrustes instance as CSV files

A configuration file of ``key=value`` lines (``#`` comments) can be passed
with ``--config``; explicit flags override file values.  Exit codes: 0 ok,
1 verification/runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench, procrustes, verify

_DEFAULTS = {
    "n": "20,50",
    "seeds": "0",
    "instances": 10,
    "out": "tsd-out",
    "max_cycles": 1000,
    "tol": 1e-6,
    "rule": "givens",
    "partition": "singleton",
    "format": "csv",
    "noise": 1.0,
    "T": 40,
    "plot": True,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsd", description="Tangent subspace descent toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=str, default=None, help="dimension(s), comma separated")
        p.add_argument("--seeds", type=str, default=None, help="base seed, or comma list of per-instance seeds")
        p.add_argument("--instances", type=int, default=None, help="instances per size")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--max-cycles", dest="max_cycles", type=int, default=None)
        p.add_argument("--tol", type=float, default=None, help="gradient norm tolerance")
        p.add_argument("--rule", choices=["givens", "random-onb", "stiefel"], default=None)
        p.add_argument("--partition", choices=["singleton", "matching"], default=None)
        p.add_argument("--format", choices=["csv"], default=None)
        p.add_argument("--config", type=str, default=None, help="key=value configuration file")

    p_bench = sub.add_parser("bench", help="run the Procrustes benchmark")
    common(p_bench)
    p_bench.add_argument("--noise", type=float, default=None, help="noise scale (0 = exact instance)")
    p_bench.add_argument("--no-plot", dest="plot", action="store_false", default=None,
                         help="skip the PNG figures")

    p_verify = sub.add_parser("verify", help="run the verification battery")
    common(p_verify)

    p_counter = sub.add_parser("counterexample", help="emit stalling-rule traces")
    common(p_counter)
    p_counter.add_argument("--T", type=int, default=None, help="iterations (max 50)")

    p_inst = sub.add_parser("instance", help="dump a generated instance")
    common(p_inst)
    p_inst.add_argument("--noise", type=float, default=None)
    return parser


def _load_config(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _resolve(args: argparse.Namespace) -> dict:
    """Merge CLI flags over config-file values over defaults."""
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, default in _DEFAULTS.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
        elif key in cfg:
            raw = cfg[key]
            if isinstance(default, bool):
                merged[key] = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                merged[key] = int(raw)
            elif isinstance(default, float):
                merged[key] = float(raw)
            else:
                merged[key] = raw
        else:
            merged[key] = default
    merged["sizes"] = [int(s) for s in str(merged["n"]).split(",") if s.strip()]
    merged["seed_list"] = [int(s) for s in str(merged["seeds"]).split(",") if s.strip()]
    return merged


def _cmd_bench(opts) -> int:
    if opts["rule"] == "stiefel":
        print("error: the stiefel rule needs a frame problem with p < n and is not "
              "runnable on the square Procrustes benchmark; use givens or random-onb",
              file=sys.stderr)
        return 2
    seeds = opts["seed_list"][0] if len(opts["seed_list"]) == 1 else opts["seed_list"]
    written = bench.run_benchmark(
        sizes=opts["sizes"],
        instances_per_size=opts["instances"],
        seeds=seeds,
        out_dir=opts["out"],
        max_cycles=opts["max_cycles"],
        tol=opts["tol"],
        noise_scale=opts["noise"],
        rule=opts["rule"],
        partition=opts["partition"],
        plot=opts["plot"],
    )
    for path in written:
        print(path)
    return 0


def _cmd_verify(opts) -> int:
    results = verify.run_all(seed=opts["seed_list"][0])
    failed = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"{tag} {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_counterexample(opts) -> int:
    os.makedirs(opts["out"], exist_ok=True)
    n = opts["sizes"][0]
    t_max = opts["T"]
    seed = opts["seed_list"][0]
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(n)
    paths = []
    for kind in ("deterministic", "randomized"):
        if kind == "deterministic":
            trace, report = verify.counterexample_deterministic(n, x0, t_max)
        else:
            trace, report = verify.counterexample_randomized(n, x0, t_max, seed=seed)
        pred = verify.predicted_counterexample_values(trace.f[0], t_max)
        path = os.path.join(opts["out"], f"counterexample_{kind}_n{n}.csv")
        with open(path, "w", newline="") as fh:
            fh.write("t,f,f_predicted,ratio,spanning\n")
            for t in range(t_max + 1):
                ratio = "" if t == 0 else f"{report.ratios[t - 1]:.10g}"
                span = "" if t == 0 else str(report.spanning[t - 1]).lower()
                fh.write(f"{t},{trace.f[t]:.17g},{pred[t]:.17g},{ratio},{span}\n")
        paths.append(path)
        print(path)
    return 0


def _cmd_instance(opts) -> int:
    os.makedirs(opts["out"], exist_ok=True)
    n = opts["sizes"][0]
    seed = opts["seed_list"][0]
    inst = procrustes.gen_instance(n, seed, noise_scale=opts["noise"])
    stem = os.path.join(opts["out"], f"instance_n{n}_seed{seed}")
    for name, mat in (("A", inst.a), ("B", inst.b), ("D", inst.d), ("Xtrue", inst.x_true)):
        path = f"{stem}_{name}.csv"
        np.savetxt(path, mat, delimiter=",", fmt="%.17g")
        print(path)
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "bench": _cmd_bench,
        "verify": _cmd_verify,
        "counterexample": _cmd_counterexample,
        "instance": _cmd_instance,
    }
    try:
        return handlers[args.command](opts)
    except Exception as exc:  # surfaced as exit 1, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
