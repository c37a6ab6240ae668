"""Command-line entry point: ``qhtree <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import cost, power
from .elements import GAUSSIAN, QUANTILE
from .evaluate import SYNTHETIC_KINDS, RunConfig, gen_synthetic, run_prequential, sweep_quantiles, write_sweep
from .split import HyperParams
from .stream import NUMERIC, DatasetSchema, normalize, parse_csv, write_csv


def _tree_args(p: argparse.ArgumentParser, quantiles_flag: bool = True) -> None:
    p.add_argument("--schema", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--header", action="store_true", help="skip the first CSV row")
    p.add_argument("--observer", choices=(QUANTILE, GAUSSIAN), default=QUANTILE)
    if quantiles_flag:
        p.add_argument("--quantiles", type=int, default=8)
    p.add_argument("--nmin", type=int, default=200)
    p.add_argument("--split-points", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--max-depth", type=int, default=15)
    p.add_argument("--max-leaves", type=int, default=1024)
    p.add_argument("--elements", type=int, default=1024)
    p.add_argument("--fixed-point", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _run_config(a, n_quantiles: int) -> RunConfig:
    hp = HyperParams(n_min=a.nmin, n_split_points=a.split_points, tau=a.tau, delta=a.delta, lam=a.lam,
                     n_quantiles=n_quantiles, max_depth=a.max_depth, max_leaves=a.max_leaves)
    return RunConfig(a.schema, a.data, observer=a.observer, hp=hp, n_elements=a.elements,
                     fixed_point=a.fixed_point, header=a.header, seed=a.seed,
                     report_path=getattr(a, "report", None), curve_path=getattr(a, "curve", None))


def cmd_train(a) -> int:
    report = run_prequential(_run_config(a, a.quantiles))
    summary = {k: v for k, v in report.to_dict().items() if k != "curve"}
    print(json.dumps(summary, indent=2))
    return 0


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_sweep(a) -> int:
    rows = sweep_quantiles(_run_config(a, 8), _int_list(a.quantiles), with_gaussian=a.with_gaussian, jobs=a.jobs)
    if a.out:
        write_sweep(rows, a.out)
    for r in rows:
        acc = "error: " + r.error if r.error else f"{r.accuracy:.4f}  splits={r.splits}"
        print(f"{r.quantiles:>8}  {acc}")
    return 0


def cmd_normalize(a) -> int:
    schema = DatasetSchema.load(a.schema)
    samples, stats = normalize(list(parse_csv(a.input, schema, header=a.header)))
    write_csv(a.out, samples, schema)
    with open(a.stats, "w") as f:
        json.dump({k: [float(v) for v in vals] for k, vals in stats.items()}, f, indent=2)
    print(f"normalized {len(samples)} rows")
    return 0


def cmd_synth(a) -> int:
    gen_synthetic(a.kind, a.n, a.seed, a.out, a.schema_out, a.attrs)
    return 0


def parse_values(text: str | None) -> list[int]:
    """Value counts as ``3,17`` or ``2x44`` (44 attributes with 2 values), mixable."""
    if not text:
        return []
    out = []
    for item in text.split(","):
        item = item.strip()
        if "x" in item:
            v, n = item.split("x")
            out += [int(v)] * int(n)
        elif item:
            out.append(int(item))
    return out


def cmd_cost(a) -> int:
    if a.params:
        with open(a.params) as f:
            fields = json.load(f)
    else:
        if a.labels is None or a.numeric is None:
            raise ValueError("--labels and --numeric are required without --params")
        fields = dict(labels=a.labels, numeric=a.numeric, categorical=a.categorical,
                      values=parse_values(a.values), quantiles=a.quantiles, elements=a.elements,
                      depth=a.depth, freq_mhz=a.freq, samples=a.samples, cold_start=a.cold_start)
    if a.fit_cold_start:
        if a.measured_time is None:
            raise ValueError("--fit-cold-start needs --measured-time")
        fields["cold_start"] = cost.fit_cold_start(fields.get("samples", 0), fields.get("freq_mhz", 200.0),
                                                   a.measured_time)
    rep = cost.report(cost.DesignParams(**fields))
    if a.out:
        Path(a.out).write_text(rep.to_json() + "\n")
    print(rep.table())
    return 0


def _k_range(text: str) -> range:
    lo, _, hi = text.partition(":")
    return range(int(lo), int(hi or lo) + 1)


def cmd_power_flow(a) -> int:
    constraints = power.TuningConstraints(max_labels=a.l_max, max_numeric=a.n_max)
    traces = power.load_traces(a.traces)
    res = power.run_power_flow(traces, _k_range(a.k_range), constraints, a.seed, a.design_window)
    out = Path(a.out)
    stem = out.with_suffix("")
    schema_path, data_path = f"{stem}.schema.json", f"{stem}.csv"
    schema = DatasetSchema.build([NUMERIC] * len(res.selected), res.k, names=res.selected)
    schema.save(schema_path)
    with open(data_path, "w") as f:
        for row, label in zip(res.labeled.activity, res.labeled.labels):
            f.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")
    hp = HyperParams(n_quantiles=constraints.quantiles, max_depth=constraints.max_depth)
    run = RunConfig(schema_path, data_path, observer=QUANTILE, hp=hp, n_elements=constraints.elements,
                    seed=a.seed)
    c = res.constraints
    doc = {
        "k": res.k,
        "centers_w": {str(k): v for k, v in res.centers.items()},
        "silhouette": {str(k): v for k, v in res.scores.items()},
        "ranking": res.ranking,
        "selected_signals": res.selected,
        "design_params": asdict(res.params),
        "constraints": {"passed": c.passed, "violations": c.violations, "bram": c.bram, "dsp": c.dsp,
                        "bram_fraction": c.bram_fraction, "dsp_fraction": c.dsp_fraction},
        "run_config": run.to_dict(),
    }
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"k={res.k} signals={','.join(res.selected)} constraints={'pass' if c.passed else 'FAIL'}")
    for v in c.violations:
        print(f"  violated: {v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhtree", description="Quantile Hoeffding tree toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="prequential run over a CSV stream")
    _tree_args(p)
    p.add_argument("--report")
    p.add_argument("--curve", help="CSV accuracy curve (needs --report)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="accuracy over several quantile counts")
    _tree_args(p, quantiles_flag=False)
    p.add_argument("--quantiles", default="2,4,8,16,32,64,128,256,512")
    p.add_argument("--with-gaussian", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("normalize", help="min-max scale numeric attributes to [-1, 1]")
    p.add_argument("--schema", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("synth", help="write a synthetic stream")
    p.add_argument("--kind", choices=SYNTHETIC_KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attrs", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cost", help="latency, throughput, DSP and BRAM estimates")
    p.add_argument("--params", help="JSON file with design parameters")
    p.add_argument("--labels", type=int)
    p.add_argument("--numeric", type=int)
    p.add_argument("--categorical", type=int, default=0)
    p.add_argument("--values", help="e.g. 3,17 or 2x44")
    p.add_argument("--quantiles", type=int, default=8)
    p.add_argument("--elements", type=int, default=1024)
    p.add_argument("--depth", type=int, default=15)
    p.add_argument("--freq", type=float, default=200.0, help="MHz")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--cold-start", type=float, default=0.0)
    p.add_argument("--fit-cold-start", action="store_true")
    p.add_argument("--measured-time", type=float, help="seconds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("power-flow", help="derive a power-monitor configuration from traces")
    p.add_argument("--traces", required=True)
    p.add_argument("--k-range", default="2:5")
    p.add_argument("--l-max", type=int, default=5)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--design-window", type=int, default=power.DESIGN_WINDOW)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_power_flow)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"qhtree {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
