"""Command-line harness: sampling plus the benchmark experiments.

Exit codes: 0 on success, 1 on usage errors (bad flags, unsupported
parameters), 2 on numerical failures (non-convergence, unattainable cutoff
counts, failed validation).  Output is CSV (UTF-8, comma, header row, LF)
or a single JSON object with ``spec``, ``results`` and ``versions`` keys;
identical invocations produce byte-identical output apart from wall-clock
timing cells.  When writing to a file, a companion PNG figure is rendered
alongside unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from .bench import COLUMNS, ExperimentSpec, RUNNERS, _versions
from .errors import DomainError, GigSamplerError, UnsupportedParametersError
from .generator import GigParams, SamplerConfig, gig_pdf, sample_gig

SEED_ENV_VAR = "GIGSAMPLER_SEED"

# Config files may use either flag destinations or the field names of the
# JSON spec object; spec-style keys are translated to flag destinations.
_CONFIG_KEY_ALIASES = {
    "lambdas": "lam",
    "betas": "beta",
    "eps0s": "eps0",
    "counts": "cutoffs",
    "curve_points": "points",
    "sizes": "sizes",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Accept negative numbers and comma lists of them as option values.
        self._negative_number_matcher = re.compile(r"^-\d|^-\.\d")

    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {exc}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {exc}")


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(payload):
    return json.dumps(payload, indent=2) + "\n"


def _emit(payload, columns, args):
    text = (
        render_json(payload)
        if args.fmt == "json"
        else render_csv(payload["results"], columns)
    )
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _maybe_plot(args, draw):
    """Render the companion figure when writing to a file."""
    if not args.out or getattr(args, "no_plot", False):
        return
    figpath = str(Path(args.out).with_suffix(".png"))
    draw(figpath)


def _add_common(p, replicates=30, draws=100_000):
    p.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV_VAR} or 0)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the companion figure when writing to a file")
    p.add_argument("--replicates", type=int, default=replicates)
    p.add_argument("--draws", type=int, default=draws,
                   help="draws (or proposals) per replicate")


def build_parser():
    parser = _Parser(prog="gigsampler", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None,
                        help="JSON file with default values for the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw GIG variates")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--psi", type=float, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--eps0", type=float, default=None,
                   help="target rejection rate in (0,1)")
    p.add_argument("--cutoffs", type=int, default=None,
                   help="fixed number of cutoff points")
    p.add_argument("--adhoc-double", action="store_true",
                   help="feed the rate search a doubled rate")
    _add_common(p)

    p = sub.add_parser("acceptance-grid", help="mean acceptance rates over a grid")
    p.add_argument("--lambda", dest="lam", type=_float_list,
                   default=(-0.001, -0.01, -0.1, -1.0))
    p.add_argument("--beta", type=_float_list, default=(1e-4, 1e-3, 1e-2, 0.1))
    p.add_argument("--mode", choices=("naive", "rate", "rate-doubled", "count"),
                   default="naive")
    p.add_argument("--eps0", type=_float_list, default=())
    p.add_argument("--cutoffs", type=_int_list, default=())
    _add_common(p)

    p = sub.add_parser("quantile-check", help="quadrature vs simulated statistics")
    p.add_argument("--lambda", dest="lam", type=float, default=-0.1)
    p.add_argument("--psi", type=float, default=1.0)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100_000)
    _add_common(p, replicates=1)

    p = sub.add_parser("cutoff-curve", help="cutoff count vs rejection rate")
    p.add_argument("--lambda", dest="lam", type=_float_list,
                   default=(-0.001, -0.01, -0.1, -1.0))
    p.add_argument("--beta", type=_float_list, default=(1e-4, 1e-3, 1e-2, 0.1))
    p.add_argument("--points", type=int, default=500,
                   help="number of equispaced rate grid points")
    _add_common(p, replicates=1)

    p = sub.add_parser("timing-grid", help="generation time over (eps0, n)")
    p.add_argument("--lambda", dest="lam", type=_float_list, default=(0.1,))
    p.add_argument("--beta", type=_float_list, default=(0.1,))
    p.add_argument("--eps0", type=_float_list, default=())
    p.add_argument("--sizes", type=_int_list, default=(1, 10, 100, 1000, 10000))
    _add_common(p, replicates=10)

    p = sub.add_parser("rejection-grid", help="rejection constants vs cutoff count")
    p.add_argument("--lambda", dest="lam", type=_float_list,
                   default=(0.1, 0.5, 1.0, 1.5))
    p.add_argument("--beta", type=_float_list, default=(0.1, 0.5, 1.0, 1.5))
    p.add_argument("--cutoffs", type=_int_list, default=(10, 20, 40, 80, 160, 320))
    _add_common(p, replicates=1, draws=50_000)

    p = sub.add_parser("validate", help="run the statistical property battery")
    p.add_argument("--n", type=int, default=100_000)
    _add_common(p, replicates=1)
    return parser


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}")
    return 0


def _run_sample(args):
    seed = _resolve_seed(args)
    params = GigParams(args.lam, args.psi, args.chi)
    cfg = SamplerConfig(
        eps0=args.eps0,
        cutoff_count=args.cutoffs,
        adhoc_double=args.adhoc_double,
        seed=seed,
    )
    values, stats, info = sample_gig(args.n, params, cfg)
    if args.out is None and args.fmt == "csv":
        for v in values:
            sys.stdout.write(repr(float(v)) + "\n")
    else:
        spec = {
            "experiment": "sample",
            "lam": args.lam, "psi": args.psi, "chi": args.chi,
            "n": args.n, "eps0": args.eps0, "cutoffs": args.cutoffs,
            "adhoc_double": args.adhoc_double, "seed": seed,
            "cutoff_count": info.cutoff_count,
            "acceptance_rate": stats.acceptance_rate,
        }
        payload = {
            "spec": spec,
            "results": [{"value": float(v)} for v in values],
            "versions": _versions(),
        }
        if args.fmt == "json":
            text = render_json(payload)
        else:
            text = render_csv(payload["results"], COLUMNS["sample"])
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    if args.out and not args.no_plot:
        from . import plots

        plots.plot_sample_histogram(
            values, params, str(Path(args.out).with_suffix(".png")),
            pdf=lambda x: gig_pdf(x, params),
        )
    return 0


def _run_experiment(args):
    seed = _resolve_seed(args)
    name = args.command
    kwargs = {"experiment": name, "seed": seed, "replicates": args.replicates}
    if name == "acceptance-grid":
        kwargs.update(lambdas=args.lam, betas=args.beta, mode=args.mode,
                      eps0s=args.eps0, counts=args.cutoffs, draws=args.draws)
    elif name == "quantile-check":
        kwargs.update(lambdas=(args.lam,), psi=args.psi, chi=args.chi, draws=args.n)
    elif name == "cutoff-curve":
        kwargs.update(lambdas=args.lam, betas=args.beta, curve_points=args.points)
    elif name == "timing-grid":
        kwargs.update(lambdas=args.lam, betas=args.beta, eps0s=args.eps0,
                      sizes=args.sizes, draws=args.draws)
    elif name == "rejection-grid":
        kwargs.update(lambdas=args.lam, betas=args.beta, counts=args.cutoffs,
                      draws=args.draws)
    elif name == "validate":
        kwargs.update(draws=args.n)
    spec = ExperimentSpec(**kwargs)
    payload = RUNNERS[name](spec)
    _emit(payload, COLUMNS[name], args)

    if name in ("acceptance-grid", "quantile-check", "cutoff-curve",
                "timing-grid", "rejection-grid"):
        from . import plots

        _maybe_plot(args, lambda figpath: plots.FIGURES[name](payload, figpath))
    if name == "validate":
        failures = [r for r in payload["results"] if not r["passed"]]
        if failures:
            for r in failures:
                sys.stderr.write(
                    f"FAILED {r['check']} [{r['detail']}]: statistic "
                    f"{r['statistic']} vs threshold {r['threshold']}\n"
                )
            return 2
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        argv_list = list(sys.argv[1:] if argv is None else argv)
        if "--config" in argv_list or any(a.startswith("--config=") for a in argv_list):
            # Config values become parser defaults (on every subcommand);
            # explicit flags still override them.
            if "--config" in argv_list:
                cfg_path = argv_list[argv_list.index("--config") + 1]
            else:
                cfg_path = next(
                    a.split("=", 1)[1] for a in argv_list if a.startswith("--config=")
                )
            raw = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
            if not isinstance(raw, dict):
                raise UsageError("config file must contain a JSON object")
            defaults = {}
            for key, value in raw.items():
                key = _CONFIG_KEY_ALIASES.get(key, key)
                defaults[key] = tuple(value) if isinstance(value, list) else value
            parser.set_defaults(**defaults)
            for action in parser._actions:
                if isinstance(action, argparse._SubParsersAction):
                    for sub in action.choices.values():
                        sub.set_defaults(**defaults)
        args = parser.parse_args(argv_list)
        if args.command == "sample":
            return _run_sample(args)
        return _run_experiment(args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (DomainError, UnsupportedParametersError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except GigSamplerError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
