"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 resource cap exceeded,
4 result truncated by the search node cap.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .enumeration import (
    DEFAULT_CAP,
    CapExceededError,
    HistogramSpec,
    coverage_csv,
    enumerate_log_probs,
    histogram_csv,
    profile_from_log_probs,
    summary_rows,
    _auto_bins,
)
from .fit import epsilon_rank_estimate, fit_mass_weighted, fit_normal, mass_threshold
from .formats import ParseError, parse_bif, parse_native, write_native
from .generators import GenSpecError, generate, parse_gen_spec
from .moments import (
    NormalModel,
    clt_report,
    contribution_log,
    density_cdf,
    density_log,
    network_log_moments,
    skewness,
    theoretical_normal,
)
from .network import DegenerateDistributionError, Network, NetworkError, assignment_labels
from .sampling import ks_statistic, new_seed, sample_summary
from .search import DEFAULT_NODE_CAP, StopRule, search_top_states

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_TRUNCATED = 0, 2, 3, 4
SCHEMA_VERSION = 1
_LN10 = math.log(10.0)


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class _Run:
    """Collects what a manifest needs while a command executes."""

    def __init__(self, command: str, argv: Sequence[str], args: argparse.Namespace):
        self.command = command
        self.argv = list(argv)
        self.params = {k: v for k, v in vars(args).items() if k not in ("func",)}
        self.seeds: dict[str, int] = {}
        self.inputs: dict[str, str] = {}
        self.started = time.time()
        self._seed = getattr(args, "seed", None)

    def seed(self, use: str) -> int:
        """Seed for one stochastic step; a single auto-seed serves the whole run."""
        if self._seed is None:
            self._seed = new_seed()
            self.seeds["root_auto"] = self._seed
        self.seeds[use] = self._seed
        return self._seed

    def manifest(self, **extra) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "argv": self.argv,
            "parameters": self.params,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "library_version": __version__,
            "numpy_version": np.__version__,
            "python_version": platform.python_version(),
            "timing": {"started_unix": self.started, "elapsed_s": time.time() - self.started},
        }
        out.update(extra)
        return out


def _load(args: argparse.Namespace, run: _Run) -> Network:
    if args.generate and args.network:
        raise InputError("give either a network file or --generate, not both")
    if args.generate:
        try:
            spec = parse_gen_spec(args.generate)
        except GenSpecError as exc:
            raise InputError(str(exc)) from None
        if "seed=" not in args.generate:
            spec = parse_gen_spec(args.generate, seed=run.seed("generate"))
        run.seeds["generate"] = spec.seed
        run.params["generator"] = spec.to_dict()
        net = generate(spec)
    elif args.network:
        path = args.network
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from None
        run.inputs[path] = _sha256(path)
        try:
            net = parse_bif(text) if path.lower().endswith(".bif") else parse_native(text)
        except ParseError as exc:
            raise InputError("\n".join(f"{path}:{d}" for d in exc.diagnostics)) from None
    else:
        raise InputError("no network: give a file or --generate SPEC")
    subset = getattr(args, "subset", None)
    if subset:
        try:
            net = net.subnetwork([s.strip() for s in subset.split(",") if s.strip()])
        except NetworkError as exc:
            raise InputError(str(exc)) from None
    return net


def _hist_spec(args: argparse.Namespace) -> HistogramSpec:
    rng = None
    if args.range:
        try:
            lo, hi = (float(x) for x in args.range.split(","))
        except ValueError:
            raise InputError("--range expects MIN,MAX in log10 units") from None
        rng = (lo, hi)
    try:
        return HistogramSpec(bin_width=args.bin_width, range=rng)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _curves_csv(nm: NormalModel, points: int) -> str:
    lo = min(nm.xi, nm.contribution_mean) - 5.0 * nm.phi
    xs = np.linspace(lo, 0.0, points)
    f = density_log(nm, xs)
    pf = contribution_log(nm, xs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ln_p", "log10_p", "density_ln", "contribution_ln", "density_log10", "contribution_log10"])
    for x, a, b in zip(xs, f, pf):
        w.writerow([repr(float(x)), repr(float(x / _LN10)), repr(float(a)), repr(float(b)),
                    repr(float(a * _LN10)), repr(float(b * _LN10))])
    return buf.getvalue()


def _moments_report(net: Network) -> tuple[dict, NormalModel | None]:
    try:
        moments = network_log_moments(net)
    except DegenerateDistributionError as exc:
        return {"error": str(exc)}, None
    nm = theoretical_normal(net)
    report = {
        "variables": [
            {"name": v.name, "k": v.k, "mu": m.mu, "sigma2": m.sigma2, "omega3": m.omega3}
            for v, m in zip(net.variables, moments)
        ],
        "normal": nm.to_dict(),
        "contribution_center": nm.contribution_mean,
        "contribution_mode": nm.contribution_mode,
        "skewness": skewness(nm) if nm.phi2 > 0 else None,
    }
    if math.isinf(report["skewness"] or 0.0):
        report["skewness"] = "inf"
    return report, nm


# --------------------------------------------------------------------------
# commands


def cmd_analyze(args: argparse.Namespace, run: _Run) -> int:
    net = _load(args, run)
    spec = _hist_spec(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "network.json", write_native(net))

    moments, nm = _moments_report(net)
    _write(out / "moments.json", _dump_json(moments))
    try:
        clt = clt_report(net).to_dict()
    except DegenerateDistributionError as exc:
        clt = {"error": str(exc)}
    _write(out / "clt.json", _dump_json(clt))
    if nm is not None and nm.phi2 > 0:
        _write(out / "curves.csv", _curves_csv(nm, args.curve_points))
        thresholds = {
            str(f): mass_threshold(nm, f).to_dict() for f in (0.01, 0.05, 0.1)
        }
        _write(out / "threshold.json", _dump_json(thresholds))

    status = EXIT_OK
    extra: dict = {"state_count": net.state_count}
    try:
        logp = enumerate_log_probs(net, cap=args.cap, threads=args.threads)
    except CapExceededError as exc:
        extra["enumeration"] = {"skipped": str(exc)}
        if args.sample:
            seed = run.seed("sample")
            summary = sample_summary(net, args.sample, spec, nm, seed=seed, threads=args.threads)
            _write(out / "sample.json", _dump_json(summary.to_dict()))
        else:
            print(f"enumeration skipped: {exc}", file=sys.stderr)
            status = EXIT_CAP
    else:
        bounds = _auto_bins(net, spec.bin_width) if spec.range is None else None
        profile = profile_from_log_probs(logp, spec, bin_bounds=bounds, threads=args.threads)
        _write(out / "profile.json", _dump_json(profile.to_dict()))
        _write(out / "histogram.csv", histogram_csv(profile))
        _write(out / "coverage.csv", coverage_csv(profile))
        fit_doc: dict = {}
        try:
            fitted = fit_normal(logp)
            fit_doc["states"] = fitted.to_dict()
            fit_doc["mass_weighted"] = fit_mass_weighted(logp).to_dict()
            if fitted.phi2 > 0:
                ks = ks_statistic(logp[np.isfinite(logp)], lambda v: density_cdf(fitted, v))
                fit_doc["ks_statistic"] = ks
                fit_doc["lognormality_supported"] = ks < 0.05
        except ValueError as exc:
            fit_doc["error"] = str(exc)
        _write(out / "fit.json", _dump_json(fit_doc))
        lines = [f"{name:<32}{value}" for name, value in summary_rows(profile)]
        _write(out / "summary.txt", "\n".join(lines) + "\n")
        print("\n".join(lines))
    _write(out / "manifest.json", _dump_json(run.manifest(**extra)))
    return status


def cmd_sample(args: argparse.Namespace, run: _Run) -> int:
    net = _load(args, run)
    spec = _hist_spec(args)
    seed = run.seed("sample")
    try:
        nm = theoretical_normal(net)
    except DegenerateDistributionError:
        nm = None
    summary = sample_summary(net, args.m, spec, nm, seed=seed, threads=args.threads)
    doc = summary.to_dict()
    doc["reference"] = nm.to_dict() if nm else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "sample.json", _dump_json(doc))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo_log10", "bin_hi_log10", "count", "mass"])
    for row in zip(summary.bin_lo, summary.bin_hi, summary.counts, summary.masses):
        w.writerow([repr(float(row[0])), repr(float(row[1])), int(row[2]), repr(float(row[3]))])
    _write(out / "histogram.csv", buf.getvalue())
    _write(out / "manifest.json", _dump_json(run.manifest()))
    print(_dump_json({k: doc[k] for k in ("m", "seed", "mean_lnp", "variance_lnp", "ks_statistic")}), end="")
    return EXIT_OK


def _read_values(path: str) -> tuple[np.ndarray, np.ndarray | None]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            try:
                rows.append([float(x) for x in parts])
            except ValueError:
                continue  # header
    if not rows:
        raise InputError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError(f"{path}: rows have differing column counts")
    arr = np.array(rows)
    return arr[:, 0], (arr[:, 1] if width > 1 else None)


def _emit(args: argparse.Namespace, doc: dict) -> None:
    text = _dump_json(doc)
    if getattr(args, "out", None):
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def cmd_fit(args: argparse.Namespace, run: _Run) -> int:
    if args.values:
        run.inputs[args.values] = _sha256(args.values)
        values, weights = _read_values(args.values)
        if args.weights == "mass":
            weights = np.exp(values)
    else:
        net = _load(args, run)
        try:
            values = enumerate_log_probs(net, cap=args.cap, threads=args.threads)
        except CapExceededError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CAP
        weights = np.exp(values) if args.weights == "mass" else None
    try:
        nm = fit_normal(values, weights)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {"fit": nm.to_dict(), "weights": args.weights, "count": int(np.isfinite(values).sum())}
    _emit(args, doc)
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace, run: _Run) -> int:
    have_params = args.xi is not None or args.phi2 is not None
    if have_params and (args.xi is None or args.phi2 is None):
        raise InputError("--xi and --phi2 must be given together")
    if have_params and (args.network or args.generate):
        raise InputError("give either --xi/--phi2 or a network, not both")
    state_count = args.states
    if have_params:
        try:
            nm = NormalModel(args.xi, args.phi2)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        net = _load(args, run)
        state_count = state_count or net.state_count
        if args.fitted:
            nm = fit_normal(enumerate_log_probs(net, cap=args.cap))
        else:
            try:
                nm = theoretical_normal(net)
            except DegenerateDistributionError as exc:
                raise InputError(str(exc)) from None
    truncated = not args.untruncated
    try:
        if args.f is not None:
            doc = mass_threshold(nm, args.f, truncated=truncated).to_dict()
        else:
            doc = mass_threshold(nm, args.epsilon, truncated=truncated).to_dict()
            if state_count:
                est = epsilon_rank_estimate(NormalModel(nm.xi, nm.phi2, truncated), args.epsilon, state_count)
                doc["rank_estimate"] = {k: est.to_dict()[k] for k in ("estimate", "states", "state_count")}
    except (ValueError, DegenerateDistributionError) as exc:
        raise InputError(str(exc)) from None
    doc["model"] = nm.to_dict()
    _emit(args, doc)
    return EXIT_OK


def cmd_topk(args: argparse.Namespace, run: _Run) -> int:
    net = _load(args, run)
    try:
        if args.k is not None:
            rule = StopRule.max_states(args.k)
        elif args.epsilon is not None:
            rule = StopRule.residual_mass(args.epsilon)
        else:
            rule = StopRule.probability_floor(args.floor)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = search_top_states(net, rule, node_cap=args.node_cap)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "state_index"] + [v.name for v in net.variables] + ["probability", "cumulative_mass"])
    for r, (a, idx, p, c) in enumerate(zip(res.states, res.indices, res.probs, res.cumulative), 1):
        w.writerow([r, idx, *assignment_labels(net, a), repr(float(p)), repr(float(c))])
    if args.out:
        _write(Path(args.out), buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    manifest = run.manifest(search=res.manifest())
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        _write(Path(manifest_path), _dump_json(manifest))
    if res.truncated:
        print(f"search truncated at node cap {args.node_cap}", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_generate(args: argparse.Namespace, run: _Run) -> int:
    try:
        spec = parse_gen_spec(args.spec)
        if "seed=" not in args.spec:
            spec = parse_gen_spec(args.spec, seed=run.seed("generate"))
    except GenSpecError as exc:
        raise InputError(str(exc)) from None
    text = write_native(generate(spec))
    if args.out:
        _write(Path(args.out), text)
        _write(Path(f"{args.out}.manifest.json"), _dump_json(run.manifest(generator=spec.to_dict())))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check_clt(args: argparse.Namespace, run: _Run) -> int:
    net = _load(args, run)
    try:
        doc = clt_report(net).to_dict()
    except DegenerateDistributionError as exc:
        raise InputError(str(exc)) from None
    doc["names"] = [v.name for v in net.variables]
    _emit(args, doc)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_input(p: argparse.ArgumentParser, *, optional: bool = False) -> None:
    p.add_argument("network", nargs="?", help="network file (.bif or native JSON)")
    p.add_argument("--generate", metavar="SPEC",
                   help="generate a network instead, e.g. identical:n=10,k=2,p=0.1,0.9")
    p.add_argument("--subset", metavar="NAMES", help="comma-separated parent-closed variable subset")
    p.add_argument("--seed", type=int, help="seed for generation and sampling")


def _add_hist(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin-width", type=float, default=0.5, help="histogram bin width in log10 units")
    p.add_argument("--range", metavar="MIN,MAX", help="fixed histogram range in log10 units")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointprofile", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="moments, theory curves, enumeration profile and fit")
    _add_input(p)
    _add_hist(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration state cap")
    p.add_argument("--sample", type=int, metavar="M", help="sample M states if over the cap")
    p.add_argument("--curve-points", type=int, default=401)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sample", help="equiprobable Monte-Carlo draws of states")
    _add_input(p)
    _add_hist(p)
    p.add_argument("--m", type=int, default=100_000, help="number of draws")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="moment fit of ln p")
    _add_input(p)
    p.add_argument("--values", help="file of ln p values, optional second column of weights")
    p.add_argument("--weights", choices=("states", "mass"), default="states")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("threshold", help="probability threshold for a residual mass fraction")
    _add_input(p)
    p.add_argument("--xi", type=float)
    p.add_argument("--phi2", type=float)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--f", type=float, help="mass fraction carried by states below t")
    which.add_argument("--epsilon", type=float, help="like --f, plus a rank estimate")
    p.add_argument("--states", type=int, help="total state count for the rank estimate")
    p.add_argument("--fitted", action="store_true", help="use the enumeration fit, not theory")
    p.add_argument("--untruncated", action="store_true")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("topk", help="best-first search for the most probable states")
    _add_input(p)
    rule = p.add_mutually_exclusive_group(required=True)
    rule.add_argument("--k", type=int, help="emit this many states")
    rule.add_argument("--epsilon", type=float, help="stop once the remaining mass is at most this")
    rule.add_argument("--floor", type=float, help="emit states with probability at least this")
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--manifest", help="manifest path (default OUT.manifest.json)")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("generate", help="write a generated network in native format")
    p.add_argument("spec", help="e.g. identically_distributed:n=10,intervals=0:0.1,0.9:1")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("check-clt", help="Liapounov ratio report")
    _add_input(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_clt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    run = _Run(args.command, argv, args)
    try:
        return args.func(args, run)
    except (InputError, NetworkError, DegenerateDistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


def replay(manifest_path: str | os.PathLike) -> int:
    """Re-run the command recorded in a manifest, with its recorded seeds."""
    doc = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    argv = list(doc["argv"])
    auto = doc.get("seeds", {}).get("root_auto")
    if auto is not None:
        argv += ["--seed", str(auto)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
