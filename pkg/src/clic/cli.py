"""``clic`` command line: simulate, fit, summarize, oracle.

Exit status is 0 on success, 1 on runtime or data errors and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, simulate
from ._validation import standardize_views
from .inference import (
    effective_sample_size,
    joint_k_posterior,
    k_posterior,
    minimize_vi,
    posterior_similarity,
    rand_posterior_summary,
)
from .kernels import GaussianViewSpec, RegressionViewSpec
from .partitions import contingency
from .sampler import (
    MultiviewData,
    PosteriorTrace,
    SamplerConfig,
    parse_rho_scheme,
    run_chain,
)

# keys are lower case, as configparser stores them
DEFAULTS = {
    "l": "5",
    "gamma": "1",
    "rho": "gamma:1,1",
    "iters": "30000",
    "burnin": "10000",
    "thin": "2",
    "chains": "1",
    "standardize": "true",
    "model": "uncorrelated",
    "label_scheme": "conditional",
    "header": "false",
}


class UsageError(Exception):
    pass


def _stamp(out: Path, extra: dict | None = None):
    meta = {"created": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    meta.update(extra or {})
    io.write_json(out / "metadata.json", meta)


def _fresh_seed(seed):
    return int(np.random.SeedSequence().entropy % 2**63) if seed is None else int(seed)


# simulate --------------------------------------------------------------------

def cmd_simulate(args) -> int:
    seed = _fresh_seed(args.seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if args.scenario in ("two-view", "correlated") and args.case is None:
        raise UsageError(f"--case is required for scenario {args.scenario}")
    if args.eta2 <= 0:
        raise UsageError("--eta2 must be positive")
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.scenario == "two-view":
        ds = simulate.gen_two_view(args.case, args.eta2, args.n, rng)
    elif args.scenario == "correlated":
        ds = simulate.gen_correlated(args.case, args.eta2, args.n, rng)
    elif args.scenario == "three-view":
        ds = simulate.gen_three_view(args.n, rng)
    else:
        ds = simulate.gen_varying(args.n, args.d2, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for v, X in enumerate(ds.views, start=1):
        name = f"view{v}.csv"
        io.write_matrix_csv(out / name, X)
        files.append(name)
    V = len(ds.views)
    io.write_table(out / "truth.csv", [f"view{v}" for v in range(1, V + 1)],
                   np.column_stack(ds.labels).tolist())
    io.write_json(out / "manifest.json", {
        "scenario": ds.metadata, "model": ds.model, "seed": seed,
        "files": files + ["truth.csv"],
    })
    _stamp(out)
    print(f"seed = {seed}")
    print(f"wrote {V} views and truth labels to {out}")
    return 0


# fit -------------------------------------------------------------------------

@dataclass
class RunConfig:
    views: list
    kinds: list
    covariates: list
    sampler: SamplerConfig
    chains: int = 1
    standardize: bool = True
    header: bool = False
    out: Path = field(default_factory=lambda: Path("."))

    def to_dict(self) -> dict:
        return {
            "views": [str(p) for p in self.views],
            "kinds": self.kinds,
            "covariates": self.covariates,
            "sampler": self.sampler.to_dict(),
            "chains": self.chains,
            "standardize": self.standardize,
            "header": self.header,
        }


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _per_view(text: str, V: int, cast, name: str) -> tuple:
    parts = [p for p in str(text).split(",") if p.strip()]
    try:
        vals = [cast(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad value for {name}: {text!r}") from None
    if len(vals) == 1:
        vals = vals * V
    if len(vals) != V:
        raise UsageError(f"{name} needs 1 or {V} values, got {len(vals)}")
    return tuple(vals)


def build_run_config(args) -> RunConfig:
    settings = dict(DEFAULTS)
    view_paths, kinds, covariates = [], [], []
    if args.config:
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise io.DataError(f"{cfg_path}: no such file")
        parser = configparser.ConfigParser()
        try:
            parser.read(cfg_path, encoding="utf-8")
        except configparser.Error as err:
            raise UsageError(f"{cfg_path}: {err}") from None
        if parser.has_section("sampler"):
            settings.update(parser["sampler"])
        sections = sorted((s for s in parser.sections() if s.startswith("view")),
                          key=lambda s: int(s[4:]) if s[4:].isdigit() else 10**9)
        for s in sections:
            sec = parser[s]
            if "path" not in sec:
                raise UsageError(f"[{s}] needs a path")
            p = Path(sec["path"])
            view_paths.append(p if p.is_absolute() else cfg_path.parent / p)
            kinds.append(sec.get("kind", "gaussian"))
            covariates.append(int(sec["covariate"]) - 1 if "covariate" in sec else None)
    for key in ("L", "gamma", "rho", "iters", "burnin", "thin", "seed", "chains", "model",
                "label_scheme", "out"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key.lower()] = str(val)
    if args.standardize is not None:
        settings["standardize"] = str(args.standardize)
    if args.header:
        settings["header"] = "true"
    if args.views:
        view_paths = [Path(p) for p in args.views]
        kinds = ["gaussian"] * len(view_paths)
        covariates = [None] * len(view_paths)
    if len(view_paths) < 2:
        raise UsageError("need at least two views (--views or [viewN] sections)")
    V = len(view_paths)
    if settings["model"] == "correlated":
        if V != 2:
            raise UsageError("the correlated model takes exactly two views")
        kinds = ["gaussian", "regression"]
        covariates = [None, 0]
    elif settings["model"] != "uncorrelated":
        raise UsageError(f"unknown model {settings['model']!r}")
    if "out" not in settings:
        raise UsageError("--out is required")
    try:
        sampler = SamplerConfig(
            n_components=_per_view(settings["l"], V, int, "L"),
            gammas=_per_view(settings["gamma"], V, float, "gamma"),
            rho=parse_rho_scheme(settings["rho"]),
            label_scheme=settings["label_scheme"],
            iterations=int(settings["iters"]),
            burn_in=int(settings["burnin"]),
            thin=int(settings["thin"]),
            seed=_fresh_seed(settings.get("seed")),
        )
        chains = int(settings["chains"])
    except ValueError as err:
        raise UsageError(str(err)) from None
    if chains < 1:
        raise UsageError("--chains must be >= 1")
    return RunConfig(view_paths, kinds, covariates, sampler, chains,
                     _bool(settings["standardize"]), _bool(settings["header"]),
                     Path(settings["out"]))


def load_data(rc: RunConfig) -> MultiviewData:
    views = [io.read_matrix_csv(p, header=rc.header) for p in rc.views]
    specs = []
    for X, kind, cov in zip(views, rc.kinds, rc.covariates):
        if kind == "regression":
            if X.shape[1] != 1:
                raise io.DataError("a regression view must have exactly one column")
            specs.append(RegressionViewSpec(covariate_view=cov if cov is not None else 0))
        elif kind == "gaussian":
            specs.append(GaussianViewSpec(dim=X.shape[1]))
        else:
            raise UsageError(f"unknown view kind {kind!r}")
    n = views[0].shape[0]
    for p, X in zip(rc.views, views):
        if X.shape[0] != n:
            raise io.DataError(f"{p}: {X.shape[0]} rows, expected {n} like {rc.views[0]}")
    if rc.standardize:
        views = standardize_views(views, specs)
    return MultiviewData(views, specs)


def write_trace(out: Path, trace: PosteriorTrace, chain_ids: np.ndarray, provenance: str):
    V = trace.num_views
    for v in range(V):
        io.write_labels_csv(out / f"labels_view{v + 1}.csv", trace.labels[:, v], provenance)
    header = (["iter", "rho"] + [f"rand_{u + 1}{w + 1}" for u, w in trace.pairs]
              + [f"k{v + 1}" for v in range(V)] + ["chain"])
    rows = [
        [int(trace.iterations[t]), float(trace.rho[t])]
        + [float(x) for x in trace.rand[t]] + [int(k) for k in trace.k[t]] + [int(chain_ids[t])]
        for t in range(trace.n_draws)
    ]
    io.write_table(out / "series.csv", header, rows, provenance)


def cmd_fit(args) -> int:
    rc = build_run_config(args)
    data = load_data(rc)
    out = rc.out
    out.mkdir(parents=True, exist_ok=True)
    children = np.random.SeedSequence(rc.sampler.seed).spawn(rc.chains)
    traces, chain_ids, seconds = [], [], []
    for c, child in enumerate(children):
        trace = run_chain(data, rc.sampler, rng=np.random.default_rng(child))
        traces.append(trace)
        chain_ids.append(np.full(trace.n_draws, c + 1))
        seconds.append(trace.metadata["wall_clock_seconds"])
    merged = PosteriorTrace.concatenate(traces)
    manifest = rc.to_dict()
    manifest["seed"] = rc.sampler.seed
    manifest["seed_rule"] = "chain c uses numpy SeedSequence(seed).spawn(chains)[c]"
    manifest["inputs"] = {str(p): io.file_sha256(p) for p in rc.views}
    manifest["n"] = data.n
    sha = io.write_json(out / "manifest.json", manifest)
    write_trace(out, merged, np.concatenate(chain_ids), sha)
    _stamp(out, {"wall_clock_seconds": seconds})
    print(f"seed = {rc.sampler.seed}")
    print(f"kept {merged.n_draws} draws from {rc.chains} chain(s) in {sum(seconds):.1f} s")
    return summarize_dir(out)


# summarize -------------------------------------------------------------------

def load_trace(trace_dir: Path) -> tuple[PosteriorTrace, str]:
    manifest = trace_dir / "manifest.json"
    series = trace_dir / "series.csv"
    if not manifest.is_file() or not series.is_file():
        raise io.DataError(f"{trace_dir}: not a trace directory (manifest.json/series.csv missing)")
    sha = io.file_sha256(manifest)
    header, rows = io.read_table(series)
    if not rows:
        raise io.DataError(f"{series}: trace is empty")
    table = np.array(rows, dtype=float)
    V = sum(1 for h in header if h.startswith("k"))
    pairs = [(int(h[5]) - 1, int(h[6]) - 1) for h in header if h.startswith("rand_")]
    labels = np.stack([io.read_labels_csv(trace_dir / f"labels_view{v + 1}.csv")
                       for v in range(V)], axis=1)
    if labels.shape[0] != table.shape[0]:
        raise io.DataError(f"{trace_dir}: label files and series.csv disagree on draw count")
    col = {h: i for i, h in enumerate(header)}
    trace = PosteriorTrace(
        labels=labels,
        rho=table[:, col["rho"]],
        rand=table[:, [col[f"rand_{u + 1}{w + 1}"] for u, w in pairs]],
        k=table[:, [col[f"k{v + 1}"] for v in range(V)]].astype(np.int64),
        iterations=table[:, col["iter"]].astype(np.int64),
        pairs=pairs,
    )
    return trace, sha


def summarize_dir(trace_dir) -> int:
    out = Path(trace_dir)
    trace, sha = load_trace(out)
    V = trace.num_views
    lines = [f"manifest_sha256 = {sha}", f"n_draws = {trace.n_draws}", f"n = {trace.n}"]
    points = []
    for v in range(V):
        est = minimize_vi(trace, v)
        points.append(est)
        io.write_labels_csv(out / f"point_estimate_view{v + 1}.csv", est, sha)
        io.write_matrix_csv(out / f"psm_view{v + 1}.csv", posterior_similarity(trace, v),
                            provenance=sha)
        kp = k_posterior(trace, v)
        io.write_table(out / f"k_posterior_view{v + 1}.csv", ["k", "probability"],
                       sorted(kp.items()), sha)
        lines.append(f"k{v + 1}_point_estimate = {int(est.max())}")
        lines.append(f"k{v + 1}_posterior_mode = {max(kp, key=kp.get)}")
    ess_rows = []
    if trace.n_draws >= 10:
        ess_rows.append(("rho", effective_sample_size(trace.rho)))
    for u, w in trace.pairs:
        tag = f"{u + 1}{w + 1}"
        s = rand_posterior_summary(trace, (u, w))
        lines.append(f"rand_{tag}_mean = {s.mean:.6f}")
        lines.append(f"rand_{tag}_ci95 = [{s.lo:.3f}, {s.hi:.3f}]")
        counts, edges = np.histogram(s.series, bins=20, range=(0.0, 1.0))
        io.write_table(out / f"rand_hist_{tag}.csv", ["bin_lo", "bin_hi", "count"],
                       [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], counts)],
                       sha)
        jk = joint_k_posterior(trace, (u, w))
        io.write_table(out / f"joint_k_posterior_{tag}.csv", [f"k{u + 1}", f"k{w + 1}", "probability"],
                       [(a, b, p) for (a, b), p in sorted(jk.items())], sha)
        tab = contingency(points[u], points[w]).counts
        io.write_matrix_csv(out / f"contingency_{tag}.csv", tab,
                            header=list(range(1, tab.shape[1] + 1)), provenance=sha)
        if trace.n_draws >= 10:
            ess_rows.append((f"rand_{tag}", effective_sample_size(s.series)))
    if trace.n_draws >= 10:
        for v in range(V):
            ess_rows.append((f"k{v + 1}", effective_sample_size(trace.k[:, v])))
    io.write_table(out / "ess.csv", ["series", "ess"], ess_rows, sha)
    for name, value in ess_rows:
        lines.append(f"ess_{name} = {value:.1f}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_summarize(args) -> int:
    return summarize_dir(args.trace_dir)


# oracle ----------------------------------------------------------------------

def cmd_oracle(args) -> int:
    from .oracle import eri_grid, run_all

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = run_all(tamper=args.tamper, geweke=not args.skip_geweke)
    io.write_table(out / "oracle_report.csv",
                   ["name", "computed", "reference", "tolerance", "passed", "runtime", "detail"],
                   [(r.name, r.computed, r.reference, r.tolerance, int(r.passed), r.runtime, r.detail)
                    for r in reports])
    io.write_table(out / "eri_grid.csv", ["rho", "gamma1", "gamma2", "value"], eri_grid())
    for r in reports:
        print(r.line())
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} checks passed")
    return 1 if failed else 0


# entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic multiview dataset")
    s.add_argument("--scenario", required=True,
                   choices=["two-view", "three-view", "varying", "correlated"])
    s.add_argument("--case", type=int, choices=[1, 2, 3])
    s.add_argument("--eta2", type=float, default=0.2)
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--d2", type=int, default=2)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="run the Gibbs sampler and summarize")
    f.add_argument("--config", help="INI file with [sampler] and [viewN] sections")
    f.add_argument("--views", nargs="+", help="one CSV per view (overrides the config)")
    f.add_argument("--header", action="store_true", help="view CSVs have a header row")
    f.add_argument("--model", choices=["uncorrelated", "correlated"])
    f.add_argument("--L", help="components per view, e.g. 5 or 5,5")
    f.add_argument("--gamma", help="view concentrations, e.g. 1 or 1,2")
    f.add_argument("--rho", help="fixed:v | gamma:a,b | grid:lo:hi:step")
    f.add_argument("--iters", type=int)
    f.add_argument("--burnin", type=int)
    f.add_argument("--thin", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--chains", type=int)
    f.add_argument("--label-scheme", dest="label_scheme", choices=["joint", "conditional"])
    f.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("summarize", help="summarize a trace directory written by fit")
    m.add_argument("trace_dir")
    m.set_defaults(func=cmd_summarize)

    o = sub.add_parser("oracle", help="run the brute-force verification checks")
    o.add_argument("--out", default=".")
    o.add_argument("--tamper", action="store_true",
                   help="test hook: corrupt one reference constant so the run must fail")
    o.add_argument("--skip-geweke", action="store_true", help="skip the slow sampler checks")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"clic: error: {err}", file=sys.stderr)
        return 2
    except (io.DataError, ValueError, OSError) as err:
        print(f"clic: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
