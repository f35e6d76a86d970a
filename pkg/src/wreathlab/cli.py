"""Command-line front end: ``wreathlab <subcommand> [options]``.

Every subcommand accepts ``--seed``, ``--out``, ``--format {csv,json}`` and
``--threads``.  With ``--out DIR`` the result is written to
``DIR/<subcommand>.<format>`` next to ``DIR/<subcommand>.manifest.json``;
``wreathlab replay DIR/<subcommand>.manifest.json`` re-runs it.  Exit
status: 0 success, 1 a check ran and failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import groups as gr

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _group(name: str):
    try:
        return gr.group_from_name(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")


def _pow2_grid(t_max: int, start: int = 1) -> list:
    out, t = [], start
    while t <= t_max:
        out.append(t)
        t *= 2
    return out


class Result:
    """Tabular output plus a JSON summary and an overall pass flag."""

    def __init__(self, header, rows, summary, ok=True):
        self.header, self.rows, self.summary, self.ok = header, rows, summary, ok

    def render(self, fmt: str) -> str:
        if fmt == "json":
            data = {"columns": self.header, "rows": [list(r) for r in self.rows], "summary": self.summary}
            return json.dumps(data, sort_keys=True, default=_jsonable) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_cell(x) for x in r])
        return buf.getvalue()


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "item"):
        return x.item()
    return str(x)


# ---------------------------------------------------------------- subcommands


def cmd_walk_speed(a) -> Result:
    from .walks import WalkConfig, estimate_speed

    cfg = WalkConfig(a.group, a.t_max, a.trials, a.seed, _pow2_grid(a.t_max))
    est = estimate_speed(cfg, threads=a.threads)
    ok = True
    if a.expect_beta:
        lo, hi = a.expect_beta
        ok = lo <= est.beta_hat <= hi
    summ = {"group": a.group_name, "beta_hat": est.beta_hat, "residual": est.residual,
            "truncated_trials": est.truncated, "expect_beta": a.expect_beta, "pass": ok}
    return Result(["t", "mean", "stderr", "n_trials"], est.rows(), summ, ok)


def cmd_return_prob(a) -> Result:
    from .walks import WalkConfig, estimate_return

    cfg = WalkConfig(a.group, a.t_max, a.trials, a.seed, _pow2_grid(a.t_max, 2))
    cur = estimate_return(cfg, threads=a.threads)
    ok = True
    if a.expect_slope:
        lo, hi = a.expect_slope
        ok = lo <= cur.slope <= hi
    summ = {"group": a.group_name, "slope": cur.slope, "residual": cur.residual,
            "bipartite": cur.bipartite, "unreliable": [t for t, r in zip(cur.times, cur.reliable) if not r],
            "stretched_slope": cur.stretched_slope, "pass": ok}
    return Result(["t", "mean", "stderr", "n_trials"], cur.rows(), summ, ok)


def cmd_visits_range(a) -> Result:
    from .walks import WalkConfig, visits_and_range

    cfg = WalkConfig(a.group, a.t_max, a.trials, a.seed, _pow2_grid(a.t_max))
    st = visits_and_range(cfg, a.beta, threads=a.threads)
    summ = {"group": a.group_name, "beta": a.beta, "n_trials": st.n_trials}
    return Result(["t", "visits", "visits_se", "visits_beta", "visits_beta_se", "range", "range_se", "psi"],
                  st.rows(), summ)


def cmd_lamp_stats(a) -> Result:
    from dataclasses import asdict

    from .walks import wreath_lamp_statistics

    st = wreath_lamp_statistics(a.base, a.shape, a.n, a.trials, a.seed)
    ok = st.relative_gap <= a.max_gap and st.chi2_pvalue >= 1e-3
    d = asdict(st)
    return Result(["statistic", "value"], sorted(d.items()), dict(d, **{"pass": ok}), ok)


def cmd_embed(a) -> Result:
    from . import embed as em
    from .notation import parse_element

    u = parse_element(a.element)
    kind = a.embedding
    if kind == "free":
        v = em.embed_free_group(u, a.p)
    elif kind == "line":
        v = em.embed_line_l1(u.support, u.cursor)
    elif kind == "z2":
        v = em.embed_z2(u.support, u.cursor, a.alpha)
    else:
        if a.n is None:
            raise UsageError("--n is required for cycle embeddings")
        sites = u.support
        if kind == "first":
            v = em.embed_cycle_first(sites, u.cursor, a.n)
        elif kind == "second":
            v = em.embed_cycle_second(sites, u.cursor, a.n)
        else:
            v = em.embed_cycle_l2(sites, u.cursor, a.n, a.s)
    entries = json.loads(v.to_json())
    p = v.p if v.p is not None else a.p
    summ = {"embedding": kind, "element": a.element, "p": p, "norm": v.norm(p), "size": len(v)}
    return Result(["key", "value"], sorted(entries.items()), summ)


def cmd_distortion(a) -> Result:
    from .distortion import exact_distortion_small

    rows, reports = [], []
    for n in a.n:
        r = exact_distortion_small(n, a.embedding, a.s)
        reports.append(r)
        rows.append((n, r.pair_count, r.lipschitz, r.compression, r.distortion, r.alpha_hat))
    ds = [r.distortion for r in reports]
    spread = max(ds) / min(ds)
    ok = True
    if a.max_distortion is not None:
        ok &= max(ds) <= a.max_distortion
    if a.max_spread is not None:
        ok &= spread <= a.max_spread
    summ = {"embedding": a.embedding, "max_distortion": max(ds), "spread": spread, "pass": bool(ok)}
    return Result(["n", "pairs", "lipschitz", "compression", "distortion", "alpha_hat"], rows, summ, bool(ok))


def cmd_metric_check(a) -> Result:
    from .metric import bfs_ball, check_metric_equivalence, wreath_distance_exact
    from .notation import format_element

    g = a.group
    if not g.is_product or g.shape.kind not in ("integers", "cyclic"):
        raise UsageError("metric-check needs a wreath product over Z or a cycle")
    table = bfs_ball(g, a.radius, a.budget)
    rows, bad = [], 0
    for u, d in table.dist.items():
        w = wreath_distance_exact(u, g)
        bad += w != d
        rows.append((format_element(u), d, w))
    summ = {"group": a.group_name, "radius": a.radius, "ball_size": len(table), "mismatches": bad}
    if gr.is_finite(g.base):
        lam = gr.lamp_metric(g.base, g.shape)
        rep = check_metric_equivalence(lam, a.radius, a.budget)
        summ.update(min_ratio=rep.min_ratio, max_ratio=rep.max_ratio, window=rep.window)
    summ["pass"] = bad == 0
    return Result(["element", "bfs", "closed_form"], rows, summ, bad == 0)


def cmd_poincare(a) -> Result:
    from .metric import J_closed_form_integers, poincare_J

    rep = poincare_J(a.group, a.radii, a.tol)
    rows = []
    worst = 0.0
    for r, J in zip(rep.radii, rep.J):
        ref = J_closed_form_integers(r) if a.group.kind == "integers" else float("nan")
        if a.group.kind == "integers":
            worst = max(worst, abs(J - ref) / ref)
        rows.append((r, J, ref))
    summ = {"group": a.group_name, "alpha_hat": rep.alpha_hat, "residual": rep.residual,
            "iterations": rep.iterations, "max_rel_error": worst}
    ok = worst <= 1e-6
    summ["pass"] = ok
    return Result(["r", "J", "closed_form"], rows, summ, ok)


def cmd_enflo(a) -> Result:
    from .smooth import cube_distance_formulas, enflo_ratio

    rows_ = enflo_ratio(a.n, a.p, a.samples, a.seed)
    ok = True
    for r in rows_:
        diag, edges = cube_distance_formulas(r.n)
        ok &= abs(r.diagonal - diag ** a.p) <= 1e-9 * diag ** a.p
        ok &= abs(r.edge_sum - sum(e ** a.p for e in edges)) <= 1e-9 * r.edge_sum
    summ = {"p": a.p, "ratios": {r.n: r.ratio for r in rows_}, "formulas_match": bool(ok), "pass": bool(ok)}
    return Result(["n", "p", "diagonal", "edge_sum", "ratio", "exact"],
                  [(r.n, r.p, r.diagonal, r.edge_sum, r.ratio, r.exact) for r in rows_], summ, bool(ok))


def cmd_markov(a) -> Result:
    from .smooth import markov_ratio

    try:
        m = markov_ratio(a.n, a.p, _pow2_grid(a.t_max), a.trials, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    close = abs(m.edge_mc - m.edge_direct) <= 3 * m.edge_mc_se
    summ = {"n": a.n, "p": a.p, "sup": m.sup, "edge_mc": m.edge_mc, "edge_direct": m.edge_direct,
            "edge_agrees": bool(close), "start_chi2_pvalue": m.start_chi2_pvalue, "pass": bool(close)}
    return Result(["t", "khat", "stderr"], m.rows(), summ, bool(close))


def cmd_smoothness_suite(a) -> Result:
    from . import smooth as sm

    verdicts = [
        sm.two_point_smoothness(sm.SmoothnessParams(1.5, 1.5), 8, a.trials, a.seed),
        sm.two_point_smoothness(sm.SmoothnessParams(2, 4), 8, a.trials, a.seed + 1),
        sm.pisier_martingale_check(sm.SmoothnessParams(1.5, 1.5), 8, 8, a.martingales, a.seed, "exact"),
        sm.pisier_martingale_check(sm.SmoothnessParams(1.5, 1.5), 16, 8, a.martingales, a.seed, "mc"),
        sm.cocycle_identity_check(20, 100, a.seed),
        sm.cocycle_growth_check(sm.SmoothnessParams(2, 2), _pow2_grid(1024, 2), a.martingales, a.seed).verdict,
        sm.hilbert_doubling_check(_pow2_grid(512), a.martingales, a.seed).verdict,
    ]
    ok = all(v.passed for v in verdicts)
    rows = [(v.name, v.max_violation, v.tolerance, v.passed) for v in verdicts]
    summ = {"verdicts": [json.loads(v.to_json()) for v in verdicts], "pass": ok}
    return Result(["name", "max_violation", "tolerance", "pass"], rows, summ, ok)


def cmd_compose_alpha(a) -> Result:
    from .embed import CompressionParams, compression_composition, iterated_alpha

    if a.iterate:
        vals = iterated_alpha(a.iterate, a.p)
        rows = [(k, str(v), float(v)) for k, v in enumerate(vals, start=1)]
        summ = {"p": str(a.p), "table": [str(v) for v in vals]}
        return Result(["k", "alpha", "decimal"], rows, summ)
    if a.a is None or a.b is None:
        raise UsageError("compose-alpha needs --a and --b, or --iterate K")
    try:
        v = compression_composition(CompressionParams(a.a, a.b, a.p))
    except ValueError as exc:
        raise UsageError(str(exc))
    return Result(["a", "b", "p", "alpha", "decimal"], [(str(a.a), str(a.b), str(a.p), str(v), float(v))],
                  {"alpha": str(v), "decimal": float(v)})


# ---------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wreathlab", description="Wreath-product metric and random-walk experiments.")
    ap.add_argument("--version", action="version", version=f"wreathlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(fn=fn)
        return p

    p = add("walk-speed", cmd_walk_speed, "mean distance of the simple random walk and its exponent")
    p.add_argument("--group", type=_group, required=True, help=gr.REGISTRY_HELP)
    p.add_argument("--t-max", type=int, default=1 << 14)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--expect-beta", type=float, nargs=2, metavar=("LO", "HI"))

    p = add("return-prob", cmd_return_prob, "paired return probabilities and their log-log slope")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--t-max", type=int, default=1024)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--expect-slope", type=float, nargs=2, metavar=("LO", "HI"))

    p = add("visits-range", cmd_visits_range, "visits to the identity and range of the walk")
    p.add_argument("--group", type=_group, required=True, help="z, z2 or f2")
    p.add_argument("--t-max", type=int, default=1 << 12)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--beta", type=float, default=0.5)

    p = add("lamp-stats", cmd_lamp_stats, "lamp at the origin against a resampled base walk")
    p.add_argument("--base", type=_group, required=True)
    p.add_argument("--shape", type=_group, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--max-gap", type=float, default=0.1)

    p = add("embed", cmd_embed, "evaluate one embedding at one element")
    p.add_argument("--embedding", choices=("first", "second", "l2", "line", "z2", "free"), required=True)
    p.add_argument("--element", required=True, help="e.g. 'wreath{1:1|cursor=2}' or 'word:abA'")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float, default=0.75)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--p", type=float, default=1.0)

    p = add("distortion", cmd_distortion, "exact distortion of a cycle embedding")
    p.add_argument("--embedding", choices=("first", "second", "l2"), default="first")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--s", type=float, default=0.75)
    p.add_argument("--max-distortion", type=float)
    p.add_argument("--max-spread", type=float)

    p = add("metric-check", cmd_metric_check, "closed-form wreath distances against BFS")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--radius", type=int, default=10)
    p.add_argument("--budget", type=int, default=2_000_000)

    p = add("poincare", cmd_poincare, "Dirichlet Poincare constants J(r)")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--radii", type=int, nargs="+", default=[4, 8, 16, 32])
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("enflo", cmd_enflo, "cube diagonal against edges in Z wr Z")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--samples", type=int, default=4096)

    p = add("markov", cmd_markov, "Markov-type ratio for the lazy cube walk in Z wr Z")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--t-max", type=int, default=256)
    p.add_argument("--trials", type=int, default=20_000)

    p = add("smoothness-suite", cmd_smoothness_suite, "all inequality checks")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--martingales", type=int, default=10_000)

    p = add("compose-alpha", cmd_compose_alpha, "compression exponent of a wreath product")
    p.add_argument("--a", type=_frac)
    p.add_argument("--b", type=_frac)
    p.add_argument("--p", type=_frac, default=Fraction(2))
    p.add_argument("--iterate", type=int, help="print the table for Z, Z wr Z, ... up to K factors")

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(fn=None)
    return ap


def _execute(argv: list, stdout) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.command == "replay":
        man = json.loads(Path(a.manifest).read_text())
        if man.get("schema") != 1:
            raise UsageError(f"unsupported manifest schema {man.get('schema')!r}")
        args = list(man["argv"])
        if a.out is not None:
            args += ["--out", a.out]
        if a.threads is not None:
            args += ["--threads", str(a.threads)]
        return _execute(args, stdout)
    for name in ("group", "base", "shape"):
        if hasattr(a, name):
            setattr(a, f"{name}_name", _raw_value(argv, f"--{name}"))
    a.threads = a.threads or os.cpu_count() or 1
    started = time.time()
    res = a.fn(a)
    text = res.render(a.format)
    if a.out is None:
        stdout.write(text)
        if a.format == "csv":
            stdout.write(json.dumps(res.summary, sort_keys=True, default=_jsonable) + "\n")
    else:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        data = out / f"{a.command}.{a.format}"
        data.write_text(text)
        clean = _strip(argv, ("--out", "--threads"))
        manifest = {
            "schema": 1, "tool": "wreathlab", "version": __version__, "subcommand": a.command,
            "argv": clean, "params": _params(a),
            "seed": a.seed, "threads": a.threads, "started": started, "finished": time.time(),
            "outputs": [str(data)], "pass": res.ok,
        }
        (out / f"{a.command}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
        stdout.write(json.dumps(res.summary, sort_keys=True, default=_jsonable) + "\n")
    return EXIT_OK if res.ok else EXIT_FAIL


def _params(a) -> dict:
    out = {}
    for k, v in vars(a).items():
        if k == "fn" or k.endswith("_name"):
            continue
        out[k] = getattr(a, f"{k}_name", v) if k in ("group", "base", "shape") else v
    return out


def _raw_value(argv, flag):
    for i, x in enumerate(argv):
        if x == flag and i + 1 < len(argv):
            return argv[i + 1]
        if x.startswith(flag + "="):
            return x.split("=", 1)[1]
    return None


def _strip(argv, flags):
    out, skip = [], False
    for x in argv:
        if skip:
            skip = False
            continue
        if x in flags:
            skip = True
            continue
        if any(x.startswith(f + "=") for f in flags):
            continue
        out.append(x)
    return out


def run(argv=None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    try:
        return _execute(argv, stdout)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
