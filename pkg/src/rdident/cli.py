"""Command-line front end: ``rdident {forward,invert,sweep,diagnose}``.

Exit codes: 0 success or converged, 1 other library error (for example a
degenerate data range), 2 diverged or stagnated, 3 forward solver failure
outside the iteration, 64 configuration error.  A bad
configuration is rejected before anything is written.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import svg
from .data import (FINAL_TIME, Measurement, estimate_range, sample_measurement, smooth_spatial,
                   smooth_temporal)
from .diagnostics import (competing_beta_bound, decay_fit, dissipativity_check,
                          range_condition_check)
from .errors import ConfigError, ForwardFailure, NotDissipative, RDIdentError
from .inversion import InverseProblem, Verdict, run
from .io import atomic_write_text, write_csv, write_json
from .forward import solve_forward
from .config import build_experiment, load_config

EXIT_OK, EXIT_OTHER, EXIT_DIVERGED, EXIT_FORWARD, EXIT_CONFIG = 0, 1, 2, 3, 64
ITERATE_COLORS = svg.PALETTE[:5]

log = logging.getLogger("rdident")


# ------------------------------------------------------------------ pipeline

def simulate(ex):
    """Forward solve with the configured (true) functions and sample it."""
    traj = solve_forward(ex.spec, ex.grid, extrapolate=ex.extrapolate)
    if ex.measurement:
        try:
            m = Measurement.from_csv(ex.measurement)
        except (OSError, ValueError, KeyError, IndexError) as exc:
            raise ConfigError(f"cannot load measurement {ex.measurement}: {exc}") from None
        if m.kind != ex.mode:
            raise ConfigError(f"measurement file holds {m.kind} data but mode is {ex.mode}")
    else:
        m = sample_measurement(traj, ex.mode, ex.samples, ex.noise, ex.seed, ex.endpoint)
    return traj, m


def smooth(ex, m):
    mu = 0.0 if not ex.smoothing else ex.mu
    if m.kind == FINAL_TIME:
        return smooth_spatial(m, ex.spec.bc, ex.grid.x, ex.ncoef, mu, ex.spec.a, ex.spec.q,
                              ex.grid.length)
    x0 = np.array([0.0 if m.endpoint == "left" else ex.grid.length])
    anchor = [float(np.asarray(a).ravel()[0]) for a in ex.spec.initial(x0)]
    return smooth_temporal(m, ex.grid.t, anchor, mu)


def make_problem(ex, m):
    d = smooth(ex, m)
    prob = InverseProblem(ex.spec, ex.grid, d, m, max_iters=ex.max_iters, tol=ex.tol,
                          truth=ex.spec.unknowns(), ncenters=ex.ncenters, ridge=ex.ridge,
                          extrapolate=ex.extrapolate)
    return prob, d


def _params(ex):
    return {"system": ex.spec.name, "mode": ex.mode, "beta_u": ex.spec.beta_u,
            "beta_v": ex.spec.beta_v, "nx": ex.grid.nx, "nt": ex.grid.nt, "T": ex.grid.T,
            "samples": ex.samples, "noise": ex.noise, "seed": ex.seed,
            "smoothing": ex.smoothing, "max_iters": ex.max_iters, "ncenters": ex.ncenters}


def _plot_reconstruction(ex, prob, res, out: Path):
    names = ("f1", "f2") if ex.spec.unknown == "f" else ("phi1", "phi2")
    n = res.iterations
    picks = [k for k in (2, 4, 6, 8, 10) if k <= n] or [n]
    for s, (name, truth, J) in enumerate(zip(names, prob.truth, prob.intervals)):
        grid = J.stored_abscissae()
        series = [svg.Series(list(grid), list(np.asarray(truth(grid), dtype=float)), "exact",
                             "#000000", dashed=True)]
        for c, k in enumerate(picks):
            prof = res.iterates[k][s]
            series.append(svg.Series(list(prof.abscissae), list(prof.values), f"iterate {k}",
                                     ITERATE_COLORS[c % len(ITERATE_COLORS)], width=2.0))
        svg.line_chart(out / f"reconstruction_{name}.svg", series, title=f"{name}: {ex.spec.name}",
                       xlabel="argument", ylabel=name)
    if len(res.error_history):
        it = list(range(len(res.error_history)))
        svg.line_chart(out / "errors.svg",
                       [svg.Series(it, list(res.error_history[:, 0]), names[0], svg.PALETTE[2]),
                        svg.Series(it, list(res.error_history[:, 1]), names[1], svg.PALETTE[5])],
                       title="relative L2 error", xlabel="iteration", ylabel="error", logy=True)


def invert_once(ex, out: Path):
    """Simulate, smooth, reconstruct and write artifacts; returns the result."""
    traj, m = simulate(ex)
    prob, d = make_problem(ex, m)
    res = run(prob)
    res.params = _params(ex)
    out.mkdir(parents=True, exist_ok=True)
    m.to_csv(out / "measurement.csv")
    d.to_csv(out / "smoothed.csv")
    res.write_error_history(out / "error_history.csv")
    res.write_profiles(out / "profiles.csv")
    res.write_summary(out / "summary.json")
    if ex.svg:
        _plot_reconstruction(ex, prob, res, out)
    return res


def verdict_exit(verdict: Verdict) -> int:
    return EXIT_OK if verdict is Verdict.CONVERGED else EXIT_DIVERGED


# ------------------------------------------------------------------ commands

def cmd_forward(ex) -> int:
    traj = solve_forward(ex.spec, ex.grid, extrapolate=ex.extrapolate)
    out = Path(ex.out_dir)
    x, t = ex.grid.x, ex.grid.t
    idx = [int(np.argmin(np.abs(t - s))) for s in ex.snapshots]
    rows = ([t[k], xi, traj.u[k, j], traj.v[k, j]] for k in idx for j, xi in enumerate(x))
    write_csv(out / "trajectory.csv", ["t", "x", "u", "v"], rows)
    left, right = traj.trace("left"), traj.trace("right")
    write_csv(out / "traces.csv", ["t", "u_left", "v_left", "u_right", "v_right"],
              zip(t, left[0], left[1], right[0], right[1]))
    if ex.svg:
        for s, name in enumerate("uv"):
            series = [svg.Series(list(x), list(traj.values[s, k]), f"t={t[k]:.3g}",
                                 svg.PALETTE[c % len(svg.PALETTE)]) for c, k in enumerate(idx)]
            svg.line_chart(out / f"snapshots_{name}.svg", series, title=f"{name}(x, t)",
                           xlabel="x", ylabel=name)
    log.info("forward solve done: %s", ex.spec.name)
    return EXIT_OK


def cmd_invert(ex) -> int:
    res = invert_once(ex, Path(ex.out_dir))
    last = res.error_history[-1] if len(res.error_history) else [np.nan, np.nan]
    log.info("verdict %s after %d iterations, q=%s, errors %.3e %.3e",
             res.verdict.value, res.iterations, res.contraction_q, last[0], last[1])
    return verdict_exit(res.verdict)


def _sweep_worker(args):
    config, overrides, beta, out = args
    logging.getLogger("rdident").setLevel(logging.WARNING)
    doc, node = load_config(config)
    ex = build_experiment(doc, node, **overrides).with_beta(beta)
    try:
        res = invert_once(ex, Path(out))
    except ForwardFailure as exc:
        return beta, [], "forward-failure", None, str(exc)
    return beta, res.error_history.tolist(), res.verdict.value, res.contraction_q, res.message


def _beta_dir(beta) -> str:
    return f"beta_{beta:+g}".replace("+", "p").replace("-", "m").replace(".", "_")


def cmd_sweep(ex, config, overrides) -> int:
    out = Path(ex.out_dir)
    jobs = [(config, overrides, b, str(out / _beta_dir(b))) for b in ex.betas]
    if ex.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(ex.workers, len(jobs))) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    rows, summary, series = [], [], []
    for c, (beta, hist, verdict, q, msg) in enumerate(results):
        for k, (e1, e2) in enumerate(hist):
            rows.append([beta, str(k), e1, e2])
        summary.append([beta, verdict, "" if q is None else q, msg])
        if hist:
            h = np.asarray(hist)
            series.append(svg.Series(list(range(len(h))), list(np.max(h, axis=1)), f"beta={beta:g}",
                                     svg.PALETTE[c % len(svg.PALETTE)]))
        log.info("beta=%g: %s", beta, verdict)
    write_csv(out / "sweep.csv", ["beta", "iter", "err_f1", "err_f2"], rows)
    write_csv(out / "sweep_summary.csv", ["beta", "verdict", "contraction_q", "message"],
              ([b, v, "" if q == "" else q, m] for b, v, q, m in summary))
    if ex.svg:
        svg.line_chart(out / "rates.svg", series, title="error vs iteration", xlabel="iteration",
                       ylabel="max relative error", logy=True)
    return EXIT_OK


def cmd_diagnose(ex, quiet=False) -> int:
    traj, m = simulate(ex)
    J = estimate_range(smooth(ex, m))
    out = Path(ex.out_dir)
    fit = decay_fit(traj)
    rng = range_condition_check(traj, J)
    diss = dissipativity_check(ex.spec, J, ex.c_Q, ex.nsamples)
    lines = [f"system: {ex.spec.name}", f"mode: {ex.mode}",
             f"data ranges: u in [{J[0].lo:.6g}, {J[0].hi:.6g}], v in [{J[1].lo:.6g}, {J[1].hi:.6g}]",
             f"decay fit: |D_t u| ~ C exp(-c t), C={fit.C2:.6g}, c={fit.c2:.6g}, log residual {fit.residual:.3g}",
             rng.to_text().rstrip(), diss.to_text().rstrip()]
    try:
        bound = competing_beta_bound(ex.spec.f1, ex.spec.f2, J)
        lines.append(f"competing-species bound on these ranges: interaction -b*u*v admitted "
                     f"for b <= {bound:.6g}")
    except NotDissipative as exc:
        lines.append(f"competing-species beta bound: not applicable ({exc})")
    atomic_write_text(out / "diagnostics.txt", "\n".join(lines) + "\n")
    diss.to_csv(out / "margins.csv")
    write_json(out / "diagnostics.json", {
        "decay": {"C2": fit.C2, "c2": fit.c2, "residual": fit.residual},
        "range": {"holds": rng.holds, "fraction_outside": list(rng.fraction_outside),
                  "max_excursion": list(rng.max_excursion)},
        "dissipativity": {"passed": diss.passed, "worst": diss.worst,
                          "point": list(diss.worst_point), "violated": diss.failed_test},
    })
    if not quiet:
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ entry

def _beta_list(text):
    try:
        return [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="rdident", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("forward", "solve the forward problem and write snapshots"),
                        ("invert", "simulate data and reconstruct the unknown pair"),
                        ("sweep", "reconstruct for a list of interaction strengths"),
                        ("diagnose", "check decay, range and dissipativity hypotheses")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="YAML experiment file")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        s.add_argument("--seed", type=int, help="noise seed (overrides data.seed)")
        s.add_argument("--beta", type=_beta_list,
                       help="comma-separated interaction strengths (write --beta=-1,1 when the list starts with a minus)")
        s.add_argument("--mode", choices=["final-time", "time-trace"], help="data type")
        s.add_argument("--quiet", action="store_true", help="only report errors")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    overrides = {"seed": args.seed, "mode": args.mode, "out": args.out}
    try:
        doc, node = load_config(args.config)
        ex = build_experiment(doc, node, **overrides, betas=args.beta)
        if args.command == "sweep":
            if not ex.betas:
                raise ConfigError("sweep needs a non-empty beta list (--beta or sweep.betas)")
        elif args.beta:
            if len(args.beta) != 1:
                raise ConfigError(f"{args.command} takes a single --beta value")
            ex = ex.with_beta(args.beta[0])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "forward":
            return cmd_forward(ex)
        if args.command == "invert":
            return cmd_invert(ex)
        if args.command == "sweep":
            return cmd_sweep(ex, args.config, overrides)
        return cmd_diagnose(ex, args.quiet)
    except ForwardFailure as exc:
        print(f"forward solver failed: {exc}", file=sys.stderr)
        return EXIT_FORWARD
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RDIdentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
