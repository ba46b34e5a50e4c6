"""Command-line interface: ``tddyn {game,rm,wf,intro,verify} ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import game as game_mod
from . import introspection as intro
from . import replicator as rm
from . import wright_fisher as wf
from .output import run_metadata, write_csv, write_heatmap_svg, write_table
from .sweep import RNG_ALGORITHM
from .verification import run_battery

# execution details that must not leak into the config echo
_NOT_CONFIG = {"func", "threads", "out", "svg", "stamp", "command", "action"}


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="base RNG seed (default 0)")
    parser.add_argument("--threads", type=int, default=d(1), help="worker processes for sweeps")
    parser.add_argument("--out", default=d(None), help="output CSV (default: stdout)")
    parser.add_argument("--svg", default=d(None), help="heatmap output for sweeps")
    parser.add_argument(
        "--stamp", action="store_true", default=d(False),
        help="record wall-clock time in the metadata (breaks byte-identical reruns)",
    )


def _game_args(parser, reward=True):
    parser.add_argument("--L", type=int, default=2, help="lowest claim")
    parser.add_argument("--U", type=int, default=100, help="highest claim")
    if reward:
        parser.add_argument("--R", type=int, default=2, help="reward parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tddyn", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name, func, help):
        p = group.add_parser(name, help=help)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    g = sub.add_parser("game", help="payoff matrix and classical analysis").add_subparsers(
        dest="action", required=True
    )
    p = leaf(g, "matrix", cmd_game_matrix, "write the payoff matrix")
    _game_args(p)
    p = leaf(g, "classify", cmd_game_classify, "classify every embedded 2x2 game")
    _game_args(p)
    p = leaf(g, "eliminate", cmd_game_eliminate, "iterated elimination of dominated claims")
    _game_args(p)
    p.add_argument("--criterion", choices=["weak", "strict"], default="weak")

    r = sub.add_parser("rm", help="replicator-mutator equation").add_subparsers(
        dest="action", required=True
    )
    p = leaf(r, "run", cmd_rm_run, "integrate one trajectory")
    _game_args(p)
    p.add_argument("--q", type=float, default=0.0, help="mutation strength")
    _rm_numeric(p)
    p = leaf(r, "sweep", cmd_rm_sweep, "highest-frequency claim over an (R, q) grid")
    _game_args(p, reward=False)
    p.add_argument("--R-list", type=_int_list, required=True, dest="R_list")
    p.add_argument("--q-list", type=_float_list, required=True, dest="q_list")
    _rm_numeric(p)

    w = sub.add_parser("wf", help="Wright-Fisher process").add_subparsers(
        dest="action", required=True
    )
    p = leaf(w, "run", cmd_wf_run, "one Wright-Fisher run")
    _game_args(p)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    _wf_numeric(p)
    p = leaf(w, "sweep", cmd_wf_sweep, "terminal mean claim over a (rho, mu, delta) grid")
    _game_args(p)
    p.add_argument("--mu-list", type=_float_list, required=True, dest="mu_list")
    p.add_argument("--delta-list", type=_int_list, required=True, dest="delta_list")
    p.add_argument("--rho-list", type=_float_list, required=True, dest="rho_list")
    p.add_argument("--reps", type=int, default=20)
    _wf_numeric(p)

    i = sub.add_parser("intro", help="introspection dynamics").add_subparsers(
        dest="action", required=True
    )
    p = leaf(i, "sim", cmd_intro_sim, "simulate the stochastic dynamics")
    _game_args(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=0, dest="burn_in")
    p.add_argument("--every", type=int, default=1, help="write every k-th step of the trace")
    p = leaf(i, "exact", cmd_intro_exact, "exact stationary distribution")
    _game_args(p)
    p.add_argument("--beta", type=float, required=True)
    p = leaf(i, "sweep", cmd_intro_sweep, "exact average claim over an (R, beta) grid")
    _game_args(p, reward=False)
    p.add_argument("--R-list", type=_int_list, required=True, dest="R_list")
    p.add_argument("--beta-list", type=_float_list, required=True, dest="beta_list")

    p = sub.add_parser("verify", help="run the brute-force oracle battery")
    _common(p, suppress=True)
    p.set_defaults(func=cmd_verify)
    return parser


def _rm_numeric(p):
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--tmax", type=float, default=10_000.0)
    p.add_argument("--conv-tol", type=float, default=1e-10, dest="conv_tol")
    p.add_argument("--sample-every", type=int, default=100, dest="sample_every")


def _wf_numeric(p):
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--t", type=int, default=1000, help="generations")
    p.add_argument("--init", default="uniform", help="'uniform' or a single starting claim")


def _params(args, reward=None) -> game_mod.GameParams:
    R = args.R if reward is None else reward
    if not 0 <= args.L < args.U:
        raise UsageError(f"argument --L/--U: need 0 <= L < U, got L={args.L}, U={args.U}")
    if R <= 1:
        raise UsageError(f"argument --R: reward must be > 1, got {R}")
    return game_mod.GameParams(args.L, args.U, R)


def _check_q(qs, m, flag):
    bound = (m - 1) / m
    for q in qs:
        if not 0 <= q <= bound + 1e-15:
            raise UsageError(
                f"argument {flag}: q={q} outside [0, (m-1)/m] = [0, {bound:.6g}] for m={m}"
            )


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG} | {
        "command": f"{args.command} {getattr(args, 'action', '') or ''}".strip()
    }


def _meta(args, extra=None, seed=None) -> dict:
    meta = run_metadata(_config(args), seed, stamp=args.stamp)
    meta.update(extra or {})
    return meta


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)


# -- game ------------------------------------------------------------------

def cmd_game_matrix(args) -> int:
    params = _params(args)
    matrix = game_mod.build_payoff_matrix(params)
    claims = params.claims.tolist()
    rows = ([c] + matrix[i].tolist() for i, c in enumerate(claims))
    text = write_table(args.out, ["own\\other"] + claims, rows, _meta(args))
    _emit(text, args.out)
    return 0


def cmd_game_classify(args) -> int:
    params = _params(args)
    lines = []
    for n in range(params.lower, params.upper):
        for s in range(1, params.upper - n + 1):
            c = game_mod.classify_subgame(n, s, params)
            line = f"n={n} s={s} {c.kind.value}"
            if c.kind is game_mod.SubgameKind.COORDINATION:
                line += (
                    f" payoff_dominant={str(c.high_equilibrium_payoff_dominant).lower()}"
                    f" risk_dominant={str(c.high_equilibrium_risk_dominant).lower()}"
                )
            lines.append(line)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_game_eliminate(args) -> int:
    params = _params(args)
    survivors = sorted(game_mod.iterated_elimination(params, args.criterion))
    print(" ".join(map(str, survivors)))
    return 0


# -- replicator-mutator ----------------------------------------------------

def _rm_config(args, params, q):
    try:
        return rm.RMConfig(
            game=params, q=q, dt=args.dt, t_max=args.tmax,
            conv_tol=args.conv_tol, sample_every=args.sample_every,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_rm_run(args) -> int:
    params = _params(args)
    _check_q([args.q], params.n_claims, "--q")
    cfg = _rm_config(args, params, args.q)
    traj = rm.integrate(cfg)
    columns = ["t"] + [f"claim_{c}" for c in params.claims]
    rows = ([t] + x.tolist() for t, x in zip(traj.times.tolist(), traj.states))
    meta = _meta(args, {"payoff_shift": traj.shift, "initial_state": "uniform"})
    text = write_table(args.out, columns, rows, meta)
    _emit(text, args.out)
    best = rm.highest_frequency_claim(traj.terminal, params)
    print(
        f"highest_claim={best} converged={str(traj.converged).lower()} t={traj.t_final:g}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    return 0


def cmd_rm_sweep(args) -> int:
    if not args.R_list or not args.q_list:
        raise UsageError("argument --R-list/--q-list: lists must be non-empty")
    for R in args.R_list:
        _params(args, reward=R)
    params = _params(args, reward=args.R_list[0])
    _check_q(args.q_list, params.n_claims, "--q-list")
    cfg = _rm_config(args, params, 0.0)
    result = rm.sweep_rm(args.R_list, args.q_list, cfg, threads=args.threads)
    result.metadata = _meta(args, result.metadata)
    return _finish_sweep(args, result, "R", "q", "highest_claim", params, "Highest frequency claim")


# -- Wright-Fisher ---------------------------------------------------------

def _init_rule(args):
    if args.init == "uniform":
        return "uniform"
    try:
        return int(args.init)
    except ValueError:
        raise UsageError(f"argument --init: expected 'uniform' or an integer claim, got {args.init!r}")


def _wf_config(args, params, **kw):
    try:
        return wf.WFConfig(
            game=params, N=args.N, generations=args.t, seed=args.seed, init=_init_rule(args), **kw
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_wf_run(args) -> int:
    params = _params(args)
    cfg = _wf_config(args, params, mu=args.mu, delta=args.delta, rho=args.rho)
    res = wf.run_wf(cfg)
    rows = ([g, m] for g, m in enumerate(res.mean_claims.tolist()))
    meta = _meta(args, {"rng": RNG_ALGORITHM.split(";")[0]}, seed=args.seed)
    text = write_table(args.out, ["generation", "mean_claim"], rows, meta)
    _emit(text, args.out)
    return 0


def cmd_wf_sweep(args) -> int:
    params = _params(args)
    if args.reps < 1:
        raise UsageError(f"argument --reps: must be >= 1, got {args.reps}")
    for mu in args.mu_list:
        if not 0 <= mu <= 1:
            raise UsageError(f"argument --mu-list: mu={mu} outside [0, 1]")
    for d in args.delta_list:
        if d < 1:
            raise UsageError(f"argument --delta-list: delta={d} must be >= 1")
    for rho in args.rho_list:
        if rho < 0:
            raise UsageError(f"argument --rho-list: rho={rho} must be >= 0")
    cfg = _wf_config(args, params)
    result = wf.sweep_wf(args.mu_list, args.delta_list, args.rho_list, args.reps, cfg, threads=args.threads)
    result.metadata = _meta(args, result.metadata, seed=args.seed)
    _emit(write_csv(result, args.out), args.out)
    if args.svg:
        rhos = sorted(set(args.rho_list))
        for rho in rhos:
            path = Path(args.svg)
            if len(rhos) > 1:
                path = path.with_name(f"{path.stem}_rho{rho:g}{path.suffix}")
            write_heatmap_svg(
                result, "mu", "delta", "mean_claim", path, (params.lower, params.upper),
                title=f"Mean claim, rho={rho:g}", where={"rho": rho},
            )
    return 1 if result.failed else 0


# -- introspection ---------------------------------------------------------

def _check_beta(beta, flag):
    if not (beta >= 0 and np.isfinite(beta)):
        raise UsageError(f"argument {flag}: beta must be finite and >= 0, got {beta}")


def cmd_intro_sim(args) -> int:
    params = _params(args)
    _check_beta(args.beta, "--beta")
    if args.every < 1:
        raise UsageError("argument --every: must be >= 1")
    try:
        cfg = intro.IntroConfig(
            game=params, beta=args.beta, steps=args.steps, burn_in=args.burn_in, seed=args.seed
        )
    except ValueError as exc:
        raise UsageError(f"argument --steps/--burn-in: {exc}")
    run = intro.run_intro(cfg)
    idx = np.arange(0, cfg.steps + 1, args.every)
    rows = ([int(s), int(a), int(b)] for s, (a, b) in zip(idx, run.trace[idx]))
    meta = _meta(args, {"rng": RNG_ALGORITHM.split(";")[0]}, seed=args.seed)
    text = write_table(args.out, ["step", "claim_a", "claim_b"], rows, meta)
    _emit(text, args.out)
    print(
        f"average_claim={run.average_claim:.17g}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    return 0


def cmd_intro_exact(args) -> int:
    params = _params(args)
    _check_beta(args.beta, "--beta")
    dist = intro.stationary_distribution(intro.build_transition(params, args.beta))
    P = dist.matrix
    claims = params.claims.tolist()
    rows = ([a, b, float(P[i, j])] for i, a in enumerate(claims) for j, b in enumerate(claims))
    text = write_table(args.out, ["claim_a", "claim_b", "probability"], rows, _meta(args))
    _emit(text, args.out)
    print(
        f"average_claim={intro.average_claim(dist):.17g} residual={dist.residual:.3e}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    return 0


def cmd_intro_sweep(args) -> int:
    if not args.R_list or not args.beta_list:
        raise UsageError("argument --R-list/--beta-list: lists must be non-empty")
    for R in args.R_list:
        _params(args, reward=R)
    for beta in args.beta_list:
        _check_beta(beta, "--beta-list")
    params = _params(args, reward=args.R_list[0])
    result = intro.sweep_intro(args.R_list, args.beta_list, params, threads=args.threads)
    result.metadata = _meta(args, result.metadata)
    return _finish_sweep(args, result, "R", "beta", "average_claim", params, "Average claim")


def _finish_sweep(args, result, x, y, z, params, title) -> int:
    text = write_csv(result, args.out)
    _emit(text, args.out)
    if args.svg:
        write_heatmap_svg(result, x, y, z, args.svg, (params.lower, params.upper), title=title)
    for row in result.failed:
        print(f"row failed: {row}", file=sys.stderr)
    return 1 if result.failed else 0


# -- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    reports = run_battery()
    for report in reports:
        print(report)
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} oracle checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        where = exc.filename or getattr(args, "out", None)
        print(f"tddyn: error: I/O failure on {where}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except (rm.IntegrationError, intro.ConvergenceError, game_mod.DomainError, ValueError) as exc:
        print(f"tddyn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
