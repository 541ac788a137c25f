"""Command-line entry point ``vecint``.

Exit codes: 0 success, 1 usage error, 2 infeasible or empty result,
3 budget exceeded.  Errors are written to stderr as ``{"error": ...}``.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import counterexamples as ce
from . import exactcount as ec
from . import kalai as ka
from . import maxent as me
from . import probkit as pk
from . import structures as st
from .io import (SchemaError, dumps, load_array, load_family, load_measure, parse_vector,
                 rows_to_csv)
from .measures import VectorArray

EXIT_OK, EXIT_USAGE, EXIT_EMPTY, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class EmptyResult(Exception):
    """Raised to report an infeasible or empty answer with exit code 2."""

    def __init__(self, payload: dict):
        super().__init__(payload.get("status", "empty"))
        self.payload = payload


BUDGET_ERRORS = (ec.StateBudgetExceeded, ec.FibreTooLarge, st.SearchBudgetExceeded,
                 st.VCBudgetExceeded, pk.DRCBudgetExhausted)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# handlers return (json-able payload, optional csv text)


def _count(a):
    V = load_array(a.array)
    fc = ec.count_fibre(V, parse_vector(a.target), marginals=a.marginals, state_budget=a.state_budget)
    out = {"count": str(fc.count), "log2_count": fc.log2_count}
    if a.marginals and fc.conditional_marginals is not None:
        out["marginals"] = [[str(x) for x in row] for row in fc.conditional_marginals]
    return out, rows_to_csv(["count", "log2_count"], [[out["count"], fc.log2_count]])


def _window(text):
    if not text:
        return None
    lo, _, hi = text.partition(";")
    return parse_vector(lo), parse_vector(hi)


def _paircount(a):
    V = load_array(a.array)
    hist = ec.pair_histogram(V, parse_vector(a.z), window=_window(a.window), include_diagonal=a.diagonal)
    out = {
        "fibre_size": str(hist.fibre_size),
        "total": str(hist.total()),
        "histogram": [{"target": list(k), "count": str(c)} for k, c in hist.rows()],
    }
    return out, hist.to_csv()


def _popular(a):
    V = load_array(a.array)
    try:
        target, count = ec.popular_intersection(V, parse_vector(a.z))
    except ec.EmptyHistogram as e:
        raise EmptyResult({"status": "empty", "detail": str(e)})
    out = {"target": list(target), "count": str(count)}
    if V.is_kalai():
        n = V.n
        z = parse_vector(a.z)
        alpha = (z[0] / n, z[1] / (n * (n - 1) / 2))
        try:
            b = ka.beta_star(*alpha)
            out["beta_star_prediction"] = [n * float(b[0]), n * (n - 1) / 2 * float(b[1])]
        except (ka.InversionFailed, ka.OutsideLambda, AssertionError):
            pass
    return out, None


def _ldp_scan(a):
    alpha = parse_vector(a.alpha, float)
    ns = parse_vector(a.n_list)

    def one(n):
        V = VectorArray.kalai(n)
        p = ec.ldp_deviation(V, ec.kalai_target(n, alpha), state_budget=a.state_budget)
        return {"n": n, "target": list(p.target), "count": str(p.count), "log2_count": p.log2_count,
                "entropy_bits": p.entropy_bits, "deviation": p.deviation, "deviation_per_n": p.deviation_per_n}

    with ThreadPoolExecutor(max_workers=max(1, a.threads)) as pool:
        rows = list(pool.map(one, ns))
    csv = rows_to_csv(["n", "k", "s", "count", "log2_count", "entropy_bits", "deviation", "deviation_per_n"],
                      [[r["n"], *r["target"], r["count"], r["log2_count"], r["entropy_bits"], r["deviation"],
                        r["deviation_per_n"]] for r in rows])
    return {"alpha": list(alpha), "rows": rows}, csv


def _solution_payload(sol: me.MaxEntSolution, with_measure: bool) -> dict:
    out = {"dual": sol.dual, "entropy_bits": sol.entropy_bits, "residual": sol.residual,
           "status": sol.status, "iterations": sol.iterations}
    if sol.measure is not None:
        out["min_entry"] = sol.min_entry()
        if with_measure:
            out["measure"] = sol.pair.q if sol.pair is not None else sol.measure.p
    return out


def _check_status(out):
    if out["status"] in (me.INFEASIBLE, me.EMPTY):
        raise EmptyResult(out)
    return out


def _maxent(a):
    if a.pair:
        return _pairmaxent(a)
    if a.hmax:
        return _hmax(a)
    if not a.target:
        raise UsageError("--target is required")
    V = load_array(a.array)
    sol = me.solve_maxent(V, parse_vector(a.target), tol=a.tol)
    return _check_status(_solution_payload(sol, a.measure)), None


def _pairmaxent(a):
    if not (a.z and a.w):
        raise UsageError("--z and --w are required")
    V = load_array(a.array)
    sol = me.solve_pair_maxent(V, parse_vector(a.z), parse_vector(a.w), tol=a.tol)
    return _check_status(_solution_payload(sol, a.measure)), None


def _hmax(a):
    if not (a.z and a.w):
        raise UsageError("--z and --w are required")
    V = load_array(a.array)
    base = me.solve_maxent(V, parse_vector(a.z))
    if not base.ok:
        raise EmptyResult({"status": base.status, "detail": "no max-entropy measure at z"})
    res = me.solve_hmax(base.measure, V, parse_vector(a.w), kappa=a.kappa, tol=a.tol)
    out = {"h_max_bits": res.h_max_bits, "status": res.status, "dual": res.dual, "residual": res.residual,
           "iterations": res.iterations, "entropy_p_bits": base.entropy_bits}
    if res.pair is not None and a.measure:
        out["measure"] = res.pair.q
    return _check_status(out), None


def _classify(a):
    verdict = ka.classify(parse_vector(a.g, float), tol=a.tol)
    return verdict.to_dict(), None


def _beta_star(a):
    al = parse_vector(a.alpha, float)
    if len(al) != 2:
        raise UsageError("--alpha needs two components")
    lam = ka.h_inverse(*al)
    b = ka.beta_star(*al)
    return {"alpha": list(al), "lambda": lam, "beta_star": b}, None


def _gamma_scan(a):
    rows = ka.gamma_scan(a.grid)
    csv = rows_to_csv(["alpha1", "alpha2", "beta1", "beta2"], rows.tolist())
    return {"rows": rows.tolist()}, csv


def _check(a):
    V = load_array(a.array)
    out = {}
    if a.generating:
        g, k = parse_vector(a.generating, float)
        rep = st.check_robust_generating(V, g, int(k), seed=a.seed)
        out["generating"] = rep
    if a.generic:
        g, gp = parse_vector(a.generic, float)
        out["generic"] = st.check_generic(V, g, gp, alphabet_form=a.alphabet_form)
    if a.vcdim:
        F = load_family(a.vcdim)
        out["vcdim"] = {"vc": st.vc_dim(F, J=V.J), "uvc": st.uvc_dim(F, J=V.J), "size": len(F)}
    if not out:
        raise UsageError("choose at least one of --generating, --generic, --vcdim")
    return out, None


def _vcdim(a):
    if a.pairs:
        F, rep = ce.vc_obstruction_family(a.pairs, a.k, a.t)
        return rep.to_dict(), None
    if not a.family:
        raise UsageError("--family or --pairs is required")
    F = load_family(a.family)
    return {"size": len(F), "vc": st.vc_dim(F, J=a.J), "uvc": st.uvc_dim(F, J=a.J)}, None


def _tail_payload(rep: pk.TailReport):
    return {"kind": rep.kind, "trials": rep.trials, "seed": rep.seed, "holds": rep.holds,
            "rows": [{"threshold": t, "empirical": e, "bound": b} for t, e, b in rep.rows()]}, rep.to_csv()


def _chernoff(a):
    V = load_array(a.array)
    mu = load_measure(a.measure, V.n)
    grid = parse_vector(a.t_grid, float) if a.t_grid else tuple(np.sqrt(V.n) * np.arange(0, 9) / 2)
    return _tail_payload(pk.vector_chernoff_check(V, mu, grid, trials=a.trials, seed=a.seed))


def _drc(a):
    if a.graph:
        B = np.asarray(json.load(open(a.graph)), dtype=bool)
    else:
        B = pk.random_bipartite(a.n1, a.n2, a.p, seed=a.seed)
    res = pk.dependent_random_choice(B, a.t, seed=a.seed, attempts=a.attempts)
    out = {"size": len(res.U), "U": list(res.U), "threshold": res.threshold, "target_size": res.target_size,
           "attempts": res.attempts, "sizes": list(res.sizes), "seed": res.seed, "verified": res.verify(B)}
    return out, None


def _contiguity(a):
    V = load_array(a.array)
    w = parse_vector(a.target)
    words = ec.fibre_matrix(V, w, cap=1 << 16)
    sol = me.solve_maxent(V, w)
    if not sol.ok or len(words) == 0:
        raise EmptyResult({"status": "empty", "detail": "fibre is empty or infeasible"})
    uniform = np.full(len(words), 1.0 / len(words))
    mu, nu = (uniform, sol.measure) if a.swap else (sol.measure, uniform)
    grid = parse_vector(a.eps_grid, float)
    rows = pk.contiguity_exponent(mu, nu, words, grid)
    csv = rows_to_csv(["eps", "mass", "exponent", "reverse_mass"],
                      [[r.eps, r.mass, r.exponent, r.reverse_mass] for r in rows])
    return {"fibre_size": len(words), "rows": rows}, csv


def _correlation(a):
    rng = np.random.default_rng(a.seed)
    rows, violations = [], 0
    for _ in range(a.instances):
        q = pk.random_bounded_pair_measure(a.n, a.kappa, rng)
        A1, A2 = pk.Subcube.random(a.n, rng), pk.Subcube.random(a.n, rng)
        rep = pk.correlation_check(q, A1, A2)
        violations += not rep.holds
        rows.append([float(rep.lhs), float(rep.rhs), rep.holds, *rep.exponents])
    csv = rows_to_csv(["lhs", "rhs", "holds", "exp_marginal", "exp_joint"], rows)
    return {"instances": a.instances, "violations": violations, "seed": a.seed, "n": a.n, "kappa": a.kappa}, csv


def _verify_ce1(a):
    return ce.build_and_verify_ce1(a.n, Fraction(a.zeta), kappa=a.kappa).to_dict(), None


def _verify_ce2(a):
    return ce.build_and_verify_ce2(a.n, Fraction(a.zeta), seed=a.seed, draws=a.draws).to_dict(), None


def _patterns(a):
    l, k = parse_vector(a.l), parse_vector(a.k)
    M = [list(parse_vector(r)) for r in a.M.split(";")]
    c = ec.pattern_count(l, k, M, cross_check=a.cross_check)
    return {"count": str(c), "cross_checked": a.cross_check}, None


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common(suppress: bool):
        c = _Parser(add_help=False)

        def d(v):
            return argparse.SUPPRESS if suppress else v

        c.add_argument("--seed", type=int, default=d(0))
        c.add_argument("--format", choices=("json", "csv"), default=d("json"))
        c.add_argument("--out", default=d(None))
        c.add_argument("--threads", type=int, default=d(1))
        c.add_argument("--state-budget", type=int, default=d(ec.DEFAULT_STATE_BUDGET))
        return c

    # global flags may appear before or after the subcommand
    p = _Parser(prog="vecint", description="Vector-valued intersection toolkit.", parents=[common(False)])
    sub_common = common(True)
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[sub_common])
        sp.set_defaults(fn=fn)
        return sp

    s = add("count", _count, "exact fibre size")
    s.add_argument("--array", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--marginals", action="store_true")

    s = add("paircount", _paircount, "pair-intersection histogram over a fibre")
    s.add_argument("--array", required=True)
    s.add_argument("--z", required=True)
    s.add_argument("--window", help="lo;hi, e.g. '0,0;5,40'")
    s.add_argument("--diagonal", action="store_true")

    s = add("popular", _popular, "most frequent intersection target")
    s.add_argument("--array", required=True)
    s.add_argument("--z", required=True)

    s = add("ldp-scan", _ldp_scan, "entropy minus log count along Kalai fibres")
    s.add_argument("--n-list", default="20,40,60,80")
    s.add_argument("--alpha", default="0.5,0.5")

    for name, fn in (("maxent", _maxent), ("pairmaxent", _pairmaxent), ("hmax", _hmax)):
        s = add(name, fn, f"{name} solver")
        s.add_argument("--array", required=True)
        s.add_argument("--target")
        s.add_argument("--z")
        s.add_argument("--w")
        s.add_argument("--tol", type=float, default=1e-8)
        s.add_argument("--kappa", type=float, default=0.0)
        s.add_argument("--measure", action="store_true", help="include the measure")
        s.add_argument("--pair", action="store_true")
        s.add_argument("--hmax", action="store_true")

    s = add("classify", _classify, "classify a Kalai quadruple")
    s.add_argument("--g", required=True)
    s.add_argument("--tol", type=float, default=ka.DEFAULT_TOL)

    s = add("beta-star", _beta_star, "popular-intersection densities")
    s.add_argument("--alpha", required=True)

    s = add("gamma-scan", _gamma_scan, "beta* over a grid")
    s.add_argument("--grid", type=float, default=0.02)

    s = add("check", _check, "structural hypotheses")
    s.add_argument("--array", required=True)
    s.add_argument("--generating")
    s.add_argument("--generic")
    s.add_argument("--alphabet-form", action="store_true")
    s.add_argument("--vcdim")

    s = add("vcdim", _vcdim, "VC and universal VC dimension")
    s.add_argument("--family")
    s.add_argument("--J", type=int)
    s.add_argument("--pairs", type=int, help="build the intersection pair family on [n]")
    s.add_argument("--k", type=int)
    s.add_argument("--t", type=int)

    s = add("chernoff", _chernoff, "vector Chernoff tail check")
    s.add_argument("--array", required=True)
    s.add_argument("--measure", default="uniform")
    s.add_argument("--t-grid")
    s.add_argument("--trials", type=int, default=100_000)

    s = add("drc", _drc, "dependent random choice")
    s.add_argument("--graph")
    s.add_argument("--n1", type=int, default=200)
    s.add_argument("--n2", type=int, default=200)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--t", type=int, default=4)
    s.add_argument("--attempts", type=int, default=32)

    s = add("contiguity", _contiguity, "contiguity table on a fibre")
    s.add_argument("--array", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--eps-grid", default="0.01,0.05,0.1,0.2,0.3")
    s.add_argument("--swap", action="store_true", help="exchange the roles of the two measures")

    s = add("correlation", _correlation, "Cauchy-Schwarz check on random subcubes")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--kappa", type=float, default=0.05)
    s.add_argument("--instances", type=int, default=1000)
    s.add_argument("--trials", type=int, dest="instances", default=argparse.SUPPRESS)

    s = add("verify-ce1", _verify_ce1, "first counterexample")
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--zeta", default="0.01")
    s.add_argument("--kappa", type=float)

    s = add("verify-ce2", _verify_ce2, "second counterexample")
    s.add_argument("--n", type=int, default=15)
    s.add_argument("--zeta", default="1/15")
    s.add_argument("--draws", type=int, default=64)

    s = add("patterns", _patterns, "intersection-pattern counts")
    s.add_argument("--l", required=True)
    s.add_argument("--k", required=True)
    s.add_argument("--M", required=True, help="rows separated by ';'")
    s.add_argument("--cross-check", action="store_true")
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _error(kind: str, message: str, code: int, extra=None) -> int:
    payload = {"error": kind, "message": message}
    if extra:
        payload["detail"] = extra
    sys.stderr.write(dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.cmd = getattr(args, "cmd", None)
        if not getattr(args, "fn", None):
            raise UsageError("a subcommand is required")
        payload, csv = args.fn(args)
    except UsageError as e:
        return _error("usage", str(e), EXIT_USAGE)
    except EmptyResult as e:
        _emit(dumps(e.payload), args.out)
        return _error("empty", str(e), EXIT_EMPTY)
    except BUDGET_ERRORS as e:
        return _error("budget", str(e), EXIT_BUDGET)
    except (SchemaError, ValueError, ka.OutsideLambda, ka.InversionFailed, OSError) as e:
        return _error(type(e).__name__, str(e), EXIT_USAGE)
    if args.format == "csv":
        if csv is None:
            return _error("usage", f"{args.cmd} has no CSV output", EXIT_USAGE)
        _emit(csv, args.out)
    else:
        _emit(dumps(payload), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
