"""Command line front end.

Exit codes: 0 success, 1 verification failed, 2 bad input, 3 resource cap
exceeded, 4 internal consistency check violated.
"""

import argparse
import csv
import io
import json
import sys

from .ac_framework import verify_construction
from .channels import ChannelModel, NoisyAuthResource, converse_channels, derive_seed
from .coding import (
    DEFAULT_ENUM_CAP,
    Codebook,
    RadiusDecoder,
    TypicalSetDecoder,
    analytic_pfa_bound,
    converse_demo_code,
    default_delta,
    exact_pde,
    exact_pfa,
    gen_random_codebook,
    is_enumerable,
    mc_pde,
    mc_pfa_heuristic,
)
from .estimators import TypicalSetAuthenticator
from .exceptions import DomainError, ResourceLimitError, UsageError
from .info_theory import (
    achievable_rate_bsc,
    achievable_rate_dmc,
    binary_entropy,
    is_weakly_symmetric,
    weakly_symmetric_capacity,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP, EXIT_INVARIANT = 0, 1, 2, 3, 4

CSV_FIELDS = [
    "schema", "n", "k", "p", "q", "delta", "p_de", "p_de_lo", "p_de_hi",
    "p_fa", "method", "seed", "p_fa_lo", "p_fa_hi", "trials",
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(args, text):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _csv_single(doc):
    """One-row CSV for a flat report; list values are space-joined."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(doc))
    row = []
    for value in doc.values():
        if isinstance(value, list):
            value = " ".join(_fmt(v) for v in value)
        row.append(_fmt(value))
    writer.writerow(row)
    return buf.getvalue()


# -- rate ----------------------------------------------------------------------------


def cmd_rate(args):
    if args.P or args.Q:
        if not (args.P and args.Q):
            raise UsageError("--P and --Q must be given together")
        P = ChannelModel.from_json(args.P).matrix
        Q = ChannelModel.from_json(args.Q).matrix
        value, px = achievable_rate_dmc(P, Q, args.grid)
        doc = {"schema": 1, "rate": value, "px": [float(v) for v in px]}
        ws = is_weakly_symmetric(P) and is_weakly_symmetric(Q)
        doc["weakly_symmetric"] = ws
        if ws:
            cap_a = weakly_symmetric_capacity(P)
            cap_e = weakly_symmetric_capacity(Q)
            doc["C_AB"] = cap_a
            doc["C_EB"] = cap_e
            doc["C_AB_minus_C_EB"] = cap_a - cap_e
    else:
        if args.p is None or args.q is None:
            raise UsageError("rate needs --p and --q, or --P and --Q")
        doc = {"schema": 1, "rate": achievable_rate_bsc(args.p, args.q)}
    _emit(args, _dump_json(doc) if args.format == "json" else _csv_single(doc))
    return EXIT_OK


# -- simulate ------------------------------------------------------------------------------


def _row(n, k, p, q, delta, seed, method, de=None, fa=None, trials=None):
    return {
        "schema": 1, "n": n, "k": k, "p": p, "q": q, "delta": delta,
        "p_de": None if de is None else de[0],
        "p_de_lo": None if de is None or de[1] is None else de[1][0],
        "p_de_hi": None if de is None or de[1] is None else de[1][1],
        "p_fa": None if fa is None else fa[0],
        "method": method, "seed": seed,
        "p_fa_lo": None if fa is None or fa[1] is None else fa[1][0],
        "p_fa_hi": None if fa is None or fa[1] is None else fa[1][1],
        "trials": trials,
    }


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def simulate_rows(n, k, p, q, delta, trials, seed, n_codebooks, prune=False,
                  enum_cap=DEFAULT_ENUM_CAP, codebook=None, save_codebook=None):
    """Report rows for one codeword length; exact rows are used whenever enumeration fits."""
    alice, eve = ChannelModel.bsc(p), ChannelModel.bsc(q)
    n_seed = derive_seed(seed, n)
    if codebook is None:
        est = TypicalSetAuthenticator(
            n=n, k=k, p=p, q=q, delta=delta, n_candidates=n_codebooks, prune=prune,
            selection_trials=max(1, min(trials, 10000)) if trials else 1000,
            enum_cap=enum_cap, random_state=n_seed,
        ).fit()
        cb = est.codebook_
    else:
        cb = codebook
        n, k = cb.n, cb.k
    delta_used = getattr(cb.decoder, "delta", delta)
    if save_codebook:
        cb.save(save_codebook.format(n=n))
    rows = []
    if is_enumerable(cb, eve, enum_cap):
        de = exact_pde(cb, alice, enum_cap)
        fa = exact_pfa(cb, eve, enum_cap)
        rows.append(_row(n, k, p, q, delta_used, seed, "Exact", (de.p_de, None), (fa.p_fa, None)))
    if trials:
        de = mc_pde(cb, alice, trials, derive_seed(n_seed, 1))
        rows.append(_row(n, k, p, q, delta_used, seed, "MonteCarlo", (de.p_de, de.ci_de), None, trials))
        fa = mc_pfa_heuristic(cb, eve, trials=trials, seed=derive_seed(n_seed, 2), alice=alice, enum_cap=enum_cap)
        rows.append(_row(n, k, p, q, delta_used, seed, "HeuristicLB", None, (fa.p_fa, fa.ci_fa), trials))
    if delta_used is not None:
        ub = analytic_pfa_bound(cb, q, delta_used, enum_cap)
        rows.append(_row(n, k, p, q, delta_used, seed, "AnalyticUB", None, (ub, None)))
    return rows


def cmd_simulate(args):
    codebook = Codebook.load(args.codebook) if args.codebook else None
    ns = [codebook.n] if codebook is not None else args.n
    if not ns:
        raise UsageError("simulate needs --n or --codebook")
    if codebook is None and args.k is None:
        raise UsageError("simulate needs --k")
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    rows = []
    for n in ns:
        rows.extend(
            simulate_rows(
                n, args.k, args.p, args.q, args.delta, args.trials, args.seed, args.codebooks,
                prune=args.prune, enum_cap=args.enum_cap, codebook=codebook,
                save_codebook=args.save_codebook,
            )
        )
    if args.format == "json":
        text = _dump_json({"schema": 1, "rows": rows})
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in rows:
            writer.writerow([_fmt(r[f]) for f in CSV_FIELDS])
        text = buf.getvalue()
    _emit(args, text)
    return EXIT_OK


# -- verify ----------------------------------------------------------------------------


def cmd_verify(args):
    if args.codebook:
        cb = Codebook.load(args.codebook)
    else:
        if args.n is None or args.k is None:
            raise UsageError("verify needs --n and --k, or --codebook")
        n = args.n[0]
        if args.radius is not None:
            dec = RadiusDecoder(args.radius)
        else:
            delta = args.delta if args.delta is not None else default_delta(args.p, args.q, args.k / n)
            dec = TypicalSetDecoder(args.p, delta)
        cb = gen_random_codebook(n, args.k, derive_seed(args.seed, n), dec)
    resource = NoisyAuthResource(cb.n, ChannelModel.bsc(args.p), ChannelModel.bsc(args.q), args.block)
    report = verify_construction(cb, resource, args.eps, args.enum_cap)
    doc = report.to_dict()
    _emit(args, _dump_json(doc) if args.format == "json" else _csv_single(doc))
    if not report.equalities_hold:
        return EXIT_INVARIANT
    return EXIT_OK if report.passed else EXIT_FAIL


# -- converse demo -----------------------------------------------------------------------


def cmd_converse_demo(args):
    n, k, p = args.n[0], args.k, args.p
    P, Q = converse_channels(p)
    bound, _ = achievable_rate_dmc(P.matrix, Q.matrix, args.grid)
    cb = converse_demo_code(n, k, p, seed=args.seed)
    de = exact_pde(cb, P, args.enum_cap)
    fa = exact_pfa(cb, Q, args.enum_cap)
    doc = {
        "schema": 1,
        "n": n,
        "k": k,
        "p": p,
        "rate": k / n,
        "rate_bound": bound,
        "minus_h_p": -binary_entropy(p),
        "bsc_capacity": 1 - binary_entropy(p),
        "rate_exceeds_bound": k / n > bound,
        "p_de": de.p_de,
        "p_fa": fa.p_fa,
    }
    _emit(args, _dump_json(doc) if args.format == "json" else _csv_single(doc))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="noisy-auth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt_default):
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--enum-cap", dest="enum_cap", type=int, default=DEFAULT_ENUM_CAP)
        sp.add_argument("--grid", type=int, default=None, help="simplex grid resolution")

    sp = sub.add_parser("rate", help="achievable authenticated rate")
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--P", help="Alice->Bob channel JSON")
    sp.add_argument("--Q", help="Eve->Bob channel JSON")
    common(sp, "csv")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("simulate", help="codebook error rates (CSV rows)")
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--k", type=int)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--codebooks", type=int, default=1, help="seeded candidates; the best is kept")
    sp.add_argument("--prune", action="store_true", help="draw 2^(k+1) codewords and keep the best half")
    sp.add_argument("--codebook", help="evaluate this saved codebook instead of drawing one")
    sp.add_argument("--save-codebook", dest="save_codebook", help="path template, may contain {n}")
    common(sp, "csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="check the construction against the ideal channel")
    sp.add_argument("--n", type=int, nargs=1)
    sp.add_argument("--k", type=int)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--radius", type=int, help="bounded-distance decoding instead of typical-set")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--block", action="store_true", help="give Eve the blocking bit")
    sp.add_argument("--codebook", help="saved codebook JSON")
    common(sp, "json")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("converse-demo", help="disjoint-alphabet example")
    sp.add_argument("--n", type=int, nargs=1, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    common(sp, "json")
    sp.set_defaults(func=cmd_converse_demo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ResourceLimitError, MemoryError) as exc:
        print(f"noisy-auth: resource limit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"noisy-auth: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
