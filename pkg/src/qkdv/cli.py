"""Command-line front end: qkdv root|flow|ham|bracket|miura|toda|limit|verify."""

from __future__ import annotations

import argparse
import json
import re
import sys

from .coeffs import use_field
from .grammar import ParseError, parse_generator, parse_operator, serialize_operator, serialize_poly
from .modering import PREFIX_FAMILY, NotTotalDifference
from .opalg import nth_root, op_pow
from . import hierarchy_kdv as hk
from . import miura_mkdv as mk
from . import poisson
from . import suites
from . import toda as td
from .hierarchy_kdv import CheckFailure, KdVState, lax_flow_operator, make_ring
from .suites import RunConfig


def _common(p):
    p.add_argument("--N", type=int, default=2, help="order of L (default 2)")
    p.add_argument("--window", type=int, default=2, help="point window M_pt (default 2)")
    p.add_argument("--M-expr", type=int, default=0, help="expression window (default: auto)")
    p.add_argument("--K", type=int, default=8, help="depth in D^-1 (default 8)")
    p.add_argument("--degcap", type=int, default=None, help="degree cap for Lambda-inverses (env QKDV_DEGCAP, default 3)")
    p.add_argument("--coeffs", choices=("exact", "numeric"), default="exact",
                   help="exact rational functions of q, or q specialised to q0")
    p.add_argument("--q0", default=None, help="q in numeric mode (env QKDV_Q0, default 3/2)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--no-timing", action="store_true", help="omit timings (byte-stable output)")


def build_parser():
    ap = argparse.ArgumentParser(prog="qkdv", description="Exact q-deformed KdV, mKdV and Toda computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("root", help="P = L^(1/N)")
    _common(p)
    p.add_argument("--operator", help="L as text, @file, or - for stdin (default: the generic L)")

    p = sub.add_parser("flow", help="right-hand sides of the n-th Lax flow")
    _common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--unreduced", action="store_true", help="keep t_N as a variable")
    p.add_argument("--operator", help="custom L as text, @file, or -: prints [L, (L^(n/N))_+]")

    p = sub.add_parser("ham", help="the hamiltonian H_n")
    _common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--construction", choices=("res", "cwf"), default="res")

    p = sub.add_parser("bracket", help="mode bracket of two generators")
    _common(p)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--which", type=int, choices=(1, 2), default=2, help="KdV bracket (t generators)")

    p = sub.add_parser("miura", help="t-images of L_i = (D - Lambda_i) ... ")
    _common(p)
    p.add_argument("--i", type=int, default=1)

    p = sub.add_parser("toda", help="the q-Toda equations")
    _common(p)
    p.add_argument("--mode", dest="toda_mode", choices=("affine", "finite", "sine-gordon"), default="affine")

    p = sub.add_parser("limit", help="classical limits")
    _common(p)
    p.add_argument("--target", choices=("virasoro", "heisenberg", "toda", "hamiltonians"), default="virasoro")

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("suite", choices=suites.SUITES + ("all",))
    return ap


def _config(args):
    kw = dict(N=args.N, M_pt=args.window, M_expr=args.M_expr, K=args.K, mode=args.coeffs,
              q0=args.q0, seed=args.seed, timing=not args.no_timing)
    if args.degcap is not None:
        kw["degcap"] = args.degcap
    return RunConfig(**kw)


def _operator_ring(text, cfg):
    """Ring over every family and component the text mentions (at least t_1..t_N)."""
    fams = {"T": cfg.N}
    for word, comp in re.findall(r"([a-z]+)(\d+)\s*[\[(]", text):
        fam = PREFIX_FAMILY.get(word)
        if fam is None:
            raise ParseError("unknown generator prefix %r" % word)
        fams[fam] = max(fams.get(fam, 0), int(comp))
    return make_ring(fams, cfg.window(), (), 0)


def _read_text(spec):
    if spec == "-":
        return sys.stdin.read()
    if spec.startswith("@"):
        with open(spec[1:]) as f:
            return f.read()
    return spec


# ---------------------------------------------------------------------------
# commands: each returns (lines, json payload, ok)
# ---------------------------------------------------------------------------

def cmd_root(args, cfg):
    S = KdVState(cfg.N, cfg.window())
    if args.operator:
        text = _read_text(args.operator)
        L = parse_operator(text, _operator_ring(text, cfg))
        top = L.top
        if top is None or top < 1:
            raise ValueError("L must have positive order")
        N = top
    else:
        L = S.L(S.ring())
        N = cfg.N
    P = nth_root(L, N, cfg.K)
    d = op_pow(P, N) - L
    ok = d.is_zero()
    text = serialize_operator(P)
    lines = ["L = %s" % serialize_operator(L), "P = L^(1/%d) = %s" % (N, text),
             "P^%d = L down to D^%d: %s" % (N, -cfg.K, "yes" if ok else "no")]
    return lines, {"L": serialize_operator(L), "P": text, "depth": cfg.K, "power_check": ok}, ok


def cmd_flow(args, cfg):
    if args.operator:
        text = _read_text(args.operator)
        L = parse_operator(text, _operator_ring(text, cfg))
        if L.top is None or L.top < 1:
            raise ValueError("L must have positive order")
        dL = lax_flow_operator(L, L.top, args.n, check=False)
        text = serialize_operator(dL)
        return ["[L, (L^(%d/%d))_+] = %s" % (args.n, L.top, text)], {"dL": text}, True
    S = KdVState(cfg.N, cfg.window(), reduced=not args.unreduced)
    fl = hk.qkdv_flow(S, args.n)
    lines, payload = [], {}
    for (fam, i), v in sorted(fl.items()):
        s = serialize_poly(v)
        lines.append("d t%d / d tau_%d = %s" % (i, args.n, s))
        payload["t%d" % i] = s
    ok = True
    if args.n == 1:
        closed = hk.qkdv1_formula(S)
        ok = all(closed[k] == fl[k] for k in fl)
        lines.append("closed form t_i (b(zq^(N-i)) - b(z)) + t_(i+1)(zq) - t_(i+1)(z): %s" % ("matches" if ok else "DIFFERS"))
        payload["closed_form_matches"] = ok
    return lines, payload, ok


def cmd_ham(args, cfg):
    S = KdVState(cfg.N, cfg.window())
    if args.construction == "res":
        H = hk.hamiltonian_res(S, args.n)
        s = serialize_poly(H.restrict(0))
        return ["H_%d = %s" % (args.n, s)], {"H": s, "n": args.n}, True
    r = hk.hamiltonian_cwf(S, args.n)
    h, g = serialize_poly(r.h), serialize_poly(r.witness)
    return (["h_%d = %s" % (args.n, h), "(1-D) g = h_%d - (1/%d) Res L^(%d/%d) with g = %s"
             % (args.n, args.n, args.n, cfg.N, g)], {"h": h, "g": g, "n": args.n}, True)


def cmd_bracket(args, cfg):
    a, b = parse_generator(args.left), parse_generator(args.right)
    if a.family != b.family:
        raise ValueError("both generators must be of one family")
    if a.family == "T":
        S = KdVState(cfg.N, cfg.window())
        K = hk.kernels(S, args.which)
        R = S.ring()
        label = "{%s, %s}_%d" % (a, b, args.which)
    elif a.family == "LAM":
        K = poisson.heisenberg(cfg.N)
        R = make_ring({"LAM": cfg.N}, cfg.window(), (), 0)
        label = "{%s, %s}" % (a, b)
    else:
        raise ValueError("brackets are defined for t and lam generators")
    for g in (a, b):
        if g not in R.index:
            raise ValueError("generator %s is outside the window or component range" % (g,))
    s = serialize_poly(poisson.mode_bracket(K, a, b, R))
    return ["%s = %s" % (label, s)], {"bracket": s}, True


def cmd_miura(args, cfg):
    S = mk.MKdVState(cfg.N, cfg.window())
    imgs = mk.t_images(S, S.ring(), args.i)
    lines, payload = [], {}
    for (fam, j), v in sorted(imgs.items()):
        s = serialize_poly(v)
        lines.append("t%d -> %s" % (j, s))
        payload["t%d" % j] = s
    return lines, payload, True


def cmd_toda(args, cfg):
    mode = args.toda_mode
    if mode == "sine-gordon":
        if cfg.N != 2:
            raise ValueError("sine-Gordon is the reduced N = 2 case")
        ctx = td.TodaContext(2, cfg.window(), reduced=True, degcap=cfg.degcap)
        td.check_sine_gordon(ctx)
        rhs, _, dens, _ = td.sine_gordon(ctx)
        lines = ["d Lambda = Q^-2 - Q(zq)^2 = %s" % rhs, "density Q Q(zq) + Q^-1 Q(zq)^-1 = %s" % dens,
                 "exact up to degree %d in the Lambda-inverses" % cfg.degcap]
        return lines, {"rhs": str(rhs), "density": str(dens), "degcap": cfg.degcap}, True
    ctx = td.TodaContext(cfg.N, cfg.window(), reduced=False, degcap=cfg.degcap)
    if mode == "affine":
        flow = td.check_hamiltonian_form(ctx)
    else:
        flow = td.screening_flow(ctx, range(1, cfg.N))
        td.check_product_constraint(ctx, flow)
    lines, payload = [], {}
    for i in sorted(flow):
        lines.append("d Lambda_%d = %s" % (i, flow[i]))
        payload["lam%d" % i] = str(flow[i])
    lines.append("exact up to degree %d in the Lambda-inverses" % cfg.degcap)
    payload["degcap"] = cfg.degcap
    return lines, payload, True


def cmd_limit(args, cfg):
    from . import limits as lm
    t = args.target
    if t == "virasoro":
        C = lm.check_virasoro(M=cfg.M_pt)
        lm.check_first_bracket_limit(M=cfg.M_pt)
        lines = ["{u[a], u[b]} = (a - b) u[a+b] + C (a^3/2) delta_(a+b,0) with C = %s" % C,
                 "{t[a], t[b]}_1 = 2 h a delta_(a+b,0) + O(h^2)"]
        return lines, {"C": str(C)}, True
    if t == "heisenberg":
        C = lm.probe_constant()
        lm.check_heisenberg(cfg.N, M=cfg.M_pt, C=C)
        return (["{v_i[a], v_j[b]} = C a delta_(a+b,0) * (-(N-1)/N if i = j else 1/N), C = %s" % C],
                {"C": str(C)}, True)
    if t == "toda":
        got = lm.check_toda_limit(cfg.N, M=cfg.M_pt)
        lines = ["h^1 part of A_%d(zq) - Lambda_%d Lambda_%d^-1 A_%d: %s" % (i, (i - 2) % cfg.N + 1, i, i, got[i])
                 for i in sorted(got)]
        lines.append("= mode form of d a_i - (v_i - v_(i-1)) a_i")
        return lines, {"a%d" % i: str(v) for i, v in got.items()}, True
    r = lm.check_hamiltonian_orders((1, 2, 3), M=cfg.M_pt)
    lines, payload = [], {}
    for n, v in r.items():
        if v.order is None:
            lines.append("H_%d = %s (constant)" % (n, v.constant))
        else:
            lines.append("H_%d = %s + h^%d (%s) + ..." % (n, v.constant, v.order, v.leading))
        payload["H%d" % n] = {"constant": str(v.constant), "order": v.order, "leading": str(v.leading)}
    return lines, payload, True


COMMANDS = {"root": cmd_root, "flow": cmd_flow, "ham": cmd_ham, "bracket": cmd_bracket,
            "miura": cmd_miura, "toda": cmd_toda, "limit": cmd_limit}


def report_json(suite, cfg, results):
    return {"suite": suite, "config": cfg.describe(),
            "checks": [r.as_json(cfg.timing) for r in results],
            "pass": all(r.status == "pass" for r in results)}


def report_text(suite, cfg, results):
    desc = ", ".join("%s=%s" % kv for kv in cfg.describe().items())
    lines = ["suite %s (%s)" % (suite, desc)]
    for r in results:
        line = "%-5s %s  [%s]" % (r.status.upper(), r.name, r.anchor)
        if cfg.timing:
            line += "  %d ms" % r.ms
        lines.append(line)
        if r.status != "pass":
            lines.append("      witness: %s" % r.witness)
        if r.detail and r.detail != r.witness:
            lines.append("      %s" % r.detail)
    n = sum(r.status == "pass" for r in results)
    lines.append("%d/%d checks passed" % (n, len(results)))
    return lines


def run(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ValueError as e:
        print("qkdv: %s" % e, file=sys.stderr)
        return 2
    if args.command == "verify":
        with use_field(cfg.field()):
            results = [suites.run_check(c) for c in suites.build(args.suite, cfg)]
        ok = all(r.status == "pass" for r in results)
        if args.format == "json":
            out.write(json.dumps(report_json(args.suite, cfg, results), indent=2) + "\n")
        else:
            out.write("\n".join(report_text(args.suite, cfg, results)) + "\n")
        return 0 if ok else 1
    try:
        with use_field(cfg.field()):
            lines, payload, ok = COMMANDS[args.command](args, cfg)
    except (CheckFailure, NotTotalDifference) as e:
        print("qkdv: check failed: %s" % e, file=sys.stderr)
        return 1
    except (ParseError, ValueError, KeyError) as e:
        print("qkdv: %s" % e, file=sys.stderr)
        return 2
    if args.format == "json":
        out.write(json.dumps({"command": args.command, "config": cfg.describe(), "result": payload,
                              "pass": ok}, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return 0 if ok else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
