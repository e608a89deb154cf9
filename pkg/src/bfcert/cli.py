"""Command-line front end: ``bf-cert <command> ...``.

Tables are written as CSV preceded by ``# key: value`` lines recording the
tool version, the resolved arguments and the code fingerprint.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .bounds import (capability, chilappagari_bound, dfr_bound, dfr_bound_girth6_regular,
                     dfr_bound_qc, dfr_bound_regular_odd, optimize_threshold)
from .codes import (QC2, ParityCheckMatrix, array_shifts, build_monomial, build_qc2,
                    distinct_row_profiles, girth, load_spec, matrix_to_spec, max_gamma,
                    random_monomial_girth6, random_qc2_girth6, syndrome)
from .decoder import BfConfig, bf_decode
from .errors import BfCertError, ConfigError
from .keysearch import OPTIMIZE, KeygenPolicy, acceptance_rate_experiment, rejection_sample_key
from .montecarlo import TrialPlan, default_workers, estimate_dfr
from .subset import CountStats, compress, count_exceeding

log = logging.getLogger("bfcert")

METHODS = ("auto", "th4", "th4bis", "th5", "qc")
TABLE_GIRTHS = (4, 6, 8, 10)


# parsing helpers ---------------------------------------------------------------

def parse_range(text: str) -> list[int]:
    """``"7"``, ``"6..12"``, ``"6-12"`` or ``"5,7,9"`` (pieces may be combined with commas)."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        for sep in ("..", "-"):
            if sep in piece[1:]:
                lo, hi = piece.split(sep, 1)
                out.extend(range(int(lo), int(hi) + 1))
                break
        else:
            out.append(int(piece))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def parse_error(text: str, n: int) -> np.ndarray:
    """Error vector from ``0x...`` hex (bit ``i`` is column ``i``) or comma-separated indices."""
    e = np.zeros(n, dtype=np.uint8)
    text = text.strip()
    if text.lower().startswith("0x"):
        value = int(text, 16)
        if value.bit_length() > n:
            raise ConfigError(f"hex error pattern is wider than n = {n}")
        idx = [i for i in range(value.bit_length()) if value >> i & 1]
    else:
        idx = [int(x) for x in text.split(",") if x.strip()]
    for i in idx:
        if not 0 <= i < n:
            raise ConfigError(f"error position {i} outside [0, {n - 1}]")
        e[i] ^= 1
    return e


def parse_thresholds(text: str, H: ParityCheckMatrix):
    """Integer threshold, or a file of per-bit thresholds (whitespace or comma separated)."""
    try:
        return int(text)
    except ValueError:
        pass
    values = Path(text).read_text().replace(",", " ").split()
    b = tuple(int(x) for x in values)
    if len(b) != H.n:
        raise ConfigError(f"{len(b)} thresholds in {text}, expected {H.n}")
    return b


# output helpers ----------------------------------------------------------------

def metadata(args: argparse.Namespace, H: ParityCheckMatrix | None = None) -> dict:
    meta = {"tool": f"bf-cert {__version__}", "command": args.command}
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func", "verbose") or value is None:
            continue
        meta[key] = value
    if H is not None:
        meta["code"] = H.name or "-"
        meta["code_fingerprint"] = H.fingerprint
        meta["n"], meta["r"] = H.n, H.r
    return meta


def write_csv(path: str | None, meta: dict, fields: list[str], rows: Iterable[dict]) -> None:
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        for key, value in meta.items():
            out.write(f"# {key}: {value}\n")
        writer = csv.DictWriter(out, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()


def read_csv(path: str | Path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: metadata and rows (values left as strings)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif line:
            body.append(line)
    return meta, list(csv.DictReader(body))


def _fmt(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return f"{value:.6g}"
    return value


# bound method selection ---------------------------------------------------------

def resolve_method(H: ParityCheckMatrix, method: str, b) -> str:
    """Pick the cheapest applicable method for ``auto``; refuse inapplicable explicit ones."""
    regular_odd = H.is_regular and H.v_star % 2 == 1
    half = (H.v_star + 1) // 2
    if method == "auto":
        if isinstance(H.structure, QC2) and isinstance(b, int):
            return "qc"
        return "th4"
    if method == "qc" and not isinstance(H.structure, QC2):
        raise ConfigError("method qc needs a two-circulant code")
    if method in ("th4bis", "th5"):
        if not regular_odd or b != half:
            raise ConfigError(f"method {method} needs a regular odd-v code and b = {half}")
        if method == "th5" and max_gamma(H) > 1:
            raise ConfigError("method th5 needs a code without 4-cycles")
    return method


def compute_bound(H: ParityCheckMatrix, profiles, t: int, b, method: str, cache: dict):
    if method == "qc":
        return dfr_bound_qc(H, t, b)
    if method == "th4bis":
        return dfr_bound_regular_odd(profiles, H.v_star, t)
    if method == "th5":
        return dfr_bound_girth6_regular(H.n, H.v_star, H.w_max, t)
    return dfr_bound(profiles, t, b, cache=cache)


# commands ---------------------------------------------------------------------------

def cmd_code_build(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.type == "qc2":
        if args.supports:
            S0, S1 = (parse_range(s) for s in args.supports.split(";"))
        else:
            S0, S1 = random_qc2_girth6(args.p, args.v, rng)
        H = build_qc2(args.p, S0, S1, name=args.name)
    else:
        if args.w is None:
            raise ConfigError("monomial codes need --w")
        if args.array:
            shifts = array_shifts(args.p, args.v, args.w)
        else:
            shifts = random_monomial_girth6(args.p, args.v, args.w, rng)
        H = build_monomial(args.p, shifts, name=args.name)
    doc = matrix_to_spec(H)
    text = json.dumps(doc)
    if args.out in (None, "-"):
        print(text)
    else:
        Path(args.out).write_text(text + "\n")
        print(json.dumps(H.summary()))
    return 0


def cmd_code_info(args) -> int:
    H = load_spec(args.spec)
    info = H.summary()
    info["girth"] = girth(H, args.girth_cutoff) or f">{args.girth_cutoff}"
    profiles = distinct_row_profiles(H)
    cap = capability(H, profiles)
    info.update(delta=cap.delta, t_majority=cap.t_majority, t_mu=cap.t_mu,
                threshold_range={t: list(r) for t, r in cap.threshold_range.items()
                                 if t >= cap.t_mu - 2})
    if cap.notes:
        info["notes"] = cap.notes
    print(json.dumps(info, indent=2))
    return 0


def cmd_decode(args) -> int:
    H = load_spec(args.spec)
    e = parse_error(args.error, H.n)
    cfg = BfConfig(parse_thresholds(args.b, H), args.iters)
    out = bf_decode(H, syndrome(H, e), cfg)
    residual = int((e ^ out.e_prime).sum())
    print(json.dumps({"flips": out.flips, "residual_weight": residual,
                      "iterations": out.iterations_run, "syndrome_zero": out.syndrome_zero,
                      "certified_semantics": cfg.certified}))
    return 0


def cmd_bound(args) -> int:
    H = load_spec(args.spec)
    profiles = distinct_row_profiles(H)
    cache: dict = {}
    rows = []
    b_fixed = None if args.optimize else parse_thresholds(args.b, H)
    for t in args.t:
        b = b_fixed
        if b is None:
            b, _ = optimize_threshold(profiles, H.v_star, t, cache)
        rep = compute_bound(H, profiles, t, b, resolve_method(H, args.method, b), cache)
        rows.append(rep.as_row())
    write_csv(args.out, metadata(args, H), ["t", "b", "numerator_bits", "log2_bound", "method"], rows)
    return 0


def cmd_simulate(args) -> int:
    H = load_spec(args.spec)
    b = parse_thresholds(args.b, H)
    rows = []
    workers = args.workers or default_workers()
    for t in args.t:
        est = estimate_dfr(H, TrialPlan(t, args.stop_failures, args.max_trials, args.seed, workers), b)
        rows.append({"t": t, "b": b if isinstance(b, int) else "vector", "trials": est.trials,
                     "failures": est.failures, "dfr": est.p_hat, "stderr": est.std_err})
        log.info("t=%d: %d/%d failures", t, est.failures, est.trials)
    write_csv(args.out, metadata(args, H), ["t", "b", "trials", "failures", "dfr", "stderr"], rows)
    return 0


def compare_rows(H: ParityCheckMatrix, ts: list[int], b, plan_for, method: str = "auto") -> list[dict]:
    """Bound and Monte Carlo estimate per ``t``, computed with the same thresholds."""
    profiles = distinct_row_profiles(H)
    method = resolve_method(H, method, b)
    cache: dict = {}
    rows = []
    for t in ts:
        rep = compute_bound(H, profiles, t, b, method, cache)
        est = estimate_dfr(H, plan_for(t), b)
        rows.append({"t": t, "bound_log2": rep.log2_bound, "dfr_hat": est.p_hat,
                     "stderr": est.std_err, "method": method, "trials": est.trials,
                     "failures": est.failures})
    return rows


def cmd_compare(args) -> int:
    H = load_spec(args.spec)
    b = parse_thresholds(args.b, H)
    workers = args.workers or default_workers()
    rows = compare_rows(H, args.t, b,
                        lambda t: TrialPlan(t, args.stop_failures, args.max_trials, args.seed, workers),
                        args.method)
    write_csv(args.out, metadata(args, H),
              ["t", "bound_log2", "dfr_hat", "stderr", "method", "trials", "failures"], rows)
    if args.plot:
        from .plotting import plot_compare

        plot_compare(rows, args.plot, title=H.name)
    return 0


def girth_table_rows(v_values: Iterable[int]) -> list[dict]:
    """One-iteration radius versus the closed-form girth bounds, per girth and column weight.

    For girth 6 and above two columns share at most one check, so the
    one-iteration radius is ``floor(v / 2)``. For girth 4 it is at least 1 as
    long as no column repeats, which needs ``v >= 3``; smaller ``v`` have no
    such code and are reported as not applicable.
    """
    rows = []
    for v in v_values:
        for g in TABLE_GIRTHS:
            theirs = chilappagari_bound(v, g)
            if g == 4:
                ours = 1 if v >= 3 else None
            else:
                ours = v // 2
            rows.append({"g": g, "v": v, "ours": "n/a" if ours is None else ours, "theirs": theirs,
                         "improved": ours is not None and ours > theirs})
    return rows


def improvement_sets(rows: list[dict]) -> dict[int, set[int]]:
    out: dict[int, set[int]] = {g: set() for g in TABLE_GIRTHS}
    for r in rows:
        if r["improved"]:
            out[r["g"]].add(r["v"])
    return out


def cmd_girth_table(args) -> int:
    rows = girth_table_rows(range(args.v_min, args.v_max + 1))
    write_csv(args.out, metadata(args), ["g", "v", "ours", "theirs", "improved"], rows)
    return 0


def cmd_keygen(args) -> int:
    threshold = OPTIMIZE if args.b is None else args.b
    workers = args.workers or default_workers()
    policy = KeygenPolicy(args.p, args.v, args.t, args.target_log2, args.max_attempts,
                          args.seed, threshold)
    if args.keys:
        rate, records = acceptance_rate_experiment(policy, args.keys, workers)
        log.info("accepted %d of %d", sum(r.accepted for r in records), len(records))
        summary = {"accepted": sum(r.accepted for r in records), "drawn": len(records),
                   "acceptance_rate": rate}
    else:
        records = [rejection_sample_key(policy, workers)]
        summary = {"accepted": int(records[0].accepted), "attempts": records[0].attempts}
    text = json.dumps([r.as_dict() for r in records], indent=1)
    if args.out in (None, "-"):
        print(text)
    else:
        Path(args.out).write_text(text + "\n")
    print(json.dumps(summary), file=sys.stderr)
    if not args.keys and not records[0].accepted:
        print(f"no key below 2^{args.target_log2} in {args.max_attempts} attempts", file=sys.stderr)
        return 5
    return 0


def cmd_count(args) -> int:
    text = Path(args.vector).read_text().replace(",", " ").split()
    cv = compress([int(x) for x in text])
    stats = CountStats()
    value = count_exceeding(cv, args.m, args.alpha, stats)
    print(json.dumps({"count": str(value), "length": cv.length, "distinct_values": cv.omega,
                      "configurations": stats.configurations}))
    return 0


# parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bf-cert", description=__doc__.splitlines()[0],
                                 allow_abbrev=False)
    ap.add_argument("--version", action="version", version=f"bf-cert {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    code = sub.add_parser("code", help="build or inspect parity-check matrices")
    code_sub = code.add_subparsers(dest="action", required=True)
    b = code_sub.add_parser("build", help="write a code spec (random girth-6 unless given)")
    b.add_argument("--type", choices=("qc2", "monomial"), default="qc2")
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--v", type=int, required=True)
    b.add_argument("--w", type=int)
    b.add_argument("--supports", help="explicit qc2 supports as 'S0;S1', e.g. '0,1,3;0,2,3'")
    b.add_argument("--array", action="store_true", help="monomial shifts j*k mod p")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--name")
    b.add_argument("--out")
    b.set_defaults(func=cmd_code_build)
    i = code_sub.add_parser("info", help="dimensions, girth and guaranteed radius")
    i.add_argument("--spec", required=True)
    i.add_argument("--girth-cutoff", type=int, default=8, choices=(4, 6, 8, 10, 12))
    i.set_defaults(func=cmd_code_info)

    d = sub.add_parser("decode", help="decode one error pattern")
    d.add_argument("--spec", required=True)
    d.add_argument("--error", required=True, help="0x-prefixed hex or comma-separated positions")
    d.add_argument("--b", required=True, help="integer or file of per-bit thresholds")
    d.add_argument("--iters", type=int, default=1)
    d.set_defaults(func=cmd_decode)

    bd = sub.add_parser("bound", help="certified failure-rate bounds")
    bd.add_argument("--spec", required=True)
    bd.add_argument("--t", type=parse_range, required=True)
    g = bd.add_mutually_exclusive_group(required=True)
    g.add_argument("--b")
    g.add_argument("--optimize", action="store_true")
    bd.add_argument("--method", choices=METHODS, default="auto")
    bd.add_argument("--out")
    bd.set_defaults(func=cmd_bound)

    for name, func, helptext in (("simulate", cmd_simulate, "Monte Carlo failure rate"),
                                 ("compare", cmd_compare, "bound next to Monte Carlo")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--spec", required=True)
        s.add_argument("--t", type=parse_range, required=True)
        s.add_argument("--b", required=True)
        s.add_argument("--stop-failures", type=int, default=100)
        s.add_argument("--max-trials", type=int, default=10 ** 6)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--workers", type=int)
        s.add_argument("--out")
        if name == "compare":
            s.add_argument("--method", choices=METHODS, default="auto")
            s.add_argument("--plot", help="also write a PNG figure (needs matplotlib)")
        s.set_defaults(func=func)

    k = sub.add_parser("keygen", help="rejection sampling of certified keys")
    k.add_argument("--p", type=int, required=True)
    k.add_argument("--v", type=int, required=True)
    k.add_argument("--t", type=int, required=True)
    k.add_argument("--target-log2", type=float, required=True)
    k.add_argument("--keys", type=int, help="certify this many independent draws instead")
    k.add_argument("--b", type=int, help="fixed threshold (default: optimize)")
    k.add_argument("--max-attempts", type=int, default=100)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--workers", type=int)
    k.add_argument("--out")
    k.set_defaults(func=cmd_keygen)

    c = sub.add_parser("count", help="count m-subsets of a vector with sum above alpha")
    c.add_argument("--vector", required=True, help="file of nonnegative integers")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--alpha", type=int, required=True)
    c.set_defaults(func=cmd_count)

    tb = sub.add_parser("girth-table", help="one-iteration radius against closed-form girth bounds")
    tb.add_argument("--v-min", type=int, default=1)
    tb.add_argument("--v-max", type=int, default=100)
    tb.add_argument("--out")
    tb.set_defaults(func=cmd_girth_table)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BfCertError as exc:
        print(f"bf-cert: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"bf-cert: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
