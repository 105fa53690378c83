"""Command-line front end.

Subcommands: dist, verify, detect, shatter, report, verify-cert.
Exit codes: 0 success, 1 property failure, 2 input error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bounds import (bilo_bound, bilo_bound_holds, halasz_bound_report, lo_bound,
                     lo_bound_holds, row_zero_count_distribution)
from .certs import APCertificate, GAPCertificate, RankOneCertificate, TupleStructure
from .config import (C_HALASZ, C_ST, DEFAULT_MAX_ATTEMPTS, HEIGHT_RATIO_FROZEN, Budget,
                     default_threads)
from .decouple import Partition, PartitionFamily, shatter_build, shatter_verify
from .dist import (bilinear_conditional_concentration, bilinear_distribution, concentration,
                   linear_distribution, multilinear_concentration, quadratic_concentration,
                   quadratic_distribution)
from .errors import AclabError, BudgetExceeded, CertificateError, ParseError, ShatterFailure
from .forms import (BilinearForm, LinearForm, MultilinearForm, QuadraticForm, TargetFunction,
                    form_from_json, form_to_json, matrix_to_json, parse_matrix_csv, parse_matrix_json)
from .rng import PRNG_NAME
from .scalars import as_gaussian, format_rational, parse_rational
from .structure import (commensurability, comm_star, degenerate_pair, dense_principal_minor, gap_fit,
                        rank_one_extract, shortest_ap, tuple_structure)
from .verify import CORPUS_SEED, SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
DETECTORS = ("rank1", "gap", "ap", "comm", "tuple", "kcore", "degenerate-pair")


class _InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers

def _parse_budget(text: str | None) -> Budget:
    budget = Budget()
    if not text:
        return budget
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, val = part.partition("=")
        if not sep:
            key, val = "enum_cap", key
        key = key.strip().replace("-", "_")
        if key not in ("enum_cap", "support_cap", "ksum_cap"):
            raise _InputError(f"unknown budget key {key!r}")
        try:
            fields[key] = int(val)
        except ValueError:
            raise _InputError(f"budget value for {key} must be an integer") from None
    return budget.with_(**fields)


def _run_config(args, command: str, extra: dict) -> dict:
    """Everything that determines the output; the thread count is left out on
    purpose because results do not depend on it."""
    return {
        "command": command,
        "version": __version__,
        "seed": args.seed,
        "prng": PRNG_NAME,
        "budget": {k: v for k, v in args.budget_obj.to_dict().items() if k != "threads"},
        "constants": {"C_halasz": C_HALASZ, "C_st": C_ST,
                      "height_ratio": format_rational(HEIGHT_RATIO_FROZEN)},
        "params": extra,
    }


def _read_input(path: str):
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None
    return data, hashlib.sha256(data).hexdigest()


def _decode_json(data: bytes):
    try:
        return json.loads(data.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    except UnicodeDecodeError:
        raise ParseError("input is not UTF-8") from None


def _looks_json(path: str, data: bytes) -> bool:
    return path.endswith(".json") or data.lstrip()[:1] in (b"{", b"[")


def _load_matrix(path: str, data: bytes):
    if _looks_json(path, data):
        obj = _decode_json(data)
        if isinstance(obj, dict) and "kind" in obj and "schema_version" in obj:
            form = form_from_json(obj)
            if isinstance(form, LinearForm):
                return [list(form.coeffs)]
            if isinstance(form, (BilinearForm, QuadraticForm)):
                return [list(r) for r in form.matrix]
            raise ParseError("multilinear forms have no matrix view")
        if isinstance(obj, dict) and "input" in obj:
            return parse_matrix_json(obj["input"])
        return parse_matrix_json(obj)
    try:
        return parse_matrix_csv(data.decode("utf-8"))
    except UnicodeDecodeError:
        raise ParseError("input is not UTF-8") from None


def _load_form(path: str, data: bytes, kind: str | None):
    """Returns (form, target)."""
    if _looks_json(path, data):
        obj = _decode_json(data)
        if isinstance(obj, dict) and "schema_version" in obj:
            target = TargetFunction.from_json(obj.get("target")) if "target" in obj else None
            return form_from_json(obj), target
        rows = parse_matrix_json(obj)
    else:
        rows = _load_matrix(path, data)
    if kind is None:
        kind = "linear" if len(rows) == 1 else "bilinear"
    if kind == "linear":
        if len(rows) != 1:
            raise ParseError("a linear form needs exactly one row")
        return LinearForm(rows[0]), None
    if kind == "bilinear":
        return BilinearForm(rows), None
    if kind == "quadratic":
        try:
            return QuadraticForm(rows), None
        except AclabError as exc:
            raise ParseError(str(exc)) from None
    raise _InputError(f"unknown form kind {kind!r}")


def _emit(args, payload=None, csv_rows=None, header=None):
    if args.format == "csv" and csv_rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# dist

def _bound_for(form, rep):
    if isinstance(form, LinearForm) and form.m >= 1:
        return {"bound_name": "lo", "bound_value": lo_bound(form.m), "m": form.m,
                "passes": lo_bound_holds(rep.sup_prob, form.m)}
    if isinstance(form, BilinearForm) and form.r >= 1:
        p = rep.sup_prob
        return {"bound_name": "bilo", "bound_value": bilo_bound(form.r), "r": form.r,
                "passes": bilo_bound_holds(p, form.r)}
    return None


def cmd_dist(args) -> int:
    data, digest = _read_input(args.file)
    form, target = _load_form(args.file, data, args.kind)
    if args.target is not None:
        target = TargetFunction.constant(parse_rational(args.target) if "i" not in args.target
                                         else as_gaussian(args.target))
    budget = args.budget_obj
    law = None
    if isinstance(form, LinearForm):
        law = linear_distribution(form, budget)
        rep = concentration(law)
        if target is not None:
            rep = type(rep)(rep.sup_prob, rep.argmax_values, target_prob=law.prob(target.value))
    elif isinstance(form, BilinearForm):
        rep = bilinear_conditional_concentration(form, target, budget)
        if args.format == "csv" or args.dist_csv:
            law = bilinear_distribution(form, budget)
    elif isinstance(form, QuadraticForm):
        rep = quadratic_concentration(form, budget)
        if args.format == "csv" or args.dist_csv:
            law = quadratic_distribution(form, budget)
    elif isinstance(form, MultilinearForm):
        rep = multilinear_concentration(form, target, budget)
    else:  # pragma: no cover
        raise _InputError("unsupported form")
    if args.dist_csv and law is not None:
        with open(args.dist_csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["value", "prob"])
            w.writerows(law.to_csv_rows())
    payload = {
        "config": _run_config(args, "dist", {"kind": type(form).__name__, "target": args.target}),
        "input_sha256": digest,
        "report": rep.to_json(),
        "bound": _bound_for(form, rep),
    }
    rows = law.to_csv_rows() if law is not None else None
    _emit(args, payload, rows, ["value", "prob"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        sys.stderr.write(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all\n")
        return EXIT_INPUT
    seed = CORPUS_SEED if args.seed is None else args.seed
    results = [run_suite(n, seed, args.budget_obj) for n in names]
    payload = {"config": _run_config(args, "verify", {"suite": args.suite, "corpus_seed": seed}),
               "suites": [r.summary() for r in results],
               "passed": all(r.passed for r in results)}
    keys = ["suite", "case", "pass"]
    extra = sorted({k for r in results for row in r.rows for k in row} - set(keys))
    rows = [[row.get(k, "") for k in keys + extra] for r in results for row in r.rows]
    _emit(args, payload, rows, keys + extra)
    for r in results:
        sys.stderr.write(f"{r.name}: {'PASS' if r.passed else 'FAIL'} ({r.cases} cases)\n")
    return EXIT_OK if payload["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# detect / verify-cert

def _first_row(rows):
    return rows[0] if len(rows) == 1 else [x for r in rows for x in r]


def _detect(detector: str, rows, params: dict):
    if detector == "rank1":
        return rank_one_extract(BilinearForm(rows)).to_json()
    if detector == "gap":
        cert = gap_fit(_first_row(rows), params["bound"], params["max_exceptions"])
        return None if cert is None else cert.to_json()
    if detector == "ap":
        return shortest_ap(_first_row(rows)).to_json()
    if detector == "comm":
        vals = _first_row(rows)
        r, eps = params["r"], params["eps"]
        ap = shortest_ap(vals).to_json() if any(as_gaussian(v) for v in vals) else None
        c, cs = commensurability(vals, r, eps), comm_star(vals, r, eps)
        return {"kind": "comm", "r": r, "eps": format_rational(eps), "ap": ap,
                "comm": format_rational(c) if isinstance(c, Fraction) else c,
                "comm_star": format_rational(cs) if isinstance(cs, Fraction) else cs}
    if detector == "tuple":
        return tuple_structure(rows).to_json()
    if detector == "kcore":
        keep = dense_principal_minor(QuadraticForm(rows), params["threshold"])
        return {"kind": "kcore", "threshold": params["threshold"], "indices": [i + 1 for i in keep]}
    if detector == "degenerate-pair":
        if len(rows) < 2:
            raise ParseError("degenerate-pair needs two rows")
        pair = degenerate_pair(rows[0], rows[1], params["r"], params["search_bound"])
        return {"kind": "degenerate_pair", "r": params["r"], "search_bound": params["search_bound"],
                "pair": None if pair is None else list(pair)}
    raise _InputError(f"unknown detector {detector!r}")


def _agree(a, b, l1, l2):
    return sum(1 for x, y in zip(a, b) if as_gaussian(x) * l1 == as_gaussian(y) * l2)


def check_certificate(cert: dict, rows) -> bool:
    """Independent re-verification of a detector output against its input."""
    kind = cert.get("kind")
    if kind == "rank1":
        return RankOneCertificate.from_json(cert).verify(rows)
    if kind == "gap":
        return GAPCertificate.from_json(cert).verify(_first_row(rows))
    if kind == "ap":
        vals = _first_row(rows)
        c = APCertificate.from_json(cert)
        if not c.verify(vals):
            return False
        # minimality: the step must generate the values
        ks = [as_gaussian(v).re / c.d for v in vals]
        from math import gcd
        g = 0
        for k in ks:
            g = gcd(g, int(k))
        return g == 1 and c.min_index == min(min(ks), 0) and c.max_index == max(max(ks), 0)
    if kind == "comm":
        vals = _first_row(rows)
        r, eps = int(cert["r"]), parse_rational(cert["eps"])
        c = commensurability(vals, r, eps)
        return (format_rational(c) if isinstance(c, Fraction) else c) == cert["comm"]
    if kind == "tuple":
        ts = TupleStructure.from_json(cert)
        v1 = [as_gaussian(x) for x in rows[0]]
        for d, S, row in zip(ts.ratios, ts.sets, rows[1:]):
            bad = {i for i, (x, y) in enumerate(zip(v1, row)) if x != d * as_gaussian(y)}
            if bad != set(S):
                return False
        return True
    if kind == "kcore":
        keep = [i - 1 for i in cert["indices"]]
        t = int(cert["threshold"])
        for i in keep:
            if sum(1 for j in keep if j != i and not as_gaussian(rows[i][j]).is_zero()) < t:
                return False
        return True
    if kind == "degenerate_pair":
        if cert["pair"] is None:
            return True
        l1, l2 = cert["pair"]
        n = len(rows[0])
        return 5 * _agree(rows[0], rows[1], l1, l2) >= 5 * n - int(cert["r"])
    raise ParseError(f"unknown certificate kind {kind!r}")


def cmd_detect(args) -> int:
    data, digest = _read_input(args.file)
    rows = _load_matrix(args.file, data)
    params = {"bound": args.bound, "max_exceptions": args.max_exceptions, "r": args.r,
              "eps": parse_rational(args.eps), "threshold": args.threshold,
              "search_bound": args.search_bound}
    cert = _detect(args.detector, rows, params)
    if cert is not None and not check_certificate(cert, rows):
        raise CertificateError(f"{args.detector} certificate failed re-verification")
    shown = {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in params.items()}
    payload = {
        "config": _run_config(args, "detect", {"detector": args.detector, **shown}),
        "input_sha256": digest,
        "detector": args.detector,
        "input": matrix_to_json(rows),
        "certificate": cert,
        "verified": cert is not None,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_verify_cert(args) -> int:
    data, _ = _read_input(args.file)
    obj = _decode_json(data)
    if not isinstance(obj, dict) or "certificate" not in obj or "input" not in obj:
        raise ParseError('expected a detect report with "input" and "certificate"')
    rows = parse_matrix_json(obj["input"])
    cert = obj["certificate"]
    ok = True if cert is None else check_certificate(cert, rows)
    payload = {"valid": ok, "kind": None if cert is None else cert.get("kind")}
    _emit(args, payload)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# shatter

def cmd_shatter(args) -> int:
    Q, digest = None, None
    if args.file:
        data, digest = _read_input(args.file)
        form, _ = _load_form(args.file, data, "quadratic")
        if not isinstance(form, QuadraticForm):
            raise ParseError("shatter needs a quadratic form")
        Q = form
    elif args.n is None:
        raise _InputError("give a quadratic form file or --n")
    elif args.r > 0:
        raise _InputError("--r > 0 needs a quadratic form file")
    seed = 0 if args.seed is None else args.seed
    transcript: list = []
    try:
        fam = shatter_build(Q, args.r, seed, args.max_attempts, n=args.n, transcript=transcript)
    except ShatterFailure as exc:
        payload = {"config": _run_config(args, "shatter", {"n": args.n, "r": args.r}),
                   "input_sha256": digest, "family": None, "error": str(exc),
                   "transcript": _transcript_json(transcript)}
        _emit(args, payload)
        return EXIT_FAIL
    bad = shatter_verify(fam.n, fam)
    payload = {
        "config": _run_config(args, "shatter", {"n": fam.n, "r": args.r,
                                                "max_attempts": args.max_attempts}),
        "input_sha256": digest,
        "family": fam.to_json(),
        "shatters": bad is None,
        "transcript": _transcript_json(transcript),
    }
    rows = [[k + 1, " ".join(str(i + 1) for i in p.Y), " ".join(str(i + 1) for i in p.Z)]
            for k, p in enumerate(fam.partitions)]
    _emit(args, payload, rows, ["partition", "Y", "Z"])
    return EXIT_OK if bad is None else EXIT_FAIL


def _transcript_json(tr):
    out = []
    for e in tr:
        e = dict(e)
        if e.get("violation") is not None:
            e["violation"] = [i + 1 for i in e["violation"]]
        out.append(e)
    return out


# ---------------------------------------------------------------------------
# report

def cmd_report(args) -> int:
    data, digest = _read_input(args.file)
    form, _ = _load_form(args.file, data, args.kind)
    budget = args.budget_obj
    reports = []
    if isinstance(form, LinearForm):
        sup = concentration(linear_distribution(form, budget)).sup_prob
        reports.append({"bound_name": "lo", "bound_value": lo_bound(form.m), "prob": format_rational(sup),
                        "ratio": float(sup) / lo_bound(form.m), "passes": lo_bound_holds(sup, form.m)})
        if all(not a.is_zero() for a in form.coeffs):
            for k in (1, 2):
                try:
                    reports.append(halasz_bound_report(form, k, budget=budget).to_json())
                except BudgetExceeded:
                    break
    elif isinstance(form, BilinearForm):
        rep = bilinear_conditional_concentration(form, budget=budget)
        r = form.r
        if r >= 1:
            reports.append({"bound_name": "bilo", "bound_value": bilo_bound(r),
                            "prob": format_rational(rep.sup_prob),
                            "ratio": float(rep.sup_prob) / bilo_bound(r),
                            "passes": bilo_bound_holds(rep.sup_prob, r)})
        W = row_zero_count_distribution(form, range(form.shape[0]), budget)
        reports.append({"bound_name": "row_zero_count", "law": W.to_json()})
    elif isinstance(form, QuadraticForm):
        rep = quadratic_concentration(form, budget)
        reports.append({"bound_name": "quadratic_sup", "prob": format_rational(rep.sup_prob),
                        "target_prob": format_rational(rep.target_prob)})
    else:
        raise _InputError("report supports linear, bilinear and quadratic forms")
    payload = {"config": _run_config(args, "report", {"kind": type(form).__name__}),
               "input_sha256": digest, "form": form_to_json(form), "bounds": reports}
    keys = ["bound_name", "bound_value", "prob", "ratio", "passes"]
    rows = [[rep.get(k, "") for k in keys] for rep in reports if "prob" in rep]
    _emit(args, payload, rows, keys)
    return EXIT_OK if all(rep.get("passes", True) for rep in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $ACLAB_THREADS or 1); never changes results")
    p.add_argument("--budget", default=None,
                   help="caps, e.g. enum_cap=67108864,support_cap=10000000,ksum_cap=100000000")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aclab", description="Exact anti-concentration toolkit")
    parser.add_argument("--version", action="version", version=f"aclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="exact distribution / concentration of a form")
    p.add_argument("file")
    p.add_argument("--kind", choices=("linear", "bilinear", "quadratic"), default=None)
    p.add_argument("--target", default=None, help="constant target value (p/q or Gaussian)")
    p.add_argument("--dist-csv", default=None, metavar="PATH", help="also write the full law as CSV")
    _common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}, or all")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("detect", help="run a structure detector and emit a certificate")
    p.add_argument("file")
    p.add_argument("--detector", choices=DETECTORS, required=True)
    p.add_argument("--bound", type=int, default=10, help="gap: coordinate bound B")
    p.add_argument("--max-exceptions", type=int, default=0)
    p.add_argument("--r", type=int, default=100)
    p.add_argument("--eps", default="1/4")
    p.add_argument("--threshold", type=int, default=1, help="kcore: minimum off-diagonal degree")
    p.add_argument("--search-bound", type=int, default=10)
    _common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("shatter", help="build and verify a shattering family")
    p.add_argument("file", nargs="?", default=None, help="quadratic form (matrix CSV/JSON)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=int, default=0, help="balance parameter (0: balance not required)")
    p.add_argument("--max-attempts", type=int, default=DEFAULT_MAX_ATTEMPTS)
    _common(p)
    p.set_defaults(func=cmd_shatter)

    p = sub.add_parser("report", help="bound checks for a form")
    p.add_argument("file")
    p.add_argument("--kind", choices=("linear", "bilinear", "quadratic"), default=None)
    _common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-cert", help="re-verify a detect report from disk")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_verify_cert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.budget_obj = _parse_budget(args.budget)
        threads = args.threads if args.threads is not None else default_threads()
        args.budget_obj = args.budget_obj.with_(threads=max(1, threads))
        return args.func(args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n"
                         "raise the cap with --budget (e.g. --budget enum_cap=...) "
                         "or shrink the instance\n")
        return EXIT_BUDGET
    except CertificateError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_FAIL
    except (ParseError, _InputError, AclabError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
