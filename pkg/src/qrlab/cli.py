"""Command line front door: check, corpus, oracle.

Exit codes: 0 clean, 1 property violation or corpus mismatch, 2 input or
parse error, 3 budget exhausted.  JSON output is deterministic for a given
input and version (sorted keys, no timing unless --timing is passed);
partial reports carry a failed_stage marker instead of dying silently.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .enumeration import DEFAULT_MAX_COSETS, all_subgroups, todd_coxeter
from .errors import BudgetExceeded, InputError, PropertyViolation
from .groupring import delta_dimension_sequence
from .permrec import DEFAULT_PRECISION, HarnessReport, equivalence_harness
from .presentation import Presentation, parse_presentation
from .relmod import bar_h2, gab_invariants, hopf_h2, qr_check_full, relation_lattice

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _read_presentation(path: str) -> Presentation:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_presentation(text)


def _invariants_dict(inv) -> dict:
    return {
        "free_rank": inv.free_rank,
        "torsion": list(inv.torsion),
        "pretty": str(inv),
    }


def _qr_dict(rep) -> dict:
    return {
        "quasirational": rep.quasirational,
        "witness_level": rep.witness_level,
        "cutoff": rep.cutoff,
        "cutoff_reason": rep.cutoff_reason,
        "g_coinvariants": _invariants_dict(rep.g_coinvariants),
        "levels": [
            {
                "level": lv.level,
                "subgroup_order": lv.subgroup_order,
                "quotient_order": lv.quotient_order,
                "invariants": _invariants_dict(lv.invariants),
                "p_torsion": list(lv.p_torsion),
            }
            for lv in rep.levels
        ],
    }


def _harness_dict(rep: HarnessReport) -> dict:
    return {
        "precision": rep.precision,
        "violations": rep.violations,
        "unknown_levels": rep.unknown_levels,
        "transitions_checked": rep.transitions_checked,
        "levels": [
            {
                "level": lv.level,
                "quotient_order": lv.quotient_order,
                "dim": lv.dim,
                "p_torsion": list(lv.p_torsion),
                "modp": lv.modp_status,
                "multiplicities": (
                    None if lv.multiplicities is None
                    else [list(pair) for pair in lv.multiplicities]
                ),
                "integral": lv.integral_status,
                "characters_plain": lv.characters_plain,
                "trials": lv.trials,
            }
            for lv in rep.levels
        ],
    }


def _harness_tag(rep: HarnessReport) -> str:
    return f"{rep.violations}v{rep.unknown_levels}u{len(rep.levels)}l"


def _emit(payload: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _json_dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, BudgetExceeded):
        return EXIT_BUDGET
    if isinstance(exc, PropertyViolation):
        return EXIT_VIOLATION
    return EXIT_INPUT


def cmd_check(args) -> int:
    doc: dict = {"schema": 1, "version": __version__, "file": args.path}
    timing: dict[str, int] = {}
    code = EXIT_OK

    def clock(stage, fn):
        t0 = time.monotonic()
        try:
            return fn()
        finally:
            timing[stage] = int((time.monotonic() - t0) * 1000)

    stage = "parse"
    try:
        pres = clock("parse", lambda: _read_presentation(args.path))
        doc["input"] = pres.text()
        primes = tuple(args.prime) if args.prime else pres.primes
        doc["primes"] = list(primes)
        stage = "enumerate"
        tbl = clock("enumerate", lambda: todd_coxeter(pres, args.max_cosets))
        doc["order"] = tbl.order
        stage = "lattice"
        rlat = clock("lattice", lambda: relation_lattice(pres, tbl))
        doc["relation_rank"] = rlat.rank
        doc["gab"] = _invariants_dict(gab_invariants(pres))
        stage = "h2"
        hop = clock("h2_hopf", lambda: hopf_h2(rlat))
        bar = clock("h2_bar", lambda: bar_h2(tbl))
        if (hop.free_rank, hop.torsion) != (bar.free_rank, bar.torsion):
            raise PropertyViolation(
                f"H2 routes disagree: {hop} vs {bar}"
            )
        doc["h2"] = {"hopf": _invariants_dict(hop), "bar": _invariants_dict(bar)}
        doc["qr"] = {}
        doc["harness"] = {}
        for p in primes:
            stage = f"qr[{p}]"
            rep = clock(f"qr_{p}", lambda p=p: qr_check_full(pres, tbl, p))
            doc["qr"][str(p)] = _qr_dict(rep)
            if rep.quasirational:
                stage = f"harness[{p}]"
                har = clock(
                    f"harness_{p}",
                    lambda p=p: equivalence_harness(
                        pres, tbl, p,
                        precision=args.precision,
                        max_level=args.max_level,
                    ),
                )
                doc["harness"][str(p)] = _harness_dict(har)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a report
        doc["failed_stage"] = stage
        doc["error"] = str(exc)
        code = _exit_code_for(exc)
    if args.timing:
        doc["timing_ms"] = timing
    _emit(_json_dump(doc), args.out)
    return code


def _corpus_row(corpus_dir: str, entry: dict, prime: int,
                precision: int, max_cosets: int) -> dict:
    import os

    t0 = time.monotonic()
    row = {"id": entry["id"], "prime": prime}
    try:
        path = entry["file"]
        if not os.path.isabs(path):
            path = os.path.join(corpus_dir, path)
        pres = _read_presentation(path)
        tbl = todd_coxeter(pres, max_cosets)
        rlat = relation_lattice(pres, tbl)
        gab = gab_invariants(pres)
        hop = hopf_h2(rlat)
        bar = bar_h2(tbl)
        if (hop.free_rank, hop.torsion) != (bar.free_rank, bar.torsion):
            raise PropertyViolation(f"H2 routes disagree: {hop} vs {bar}")
        rep = qr_check_full(pres, tbl, prime)
        row["order"] = tbl.order
        row["gab"] = list(gab.torsion)
        row["h2"] = list(hop.torsion)
        row["qr"] = rep.quasirational
        if rep.quasirational:
            har = equivalence_harness(pres, tbl, prime, precision=precision)
            row["harness"] = _harness_tag(har)
        else:
            row["harness"] = "-"
        row["error"] = None
    except Exception as exc:  # noqa: BLE001 - row-level isolation
        row["error"] = str(exc)
        row["exit"] = _exit_code_for(exc)
    row["millis"] = int((time.monotonic() - t0) * 1000)
    return row


def _check_expected(row: dict, expected: dict, prime: int) -> list[str]:
    """Compare the computed row against an expected block, field by field.

    qr and harness expectations are keyed by prime (as a string), matching
    how entries with several primes record them.
    """
    bad = []
    if "order" in expected and expected["order"] != row.get("order"):
        bad.append(f"order: expected {expected['order']!r}, got {row.get('order')!r}")
    for key in ("qr", "harness"):
        if key in expected:
            want = expected[key]
            if isinstance(want, dict):
                if str(prime) not in want:
                    continue
                want = want[str(prime)]
            if want != row.get(key):
                bad.append(f"{key}: expected {want!r}, got {row.get(key)!r}")
    for key in ("gab", "h2"):
        if key in expected and list(expected[key]) != row.get(key):
            bad.append(f"{key}: expected {expected[key]!r}, got {row.get(key)!r}")
    return bad


def cmd_corpus(args) -> int:
    import os

    try:
        with open(args.path, encoding="utf-8") as fh:
            corpus = json.load(fh)
    except OSError as exc:
        sys.stderr.write(f"cannot read {args.path}: {exc.strerror}\n")
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"bad corpus file: {exc}\n")
        return EXIT_INPUT
    corpus_dir = os.path.dirname(os.path.abspath(args.path))
    entries = corpus.get("entries", [])
    ids = [e["id"] for e in entries]
    if len(ids) != len(set(ids)):
        sys.stderr.write("duplicate entry ids in corpus\n")
        return EXIT_INPUT
    jobs = []
    for entry in entries:
        for prime in entry.get("primes", [2]):
            jobs.append((entry, prime))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(
                _corpus_row,
                [corpus_dir] * len(jobs),
                [e for e, _ in jobs],
                [p for _, p in jobs],
                [args.precision] * len(jobs),
                [args.max_cosets] * len(jobs),
            ))
        rows = {(r["id"], r["prime"]): r for r in rows}
        rows = [rows[(e["id"], p)] for e, p in jobs]
    else:
        rows = [_corpus_row(corpus_dir, e, p, args.precision, args.max_cosets)
                for e, p in jobs]
    mismatches = 0
    hard_exit = EXIT_OK
    for (entry, prime), row in zip(jobs, rows):
        if row.get("error") is not None:
            mismatches += 1
            hard_exit = max(hard_exit, row.get("exit", EXIT_VIOLATION))
            row["mismatches"] = [f"error: {row['error']}"]
            continue
        bad = _check_expected(row, entry.get("expected", {}), prime)
        row["mismatches"] = bad
        if bad:
            mismatches += 1
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "prime", "order", "gab", "h2", "qr", "harness", "millis"])
        for row in rows:
            w.writerow([
                row["id"], row["prime"], row.get("order", ""),
                "x".join(str(d) for d in row.get("gab", [])) or "1",
                "x".join(str(d) for d in row.get("h2", [])) or "1",
                {True: "QR", False: "not-QR"}.get(row.get("qr"), "error"),
                row.get("harness", "-"), row["millis"],
            ])
        _emit(buf.getvalue(), args.out)
    else:
        doc = {
            "schema": 1,
            "version": __version__,
            "mismatch_count": mismatches,
            "rows": [
                {k: v for k, v in row.items() if k != "millis" or args.timing}
                for row in rows
            ],
        }
        _emit(_json_dump(doc), args.out)
    if mismatches:
        sys.stderr.write(f"{mismatches} corpus mismatch(es)\n")
        return max(hard_exit, EXIT_VIOLATION)
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        pres = _read_presentation(args.path)
        tbl = todd_coxeter(pres, args.max_cosets)
        if args.which == "bar-h2":
            inv = bar_h2(tbl)
            doc = {"bar_h2": list(inv.torsion), "pretty": str(inv)}
        elif args.which == "delta-dims":
            p = args.prime[0] if args.prime else pres.primes[0]
            doc = {"prime": p, "delta_dims": delta_dimension_sequence(tbl, p)}
        else:
            subs = all_subgroups(tbl)
            doc = {
                "count": len(subs),
                "orders": sorted(s.order for s in subs),
            }
    except Exception as exc:  # noqa: BLE001 - single-purpose probes
        sys.stderr.write(f"{exc}\n")
        return _exit_code_for(exc)
    _emit(_json_dump(doc), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qrlab",
        description="quasirationality and permutation-module lab for finite presentations",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--prime", type=int, action="append",
                        help="prime to analyze (repeatable; default: from the file)")
        sp.add_argument("--max-cosets", type=int, default=DEFAULT_MAX_COSETS)
        sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION,
                        help="p-adic precision k for integral certificates")
        sp.add_argument("--max-level", type=int, default=None,
                        help="stop the level tower early")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None, help="write the report here")
        sp.add_argument("--timing", action="store_true",
                        help="include wall-clock timings in the JSON report")

    sp = sub.add_parser("check", help="full analysis of one presentation file")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("corpus", help="run a corpus file and compare expectations")
    sp.add_argument("path")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(fn=cmd_corpus)

    sp = sub.add_parser("oracle", help="raw oracle outputs for cross-validation")
    sp.add_argument("which", choices=("bar-h2", "delta-dims", "subgroups"))
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
