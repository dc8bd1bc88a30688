"""primtrace command line: scan, test, verify, exceptions.

Exit codes: 0 success or full certificate, 2 exceptions found (or a
certificate that fails verification), 3 search budget exceeded, 1 usage
or I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

from . import __version__
from .numth import DEFAULT_SMOOTH_BOUND, FactorizationBudgetExceeded, is_prime_power
from .records import (
    CERT_COLUMNS,
    FORMATS,
    SCAN_COLUMNS,
    SUMMARY,
    MalformedRecord,
    RecordWriter,
    ScanTally,
    certificate_records,
    iter_records,
    read_sections,
    run_record,
    verdict_record,
)
from .search import (
    BRUTE_FORCE_CAP,
    DEFAULT_FAMILIES,
    FALLBACK_BUDGET,
    VerifyContext,
    brute_force,
    certify_q,
    verify_batch,
)
from .sieve import CRITERIA, DEFAULT_CROSSOVER, MAX_Q, scan_range

log = logging.getLogger("primtrace")

EXIT_OK, EXIT_USAGE, EXIT_EXCEPTIONS, EXIT_BUDGET = 0, 1, 2, 3
WORKERS_ENV = "PRIMTRACE_WORKERS"


class UsageError(Exception):
    pass


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def resolve_workers(flag: int | None) -> int:
    """Environment variable beats the flag, the flag beats the default."""
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    else:
        n = flag if flag is not None else default_workers()
    if n < 1:
        raise UsageError("worker count must be at least 1")
    return n


def _int(text: str) -> int:
    """Integers, also written as 10**6 or 1e6."""
    t = text.strip().replace("_", "")
    try:
        if "**" in t:
            b, e = t.split("**")
            return int(b) ** int(e)
        if "e" in t.lower():
            m, e = t.lower().split("e")
            if not m.isdigit():
                raise ValueError
            return int(m) * 10 ** int(e)
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=_int, default=argparse.SUPPRESS,
                        help=f"worker processes (env {WORKERS_ENV} overrides; default: all cores)")
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS,
                        help="output format (default jsonl)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--log", default=argparse.SUPPRESS, help="also write the run log here")
    common.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="log warnings only")

    ap = argparse.ArgumentParser(prog="primtrace", parents=[common], description=(
        "Certify primitive elements of prescribed trace with primitive xi + 1/xi "
        "in cubic extensions of finite fields."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("scan", parents=[common], help="sieve a range of prime powers")
    sc.add_argument("--from", dest="lo", type=_int, required=True)
    sc.add_argument("--to", dest="hi", type=_int, required=True)
    sc.add_argument("--criterion", choices=CRITERIA, default="mpsc")
    sc.add_argument("--smooth-bound", type=_int, default=DEFAULT_SMOOTH_BOUND,
                    help="X: primes below this are sieved out of q^2+q+1")
    sc.add_argument("--crossover", type=_int, default=DEFAULT_CROSSOVER,
                    help="primes from here on use the partial-factorization path")

    te = sub.add_parser("test", parents=[common], help="certify one q")
    te.add_argument("q", type=_int)
    te.add_argument("--seed", type=_int, default=0)
    te.add_argument("--families", type=_int, default=DEFAULT_FAMILIES)
    te.add_argument("--sample-a", type=_int, default=None, metavar="N",
                    help="only N random nonzero traces plus a = 0")
    te.add_argument("--fallback-budget", type=_int, default=FALLBACK_BUDGET)

    ve = sub.add_parser("verify", parents=[common], help="recheck a certificate file")
    ve.add_argument("file")

    ex = sub.add_parser("exceptions", parents=[common],
                        help="exhaustive search over all prime powers up to a bound")
    ex.add_argument("--max-q", type=_int, required=True)
    ex.add_argument("--seed", type=_int, default=0)
    return ap


_handlers: list[logging.Handler] = []


def _setup_logging(args) -> None:
    root = logging.getLogger()
    for h in _handlers:
        root.removeHandler(h)
        h.close()
    _handlers.clear()
    _handlers.append(logging.StreamHandler(sys.stderr))
    if args.log:
        _handlers.append(logging.FileHandler(args.log, mode="w", encoding="utf-8"))
    fmt = logging.Formatter("%(levelname)s %(name)s: %(message)s")
    for h in _handlers:
        h.setFormatter(fmt)
        root.addHandler(h)
    root.setLevel(logging.WARNING if args.quiet else logging.INFO)


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


# ---------------------------------------------------------------- commands


def cmd_scan(args) -> int:
    lo, hi = args.lo, args.hi
    if not 2 <= lo <= hi <= MAX_Q:
        raise UsageError(f"range must satisfy 2 <= from <= to <= {MAX_Q}")
    if args.smooth_bound < 2:
        raise UsageError("--smooth-bound must be at least 2")
    config = {"from": lo, "to": hi, "criterion": args.criterion,
              "smooth_bound": args.smooth_bound, "crossover": args.crossover}
    tally = ScanTally(args.criterion)
    with _output(args.out) as out:
        w = RecordWriter(out, args.format, SCAN_COLUMNS)
        w.write(run_record("scan", config))
        for v in scan_range(lo, hi, args.criterion, args.smooth_bound, args.crossover,
                            workers=args.workers):
            tally.add(v)
            w.write(verdict_record(v, args.criterion))
        summary = tally.record()
        w.write(summary)
    log.info("scan [%d, %d]: %d prime powers, survivors psc=%s mpsc=%s",
             lo, hi, summary["prime_powers"], summary["survivors_psc"],
             summary["survivors_mpsc"])
    return EXIT_OK


def _status_exit(statuses) -> int:
    if "exceptions" in statuses:
        return EXIT_EXCEPTIONS
    if "budget-exceeded" in statuses:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_test(args) -> int:
    q = args.q
    if not 2 <= q <= MAX_Q or is_prime_power(q) is None:
        raise UsageError(f"{q} is not a prime power in [2, {MAX_Q}]")
    if args.families < 1:
        raise UsageError("--families must be at least 1")
    config = {"q": q, "seed": args.seed, "families": args.families,
              "sample_a": args.sample_a, "fallback_budget": args.fallback_budget}
    cert = certify_q(q, seed=args.seed, families=args.families, sample=args.sample_a,
                     fallback_budget=args.fallback_budget, workers=args.workers)
    status = cert.status()
    with _output(args.out) as out:
        w = RecordWriter(out, args.format, CERT_COLUMNS)
        w.write(run_record("test", config))
        for rec in certificate_records(cert):
            w.write(rec)
        w.write({"record": SUMMARY, "status": status,
                 "certified": [q] if status == "certified" else [],
                 "exceptional": [[x.q, x.failing_a] for x in cert.exceptions],
                 "budget_exceeded": [[q, a] for a in sorted(cert.budget_exceeded)]})
    log.info("q=%d: %s, %d witnesses", q, status, len(cert.witnesses))
    for x in cert.exceptions:
        log.info("q=%d: no valid xi with trace %d among all %d candidates", q, x.failing_a,
                 x.tested)
    return _status_exit({status})


def cmd_exceptions(args) -> int:
    n = args.max_q
    if n < 2:
        raise UsageError("--max-q must be at least 2")
    if n**3 > BRUTE_FORCE_CAP:
        raise UsageError(f"--max-q {n} exceeds the brute-force cap (q^3 <= {BRUTE_FORCE_CAP})")
    qs = [q for q in range(2, n + 1) if is_prime_power(q) is not None]
    certified, exceptional, over = [], [], []
    with _output(args.out) as out:
        w = RecordWriter(out, args.format, CERT_COLUMNS)
        w.write(run_record("exceptions", {"max_q": n, "seed": args.seed}))
        for q in qs:
            cert = certify_q(q, seed=args.seed, brute_force_max=n, workers=args.workers)
            for rec in certificate_records(cert):
                w.write(rec)
            st = cert.status()
            if st == "certified":
                certified.append(q)
            exceptional += [[q, x.failing_a] for x in cert.exceptions]
            over += [[q, a] for a in sorted(cert.budget_exceeded)]
        w.write({"record": SUMMARY, "status": "done", "certified": certified,
                 "exceptional": exceptional, "budget_exceeded": over})
    print(f"{'q':>6} {'a':>6}  exhaustive", file=sys.stderr)
    for q, a in exceptional:
        print(f"{q:>6} {a:>6}  yes", file=sys.stderr)
    log.info("%d prime powers up to %d: %d certified, %d exceptional pairs",
             len(qs), n, len(certified), len(exceptional))
    return EXIT_BUDGET if over else EXIT_OK


def verify_file(path: str, workers: int = 1) -> tuple[bool, str]:
    """Recheck every section of a certificate file; (ok, message)."""
    with open(path, encoding="utf-8", newline="") as fh:
        sections = read_sections(iter_records(fh))
    if not sections:
        raise MalformedRecord(1, "no field record")
    total = 0
    for sec in sections:
        h = sec.header
        ctx = VerifyContext.from_header(h)
        ws = [w for _, w in sec.witnesses]
        ok = verify_batch(h, ws, ctx)
        for (line, w), good in zip(sec.witnesses, ok):
            if not good:
                return False, f"q={h.q} a={w.a}: witness fails (line {line})"
        seen = set()
        for line, w in sec.witnesses:
            if w.a in seen:
                return False, f"q={h.q} a={w.a}: duplicate witness (line {line})"
            seen.add(w.a)
        for x in sec.exceptions:
            if not x.exhaustive:
                continue
            if h.q**3 > BRUTE_FORCE_CAP:
                return False, f"q={h.q} a={x.failing_a}: exception too large to recheck"
            from .gf import build_tower

            tower = build_tower(h.q, h.seed, base_modulus=h.base_modulus,
                                cubic_modulus=h.cubic_modulus)
            found, _ = brute_force(tower, [x.failing_a])
            if found:
                return False, f"q={h.q} a={x.failing_a}: claimed exception has a witness"
        st = sec.status or {}
        if st.get("status") == "certified":
            wanted = set(range(h.q)) if st.get("targets") is None else set(st["targets"])
            missing = sorted(wanted - seen)
            if missing:
                return False, f"q={h.q} a={missing[0]}: certified but no witness"
        total += len(ws)
    return True, f"ok: {total} witnesses in {len(sections)} field section(s)"


def cmd_verify(args) -> int:
    try:
        ok, msg = verify_file(args.file, args.workers)
    except MalformedRecord as exc:
        raise UsageError(f"{args.file}: malformed, {exc}") from None
    print(msg)
    return EXIT_OK if ok else EXIT_EXCEPTIONS


COMMANDS = {"scan": cmd_scan, "test": cmd_test, "verify": cmd_verify,
            "exceptions": cmd_exceptions}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    for name, default in (("workers", None), ("format", "jsonl"), ("out", None),
                          ("log", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        args.workers = resolve_workers(args.workers)
        _setup_logging(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"primtrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, FactorizationBudgetExceeded) as exc:
        print(f"primtrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
