"""Record streams shared by the CLI: scan verdicts and certificates.

Every output file is a sequence of flat records, each tagged by its
``record`` field. jsonl writes one JSON object per line. csv uses one
fixed column set per file kind; string columns are written as they are,
every other cell holds the JSON encoding of its value, and an empty cell
means the record has no such field. Reading either format gives back the
same list of dicts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, TextIO

from . import __version__
from .search import Certificate, CertificateHeader, ExceptionReport, Witness
from .sieve import SieveVerdict

FORMATS = ("jsonl", "csv")

RUN, FIELD, VERDICT, WITNESS, EXCEPTION, BUDGET, STATUS, SUMMARY = (
    "run", "field", "verdict", "witness", "exception", "budget-exceeded", "status", "summary")

SCAN_COLUMNS = (
    "record", "version", "command", "config",
    "q", "p", "e", "criterion", "rule", "ruled_out", "margin_num", "margin_den",
    "factors", "u", "smooth_bound", "split",
    "prime_powers", "survivors_psc", "survivors_mpsc", "composite_survivors",
    "largest_composite_survivor",
)

CERT_COLUMNS = (
    "record", "version", "command", "config",
    "q", "p", "e", "base_modulus", "cubic_modulus", "g", "seed",
    "a", "xi_digits", "construction", "k", "d", "variant", "checks",
    "exhaustive", "tested", "status", "stats", "targets",
    "certified", "exceptional", "budget_exceeded",
)

STRING_FIELDS = frozenset({
    "record", "version", "command", "criterion", "rule", "construction", "variant", "status",
})


class MalformedRecord(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# ---------------------------------------------------------------- digits


def to_digits(n: int, p: int, e: int) -> list[int]:
    """Little-endian base-p digits of a canonical field integer, length e."""
    out = []
    for _ in range(e):
        n, r = divmod(n, p)
        out.append(r)
    if n:
        raise ValueError("value does not fit in e digits")
    return out


def from_digits(digits, p: int) -> int:
    n = 0
    for dgt in reversed(digits):
        if not (isinstance(dgt, int) and 0 <= dgt < p):
            raise ValueError(f"bad digit {dgt!r}")
        n = n * p + dgt
    return n


# ---------------------------------------------------------------- record builders


def run_record(command: str, config: dict) -> dict:
    return {"record": RUN, "version": __version__, "command": command, "config": config}


def verdict_record(v: SieveVerdict, criterion: str) -> dict:
    if v.factors is not None:
        factors, u = v.factors, None
    else:
        factors = v.factors_qm1 * v.partial.smooth_part
        u = v.partial.u
    split = None
    if v.winning_split is not None:
        s = v.winning_split
        split = {"k": list(s.k_primes), "P": list(s.P_primes), "L": list(s.L_primes)}
    m = v.margin
    return {
        "record": VERDICT, "q": v.q, "p": v.p, "e": v.e,
        "criterion": criterion, "rule": v.criterion, "ruled_out": v.ruled_out,
        "margin_num": None if m is None else m.numerator,
        "margin_den": None if m is None else m.denominator,
        "factors": [[p, k] for p, k in factors],
        "u": u,
        "smooth_bound": None if v.partial is None else v.partial.X,
        "split": split,
    }


@dataclass
class ScanTally:
    criterion: str
    prime_powers: int = 0
    survivors: int = 0
    mpsc_only: int = 0
    composite_survivors: int = 0
    largest_composite: int | None = None

    def add(self, v: SieveVerdict) -> None:
        self.prime_powers += 1
        if v.criterion == "MPSC":
            self.mpsc_only += 1
        if not v.ruled_out:
            self.survivors += 1
            if v.e > 1:
                self.composite_survivors += 1
                self.largest_composite = v.q

    def record(self) -> dict:
        if self.criterion == "mpsc":
            psc, mpsc = self.survivors + self.mpsc_only, self.survivors
        else:
            psc, mpsc = self.survivors, None
        return {
            "record": SUMMARY, "criterion": self.criterion,
            "prime_powers": self.prime_powers,
            "survivors_psc": psc, "survivors_mpsc": mpsc,
            "composite_survivors": self.composite_survivors,
            "largest_composite_survivor": self.largest_composite,
        }


def field_record(h: CertificateHeader) -> dict:
    return {
        "record": FIELD, "version": h.version, "q": h.q, "p": h.p, "e": h.e,
        "base_modulus": None if h.base_modulus is None else list(h.base_modulus),
        "cubic_modulus": list(h.cubic_modulus), "g": h.g, "seed": h.seed,
    }


def witness_record(w: Witness, p: int, e: int) -> dict:
    return {
        "record": WITNESS, "q": w.q, "a": w.a,
        "xi_digits": [to_digits(c, p, e) for c in w.xi],
        "construction": w.construction, "k": w.k, "d": w.d, "variant": w.variant,
        "checks": list(w.checks),
    }


def certificate_records(cert: Certificate) -> Iterator[dict]:
    h = cert.header
    yield field_record(h)
    for a in sorted(cert.witnesses):
        yield witness_record(cert.witnesses[a], h.p, h.e)
    for x in sorted(cert.exceptions, key=lambda x: x.failing_a):
        yield {"record": EXCEPTION, "q": x.q, "a": x.failing_a,
               "exhaustive": x.exhaustive, "tested": x.tested}
    for a in sorted(cert.budget_exceeded):
        yield {"record": BUDGET, "q": h.q, "a": a}
    yield {"record": STATUS, "q": h.q, "status": cert.status(),
           "stats": dict(sorted(cert.stats.items())),
           "targets": cert.targets}


# ---------------------------------------------------------------- parsing back


def header_from(rec: dict) -> CertificateHeader:
    bm = rec["base_modulus"]
    return CertificateHeader(
        int(rec["q"]), int(rec["p"]), int(rec["e"]),
        None if bm is None else tuple(int(c) for c in bm),
        tuple(int(c) for c in rec["cubic_modulus"]),
        None if rec["g"] is None else int(rec["g"]),
        int(rec["seed"]), rec["version"])


def witness_from(rec: dict, h: CertificateHeader) -> Witness:
    digits = rec["xi_digits"]
    if len(digits) != 3 or any(len(c) != h.e for c in digits):
        raise ValueError("xi_digits must hold 3 coordinates of e digits")
    xi = tuple(from_digits(c, h.p) for c in digits)
    return Witness(int(rec["q"]), int(rec["a"]), xi, rec["construction"],
                   rec["k"], rec["d"], rec["variant"], tuple(rec.get("checks") or ()))


@dataclass
class CertificateSection:
    header: CertificateHeader
    witnesses: list[tuple[int, Witness]] = field(default_factory=list)  # (line, witness)
    exceptions: list[ExceptionReport] = field(default_factory=list)
    budget_exceeded: list[int] = field(default_factory=list)
    status: dict | None = None


def read_sections(records: Iterable[tuple[int, dict]]) -> list[CertificateSection]:
    """Group certificate records under their field headers."""
    sections: list[CertificateSection] = []
    for line, rec in records:
        kind = rec.get("record")
        try:
            if kind == FIELD:
                sections.append(CertificateSection(header_from(rec)))
                continue
            if kind in (RUN, SUMMARY):
                continue
            if not sections:
                raise ValueError(f"{kind} record before any field record")
            sec = sections[-1]
            if rec.get("q") != sec.header.q:
                raise ValueError("q differs from the field record")
            if kind == WITNESS:
                sec.witnesses.append((line, witness_from(rec, sec.header)))
            elif kind == EXCEPTION:
                sec.exceptions.append(ExceptionReport(
                    sec.header.q, int(rec["a"]), bool(rec["exhaustive"]), int(rec["tested"])))
            elif kind == BUDGET:
                sec.budget_exceeded.append(int(rec["a"]))
            elif kind == STATUS:
                sec.status = rec
            else:
                raise ValueError(f"unknown record kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(line, str(exc)) from None
    return sections


# ---------------------------------------------------------------- formats


def _encode_cell(name: str, value) -> str:
    if name in STRING_FIELDS and isinstance(value, str):
        return value
    return json.dumps(value, separators=(",", ":"))


def _decode_cell(name: str, text: str):
    if name in STRING_FIELDS:
        return text if text != "null" else None
    return json.loads(text)


class RecordWriter:
    """Writes records in jsonl or csv; csv needs the file kind's column set."""

    def __init__(self, out: TextIO, fmt: str, columns: tuple[str, ...]):
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}")
        self.out, self.fmt, self.columns = out, fmt, columns
        if fmt == "csv":
            self._csv = csv.writer(out, lineterminator="\n")
            self._csv.writerow(columns)

    def write(self, rec: dict) -> None:
        if self.fmt == "jsonl":
            self.out.write(json.dumps(rec, separators=(",", ":")) + "\n")
            return
        extra = set(rec) - set(self.columns)
        if extra:
            raise ValueError(f"fields without a csv column: {sorted(extra)}")
        self._csv.writerow([_encode_cell(c, rec[c]) if c in rec else "" for c in self.columns])


def iter_records(stream: TextIO) -> Iterator[tuple[int, dict]]:
    """(line number, record) pairs from a jsonl or csv stream.

    The format is sniffed from the first character: ``{`` means jsonl.
    """
    text = stream.read()
    if text.lstrip().startswith("{"):
        for i, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(i, f"invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "record" not in rec:
                raise MalformedRecord(i, "not a record object")
            yield i, rec
        return
    rows = csv.reader(io.StringIO(text))
    try:
        columns = next(rows)
    except StopIteration:
        return
    for i, row in enumerate(rows, 2):
        if len(row) != len(columns):
            raise MalformedRecord(i, f"expected {len(columns)} cells, got {len(row)}")
        rec = {}
        for name, cell in zip(columns, row):
            if cell == "":
                continue
            try:
                rec[name] = _decode_cell(name, cell)
            except json.JSONDecodeError:
                raise MalformedRecord(i, f"bad value in column {name}") from None
        if "record" not in rec:
            raise MalformedRecord(i, "missing record kind")
        yield i, rec


def fraction_of(rec: dict) -> Fraction | None:
    if rec.get("margin_num") is None:
        return None
    return Fraction(rec["margin_num"], rec["margin_den"])
