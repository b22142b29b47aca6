"""Record ingestion: text normalization, ICD-to-CCS labeling, filtering, splits.

Input records carry three text fields (chief complaint, discharge diagnosis,
pipe-delimited ICD codes). A clean record is the normalized token list of one
selected text field plus a single CCS label derived from the ICD codes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyCorpus
from .numerics import make_rng

DIGIT_WORDS = {
    "0": "zero",
    "1": "one",
    "2": "two",
    "3": "three",
    "4": "four",
    "5": "five",
    "6": "six",
    "7": "seven",
    "8": "eight",
    "9": "nine",
}

FIELD_KINDS = ("cc", "dd")


@dataclass(frozen=True)
class RawRecord:
    """One ED visit record, stored verbatim as read."""

    cc: str
    dd: str
    icd_field: str
    meta: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CleanRecord:
    """Normalized tokens of the selected field plus the single CCS label."""

    field_kind: str
    tokens: tuple[str, ...]
    label: int


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"split fractions sum to {total}, expected 1.0")


@dataclass
class IngestReport:
    kept: int = 0
    empty_text: int = 0
    empty_icd: int = 0
    unknown_icd: int = 0
    multi_ccs: int = 0
    unknown_codes: dict[str, int] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kept": self.kept,
            "dropped": {
                "empty_text": self.empty_text,
                "empty_icd": self.empty_icd,
                "unknown_icd": self.unknown_icd,
                "multi_ccs": self.multi_ccs,
            },
        }


@dataclass(frozen=True)
class CorpusStats:
    total_records: int
    total_tokens: int
    unique_tokens: int
    min_len: int
    median_len: float
    max_len: int
    q1_len: float
    q3_len: float
    mean_len: float
    sd_len: float


def normalize_text(raw: str) -> list[str]:
    """Tokenize free text into lowercase alphabetic tokens.

    Every non-alphanumeric character separates tokens, each ASCII digit
    becomes its English word as a token of its own (so a digit also splits
    any surrounding letters), and letters are lowercased. Characters outside
    ASCII letters/digits never survive into a token, so the output always
    matches [a-z]+ per token. May be empty.
    """
    tokens: list[str] = []
    buf: list[str] = []

    def flush():
        if buf:
            tokens.append("".join(buf))
            buf.clear()

    for ch in raw:
        if "a" <= ch <= "z":
            buf.append(ch)
        elif "A" <= ch <= "Z":
            buf.append(ch.lower())
        elif "0" <= ch <= "9":
            flush()
            tokens.append(DIGIT_WORDS[ch])
        else:
            flush()
    flush()
    return tokens


def normalize_icd_code(code: str) -> str:
    """Strip punctuation/special characters from an ICD code and lowercase it."""
    return "".join(ch.lower() for ch in code if ch.isascii() and ch.isalnum())


def parse_icd_field(icd_field: str) -> list[str]:
    """Split a pipe-delimited ICD field into normalized code strings."""
    codes = []
    for segment in icd_field.split("|"):
        norm = normalize_icd_code(segment)
        if norm:
            codes.append(norm)
    return codes


def derive_ccs(
    codes: list[str],
    mapping: dict[str, int],
    report: IngestReport | None = None,
) -> set[int]:
    """Map ICD codes to their CCS codes, deduplicated.

    Codes absent from the mapping are skipped; when a report is given they
    are tallied there instead of aborting the run.
    """
    out: set[int] = set()
    for code in codes:
        ccs = mapping.get(code)
        if ccs is None:
            if report is not None:
                report.unknown_codes[code] = report.unknown_codes.get(code, 0) + 1
        else:
            out.add(ccs)
    return out


def filter_records(
    records: list[RawRecord],
    mapping: dict[str, int],
    field_kind: str,
) -> tuple[list[CleanRecord], IngestReport]:
    """Keep records with usable text and exactly one derived CCS code.

    A record is dropped for the first failing check, in order: the selected
    text field normalizes to no tokens (empty_text), the ICD field parses to
    no codes (empty_icd), no parsed code is in the mapping (unknown_icd), or
    more than one distinct CCS code is derived (multi_ccs). Kept plus dropped
    counts always equal the input count.
    """
    if field_kind not in FIELD_KINDS:
        raise ValueError(f"field_kind must be one of {FIELD_KINDS}, got {field_kind!r}")
    report = IngestReport()
    kept: list[CleanRecord] = []
    for rec in records:
        text = rec.cc if field_kind == "cc" else rec.dd
        tokens = normalize_text(text)
        if not tokens:
            report.empty_text += 1
            continue
        codes = parse_icd_field(rec.icd_field)
        if not codes:
            report.empty_icd += 1
            continue
        ccs_set = derive_ccs(codes, mapping, report)
        if not ccs_set:
            report.unknown_icd += 1
            continue
        if len(ccs_set) > 1:
            report.multi_ccs += 1
            continue
        kept.append(CleanRecord(field_kind, tuple(tokens), ccs_set.pop()))
    report.kept = len(kept)
    return kept, report


def split(
    records: list[CleanRecord],
    spec: SplitSpec,
) -> tuple[list[CleanRecord], list[CleanRecord], list[CleanRecord]]:
    """Deterministic shuffle under the spec seed, then contiguous partition.

    Sizes are floor(train_frac*N), floor(val_frac*N), and the remainder.
    """
    n = len(records)
    if n == 0:
        raise EmptyCorpus("cannot split an empty corpus")
    order = make_rng(spec.seed).permutation(n)
    shuffled = [records[i] for i in order]
    n_train = int(spec.train_frac * n)
    n_val = int(spec.val_frac * n)
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


def corpus_stats(records: list[CleanRecord]) -> CorpusStats:
    """Token counts and per-record length statistics.

    Median of an even-length sample is the mean of the middle two, quartiles
    use linear interpolation, and the SD is the population SD.
    """
    import numpy as np

    if not records:
        raise EmptyCorpus("stats require at least one record")
    lengths = np.array([len(r.tokens) for r in records], dtype=np.float64)
    vocab: set[str] = set()
    for r in records:
        vocab.update(r.tokens)
    q1, q3 = np.percentile(lengths, [25.0, 75.0], method="linear")
    return CorpusStats(
        total_records=len(records),
        total_tokens=int(lengths.sum()),
        unique_tokens=len(vocab),
        min_len=int(lengths.min()),
        median_len=float(np.median(lengths)),
        max_len=int(lengths.max()),
        q1_len=float(q1),
        q3_len=float(q3),
        mean_len=float(lengths.mean()),
        sd_len=float(lengths.std()),
    )


def load_records_csv(path: str | Path) -> list[RawRecord]:
    """Read a UTF-8 records CSV with header cc,dd,icd; extra columns go to meta."""
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = {"cc", "dd", "icd"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"records file {path} missing columns: {sorted(missing)}")
        for row in reader:
            meta = {k: v for k, v in row.items() if k not in ("cc", "dd", "icd") and v is not None}
            records.append(RawRecord(cc=row["cc"] or "", dd=row["dd"] or "", icd_field=row["icd"] or "", meta=meta))
    return records


def load_ccs_mapping(path: str | Path) -> dict[str, int]:
    """Read a UTF-8 mapping CSV with header icd,ccs; codes normalized on load."""
    mapping: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = {"icd", "ccs"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"mapping file {path} missing columns: {sorted(missing)}")
        for row in reader:
            key = normalize_icd_code(row["icd"])
            if key:
                mapping[key] = int(row["ccs"])
    return mapping
