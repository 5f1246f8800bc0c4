"""Domain model, CSV ingest, and synthetic fixture generation.

The input table is one row per coded statistical test:

    study_id,test_id,family,statistic,df1,df2,n_total,n1,n2,p_reported,effect_d,year,acpa

UTF-8, comma-separated, `.` decimal separator, literal `NA` (or empty) for
absent fields. `family` is one of t_ind, t_paired, chi2_1, r, F_oneway, Z.
`year` and `acpa` describe the study and must agree across its rows.

Rows that violate record invariants are excluded and reported with their
row number and reasons rather than aborting the parse; the parse only fails
outright if the header is wrong or no row survives.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ParameterError, SchemaError

__all__ = [
    "TestFamily",
    "CodedTest",
    "StudyRecord",
    "AnalysisConfig",
    "Dataset",
    "MccMethod",
    "RowIssue",
    "ParseResult",
    "parse_dataset",
    "parse_dataset_with_report",
    "serialize_dataset",
    "validate_record",
    "generate_synthetic",
]

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "study_id", "test_id", "family", "statistic", "df1", "df2",
    "n_total", "n1", "n2", "p_reported", "effect_d", "year", "acpa",
)

# Reported p-values are clamped to this floor at ingest so downstream
# likelihood ratios stay finite; exports disclose the clamp in metadata.
P_FLOOR = 1e-300


class TestFamily(Enum):
    """Supported test families; values are the CSV wire codes."""

    __test__ = False  # not a pytest class despite the name

    INDEPENDENT_T = "t_ind"
    PAIRED_T = "t_paired"
    CHI_SQUARE_1 = "chi2_1"
    CORRELATION_R = "r"
    ONE_WAY_F = "F_oneway"
    Z_TEST = "Z"


class MccMethod(Enum):
    NONE = "none"
    BONFERRONI = "bonferroni"
    HOLM = "holm"


@dataclass(frozen=True)
class CodedTest:
    """One reported statistical inference tied to a study."""

    study_id: str
    test_id: str
    family: TestFamily
    n_total: int
    statistic: float | None = None
    df1: int | None = None
    df2: int | None = None
    n1: int | None = None
    n2: int | None = None
    p_reported: float | None = None
    effect_d: float | None = None


@dataclass(frozen=True)
class StudyRecord:
    """A study with its coded tests and citation metadata."""

    study_id: str
    year: int
    acpa: float
    tests: tuple[CodedTest, ...]

    def __post_init__(self) -> None:
        if self.acpa < 0:
            raise ParameterError(f"acpa must be >= 0, got {self.acpa}")
        for t in self.tests:
            if t.study_id != self.study_id:
                raise ParameterError(
                    f"test {t.test_id} carries study_id {t.study_id!r}, "
                    f"expected {self.study_id!r}"
                )


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of studies; safe to share across threads."""

    studies: tuple[StudyRecord, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        seen_studies: set[str] = set()
        seen_tests: set[tuple[str, str]] = set()
        for s in self.studies:
            if s.study_id in seen_studies:
                raise ParameterError(f"duplicate study_id {s.study_id!r}")
            seen_studies.add(s.study_id)
            for t in s.tests:
                key = (t.study_id, t.test_id)
                if key in seen_tests:
                    raise ParameterError(f"duplicate (study_id, test_id) {key!r}")
                seen_tests.add(key)

    @property
    def n_tests(self) -> int:
        return sum(len(s.tests) for s in self.studies)

    def iter_tests(self) -> Iterable[CodedTest]:
        for s in self.studies:
            yield from s.tests


@dataclass(frozen=True)
class AnalysisConfig:
    """Grid and correction settings for a full analysis run."""

    alpha: float = 0.05
    thresholds: tuple[float, ...] = (0.2, 0.5, 0.8)
    biases: tuple[float, ...] = (0.0, 0.2, 0.3, 0.8)
    priors: tuple[float, ...] = (0.1, 0.2, 0.5)
    mcc_method: MccMethod = MccMethod.HOLM
    fpr_target: float = 0.05
    smooth_span: float = 0.75
    two_sided: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.fpr_target < 1.0:
            raise ParameterError(f"fpr_target must lie in (0, 1), got {self.fpr_target}")
        if not 0.0 < self.smooth_span <= 1.0:
            raise ParameterError(f"smooth_span must lie in (0, 1], got {self.smooth_span}")
        object.__setattr__(self, "thresholds", tuple(self.thresholds))
        object.__setattr__(self, "biases", tuple(self.biases))
        object.__setattr__(self, "priors", tuple(self.priors))
        if not self.thresholds or any(d <= 0 for d in self.thresholds):
            raise ParameterError(f"thresholds must be positive, got {self.thresholds}")
        if not self.biases or any(not 0.0 <= u <= 1.0 for u in self.biases):
            raise ParameterError(f"biases must lie in [0, 1], got {self.biases}")
        if not self.priors or any(not 0.0 < p < 1.0 for p in self.priors):
            raise ParameterError(f"priors must lie in (0, 1), got {self.priors}")

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "thresholds": list(self.thresholds),
            "biases": list(self.biases),
            "priors": list(self.priors),
            "mcc_method": self.mcc_method.value,
            "fpr_target": self.fpr_target,
            "smooth_span": self.smooth_span,
            "two_sided": self.two_sided,
        }


# ---------------------------------------------------------------------------
# Record validation
# ---------------------------------------------------------------------------

def validate_record(t: CodedTest) -> list[str]:
    """Return the list of violated invariants (empty means the record is ok).

    Total function: never raises on a structurally complete CodedTest.
    """
    violations: list[str] = []
    if t.n_total <= 0:
        violations.append("n_total must be positive")
    for label, n in (("n1", t.n1), ("n2", t.n2)):
        if n is not None and n <= 0:
            violations.append(f"{label} must be positive")
    if (
        t.n1 is not None and t.n2 is not None
        and t.n1 > 0 and t.n2 > 0 and t.n1 + t.n2 != t.n_total
    ):
        violations.append("group sizes do not sum to n_total")
    if t.p_reported is not None and not 0.0 < t.p_reported <= 1.0:
        violations.append("p out of range")
    if t.df1 is not None and t.df1 < 0:
        violations.append("df1 must be nonnegative")
    if t.df2 is not None and t.df2 < 0:
        violations.append("df2 must be nonnegative")

    stat_ok = False
    if t.statistic is not None:
        stat_ok, stat_violations = _statistic_usable(t)
        violations.extend(stat_violations)
    elif t.family is TestFamily.CHI_SQUARE_1 and t.df1 is None:
        # A chi-square record must state its single df even when only p is coded.
        violations.append("missing df")

    p_ok = t.p_reported is not None and 0.0 < t.p_reported <= 1.0
    if not (stat_ok or p_ok or t.effect_d is not None):
        violations.append("no usable evidence (needs statistic with df, p, or effect size)")
    return violations


def _statistic_usable(t: CodedTest) -> tuple[bool, list[str]]:
    """Check family-specific df/range requirements for a present statistic."""
    v: list[str] = []
    fam = t.family
    if fam in (TestFamily.INDEPENDENT_T, TestFamily.PAIRED_T):
        if t.df1 is None:
            v.append("missing df")
    elif fam is TestFamily.CHI_SQUARE_1:
        if t.df1 is None:
            v.append("missing df")
        elif t.df1 != 1:
            v.append("chi-square admits only df1 = 1")
        if t.statistic is not None and t.statistic < 0:
            v.append("chi-square statistic must be nonnegative")
    elif fam is TestFamily.ONE_WAY_F:
        if t.df1 is None:
            v.append("missing df")
        elif t.df1 < 1:
            v.append("F-test requires df1 >= 1")
        if t.statistic is not None and t.statistic < 0:
            v.append("F statistic must be nonnegative")
        if t.df2 is None and t.df1 is not None and t.n_total - (t.df1 + 1) < 1:
            v.append("cannot derive df2 from n_total")
    elif fam is TestFamily.CORRELATION_R:
        if abs(t.statistic or 0.0) >= 1.0:
            v.append("correlation statistic out of range")
        if t.n_total <= 3:
            v.append("correlation requires n_total > 3")
    # Z needs nothing beyond the statistic.
    return not v, v


# ---------------------------------------------------------------------------
# CSV parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RowIssue:
    """One rejected input row with the reasons for its exclusion."""

    row: int
    study_id: str
    test_id: str
    reasons: tuple[str, ...]


@dataclass
class ParseResult:
    dataset: Dataset
    issues: list[RowIssue] = field(default_factory=list)

    @property
    def n_retained(self) -> int:
        return self.dataset.n_tests

    @property
    def n_rejected(self) -> int:
        return len(self.issues)


def _parse_cell(raw: str | None) -> str | None:
    if raw is None:
        return None
    raw = raw.strip()
    if raw == "" or raw == "NA":
        return None
    return raw


def _parse_float(raw: str | None, label: str) -> float | None:
    cell = _parse_cell(raw)
    if cell is None:
        return None
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(f"unparseable {label}: {cell!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{label} must be finite: {cell!r}")
    return value


def _parse_int(raw: str | None, label: str) -> int | None:
    cell = _parse_cell(raw)
    if cell is None:
        return None
    try:
        return int(cell)
    except ValueError:
        raise ValueError(f"unparseable {label}: {cell!r}") from None


def parse_dataset_with_report(source: str | TextIO) -> ParseResult:
    """Parse the documented CSV schema, collecting per-row rejections.

    `source` is CSV text or a text stream. Raises SchemaError when the
    header is missing/wrong or when at least one data row exists but none
    is valid.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: expected the documented header row") from None
    if tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise SchemaError(
            f"bad header: expected {','.join(CSV_COLUMNS)}, got {','.join(header)}"
        )

    issues: list[RowIssue] = []
    seen: set[tuple[str, str]] = set()
    order: list[str] = []
    tests_by_study: dict[str, list[CodedTest]] = {}
    meta_by_study: dict[str, tuple[int, float]] = {}
    n_rows = 0

    for row_num, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        n_rows += 1
        if len(row) != len(CSV_COLUMNS):
            issues.append(RowIssue(row_num, "", "", (f"expected {len(CSV_COLUMNS)} fields, got {len(row)}",)))
            continue
        cells = dict(zip(CSV_COLUMNS, row))
        study_id = _parse_cell(cells["study_id"]) or ""
        test_id = _parse_cell(cells["test_id"]) or ""
        try:
            if not study_id or not test_id:
                raise ValueError("study_id and test_id are required")
            family_code = _parse_cell(cells["family"])
            try:
                family = TestFamily(family_code)
            except ValueError:
                raise ValueError(f"unknown family: {family_code!r}") from None
            n_total = _parse_int(cells["n_total"], "n_total")
            if n_total is None:
                raise ValueError("n_total is required")
            p_reported = _parse_float(cells["p_reported"], "p_reported")
            if p_reported is not None and p_reported > 0.0:
                p_reported = max(p_reported, P_FLOOR)
            test = CodedTest(
                study_id=study_id,
                test_id=test_id,
                family=family,
                n_total=n_total,
                statistic=_parse_float(cells["statistic"], "statistic"),
                df1=_parse_int(cells["df1"], "df1"),
                df2=_parse_int(cells["df2"], "df2"),
                n1=_parse_int(cells["n1"], "n1"),
                n2=_parse_int(cells["n2"], "n2"),
                p_reported=p_reported,
                effect_d=_parse_float(cells["effect_d"], "effect_d"),
            )
            year = _parse_int(cells["year"], "year") or 0
            acpa = _parse_float(cells["acpa"], "acpa")
            acpa = 0.0 if acpa is None else acpa
            if acpa < 0:
                raise ValueError("acpa must be >= 0")
        except ValueError as exc:
            issues.append(RowIssue(row_num, study_id, test_id, (str(exc),)))
            continue

        if (study_id, test_id) in seen:
            issues.append(RowIssue(row_num, study_id, test_id, ("duplicate (study_id, test_id)",)))
            continue
        violations = validate_record(test)
        if violations:
            issues.append(RowIssue(row_num, study_id, test_id, tuple(violations)))
            continue
        if study_id in meta_by_study and meta_by_study[study_id] != (year, acpa):
            issues.append(RowIssue(
                row_num, study_id, test_id,
                ("year/acpa conflict with earlier rows of this study",),
            ))
            continue

        seen.add((study_id, test_id))
        if study_id not in tests_by_study:
            order.append(study_id)
            tests_by_study[study_id] = []
            meta_by_study[study_id] = (year, acpa)
        tests_by_study[study_id].append(test)

    if n_rows > 0 and not tests_by_study:
        raise SchemaError(f"no valid rows: all {n_rows} rows were rejected")

    for issue in issues:
        logger.warning("row %d rejected (%s/%s): %s", issue.row, issue.study_id,
                       issue.test_id, "; ".join(issue.reasons))

    studies = tuple(
        StudyRecord(
            study_id=sid,
            year=meta_by_study[sid][0],
            acpa=meta_by_study[sid][1],
            tests=tuple(tests_by_study[sid]),
        )
        for sid in order
    )
    dataset = Dataset(studies=studies, provenance=f"csv ({n_rows} rows, {len(issues)} rejected)")
    return ParseResult(dataset=dataset, issues=issues)


def parse_dataset(source: str | TextIO) -> Dataset:
    """Parse the documented CSV schema; see `parse_dataset_with_report`."""
    return parse_dataset_with_report(source).dataset


def _fmt(value: float | int | None) -> str:
    if value is None:
        return "NA"
    return repr(value) if isinstance(value, float) else str(value)


def serialize_dataset(ds: Dataset) -> str:
    """Write a Dataset back to the ingest CSV schema (lossless round trip)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for study in ds.studies:
        for t in study.tests:
            writer.writerow([
                t.study_id, t.test_id, t.family.value, _fmt(t.statistic),
                _fmt(t.df1), _fmt(t.df2), _fmt(t.n_total), _fmt(t.n1), _fmt(t.n2),
                _fmt(t.p_reported), _fmt(t.effect_d), _fmt(study.year), _fmt(study.acpa),
            ])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Synthetic fixtures
# ---------------------------------------------------------------------------

def generate_synthetic(
    seed: int,
    n_studies: int,
    tests_per_study: int,
    true_fraction: float,
    effect_d_true: float,
    *,
    families: Sequence[TestFamily] | None = None,
    n_total: int | None = None,
    n_range: tuple[int, int] = (20, 300),
    total_tests: int | None = None,
) -> Dataset:
    """Deterministic synthetic dataset for tests and demos.

    Each test is drawn either under the null or (with probability
    `true_fraction`) under a population effect of size `effect_d_true`;
    statistics are sampled from the family's exact sampling distribution and
    the reported p is recomputed from the statistic, so statistic, p, and
    effect size are mutually consistent. `n_total` pins the sample size,
    `families` restricts the family mix, and `total_tests` distributes a
    fixed total across studies instead of `tests_per_study` each.
    """
    if n_studies <= 0 or tests_per_study <= 0:
        raise ParameterError("n_studies and tests_per_study must be positive")
    if not 0.0 <= true_fraction <= 1.0:
        raise ParameterError(f"true_fraction must lie in [0, 1], got {true_fraction}")
    if effect_d_true <= 0:
        raise ParameterError(f"effect_d_true must be positive, got {effect_d_true}")

    from . import effects  # deferred: effects depends on this module's types

    rng = np.random.Generator(np.random.PCG64(seed))
    family_pool = tuple(families) if families else tuple(TestFamily)
    if total_tests is not None:
        if total_tests < n_studies:
            raise ParameterError("total_tests must be >= n_studies")
        base, extra = divmod(total_tests, n_studies)
        counts = [base + (1 if i < extra else 0) for i in range(n_studies)]
    else:
        counts = [tests_per_study] * n_studies

    studies: list[StudyRecord] = []
    for s_idx in range(n_studies):
        study_id = f"S{s_idx + 1:03d}"
        year = int(rng.integers(2006, 2017))
        acpa = round(float(rng.gamma(2.0, 2.0)), 3)
        tests: list[CodedTest] = []
        for t_idx in range(counts[s_idx]):
            family = family_pool[int(rng.integers(len(family_pool)))]
            n = n_total if n_total is not None else int(rng.integers(n_range[0], n_range[1] + 1))
            is_true = bool(rng.random() < true_fraction)
            d = effect_d_true if is_true else 0.0
            test = _draw_test(rng, study_id, f"T{t_idx + 1:02d}", family, n, d)
            tests.append(test)
        studies.append(StudyRecord(study_id=study_id, year=year, acpa=acpa, tests=tuple(tests)))

    ds = Dataset(studies=tuple(studies), provenance=f"synthetic(seed={seed})")
    # Fill p/effect columns from the sampled statistics.
    filled: list[StudyRecord] = []
    for study in ds.studies:
        new_tests = []
        for t in study.tests:
            p = effects.recompute_p(t, two_sided=True)
            d_est = effects.standardize_effect(t)
            new_tests.append(CodedTest(
                study_id=t.study_id, test_id=t.test_id, family=t.family,
                n_total=t.n_total, statistic=t.statistic, df1=t.df1, df2=t.df2,
                n1=t.n1, n2=t.n2, p_reported=p, effect_d=d_est,
            ))
        filled.append(StudyRecord(study.study_id, study.year, study.acpa, tuple(new_tests)))
    return Dataset(studies=tuple(filled), provenance=ds.provenance)


def _draw_test(
    rng: np.random.Generator,
    study_id: str,
    test_id: str,
    family: TestFamily,
    n: int,
    d: float,
) -> CodedTest:
    """Sample one statistic from the family's (non)central distribution."""
    z = float(rng.standard_normal())
    if family is TestFamily.INDEPENDENT_T:
        n1, n2 = n // 2, n - n // 2
        df = n - 2
        ncp = d * math.sqrt(n1 * n2 / n)
        stat = (z + ncp) / math.sqrt(float(rng.chisquare(df)) / df)
        return CodedTest(study_id, test_id, family, n, statistic=stat, df1=df, n1=n1, n2=n2)
    if family is TestFamily.PAIRED_T:
        df = n - 1
        ncp = d * math.sqrt(n)
        stat = (z + ncp) / math.sqrt(float(rng.chisquare(df)) / df)
        return CodedTest(study_id, test_id, family, n, statistic=stat, df1=df)
    if family is TestFamily.CHI_SQUARE_1:
        w = d / math.sqrt(d * d + 4.0)
        lam = n * w * w
        stat = (z + math.sqrt(lam)) ** 2
        return CodedTest(study_id, test_id, family, n, statistic=stat, df1=1)
    if family is TestFamily.CORRELATION_R:
        rho = d / math.sqrt(d * d + 4.0)
        z_obs = math.atanh(rho) + z / math.sqrt(n - 3)
        stat = math.tanh(z_obs)
        return CodedTest(study_id, test_id, family, n, statistic=stat)
    if family is TestFamily.ONE_WAY_F:
        k = int(rng.integers(2, 4))
        df1, df2 = k - 1, n - k
        lam = n * (d / 2.0) ** 2
        num = float(rng.noncentral_chisquare(df1, lam)) if lam > 0 else float(rng.chisquare(df1))
        stat = (num / df1) / (float(rng.chisquare(df2)) / df2)
        return CodedTest(study_id, test_id, family, n, statistic=stat, df1=df1, df2=df2)
    n1, n2 = n // 2, n - n // 2
    stat = z + d * math.sqrt(n1 * n2 / n)
    return CodedTest(study_id, test_id, family, n, statistic=stat, n1=n1, n2=n2)
