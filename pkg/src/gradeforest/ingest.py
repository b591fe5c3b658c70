"""Raw grade records to modeling datasets.

A records file holds one row per (student, course) grade. This module
parses it, groups rows into per-student histories, applies the labeling
rules (completion, dropout, exclusion), extracts first-year features and
emits the two modeling datasets:

* completion: one row per non-excluded student, binary label
  completed/dropout;
* major: one row per completed student, label = department with the most
  completed credits.

Labeling rules, all configurable through :class:`LabelRules`:

* a course counts as completed when its grade reaches the pass threshold
  (default 50);
* "completed" students have at least ``completion_credits`` (default 18)
  passed credits in total;
* "dropout" students attempted at least ``min_attempted_credits``
  (default 5), completed fewer than 18, and their last record is followed
  by at least ``gap_semesters`` (default 3) empty calendar semesters
  before the horizon (the latest semester in the file);
* everyone else is excluded, including would-be dropouts too close to the
  horizon to show the full gap (right-censored).

Features come from the first-year window: the shortest semester prefix
reaching 5 attempted credits. Per department there are two slots: total
attempted credits in the window, and the unweighted mean grade over the
window's courses there (0 when the student took none; the paired credit
slot then also reads 0).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import SchemaError

TERMS = ("winter", "summer", "fall")
_TERM_LETTERS = {"w": "winter", "s": "summer", "f": "fall"}

RECORD_COLUMNS = (
    "student_id", "course_title", "department", "semester", "credit_value", "grade"
)


@dataclass(frozen=True, order=True)
class Semester:
    year: int
    term_index: int  # 0 winter, 1 summer, 2 fall

    @property
    def term(self) -> str:
        return TERMS[self.term_index]

    def __str__(self) -> str:
        return f"{self.year}{self.term[0].upper()}"

    def successor(self, count_summer: bool = True) -> "Semester":
        idx = self.term_index + 1
        year = self.year
        if not count_summer and idx == 1:
            idx = 2
        if idx > 2:
            idx = 0
            year += 1
        return Semester(year, idx)


def _resolve_term(term_text: str) -> Optional[str]:
    key = term_text.lower()
    if len(key) == 1:
        return _TERM_LETTERS.get(key)
    for term in TERMS:
        if term.startswith(key):
            return term
    return None


def parse_semester(token: str) -> Semester:
    """Accepts '2004F', '2004 Fall', '2004-F', 'fall 2004' style tokens."""
    text = token.strip()
    for sep in (" ", "-", "_"):
        if sep in text:
            a, b = (part.strip() for part in text.split(sep, 1))
            if a.isdigit():
                year_text, term_text = a, b
            else:
                year_text, term_text = b, a
            break
    else:
        year_text, term_text = text[:-1], text[-1:]
    term = _resolve_term(term_text) if term_text else None
    if not year_text.isdigit() or term is None:
        raise ValueError(f"unrecognized semester {token!r}")
    return Semester(int(year_text), TERMS.index(term))


@dataclass(frozen=True)
class LabelRules:
    pass_threshold: float = 50.0
    min_attempted_credits: float = 5.0
    completion_credits: float = 18.0
    gap_semesters: int = 3
    count_summer: bool = True


DEFAULT_RULES = LabelRules()


@dataclass(frozen=True)
class GradeRecord:
    student_id: str
    course_title: str
    department: str
    semester: Semester
    credit_value: float
    grade: float
    passed: bool


@dataclass(frozen=True)
class StudentHistory:
    student_id: str
    records: tuple[GradeRecord, ...]  # sorted by semester, input order within one

    @property
    def total_attempted_credits(self) -> float:
        return sum(r.credit_value for r in self.records)

    @property
    def total_completed_credits(self) -> float:
        return sum(r.credit_value for r in self.records if r.passed)

    @property
    def last_semester(self) -> Semester:
        return self.records[-1].semester


@dataclass(frozen=True)
class FirstYearWindow:
    records: tuple[GradeRecord, ...]

    @property
    def attempted_credits(self) -> float:
        return sum(r.credit_value for r in self.records)


COMPLETED = "completed"
DROPOUT = "dropout"
EXCLUDED = "excluded"


@dataclass
class RejectedRow:
    line: int
    reason: str
    raw: str


def parse_records(path) -> tuple[list[GradeRecord], list[RejectedRow]]:
    """Parse a records CSV; bad rows land in the rejects list, never dropped.

    The file must carry all six named columns (any order); a missing
    column is a schema error.
    """
    records: list[GradeRecord] = []
    rejects: list[RejectedRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        missing = [c for c in RECORD_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            raw = ",".join(str(row.get(c) or "") for c in RECORD_COLUMNS)
            try:
                records.append(_parse_row(row))
            except ValueError as exc:
                rejects.append(RejectedRow(line=lineno, reason=str(exc), raw=raw))
    return records, rejects


def _parse_row(row: dict) -> GradeRecord:
    student_id = (row.get("student_id") or "").strip()
    if not student_id:
        raise ValueError("missing student_id")
    department = (row.get("department") or "").strip()
    if not department:
        raise ValueError("missing department")
    semester = parse_semester(row.get("semester") or "")
    try:
        credit = float(row.get("credit_value") or "")
    except ValueError:
        raise ValueError(f"unparseable credit_value {row.get('credit_value')!r}") from None
    if credit <= 0:
        raise ValueError(f"credit_value out of range: {credit!r}")
    try:
        grade = float(row.get("grade") or "")
    except ValueError:
        raise ValueError(f"unparseable grade {row.get('grade')!r}") from None
    if not 0.0 <= grade <= 100.0:
        raise ValueError(f"grade out of range: {grade!r}")
    return GradeRecord(
        student_id=student_id,
        course_title=(row.get("course_title") or "").strip(),
        department=department,
        semester=semester,
        credit_value=credit,
        grade=grade,
        passed=False,  # filled once the pass threshold is known
    )


def _with_pass_flags(records, rules: LabelRules):
    return [
        GradeRecord(
            student_id=r.student_id,
            course_title=r.course_title,
            department=r.department,
            semester=r.semester,
            credit_value=r.credit_value,
            grade=r.grade,
            passed=r.grade >= rules.pass_threshold,
        )
        for r in records
    ]


def group_histories(records, rules: LabelRules = DEFAULT_RULES) -> list[StudentHistory]:
    """Group records per student, sorted by semester (stable within one)."""
    by_student: dict[str, list[GradeRecord]] = {}
    for rec in _with_pass_flags(records, rules):
        by_student.setdefault(rec.student_id, []).append(rec)
    histories = []
    for student_id in sorted(by_student):
        recs = sorted(by_student[student_id], key=lambda r: r.semester)
        histories.append(StudentHistory(student_id=student_id, records=tuple(recs)))
    return histories


def first_year_window(history: StudentHistory,
                      rules: LabelRules = DEFAULT_RULES) -> FirstYearWindow:
    """Shortest semester prefix reaching ``min_attempted_credits``.

    Falls back to the whole history when the student never reaches the
    threshold (such students are excluded from the datasets anyway).
    """
    included: list[GradeRecord] = []
    cumulative = 0.0
    current: Optional[Semester] = None
    for rec in history.records:
        if current is not None and rec.semester != current \
                and cumulative >= rules.min_attempted_credits:
            break
        current = rec.semester
        included.append(rec)
        cumulative += rec.credit_value
    return FirstYearWindow(records=tuple(included))


def _gap_reaches(last: Semester, horizon: Semester, rules: LabelRules) -> bool:
    """True when >= gap_semesters empty calendar slots fit between
    the last record and the horizon."""
    cursor = last
    empty = 0
    while cursor < horizon:
        cursor = cursor.successor(rules.count_summer)
        if cursor <= horizon:
            empty += 1
        if empty >= rules.gap_semesters:
            return True
    return False


def label_completion(history: StudentHistory, horizon: Semester,
                     rules: LabelRules = DEFAULT_RULES) -> tuple[str, str]:
    """Classify one student; returns (label, reason) for the audit log."""
    completed = history.total_completed_credits
    attempted = history.total_attempted_credits
    if completed >= rules.completion_credits:
        return COMPLETED, (
            f"completed {completed:g} credits >= {rules.completion_credits:g}"
        )
    if attempted < rules.min_attempted_credits:
        return EXCLUDED, (
            f"attempted {attempted:g} credits < {rules.min_attempted_credits:g}"
        )
    if _gap_reaches(history.last_semester, horizon, rules):
        return DROPOUT, (
            f"attempted {attempted:g}, completed {completed:g} < "
            f"{rules.completion_credits:g}, no records for "
            f">= {rules.gap_semesters} semesters after {history.last_semester}"
        )
    return EXCLUDED, (
        f"right-censored: last record {history.last_semester} is within "
        f"{rules.gap_semesters} semesters of the horizon {horizon}"
    )


def label_major(history: StudentHistory,
                rules: LabelRules = DEFAULT_RULES) -> str:
    """Department with the most completed credits; ties to the smaller code."""
    if history.total_completed_credits < rules.completion_credits:
        raise ValueError(
            f"student {history.student_id} is not a completed student"
        )
    totals: dict[str, float] = {}
    for rec in history.records:
        if rec.passed:
            totals[rec.department] = totals.get(rec.department, 0.0) + rec.credit_value
    return min(totals, key=lambda d: (-totals[d], d))


def build_features(window: FirstYearWindow, department_list) -> np.ndarray:
    """Feature vector of width 2 * len(department_list).

    Slot 2d holds attempted credits in department d inside the window,
    slot 2d+1 the unweighted mean grade there (0 with no courses).
    """
    index = {dept: i for i, dept in enumerate(department_list)}
    credits = np.zeros(len(index))
    grade_sums = np.zeros(len(index))
    course_counts = np.zeros(len(index))
    for rec in window.records:
        if rec.department not in index:
            raise ValueError(f"unknown department {rec.department!r}")
        d = index[rec.department]
        credits[d] += rec.credit_value
        grade_sums[d] += rec.grade
        course_counts[d] += 1
    features = np.zeros(2 * len(index))
    features[0::2] = credits
    with np.errstate(invalid="ignore"):
        means = np.where(course_counts > 0, grade_sums / np.maximum(course_counts, 1), 0.0)
    features[1::2] = means
    return features


def feature_names_for(department_list) -> tuple[str, ...]:
    names: list[str] = []
    for dept in department_list:
        names.extend((dept, f"{dept} G"))
    return tuple(names)


@dataclass
class AuditEntry:
    student_id: str
    label: str
    reason: str
    major: Optional[str] = None

    def to_json(self) -> str:
        payload = {"student_id": self.student_id, "label": self.label,
                   "reason": self.reason}
        if self.major is not None:
            payload["major"] = self.major
        return json.dumps(payload)


@dataclass
class CohortResult:
    completion: Dataset
    major: Dataset
    entries: list[AuditEntry]
    counts: dict = field(default_factory=dict)
    horizon: Optional[Semester] = None

    def summary(self) -> str:
        c = self.counts
        return (
            f"students: {sum(c.values())} "
            f"(completed {c.get(COMPLETED, 0)}, dropout {c.get(DROPOUT, 0)}, "
            f"excluded {c.get(EXCLUDED, 0)}); horizon {self.horizon}"
        )


def build_cohort(records, rules: LabelRules = DEFAULT_RULES) -> CohortResult:
    """Label every student and assemble the two modeling datasets.

    Students are processed in student_id order, so reruns on the same file
    are byte-identical. The department list is the sorted set of
    departments seen anywhere in the records.
    """
    histories = group_histories(records, rules)
    departments = sorted({r.department for h in histories for r in h.records})
    names = feature_names_for(departments)
    horizon = max((h.last_semester for h in histories), default=Semester(0, 0))

    completion_rows: list[np.ndarray] = []
    completion_labels: list[int] = []
    major_rows: list[np.ndarray] = []
    major_labels: list[int] = []
    entries: list[AuditEntry] = []
    counts = {COMPLETED: 0, DROPOUT: 0, EXCLUDED: 0}
    major_index = {dept: i for i, dept in enumerate(departments)}

    for history in histories:
        label, reason = label_completion(history, horizon, rules)
        counts[label] += 1
        major: Optional[str] = None
        if label != EXCLUDED:
            window = first_year_window(history, rules)
            features = build_features(window, departments)
            completion_rows.append(features)
            completion_labels.append(0 if label == COMPLETED else 1)
            if label == COMPLETED:
                major = label_major(history, rules)
                major_rows.append(features)
                major_labels.append(major_index[major])
        entries.append(AuditEntry(history.student_id, label, reason, major))

    m = 2 * len(departments)
    completion = Dataset(
        X=np.array(completion_rows, dtype=np.float64).reshape(len(completion_rows), m),
        y=np.array(completion_labels, dtype=np.int64),
        feature_names=names,
        class_names=(COMPLETED, DROPOUT),
    )
    major_data = Dataset(
        X=np.array(major_rows, dtype=np.float64).reshape(len(major_rows), m),
        y=np.array(major_labels, dtype=np.int64),
        feature_names=names,
        class_names=tuple(departments),
    )
    return CohortResult(
        completion=completion,
        major=major_data,
        entries=entries,
        counts=counts,
        horizon=horizon if histories else None,
    )


def write_audit_jsonl(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.to_json() + "\n")
