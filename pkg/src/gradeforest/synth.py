"""Seeded synthetic grade-record generator.

Produces record files in the exact ingestion schema, plus a truth file
with each student's intended completion label (and major, for intended
completers). Three scenarios with planted, documented structure:

``default``
    Dropout risk is a linear (well-specified logistic) function of the
    first-semester English mean grade and math credits.
``planted``
    Dropout risk depends only on the mean grade in the low-grading
    department LOWG. Every student takes exactly one 3-credit LOWG
    course, so the "LOWG" credit column is constant and the "LOWG G"
    grade column is the single informative predictor; every other column
    is pure noise.
``xor``
    Dropout risk is driven by the exclusive-or of whether the student
    took math and whether they took physics, plus a weak linear term in
    the English grade. Neither credit column carries any marginal
    signal, so a linear model only sees the weak grade term while a
    tree ensemble can recover the interaction.

Construction guarantees that keep intended labels consistent with the
ingestion rules: every first semester carries at least 5 attempted
credits (so it is exactly the feature window), intended dropouts never
attempt 18 credits in total and stop at least three semesters before the
horizon, and intended completers study six semesters with enough passing
credits to clear the 18-credit bar.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .ingest import GradeRecord, Semester

SCENARIOS = ("default", "planted", "xor")

_MAX_DROPOUT_ATTEMPTED = 17.0  # keeps intended dropouts under the 18-credit bar


@dataclass(frozen=True)
class DepartmentProfile:
    code: str
    mean_grade: float
    sd_grade: float
    mandatory_credits: float = 0.0  # > 0: every student takes one such course
    optional_probability: float = 0.0


# High-grading and low-grading departments on purpose; the grading gap is
# what makes unadjusted grade features interesting.
_PLANTED_DEPTS = (
    DepartmentProfile("LOWG", 58.0, 16.0, mandatory_credits=3.0),
    DepartmentProfile("ENG", 72.0, 9.0, mandatory_credits=2.0),
    DepartmentProfile("ART", 78.0, 8.0, optional_probability=0.5),
    DepartmentProfile("BIO", 70.0, 10.0, optional_probability=0.5),
    DepartmentProfile("CHM", 66.0, 12.0, optional_probability=0.5),
    DepartmentProfile("HIS", 74.0, 9.0, optional_probability=0.5),
)

_XOR_DEPTS = (
    DepartmentProfile("ENG", 65.0, 12.0, mandatory_credits=3.0),
    DepartmentProfile("HIS", 74.0, 9.0, mandatory_credits=2.0),
    DepartmentProfile("MAT", 62.0, 13.0, optional_probability=0.5),
    DepartmentProfile("PHY", 64.0, 12.0, optional_probability=0.5),
)

_DEFAULT_DEPTS = (
    DepartmentProfile("ENG", 65.0, 12.0, mandatory_credits=3.0),
    DepartmentProfile("HIS", 74.0, 9.0, mandatory_credits=2.0),
    DepartmentProfile("BIO", 70.0, 10.0, optional_probability=0.5),
    DepartmentProfile("MAT", 62.0, 13.0, optional_probability=0.5),
    DepartmentProfile("PHY", 64.0, 12.0, optional_probability=0.5),
)

_SCENARIO_DEPTS = {
    "default": _DEFAULT_DEPTS,
    "planted": _PLANTED_DEPTS,
    "xor": _XOR_DEPTS,
}


@dataclass(frozen=True)
class SynthConfig:
    scenario: str = "default"
    n_students: int = 1000
    seed: Optional[int] = None
    dropout_rate: float = 0.3
    signal_strength: float = 2.2
    cohort_years: tuple[int, ...] = (2000, 2001, 2002)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}"
            )
        if self.n_students < 0:
            raise ConfigError("n_students must be >= 0")
        if self.seed is None:
            raise ConfigError("a seed is required; there is no implicit one")
        if not 0.0 < self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must lie strictly between 0 and 1")
        if not self.cohort_years:
            raise ConfigError("cohort_years must not be empty")

    @property
    def departments(self) -> tuple[DepartmentProfile, ...]:
        return _SCENARIO_DEPTS[self.scenario]


@dataclass(frozen=True)
class TruthRow:
    student_id: str
    completion: str  # completed | dropout
    major: str  # department code, empty for dropouts


@dataclass(frozen=True)
class SynthResult:
    records: tuple[GradeRecord, ...]
    truth: tuple[TruthRow, ...]
    intercept: float


@dataclass
class _WindowCourse:
    department: str
    credits: float
    grade: float


def _draw_grade(rng, mean: float, sd: float) -> float:
    return float(np.clip(np.round(rng.normal(mean, sd)), 0.0, 100.0))


def _draw_window(rng, config: SynthConfig) -> list[_WindowCourse]:
    courses = []
    for dept in config.departments:
        if dept.mandatory_credits > 0:
            courses.append(_WindowCourse(
                dept.code, dept.mandatory_credits,
                _draw_grade(rng, dept.mean_grade, dept.sd_grade)))
        elif dept.optional_probability > 0 and rng.random() < dept.optional_probability:
            courses.append(_WindowCourse(
                dept.code, 3.0, _draw_grade(rng, dept.mean_grade, dept.sd_grade)))
    return courses


def _window_score(config: SynthConfig, courses) -> float:
    """Scenario-specific dropout score, before the calibrated intercept."""
    by_dept: dict[str, _WindowCourse] = {c.department: c for c in courses}
    s = config.signal_strength
    if config.scenario == "planted":
        g = by_dept["LOWG"].grade
        return s * (58.0 - g) / 16.0
    if config.scenario == "xor":
        took_mat = "MAT" in by_dept
        took_phy = "PHY" in by_dept
        xor_part = s if took_mat != took_phy else -s
        weak = 0.04 * (65.0 - by_dept["ENG"].grade)
        return xor_part + weak
    # default: linear in the English grade and math credits
    linear = 0.05 * (65.0 - by_dept["ENG"].grade)
    if "MAT" in by_dept:
        linear -= 0.25 * by_dept["MAT"].credits
    return linear


def _calibrate_intercept(scores: np.ndarray, target: float) -> float:
    """Intercept b0 with mean(sigmoid(b0 + score)) = target on this sample."""
    if scores.size == 0:
        return 0.0
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        rate = float(np.mean(1.0 / (1.0 + np.exp(-(mid + scores)))))
        if rate < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _course_title(rng, dept: str) -> str:
    level = 100 * int(rng.integers(1, 5)) + int(rng.integers(0, 20))
    return f"{dept}{level}"


def _record(student_id, title, dept, semester, credits, grade) -> GradeRecord:
    return GradeRecord(
        student_id=student_id, course_title=title, department=dept,
        semester=semester, credit_value=credits, grade=grade,
        passed=grade >= 50.0,
    )


def _completer_semesters(start: Semester) -> list[Semester]:
    """Five study semesters after the first fall: W, S, F, W, S."""
    out = []
    cursor = start
    for _ in range(5):
        cursor = cursor.successor()
        out.append(cursor)
    return out


def generate(config: SynthConfig) -> SynthResult:
    """Deterministic generation; identical config gives identical output."""
    rng = np.random.default_rng(config.seed)
    n = config.n_students
    width = max(4, len(str(max(n, 1))))
    ids = [f"S{i:0{width}d}" for i in range(n)]
    years = np.array(config.cohort_years)[rng.integers(0, len(config.cohort_years), n)] \
        if n else np.array([], dtype=int)

    windows = []
    scores = np.zeros(n)
    for i in range(n):
        courses = _draw_window(rng, config)
        windows.append(courses)
        scores[i] = _window_score(config, courses)

    intercept = _calibrate_intercept(scores, config.dropout_rate)
    probs = 1.0 / (1.0 + np.exp(-(intercept + scores))) if n else scores
    is_dropout = rng.random(n) < probs

    profile_by_code = {d.code: d for d in config.departments}
    major_codes = [d.code for d in config.departments]
    # Uneven archetype weights so the major classes are imbalanced, the
    # way real enrollment is.
    weights = np.array([4.0, 3.0, 2.0] + [1.0] * (len(major_codes) - 3))[:len(major_codes)]
    weights = weights / weights.sum()

    records: list[GradeRecord] = []
    truth: list[TruthRow] = []
    for i in range(n):
        sid = ids[i]
        start = Semester(int(years[i]), 2)
        passed_credits: dict[str, float] = {}
        attempted = 0.0
        for course in windows[i]:
            records.append(_record(sid, _course_title(rng, course.department),
                                   course.department, start,
                                   course.credits, course.grade))
            attempted += course.credits
            if course.grade >= 50.0:
                passed_credits[course.department] = (
                    passed_credits.get(course.department, 0.0) + course.credits)

        if is_dropout[i]:
            if rng.random() < 0.4:
                extra = start.successor()
                for _ in range(int(rng.integers(1, 3))):
                    dept = profile_by_code[major_codes[int(rng.integers(0, len(major_codes)))]]
                    credits = 3.0
                    if attempted + credits > _MAX_DROPOUT_ATTEMPTED:
                        break
                    grade = _draw_grade(rng, dept.mean_grade - 10.0, dept.sd_grade)
                    records.append(_record(sid, _course_title(rng, dept.code),
                                           dept.code, extra, credits, grade))
                    attempted += credits
            truth.append(TruthRow(sid, "dropout", ""))
            continue

        preferred = major_codes[int(rng.choice(len(major_codes), p=weights))]
        for semester in _completer_semesters(start):
            for _ in range(2):
                code = preferred if rng.random() < 0.7 else \
                    major_codes[int(rng.integers(0, len(major_codes)))]
                dept = profile_by_code[code]
                grade = _draw_grade(rng, dept.mean_grade + 6.0, dept.sd_grade * 0.8)
                records.append(_record(sid, _course_title(rng, code), code,
                                       semester, 3.0, grade))
                if grade >= 50.0:
                    passed_credits[code] = passed_credits.get(code, 0.0) + 3.0
        major = min(passed_credits, key=lambda d: (-passed_credits[d], d)) \
            if passed_credits else ""
        truth.append(TruthRow(sid, "completed", major))

    return SynthResult(records=tuple(records), truth=tuple(truth),
                       intercept=intercept)


def _format_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["student_id", "course_title", "department",
                        "semester", "credit_value", "grade"])
        for r in records:
            writer.writerow([r.student_id, r.course_title, r.department,
                             str(r.semester), _format_number(r.credit_value),
                             _format_number(r.grade)])


def write_truth_csv(truth, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["student_id", "completion", "major"])
        for row in truth:
            writer.writerow([row.student_id, row.completion, row.major])
