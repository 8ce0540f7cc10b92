"""Study progression: ordered task sets, label-order balancing, questionnaires.

One pass of the study walks the fixed step sequence
Q0, P, B_R, B_DR, L_DR, Q1, L_R, Q2 — baseline sets introduce the interface
and the placement method, labelled sets test the pass's label family with
and without informative placement, and the questionnaires collect
demographics (Q0) and strategy/helpfulness ratings (Q1, Q2).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .config import TaskCounts
from .errors import ParameterError
from .scene import derive_seed

LABEL_FAMILIES = ("shape", "color", "texture")
LABEL_ORDERS = tuple(permutations(LABEL_FAMILIES))  # canonical order, 6 entries

STEP_SEQUENCE = ("Q0", "P", "B_R", "B_DR", "L_DR", "Q1", "L_R", "Q2")

# (placement_mode, uses pass label family, phase) per task-set code.
TASK_SET_CONDITIONS = {
    "P": ("random", False, "practice"),
    "B_R": ("random", False, "evaluation"),
    "B_DR": ("dr", False, "familiarization"),
    "L_DR": ("dr", True, "familiarization"),
    "L_R": ("random", True, "evaluation"),
}

QUESTIONNAIRE_ITEMS = {
    "Q0": (
        {"id": "age", "prompt": "Your age", "kind": "number"},
        {"id": "years_experience", "prompt": "Years of experience working with sound",
         "kind": "number"},
        {"id": "listening", "prompt": "Listening setup for this session",
         "kind": "choice", "options": ["headphones", "speakers", "other"]},
        {"id": "hearing_notes", "prompt": "Any known hearing issues (optional)",
         "kind": "text", "optional": True},
    ),
    "Q1": (
        {"id": "strategy_sequential", "kind": "likert",
         "prompt": "I listened to the samples one by one in a fixed pattern"},
        {"id": "strategy_position", "kind": "likert",
         "prompt": "I used the position of the samples to guide my search"},
        {"id": "strategy_labels", "kind": "likert",
         "prompt": "I used the appearance of the samples to guide my search"},
        {"id": "position_consistent", "kind": "likert",
         "prompt": "Similar sounds were located closer together"},
        {"id": "labels_consistent", "kind": "likert",
         "prompt": "Similar sounds looked similar"},
        {"id": "placement_helpful", "kind": "likert",
         "prompt": "The placement of the samples helped me find the target"},
        {"id": "labels_helpful", "kind": "likert",
         "prompt": "The appearance of the samples helped me find the target"},
        {"id": "difficulty", "kind": "likert",
         "prompt": "Overall, the tasks were difficult"},
        {"id": "comments", "prompt": "Comments (optional)", "kind": "text",
         "optional": True},
    ),
}
QUESTIONNAIRE_ITEMS["Q2"] = QUESTIONNAIRE_ITEMS["Q1"]


@dataclass(frozen=True)
class PlanStep:
    code: str                 # Q0 | P | B_R | B_DR | L_DR | Q1 | L_R | Q2
    kind: str                 # "questionnaire" | "task_set"
    placement_mode: str | None = None
    label_mode: str | None = None
    phase: str | None = None
    task_ids: tuple[str, ...] = ()
    task_seeds: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = {"code": self.code, "kind": self.kind}
        if self.kind == "task_set":
            d.update(placement_mode=self.placement_mode, label_mode=self.label_mode,
                     phase=self.phase, task_ids=list(self.task_ids))
        return d


@dataclass(frozen=True)
class StudyPlan:
    participant_id: str
    pass_no: int
    label_mode: str
    steps: tuple[PlanStep, ...]
    master_seed: int

    def to_dict(self) -> dict:
        return {"participant_id": self.participant_id, "pass": self.pass_no,
                "label_mode": self.label_mode,
                "steps": [s.to_dict() for s in self.steps]}

    def task_steps(self) -> list[PlanStep]:
        return [s for s in self.steps if s.kind == "task_set"]


def order_permutations(participants: int) -> list[tuple[str, str, str]]:
    """Cycle the 6 canonical label orders so assignment counts differ by <= 1."""
    if participants < 1:
        raise ParameterError("participants must be >= 1")
    return [LABEL_ORDERS[i % len(LABEL_ORDERS)] for i in range(participants)]


def validate_participant_id(participant_id: str) -> str:
    if not participant_id or any(c in participant_id for c in ":/\\ \t\n"):
        raise ParameterError(f"invalid participant id {participant_id!r}")
    return participant_id


def task_id_for(participant_id: str, pass_no: int, code: str, index: int) -> str:
    return f"{participant_id}:{pass_no}:{code}:{index}"


def parse_task_id(task_id: str) -> tuple[str, int, str, int]:
    parts = task_id.split(":")
    if len(parts) != 4 or parts[2] not in TASK_SET_CONDITIONS:
        raise ParameterError(f"malformed task id {task_id!r}")
    return parts[0], int(parts[1]), parts[2], int(parts[3])


def make_study_plan(participant_id: str, label_mode: str,
                    counts: TaskCounts | None = None, master_seed: int = 0,
                    pass_no: int = 1) -> StudyPlan:
    """Emit the fixed step sequence with per-task seeds derived from the master seed."""
    validate_participant_id(participant_id)
    if label_mode not in LABEL_FAMILIES:
        raise ParameterError(f"label_mode must be one of {LABEL_FAMILIES}")
    counts = counts or TaskCounts()
    per_set = {"P": 1, **counts.as_dict()}
    steps = []
    task_index = 0
    for code in STEP_SEQUENCE:
        if code.startswith("Q"):
            steps.append(PlanStep(code=code, kind="questionnaire"))
            continue
        placement, uses_label, phase = TASK_SET_CONDITIONS[code]
        n_tasks = per_set[code.lower()] if code != "P" else 1
        ids, seeds = [], []
        for _ in range(n_tasks):
            ids.append(task_id_for(participant_id, pass_no, code, task_index))
            seeds.append(derive_seed(master_seed, participant_id, pass_no, code, task_index))
            task_index += 1
        steps.append(PlanStep(
            code=code, kind="task_set", placement_mode=placement,
            label_mode=label_mode if uses_label else "baseline", phase=phase,
            task_ids=tuple(ids), task_seeds=tuple(seeds)))
    return StudyPlan(participant_id=participant_id, pass_no=pass_no,
                     label_mode=label_mode, steps=tuple(steps), master_seed=master_seed)


def validate_questionnaire(questionnaire: str, answers: dict) -> dict:
    """Check answer types/ranges against the questionnaire's item definitions."""
    if questionnaire not in QUESTIONNAIRE_ITEMS:
        raise ParameterError(f"unknown questionnaire {questionnaire!r}")
    items = {item["id"]: item for item in QUESTIONNAIRE_ITEMS[questionnaire]}
    clean = {}
    for key, value in answers.items():
        if key not in items:
            raise ParameterError(f"unknown item {key!r} for {questionnaire}")
        kind = items[key]["kind"]
        if kind == "likert":
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise ParameterError(f"item {key!r} must be a Likert value in [1, 5]")
        elif kind == "number":
            if not isinstance(value, (int, float)) or value < 0:
                raise ParameterError(f"item {key!r} must be a nonnegative number")
        elif kind == "choice":
            if value not in items[key]["options"]:
                raise ParameterError(f"item {key!r} must be one of {items[key]['options']}")
        elif kind == "text" and not isinstance(value, str):
            raise ParameterError(f"item {key!r} must be text")
        clean[key] = value
    for key, item in items.items():
        if key not in clean and not item.get("optional") and item["kind"] != "text":
            raise ParameterError(f"missing required item {key!r}")
    return clean
