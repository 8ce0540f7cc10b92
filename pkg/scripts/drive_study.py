#!/usr/bin/env python3
"""Drive one full study pass against a live service, acting as the client:
fetch the plan, complete every task with the scripted agent, answer the
questionnaires, and check that each submission is accepted.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import requests

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from timbrespace.scene import Scene, TaskSpec
from timbrespace.simulate import run_agent
from timbrespace.study import QUESTIONNAIRE_ITEMS


def default_answers(code):
    answers = {}
    for item in QUESTIONNAIRE_ITEMS[code]:
        if item["kind"] == "likert":
            answers[item["id"]] = 3
        elif item["kind"] == "number":
            answers[item["id"]] = 5
        elif item["kind"] == "choice":
            answers[item["id"]] = item["options"][0]
    return answers


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base", default="http://127.0.0.1:8000")
    parser.add_argument("--participant", default="driver01")
    parser.add_argument("--pass-no", type=int, default=1)
    args = parser.parse_args()

    plan = requests.get(f"{args.base}/api/plan",
                        params={"participant": args.participant,
                                "pass": args.pass_no}, timeout=30).json()
    print(f"plan: label_mode={plan['label_mode']}, "
          f"steps={[s['code'] for s in plan['steps']]}")
    rng = np.random.default_rng(0)
    submitted = 0
    for step in plan["steps"]:
        if step["kind"] == "questionnaire":
            response = requests.post(f"{args.base}/api/questionnaire", json={
                "questionnaire": step["code"], "participant_id": args.participant,
                "pass": args.pass_no, "answers": default_answers(step["code"]),
            }, timeout=30)
            response.raise_for_status()
            continue
        for task_id in step["task_ids"]:
            payload = requests.get(f"{args.base}/api/task/{task_id}", timeout=60).json()
            task = TaskSpec(task_id=payload["task_id"],
                            scene=Scene.from_dict(payload["scene"]),
                            target_id=payload["target_id"],
                            start_corner=payload["start_corner"],
                            phase=payload["phase"])
            # touch the per-sample assets like the browser would
            sid = task.scene.samples[0].id
            requests.get(f"{args.base}/api/audio/{sid}", timeout=30).raise_for_status()
            if task.scene.label_mode == "texture":
                requests.get(f"{args.base}/api/texture/{sid}.png",
                             timeout=60).raise_for_status()
            result = run_agent(task, args.participant, rng)
            response = requests.post(f"{args.base}/api/result",
                                     json=result.to_dict(), timeout=30)
            if response.status_code != 200:
                print(f"FAIL {task_id}: {response.status_code} {response.text}")
                return 1
            submitted += 1
    print(f"submitted {submitted} task results, all accepted")
    return 0


if __name__ == "__main__":
    sys.exit(main())
