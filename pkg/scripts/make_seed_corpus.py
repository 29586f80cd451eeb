"""Regenerates src/eskg/fixtures/seed_corpus.json deterministically."""

from __future__ import annotations

import json
import random
from pathlib import Path

STATEMENTS = {
    "scn-01": {
        "EMP": "I can tell school feels really hard right now.",
        "SUP": "I'm right here with you.",
        "ENC": "You can get through this one morning at a time.",
        "PRA": "Maybe we can think of one small thing that would make mornings easier.",
        "REA": "School won't feel this scary forever.",
    },
    "scn-02": {
        "BLA": "What that classmate does is not your fault.",
        "EMP": "Being picked on hurts, and it makes sense that you're upset.",
        "SUP": "You don't have to face this alone.",
        "PRA": "Telling a grown-up you trust can really help.",
        "APP": "Your friends are lucky to have you around.",
    },
    "scn-03": {
        "EMO": "It's okay to feel angry after a fight.",
        "CON": "At least you two usually find a way back to playing together.",
        "EMP": "Arguing with your sibling can feel really unfair.",
        "PRA": "Taking a little break before talking again can help.",
        "REA": "You and your sibling will work this out.",
    },
    "scn-04": {
        "ENC": "You've prepared, and you can give it your best shot.",
        "EMP": "Feeling nervous before a test is completely understandable.",
        "PRA": "Trying a few slow breaths before the exam can calm the jitters.",
        "REA": "However the exam goes, things will be alright.",
        "PRS": "You're a hard worker, and that shows.",
    },
    "scn-05": {
        "PRA": "Splitting the homework into small pieces can make it lighter.",
        "EMP": "That really does sound like a lot of homework.",
        "ENC": "One page at a time, you'll get there.",
        "CON": "The good news is the weekend is close.",
        "SUP": "We can sit down and look at it together.",
    },
    "scn-06": {
        "EMP": "Feeling scared of a teacher is a heavy thing to carry.",
        "BLA": "Feeling afraid doesn't mean you did anything wrong.",
        "PRA": "Telling your parents how class makes you feel could help.",
        "SUP": "You're not alone with this.",
        "REA": "This will get easier to handle.",
    },
    "scn-07": {
        "APP": "People really do care about you.",
        "EMP": "Feeling left out on the playground really stings.",
        "ENC": "You're brave enough to try joining a game.",
        "CON": "The bright side is every recess is a fresh start.",
        "SUP": "I'll stick with you while this is hard.",
    },
    "scn-08": {
        "EMP": "Missing them so much shows how much you love them.",
        "EMO": "When you miss someone, it's okay to let the tears come.",
        "REA": "You'll be together again before long.",
        "CON": "Until then, there are photos and calls to share.",
        "SUP": "I'm staying right beside you.",
    },
}

PARAPHRASES = [
    ("pp-001", "st-005", "I'm here with you, right now."),
    ("pp-002", "st-016", "It makes sense to feel jittery before a test."),
    ("pp-003", "st-007", "None of what that classmate does is on you."),
]


def main():
    rng = random.Random(7)
    statements = []
    index = {}
    n = 0
    for scenario_id in sorted(STATEMENTS):
        for category in sorted(STATEMENTS[scenario_id]):
            n += 1
            sid = f"st-{n:03d}"
            index[sid] = (scenario_id, category)
            statements.append(
                {
                    "id": sid,
                    "scenario_id": scenario_id,
                    "text": STATEMENTS[scenario_id][category],
                    "category": category,
                    "mean_rating": round(rng.uniform(4.0, 5.0), 2),
                    "sd_rating": round(rng.uniform(0.3, 0.9), 2),
                    "item_kappa": round(rng.uniform(0.5, 1.0), 3),
                    "origin": "crowd",
                    "review": "approved",
                }
            )
    for pid, source, text in PARAPHRASES:
        scenario_id, category = index[source]
        statements.append(
            {
                "id": pid,
                "scenario_id": scenario_id,
                "text": text,
                "category": category,
                "mean_rating": None,
                "sd_rating": None,
                "item_kappa": None,
                "origin": "paraphrase",
                "review": "pending",
            }
        )
    doc = {
        "schema_version": 1,
        "config": {
            "mean_threshold": 3.5,
            "sd_threshold": 1.0,
            "kappa_threshold": 0.4,
            "statements_per_classification_task": 20,
        },
        "report": None,
        "statements": statements,
    }
    out = Path(__file__).resolve().parents[1] / "src" / "eskg" / "fixtures" / "seed_corpus.json"
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(statements)} statements)")


if __name__ == "__main__":
    main()
