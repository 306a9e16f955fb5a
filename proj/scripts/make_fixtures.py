#!/usr/bin/env python3
"""Regenerates the fixtures/ tree (bundled prompt sets, reference tables,
demo datasets, and the scripted demo config). Run from the repo root:

    python3 scripts/make_fixtures.py
"""

import csv
import json
import os

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIX = os.path.join(ROOT, "fixtures")


def write_json(relpath, payload):
    path = os.path.join(FIX, relpath)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)
        f.write("\n")


def write_text(relpath, text):
    path = os.path.join(FIX, relpath)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def write_jsonl(relpath, rows):
    path = os.path.join(FIX, relpath)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


# ---- Bundled candidate prompt sets -------------------------------------------

GOOGLE_RE_PROMPTS = {
    "PlaceOfBirth": [
        "What is the birthplace of [X]?",
        "Where was [X] born?",
        "In which city or town was [X] born?",
        "What is the native place of [X]?",
        "Could you provide the birth location of [X]?",
        "From where does [X] originate?",
        "What is the hometown of [X]?",
        "Where did [X] come into the world?",
        "What is the birth country of [X]?",
        "Can you tell me the exact location where [X] was born?",
    ],
    "PlaceOfDeath": [
        "Where did [X] pass away?",
        "What was the location of [X]'s death?",
        "In which city or town did [X] breathe their last?",
        "Can you provide the place where [X] died?",
        "What is the final resting place of [X]?",
        "Where was [X] when they passed away?",
        "What was the location of [X]'s demise?",
        "Could you tell me where [X] met their end?",
        "Where did [X] take their last breath?",
        "What was the place of departure for [X]?",
    ],
    "DateOfBirth": [
        "When was [X] born?",
        "What is the birth date of [X]?",
        "Can you provide the date of birth for [X]?",
        "When did [X] come into the world?",
        "What day and month was [X] born?",
        "When did [X] celebrate their birthday?",
        "What is [X]'s birth year?",
        "Can you tell me the exact date when [X] was born?",
        "When did [X] first open their eyes to the world?",
        "What is [X]'s date of birth according to records?",
    ],
}

# Best-performing prompt per relation on the gpt-3.5 reference runs.
GOOGLE_RE_OPTIMAL = {"PlaceOfBirth": 2, "PlaceOfDeath": 2, "DateOfBirth": 8}

NLI_GENERATED = [
    "Can [H] be inferred from [P]?",
    "Does [P] entail [H]?",
    "Is it true that [P] leads to [H]?",
    "Is [H] a necessary consequence of [P]?",
    "Do we conclude [H] from [P]?",
    "If [P] is true, must [H] also be true?",
    "Does the truth of [P] guarantee the truth of [H]?",
    "Is [H] a logical consequence of [P]?",
    "Can we derive [H] from [P]?",
    "Is [H] implied by [P]?",
]

# Expert-written entailment prompts from prior work, normalized to the
# [P]/[H] slot convention used throughout this repo.
NLI_MANUAL = [
    "If [P], then [H].",
    "[P], so [H].",
    "[P] entails [H]",
    "[P], which means that [H].",
    "[H], because [P].",
]


def candidate_set(task, relation_id, relation_name, texts, origin):
    return {
        "schema_version": 1,
        "task": task,
        "relation_id": relation_id,
        "relation_name": relation_name,
        "templates": [
            {"index": i, "text": t, "origin": origin} for i, t in enumerate(texts)
        ],
    }


for relation, prompts in GOOGLE_RE_PROMPTS.items():
    write_json(
        f"candidates/{relation}.candidates.json",
        candidate_set("qa", relation, relation, prompts, "generated"),
    )
write_json(
    "candidates/nli_generated.candidates.json",
    candidate_set("nli", "entailment", "entailment", NLI_GENERATED, "generated"),
)
write_json(
    "candidates/nli_manual.candidates.json",
    candidate_set("nli", "entailment", "entailment", NLI_MANUAL, "manual"),
)

# ---- Reference optimal-prompt table (t-rex, 41 relations x 5 models) ----------

# relation -> (llama-2-7b, llama-2-13b, vicuna-7b, vicuna-13b, gpt-3.5)
TREX_OPTIMA = {
    "P19": (2, 2, 2, 2, 2),
    "P20": (2, 2, 2, 2, 2),
    "P279": (3, 3, 8, 8, 8),
    "P37": (1, 1, 1, 1, 1),
    "P413": (0, 0, 0, 0, 0),
    "P449": (0, 0, 0, 0, 0),
    "P47": (8, 8, 8, 8, 3),
    "P138": (0, 6, 6, 6, 6),
    "P364": (1, 1, 1, 1, 1),
    "P54": (0, 0, 0, 0, 0),
    "P463": (1, 1, 1, 1, 1),
    "P101": (6, 2, 2, 2, 0),
    "P106": (3, 4, 2, 2, 2),
    "P527": (1, 0, 3, 0, 0),
    "P530": (0, 0, 0, 0, 0),
    "P176": (3, 3, 1, 1, 0),
    "P27": (3, 3, 3, 3, 3),
    "P407": (0, 0, 0, 0, 0),
    "P30": (0, 0, 0, 0, 0),
    "P178": (0, 0, 1, 1, 1),
    "P1376": (1, 0, 0, 0, 2),
    "P131": (6, 6, 6, 6, 6),
    "P1412": (0, 0, 0, 0, 0),
    "P108": (1, 1, 1, 1, 1),
    "P136": (6, 5, 1, 3, 3),
    "P39": (2, 2, 2, 2, 2),
    "P264": (2, 2, 2, 2, 2),
    "P276": (0, 2, 0, 0, 0),
    "P937": (3, 3, 3, 3, 3),
    "P140": (0, 0, 0, 0, 0),
    "P1303": (1, 1, 1, 1, 1),
    "P127": (0, 0, 0, 0, 0),
    "P103": (2, 2, 2, 2, 2),
    "P190": (2, 2, 2, 2, 2),
    "P1001": (2, 2, 0, 0, 4),
    "P31": (0, 0, 0, 0, 0),
    "P495": (5, 5, 5, 5, 5),
    "P159": (0, 2, 0, 2, 2),
    "P36": (0, 0, 2, 0, 0),
    "P740": (2, 2, 2, 2, 2),
    "P361": (0, 0, 0, 0, 0),
}

MODELS = ["llama-2-7b", "llama-2-13b", "vicuna-7b", "vicuna-13b", "gpt-3.5"]

os.makedirs(os.path.join(FIX, "tables"), exist_ok=True)
with open(os.path.join(FIX, "tables", "trex_optima.csv"), "w", newline="") as f:
    writer = csv.writer(f)
    writer.writerow(
        ["dataset", "relation", "prompt_index", "model", "correct", "total", "accuracy"]
    )
    for relation, optima in TREX_OPTIMA.items():
        for model, optimal in zip(MODELS, optima):
            for prompt in range(10):
                correct = 1 if prompt == optimal else 0
                writer.writerow(
                    ["t-rex", relation, prompt, model, correct, 1, f"{correct:.6f}"]
                )

# ---- Reference eval summaries (selected vs oracle accuracy per dataset) -------

SUMMARIES = {
    "google_re": (2606, 2781),
    "t_rex": (6763, 7130),
    "levy_holt": (5874, 6400),
}
DATASET_IDS = {"google_re": "google-re", "t_rex": "t-rex", "levy_holt": "levy-holt"}

for stem, (selected, oracle) in SUMMARIES.items():
    for role, correct in (("selected", selected), ("oracle", oracle)):
        write_json(
            f"summaries/{stem}.{role}.summary.json",
            {
                "schema_version": 1,
                "dataset": DATASET_IDS[stem],
                "relation": "all",
                "model": "gpt-3.5",
                "prompt_index": 0,
                "role": role,
                "correct": correct,
                "total": 10000,
                "accuracy": correct / 10000,
            },
        )

# ---- Demo dataset + scripted endpoints -----------------------------------------

OBJECT_PREFIX = {"PlaceOfBirth": "City", "PlaceOfDeath": "Town", "DateOfBirth": "Day"}

rows = []
for relation in GOOGLE_RE_PROMPTS:
    for i in range(1, 13):
        rows.append(
            {
                "sub_label": f"Person {i}",
                "obj_label": f"{OBJECT_PREFIX[relation]} {i}",
                "predicate_id": relation,
                "relation_name": relation,
            }
        )
write_jsonl("datasets/google_re_demo.jsonl", rows)

write_jsonl(
    "datasets/levy_holt_sample.jsonl",
    [
        {"premise": "Google bought Youtube", "hypothesis": "Google owns Youtube", "label": True},
        {"premise": "Google owns Youtube", "hypothesis": "Google bought Youtube", "label": False, "direction": "reverse"},
        {"premise": "Aspirin relieves headaches", "hypothesis": "Aspirin treats headaches", "label": True},
        {"premise": "Aspirin treats headaches", "hypothesis": "Aspirin relieves headaches", "label": False, "direction": "reverse"},
        {"premise": "The river flows through Paris", "hypothesis": "The river is located in Paris", "label": True},
        {"premise": "The river is located in Paris", "hypothesis": "The river flows through Paris", "label": False, "direction": "reverse"},
        {"premise": "She wrote the novel", "hypothesis": "She is the author of the novel", "label": True},
        {"premise": "She is the author of the novel", "hypothesis": "She wrote the novel", "label": True},
    ],
)

write_jsonl(
    "datasets/gsm8k_sample.jsonl",
    [
        {
            "question": "Janet's ducks lay 16 eggs per day. She eats 3 and bakes with 4. How many eggs does she sell?",
            "answer": "She uses 3 + 4 = 7 eggs.\nShe sells 16 - 7 = 9 eggs.\n#### 9",
        },
        {
            "question": "A robe takes 2 bolts of blue fiber and half that much white fiber. How many bolts in total?",
            "answer": "Half of 2 is 2 / 2 = 1 bolt.\nTotal is 2 + 1 = 3 bolts.\n#### 3",
        },
        {
            "question": "A store sold 12 crates of 85 apples each. How many apples were sold?",
            "answer": "12 * 85 = 1,020 apples.\n#### 1020",
        },
    ],
)

write_jsonl(
    "datasets/retrieved_docs_sample.jsonl",
    [
        {
            "question_id": "q1",
            "documents": [
                "The town hall was built in 1887 by local masons.\n\n"
                "Its clock tower, added a decade later, houses four bronze bells.\n\n"
                "The architect of the clock tower was Matilda Greer, whose notes survive in the county archive.",
                "Market day has been held on Saturdays since the founding charter.",
            ],
            "source_urls": ["https://example.org/townhall", "https://example.org/market"],
        },
        {
            "question_id": "q2",
            "documents": [
                "Short note.\n\nThe chemistry prize that year went to a team studying catalysis on copper surfaces.",
            ],
        },
    ],
)


def numbered(prompts):
    return "\n".join(f"{i + 1}. {p}" for i, p in enumerate(prompts))


# Scripted stand-ins: the generator replays the bundled prompt lists; the
# selector and target answer correctly only for odd-numbered subjects asked
# via each relation's planted best template, so selection has something real
# to find. Replies echo the subject number, matching the demo dataset's gold
# objects.
PLANTED = {
    "PlaceOfBirth": (
        r"^In which city or town was Person (\d*[13579]) born\?$",
        "City $1",
    ),
    "PlaceOfDeath": (
        r"^In which city or town did Person (\d*[13579]) breathe their last\?$",
        "Town $1",
    ),
    "DateOfBirth": (
        r"^When did Person (\d*[13579]) first open their eyes to the world\?$",
        "Day $1",
    ),
}

answer_rules = [
    {"match": "regex", "pattern": pattern, "reply": reply}
    for pattern, reply in PLANTED.values()
]

demo_config = {
    "schema_version": 1,
    "endpoints": [
        {
            "id": "gen",
            "kind": "scripted",
            "model_name": "scripted-generator",
            "scripted": {
                "rules": [
                    {
                        "match": "substring",
                        "pattern": relation,
                        "reply": numbered(prompts),
                    }
                    for relation, prompts in GOOGLE_RE_PROMPTS.items()
                ],
                "default_reply": "I cannot help with that.",
            },
        },
        {
            "id": "selector",
            "kind": "scripted",
            "model_name": "scripted-selector",
            "max_concurrency": 8,
            "scripted": {"rules": answer_rules, "default_reply": "I am not sure."},
        },
        {
            "id": "target",
            "kind": "scripted",
            "model_name": "scripted-target",
            "max_concurrency": 8,
            "scripted": {"rules": answer_rules, "default_reply": "I am not sure."},
        },
    ],
    "cache_dir": "demo_cache",
    "dev_size": 4,
    "n_candidates": 10,
    "seed": 7,
}
write_json("configs/demo.json", demo_config)

# ---- Generation instruction wording (kept in sync with the library) ------------

write_text(
    "meta_prompts/qa_generation.txt",
    'Write {n} distinct natural-language question templates asking for the relation "{relation}". '
    "Each question must contain the placeholder [X] exactly once, standing for the subject entity, "
    "and must not contain any other placeholder. Reply with a numbered list, one template per line, "
    "and nothing else.\n",
)
write_text(
    "meta_prompts/nli_generation.txt",
    'Write {n} distinct natural-language question templates asking for the relation "{relation}". '
    "Each question must contain the placeholder [P] exactly once, standing for the premise sentence, "
    "and the placeholder [H] exactly once, standing for the hypothesis sentence. Reply with a "
    "numbered list, one template per line, and nothing else.\n",
)

print("fixtures written to", FIX)
