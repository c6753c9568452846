"""Writes prediction fixtures for the flip-rate report under flips/.

One base model and three treated models score the same 400 documents and
10 counterfactual variants of each. Documents come in four slices of 100:
black, homosexual, gender identity, and untagged. The number of flipped
pairs per slice is planted so the treated-minus-base differences have the
shape of a published comparison; expected.json then records the
differences recomputed from the written files.
"""
import json
import random

THRESHOLD = 0.5
DOCS_PER_SLICE = 100
VARIANTS = 10
SLICES = ["black", "homosexual", "gender identity", None]
BASE_FLIPS = [20, 20, 20, 20]
# extra flips per slice relative to the base model
TREATED = {
    "keyword_ablation": [3, -3, 3, 12],
    "annotation_ablation": [-1, -7, 0, 11],
    "annotation_replacement": [4, -3, 3, 10],
}

rng = random.Random(11)


def doc_id(s, i):
    return f"d{s * DOCS_PER_SLICE + i:04d}"


def score(toxic):
    return round(rng.uniform(0.55, 0.99) if toxic else rng.uniform(0.01, 0.45), 4)


def model(flips_per_slice):
    rows = []
    for s, flips in enumerate(flips_per_slice):
        pairs = [(i, v) for i in range(DOCS_PER_SLICE) for v in range(VARIANTS)]
        flipped = set(rng.sample(pairs, flips))
        for i in range(DOCS_PER_SLICE):
            toxic = rng.random() < 0.3
            rows.append({"doc_id": doc_id(s, i), "score": score(toxic)})
            for v in range(VARIANTS):
                cf_toxic = toxic != ((i, v) in flipped)
                rows.append({"doc_id": doc_id(s, i), "variant_id": v, "score": score(cf_toxic)})
    rng.shuffle(rows)
    return rows


def write(name, rows):
    with open(f"flips/{name}.jsonl", "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def rates(rows, subgroups):
    orig = {r["doc_id"]: r["score"] >= THRESHOLD for r in rows if "variant_id" not in r}
    overall = [0, 0]
    per = {}
    for r in rows:
        if "variant_id" not in r:
            continue
        flip = orig[r["doc_id"]] != (r["score"] >= THRESHOLD)
        overall[0] += 1
        overall[1] += flip
        for g in subgroups.get(r["doc_id"], []):
            c = per.setdefault(g, [0, 0])
            c[0] += 1
            c[1] += flip
    return overall[1] / overall[0], {g: f / n for g, (n, f) in per.items()}


subgroups = {}
with open("flips/subgroups.jsonl", "w") as f:
    for s, name in enumerate(SLICES):
        for i in range(DOCS_PER_SLICE):
            groups = [name] if name else []
            subgroups[doc_id(s, i)] = groups
            f.write(json.dumps({"doc_id": doc_id(s, i), "subgroups": groups}) + "\n")

base = model(BASE_FLIPS)
write("base", base)
base_overall, base_per = rates(base, subgroups)
expected = {"threshold": THRESHOLD, "treated": {}}
for name, extra in TREATED.items():
    rows = model([b + e for b, e in zip(BASE_FLIPS, extra)])
    write(name, rows)
    overall, per = rates(rows, subgroups)
    expected["treated"][name] = {
        "diff_overall": round(overall - base_overall, 6),
        "diff_subgroups": {g: round(per[g] - base_per[g], 6) for g in sorted(per)},
    }
with open("flips/expected.json", "w") as f:
    json.dump(expected, f, indent=2, sort_keys=True)
    f.write("\n")
