"""Writes embeddings.txt: small synthetic vectors for the fixture lexicon.

Identity terms cluster by group, related forms sit next to their head,
person nouns sit near `person`, and object nouns near `object`.
"""
import csv
import random

DIM = 8
rng = random.Random(7)


def noise(scale):
    return [rng.gauss(0.0, scale) for _ in range(DIM)]


def near(base, scale):
    return [b + n for b, n in zip(base, noise(scale))]


group_axis = {"RNE": 2, "RELIGION": 3, "SOGIESC": 4}
vectors = {}
person = [0.0] * DIM
person[0] = 1.0
obj = [0.0] * DIM
obj[1] = 1.0
vectors["person"] = person
vectors["people"] = near(person, 0.05)
vectors["object"] = obj
vectors["thing"] = near(obj, 0.05)

with open("lexicon.csv") as f:
    rows = list(csv.DictReader(f))
for row in rows:
    if row["is_head"] != "true":
        continue
    base = [0.0] * DIM
    base[group_axis[row["identity_group"]]] = 1.0
    for word in row["term"].split():
        if word not in vectors:
            vectors[word] = near(base, 0.6)
for row in rows:
    if row["is_head"] == "true":
        continue
    head = row["head_term"].split()
    for word, head_word in zip(row["term"].split(), head):
        if word not in vectors:
            vectors[word] = near(vectors[head_word], 0.05)

with open("person_nouns.txt") as f:
    for line in f:
        word = line.strip()
        if word and not word.startswith("#") and word not in vectors:
            vectors[word] = near(person, 0.2)

for word in ["car", "cars", "board", "community", "rights", "culture", "music", "flag",
             "coffee", "cat", "house", "wine", "paint", "food", "sky", "line"]:
    vectors[word] = near(obj, 0.2)

with open("embeddings.txt", "w") as f:
    f.write(f"{len(vectors)} {DIM}\n")
    for word in sorted(vectors):
        f.write(word + " " + " ".join(f"{x:.6f}" for x in vectors[word]) + "\n")
