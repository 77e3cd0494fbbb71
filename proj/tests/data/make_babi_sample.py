"""Writes babi_qa1_sample.txt: 120 stories in the bAbI task-1 layout.

Layout mirrors qa1_single-supporting-fact: five groups of two statements
followed by a question (with a trailing space before the TAB, as in the
original files). Run from this directory; output is committed.
"""
import random

NAMES = ["Mary", "John", "Sandra", "Daniel"]
PLACES = ["bathroom", "bedroom", "garden", "hallway", "kitchen", "office"]
VERBS = ["moved to", "went to", "journeyed to", "travelled to", "went back to"]

rng = random.Random(20230701)
lines = []
for _ in range(120):
    where = {}
    last_line = {}
    n = 0
    for _group in range(5):
        movers = []
        for _ in range(2):
            n += 1
            who = rng.choice(NAMES)
            dest = rng.choice(PLACES)
            lines.append(f"{n} {who} {rng.choice(VERBS)} the {dest}.")
            where[who] = dest
            last_line[who] = n
            movers.append(who)
        n += 1
        subject = rng.choice(movers)
        lines.append(f"{n} Where is {subject}? \t{where[subject]}\t{last_line[subject]}")

with open("babi_qa1_sample.txt", "w", newline="\n") as f:
    f.write("\n".join(lines) + "\n")
