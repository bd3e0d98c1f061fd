#!/usr/bin/env python3
"""Expected verdicts for the six-record toy benchmark in exact-match mode.

Answer normalization and boxed extraction are reimplemented here from the
rules: trim, strip one layer of quotes / $ / %, drop a trailing period,
case-fold, collapse whitespace, numeric parse with comma separators, numeric
comparison at relative tolerance 1e-9.

    python3 tests/oracles/benchmark_oracle.py > tests/data/oracles/benchmark.json
"""
import json
import re
import sys

RECORDS = [
    ("num", "What is the height of the tallest bar?", "14", "<think>read the axis</think> \\boxed{14.0}"),
    ("opt", "Which option matches the figure?", "A", "<think>compare</think> \\boxed{A.}"),
    ("color", "What colour is the circle?", "blue", "<think>look</think> \\boxed{Red}"),
    ("sep", "How many units were sold?", "1,000", "<think>sum</think> \\boxed{1000}"),
    ("nobox", "What is the angle at B?", "40", "<think>the angle is 40</think> 40 degrees"),
    ("case", "Which quarter is highest?", "Q1", "<think>scan</think> \\boxed{first} then \\boxed{ q1 }"),
]

NUM = re.compile(r"^[+-]?(\d+(,\d{3})*|\d*)(\.\d+)?$")


def normalize(raw):
    s = raw.strip()
    for a, b in (('"', '"'), ("'", "'"), ("$", "$")):
        if len(s) >= 2 and s[0] == a and s[-1] == b:
            s = s[1:-1].strip()
            break
    if s.endswith("%"):
        s = s[:-1].strip()
    if s.endswith("."):
        s = s[:-1].strip()
    s = " ".join(s.lower().split())
    num = None
    if NUM.match(s) and any(ch.isdigit() for ch in s):
        num = float(s.replace(",", ""))
    return s, num


def boxed(resp):
    i = resp.rfind("\\boxed{")
    if i < 0:
        return None
    depth, j = 1, i + len("\\boxed{")
    start = j
    while j < len(resp) and depth:
        if resp[j] == "{":
            depth += 1
        elif resp[j] == "}":
            depth -= 1
        j += 1
    if depth:
        return None
    inner = resp[start:j - 1]
    return inner if normalize(inner)[0] else None


def equal(a, b):
    (sa, na), (sb, nb) = a, b
    if na is not None and nb is not None:
        return abs(na - nb) <= 1e-9 * max(1.0, abs(na), abs(nb))
    return sa == sb


def main():
    rows = []
    correct = 0
    for rid, q, gold, resp in RECORDS:
        ans = boxed(resp)
        ok = ans is not None and equal(normalize(gold), normalize(ans))
        correct += ok
        rows.append({"id": rid, "question": q, "gold": gold, "response": resp, "correct": ok})
    json.dump({"records": rows, "correct": correct, "total": len(rows), "accuracy": correct / len(rows)},
              sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
