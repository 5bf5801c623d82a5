#!/usr/bin/env python3
"""Convert public sentence-pair corpora to the tab-separated training format.

Output lines are ``label<TAB>sentence_a<TAB>sentence_b`` with a fourth
``group`` column for answer ranking. Tabs and newlines inside sentences become
spaces. Records are written in input order; nothing is filtered except header
rows, so SNLI pairs without a gold label stay as ``-`` for the reader to count.

    snli     snli_1.0_{train,dev,test}.jsonl          gold_label, sentence1, sentence2
    scitail  tsv_format/scitail_1.0_*.tsv              premise, hypothesis, entails|neutral
    quora    quora_duplicate_questions.tsv (header)     or split files: label, q1, q2, id
    wikiqa   WikiQA-{train,dev,test}.tsv (header)      QuestionID, Question, ..., Sentence, Label
"""

import argparse
import csv
import json
import sys


def clean(text):
    return " ".join(str(text).replace("\t", " ").replace("\r", " ").replace("\n", " ").split())


def snli(handle):
    for line in handle:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        yield record["gold_label"], record["sentence1"], record["sentence2"]


def scitail(handle):
    for row in csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE):
        if len(row) < 3:
            continue
        premise, hypothesis, label = row[0], row[1], row[2]
        yield label.strip(), premise, hypothesis


def quora(handle):
    reader = csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_MINIMAL)
    for row in reader:
        if not row:
            continue
        if row[0] == "id" and "is_duplicate" in row:
            header = {name: i for i, name in enumerate(row)}
            for rec in reader:
                if len(rec) < len(header):
                    continue
                yield rec[header["is_duplicate"]], rec[header["question1"]], rec[header["question2"]]
            return
        if len(row) >= 3:
            yield row[0], row[1], row[2]


def wikiqa(handle):
    reader = csv.DictReader(handle, delimiter="\t", quoting=csv.QUOTE_NONE)
    for rec in reader:
        yield rec["Label"], rec["Question"], rec["Sentence"], rec["QuestionID"]


READERS = {"snli": snli, "scitail": scitail, "quora": quora, "wikiqa": wikiqa}


def convert(task, source, sink):
    count = 0
    for fields in READERS[task](source):
        label, a, b = fields[0], clean(fields[1]), clean(fields[2])
        out = [clean(label), a, b] + [clean(f) for f in fields[3:]]
        sink.write("\t".join(out) + "\n")
        count += 1
    return count


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("task", choices=sorted(READERS))
    parser.add_argument("input", help="original corpus file")
    parser.add_argument("output", help="TSV to write ('-' for stdout)")
    args = parser.parse_args(argv)
    csv.field_size_limit(sys.maxsize)
    with open(args.input, encoding="utf-8", newline="") as source:
        if args.output == "-":
            count = convert(args.task, source, sys.stdout)
        else:
            with open(args.output, "w", encoding="utf-8", newline="\n") as sink:
                count = convert(args.task, source, sink)
    print(f"records={count}", file=sys.stderr)


if __name__ == "__main__":
    main()
