#!/usr/bin/env python3
"""Convenience converter: raw debate text to the CoNLL-U format the main
toolkit ingests.

Parsing is delegated to a UD pipeline; this script wraps spaCy's German model
when it is installed (`pip install spacy && python -m spacy download
de_core_news_sm`).  Input is plain text, one paragraph per line; speech
metadata is supplied on the command line.
"""

import argparse
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("text", help="plain-text file, one paragraph per line")
    parser.add_argument("--doc-id", required=True)
    parser.add_argument("--speaker", default="")
    parser.add_argument("--party", default="OTHER")
    parser.add_argument("--date", default="")
    parser.add_argument("--model", default="de_core_news_sm")
    args = parser.parse_args()

    try:
        import spacy
    except ImportError:
        print("this converter needs spaCy: pip install spacy && "
              "python -m spacy download de_core_news_sm", file=sys.stderr)
        return 1
    try:
        nlp = spacy.load(args.model)
    except OSError as err:
        print(f"could not load {args.model!r}: {err}", file=sys.stderr)
        return 1

    with open(args.text, encoding="utf-8") as fh:
        paragraphs = [line.strip() for line in fh if line.strip()]

    for segment, paragraph in enumerate(paragraphs):
        print(f"# doc_id = {args.doc_id}")
        print(f"# segment = {segment}")
        print(f"# speaker = {args.speaker}")
        print(f"# party = {args.party}")
        print(f"# date = {args.date}")
        doc = nlp(paragraph)
        for sent in doc.sents:
            tokens = [t for t in sent if not t.is_space]
            index = {t.i: k + 1 for k, t in enumerate(tokens)}
            for t in tokens:
                head = 0 if t.head is t else index[t.head.i]
                print("\t".join([
                    str(index[t.i]), t.text, t.lemma_, t.pos_, "_", "_",
                    str(head), t.dep_, "_", "_",
                ]))
            print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
