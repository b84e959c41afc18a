"""Scripted OCR engine speaking the TSV protocol, for exercising the subprocess path.

    python -m plateloc.mock_engine --script boxes.tsv IMAGE.png

prints the script's lines unchanged (after validating them) and ignores the
image contents.  ``--fail N`` exits with status N instead; ``--garbage``
prints a malformed line.
"""
import argparse
import sys

from .ocr import parse_tsv


def main(argv=None):
    ap = argparse.ArgumentParser(prog="plateloc-mock-engine")
    ap.add_argument("image")
    ap.add_argument("--script", help="TSV file with the boxes to report")
    ap.add_argument("--fail", type=int, default=0)
    ap.add_argument("--garbage", action="store_true")
    ap.add_argument("--sleep", type=float, default=0.0)
    args = ap.parse_args(argv)
    if args.sleep:
        import time
        time.sleep(args.sleep)
    if args.fail:
        print("scripted failure", file=sys.stderr)
        return args.fail
    if args.garbage:
        print("4010 not-a-box")
        return 0
    if args.script:
        with open(args.script, encoding="utf-8") as fh:
            for box in parse_tsv(fh.read()):
                print(box.to_tsv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
