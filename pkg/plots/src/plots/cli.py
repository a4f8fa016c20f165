"""plots --csv PATH --fig {6,7,8,9,10} --out PATH"""

import argparse
import sys

from .csvdata import CsvFormatError
from .figures import FigureSpec, render


def main(argv=None):
    ap = argparse.ArgumentParser(prog="plots",
                                 description="render sweep CSVs into figures")
    ap.add_argument("--csv", required=True, help="schema=1 sweep CSV")
    ap.add_argument("--fig", required=True, choices=["6", "7", "8", "9", "10"])
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--log-x", action="store_true", default=None)
    ap.add_argument("--log-y", action="store_true", default=None)
    args = ap.parse_args(argv)
    spec = FigureSpec(kind=f"fig{args.fig}", csv_path=args.csv,
                      out_path=args.out, log_x=args.log_x, log_y=args.log_y)
    try:
        sidecar = render(spec)
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    print(f"{spec.out_path} + {sidecar}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
