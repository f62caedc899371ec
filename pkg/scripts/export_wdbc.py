"""Write the Wisconsin Diagnostic Breast Cancer data in the UCI ``wdbc.data`` layout.

scikit-learn ships a copy of the dataset; this script re-emits it as
``id,diagnosis,f1..f30`` rows so the library can load it without a network
fetch. The UCI sample ids are not part of that copy, so rows are numbered
1..569 instead.

    python scripts/export_wdbc.py data/wdbc.data
"""

import sys

from sklearn.datasets import load_breast_cancer


def main(path):
    bunch = load_breast_cancer()
    # sklearn encodes malignant as 0 and benign as 1
    codes = {0: "M", 1: "B"}
    with open(path, "w") as fh:
        for i, (row, target) in enumerate(zip(bunch.data, bunch.target), start=1):
            fh.write(",".join([str(i), codes[int(target)]] + [repr(float(v)) for v in row]) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/wdbc.data")
