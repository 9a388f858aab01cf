#!/usr/bin/env python3
"""Write the bundled scikit-learn copies of Iris and Digits to data/*.csv.

Both datasets ship inside the scikit-learn wheel, so no network access is needed.
"""
import csv
import pathlib

from sklearn import datasets

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def export(name, bunch, label_names, feature_names):
    OUT.mkdir(exist_ok=True)
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(feature_names) + ["class"])
        for row, target in zip(bunch.data, bunch.target):
            writer.writerow([repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in row]
                            + [label_names[target]])


if __name__ == "__main__":
    iris = datasets.load_iris()
    export("iris", iris, [str(n) for n in iris.target_names],
           ["sepal_length", "sepal_width", "petal_length", "petal_width"])
    digits = datasets.load_digits()
    export("digits", digits, [f"d{n}" for n in digits.target_names],
           [f"px{i}" for i in range(digits.data.shape[1])])
