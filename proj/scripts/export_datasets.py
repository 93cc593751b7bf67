"""Export the small bundled sklearn datasets used by the tests and configs.

Writes data/diabetes.csv (raw, with header) and data/digits/*.pgm
(8x8 grayscale, intensities rescaled from 0..16 to 0..255).
"""
import os
import sys

import numpy as np
from sklearn.datasets import load_diabetes, load_digits

N_DIGITS = 400


def main(root):
    data = os.path.join(root, "data")
    os.makedirs(os.path.join(data, "digits"), exist_ok=True)

    diabetes = load_diabetes(scaled=False)
    with open(os.path.join(data, "diabetes.csv"), "w") as f:
        f.write(",".join(diabetes.feature_names) + "\n")
        for row in diabetes.data:
            f.write(",".join(repr(float(v)) for v in row) + "\n")

    digits = load_digits()
    for i, img in enumerate(digits.images[:N_DIGITS]):
        pix = np.rint(img * 255.0 / 16.0).astype(np.uint8)
        with open(os.path.join(data, "digits", f"{i:04d}.pgm"), "wb") as f:
            f.write(b"P5\n8 8\n255\n")
            f.write(pix.tobytes())


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
