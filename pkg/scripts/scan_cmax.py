"""Admissibility scan for the perturbation uv + c * uv(1-u)(1-v)(u-v).

Prints, for a G x G grid, the most negative cell-averaged mixed partial of
the perturbation polynomial and the resulting largest admissible c, then the
continuous bound obtained from the pointwise mixed partial. The discrete
threshold tends to the continuous one from above as G grows; the library
hard-codes the continuous value (C_MAX = 1).

    python scripts/scan_cmax.py [G]
"""

import sys

import numpy as np

from nonexch.copulas import antisymmetric_part


def discrete_threshold(G):
    x = np.linspace(0.0, 1.0, G + 1)
    U, V = np.meshgrid(x, x, indexing="ij")
    A = antisymmetric_part(U, V)
    # G^2 * A-volume of each cell = average mixed partial over the cell
    dens = (A[1:, 1:] - A[:-1, 1:] - A[1:, :-1] + A[:-1, :-1]) * G * G
    worst = max(-dens.min(), dens.max())
    return worst, 1.0 / worst


def pointwise_threshold(G):
    x = np.linspace(0.0, 1.0, G + 1)
    U, V = np.meshgrid(x, x, indexing="ij")
    a = lambda t: t - t * t  # noqa: E731
    da = lambda t: 1.0 - 2.0 * t  # noqa: E731
    mixed = da(U) * da(V) * (U - V) - da(U) * a(V) + a(U) * da(V)
    worst = np.abs(mixed).max()
    return worst, 1.0 / worst


if __name__ == "__main__":
    G = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    w, c = discrete_threshold(G)
    print(f"grid {G}x{G}: max |cell density of A| = {w:.9f}  ->  c_max(discrete) = {c:.9f}")
    w, c = pointwise_threshold(G)
    print(f"pointwise:    max |d2A/dudv|           = {w:.9f}  ->  c_max(continuous) = {c:.9f}")
