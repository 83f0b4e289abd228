"""Index of a rotating Lagrangian against a fixed one, for a few winding rates.

The moving plane is the graph of exp(2 pi i k s) I, so the index should
be k * n on C^{2n}.
"""

import numpy as np

from maslovflow import maslov


def rotating(k, n):
    j = 1j * np.kron(np.diag([1.0, -1.0]), np.eye(n))
    fixed = np.vstack([np.eye(n), np.eye(n)])

    def lam(s):
        return np.vstack([np.eye(n),
                          np.exp(2j * np.pi * k * s) * np.eye(n)])

    return maslov.PairPath.from_parts(j, lam, fixed, (0.0, 1.0))


def main():
    for n in (1, 2):
        for k in range(-2, 3):
            idx, rep = maslov.maslov_index(rotating(k, n))
            print(f"n={n} k={k:+d}: mas={idx:+d} "
                  f"(expected {k * n:+d}, {len(rep.partition) - 1} segments)")
            assert idx == k * n


if __name__ == "__main__":
    main()
