"""Non-negative least squares by the Lawson-Hanson active-set method."""

from __future__ import annotations

import numpy as np


class NNLSConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.6g})")
        self.residual = residual


def nnls(A: np.ndarray, b: np.ndarray, max_iter: int | None = None) -> tuple[np.ndarray, float]:
    """Solve min_x ||A x - b||_2 subject to x >= 0.

    Returns (x, residual_norm). Raises NNLSConvergenceError if the active-set
    iteration cap is exceeded.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 10 * n * n
    tol = 10.0 * np.finfo(float).eps * max(m, n) * max(1.0, float(np.abs(b).max(initial=1.0)))

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    iters = 0
    while True:
        free = ~passive
        if not free.any() or np.max(w[free]) <= tol:
            break
        j = int(np.flatnonzero(free)[np.argmax(w[free])])
        passive[j] = True
        while True:
            iters += 1
            if iters > max_iter:
                raise NNLSConvergenceError(
                    f"active-set iteration cap {max_iter} exceeded",
                    float(np.linalg.norm(A @ x - b)),
                )
            cols = np.flatnonzero(passive)
            z = np.zeros(n)
            z[cols], *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
            if np.all(z[cols] > tol):
                x = z
                break
            # Step toward z until the first passive coordinate hits zero.
            shrink = cols[z[cols] <= tol]
            alpha = np.min(x[shrink] / (x[shrink] - z[shrink]))
            x = x + alpha * (z - x)
            passive[np.flatnonzero(passive)[x[passive] <= tol]] = False
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))
