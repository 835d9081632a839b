"""Named example problems shipped with the package."""
import numpy as np

from .pencil import Pencil

PAPER5X5_B = np.array(
    [
        [0.0, 0.0, 0.0, -2.0, 0.0],
        [0.0, 2.0, -1.0, 2.0, 0.0],
        [0.0, -1.0, -3.0, 3.0, 0.0],
        [-2.0, 2.0, 3.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ]
)
PAPER5X5_C = np.diag([0.0, 0.0, 0.0, 1.0, 2.0])


def paper5x5() -> Pencil:
    """The 5x5 pencil with ``A = I`` whose curves show convergence,
    finite-time blow-up, reappearance and draining."""
    return Pencil(np.eye(5), PAPER5X5_B, PAPER5X5_C)


def random_pencil(rng, d: int, mode: str = "fixed", scale: float = 3.0) -> Pencil:
    """Random pencil of dimension ``d`` with entries in ``[-scale, scale]``.

    ``C`` is PSD of rank between 1 and ``d - 1``. In moving mode ``A`` gets
    a one-dimensional kernel chosen to avoid ``Ker(C)``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    r = int(rng.integers(1, d))
    Fc = rng.uniform(-scale, scale, (d, r))
    C = Fc @ Fc.T
    B = rng.uniform(-scale, scale, (d, d))
    B = 0.5 * (B + B.T)
    if mode == "fixed":
        Fa = rng.uniform(-scale, scale, (d, d))
        A = Fa @ Fa.T + 0.5 * np.eye(d)
    else:
        # kernel direction with a component in range(C)
        w = rng.uniform(-1, 1, d)
        w += Fc[:, 0] / np.linalg.norm(Fc[:, 0])
        w /= np.linalg.norm(w)
        P = np.eye(d) - np.outer(w, w)
        Fa = rng.uniform(-scale, scale, (d, d))
        A = P @ (Fa @ Fa.T + 0.5 * np.eye(d)) @ P
    return Pencil(A, B, C, mode=mode)
