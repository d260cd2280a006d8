"""Pure numpy implementations of the cellwise kernels.

These are the reference versions; ``_ckernels`` must agree with them to
rounding.  Law codes: 0 = quadratic cost with box, 1 = binary (u fixed to 1).
"""
import numpy as np

QUADRATIC_BOX = 0
BINARY = 1


def p1_triplets(nodes, cells):
    """COO triplets of the P1 stiffness and consistent mass matrices."""
    nodes = np.asarray(nodes, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    p = nodes[cells]
    # b_i = y_j - y_k, c_i = x_k - x_j over cyclic (i, j, k)
    b = np.roll(p[:, :, 1], -1, axis=1) - np.roll(p[:, :, 1], -2, axis=1)
    c = np.roll(p[:, :, 0], -2, axis=1) - np.roll(p[:, :, 0], -1, axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    k = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    m = (np.ones((3, 3)) + np.eye(3))[None, :, :] * (area / 12.0)[:, None, None]
    rows = np.repeat(cells, 3, axis=1).ravel()
    cols = np.tile(cells, (1, 3)).ravel()
    return rows, cols, k.ravel(), m.ravel()


def pointwise_minimizer(p, alpha, ua, ub):
    return np.clip(-np.asarray(p, dtype=float) / alpha, ua, ub)


def hbar(p, law, alpha, ua, ub):
    p = np.asarray(p, dtype=float)
    if law == BINARY:
        return p.copy()
    u = np.clip(-p / alpha, ua, ub)
    return p * u + 0.5 * alpha * u * u


def topo_derivative(p, in_set, beta, law, alpha, ua, ub):
    """Return ``(dj, rho)`` with ``dj = sign * (beta + hbar(p))``, sign -1 on the set."""
    val = np.asarray(beta, dtype=float) + hbar(p, law, alpha, ua, ub)
    dj = np.where(np.asarray(in_set, dtype=bool), -val, val)
    rho = np.minimum(dj, 0.0)
    return dj, rho


def box_residual(u, p, mask, alpha, ua, ub):
    """Sup-norm of ``u - clip(-p/alpha)`` over the masked cells."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0.0
    r = np.asarray(u)[mask] - np.clip(-np.asarray(p)[mask] / alpha, ua, ub)
    return float(np.max(np.abs(r)))
