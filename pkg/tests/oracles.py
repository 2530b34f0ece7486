"""Independent brute-force oracles used across the test suite.

Everything here is written against the mathematical definitions with plain
loops or direct formulas, deliberately sharing no code with the package:
these are the referees, not the implementation.
"""

import numpy as np


def finite_difference_grad(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of scalar-valued f at x (float64)."""
    x = x.astype(np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2 * h)
    return g


def finite_difference_grad_sampled(f, x: np.ndarray, n_coords: int,
                                   rng: np.random.Generator, h: float = 1e-5):
    """Central differences on a random coordinate subset; returns
    (flat_indices, fd_values)."""
    x = x.astype(np.float64)
    flat = x.reshape(-1)
    idx = rng.choice(flat.size, size=min(n_coords, flat.size), replace=False)
    vals = np.zeros(len(idx))
    for j, i in enumerate(idx):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        vals[j] = (fp - fm) / (2 * h)
    return idx, vals


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max elementwise error relative to the numeric value, floored at 1 so
    near-zero entries are compared absolutely."""
    denom = np.maximum(np.abs(numeric), 1.0)
    return float(np.max(np.abs(analytic - numeric) / denom))


def matmul_triple_loop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, k = a.shape
    k2, p = b.shape
    assert k == k2
    out = np.zeros((m, p), dtype=a.dtype)
    for i in range(m):
        for j in range(p):
            s = 0.0
            for l in range(k):
                s += a[i, l] * b[l, j]
            out[i, j] = s
    return out


def conv3d_naive(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None,
                 stride: int, padding: int) -> np.ndarray:
    """Seven nested loops straight from the cross-correlation definition."""
    b, c_in, D, H, W = x.shape
    c_out, _, kd, kh, kw = w.shape
    p = padding
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p), (p, p)))
    Do = (D + 2 * p - kd) // stride + 1
    Ho = (H + 2 * p - kh) // stride + 1
    Wo = (W + 2 * p - kw) // stride + 1
    out = np.zeros((b, c_out, Do, Ho, Wo), dtype=x.dtype)
    for n in range(b):
        for co in range(c_out):
            for od in range(Do):
                for oh in range(Ho):
                    for ow in range(Wo):
                        s = 0.0
                        for ci in range(c_in):
                            for i in range(kd):
                                for j in range(kh):
                                    for l in range(kw):
                                        s += (xp[n, ci, od * stride + i,
                                                 oh * stride + j, ow * stride + l]
                                              * w[co, ci, i, j, l])
                        out[n, co, od, oh, ow] = s + (bias[co] if bias is not None else 0.0)
    return out


def max_pool3d_naive(x: np.ndarray, k: int, stride: int, padding: int) -> np.ndarray:
    b, c, D, H, W = x.shape
    p = padding
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p), (p, p)), constant_values=-np.inf)
    Do = (D + 2 * p - k) // stride + 1
    Ho = (H + 2 * p - k) // stride + 1
    Wo = (W + 2 * p - k) // stride + 1
    out = np.zeros((b, c, Do, Ho, Wo), dtype=x.dtype)
    for n in range(b):
        for ci in range(c):
            for od in range(Do):
                for oh in range(Ho):
                    for ow in range(Wo):
                        win = xp[n, ci,
                                 od * stride:od * stride + k,
                                 oh * stride:oh * stride + k,
                                 ow * stride:ow * stride + k]
                        out[n, ci, od, oh, ow] = win.max()
    return out


def layer_norm_direct(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray,
                      eps: float) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return gamma * (x - mu) / np.sqrt(var + eps) + beta


def dice_set_count(a: np.ndarray, b: np.ndarray) -> float:
    """Dice via explicit voxel-set counting."""
    sa = {tuple(ix) for ix in np.argwhere(a)}
    sb = {tuple(ix) for ix in np.argwhere(b)}
    if not sa and not sb:
        return 1.0
    return 2.0 * len(sa & sb) / (len(sa) + len(sb))


def boundary_voxels_loops(mask: np.ndarray) -> list[tuple[int, int, int]]:
    """6-connectivity boundary by explicit neighbor inspection; voxels on the
    array edge count as boundary."""
    out = []
    D, H, W = mask.shape
    for d in range(D):
        for h in range(H):
            for w in range(W):
                if not mask[d, h, w]:
                    continue
                on_edge = False
                for dd, dh, dw in ((1, 0, 0), (-1, 0, 0), (0, 1, 0),
                                   (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                    nd, nh, nw = d + dd, h + dh, w + dw
                    if not (0 <= nd < D and 0 <= nh < H and 0 <= nw < W):
                        on_edge = True
                        break
                    if not mask[nd, nh, nw]:
                        on_edge = True
                        break
                if on_edge:
                    out.append((d, h, w))
    return out


def hausdorff_bruteforce(a: np.ndarray, b: np.ndarray, spacing) -> float:
    """Symmetric Hausdorff distance between boundary voxel sets, via the
    O(|A||B|) double loop over all pairs."""
    pa = boundary_voxels_loops(a)
    pb = boundary_voxels_loops(b)
    sz, sy, sx = spacing

    def directed(src, dst):
        worst = 0.0
        for p in src:
            best = np.inf
            for q in dst:
                d = np.sqrt(((p[0] - q[0]) * sz) ** 2
                            + ((p[1] - q[1]) * sy) ** 2
                            + ((p[2] - q[2]) * sx) ** 2)
                if d < best:
                    best = d
            if best > worst:
                worst = best
        return worst

    return max(directed(pa, pb), directed(pb, pa))


def adamw_reference(theta0: float, grads, lr, beta1=0.9, beta2=0.999,
                    eps=1e-8, weight_decay=0.0):
    """Straight-line scalar AdamW trajectory from the update equations."""
    theta = theta0
    m = v = 0.0
    history = []
    for t, (g, step_lr) in enumerate(zip(grads, lr), start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mhat = m / (1 - beta1 ** t)
        vhat = v / (1 - beta2 ** t)
        theta = theta - step_lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * theta)
        history.append(theta)
    return history


def pearson_formula(xs, ys) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    xm, ym = xs.mean(), ys.mean()
    num = ((xs - xm) * (ys - ym)).sum()
    den = np.sqrt(((xs - xm) ** 2).sum() * ((ys - ym) ** 2).sum())
    return float(num / den)


def bland_altman_formula(a, b):
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mean = d.mean()
    sd = d.std(ddof=1)
    return mean, mean - 1.96 * sd, mean + 1.96 * sd
