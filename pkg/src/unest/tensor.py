"""Dense tensor engine with reverse-mode differentiation.

Covers exactly the operation set the segmentation network needs: batched
matmul, linear, softmax/log-softmax, layer norm, GELU, 3D conv / transposed
conv / max-pool, and the structural ops (reshape, permute, concat, slice,
sum, mean, batch expansion). Arrays are numpy buffers; float32 is the
working precision, float64 is used by the gradient-check suites.

Autodiff is taped per tensor: every op records its parents and a closure
that maps the output adjoint to parent adjoints. ``backward`` replays the
closures once each, in reverse topological order.

Broadcasting is deliberately restricted: binary elementwise ops require
identical shapes (or a python scalar), matmul requires equal leading batch
extents, and anything else goes through an explicit ``expand_batch``.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError, NumericError, UsageError

DEFAULT_DTYPE = np.float32

_grad_enabled = True


class no_grad:
    """Context manager that suspends tape recording (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox4x64) so every artifact is replayable
    from its seed alone. ``seed`` may be an int or a tuple of ints."""
    return np.random.Generator(np.random.Philox(key=seed))


class Tensor:
    """N-dimensional array with an optional gradient tape entry.

    ``data`` is immutable by convention after construction; ``grad`` is the
    only field backward mutates. Gradients accumulate across backward calls
    until explicitly cleared.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable | None = None

    # -- introspection ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def is_leaf(self) -> bool:
        return self._vjp is None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}, requires_grad={self.requires_grad})"

    # -- backward ----------------------------------------------------------

    def backward(self) -> None:
        """Populate ``grad`` on every requires_grad leaf reachable from this
        scalar. Visits each tape entry exactly once and frees it afterwards."""
        if self.size != 1:
            raise UsageError(f"backward requires a scalar loss, got shape {self.shape}")

        # Iterative DFS topological order (graphs can be deep).
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))

        adjoint: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = adjoint.pop(id(node), None)
            if g is None:
                continue
            if node._vjp is None:
                if node.requires_grad:
                    node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None:
                    continue
                pid = id(parent)
                if pid in adjoint:
                    adjoint[pid] = adjoint[pid] + pg
                else:
                    adjoint[pid] = pg
            # Release activations as soon as the node is consumed.
            node._parents = ()
            node._vjp = None

    def zero_grad(self) -> None:
        self.grad = None

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(neg(self), other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape)

    def permute(self, *axes):
        return permute(self, axes[0] if len(axes) == 1 and isinstance(axes[0], (tuple, list)) else axes)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


def tensor(data, requires_grad: bool = False, dtype=None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, dtype=dtype)


def _result(out_data: np.ndarray, parents: tuple[Tensor, ...], vjp: Callable) -> Tensor:
    out = Tensor(out_data)
    if _grad_enabled and any(p.requires_grad or p._vjp is not None for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._vjp = vjp
    return out


def _as_pair(a: Tensor, other):
    """Normalize the second operand of an elementwise op: Tensor with the
    same shape, or a python scalar. Anything else is a dimension error."""
    if isinstance(other, Tensor):
        if other.shape != a.shape:
            raise DimensionError(f"elementwise operands differ: {a.shape} vs {other.shape}")
        if other.dtype != a.dtype:
            raise NumericError(f"dtype mismatch: {a.dtype} vs {other.dtype}")
        return other, False
    if isinstance(other, (int, float)):
        return other, True
    raise UsageError(f"unsupported operand type {type(other).__name__}")


# -- elementwise arithmetic -------------------------------------------------


def add(a: Tensor, other) -> Tensor:
    b, is_scalar = _as_pair(a, other)
    if is_scalar:
        out = a.data + a.dtype.type(b)
        return _result(out, (a,), lambda g: (g,))
    out = a.data + b.data
    return _result(out, (a, b), lambda g: (g, g))


def sub(a: Tensor, other) -> Tensor:
    b, is_scalar = _as_pair(a, other)
    if is_scalar:
        return _result(a.data - a.dtype.type(b), (a,), lambda g: (g,))
    return _result(a.data - b.data, (a, b), lambda g: (g, -g))


def neg(a: Tensor) -> Tensor:
    return _result(-a.data, (a,), lambda g: (-g,))


def mul(a: Tensor, other) -> Tensor:
    b, is_scalar = _as_pair(a, other)
    if is_scalar:
        c = a.dtype.type(b)
        return _result(a.data * c, (a,), lambda g: (g * c,))
    return _result(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def div(a: Tensor, other) -> Tensor:
    b, is_scalar = _as_pair(a, other)
    if is_scalar:
        c = a.dtype.type(b)
        return _result(a.data / c, (a,), lambda g: (g / c,))

    def vjp(g):
        return g / b.data, -g * a.data / (b.data * b.data)

    return _result(a.data / b.data, (a, b), vjp)


# -- contractions -------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product. Leading batch extents must be equal (no
    broadcasting); inner extents must contract."""
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"matmul needs >=2-d operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2] or a.shape[:-2] != b.shape[:-2]:
        raise DimensionError(f"matmul shapes incompatible: {a.shape} x {b.shape}")
    out = a.data @ b.data

    def vjp(g):
        return g @ _swap(b.data), _swap(a.data) @ g

    return _result(out, (a, b), vjp)


def _swap(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """``x @ w + b`` over the last axis; x may have any leading shape."""
    d_in = x.shape[-1]
    if w.ndim != 2 or w.shape[0] != d_in:
        raise DimensionError(f"linear weight {w.shape} does not match input {x.shape}")
    if b is not None and b.shape != (w.shape[1],):
        raise DimensionError(f"linear bias {b.shape} does not match weight {w.shape}")
    x2 = x.data.reshape(-1, d_in)
    y2 = x2 @ w.data
    if b is not None:
        y2 = y2 + b.data
    out = y2.reshape(x.shape[:-1] + (w.shape[1],))

    def vjp(g):
        g2 = g.reshape(-1, w.shape[1])
        dx = (g2 @ w.data.T).reshape(x.shape)
        dw = x2.T @ g2
        db = g2.sum(axis=0) if b is not None else None
        return (dx, dw, db) if b is not None else (dx, dw)

    return _result(out, (x, w, b) if b is not None else (x, w), vjp)


# -- nonlinearities ------------------------------------------------------------


def softmax(x: Tensor, axis: int) -> Tensor:
    """Stabilized softmax along ``axis`` (max-subtraction)."""
    _check_axis(x, axis)
    if not np.isfinite(x.data).all():
        raise NumericError("softmax input contains non-finite values")
    m = x.data.max(axis=axis, keepdims=True)
    e = np.exp(x.data - m)
    y = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        return ((g - dot) * y,)

    return _result(y, (x,), vjp)


def log_softmax(x: Tensor, axis: int) -> Tensor:
    _check_axis(x, axis)
    if not np.isfinite(x.data).all():
        raise NumericError("log_softmax input contains non-finite values")
    m = x.data.max(axis=axis, keepdims=True)
    shifted = x.data - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    sm = np.exp(out)

    def vjp(g):
        return (g - sm * g.sum(axis=axis, keepdims=True),)

    return _result(out, (x,), vjp)


def _check_axis(x: Tensor, axis: int):
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"axis {axis} out of range for shape {x.shape}")


_GELU_C = math.sqrt(2.0 / math.pi)


def gelu(x: Tensor) -> Tensor:
    """tanh-form GELU."""
    xd = x.data
    u = _GELU_C * (xd + 0.044715 * xd**3)
    t = np.tanh(u)
    out = 0.5 * xd * (1.0 + t)

    def vjp(g):
        du = _GELU_C * (1.0 + 3 * 0.044715 * xd**2)
        return (g * (0.5 * (1.0 + t) + 0.5 * xd * (1.0 - t * t) * du),)

    return _result(out.astype(xd.dtype, copy=False), (x,), vjp)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then apply the
    affine (gamma, beta). Variance is the biased (population) estimate."""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError(
            f"layer_norm affine shapes {gamma.shape}/{beta.shape} do not match feature dim {d}"
        )
    if eps <= 0:
        raise UsageError("layer_norm eps must be > 0")
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + x.dtype.type(eps))
    xhat = xc * inv
    out = gamma.data * xhat + beta.data

    def vjp(g):
        dgamma = (g * xhat).reshape(-1, d).sum(axis=0)
        dbeta = g.reshape(-1, d).sum(axis=0)
        dxhat = g * gamma.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        dx = inv * (dxhat - m1 - xhat * m2)
        return dx, dgamma, dbeta

    return _result(out.astype(x.dtype, copy=False), (x, gamma, beta), vjp)


# -- structural ops ------------------------------------------------------------


def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise DimensionError(f"cannot reshape {x.shape} to {shape}: {e}") from None
    return _result(out, (x,), lambda g: (g.reshape(x.shape),))


def permute(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f"permutation {axes} invalid for shape {x.shape}")
    inv = tuple(np.argsort(axes))
    return _result(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inv),))


def getitem(x: Tensor, idx) -> Tensor:
    """Basic slicing only (ints and slices); advanced indexing is out of scope."""
    if not isinstance(idx, tuple):
        idx = (idx,)
    for i in idx:
        if not isinstance(i, (int, slice)):
            raise UsageError(f"only ints and slices are supported, got {type(i).__name__}")
    out = x.data[idx]

    def vjp(g):
        gx = np.zeros_like(x.data)
        gx[idx] = g
        return (gx,)

    return _result(out, (x,), vjp)


def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    if not tensors:
        raise UsageError("concat of zero tensors")
    nd = tensors[0].ndim
    for t in tensors[1:]:
        if t.ndim != nd:
            raise DimensionError(f"concat rank mismatch: {tensors[0].shape} vs {t.shape}")
        for ax in range(nd):
            if ax != axis % nd and t.shape[ax] != tensors[0].shape[ax]:
                raise DimensionError(f"concat shapes differ off axis {axis}: "
                                     f"{tensors[0].shape} vs {t.shape}")
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        pieces = []
        for lo, hi in zip(offsets[:-1], offsets[1:]):
            sl = [slice(None)] * nd
            sl[axis % nd] = slice(int(lo), int(hi))
            pieces.append(g[tuple(sl)])
        return tuple(pieces)

    return _result(out, tuple(tensors), vjp)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axes(x, axis)
    out = x.data.sum(axis=axes, keepdims=keepdims)

    def vjp(g):
        if not keepdims:
            g = g.reshape(_keepdims_shape(x.shape, axes))
        return (np.broadcast_to(g, x.shape),)

    return _result(out, (x,), vjp)


def tmean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axes(x, axis)
    count = int(np.prod([x.shape[a] for a in axes])) if axes is not None else x.size
    out = x.data.mean(axis=axes, keepdims=keepdims)

    def vjp(g):
        if not keepdims:
            g = g.reshape(_keepdims_shape(x.shape, axes))
        return (np.broadcast_to(g, x.shape) / x.dtype.type(count),)

    return _result(out, (x,), vjp)


def _norm_axes(x: Tensor, axis):
    if axis is None:
        return None
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % x.ndim for a in axis)


def _keepdims_shape(shape, axes):
    if axes is None:
        return (1,) * len(shape)
    return tuple(1 if i in axes else s for i, s in enumerate(shape))


def expand_batch(x: Tensor, n: int) -> Tensor:
    """Prepend a batch axis of extent ``n`` (the one sanctioned broadcast)."""
    out = np.broadcast_to(x.data[None], (n,) + x.shape)
    return _result(out, (x,), lambda g: (g.sum(axis=0),))


# -- 3D convolution family ------------------------------------------------------


def _triple(v) -> tuple[int, int, int]:
    if isinstance(v, (tuple, list)):
        if len(v) != 3:
            raise UsageError(f"expected 3 extents, got {v}")
        return tuple(int(i) for i in v)
    return (int(v),) * 3


def _im2col(x: np.ndarray, k, s, p):
    """(b,c,D,H,W) -> (b, L, c*kd*kh*kw) patch matrix plus output extents."""
    kd, kh, kw = k
    sd, sh, sw = s
    pd, ph, pw = p
    if any(p_ > 0 for p_ in (pd, ph, pw)):
        x = np.pad(x, ((0, 0), (0, 0), (pd, pd), (ph, ph), (pw, pw)))
    b, c = x.shape[:2]
    if kd > x.shape[2] or kh > x.shape[3] or kw > x.shape[4]:
        raise DimensionError(f"kernel {k} exceeds padded extents {x.shape[2:]}")
    v = sliding_window_view(x, (kd, kh, kw), axis=(2, 3, 4))[:, :, ::sd, ::sh, ::sw]
    do, ho, wo = v.shape[2:5]
    cols = v.transpose(0, 2, 3, 4, 1, 5, 6, 7).reshape(b, do * ho * wo, c * kd * kh * kw)
    return np.ascontiguousarray(cols), (do, ho, wo)


def _col2im(cols: np.ndarray, x_shape, out_sp, k, s, p):
    """Adjoint of _im2col: scatter-add patch columns back onto the grid."""
    kd, kh, kw = k
    sd, sh, sw = s
    pd, ph, pw = p
    b, c = x_shape[:2]
    do, ho, wo = out_sp
    D, H, W = x_shape[2:]
    acc = np.zeros((b, c, D + 2 * pd, H + 2 * ph, W + 2 * pw), dtype=cols.dtype)
    v = cols.reshape(b, do, ho, wo, c, kd, kh, kw).transpose(0, 4, 1, 2, 3, 5, 6, 7)
    for i, j, l in product(range(kd), range(kh), range(kw)):
        acc[:, :, i:i + sd * do:sd, j:j + sh * ho:sh, l:l + sw * wo:sw] += v[..., i, j, l]
    if any(p_ > 0 for p_ in (pd, ph, pw)):
        acc = np.ascontiguousarray(acc[:, :, pd:pd + D, ph:ph + H, pw:pw + W])
    return acc


def conv3d(x: Tensor, w: Tensor, bias: Tensor | None = None,
           stride=1, padding=0) -> Tensor:
    """3D cross-correlation. x: (b,c_in,D,H,W); w: (c_out,c_in,kd,kh,kw)."""
    if x.ndim != 5 or w.ndim != 5:
        raise DimensionError(f"conv3d expects 5-d tensors, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[1]:
        raise DimensionError(f"conv3d channel mismatch: input {x.shape} vs weight {w.shape}")
    c_out = w.shape[0]
    if bias is not None and bias.shape != (c_out,):
        raise DimensionError(f"conv3d bias {bias.shape} does not match c_out {c_out}")
    k = w.shape[2:]
    s = _triple(stride)
    p = _triple(padding)
    if min(s) < 1:
        raise UsageError(f"conv3d stride must be >= 1, got {stride}")

    cols, out_sp = _im2col(x.data, k, s, p)
    b = x.shape[0]
    w2 = w.data.reshape(c_out, -1)
    y = cols @ w2.T
    if bias is not None:
        y = y + bias.data
    out = y.transpose(0, 2, 1).reshape(b, c_out, *out_sp)

    def vjp(g):
        g2 = np.ascontiguousarray(g.reshape(b, c_out, -1).transpose(0, 2, 1))
        cols_b, _ = _im2col(x.data, k, s, p)  # recompute: cheaper than keeping it live
        dw = np.tensordot(g2, cols_b, axes=([0, 1], [0, 1])).reshape(w.shape)
        dcols = g2 @ w2
        dx = _col2im(dcols, x.shape, out_sp, k, s, p)
        if bias is not None:
            return dx, dw, g.sum(axis=(0, 2, 3, 4))
        return dx, dw

    parents = (x, w, bias) if bias is not None else (x, w)
    return _result(out, parents, vjp)


def conv_transpose3d(x: Tensor, w: Tensor, bias: Tensor | None = None, stride=1) -> Tensor:
    """Transposed 3D convolution (zero padding). x: (b,c_in,D,H,W);
    w: (c_in,c_out,kd,kh,kw). Output extent per axis: (in-1)*stride + k.

    With a shared weight buffer this is the exact adjoint of ``conv3d`` at
    the same stride, which the test suite checks as an inner-product identity.
    """
    if x.ndim != 5 or w.ndim != 5:
        raise DimensionError(f"conv_transpose3d expects 5-d tensors, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[0]:
        raise DimensionError(
            f"conv_transpose3d channel mismatch: input {x.shape} vs weight {w.shape}")
    c_in, c_out = w.shape[:2]
    if bias is not None and bias.shape != (c_out,):
        raise DimensionError(f"conv_transpose3d bias {bias.shape} does not match c_out {c_out}")
    k = w.shape[2:]
    s = _triple(stride)
    if min(s) < 1:
        raise UsageError(f"conv_transpose3d stride must be >= 1, got {stride}")
    b = x.shape[0]
    in_sp = x.shape[2:]
    out_sp = tuple((n - 1) * st + kk for n, st, kk in zip(in_sp, s, k))

    x2 = np.ascontiguousarray(x.data.reshape(b, c_in, -1).transpose(0, 2, 1))
    w2 = w.data.reshape(c_in, -1)  # (c_in, c_out*k^3)
    cols = x2 @ w2
    out = _col2im(cols, (b, c_out) + out_sp, in_sp, k, s, (0, 0, 0))
    if bias is not None:
        out = out + bias.data.reshape(1, c_out, 1, 1, 1)

    def vjp(g):
        gcols, _ = _im2col(g, k, s, (0, 0, 0))
        dx = (gcols @ w2.T).transpose(0, 2, 1).reshape(x.shape)
        dw = np.tensordot(x2, gcols, axes=([0, 1], [0, 1])).reshape(w.shape)
        if bias is not None:
            return dx, dw, g.sum(axis=(0, 2, 3, 4))
        return dx, dw

    parents = (x, w, bias) if bias is not None else (x, w)
    return _result(out, parents, vjp)


def max_pool3d(x: Tensor, k: int, stride=None, padding: int = 0) -> Tensor:
    """Window maximum. Ties route the subgradient to the first maximal index
    in scan order; padding is -inf so it never wins."""
    if x.ndim != 5:
        raise DimensionError(f"max_pool3d expects a 5-d tensor, got {x.shape}")
    kt = _triple(k)
    st = _triple(stride if stride is not None else k)
    pt = _triple(padding)
    b, c = x.shape[:2]
    xd = x.data
    if any(p_ > 0 for p_ in pt):
        xd = np.pad(xd, ((0, 0), (0, 0), (pt[0], pt[0]), (pt[1], pt[1]), (pt[2], pt[2])),
                    constant_values=-np.inf)
    if kt[0] > xd.shape[2] or kt[1] > xd.shape[3] or kt[2] > xd.shape[4]:
        raise DimensionError(f"pool kernel {kt} exceeds padded extents {xd.shape[2:]}")
    v = sliding_window_view(xd, kt, axis=(2, 3, 4))[:, :, ::st[0], ::st[1], ::st[2]]
    do, ho, wo = v.shape[2:5]
    vf = v.reshape(b, c, do, ho, wo, -1)
    am = vf.argmax(axis=-1)  # first occurrence on ties
    out = np.take_along_axis(vf, am[..., None], axis=-1)[..., 0]
    padded_shape = xd.shape

    def vjp(g):
        od, oh, ow = np.unravel_index(am, kt)
        di = np.arange(do)[None, None, :, None, None] * st[0] + od
        hi = np.arange(ho)[None, None, None, :, None] * st[1] + oh
        wi = np.arange(wo)[None, None, None, None, :] * st[2] + ow
        bi = np.arange(b)[:, None, None, None, None]
        ci = np.arange(c)[None, :, None, None, None]
        acc = np.zeros(padded_shape, dtype=g.dtype)
        flat = (((bi * c + ci) * padded_shape[2] + di) * padded_shape[3] + hi) * padded_shape[4] + wi
        np.add.at(acc.reshape(-1), flat.ravel(), g.ravel())
        if any(p_ > 0 for p_ in pt):
            acc = acc[:, :, pt[0]:pt[0] + x.shape[2], pt[1]:pt[1] + x.shape[3],
                      pt[2]:pt[2] + x.shape[4]]
        return (np.ascontiguousarray(acc),)

    return _result(np.ascontiguousarray(out), (x,), vjp)
