"""Minimal dense-tensor math with reverse-mode differentiation.

Covers exactly what the training stack needs: elementwise math, matmul,
1-D convolution (via im2col), a GRU step, atan2 phase extraction, and
reductions. Values are float32 by default; pass float64 arrays to run the
whole graph in double precision (used by the gradient-check tests).
"""

import numpy as np

DEFAULT_DTYPE = np.float32

_grad_enabled = True


class no_grad:
    """Context manager that disables graph recording (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def grad_enabled():
    return _grad_enabled


class Tensor:
    """A numpy array plus the bookkeeping needed for reverse-mode autodiff.

    Treat tensors as immutable once created; optimizers mutate parameter
    `.data` in place between graph builds, never inside one.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "name")

    def __init__(self, data, requires_grad=False, name=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._vjp = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def numpy(self):
        return self.data

    def detach(self):
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"

    # -- graph construction ------------------------------------------------

    @staticmethod
    def _make(data, parents, vjp):
        out = Tensor(data)
        if _grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._vjp = vjp
            tape = _active_tape()
            if tape is not None:
                tape.nodes.append(out)
        return out

    def backward(self, grad=None):
        """Accumulate d(self)/d(leaf) into `.grad` of every reachable leaf."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without an explicit gradient "
                                 "requires a scalar output")
            grad = np.ones_like(self.data)
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        grads = {id(self): np.asarray(grad, dtype=self.data.dtype)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._vjp is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pg = _unbroadcast(pg, parent.data.shape)
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg

    # -- operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return index(self, idx)

    def reshape(self, *shape):
        return reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def transpose(self, axes=None):
        return transpose(self, axes)

    @property
    def T(self):
        return transpose(self, None)


class ComputationTape:
    """Ordered record of operations; creation order is a topological order."""

    def __init__(self):
        self.nodes = []

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        _TAPE_STACK.pop()
        return False


_TAPE_STACK = []


def _active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def backward(tape, output, params=None):
    """Gradient map of a scalar `output` w.r.t. parameters recorded on `tape`.

    Parameters passed explicitly but not participating in the graph get
    zero gradients. Raises on non-scalar outputs.
    """
    if output.data.size != 1:
        raise ValueError("backward expects a scalar output tensor")
    grads = {id(output): np.ones_like(output.data)}
    leaf_grads = {}
    leaves = {}
    for node in reversed(tape.nodes):
        g = grads.pop(id(node), None)
        if g is None or node._vjp is None:
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if pg is None or not parent.requires_grad:
                continue
            pg = _unbroadcast(pg, parent.data.shape)
            if parent._vjp is None:
                leaves[id(parent)] = parent
                prev = leaf_grads.get(id(parent))
                leaf_grads[id(parent)] = pg if prev is None else prev + pg
            else:
                prev = grads.get(id(parent))
                grads[id(parent)] = pg if prev is None else prev + pg
    if params is not None:
        return {p: leaf_grads.get(id(p), np.zeros_like(p.data)) for p in params}
    return {leaf: leaf_grads[key] for key, leaf in leaves.items()}


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] > 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


# -- elementwise arithmetic ---------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return Tensor._make(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return Tensor._make(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return Tensor._make(a.data * b.data, (a, b),
                        lambda g: (g * b.data, g * a.data))


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    return Tensor._make(out, (a, b),
                        lambda g: (g / b.data, -g * out / b.data))


def square(a):
    a = as_tensor(a)
    return Tensor._make(a.data * a.data, (a,), lambda g: (2.0 * g * a.data,))


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return Tensor._make(out, (a,), lambda g: (g * 0.5 / out,))


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return Tensor._make(out, (a,), lambda g: (g * out,))


def log(a):
    a = as_tensor(a)
    return Tensor._make(np.log(a.data), (a,), lambda g: (g / a.data,))


def sin(a):
    a = as_tensor(a)
    return Tensor._make(np.sin(a.data), (a,), lambda g: (g * np.cos(a.data),))


def cos(a):
    a = as_tensor(a)
    return Tensor._make(np.cos(a.data), (a,), lambda g: (-g * np.sin(a.data),))


def tanh(a):
    a = as_tensor(a)
    out = np.tanh(a.data)
    return Tensor._make(out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a):
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.data))
    return Tensor._make(out, (a,), lambda g: (g * out * (1.0 - out),))


def elu(a, alpha=1.0):
    a = as_tensor(a)
    ex = np.exp(np.minimum(a.data, 0.0))
    out = np.where(a.data > 0, a.data, alpha * (ex - 1.0))
    dgrad = np.where(a.data > 0, np.ones_like(a.data), alpha * ex)
    return Tensor._make(out, (a,), lambda g: (g * dgrad,))


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return Tensor._make(a.data * mask, (a,), lambda g: (g * mask,))


def abs_(a):
    a = as_tensor(a)
    sign = np.sign(a.data)
    return Tensor._make(np.abs(a.data), (a,), lambda g: (g * sign,))


def minimum(a, b):
    """Elementwise min; gradient follows the smaller branch (ties -> first)."""
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data <= b.data
    out = np.where(take_a, a.data, b.data)
    return Tensor._make(out, (a, b),
                        lambda g: (g * take_a, g * (~take_a)))


def maximum(a, b):
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data >= b.data
    out = np.where(take_a, a.data, b.data)
    return Tensor._make(out, (a, b),
                        lambda g: (g * take_a, g * (~take_a)))


def clip(a, lo, hi):
    """Clamp to [lo, hi]; gradient is zero outside the interval."""
    a = as_tensor(a)
    out = np.clip(a.data, lo, hi)
    inside = (a.data >= lo) & (a.data <= hi)
    return Tensor._make(out, (a,), lambda g: (g * inside,))


def atan2(y, x):
    """Elementwise two-argument arctangent with gradients."""
    y, x = as_tensor(y), as_tensor(x)
    out = np.arctan2(y.data, x.data)
    denom = y.data * y.data + x.data * x.data

    def vjp(g):
        safe = np.where(denom > 0, denom, 1.0)
        return (g * x.data / safe, -g * y.data / safe)

    return Tensor._make(out, (y, x), vjp)


def atan2_pair(y_like, x_like):
    """Per-channel angle of (y, x) 2-vectors in [-pi, pi).

    Both components zero is degenerate: the angle is defined as 0 and the
    second return value flags the affected channels. numpy's arctan2 maps
    (0, -1) to +pi; that single point is folded to -pi to keep the
    half-open range (a branch relabel, gradient untouched).
    """
    y_arr = y_like.data if isinstance(y_like, Tensor) else np.asarray(y_like)
    x_arr = x_like.data if isinstance(x_like, Tensor) else np.asarray(x_like)
    if y_arr.shape != x_arr.shape:
        raise ValueError(f"atan2_pair shape mismatch: {y_arr.shape} vs {x_arr.shape}")
    degenerate = (y_arr == 0) & (x_arr == 0)
    ang = atan2(y_like, x_like)
    ang.data[ang.data == np.pi] = -np.pi
    return ang, degenerate


# -- shape ops ----------------------------------------------------------------

def reshape(a, shape):
    a = as_tensor(a)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    old = a.data.shape
    return Tensor._make(a.data.reshape(shape), (a,),
                        lambda g: (g.reshape(old),))


def transpose(a, axes=None):
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.data.ndim)))
    inv = np.argsort(axes)
    return Tensor._make(np.transpose(a.data, axes), (a,),
                        lambda g: (np.transpose(g, inv),))


def index(a, idx):
    a = as_tensor(a)
    out = a.data[idx]

    def vjp(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return (full,)

    return Tensor._make(out, (a,), vjp)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor._make(data, tuple(tensors), vjp)


# -- reductions ---------------------------------------------------------------

def _expand_reduced(g, axis, keepdims):
    if axis is None or keepdims:
        return np.asarray(g)
    axes = axis if isinstance(axis, tuple) else (axis,)
    g = np.asarray(g)
    for ax in sorted(axes):
        g = np.expand_dims(g, ax)
    return g


def sum_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = _expand_reduced(g, axis, keepdims)
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return Tensor._make(out, (a,), vjp)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        n = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        n = 1
        for ax in axes:
            n *= a.data.shape[ax]

    def vjp(g):
        g = _expand_reduced(g, axis, keepdims) / n
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return Tensor._make(out, (a,), vjp)


# -- linear algebra -----------------------------------------------------------

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def vjp(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return (ga, gb)

    return Tensor._make(a.data @ b.data, (a, b), vjp)


# -- 1-D convolution ----------------------------------------------------------

def _im2col(x, k):
    """(B, C, T) zero-padded for same-length output -> (B, C*k, T)."""
    b, c, t = x.shape
    pad = (k - 1) // 2
    xp = np.zeros((b, c, t + 2 * pad), dtype=x.dtype)
    xp[:, :, pad:pad + t] = x
    stride_b, stride_c, stride_t = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp, shape=(b, c, t, k), strides=(stride_b, stride_c, stride_t, stride_t))
    return windows.transpose(0, 1, 3, 2).reshape(b, c * k, t)


def conv1d(x, weight, bias):
    """Same-padded 1-D cross-correlation.

    x: (C_in, T) or (B, C_in, T); weight: (C_out, C_in, k) with odd k;
    bias: (C_out,). Output length equals input length.
    """
    x = as_tensor(x)
    weight, bias = as_tensor(weight), as_tensor(bias)
    squeeze = x.data.ndim == 2
    xd = x.data[None] if squeeze else x.data
    b, c_in, t = xd.shape
    c_out, c_in_w, k = weight.data.shape
    if c_in != c_in_w:
        raise ValueError(f"conv1d channel mismatch: input has {c_in}, "
                         f"kernel expects {c_in_w}")
    if t < k:
        raise ValueError(f"conv1d input length {t} shorter than kernel {k}")
    if k % 2 == 0:
        raise ValueError("conv1d requires odd kernel width for same padding")
    cols = _im2col(xd, k)                        # (B, C_in*k, T)
    w2 = weight.data.reshape(c_out, c_in * k)
    out = np.einsum("oj,bjt->bot", w2, cols, optimize=True)
    out += bias.data[None, :, None]

    def vjp(g):
        if squeeze:
            g = g[None] if g.ndim == 2 else g
        gw = np.einsum("bot,bjt->oj", g, cols, optimize=True)
        gw = gw.reshape(weight.data.shape)
        gb = g.sum(axis=(0, 2))
        gx = None
        if x.requires_grad:
            gcols = np.einsum("oj,bot->bjt", w2, g, optimize=True)
            gcols = gcols.reshape(b, c_in, k, t)
            pad = (k - 1) // 2
            gxp = np.zeros((b, c_in, t + 2 * pad), dtype=g.dtype)
            for j in range(k):
                gxp[:, :, j:j + t] += gcols[:, :, j, :]
            gx = gxp[:, :, pad:pad + t]
            if squeeze:
                gx = gx[0]
        return (gx, gw, gb)

    out_t = Tensor._make(out[0] if squeeze else out, (x, weight, bias), vjp)
    return out_t


# -- recurrent cell -----------------------------------------------------------

def gru_step(hidden, x, weights):
    """One gated-recurrent-unit step.

    weights: dict with w_ir, w_iz, w_in (H, X), w_hr, w_hz, w_hn (H, H),
    b_r, b_z, b_n (H,). Batched inputs use shape (B, X) / (B, H).
    """
    h, x = as_tensor(hidden), as_tensor(x)
    batched = x.data.ndim == 2
    hd, xd = h.data.shape[-1], x.data.shape[-1]
    for key in ("w_ir", "w_iz", "w_in"):
        if weights[key].data.shape != (hd, xd):
            raise ValueError(f"gru_step: {key} shape {weights[key].data.shape} "
                             f"does not match (H={hd}, X={xd})")
    for key in ("w_hr", "w_hz", "w_hn"):
        if weights[key].data.shape != (hd, hd):
            raise ValueError(f"gru_step: {key} shape {weights[key].data.shape} "
                             f"does not match (H={hd}, H={hd})")

    def lin(v, w):
        return matmul(v, transpose(w)) if batched else matmul(w, v)

    r = sigmoid(add(lin(x, weights["w_ir"]),
                    add(lin(h, weights["w_hr"]), weights["b_r"])))
    z = sigmoid(add(lin(x, weights["w_iz"]),
                    add(lin(h, weights["w_hz"]), weights["b_z"])))
    n = tanh(add(lin(x, weights["w_in"]),
                 mul(r, add(lin(h, weights["w_hn"]), weights["b_n"]))))
    one_minus_z = sub(1.0, z)
    return add(mul(one_minus_z, n), mul(z, h))
