"""
Reverse-mode automatic differentiation over numpy arrays.

Every differentiable operation is a ``Function`` subclass. ``Function.apply``
runs the forward pass on raw arrays and returns a ``Tensor`` whose context
remembers the parents; ``backward`` walks the resulting graph in reverse
topological order and accumulates gradients into the leaves that require them.
"""

import itertools

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from ..exceptions import DomainError

_ids = itertools.count()


class Tensor:
    """
    Array value with an optional gradient slot.

    Args:
        data: array-like, stored as float64
        requires_grad: accumulate gradients into ``grad`` during backward
        name: optional label (parameters carry their checkpoint name)
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, ctx=None, name=None):
        self.data = np.array(data, dtype=float)
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self.requires_grad = requires_grad
        self.ctx = ctx
        self.name = name
        self.id = next(_ids)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.data.shape}>"

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def __neg__(self): return Neg.apply(self)
    def __add__(self, x): return Add.apply(self, x)
    def __radd__(self, x): return Add.apply(x, self)
    def __sub__(self, x): return Sub.apply(self, x)
    def __rsub__(self, x): return Sub.apply(x, self)
    def __mul__(self, x): return Mul.apply(self, x)
    def __rmul__(self, x): return Mul.apply(x, self)
    def __truediv__(self, x): return Div.apply(self, x)
    def __rtruediv__(self, x): return Div.apply(x, self)
    def __pow__(self, p): return Pow.apply(self, p=p)
    def __matmul__(self, x): return MatMul.apply(self, x)
    def __getitem__(self, idx): return Index.apply(self, idx=idx)

    def sum(self, axis=None): return Sum.apply(self, axis=axis)
    def reshape(self, *shape): return Reshape.apply(self, shape=shape)

    @property
    def T(self): return Transpose.apply(self)

    def backward(self):
        backward(self)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Function:
    def __init__(self, *parents, **kwargs):
        self.parents = parents
        self.kwargs = kwargs

    @classmethod
    def apply(cls, *args, **kwargs):
        parents = tuple(as_tensor(a) for a in args)
        ctx = cls(*parents, **kwargs)
        out = ctx.forward(*[p.data for p in parents])
        return Tensor(out, ctx=ctx)

    def forward(self, *args): raise NotImplementedError
    def backward(self, grad): raise NotImplementedError


class Neg(Function):
    def forward(self, x): return -x
    def backward(self, grad): return (-grad,)


class Add(Function):
    def forward(self, x, y):
        self.shapes = (x.shape, y.shape)
        return x + y

    def backward(self, grad):
        return _unbroadcast(grad, self.shapes[0]), _unbroadcast(grad, self.shapes[1])


class Sub(Function):
    def forward(self, x, y):
        self.shapes = (x.shape, y.shape)
        return x - y

    def backward(self, grad):
        return _unbroadcast(grad, self.shapes[0]), _unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x * y

    def backward(self, grad):
        return _unbroadcast(grad * self.y, self.x.shape), _unbroadcast(grad * self.x, self.y.shape)


class Div(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x / y

    def backward(self, grad):
        return (_unbroadcast(grad / self.y, self.x.shape),
                _unbroadcast(-grad * self.x / self.y ** 2, self.y.shape))


class Pow(Function):
    def forward(self, x):
        self.x = x
        return x ** self.kwargs["p"]

    def backward(self, grad):
        p = self.kwargs["p"]
        return (grad * p * self.x ** (p - 1),)


class MatMul(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x @ y

    def backward(self, grad):
        x, y = self.x, self.y
        if x.ndim == 1 and y.ndim == 1:
            return grad * y, grad * x
        if x.ndim == 1:
            return y @ grad, np.outer(x, grad)
        if y.ndim == 1:
            return np.outer(grad, y), x.T @ grad
        return grad @ y.T, x.T @ grad


class Exp(Function):
    def forward(self, x):
        self.out = np.exp(x)
        return self.out

    def backward(self, grad): return (grad * self.out,)


class Log(Function):
    def forward(self, x):
        self.x = x
        return np.log(x)

    def backward(self, grad): return (grad / self.x,)


class ReLU(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad): return (grad * self.mask,)


class Softplus(Function):
    def forward(self, x):
        self.x = x
        return np.logaddexp(0.0, x)

    def backward(self, grad):
        return (grad / (1.0 + np.exp(-self.x)),)


class LogGamma(Function):
    def forward(self, x):
        self.x = x
        return gammaln(x)

    def backward(self, grad): return (grad * digamma(self.x),)


class Digamma(Function):
    def forward(self, x):
        self.x = x
        return digamma(x)

    def backward(self, grad): return (grad * polygamma(1, self.x),)


class Sum(Function):
    def forward(self, x):
        self.shape = x.shape
        return np.sum(x, axis=self.kwargs["axis"])

    def backward(self, grad):
        axis = self.kwargs["axis"]
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, self.shape).copy(),)


class Reshape(Function):
    def forward(self, x):
        self.shape = x.shape
        shape = self.kwargs["shape"]
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return x.reshape(shape)

    def backward(self, grad): return (grad.reshape(self.shape),)


class Transpose(Function):
    def forward(self, x): return x.T
    def backward(self, grad): return (grad.T,)


class Index(Function):
    def forward(self, x):
        self.shape = x.shape
        return x[self.kwargs["idx"]]

    def backward(self, grad):
        out = np.zeros(self.shape)
        np.add.at(out, self.kwargs["idx"], grad)
        return (out,)


class Concat(Function):
    def forward(self, *xs):
        axis = self.kwargs["axis"]
        self.sizes = [x.shape[axis] for x in xs]
        return np.concatenate(xs, axis=axis)

    def backward(self, grad):
        axis = self.kwargs["axis"]
        cuts = np.cumsum(self.sizes)[:-1]
        return tuple(np.split(grad, cuts, axis=axis))


class SegmentSum(Function):
    """Row ``i`` of the input is added to output row ``segments[i]``, in row order."""

    def forward(self, x):
        seg = self.kwargs["segments"]
        out = np.zeros((self.kwargs["n"],) + x.shape[1:])
        np.add.at(out, seg, x)
        return out

    def backward(self, grad):
        return (grad[self.kwargs["segments"]],)


class SegmentMax(Function):
    """Per-segment max; empty segments yield zeros, ties go to the first row."""

    def forward(self, x):
        seg = self.kwargs["segments"]
        n = self.kwargs["n"]
        out = np.zeros((n,) + x.shape[1:])
        self.argmax = -np.ones((n,) + x.shape[1:], dtype=int)
        for row in range(x.shape[0]):
            s = seg[row]
            better = (self.argmax[s] < 0) | (x[row] > out[s])
            out[s] = np.where(better, x[row], out[s])
            self.argmax[s] = np.where(better, row, self.argmax[s])
        self.n_rows = x.shape[0]
        return out

    def backward(self, grad):
        out = np.zeros((self.n_rows,) + grad.shape[1:])
        hit = self.argmax >= 0
        cols = np.broadcast_to(np.arange(grad.shape[1]), grad.shape) if grad.ndim == 2 else None
        if cols is None:
            np.add.at(out, self.argmax[hit], grad[hit])
        else:
            np.add.at(out, (self.argmax[hit], cols[hit]), grad[hit])
        return (out,)


def exp(x): return Exp.apply(x)
def log(x): return Log.apply(x)
def relu(x): return ReLU.apply(x)
def softplus(x): return Softplus.apply(x)
def lgamma(x): return LogGamma.apply(x)
def digamma_t(x): return Digamma.apply(x)
def concat(xs, axis=-1): return Concat.apply(*xs, axis=axis)
def segment_sum(x, segments, n): return SegmentSum.apply(x, segments=np.asarray(segments, dtype=int), n=n)
def segment_max(x, segments, n): return SegmentMax.apply(x, segments=np.asarray(segments, dtype=int), n=n)


def _toposort(root):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.id in visited:
            continue
        visited.add(node.id)
        stack.append((node, True))
        if node.ctx is not None:
            for parent in node.ctx.parents:
                if parent.id not in visited:
                    stack.append((parent, False))
    return order


def backward(loss, params=None):
    """
    Reverse accumulation from a scalar loss.

    Gradients are added to the ``grad`` slot of every leaf that requires them.

    Args:
        loss: scalar Tensor
        params: optional iterable of parameter tensors whose gradients to return

    Returns:
        list of gradient arrays aligned with ``params`` (zeros for unused ones),
        or None when ``params`` is not given
    """
    if loss.data.size != 1:
        raise DomainError(f"backward needs a scalar loss, got shape {loss.data.shape}")
    grads = {loss.id: np.ones_like(loss.data)}
    for node in reversed(_toposort(loss)):
        g = grads.pop(node.id, None)
        if g is None:
            continue
        if node.ctx is None:
            if node.requires_grad:
                node.grad = node.grad + g
            continue
        for parent, pg in zip(node.ctx.parents, node.ctx.backward(g)):
            if pg is None:
                continue
            grads[parent.id] = pg if parent.id not in grads else grads[parent.id] + pg
    if params is None:
        return None
    return [p.grad.copy() for p in params]
