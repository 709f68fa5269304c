"""Network building blocks on top of the tensor engine.

Initialization is uniform fan-in scaling (U(-1/sqrt(fan_in), +1/sqrt(fan_in)))
with zero biases, drawn from an explicit seeded generator so builds are
reproducible.
"""

import numpy as np

from . import tensor as T
from .tensor import Tensor


class Module:
    """Parameter container with named traversal for checkpoints."""

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def named_parameters(self, prefix=""):
        out = []
        for key, val in vars(self).items():
            name = f"{prefix}{key}" if not prefix else f"{prefix}.{key}"
            if isinstance(val, Tensor) and val.requires_grad:
                out.append((name, val))
            elif isinstance(val, Module):
                out.extend(val.named_parameters(name))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{name}.{i}"))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out.append((f"{name}.{i}", item))
            elif isinstance(val, dict):
                for k, item in val.items():
                    if isinstance(item, Tensor) and item.requires_grad:
                        out.append((f"{name}.{k}", item))
        return out

    def state_arrays(self):
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_arrays(self, arrays):
        for name, p in self.named_parameters():
            if name not in arrays:
                raise KeyError(f"missing parameter {name!r} in checkpoint")
            src = np.asarray(arrays[name])
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name!r}: "
                                 f"{src.shape} vs {p.data.shape}")
            p.data = src.astype(p.data.dtype)

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def param_fingerprint(self):
        """Order-stable hash of all parameter bytes (frozen-weights checks)."""
        import hashlib
        h = hashlib.sha256()
        for name, p in sorted(self.named_parameters()):
            h.update(name.encode())
            h.update(np.ascontiguousarray(p.data, dtype=np.float64).tobytes())
        return h.hexdigest()


def _uniform(rng, shape, fan_in, dtype, scale=1.0):
    bound = scale / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Linear(Module):
    def __init__(self, in_dim, out_dim, rng, dtype=np.float32, init_scale=1.0):
        self.weight = Tensor(_uniform(rng, (out_dim, in_dim), in_dim, dtype,
                                      init_scale), requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True)

    def __call__(self, x):
        if x.data.ndim == 1:
            return T.add(T.matmul(self.weight, x), self.bias)
        return T.add(T.matmul(x, T.transpose(self.weight)), self.bias)


class Conv1d(Module):
    """Same-padded 1-D convolution layer (odd kernel width)."""

    def __init__(self, in_ch, out_ch, kernel, rng, dtype=np.float32):
        fan_in = in_ch * kernel
        self.weight = Tensor(_uniform(rng, (out_ch, in_ch, kernel), fan_in,
                                      dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(out_ch, dtype=dtype), requires_grad=True)

    def __call__(self, x):
        return T.conv1d(x, self.weight, self.bias)


class GRUCell(Module):
    def __init__(self, in_dim, hidden_dim, rng, dtype=np.float32):
        def w(shape, fan):
            return Tensor(_uniform(rng, shape, fan, dtype), requires_grad=True)

        self.w_ir = w((hidden_dim, in_dim), in_dim)
        self.w_iz = w((hidden_dim, in_dim), in_dim)
        self.w_in = w((hidden_dim, in_dim), in_dim)
        self.w_hr = w((hidden_dim, hidden_dim), hidden_dim)
        self.w_hz = w((hidden_dim, hidden_dim), hidden_dim)
        self.w_hn = w((hidden_dim, hidden_dim), hidden_dim)
        zeros = lambda: Tensor(np.zeros(hidden_dim, dtype=dtype), requires_grad=True)
        self.b_r, self.b_z, self.b_n = zeros(), zeros(), zeros()
        self.hidden_dim = hidden_dim
        self.in_dim = in_dim

    def weight_dict(self):
        return {"w_ir": self.w_ir, "w_iz": self.w_iz, "w_in": self.w_in,
                "w_hr": self.w_hr, "w_hz": self.w_hz, "w_hn": self.w_hn,
                "b_r": self.b_r, "b_z": self.b_z, "b_n": self.b_n}

    def __call__(self, hidden, x):
        return T.gru_step(hidden, x, self.weight_dict())


class MLP(Module):
    """Stack of Linear layers with ELU hidden activations, linear output."""

    def __init__(self, in_dim, hidden, out_dim, rng, dtype=np.float32,
                 final_scale=1.0):
        sizes = [in_dim] + list(hidden)
        self.layers = [Linear(sizes[i], sizes[i + 1], rng, dtype)
                       for i in range(len(sizes) - 1)]
        self.head = Linear(sizes[-1], out_dim, rng, dtype,
                           init_scale=final_scale)

    def __call__(self, x):
        for layer in self.layers:
            x = T.elu(layer(x))
        return self.head(x)
