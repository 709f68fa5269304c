"""Adaptive-moment optimizer with decoupled weight decay."""

import numpy as np


class Adam:
    """Adam with bias correction; weight decay is decoupled (AdamW-style),
    applied directly to parameters and never entering the moment estimates.
    """

    def __init__(self, params, lr=1e-4, betas=(0.9, 0.999), eps=1e-8,
                 weight_decay=0.0):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = float(weight_decay)
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            g = g.astype(p.data.dtype, copy=False)
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.data = p.data - self.lr * update


def adam_step(params, grads, state):
    """Functional single step: updates `state` in place, returns new values.

    `state` is an Adam instance whose `params` match; `grads` is a list of
    arrays aligned with params.
    """
    if len(grads) != len(state.params):
        raise ValueError("gradient list does not match parameter list")
    for p, g in zip(state.params, grads):
        if np.shape(g) != p.data.shape:
            raise ValueError(f"gradient shape {np.shape(g)} does not match "
                             f"parameter shape {p.data.shape}")
        p.grad = np.asarray(g, dtype=p.data.dtype)
    state.step()
    return [p.data for p in state.params]
