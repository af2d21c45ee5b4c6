"""Adam optimizer with a step-halving learning rate schedule."""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Moment accumulators and hyperparameters of Adam.

    Attributes
    ----------
    m, v: dict of numpy.ndarray
        First and second moment estimates by parameter name.
    step: int
        Number of updates applied so far.
    lr, beta1, beta2, eps: float
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=OrderedDict)
    v: dict = field(default_factory=OrderedDict)


def adam_step(params, grads, state):
    """Apply one bias-corrected Adam update in place.

    Parameters
    ----------
    params: dict of numpy.ndarray
        Parameter arrays by name, updated in place.
    grads: dict of numpy.ndarray
        Gradients with the same names and shapes.
    state: AdamState
        Updated in place; moments are created on first use.

    Returns
    -------
    tuple(dict, AdamState)
    """
    if set(params) != set(grads):
        raise ValueError("Parameter and gradient names differ")
    state.step += 1
    correction1 = 1. - state.beta1**state.step
    correction2 = 1. - state.beta2**state.step
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ValueError(
                "Gradient of {} has shape {}, parameter has {}".format(
                    name, grad.shape, value.shape))
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        elif state.m[name].shape != value.shape:
            raise ValueError("Adam moments of {} have shape {}".format(
                name, state.m[name].shape))
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1. - state.beta1) * grad
        v *= state.beta2
        v += (1. - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        value -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(
            value.dtype, copy=False)
    return params, state


def halved_learning_rate(base_lr, step, period):
    """Learning rate halved every `period` steps (0 disables halving)."""
    if not period:
        return base_lr
    return base_lr * 0.5**(step // period)


class Adam:
    """Adam over all parameters of one or more modules."""

    def __init__(self,
                 modules,
                 lr=1e-3,
                 beta1=0.9,
                 beta2=0.999,
                 eps=1e-8,
                 halving_period=0):
        if not isinstance(modules, (list, tuple)):
            modules = [modules]
        self.modules = list(modules)
        self.base_lr = lr
        self.halving_period = halving_period
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def named_parameters(self):
        params = OrderedDict()
        for index, module in enumerate(self.modules):
            prefix = '' if len(self.modules) == 1 else '{}.'.format(index)
            for name, param in module.named_parameters(prefix):
                params[name] = param
        return params

    def zero_grad(self):
        for module in self.modules:
            module.zero_grad()

    def step(self):
        """Update every parameter from its accumulated gradient."""
        self.state.lr = halved_learning_rate(self.base_lr, self.state.step,
                                             self.halving_period)
        named = self.named_parameters()
        params = OrderedDict((name, p.data) for name, p in named.items())
        grads = OrderedDict((name, p.grad) for name, p in named.items())
        adam_step(params, grads, self.state)
