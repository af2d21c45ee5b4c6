"""Central-difference gradient checking."""
import logging

import numpy as np

logger = logging.getLogger(__name__)


def _relative_error(analytic, numeric, floor):
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def _positions(size, max_checks, rng):
    if max_checks is None or size <= max_checks:
        return np.arange(size)
    return np.sort(rng.choice(size, max_checks, replace=False))


def grad_check(module, *inputs, eps=1e-5, floor=1e-6, max_checks=None,
               seed=0):
    """Largest relative error between analytic and numeric gradients.

    The scalar objective is ``sum(r * module(*inputs))`` for a fixed random
    projection ``r``. Every input array and every parameter of `module` is
    perturbed by ``+-eps``.

    Parameters
    ----------
    module: blindsr.nn.Module
        Its ``backward`` returns the input gradient, or a tuple with one
        gradient per input.
    *inputs: numpy.ndarray
        Forward arguments, double precision.
    eps: float
        Perturbation size.
    floor: float
        Lower bound of the relative error denominator.
    max_checks: int, optional
        Check at most this many randomly chosen entries per array.
    seed: int

    Returns
    -------
    float
    """
    rng = np.random.default_rng(seed)
    inputs = [np.array(x, dtype=np.float64) for x in inputs]
    output = module.forward(*inputs)
    projection = rng.standard_normal(output.shape)

    module.zero_grad()
    module.forward(*inputs)
    input_grads = module.backward(projection.copy())
    if not isinstance(input_grads, tuple):
        input_grads = (input_grads, )
    param_grads = {name: param.grad.copy()
                   for name, param in module.named_parameters()}

    def numeric(array, index):
        original = array.flat[index]
        array.flat[index] = original + eps
        plus = module.forward(*inputs)
        array.flat[index] = original - eps
        minus = module.forward(*inputs)
        array.flat[index] = original
        return np.sum((plus - minus) * projection) / (2. * eps)

    worst = 0.
    targets = [(array, grad, 'input {}'.format(i))
               for i, (array, grad) in enumerate(zip(inputs, input_grads))]
    targets.extend((param.data, param_grads[name], name)
                   for name, param in module.named_parameters())
    for array, analytic, name in targets:
        if analytic is None:
            continue
        analytic = np.asarray(analytic).reshape(array.shape)
        for index in _positions(array.size, max_checks, rng):
            error = _relative_error(analytic.flat[index],
                                    numeric(array, index), floor)
            if error > worst:
                worst = float(error)
                logger.debug("Gradient error %s at %s[%s]", error, name,
                             index)
    return worst
