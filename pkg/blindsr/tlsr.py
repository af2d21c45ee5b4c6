"""Transitional-learning super-resolution network (TLSR).

The network reads::

    x - mean -> head conv -> n residual blocks (shared by every DoT)
             -> m transitional residual blocks (driven by tau_b)
             -> (+ head features) -> sub-pixel upsampler -> tail conv + mean

Training minimizes the L1 distance between the output and the HR image,
with the DoT of every sample taken from its synthetic degradation (or
estimated by DoTNet when training jointly).

Each degradation of a family defines its own MAP restoration problem; the
primaries learn the solutions at the two ends of the family, and the
transitional blocks interpolate between them for the DoTs in between.
"""
import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._random import child_rng
from .degradation import (ADDITIVE_FAMILIES, CONVOLUTIVE_FAMILIES,
                          DegradationFamily, degrade)
from .dotnet import dot_estimate, dot_loss
from .imaging import (augment, bicubic_resize, dihedral_transform, mean_rgb,
                      random_box, random_crops, to_images, to_tensor)
from .nn import (Adam, CheckpointError, Conv2d, Module, PixelShuffle,
                 ResidualBlock, Sequential, check_finite, l1_loss,
                 load_checkpoint, save_checkpoint)
from .transitional import TransitionalResidualBlock, check_taus

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'tlsr'

TRAIN_MODES = ('transitional', 'baseline0', 'baseline1')

# Families whose degradation commutes with flips and quarter turns.
_ISOTROPIC_FAMILIES = ('noise', 'blur')


@dataclass
class TLSRConfig:
    """Architecture, degradation family and training schedule of TLSR.

    The defaults are desk-scale; a full-size network uses
    ``trunk_blocks=32``, ``channels=128`` and ``transitional_blocks=8``.
    """

    trunk_blocks: int = 4
    channels: int = 16
    transitional_blocks: int = 2
    scale: int = 2
    family: str = 'noise'
    param_min: float = None
    param_max: float = None
    kernel_size: int = 21
    base_sigma: float = 0.2
    noise_level: float = 0.
    padding: str = 'zero'
    batch_size: int = 16
    lr_patch: int = 32
    learning_rate: float = 5e-4
    lr_halving_period: int = 2000
    steps: int = 5000
    train_mode: str = 'transitional'
    joint_dot: bool = False
    dtype: str = 'float32'

    def __post_init__(self):
        for name in ('trunk_blocks', 'channels', 'transitional_blocks',
                     'scale', 'batch_size', 'lr_patch'):
            if getattr(self, name) < 1:
                raise ValueError("TLSR {} must be at least 1, got {}".format(
                    name, getattr(self, name)))
        if self.train_mode not in TRAIN_MODES:
            raise ValueError("Unknown train mode {!r}, choose from {}".format(
                self.train_mode, ', '.join(TRAIN_MODES)))
        if self.joint_dot and self.train_mode != 'transitional':
            raise ValueError("Joint DoT training needs the transitional "
                             "train mode")
        # validates family and bounds
        self.degradations()

    @classmethod
    def from_settings(cls, cfg):
        """Build from the flat configuration dictionary."""
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in cfg.items() if k in names})

    def degradations(self):
        """The :class:`DegradationFamily` this network is trained on."""
        bounds = None
        if self.param_min is not None and self.param_max is not None:
            bounds = (self.param_min, self.param_max)
        return DegradationFamily(self.family, self.scale, bounds,
                                 self.kernel_size, self.base_sigma,
                                 self.noise_level)

    @property
    def fixed_tau(self):
        """DoT a baseline is trained and evaluated with, None for TLSR."""
        return {'baseline0': 0., 'baseline1': 1.}.get(self.train_mode)


def _upsampler(channels, scale, padding, rng):
    if scale == 1:
        return Sequential()
    if scale & (scale - 1) == 0:
        layers = []
        for _ in range(int(np.log2(scale))):
            layers.append(Conv2d(channels, 4 * channels, 3, padding,
                                 rng=rng))
            layers.append(PixelShuffle(2))
        return Sequential(*layers)
    return Sequential(
        Conv2d(channels, scale * scale * channels, 3, padding, rng=rng),
        PixelShuffle(scale))


class TransitionalStack(Module):
    """Sequence of transitional residual blocks sharing one DoT vector."""

    def __init__(self, blocks):
        super().__init__()
        for index, block in enumerate(blocks):
            setattr(self, str(index), block)

    def forward(self, x, taus):
        for block in self.children():
            x = block.forward(x, taus)
        return x

    def backward(self, grad):
        grad_taus = 0.
        for block in reversed(self.children()):
            grad, block_taus = block.backward(grad)
            grad_taus = grad_taus + block_taus
        return grad, grad_taus

    def materialize(self, tau):
        return Sequential(*(block.materialize(tau)
                            for block in self.children()))


class TLSRNet(Module):
    """The TLSR network.

    Parameters
    ----------
    config: TLSRConfig
    rng: numpy.random.Generator, optional
        Source of the initial weights.
    mean: sequence of float, optional
        Mean RGB value subtracted from inputs and added to outputs.
    """

    def __init__(self, config=None, rng=None, mean=None):
        super().__init__()
        self.config = config or TLSRConfig()
        rng = np.random.default_rng() if rng is None else rng
        cfg = self.config
        self.mean = np.zeros(3) if mean is None else np.asarray(
            mean, dtype=np.float64)
        self.head = Conv2d(3, cfg.channels, 3, cfg.padding, rng=rng)
        self.trunk = Sequential(*(ResidualBlock(cfg.channels, 3, cfg.padding,
                                                rng=rng)
                                  for _ in range(cfg.trunk_blocks)))
        self.transitional = TransitionalStack([
            TransitionalResidualBlock(cfg.channels, 3, cfg.padding, rng=rng)
            for _ in range(cfg.transitional_blocks)
        ])
        self.upsampler = _upsampler(cfg.channels, cfg.scale, cfg.padding, rng)
        self.tail = Conv2d(cfg.channels, 3, 3, cfg.padding, rng=rng)
        self.astype(cfg.dtype)

    @property
    def family(self):
        return self.config.family

    @property
    def scale(self):
        return self.config.scale

    def _mean(self):
        return self.mean.astype(self.config.dtype)[None, :, None, None]

    def _run(self, x, transitional):
        if x.ndim != 4 or x.shape[1] != 3:
            raise ValueError("TLSR expects (B, 3, H, W) input, got {}".format(
                x.shape))
        x = x.astype(self.config.dtype, copy=False)
        features = self.head.forward(x - self._mean())
        body = transitional(self.trunk.forward(features)) + features
        return self.tail.forward(self.upsampler.forward(body)) + self._mean()

    def forward(self, x, taus):
        """Super-resolve a batch with one DoT per sample."""
        taus = check_taus(taus, x.shape[0])
        return self._run(x, lambda h: self.transitional.forward(h, taus))

    def plain_forward(self, x, tau):
        """Super-resolve with plain blocks holding the parameters at `tau`.

        Every sample uses the same DoT and no grouped convolution is
        involved.
        """
        plain = self.transitional.materialize(tau)
        return self._run(x, plain.forward)

    def backward(self, grad):
        """Return the gradients of the input and of the DoT vector."""
        grad = self.upsampler.backward(self.tail.backward(grad))
        grad_trunk, grad_taus = self.transitional.backward(grad)
        grad_features = self.trunk.backward(grad_trunk) + grad
        return self.head.backward(grad_features), grad_taus


def tlsr_forward(x, taus, model):
    """Super-resolve a ``(B, 3, H, W)`` batch, returns ``(B, 3, sH, sW)``."""
    return model.forward(x, taus)


@dataclass
class TLSRTrainingResult:
    """Trained TLSR network with its optimizer state and loss curve."""

    model: TLSRNet
    optimizer: Adam = None
    dot_model: object = None
    loss_history: list = field(default_factory=list)

    @property
    def step(self):
        return 0 if self.optimizer is None else self.optimizer.state.step

    def save(self, filename, config=None):
        """Write the SR network and its optimizer state as a checkpoint."""
        return save_tlsr(filename, self.model, step=self.step,
                         adam=self._sr_adam_state(), config=config)

    def _sr_adam_state(self):
        if self.optimizer is None:
            return None
        state = self.optimizer.state
        if len(self.optimizer.modules) == 1:
            return state
        # joint training: keep the moments of the SR network only
        subset = type(state)(lr=state.lr,
                             beta1=state.beta1,
                             beta2=state.beta2,
                             eps=state.eps,
                             step=state.step)
        for name in state.m:
            if name.startswith('0.'):
                subset.m[name[2:]] = state.m[name]
                subset.v[name[2:]] = state.v[name]
        return subset


def _training_pair(images, family, config, rng, tau=None):
    """Degrade a random HR crop, returns ``(lr, hr, tau)``."""
    hr_size = config.lr_patch * config.scale
    img = images[int(rng.integers(len(images)))]
    hr = random_box(img.shape, hr_size, rng).crop(img)
    spec = family.sample(rng) if tau is None else family.spec_at(tau)
    if config.family in _ISOTROPIC_FAMILIES:
        lr = degrade(hr, spec, rng)
        lr, hr = augment(lr, hr, rng)
    else:
        hr = dihedral_transform(hr, int(rng.integers(8)))
        lr = degrade(hr, spec, rng)
    return lr, hr, spec.tau if tau is None else tau


def _estimate_batch(dot_model, dot_config, lrs, rng):
    """DoTNet predictions of ``T`` random patches per LR image."""
    patches = [
        patch for lr in lrs for patch, _ in random_crops(
            lr, dot_config.patch_count, dot_config.patch_size, rng)
    ]
    batch = to_tensor(patches).astype(dot_model.config.dtype)
    preds = dot_model.forward(batch).reshape(len(lrs), dot_config.patch_count)
    return preds


def tlsr_train(config, images, seed=0, mean=None, dot_model=None,
               model=None, log_every=50):
    """Train a TLSR network (or a single-primary baseline).

    Parameters
    ----------
    config: TLSRConfig
    images: list of numpy.ndarray
        HR training images.
    seed: int
    mean: sequence of float, optional
        Dataset mean RGB; computed from `images` when omitted.
    dot_model: blindsr.dotnet.DoTNet, optional
        Needed when ``config.joint_dot`` is set; trained along.
    model: TLSRNet, optional
        Continue training this network.
    log_every: int

    Returns
    -------
    TLSRTrainingResult

    Raises
    ------
    ValueError
        for an empty dataset, collapsed bounds in transitional mode or a
        missing DoTNet for joint training.
    blindsr.nn.NumericalError
        if the loss or a gradient becomes non-finite.
    """
    if not images:
        raise ValueError("Cannot train TLSR on an empty dataset")
    family = config.degradations()
    if config.train_mode == 'transitional' and not family.transitional:
        raise ValueError(
            "Transitional training needs param_max > param_min, got "
            "bounds {}".format(family.bounds))
    if config.joint_dot and dot_model is None:
        raise ValueError("Joint DoT training needs a DoTNet")
    if mean is None:
        mean = mean_rgb(images)
    if model is None:
        model = TLSRNet(config, child_rng(seed, 'tlsr', 'init'), mean)
    modules = [model, dot_model] if config.joint_dot else [model]
    optimizer = Adam(modules,
                     lr=config.learning_rate,
                     halving_period=config.lr_halving_period)
    result = TLSRTrainingResult(model, optimizer,
                                dot_model if config.joint_dot else None)
    rng = child_rng(seed, 'tlsr', 'train', config.train_mode)
    dot_config = dot_model.config if dot_model is not None else None

    logger.info(
        "Training TLSR (%s) x%s on %s images, family %s, bounds %s, "
        "%s parameters", config.train_mode, config.scale, len(images),
        family.family, family.bounds, model.num_parameters())
    for step in range(1, config.steps + 1):
        lrs, hrs, taus = zip(*(_training_pair(images, family, config, rng,
                                              config.fixed_tau)
                               for _ in range(config.batch_size)))
        taus = np.array(taus)
        optimizer.zero_grad()
        dot_term = 0.
        if config.joint_dot:
            preds = _estimate_batch(dot_model, dot_config, lrs, rng)
            dot_term, grad_preds = dot_loss(preds, taus)
            taus_in = np.clip(preds.mean(axis=1).astype(np.float64), 0., 1.)
        else:
            taus_in = taus
        x = to_tensor(list(lrs)).astype(config.dtype)
        y = to_tensor(list(hrs)).astype(config.dtype)
        out = model.forward(x, taus_in)
        loss, grad = l1_loss(out, y)
        check_finite(loss, 'TLSR loss')
        _, grad_taus = model.backward(grad)
        if config.joint_dot:
            grad_preds = grad_preds + np.repeat(
                grad_taus[:, None] / dot_config.patch_count,
                dot_config.patch_count,
                axis=1)
            dot_model.backward(
                grad_preds.reshape(-1).astype(dot_model.config.dtype))
        for module in modules:
            for name, param in module.named_parameters():
                check_finite(param.grad, 'gradient of ' + name)
        optimizer.step()
        result.loss_history.append((step, loss + dot_term))
        if step % log_every == 0 or step == 1:
            logger.info("TLSR step %s/%s, lr %.2e, loss %.5f", step,
                        config.steps, optimizer.state.lr, loss + dot_term)
    return result


def check_pair(model, dot_model):
    """Raise CheckpointError if an SR network and DoTNet do not belong."""
    if dot_model is not None and dot_model.family != model.family:
        raise CheckpointError(
            "DoTNet was trained on family {!r}, the SR network on {!r}".format(
                dot_model.family, model.family))


def tlsr_infer(img, model, dot_model=None, rng=None, tau=None):
    """Blind super-resolution of one LR image.

    The DoT is estimated once from random patches and the image is
    super-resolved in a single forward pass.

    Parameters
    ----------
    img: numpy.ndarray
        ``H x W x 3`` LR image.
    model: TLSRNet
    dot_model: blindsr.dotnet.DoTNet, optional
        Required unless `tau` is given or the model is a baseline.
    rng: numpy.random.Generator, optional
        Patch positions of the DoT estimate.
    tau: float, optional
        Use this DoT instead of estimating it.

    Returns
    -------
    tuple(numpy.ndarray, float)
        The ``sH x sW x 3`` output and the DoT used.
    """
    check_pair(model, dot_model)
    if tau is None:
        tau = model.config.fixed_tau
    if tau is None:
        if dot_model is None:
            raise ValueError("A DoTNet is needed to estimate the DoT")
        tau = min(max(dot_estimate(img, dot_model, rng=rng), 0.), 1.)
    out = model.forward(to_tensor(img), [tau])
    return to_images(out.astype(np.float64))[0], float(tau)


def tlsr_real(img, denoise_pair, deblur_pair, rng=None, return_taus=False):
    """Two-stage restoration: denoise at x1, then deblur and upscale.

    Parameters
    ----------
    img: numpy.ndarray
        ``H x W x 3`` LR image.
    denoise_pair: tuple(TLSRNet, DoTNet)
        Additive-family networks, the SR network at scale 1.
    deblur_pair: tuple(TLSRNet, DoTNet)
        Convolutive-family networks at the target scale.
    rng: numpy.random.Generator, optional
    return_taus: bool
        Also return the two estimated DoTs.

    Raises
    ------
    ValueError
        if the first stage is not an additive-family network at scale 1 or
        the second stage is not a convolutive-family network.
    """
    denoiser, denoise_dot = denoise_pair
    deblurrer, deblur_dot = deblur_pair
    if denoiser.family not in ADDITIVE_FAMILIES:
        raise ValueError("The denoising stage must remove noise, got a "
                         "network of family {!r}".format(denoiser.family))
    if denoiser.scale != 1:
        raise ValueError("The denoising stage must work at scale 1, got "
                         "x{}".format(denoiser.scale))
    if deblurrer.family not in CONVOLUTIVE_FAMILIES:
        raise ValueError("The deblurring stage must remove blur, got a "
                         "network of family {!r}".format(deblurrer.family))
    rng = np.random.default_rng(0) if rng is None else rng
    denoised, tau_noise = tlsr_infer(img, denoiser, denoise_dot, rng)
    restored, tau_blur = tlsr_infer(denoised, deblurrer, deblur_dot, rng)
    logger.debug("Two-stage restoration with noise DoT %.3f, blur DoT %.3f",
                 tau_noise, tau_blur)
    if return_taus:
        return restored, (tau_noise, tau_blur)
    return restored


def bicubic_upscale(img, scale):
    """Plain bicubic upscaling, the reference every network is compared to."""
    return bicubic_resize(img, scale, antialias=True)


def save_tlsr(filename, model, step=0, adam=None, config=None):
    """Write a TLSR checkpoint; primaries are stored, never their blends."""
    meta = {
        'kind': CHECKPOINT_KIND,
        'family': model.family,
        'scale': model.scale,
        'step': step,
        'architecture': asdict(model.config),
        'mean': [float(v) for v in model.mean],
        'config': config or {},
    }
    return save_checkpoint(filename, model.state_dict(), meta, adam)


def load_tlsr(filename, family=None, scale=None):
    """Restore a TLSR network from a checkpoint.

    Raises
    ------
    CheckpointError
        if the checkpoint is of another kind, family or scale, or does not
        fit the stored architecture.
    """
    checkpoint = load_checkpoint(filename).check(kind=CHECKPOINT_KIND,
                                                 family=family,
                                                 scale=scale)
    try:
        config = TLSRConfig(**checkpoint.meta['architecture'])
    except (TypeError, ValueError) as exc:
        raise CheckpointError("Invalid architecture in {}: {}".format(
            filename, exc)) from exc
    model = TLSRNet(config, np.random.default_rng(0), checkpoint.meta['mean'])
    try:
        model.load_state_dict(checkpoint.params)
    except (KeyError, ValueError) as exc:
        raise CheckpointError("Checkpoint {} does not fit TLSR: {}".format(
            filename, exc)) from exc
    return model, checkpoint


__all__ = [
    'TRAIN_MODES',
    'TLSRConfig',
    'TLSRNet',
    'TLSRTrainingResult',
    'bicubic_upscale',
    'check_pair',
    'load_tlsr',
    'save_tlsr',
    'tlsr_forward',
    'tlsr_infer',
    'tlsr_real',
    'tlsr_train',
]
