"""Degree-of-transitionality (DoT) estimation from random LR patches.

DoTNet scores fixed-size patches: a shallow convolution, a stack of
bottleneck blocks separated by average pooling, global average pooling and
two fully connected layers with a sigmoid output. The DoT of an image is
the mean score of ``patch_count`` random patches.
"""
import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from ._random import child_rng
from .degradation import CONVOLUTIVE_FAMILIES, degrade
from .imaging import random_box, random_crops, to_tensor
from .nn import (Adam, AvgPool2d, BottleneckBlock, CheckpointError, Conv2d,
                 GlobalAvgPool2d, Linear, Module, ReLU, Sequential, Sigmoid,
                 check_finite, load_checkpoint, save_checkpoint)

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'dotnet'

# Share of the training images held out when no validation set is given.
VALIDATION_FRACTION = 0.2


@dataclass
class DoTNetConfig:
    """Architecture and training schedule of DoTNet.

    Attributes
    ----------
    patch_count: int
        Patches ``T`` per image.
    patch_size: int
        Side of each square LR patch.
    bottleneck_blocks: int
    channels: int
        Width of the feature maps between blocks.
    reduced_channels: int
        Width inside the bottleneck blocks.
    fc_hidden: int
        Width of the hidden fully connected layer.
    pool_size: int
        Average pooling factor between consecutive blocks.
    batch_size: int
        Images per training step.
    crop: int
        Side of the LR crop the patches are drawn from during training.
    learning_rate: float
    steps: int
    validate_every: int
    dtype: str
    """

    patch_count: int = 8
    patch_size: int = 32
    bottleneck_blocks: int = 4
    channels: int = 16
    reduced_channels: int = 8
    fc_hidden: int = 32
    pool_size: int = 2
    batch_size: int = 8
    crop: int = 48
    learning_rate: float = 1e-3
    steps: int = 2000
    validate_every: int = 250
    dtype: str = 'float32'

    _SETTINGS = {
        'dot_patch_count': 'patch_count',
        'dot_patch_size': 'patch_size',
        'dot_channels': 'channels',
        'dot_reduced_channels': 'reduced_channels',
        'dot_fc_hidden': 'fc_hidden',
        'dot_batch_size': 'batch_size',
        'dot_crop': 'crop',
        'dot_learning_rate': 'learning_rate',
        'dot_steps': 'steps',
        'dot_validate_every': 'validate_every',
        'dtype': 'dtype',
    }

    def __post_init__(self):
        for name in ('patch_count', 'patch_size', 'bottleneck_blocks',
                     'channels', 'reduced_channels', 'fc_hidden', 'pool_size',
                     'batch_size', 'crop'):
            if getattr(self, name) < 1:
                raise ValueError("DoTNet {} must be positive, got {}".format(
                    name, getattr(self, name)))
        reduction = self.pool_size**(self.bottleneck_blocks - 1)
        if self.patch_size % reduction:
            raise ValueError(
                "Patch size {} is not divisible by the total pooling factor "
                "{}".format(self.patch_size, reduction))
        if self.crop < self.patch_size:
            raise ValueError("Training crop {} is smaller than patches of "
                             "{}".format(self.crop, self.patch_size))

    @classmethod
    def from_settings(cls, cfg):
        """Build from the flat configuration dictionary."""
        kwargs = {
            name: cfg[key]
            for key, name in cls._SETTINGS.items() if key in cfg
        }
        return cls(**kwargs)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in values.items() if k in known})

    def check_family(self, family):
        """Enforce that patches cover the blur kernel of `family`.

        Parameters
        ----------
        family: blindsr.degradation.DegradationFamily
        """
        if (family.family in CONVOLUTIVE_FAMILIES
                and self.patch_size < family.kernel_size):
            raise ValueError(
                "DoT patch size {} is smaller than the blur kernel size "
                "{}".format(self.patch_size, family.kernel_size))


class DoTNet(Module):
    """Assessment-aware patch scoring network."""

    def __init__(self, config=None, rng=None, family=None):
        super().__init__()
        self.config = config or DoTNetConfig()
        self.family = family
        rng = np.random.default_rng() if rng is None else rng
        cfg = self.config
        layers = [Conv2d(3, cfg.channels, 3, rng=rng), ReLU()]
        for index in range(cfg.bottleneck_blocks):
            if index:
                layers.append(AvgPool2d(cfg.pool_size))
            layers.append(
                BottleneckBlock(cfg.channels, cfg.reduced_channels, rng=rng))
        layers.append(GlobalAvgPool2d())
        self.features = Sequential(*layers)
        self.head = Sequential(
            Linear(cfg.channels, cfg.fc_hidden, rng=rng),
            ReLU(),
            Linear(cfg.fc_hidden, 1, rng=rng),
            Sigmoid(),
        )
        self.astype(cfg.dtype)

    def forward(self, patches):
        """Score a ``(N, 3, p, p)`` batch of patches, returns ``(N,)``."""
        if patches.ndim != 4 or patches.shape[1] != 3:
            raise ValueError(
                "DoTNet expects (N, 3, p, p) patches, got {}".format(
                    patches.shape))
        return self.head.forward(self.features.forward(patches))[:, 0]

    def backward(self, grad):
        return self.features.backward(self.head.backward(grad[:, None]))


def aggregate(predictions):
    """Order independent mean of per-patch predictions."""
    predictions = np.sort(np.asarray(predictions, dtype=np.float64))
    return float(np.sum(predictions) / predictions.size)


def _patch_batch(img, config, rng, dtype):
    crops = random_crops(img, config.patch_count, config.patch_size, rng)
    return to_tensor([patch for patch, _ in crops]).astype(dtype)


def dot_estimate(img, model, config=None, rng=None):
    """Estimate the DoT of an LR image.

    Parameters
    ----------
    img: numpy.ndarray
        ``H x W x 3`` LR image, at least ``patch_size`` on each side.
    model: DoTNet
    config: DoTNetConfig, optional
        Defaults to the configuration of `model`.
    rng: numpy.random.Generator, optional
        Positions of the random patches.

    Returns
    -------
    float
        The mean patch score, in ``[0, 1]``.
    """
    config = config or model.config
    rng = np.random.default_rng(0) if rng is None else rng
    batch = _patch_batch(img, config, rng, model.config.dtype)
    return aggregate(model.forward(batch))


def dot_loss(preds, targets):
    """Mean absolute error between patch predictions and image DoTs.

    Parameters
    ----------
    preds: numpy.ndarray
        ``(B, T)`` per-patch predictions.
    targets: numpy.ndarray
        ``(B,)`` ground-truth DoT of each image.

    Returns
    -------
    tuple(float, numpy.ndarray)
        Loss and its gradient with respect to `preds`.
    """
    preds = np.asarray(preds)
    targets = np.asarray(targets, dtype=preds.dtype)
    if preds.ndim != 2 or targets.shape != (preds.shape[0], ):
        raise ValueError(
            "Predictions of shape {} do not match targets of shape {}".format(
                preds.shape, targets.shape))
    for name, values in (('Predictions', preds), ('Targets', targets)):
        if np.any(values < 0.) or np.any(values > 1.):
            raise ValueError("{} must lie in [0, 1]".format(name))
    diff = preds - targets[:, None]
    loss = float(np.mean(np.abs(diff)))
    return loss, np.sign(diff) / diff.size


@dataclass
class DoTTrainingResult:
    """Trained DoTNet with its optimizer state and learning curves."""

    model: DoTNet
    family: object
    optimizer: Adam = None
    loss_history: list = field(default_factory=list)
    mae_history: list = field(default_factory=list)

    @property
    def step(self):
        return 0 if self.optimizer is None else self.optimizer.state.step

    def save(self, filename, config=None):
        """Write the model and optimizer state as a checkpoint."""
        return save_dotnet(filename, self.model, self.family,
                           step=self.step,
                           adam=None if self.optimizer is None else
                           self.optimizer.state,
                           config=config)


def _training_sample(images, family, config, rng):
    """Degrade a random HR crop; return the LR crop and its DoT."""
    hr_size = config.crop * family.scale
    img = images[int(rng.integers(len(images)))]
    box = random_box(img.shape, hr_size, rng)
    spec = family.sample(rng)
    lr = degrade(box.crop(img), spec, rng)
    return lr, spec.tau


def hold_out(images, seed, fraction=VALIDATION_FRACTION):
    """Split HR images into training and validation images.

    A seeded share of `fraction`, at least one image, is held out. A single
    image is used for both training and validation.

    Returns
    -------
    tuple(list, list)
        Training and validation images, each in their original order.
    """
    images = list(images)
    if len(images) < 2:
        logger.warning("Only %s training image, validating DoTNet on the "
                       "training data", len(images))
        return images, images
    count = int(round(fraction * len(images)))
    count = min(max(count, 1), len(images) - 1)
    order = child_rng(seed, 'dot', 'hold-out').permutation(len(images))
    held = set(order[:count].tolist())
    logger.info("Holding out %s of %s training images for the DoT "
                "validation", count, len(images))
    return ([img for i, img in enumerate(images) if i not in held],
            [img for i, img in enumerate(images) if i in held])


def validation_set(images, family, seed, crop=None):
    """Fixed degraded validation images on the evaluation grid.

    Returns
    -------
    list of tuple(numpy.ndarray, float, float)
        ``(lr_image, level, tau)`` per image and level.
    """
    samples = []
    for i, img in enumerate(images):
        if crop is not None:
            size = crop * family.scale
            top = (img.shape[0] - size) // 2
            left = (img.shape[1] - size) // 2
            if top < 0 or left < 0:
                raise ValueError("Validation image {} is smaller than "
                                 "{}x{}".format(i, size, size))
            img = img[top:top + size, left:left + size]
        for j, level in enumerate(family.levels()):
            spec = family.spec(level)
            lr = degrade(img, spec, child_rng(seed, 'dot', 'validation', i,
                                              j))
            samples.append((lr, float(level), spec.tau))
    return samples


def validation_mae(model, samples, seed, config=None):
    """Mean absolute DoT error over a validation set."""
    errors = [
        abs(dot_estimate(lr, model, config,
                         child_rng(seed, 'dot', 'validation-crops', k)) - tau)
        for k, (lr, _, tau) in enumerate(samples)
    ]
    return float(np.mean(errors))


def train_dotnet(images,
                 family,
                 config=None,
                 seed=0,
                 validation_images=None,
                 model=None,
                 log_every=50):
    """Train DoTNet on degradations sampled uniformly from a family.

    Parameters
    ----------
    images: list of numpy.ndarray
        HR training images, ``H x W x 3``.
    family: blindsr.degradation.DegradationFamily
    config: DoTNetConfig, optional
    seed: int
    validation_images: list of numpy.ndarray, optional
        HR images for the validation MAE, evaluated on the family's grid.
    model: DoTNet, optional
        Continue training this model.
    log_every: int

    Returns
    -------
    DoTTrainingResult

    Raises
    ------
    ValueError
        if `images` is empty or the patch size is smaller than the kernel.
    """
    if not images:
        raise ValueError("Cannot train DoTNet on an empty dataset")
    config = config or DoTNetConfig()
    config.check_family(family)
    if model is None:
        model = DoTNet(config, child_rng(seed, 'dot', 'init'), family.family)
    model.family = family.family
    optimizer = Adam(model, lr=config.learning_rate)
    result = DoTTrainingResult(model, family, optimizer)
    rng = child_rng(seed, 'dot', 'train')
    samples = None
    if validation_images:
        samples = validation_set(validation_images, family, seed,
                                 crop=config.crop)

    logger.info("Training DoTNet on %s images, family %s, bounds %s",
                len(images), family.family, family.bounds)
    for step in range(1, config.steps + 1):
        lrs, taus = zip(*(_training_sample(images, family, config, rng)
                          for _ in range(config.batch_size)))
        patches = np.concatenate(
            [_patch_batch(lr, config, rng, config.dtype) for lr in lrs])
        optimizer.zero_grad()
        preds = model.forward(patches)
        loss, grad = dot_loss(
            np.clip(preds, 0., 1.).reshape(len(lrs), config.patch_count),
            np.array(taus))
        check_finite(loss, 'DoTNet loss')
        model.backward(grad.reshape(-1).astype(preds.dtype))
        for name, param in model.named_parameters():
            check_finite(param.grad, 'gradient of ' + name)
        optimizer.step()
        result.loss_history.append((step, loss))
        if step % log_every == 0 or step == 1:
            logger.info("DoTNet step %s/%s, loss %.5f", step, config.steps,
                        loss)
        if samples and (step % config.validate_every == 0
                        or step == config.steps):
            mae = validation_mae(model, samples, seed, config)
            result.mae_history.append((step, mae))
            logger.info("DoTNet step %s, validation MAE %.5f", step, mae)
    return result


@dataclass
class DoTStatistics:
    """Distribution of estimated DoTs per degradation level."""

    rows: list
    spearman: float

    @property
    def mae(self):
        """Mean absolute error over all images and levels."""
        return float(np.mean([row['mae'] for row in self.rows]))


def dot_statistics(model, images, family, seed, config=None):
    """Summarize the estimated DoT on every level of the evaluation grid.

    Parameters
    ----------
    model: DoTNet
    images: list of numpy.ndarray
        HR test images.
    family: blindsr.degradation.DegradationFamily
    seed: int
    config: DoTNetConfig, optional

    Returns
    -------
    DoTStatistics
        One row per level with ``level``, ``tau``, ``mean``, ``std``,
        ``min``, ``max`` and ``mae`` of the estimates, and the Spearman rank
        correlation between level and mean estimate.
    """
    if not images:
        raise ValueError("Cannot compute DoT statistics without images")
    rows = []
    for j, level in enumerate(family.levels()):
        spec = family.spec(level)
        estimates = []
        for i, img in enumerate(images):
            lr = degrade(img, spec, child_rng(seed, 'dot', 'stats', i, j))
            estimates.append(
                dot_estimate(lr, model, config,
                             child_rng(seed, 'dot', 'stats-crops', i, j)))
        estimates = np.array(estimates)
        rows.append({
            'level': float(level),
            'tau': spec.tau,
            'mean': float(estimates.mean()),
            'std': float(estimates.std()),
            'min': float(estimates.min()),
            'max': float(estimates.max()),
            'mae': float(np.mean(np.abs(estimates - spec.tau))),
        })
    means = [row['mean'] for row in rows]
    if len(rows) < 2 or np.ptp(means) == 0:
        spearman = float('nan')
    else:
        spearman = float(stats.spearmanr([row['level'] for row in rows],
                                         means).correlation)
    logger.info("DoT rank correlation over %s levels: %.3f", len(rows),
                spearman)
    return DoTStatistics(rows, spearman)


def save_dotnet(filename, model, family, step=0, adam=None, config=None):
    """Write a DoTNet checkpoint."""
    meta = {
        'kind': CHECKPOINT_KIND,
        'family': family.family,
        'scale': family.scale,
        'bounds': list(family.bounds),
        'step': step,
        'architecture': asdict(model.config),
        'config': config or {},
    }
    return save_checkpoint(filename, model.state_dict(), meta, adam)


def load_dotnet(filename, family=None):
    """Restore a DoTNet from a checkpoint.

    Raises
    ------
    CheckpointError
        if the checkpoint is not a DoTNet checkpoint, belongs to another
        family or does not fit the stored architecture.
    """
    checkpoint = load_checkpoint(filename).check(kind=CHECKPOINT_KIND,
                                                 family=family)
    config = DoTNetConfig.from_dict(checkpoint.meta['architecture'])
    model = DoTNet(config, np.random.default_rng(0), checkpoint.family)
    try:
        model.load_state_dict(checkpoint.params)
    except (KeyError, ValueError) as exc:
        raise CheckpointError("Checkpoint {} does not fit DoTNet: {}".format(
            filename, exc)) from exc
    return model, checkpoint
