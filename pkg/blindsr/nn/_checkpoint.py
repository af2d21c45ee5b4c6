"""Checkpoint container: parameters, Adam state and metadata in one npz."""
import logging
import os
import tempfile
import zipfile
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import yaml

from ._optim import AdamState

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

_PARAM = 'param/'
_ADAM_M = 'adam/m/'
_ADAM_V = 'adam/v/'
_META = 'meta'


class CheckpointError(Exception):
    """Exception raised for unreadable or mismatching checkpoints."""


@dataclass
class Checkpoint:
    """Contents of a checkpoint file.

    Attributes
    ----------
    params: dict of numpy.ndarray
        Named parameter arrays.
    meta: dict
        ``version``, ``kind``, ``family``, ``scale``, ``step`` and the
        ``config`` snapshot, plus anything else the writer stored.
    adam: AdamState, optional
    """

    params: dict
    meta: dict = field(default_factory=dict)
    adam: AdamState = None

    @property
    def step(self):
        return int(self.meta.get('step', 0))

    @property
    def kind(self):
        return self.meta.get('kind')

    @property
    def family(self):
        return self.meta.get('family')

    def check(self, kind=None, family=None, scale=None):
        """Raise CheckpointError if the checkpoint is not what is expected."""
        expected = {'kind': kind, 'family': family, 'scale': scale}
        for key, value in expected.items():
            if value is not None and self.meta.get(key) != value:
                raise CheckpointError(
                    "Checkpoint has {} {!r}, expected {!r}".format(
                        key, self.meta.get(key), value))
        return self


def _plain(value):
    """Convert tuples and numpy scalars so yaml.safe_dump accepts them."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def save_checkpoint(filename, params, meta=None, adam=None):
    """Write a checkpoint atomically.

    The archive is written to a temporary file in the target directory and
    then renamed over `filename`.

    Parameters
    ----------
    filename: str
    params: dict of numpy.ndarray
    meta: dict, optional
    adam: AdamState, optional

    Returns
    -------
    str
        `filename`
    """
    meta = dict(meta or {})
    meta['version'] = CHECKPOINT_VERSION
    arrays = OrderedDict()
    for name, value in params.items():
        arrays[_PARAM + name] = np.asarray(value)
    if adam is not None:
        meta['adam'] = {
            'lr': adam.lr,
            'beta1': adam.beta1,
            'beta2': adam.beta2,
            'eps': adam.eps,
            'step': adam.step,
        }
        for name in adam.m:
            arrays[_ADAM_M + name] = adam.m[name]
            arrays[_ADAM_V + name] = adam.v[name]
    arrays[_META] = np.array(yaml.safe_dump(_plain(meta), sort_keys=True))

    dirname = os.path.dirname(os.path.abspath(filename))
    os.makedirs(dirname, exist_ok=True)
    handle, tmp_name = tempfile.mkstemp(suffix='.npz', dir=dirname)
    try:
        with os.fdopen(handle, 'wb') as file:
            np.savez(file, **arrays)
        os.replace(tmp_name, filename)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    logger.debug("Wrote checkpoint %s with %s parameter arrays", filename,
                 len(params))
    return filename


def load_checkpoint(filename):
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises
    ------
    CheckpointError
        if the file is missing, unreadable or of another format version.
    """
    if not os.path.isfile(filename):
        raise CheckpointError("Checkpoint {} does not exist".format(filename))
    try:
        with np.load(filename, allow_pickle=False) as archive:
            arrays = {key: archive[key] for key in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError("Cannot read checkpoint {}: {}".format(
            filename, exc)) from exc
    if _META not in arrays:
        raise CheckpointError("Checkpoint {} has no metadata".format(filename))
    meta = yaml.safe_load(str(arrays.pop(_META)))
    if meta.get('version') != CHECKPOINT_VERSION:
        raise CheckpointError(
            "Checkpoint {} has format version {}, expected {}".format(
                filename, meta.get('version'), CHECKPOINT_VERSION))

    params = OrderedDict()
    adam_m = OrderedDict()
    adam_v = OrderedDict()
    for key in sorted(arrays):
        if key.startswith(_PARAM):
            params[key[len(_PARAM):]] = arrays[key]
        elif key.startswith(_ADAM_M):
            adam_m[key[len(_ADAM_M):]] = arrays[key]
        elif key.startswith(_ADAM_V):
            adam_v[key[len(_ADAM_V):]] = arrays[key]
    adam = None
    if 'adam' in meta:
        settings = meta.pop('adam')
        adam = AdamState(m=adam_m, v=adam_v, **settings)
    return Checkpoint(params=params, meta=meta, adam=adam)
