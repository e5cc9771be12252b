"""
Model checkpoints.

Layout (all integers little-endian):

====================  ==========================================================
magic                 ``VFCK``
version               u16
config                u32 length, UTF-8 JSON of the `ModelConfig`
parameter count       u32
per parameter         u16 length + UTF-8 name, u8 ndim, u32 per dimension,
                      float32 data in row-major order
trailer               u32 CRC32 of everything after the magic
====================  ==========================================================
"""
import json
import zlib
import struct
import pathlib

import numpy as np

from vistaformer.errors import FormatError, ChecksumError
from vistaformer.util import safe_overwrite, BinaryReader
from vistaformer.models.config import ModelConfig
from vistaformer.models.vistaformer import build_model

__all__ = ['MAGIC', 'VERSION', 'write_checkpoint', 'read_checkpoint', 'load_model']

MAGIC = b'VFCK'
VERSION = 1


def _encode(model):
    cfg = json.dumps(model.cfg.asdict(), sort_keys=True).encode('utf8')
    params = list(model.named_parameters())
    chunks = [struct.pack('<H', VERSION), struct.pack('<I', len(cfg)), cfg,
              struct.pack('<I', len(params))]
    for name, p in params:
        name = name.encode('utf8')
        chunks.append(struct.pack('<H', len(name)) + name)
        chunks.append(struct.pack('<B{0}I'.format(p.ndim), p.ndim, *p.shape))
        chunks.append(np.ascontiguousarray(p.data, dtype='<f4').tobytes())
    body = b''.join(chunks)
    return MAGIC + body + struct.pack('<I', zlib.crc32(body))


def write_checkpoint(model, path, log=None):
    """Write the config echo and all parameters of `model` to `path`."""
    data = _encode(model)
    with safe_overwrite(path) as tmp:
        tmp.write_bytes(data)
    if log:
        log.info('wrote checkpoint {0} ({1} parameters)'.format(path, model.num_parameters()))
    return path


def read_checkpoint(path):
    """
    The layout is walked and the CRC32 verified before any config or name is decoded.

    :return: pair (`ModelConfig`, dict mapping parameter names to float32 arrays).
    :raises FormatError: bad magic, unsupported version or malformed header.
    :raises TruncatedFileError: the file ends early.
    :raises ChecksumError: the CRC32 trailer does not match.
    """
    path = pathlib.Path(path)
    reader = BinaryReader(path.read_bytes(), path=path)
    if reader.read(4) != MAGIC:
        raise FormatError('{0}: not a checkpoint file'.format(path))
    version = reader.unpack('H')
    if version != VERSION:
        raise FormatError('{0}: unsupported checkpoint version {1}'.format(path, version))
    raw_cfg, raw_params = reader.chunk('I'), []
    for _ in range(reader.unpack('I')):
        name = reader.chunk('H')
        shape = reader.unpack('{0}I'.format(reader.unpack('B')))
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        raw_params.append((name, shape, reader.read(4 * int(np.prod(shape, dtype=np.int64)))))
    body_end = reader.pos
    crc = reader.unpack('I')
    if reader.remaining:
        raise FormatError('{0}: {1} trailing bytes'.format(path, reader.remaining))
    if zlib.crc32(reader.data[4:body_end]) != crc:
        raise ChecksumError('{0}: CRC32 mismatch'.format(path))

    try:
        cfg = ModelConfig.fromdict(json.loads(reader.text(raw_cfg)))
    except (ValueError, TypeError, KeyError) as e:
        raise FormatError('{0}: invalid config echo: {1}'.format(path, e))
    return cfg, {
        reader.text(name): np.frombuffer(data, dtype='<f4').reshape(shape)
        for name, shape, data in raw_params}


def load_model(path):
    """Rebuild the model stored in a checkpoint, with bit-identical parameters."""
    cfg, params = read_checkpoint(path)
    model = build_model(cfg)
    own = dict(model.named_parameters())
    if set(own) != set(params):
        raise FormatError('{0}: parameter names do not match the config'.format(path))
    for name, p in own.items():
        if p.shape != params[name].shape:
            raise FormatError('{0}: parameter {1} has shape {2}, expected {3}'.format(
                path, name, params[name].shape, p.shape))
        p.data = params[name].astype(np.float32)
    return model
