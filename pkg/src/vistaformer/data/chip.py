"""
Samples and their binary file format.

Layout (all integers little-endian):

===============  ===============================================================
magic            ``SITS``
version          u16
dtype code       u8, 0 = float32
flags            u8, bit 0 set if a cloud mask section follows the labels
dims             u32 C, T, H, W
sample id        u16 length + UTF-8
input            C*T*H*W values of the dtype, row-major
labels           H*W u8
cloud mask       T*H*W u8 (0 or 1), if flagged
trailer          u32 CRC32 of everything after the magic
===============  ===============================================================
"""
import zlib
import struct
import pathlib
import collections

import numpy as np

from vistaformer.errors import FormatError, ChecksumError, TruncatedFileError
from vistaformer.util import safe_overwrite, BinaryReader

__all__ = ['IGNORE', 'MAGIC', 'VERSION', 'SitsChip', 'write_chip', 'read_chip']

IGNORE = 255
MAGIC = b'SITS'
VERSION = 1
DTYPES = {0: np.dtype('<f4')}
FLAG_MASK = 1
HEADER = struct.Struct('<HBB4I')


class SitsChip(collections.namedtuple('SitsChip', 'input labels cloud_mask sample_id')):

    """
    One sample: `input` (C, T, H, W) float32, `labels` (H, W) uint8 with values below the
    number of classes or `IGNORE`, optional `cloud_mask` (T, H, W) bool.
    """

    @property
    def shape(self):
        return self.input.shape

    def replace(self, **kw):
        return self._replace(**kw)

    def equals(self, other):
        if self.sample_id != other.sample_id or (self.cloud_mask is None) != \
                (other.cloud_mask is None):
            return False
        return all(
            a.dtype == b.dtype and np.array_equal(a, b)
            for a, b in zip(self[:3], other[:3]) if a is not None)

    def validate(self, num_classes=None):
        C, T, H, W = self.input.shape
        if self.labels.shape != (H, W):
            raise FormatError('{0}: labels {1} do not match input {2}'.format(
                self.sample_id, self.labels.shape, self.input.shape))
        if self.cloud_mask is not None and self.cloud_mask.shape != (T, H, W):
            raise FormatError('{0}: cloud mask {1} does not match input {2}'.format(
                self.sample_id, self.cloud_mask.shape, self.input.shape))
        if not np.all(np.isfinite(self.input)):
            raise FormatError('{0}: non-finite input values'.format(self.sample_id))
        if num_classes is not None:
            bad = (self.labels >= num_classes) & (self.labels != IGNORE)
            if bad.any():
                raise FormatError('{0}: label {1} out of range for {2} classes'.format(
                    self.sample_id, int(self.labels[bad][0]), num_classes))
        return self


def encode_chip(chip):
    chip.validate()
    sample_id = chip.sample_id.encode('utf8')
    flags = FLAG_MASK if chip.cloud_mask is not None else 0
    chunks = [
        HEADER.pack(VERSION, 0, flags, *chip.input.shape),
        struct.pack('<H', len(sample_id)),
        sample_id,
        np.ascontiguousarray(chip.input, dtype=DTYPES[0]).tobytes(),
        np.ascontiguousarray(chip.labels, dtype=np.uint8).tobytes(),
    ]
    if flags & FLAG_MASK:
        chunks.append(np.ascontiguousarray(chip.cloud_mask, dtype=np.uint8).tobytes())
    body = b''.join(chunks)
    return MAGIC + body + struct.pack('<I', zlib.crc32(body))


def write_chip(chip, path):
    data = encode_chip(chip)
    with safe_overwrite(path) as tmp:
        tmp.write_bytes(data)
    return path


def decode_chip(data, path=None):
    reader = BinaryReader(data, path=path)
    if reader.read(4) != MAGIC:
        raise FormatError('{0}: not a chip file'.format(path))
    version, dtype, flags, C, T, H, W = HEADER.unpack(reader.read(HEADER.size))
    if version != VERSION:
        raise FormatError('{0}: unsupported chip version {1}'.format(path, version))
    if dtype not in DTYPES:
        raise FormatError('{0}: unsupported dtype code {1}'.format(path, dtype))
    if flags & ~FLAG_MASK:
        raise FormatError('{0}: unknown flags {1:#x}'.format(path, flags))
    for name, n in zip('CTHW', (C, T, H, W)):
        if n < 1:
            raise FormatError('{0}: invalid dimension {1}={2}'.format(path, name, n))
    raw_id = reader.chunk('H')

    dt = DTYPES[dtype]
    sizes = [C * T * H * W * dt.itemsize, H * W]
    if flags & FLAG_MASK:
        sizes.append(T * H * W)
    expected = reader.pos + sum(sizes) + 4
    if len(data) < expected:
        raise TruncatedFileError('{0}: {1} bytes, header announces {2}'.format(
            path, len(data), expected))
    if len(data) > expected:
        raise FormatError('{0}: {1} trailing bytes'.format(path, len(data) - expected))

    body_end = expected - 4
    if zlib.crc32(data[4:body_end]) != struct.unpack('<I', data[body_end:])[0]:
        raise ChecksumError('{0}: CRC32 mismatch'.format(path))
    sample_id = reader.text(raw_id)

    x = np.frombuffer(reader.read(sizes[0]), dtype=dt).reshape(C, T, H, W)
    labels = np.frombuffer(reader.read(sizes[1]), dtype=np.uint8).reshape(H, W)
    mask = None
    if flags & FLAG_MASK:
        mask = np.frombuffer(reader.read(sizes[2]), dtype=np.uint8).reshape(T, H, W)
        if mask.max(initial=0) > 1:
            raise FormatError('{0}: cloud mask values must be 0 or 1'.format(path))
        mask = mask.astype(bool)
    return SitsChip(x.astype(np.float32), labels.copy(), mask, sample_id)


def read_chip(path):
    """
    :raises FormatError: bad magic, unsupported version/dtype or an invalid header; \
    raised before any payload is read.
    :raises TruncatedFileError: the file is shorter than announced by the header.
    :raises ChecksumError: the CRC32 trailer does not match; checked before the sample id \
    and the payload are decoded.
    """
    path = pathlib.Path(path)
    return decode_chip(path.read_bytes(), path=path)
