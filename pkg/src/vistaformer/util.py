"""Generic utility functions."""
import random
import string
import struct
import pathlib
import contextlib

from clldutils.path import move

from vistaformer.errors import FormatError, TruncatedFileError

__all__ = ['random_string', 'safe_overwrite', 'BinaryReader']


def random_string(length):
    return ''.join(random.choice(string.ascii_lowercase) for _ in range(length))


@contextlib.contextmanager
def safe_overwrite(fname):
    """Yield a temporary path next to `fname`, moved into place when the block succeeds."""
    fname = pathlib.Path(fname)
    if not fname.parent.exists():
        fname.parent.mkdir(parents=True)
    assert fname.parent.exists()
    tmp = fname.parent
    while tmp.exists():
        tmp = fname.parent.joinpath('%s.%s' % (fname.name, random_string(6)))
    try:
        yield tmp
    except Exception:
        if tmp.exists():
            tmp.unlink()
        raise
    if fname.exists():
        fname.unlink()
    move(tmp, fname)


class BinaryReader(object):

    """Sequential little-endian reads from a bytes buffer, raising on premature end."""

    def __init__(self, data, path=None):
        self.data = data
        self.path = path
        self.pos = 0

    def read(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedFileError('{0}: file ends at byte {1}, expected at least {2}'.format(
                self.path or '<bytes>', len(self.data), self.pos + n))
        res = self.data[self.pos:self.pos + n]
        self.pos += n
        return res

    def unpack(self, fmt):
        fmt = '<' + fmt
        try:
            res = struct.unpack(fmt, self.read(struct.calcsize(fmt)))
        except struct.error as e:
            raise FormatError('{0}: {1}'.format(self.path or '<bytes>', e))
        return res[0] if len(res) == 1 else res

    def chunk(self, length_fmt='H'):
        """A length-prefixed byte string."""
        return self.read(self.unpack(length_fmt))

    def text(self, raw):
        """Decode UTF-8 bytes read from this buffer."""
        try:
            return raw.decode('utf8')
        except UnicodeDecodeError as e:
            raise FormatError('{0}: invalid UTF-8 text: {1}'.format(self.path or '<bytes>', e))

    @property
    def remaining(self):
        return len(self.data) - self.pos
