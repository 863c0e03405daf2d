import numpy as np
import pytest

from bigjump.errors import StreamExhausted


class FixedStream:
    """Uniform stream backed by an explicit queue; raises when exhausted."""

    def __init__(self, values):
        self.values = list(values)

    def random(self, size=None):
        if size is None:
            return self._take(1)[0]
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        return np.array(self._take(n)).reshape(shape)

    def _take(self, n):
        if len(self.values) < n:
            raise StreamExhausted(f"needed {n} uniforms, have {len(self.values)}")
        out, self.values = self.values[:n], self.values[n:]
        return out


@pytest.fixture
def fixed_stream():
    return FixedStream
