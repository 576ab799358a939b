"""Complex/real equivalences and reproducible random streams.

Ordering convention used package-wide: a complex sample maps to the real
pair [real part, imaginary part], and a complex gain h maps to the 2x2
rotation-scaling matrix [[Re h, -Im h], [Im h, Re h]].
"""
from dataclasses import dataclass

import numpy as np


def complex_to_real_pair(x):
    """[Re x, Im x] as a float64 vector of length 2."""
    x = complex(x)
    return np.array([x.real, x.imag], dtype=np.float64)


def real_pair_to_complex(p):
    """Inverse of complex_to_real_pair (bit-exact roundtrip)."""
    return complex(p[0], p[1])


def complex_to_real_matrix(h, scale=1.0):
    """scale * [[Re h, -Im h], [Im h, Re h]].

    Multiplying this matrix by a real pair is the real-valued equivalent of
    complex multiplication by scale*h.
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    h = complex(h)
    return scale * np.array(
        [[h.real, -h.imag], [h.imag, h.real]], dtype=np.float64
    )


def complex_frame_to_real(frame):
    """(M,) complex vector -> (M, 2) array of [re, im] rows."""
    frame = np.asarray(frame, dtype=np.complex128)
    out = np.empty((frame.size, 2), dtype=np.float64)
    out[:, 0] = frame.real
    out[:, 1] = frame.imag
    return out


def real_frame_to_complex(pairs):
    pairs = np.asarray(pairs, dtype=np.float64)
    return pairs[:, 0] + 1j * pairs[:, 1]


@dataclass
class RandomStream:
    """Reproducible, decorrelated random stream.

    Identical (seed, stream_id) always yields the identical draw sequence;
    distinct stream ids are statistically independent, so Monte Carlo trials
    can be farmed out without shared state. Instances are single-owner.
    """

    seed: int
    stream_id: int = 0

    def generator(self):
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        )

    def child(self, stream_id):
        return RandomStream(self.seed, stream_id)
