"""
Preamble Service

Zadoff-Chu preambles with cyclic prefix and suffix, the cyclic-shift pair
assigned to the two end nodes, and frame assembly.

Frame layout (symbol indices, symbol i transmitted at i*T):
    [prefix G][ZC body Q][suffix G][guard g][payload N][guard g]
Guards are known +1 symbols; g = 0 gives the bare preamble ++ payload frame.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from phy.exceptions import FrameError

logger = logging.getLogger(__name__)


class Node(enum.Enum):
    A = 'A'
    B = 'B'


@dataclass(frozen=True)
class PreambleSpec:
    """ZC length Q, root index and cyclic prefix/suffix length G."""

    Q: int
    G: int
    root: int = 1

    def __post_init__(self):
        if self.Q < 3 or self.Q % 2 == 0:
            raise FrameError(f"Q must be an odd integer >= 3, got {self.Q}")
        if math.gcd(self.root, self.Q) != 1:
            raise FrameError(f"root {self.root} is not coprime with Q={self.Q}")
        if not 0 < self.G < self.Q:
            raise FrameError(f"G must satisfy 0 < G < Q, got G={self.G}, Q={self.Q}")

    @property
    def shift(self) -> int:
        """Cyclic shift between the two node sequences."""
        return self.Q // 2

    @property
    def length(self) -> int:
        return self.Q + 2 * self.G

    @classmethod
    def with_default_guard(cls, Q: int, root: int = 1) -> 'PreambleSpec':
        """Prefix/suffix length floor(Q/3)."""
        return cls(Q=Q, G=Q // 3, root=root)


@dataclass(frozen=True)
class SymbolFrame:
    """One node's transmitted symbols: extended preamble, guards and BPSK payload."""

    preamble_part: np.ndarray
    data_part: np.ndarray
    node: Node
    G: int
    guard: int = 0

    @property
    def zc_start(self) -> int:
        """Symbol index where the ZC body nominally starts."""
        return self.G

    @property
    def data_start(self) -> int:
        return len(self.preamble_part) + self.guard

    @property
    def N(self) -> int:
        return len(self.data_part)

    @property
    def symbols(self) -> np.ndarray:
        guard = np.ones(self.guard, dtype=complex)
        return np.concatenate([self.preamble_part, guard, self.data_part.astype(complex), guard])

    def __len__(self) -> int:
        return len(self.preamble_part) + self.N + 2 * self.guard


def zc_generate(Q: int, root: int = 1) -> np.ndarray:
    """Odd-length Zadoff-Chu sequence z[n] = exp(-j*pi*root*n(n+1)/Q)."""
    if Q < 1 or Q % 2 == 0:
        raise FrameError(f"Q must be odd, got {Q}")
    if math.gcd(root, Q) != 1:
        raise FrameError(f"root {root} is not coprime with Q={Q}")
    n = np.arange(Q)
    # n(n+1) reduced mod 2Q keeps the phase argument small for long sequences
    phase = (root * n * (n + 1)) % (2 * Q)
    return np.exp(-1j * np.pi * phase / Q)


def assign_pair(spec: PreambleSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(z_A, z_B) with z_B the base sequence and z_A[n] = z_B[(n + Q//2) mod Q]."""
    z_B = zc_generate(spec.Q, spec.root)
    z_A = np.roll(z_B, -spec.shift)
    return z_A, z_B


def cyclic_extend(z: np.ndarray, G: int) -> np.ndarray:
    """[last G of z] ++ z ++ [first G of z]."""
    z = np.asarray(z)
    Q = len(z)
    if not 0 < G < Q:
        raise FrameError(f"G must satisfy 0 < G < Q, got G={G}, Q={Q}")
    return np.concatenate([z[-G:], z, z[:G]])


def build_frame(spec: PreambleSpec, node: Node, data, guard: int = 0) -> SymbolFrame:
    """Assemble a node's frame from its preamble and BPSK payload."""
    data = np.asarray(data, dtype=float).ravel()
    if data.size and not np.all(np.isin(data, (-1.0, 1.0))):
        raise FrameError("payload symbols must be +1 or -1")
    if guard < 0:
        raise FrameError(f"guard must be non-negative, got {guard}")

    z_A, z_B = assign_pair(spec)
    z = z_A if node is Node.A else z_B
    return SymbolFrame(
        preamble_part=cyclic_extend(z, spec.G),
        data_part=data,
        node=node,
        G=spec.G,
        guard=guard,
    )


def bits_to_bpsk(bits) -> np.ndarray:
    """Bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)
