"""
XOR Channel Code Service

Regular (3,6) LDPC code shared by both end nodes. Because the code is linear
the XOR of the two codewords is itself a codeword, so the relay decodes the
network-coded message directly from the soft XOR information (XOR-CD).

Bit convention: LLR = ln P(bit=0)/P(bit=1); BPSK maps bit 0 to +1.
"""

import functools
import logging
from dataclasses import dataclass
from typing import NamedTuple

import galois
import numpy as np
from scipy import sparse

from phy.exceptions import CodeError

logger = logging.getLogger(__name__)

# arctanh clip before the check update
ONE = 0.9999999999999
MAX_CONSTRUCTION_ROUNDS = 10000


class BpResult(NamedTuple):
    bits: np.ndarray
    converged: bool
    iterations: int


def _edge_conflicts(edge_rows: np.ndarray, edge_cols: np.ndarray, m: int, n: int) -> np.ndarray:
    """Edges that create a repeated entry or close a 4-cycle."""
    counts = sparse.coo_matrix((np.ones(len(edge_rows)), (edge_rows, edge_cols)), shape=(m, n)).tocsr()
    bad = set()

    repeated = counts.multiply(counts > 1).tocoo()
    for r, c in zip(repeated.row, repeated.col):
        hits = np.flatnonzero((edge_rows == r) & (edge_cols == c))
        bad.update(hits[1:].tolist())

    binary = (counts > 0).astype(np.int32)
    overlap = sparse.triu(binary.T @ binary, k=1).tocoo()
    for c1, c2, shared in zip(overlap.row, overlap.col, overlap.data):
        if shared < 2:
            continue
        rows_c1 = set(edge_rows[edge_cols == c1].tolist())
        for e in np.flatnonzero(edge_cols == c2):
            if edge_rows[e] in rows_c1:
                bad.add(int(e))
                break
    return np.array(sorted(bad), dtype=int)


def regular_parity_check(n: int, dv: int, dc: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random regular parity-check matrix without repeated entries or 4-cycles.

    Sockets of the check side are permuted; conflicting edges swap their check
    with a random other edge until the graph is clean.
    """
    if (n * dv) % dc:
        raise CodeError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m = n * dv // dc
    edge_cols = np.repeat(np.arange(n), dv)
    edge_rows = rng.permutation(np.repeat(np.arange(m), dc))

    for round_ in range(MAX_CONSTRUCTION_ROUNDS):
        bad = _edge_conflicts(edge_rows, edge_cols, m, n)
        if bad.size == 0:
            logger.debug(f"LDPC: construction clean after {round_} rounds")
            break
        partners = rng.integers(0, len(edge_rows), size=bad.size)
        for e, p in zip(bad, partners):
            edge_rows[e], edge_rows[p] = edge_rows[p], edge_rows[e]
    else:
        raise CodeError(f"no 4-cycle-free ({dv},{dc}) matrix after {MAX_CONSTRUCTION_ROUNDS} rounds")

    H = np.zeros((m, n), dtype=np.uint8)
    H[edge_rows, edge_cols] = 1
    return H


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """
    Systematic encoder and sum-product decoder for a binary parity-check matrix.

    H may be rank deficient: the message occupies the first k free columns of
    the reduced row echelon form and any extra free columns are fixed to 0.
    """

    parity_check: np.ndarray
    k: int
    info_positions: np.ndarray
    pivot_positions: np.ndarray
    parity_map: np.ndarray

    @property
    def n(self) -> int:
        return self.parity_check.shape[1]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_parity_check(cls, H: np.ndarray, k: int) -> 'LdpcCode':
        H = np.array(H, dtype=np.uint8)
        GF2 = galois.GF(2)
        R = np.asarray(GF2(H).row_reduce(), dtype=np.uint8)
        R = R[R.any(axis=1)]
        pivots = np.argmax(R, axis=1)
        free = np.setdiff1d(np.arange(H.shape[1]), pivots)
        if len(free) < k:
            raise CodeError(f"parity-check matrix leaves {len(free)} free positions, need k={k}")
        info = free[:k]
        parity_map = R[:, info].astype(np.int64)
        for array in (H, info, pivots, parity_map):
            array.setflags(write=False)
        logger.info(f"LDPC: code ready n={H.shape[1]} k={k} rank={len(pivots)} free={len(free)}")
        return cls(parity_check=H, k=k, info_positions=info, pivot_positions=pivots, parity_map=parity_map)

    @classmethod
    def construct(cls, n: int, k: int, dv: int, dc: int, seed: int) -> 'LdpcCode':
        if n - n * dv // dc != k:
            raise CodeError(f"({dv},{dc}) regular code of length {n} does not have k={k}")
        H = regular_parity_check(n, dv, dc, np.random.default_rng(seed))
        return cls.from_parity_check(H, k)

    def encode(self, bits) -> np.ndarray:
        """Systematic codeword: message at info_positions, parity from the echelon form."""
        bits = np.asarray(bits).ravel()
        if bits.size != self.k:
            raise CodeError(f"message must have {self.k} bits, got {bits.size}")
        if not np.all(np.isin(bits, (0, 1))):
            raise CodeError("message bits must be 0 or 1")
        codeword = np.zeros(self.n, dtype=np.uint8)
        codeword[self.info_positions] = bits
        codeword[self.pivot_positions] = (self.parity_map @ bits.astype(np.int64)) % 2
        return codeword

    def syndrome(self, codeword) -> np.ndarray:
        return (self.parity_check.astype(np.int64) @ np.asarray(codeword, dtype=np.int64)) % 2

    def message(self, codeword) -> np.ndarray:
        return np.asarray(codeword)[self.info_positions]

    @functools.cached_property
    def _edges(self):
        rows, cols = np.nonzero(self.parity_check)
        slots = np.concatenate([np.arange(c) for c in np.bincount(rows, minlength=self.parity_check.shape[0])])
        dc_max = int(slots.max()) + 1
        return rows, cols, slots, dc_max

    def bp_decode(self, llr, max_iters: int = 50) -> BpResult:
        """
        Sum-product decoding with early exit once all checks are satisfied.

        A posterior LLR of exactly 0 carries no decision, so it never counts as
        converged.
        """
        llr = np.asarray(llr, dtype=float).ravel()
        if llr.size != self.n:
            raise CodeError(f"expected {self.n} LLRs, got {llr.size}")
        rows, cols, slots, dc_max = self._edges
        m = self.parity_check.shape[0]

        v2c = llr[cols]
        hard = (llr < 0).astype(np.uint8)
        converged = False
        iteration = 0
        for iteration in range(1, max_iters + 1):
            cview = np.ones((m, dc_max))
            cview[rows, slots] = np.tanh(v2c / 2)
            extrinsic = np.empty_like(cview)
            for port in range(dc_max):
                extrinsic[:, port] = np.prod(np.delete(cview, port, axis=1), axis=1)
            c2v = 2 * np.arctanh(np.clip(extrinsic[rows, slots], -ONE, ONE))

            posterior = llr + np.bincount(cols, weights=c2v, minlength=self.n)
            hard = (posterior < 0).astype(np.uint8)
            parity = np.bincount(rows, weights=hard[cols], minlength=m) % 2
            if not parity.any() and np.all(posterior != 0):
                converged = True
                break
            v2c = posterior[cols] - c2v

        if not converged:
            logger.warning(f"LDPC: BP did not converge in {max_iters} iterations")
        return BpResult(bits=hard[self.info_positions], converged=converged, iterations=iteration)

    def to_alist(self) -> str:
        """Parity-check matrix in MacKay's alist text format."""
        H = self.parity_check
        m, n = H.shape
        col_weights = H.sum(axis=0)
        row_weights = H.sum(axis=1)
        lines = [
            f"{n} {m}",
            f"{col_weights.max()} {row_weights.max()}",
            ' '.join(str(w) for w in col_weights),
            ' '.join(str(w) for w in row_weights),
        ]
        for c in range(n):
            idx = np.flatnonzero(H[:, c]) + 1
            lines.append(' '.join(str(i) for i in np.pad(idx, (0, col_weights.max() - len(idx)))))
        for r in range(m):
            idx = np.flatnonzero(H[r]) + 1
            lines.append(' '.join(str(i) for i in np.pad(idx, (0, row_weights.max() - len(idx)))))
        return '\n'.join(lines) + '\n'

    @staticmethod
    def read_alist(text: str) -> np.ndarray:
        """Parity-check matrix from alist text (column lists are authoritative)."""
        lines = [line.split() for line in text.strip().splitlines()]
        try:
            n, m = int(lines[0][0]), int(lines[0][1])
            H = np.zeros((m, n), dtype=np.uint8)
            for c in range(n):
                for index in (int(v) for v in lines[4 + c]):
                    if index:
                        H[index - 1, c] = 1
        except (IndexError, ValueError) as exc:
            raise CodeError(f"malformed alist: {exc}") from exc
        return H


def xor_llr(u, clamp: float = 27.6) -> np.ndarray:
    """llr[n] = ln u[n], clamped to +/- clamp."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide='ignore'):
        return np.clip(np.log(u), -clamp, clamp)


@functools.lru_cache(maxsize=8)
def cached_code(n: int, k: int, dv: int, dc: int, seed: int) -> LdpcCode:
    """Seeded regular code, built once per process and parameter set."""
    return LdpcCode.construct(n=n, k=k, dv=dv, dc=dc, seed=seed)


def default_code() -> LdpcCode:
    """The code configured in SIMULATION_CONFIG['LDPC']."""
    from django.conf import settings

    ldpc = settings.SIMULATION_CONFIG['LDPC']
    return cached_code(ldpc['N'], ldpc['K'], ldpc['COLUMN_WEIGHT'], ldpc['ROW_WEIGHT'], ldpc['CONSTRUCTION_SEED'])
