"""Binary meaning/signal spaces, language tables, and language mixing.

A meaning is a length-n1 binary vector of semantic facts, a signal a
length-n3 binary vector of morphemes; both are numpy uint8 arrays.
Meanings are interchangeable with integer indices via a little-endian
codec (bit 0 is the least significant bit), fixed project-wide.

A language is a total map from all 2**n1 meanings to signals, stored
densely as a ``LanguageTable``. Perfectly compositional languages are
generated compactly as bit shuffles of the identity language
(``CompositionalLanguage``) and expanded on demand.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import hashlib
import io

import numpy as np

MAX_BITS = 20


def int_to_bits(value: int, n: int) -> np.ndarray:
    """Little-endian bit vector of ``value``; bit 0 is the LSB."""
    if not 0 <= value < 2 ** n:
        raise ValueError(f"value {value} out of range for {n} bits")
    return ((value >> np.arange(n)) & 1).astype(np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    """Inverse of :func:`int_to_bits`."""
    bits = np.asarray(bits)
    return int(bits.astype(np.int64) @ (1 << np.arange(bits.size, dtype=np.int64)))


@lru_cache(maxsize=8)
def all_meanings(n: int) -> np.ndarray:
    """All 2**n meanings as a (2**n, n) uint8 matrix, row i = bits of i.

    Cached and marked read-only; callers must not mutate.
    """
    if not 1 <= n <= MAX_BITS:
        raise ValueError(f"bit length {n} outside supported range [1, {MAX_BITS}]")
    m = ((np.arange(2 ** n, dtype=np.int64)[:, None] >> np.arange(n)[None, :]) & 1)
    m = m.astype(np.uint8)
    m.setflags(write=False)
    return m


def pack_signals(entries: np.ndarray) -> np.ndarray:
    """Pack each signal row into its little-endian integer code."""
    n3 = entries.shape[1]
    return entries.astype(np.int64) @ (1 << np.arange(n3, dtype=np.int64))


@dataclass(frozen=True)
class LanguageTable:
    """Total meaning->signal map: entries[m] is the signal for meaning m."""

    n1: int
    n3: int
    entries: np.ndarray  # (2**n1, n3) uint8

    def __post_init__(self):
        if not 1 <= self.n1 <= MAX_BITS:
            raise ValueError(f"n1={self.n1} outside supported range [1, {MAX_BITS}]")
        if not 1 <= self.n3 <= MAX_BITS:
            raise ValueError(f"n3={self.n3} outside supported range [1, {MAX_BITS}]")
        entries = np.ascontiguousarray(self.entries, dtype=np.uint8)
        if entries.shape != (2 ** self.n1, self.n3):
            raise ValueError(
                f"entries shape {self.entries.shape} != {(2 ** self.n1, self.n3)}"
            )
        if entries.max(initial=0) > 1:
            raise ValueError("entries must be 0/1 valued")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def signal_for(self, meaning: int) -> np.ndarray:
        return self.entries[meaning]

    def checksum(self) -> str:
        """Stable content id (first 16 hex chars of sha256 over the text form)."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def to_text(self) -> str:
        """Serialize: header line, then one bit-0-first 0/1 string per meaning."""
        out = io.StringIO()
        out.write(f"n1={self.n1} n3={self.n3}\n")
        digits = self.entries + ord("0")
        for row in digits:
            out.write(row.tobytes().decode("ascii"))
            out.write("\n")
        return out.getvalue()

    @staticmethod
    def from_text(text: str) -> "LanguageTable":
        lines = text.strip().splitlines()
        header = dict(part.split("=") for part in lines[0].split())
        n1, n3 = int(header["n1"]), int(header["n3"])
        rows = lines[1:]
        if len(rows) != 2 ** n1:
            raise ValueError(f"expected {2 ** n1} rows, got {len(rows)}")
        entries = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
        return LanguageTable(n1=n1, n3=n3, entries=entries)


@dataclass(frozen=True)
class CompositionalLanguage:
    """Compact generator of a perfectly compositional language.

    Meaning bit i lands at signal position perm[i], negated when flips[i]
    is set; every signal position outside perm's image carries a constant
    filler bit, identical for all meanings.
    """

    n1: int
    n3: int
    perm: np.ndarray  # (n1,) injective positions into [0, n3)
    flips: np.ndarray  # (n1,) 0/1
    filler: dict = field(default_factory=dict)  # position -> constant bit

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        flips = np.asarray(self.flips, dtype=np.uint8)
        if self.n1 > self.n3:
            raise ValueError(f"n1={self.n1} > n3={self.n3}")
        if perm.shape != (self.n1,) or flips.shape != (self.n1,):
            raise ValueError("perm/flips must have length n1")
        if len(set(perm.tolist())) != self.n1 or perm.min() < 0 or perm.max() >= self.n3:
            raise ValueError("perm must be injective into [0, n3)")
        expected = set(range(self.n3)) - set(perm.tolist())
        if set(self.filler) != expected:
            raise ValueError(f"filler must cover exactly positions {sorted(expected)}")
        perm.setflags(write=False)
        flips.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "flips", flips)


def identity_language(n: int) -> LanguageTable:
    """The language mapping every meaning to the identical signal."""
    return LanguageTable(n1=n, n3=n, entries=all_meanings(n).copy())


def random_compositional_language(n1: int, n3: int, rng: np.random.Generator) -> CompositionalLanguage:
    """Compositionality-preserving shuffle of the identity language.

    perm is uniform over injective maps, each flip bit and each filler bit
    is an independent fair coin. Draw order (perm, flips, filler positions
    ascending) is part of the determinism contract.
    """
    if n1 > n3:
        raise ValueError(f"n1={n1} > n3={n3}")
    perm = rng.permutation(n3)[:n1]
    flips = rng.integers(0, 2, size=n1, dtype=np.uint8)
    free = sorted(set(range(n3)) - set(perm.tolist()))
    filler = {pos: int(rng.integers(0, 2)) for pos in free}
    return CompositionalLanguage(n1=n1, n3=n3, perm=perm, flips=flips, filler=filler)


def expand(cl: CompositionalLanguage) -> LanguageTable:
    """Materialize a CompositionalLanguage into its full table."""
    meanings = all_meanings(cl.n1)
    entries = np.empty((2 ** cl.n1, cl.n3), dtype=np.uint8)
    for pos, bit in cl.filler.items():
        entries[:, pos] = bit
    entries[:, cl.perm] = meanings ^ cl.flips[None, :]
    return LanguageTable(n1=cl.n1, n3=cl.n3, entries=entries)


def random_table(n1: int, n3: int, rng: np.random.Generator) -> LanguageTable:
    """Uniformly random language: every meaning gets an independent uniform signal."""
    entries = rng.integers(0, 2, size=(2 ** n1, n3), dtype=np.uint8)
    return LanguageTable(n1=n1, n3=n3, entries=entries)


def _check_same_shape(L1: LanguageTable, L2: LanguageTable) -> None:
    if (L1.n1, L1.n3) != (L2.n1, L2.n3):
        raise ValueError(
            f"table shape mismatch: ({L1.n1},{L1.n3}) vs ({L2.n1},{L2.n3})"
        )


def mix_languages(A: LanguageTable, B: LanguageTable, p: float, rng: np.random.Generator) -> LanguageTable:
    """Per-meaning mixture: signal taken from A with probability p, else from B.

    One independent uniform draw per meaning; no fixed-count partition.
    """
    _check_same_shape(A, B)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    take_a = rng.random(2 ** A.n1) < p
    entries = np.where(take_a[:, None], A.entries, B.entries)
    return LanguageTable(n1=A.n1, n3=A.n3, entries=entries)


def table_similarity_raw(L1: LanguageTable, L2: LanguageTable) -> float:
    """Fraction of meanings whose whole signal vectors agree exactly."""
    _check_same_shape(L1, L2)
    agree = int(np.all(L1.entries == L2.entries, axis=1).sum())
    return agree / 2 ** L1.n1
