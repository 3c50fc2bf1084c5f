"""Language observables: expressivity, compositionality, stability, parent similarity.

Raw quantities are fractions over the meaning space; each is reported
after baseline normalization (raw - background) / (1 - background), so
a random language scores ~0 and a perfect one scores 1. Normalized
values may dip slightly below zero and are reported unclamped.

Entropies are in bits, with 0*log(0) = 0. Compositionality scores each
meaning bit by the best mutual information it shares with any single
signal bit (max over signal bits), averaged over meaning bits; mutual
information rather than bare conditional entropy so constant signal
bits score zero rather than "perfectly predicted".
"""

from dataclasses import dataclass

import numpy as np

from .bitlang import (
    LanguageTable,
    all_meanings,
    pack_signals,
    random_table,
    table_similarity_raw,
)

# Frozen seed for the Monte Carlo compositionality background, so baselines
# (and therefore normalized metrics) are identical across invocations.
BASELINE_SEED = 101
DEFAULT_BASELINE_SAMPLES = 1000

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Baselines:
    """Background values subtracted from the raw observables."""

    n1: int
    n3: int
    f0: float  # chance whole-signal agreement (analytic)
    x0: float  # expected distinct-signal fraction of a random map (analytic)
    c0: float  # mean compositionality of random tables (Monte Carlo)
    c0_se: float
    c0_samples: int
    c0_seed: int

    def __post_init__(self):
        for name in ("f0", "x0", "c0"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name}={v} outside [0, 1)")

    @property
    def provenance(self) -> str:
        return (
            f"f0,x0 analytic; c0 monte-carlo"
            f"(samples={self.c0_samples}, seed={self.c0_seed})"
        )


@dataclass
class MetricReport:
    """Normalized observables plus their raw counterparts for audit.

    ``s``/``s_raw`` are None for the first recorded language (no
    predecessor to compare against).
    """

    x: float
    c: float
    s: float | None
    a: float
    b: float
    x_raw: float
    c_raw: float
    s_raw: float | None
    a_raw: float
    b_raw: float


def normalize(raw: float, baseline: float) -> float:
    """(raw - baseline) / (1 - baseline)."""
    if baseline >= 1.0:
        raise ValueError(f"baseline {baseline} must be < 1")
    return (raw - baseline) / (1.0 - baseline)


def similarity(L1: LanguageTable, L2: LanguageTable, f0: float) -> float:
    """Background-normalized fraction of meanings with identical signals."""
    return normalize(table_similarity_raw(L1, L2), f0)


def expressivity_raw(L: LanguageTable) -> float:
    """Distinct signals used, as a fraction of the meaning count.

    The denominator is |meanings| rather than |signals| so an injective
    language scores 1 even when the signal space is larger.
    """
    distinct = np.unique(pack_signals(L.entries)).size
    return distinct / 2 ** L.n1


def _h2(p: np.ndarray) -> np.ndarray:
    """Binary entropy in bits, elementwise, with 0*log0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    inner = (p > 0.0) & (p < 1.0)
    q = p[inner]
    out[inner] = -(q * np.log2(q) + (1.0 - q) * np.log2(1.0 - q))
    return out


def _bit_count_stats(L: LanguageTable):
    """Totals of each signal bit, overall and within the m_i = 1 half-spaces.

    Chunked so 20-bit tables never materialize a float meaning matrix.
    Returns (ones[j], ones_given_mi1[i, j]).
    """
    n = 2 ** L.n1
    ones = np.zeros(L.n3)
    cond1 = np.zeros((L.n1, L.n3))
    meanings = all_meanings(L.n1)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        s = L.entries[start:stop].astype(np.float64)
        m = meanings[start:stop].astype(np.float64)
        ones += s.sum(axis=0)
        cond1 += m.T @ s
    return ones, cond1


def compositionality_raw(L: LanguageTable) -> float:
    """Mean over meaning bits of the best per-signal-bit mutual information.

    Exact joint distribution over the uniform meaning space: each meaning
    bit splits the space exactly in half, so conditionals are counts over
    the two half-spaces.
    """
    n = 2 ** L.n1
    half = n / 2.0
    ones, cond1 = _bit_count_stats(L)
    p = ones / n  # P(s_j = 1)
    p1 = cond1 / half  # P(s_j = 1 | m_i = 1)
    p0 = (ones[None, :] - cond1) / half  # P(s_j = 1 | m_i = 0)
    mi = _h2(p)[None, :] - 0.5 * (_h2(p1) + _h2(p0))
    return float(np.mean(mi.max(axis=1)))


def baseline_similarity(n1: int, n3: int) -> float:
    """Chance that two independent uniform signals coincide: 2**-n3."""
    return 2.0 ** -n3


def baseline_expressivity(n1: int, n3: int) -> float:
    """Expected distinct-signal fraction of a uniformly random table.

    Occupancy formula: 2**n3 * (1 - (1 - 2**-n3)**(2**n1)) / 2**n1,
    evaluated via log1p/expm1 for accuracy at large n3.
    """
    occupied = -np.expm1(2.0 ** n1 * np.log1p(-(2.0 ** -n3)))
    return float(2.0 ** (n3 - n1) * occupied)


def mc_similarity(n1: int, n3: int, pairs: int, rng: np.random.Generator):
    """Monte Carlo estimate of f0 over random table pairs: (mean, se)."""
    vals = np.array([
        table_similarity_raw(random_table(n1, n3, rng), random_table(n1, n3, rng))
        for _ in range(pairs)
    ])
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(pairs))


def mc_expressivity(n1: int, n3: int, samples: int, rng: np.random.Generator):
    """Monte Carlo estimate of x0 over random tables: (mean, se)."""
    vals = np.array([expressivity_raw(random_table(n1, n3, rng)) for _ in range(samples)])
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))


def baseline_compositionality(n1: int, n3: int, samples: int, rng: np.random.Generator):
    """Monte Carlo compositionality background: (mean, se) over random tables."""
    if samples < 100:
        raise ValueError(f"samples={samples} < 100")
    vals = np.array([compositionality_raw(random_table(n1, n3, rng)) for _ in range(samples)])
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))


def compute_baselines(n1: int, n3: int, samples: int = DEFAULT_BASELINE_SAMPLES,
                      seed: int = BASELINE_SEED) -> Baselines:
    """Analytic f0/x0 plus the frozen-seed Monte Carlo c0."""
    c0, c0_se = baseline_compositionality(n1, n3, samples, np.random.default_rng(seed))
    return Baselines(
        n1=n1,
        n3=n3,
        f0=baseline_similarity(n1, n3),
        x0=baseline_expressivity(n1, n3),
        c0=c0,
        c0_se=c0_se,
        c0_samples=samples,
        c0_seed=seed,
    )


def report(L_now: LanguageTable, L_prev: LanguageTable | None,
           A: LanguageTable, B: LanguageTable, baselines: Baselines) -> MetricReport:
    """All five observables for one language; stability absent when L_prev is."""
    x_raw = expressivity_raw(L_now)
    c_raw = compositionality_raw(L_now)
    a_raw = table_similarity_raw(L_now, A)
    b_raw = table_similarity_raw(L_now, B)
    s_raw = None if L_prev is None else table_similarity_raw(L_now, L_prev)
    f0 = baselines.f0
    return MetricReport(
        x=normalize(x_raw, baselines.x0),
        c=normalize(c_raw, baselines.c0),
        s=None if s_raw is None else normalize(s_raw, f0),
        a=normalize(a_raw, f0),
        b=normalize(b_raw, f0),
        x_raw=x_raw,
        c_raw=c_raw,
        s_raw=s_raw,
        a_raw=a_raw,
        b_raw=b_raw,
    )
