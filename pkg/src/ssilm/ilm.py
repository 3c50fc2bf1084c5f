"""Generational engine: bottleneck sampling, pupil training, simulation runs.

Each generation a fresh pupil agent learns the tutor's language from a
bottleneck subset (supervised pairs to both encoder and decoder) plus
autoencoder passes over imagined meanings, then its extracted encoder
table becomes the next tutor. Generation 0 is the per-meaning mixture
of the two parent languages.

Determinism contract: every run is fully derived from
(master_seed, p_index, run_index) through numpy SeedSequence spawning,
and each generation consumes randomness from its own child seed in a
fixed order (agent init, bottleneck set, autoencoder pool, then per
epoch: two bottleneck shuffles and the autoencoder draws).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from . import bitlang, kernel, neuralnet
from .bitlang import LanguageTable, all_meanings, expand, mix_languages, random_compositional_language
from .metrics import Baselines, MetricReport, compute_baselines, report
from .neuralnet import Agent, NumericalDivergenceError, agent_init

AUTO_MODES = ("iteration", "epoch")

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulation run."""

    n1: int
    n2: int
    n3: int
    bottleneck_size: int
    auto_pool_size: int
    r: int
    epochs: int = 20
    learning_rate: float = 5.0
    generations: int = 20
    p: float = 0.5
    seed: int = 0
    auto_per: str = "iteration"
    loss: str = "mse"
    baseline_samples: int = 1000

    def __post_init__(self):
        if self.bottleneck_size > 2 ** self.n1:
            raise ValueError(f"bottleneck_size {self.bottleneck_size} > 2**n1")
        if self.auto_pool_size > 2 ** self.n1:
            raise ValueError(f"auto_pool_size {self.auto_pool_size} > 2**n1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if self.auto_per not in AUTO_MODES:
            raise ValueError(f"auto_per must be one of {AUTO_MODES}")
        if self.loss not in neuralnet.LOSSES:
            raise ValueError(f"loss must be one of {neuralnet.LOSSES}")
        if self.generations < 1 or self.epochs < 1 or self.r < 0:
            raise ValueError("generations/epochs >= 1 and r >= 0 required")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


PRESETS = {
    "small": SimConfig(n1=10, n2=10, n3=10, bottleneck_size=80, auto_pool_size=240, r=15),
    "large": SimConfig(n1=20, n2=30, n3=20, bottleneck_size=185, auto_pool_size=555, r=30),
}


def preset(name: str) -> SimConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]


@dataclass
class GenerationRecord:
    generation: int
    metrics: MetricReport
    table_checksum: str


@dataclass
class Trajectory:
    """Per-generation observables for one run, plus its reproduction context."""

    config: SimConfig
    p: float
    p_index: int
    run_index: int
    parent_a_id: str
    parent_b_id: str
    parents_agreement_raw: float
    records: list = field(default_factory=list)


def sample_bottleneck(rng: np.random.Generator, n_meanings: int, k: int) -> np.ndarray:
    """k distinct meaning indices, uniform without replacement."""
    if k > n_meanings:
        raise ValueError(f"k={k} exceeds meaning-space size {n_meanings}")
    return rng.choice(n_meanings, size=k, replace=False)


def schedule_counts(config: SimConfig) -> tuple:
    """Closed-form (supervised steps per network, autoencoder steps) per generation."""
    supervised = config.epochs * config.bottleneck_size
    if config.auto_per == "iteration":
        auto = config.epochs * config.bottleneck_size * config.r
    else:
        auto = config.epochs * config.r
    return supervised, auto


def _build_schedule(tutor: LanguageTable, config: SimConfig, rng: np.random.Generator,
                    bset: np.ndarray, apool: np.ndarray):
    """Dense per-step example arrays, in the exact presentation order."""
    meanings = all_meanings(config.n1)
    signals = tutor.entries
    iters = config.bottleneck_size
    epochs = config.epochs
    supervised, auto_total = schedule_counts(config)
    dec_in = np.empty((supervised, config.n3))
    dec_tg = np.empty((supervised, config.n1))
    enc_in = np.empty((supervised, config.n1))
    enc_tg = np.empty((supervised, config.n3))
    auto_in = np.empty((auto_total, config.n1))
    per_epoch_auto = auto_total // epochs
    for ep in range(epochs):
        rows = slice(ep * iters, (ep + 1) * iters)
        order1 = rng.permutation(bset)
        order2 = rng.permutation(bset)
        dec_in[rows] = signals[order1]
        dec_tg[rows] = meanings[order1]
        enc_in[rows] = meanings[order2]
        enc_tg[rows] = signals[order2]
        draws = rng.integers(0, config.auto_pool_size, size=per_epoch_auto)
        auto_in[ep * per_epoch_auto:(ep + 1) * per_epoch_auto] = meanings[apool[draws]]
    return dec_in, dec_tg, enc_in, enc_tg, auto_in


def _train_reference(agent: Agent, schedule, config: SimConfig) -> None:
    """Pure-numpy schedule execution; mirrors kernel.train_schedule exactly."""
    dec_in, dec_tg, enc_in, enc_tg, auto_in = schedule
    iters = config.bottleneck_size
    r_iter = config.r if config.auto_per == "iteration" else 0
    r_epoch = config.r if config.auto_per == "epoch" else 0
    eta = config.learning_rate
    a = 0
    for ep in range(config.epochs):
        for it in range(iters):
            row = ep * iters + it
            neuralnet.sgd_step(agent.decoder, dec_in[row], dec_tg[row], eta, config.loss)
            neuralnet.sgd_step(agent.encoder, enc_in[row], enc_tg[row], eta, config.loss)
            for _ in range(r_iter):
                neuralnet.autoencoder_step(agent, auto_in[a], eta, config.loss)
                a += 1
        for _ in range(r_epoch):
            neuralnet.autoencoder_step(agent, auto_in[a], eta, config.loss)
            a += 1


def train_pupil(tutor: LanguageTable, config: SimConfig, rng: np.random.Generator,
                use_kernel: bool = True) -> Agent:
    """Train a fresh pupil on the tutor's language for one generation.

    Per epoch, two independently shuffled copies of the bottleneck set
    drive the decoder (signal -> meaning) and encoder (meaning -> signal)
    supervised steps; each iteration is followed by r autoencoder steps
    on meanings drawn with replacement from the autoencoder pool (or r
    per epoch when config.auto_per == "epoch").
    """
    if (tutor.n1, tutor.n3) != (config.n1, config.n3):
        raise ValueError("tutor table shape does not match config")
    agent = agent_init(config.n1, config.n2, config.n3, rng)
    bset = sample_bottleneck(rng, 2 ** config.n1, config.bottleneck_size)
    apool = sample_bottleneck(rng, 2 ** config.n1, config.auto_pool_size)
    schedule = _build_schedule(tutor, config, rng, bset, apool)
    if use_kernel:
        r_iter = config.r if config.auto_per == "iteration" else 0
        r_epoch = config.r if config.auto_per == "epoch" else 0
        code = kernel.train_schedule(
            agent.encoder.w1, agent.encoder.b1, agent.encoder.w2, agent.encoder.b2,
            agent.decoder.w1, agent.decoder.b1, agent.decoder.w2, agent.decoder.b2,
            *schedule,
            config.epochs, config.bottleneck_size, r_iter, r_epoch,
            config.learning_rate, kernel.LOSS_CODES[config.loss],
        )
        if code >= 0:
            raise NumericalDivergenceError(f"non-finite loss during epoch {code}")
    else:
        _train_reference(agent, schedule, config)
    agent.encoder.assert_finite()
    agent.decoder.assert_finite()
    return agent


def extract_language(agent: Agent, threshold: float = 0.5) -> LanguageTable:
    """The pupil's language: thresholded encoder output for every meaning."""
    n1, _, n3 = agent.encoder.dims
    enc = agent.encoder
    meanings = all_meanings(n1)
    entries = np.empty((2 ** n1, n3), dtype=np.uint8)
    for start in range(0, 2 ** n1, _CHUNK):
        stop = min(start + _CHUNK, 2 ** n1)
        x = meanings[start:stop].astype(np.float64)
        h = expit(x @ enc.w1.T + enc.b1)
        y = expit(h @ enc.w2.T + enc.b2)
        entries[start:stop] = y >= threshold
    return LanguageTable(n1=n1, n3=n3, entries=entries)


def run_simulation(config: SimConfig, parents: tuple, seed_seq: np.random.SeedSequence,
                   baselines: Baselines, p_index: int = 0, run_index: int = 0,
                   use_kernel: bool = True) -> Trajectory:
    """Mix the parents into generation 0, then iterate pupil training.

    Child seed 0 drives the mixing; child seed g drives generation g's
    pupil, so any generation's initialization depends only on its own
    sub-seed.
    """
    A, B = parents
    children = seed_seq.spawn(config.generations + 1)
    language = mix_languages(A, B, config.p, np.random.default_rng(children[0]))
    traj = Trajectory(
        config=config,
        p=config.p,
        p_index=p_index,
        run_index=run_index,
        parent_a_id=A.checksum(),
        parent_b_id=B.checksum(),
        parents_agreement_raw=bitlang.table_similarity_raw(A, B),
    )
    traj.records.append(GenerationRecord(
        generation=0,
        metrics=report(language, None, A, B, baselines),
        table_checksum=language.checksum(),
    ))
    previous = language
    for g in range(1, config.generations + 1):
        rng = np.random.default_rng(children[g])
        pupil = train_pupil(previous, config, rng, use_kernel=use_kernel)
        language = extract_language(pupil)
        traj.records.append(GenerationRecord(
            generation=g,
            metrics=report(language, previous, A, B, baselines),
            table_checksum=language.checksum(),
        ))
        previous = language
    return traj


def sub_seed_sequence(master_seed: int, p_index: int, run_index: int) -> np.random.SeedSequence:
    """The root seed of one (p, run) task; reproducible in isolation."""
    return np.random.SeedSequence(master_seed, spawn_key=(p_index, run_index))


def run_one(config: SimConfig, p: float, p_index: int, run_index: int,
            master_seed: int, baselines: Baselines) -> Trajectory:
    """One complete run: fresh parent pair, mix, iterate, measure."""
    base = sub_seed_sequence(master_seed, p_index, run_index)
    parents_seq, sim_seq = base.spawn(2)
    prng = np.random.default_rng(parents_seq)
    A = expand(random_compositional_language(config.n1, config.n3, prng))
    B = expand(random_compositional_language(config.n1, config.n3, prng))
    cfg = replace(config, p=p, seed=master_seed)
    return run_simulation(cfg, (A, B), sim_seq, baselines,
                          p_index=p_index, run_index=run_index)


def _batch_worker(args):
    config, p, p_index, run_index, master_seed, baselines = args
    return run_one(config, p, p_index, run_index, master_seed, baselines)


def run_batch(config: SimConfig, p_grid, runs_per_p: int, master_seed: int,
              jobs: int = 1, baselines: Baselines | None = None) -> list:
    """Full (p, run) grid; output ordered by (p_index, run_index) regardless of jobs."""
    if runs_per_p < 1:
        raise ValueError("runs_per_p must be >= 1")
    if baselines is None:
        baselines = compute_baselines(config.n1, config.n3, config.baseline_samples)
    tasks = [
        (config, p, ip, j, master_seed, baselines)
        for ip, p in enumerate(p_grid)
        for j in range(runs_per_p)
    ]
    if jobs <= 1:
        return [_batch_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_batch_worker, tasks))
    return results
