"""Monte-Carlo emulation of the shot-by-shot photon-counting experiment.

Shots are generated in fixed-size blocks.  Block ``b`` draws from a Philox
generator keyed by the run seed with its counter starting at ``b * 2**64``, so
every shot depends only on ``(seed, shot index)`` and not on how blocks are
scheduled across workers.
"""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from dphav._validation import check_count, check_efficiency, check_records
from dphav.exceptions import EmptyConditionError
from dphav.splitcond import split
from dphav.states import DphavSpec, PhotonDistribution

BLOCK_SIZE = 1 << 16
CSV_HEADER = ("shot", "m1", "m2")


@dataclass(frozen=True)
class RunConfig:
    spec: DphavSpec
    eta: float = 1.0
    n_shots: int = 100_000
    seed: int = 0

    def __post_init__(self):
        check_efficiency(self.eta)
        check_count(self.n_shots, "n_shots", minimum=1)
        check_count(self.seed, "seed")
        if self.seed >= 1 << 64:
            raise ValueError("seed must fit in 64 bits")


def _block_generator(seed, block):
    counter = np.zeros(4, dtype=np.uint64)
    counter[1] = block
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _simulate_block(config, block):
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, config.n_shots - start)
    rng = _block_generator(config.seed, block)
    amps = split(config.spec)
    # a partial final block still draws the full block so that a shot's
    # variates never depend on the run length
    phi = rng.uniform(-np.pi, np.pi, size=BLOCK_SIZE)
    mu = config.eta * amps.intensity(np.cos(phi))
    # numpy's Poisson sampler: inversion below mean 10, PTRS rejection above
    m1 = rng.poisson(mu)
    m2 = rng.poisson(mu)
    return np.column_stack([m1[:n], m2[:n]]).astype(np.int64)


def simulate_shots(config, n_jobs=1):
    """Generate ``(m1, m2)`` detected-photon records, one row per shot.

    ``m1`` is the conditioning (reflected) arm and ``m2`` the signal arm.
    The output is bit-identical for any ``n_jobs``.
    """
    n_blocks = -(-config.n_shots // BLOCK_SIZE)
    blocks = range(n_blocks)
    if n_jobs == 1 or n_blocks == 1:
        parts = [_simulate_block(config, b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda b: _simulate_block(config, b), blocks))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class ConditionalHistogram:
    distribution: PhotonDistribution
    mean: float
    acceptance: float
    n_accepted: int


def reconstruct_conditional(records, rule):
    """Normalized histogram of ``m2`` over shots whose ``m1`` passes ``rule``."""
    records = check_records(records)
    kept = records[rule.accepts(records[:, 0]), 1]
    if kept.size == 0:
        raise EmptyConditionError(
            f"no shot out of {records.shape[0]} satisfies rule {rule}", n_accepted=0
        )
    counts = np.bincount(kept)
    dist = PhotonDistribution(counts / kept.size)
    return ConditionalHistogram(dist, float(kept.mean()), kept.size / records.shape[0], int(kept.size))


def fidelity(p, q):
    """Bhattacharyya overlap ``sum_m sqrt(p_m q_m)`` on the union of supports."""
    p = np.asarray(getattr(p, "probs", p), dtype=float)
    q = np.asarray(getattr(q, "probs", q), dtype=float)
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))))


def write_records_csv(records, fh):
    """Write records as ``shot,m1,m2`` CSV with LF line endings."""
    records = check_records(records)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i, (m1, m2) in enumerate(records.tolist()):
        writer.writerow((i, m1, m2))


def read_records_csv(fh):
    reader = csv.reader(fh)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = [(int(r[1]), int(r[2])) for r in reader if r]
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def records_to_csv(records):
    buf = io.StringIO()
    write_records_csv(records, buf)
    return buf.getvalue()
