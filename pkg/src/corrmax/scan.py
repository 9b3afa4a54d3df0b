"""Seeded, resumable Monte-Carlo comparison of maximal coincidence rates across outcome counts.

Records are JSONL: a header line ``{"schema": 1, "config_hash": ..., "config": ...}``
followed by one record per state, appended and flushed as each state finishes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .optimizer import optimize_coincidence
from .state import random_density
from .validation import ValidationError, check_dims

log = logging.getLogger(__name__)

SCHEMA = 1
RESIDUAL_LIMIT = 1e-7
CHAIN_SLACK = 1e-7


@dataclass(frozen=True)
class ScanConfig:
    """Scan parameters. ``ns`` defaults to ``(d, d + 1)`` with ``d = max(dims)``."""

    dims: tuple[int, int] = (2, 2)
    count: int = 1200
    ns: tuple[int, ...] | None = None
    rank: int | None = None
    restarts: int = 4
    max_iters: int = 5000
    tol: float = 1e-10
    seed: int = 0
    threshold: float = 1e-5
    rerun_factor: int = 10
    warm_start: bool = True
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        d1, d2 = check_dims(*self.dims)
        object.__setattr__(self, "dims", (d1, d2))
        d = max(d1, d2)
        ns = (d, d + 1) if self.ns is None else tuple(sorted({int(n) for n in self.ns}))
        if min(ns) < d:
            raise ValidationError(f"every n must be >= {d}, got {ns}")
        if d not in ns:
            ns = (d,) + ns
        object.__setattr__(self, "ns", ns)
        if int(self.count) < 1:
            raise ValidationError(f"state count must be >= 1, got {self.count}")
        if self.rank is not None and not 1 <= int(self.rank) <= d1 * d2:
            raise ValidationError(f"rank must lie in [1, {d1 * d2}], got {self.rank}")
        if int(self.restarts) < 0 or int(self.workers) < 1:
            raise ValidationError("restarts must be >= 0 and workers >= 1")

    def identity(self) -> dict:
        """Fields that determine each record.

        Output path, worker count and state count are excluded, so a scan can
        be resumed with a larger ``count``.
        """
        doc = asdict(self)
        for key in ("out", "workers", "count"):
            doc.pop(key)
        doc["dims"] = list(self.dims)
        doc["ns"] = list(self.ns)
        return doc

    @property
    def hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ScanRecord:
    index: int
    sub_seed: list[int]
    results: dict[str, dict]
    gap: float
    converged: bool
    chain_ok: bool
    rerun: bool
    wall_time: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScanRecord":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class ScanSummary:
    count: int
    converged: int
    unconverged: int
    max_gap: float
    mean_gap: float
    violations: int
    chain_violations: int
    threshold: float
    seed: int | None
    config_hash: str | None
    candidates: tuple[int, ...] = field(default=())


def _state_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def scan_state(config: ScanConfig, index: int) -> ScanRecord:
    """Optimise one sampled state at every ``n`` in the config."""
    t0 = time.perf_counter()
    d1, d2 = config.dims
    rho = random_density(d1, d2, rank=config.rank, seed=_state_seed(config.seed, index))

    def solve(restarts: int, salt: int) -> dict:
        out = {}
        warm = ()
        for n in config.ns:
            res = optimize_coincidence(
                rho,
                n,
                restarts=restarts,
                seed=np.random.SeedSequence(config.seed, spawn_key=(index, n, salt)),
                max_iters=config.max_iters,
                tol=config.tol,
                starts=warm,
            )
            out[str(n)] = {
                "C": res.coincidence,
                "residual": res.residual,
                "gradient_norm": res.gradient_norm,
                "classification": res.classification,
            }
            if config.warm_start:
                warm = ((res.pom_a, res.pom_b),)
        return out

    results = solve(config.restarts, 0)
    gap = _gap(config, results)
    rerun = False
    if gap > config.threshold:
        log.info("state %d: gap %.3e above threshold, re-running with more restarts", index, gap)
        results = solve(config.restarts * config.rerun_factor, 1)
        gap = _gap(config, results)
        rerun = True
    converged = all(r["residual"] <= RESIDUAL_LIMIT for r in results.values())
    base = results[str(config.ns[0])]["C"]
    chain_ok = all(r["C"] >= base - CHAIN_SLACK for r in results.values())
    return ScanRecord(index, [config.seed, index], results, gap, converged, chain_ok, rerun, time.perf_counter() - t0)


def _gap(config: ScanConfig, results: dict) -> float:
    base = results[str(config.ns[0])]["C"]
    return max(r["C"] for r in results.values()) - base


def reduce_records(records, threshold: float, seed=None, config_hash=None) -> ScanSummary:
    """Summary statistics; a pure, order-independent function of the records."""
    records = sorted(records, key=lambda r: r.index)
    good = [r for r in records if r.converged]
    gaps = [r.gap for r in good]
    cands = tuple(r.index for r in good if r.gap > threshold)
    return ScanSummary(
        count=len(records),
        converged=len(good),
        unconverged=len(records) - len(good),
        max_gap=max(gaps) if gaps else 0.0,
        mean_gap=math.fsum(gaps) / len(gaps) if gaps else 0.0,
        violations=len(cands),
        chain_violations=sum(not r.chain_ok for r in records),
        threshold=threshold,
        seed=seed,
        config_hash=config_hash,
        candidates=cands,
    )


def _read_records(path: Path):
    header = None
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                if "schema" in doc:
                    if doc["schema"] != SCHEMA:
                        raise ValidationError(f"{path}: unsupported schema {doc['schema']!r}")
                    header = doc
                    continue
                records.append(ScanRecord.from_dict(doc))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                warnings.warn(f"{path}:{lineno}: skipping corrupt record ({type(exc).__name__})", stacklevel=3)
    return header, records


def summarize(path) -> ScanSummary:
    """Recompute the summary from a record file; corrupt lines are skipped with a warning."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"record file {path} does not exist")
    header, records = _read_records(path)
    records = list({r.index: r for r in records}.values())
    if header is None:
        return reduce_records(records, ScanConfig().threshold)
    cfg = header.get("config", {})
    return reduce_records(records, cfg.get("threshold", 1e-5), cfg.get("seed"), header.get("config_hash"))


def _run_one(args):
    return scan_state(*args)


def run_scan(config: ScanConfig, resume: bool = False) -> ScanSummary:
    """Run (or resume) a scan, writing one JSONL record per state when ``config.out`` is set."""
    done: dict[int, ScanRecord] = {}
    fh = None
    if config.out is not None:
        path = Path(config.out)
        if resume and path.exists() and path.stat().st_size:
            header, old = _read_records(path)
            if header is None or header.get("config_hash") != config.hash:
                raise ValidationError(f"{path}: config hash does not match the existing scan; refusing to resume")
            done = {r.index: r for r in old if r.index < config.count}
            mode = "a"
        else:
            mode = "w"
        try:
            fh = open(path, mode)
        except OSError as exc:
            raise ValidationError(f"cannot write {path}: {exc.strerror}") from None
        if mode == "w":
            fh.write(json.dumps({"schema": SCHEMA, "config_hash": config.hash, "config": config.identity()}) + "\n")
            fh.flush()
    todo = [i for i in range(config.count) if i not in done]
    records = dict(done)
    try:
        if config.workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(config.workers) as pool:
                stream = pool.map(_run_one, [(config, i) for i in todo], chunksize=4)
                for rec in stream:
                    records[rec.index] = _emit(fh, rec)
        else:
            for i in todo:
                records[i] = _emit(fh, scan_state(config, i))
    finally:
        if fh is not None:
            fh.close()
    return reduce_records(records.values(), config.threshold, config.seed, config.hash)


def _emit(fh, rec: ScanRecord) -> ScanRecord:
    # round-trip through JSON so live and recomputed summaries agree bit for bit
    line = rec.to_json()
    if fh is not None:
        fh.write(line + "\n")
        fh.flush()
    return ScanRecord.from_dict(json.loads(line))
