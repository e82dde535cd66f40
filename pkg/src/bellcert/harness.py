"""Session driver, accumulators and parameter sweeps.

Runs verifier and simulated prover in-process, accumulates per-bucket
pass counts, and turns them into empirical estimates of the pass deficits
with binomial error bars.  Every session's randomness is derived from
``(seed, session_id, role)`` so in-process runs and the TCP transport
produce bit-for-bit identical transcripts.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import analysis, device as devmod, protocol
from .entcf import EntcfParams
from .errors import AbortSessionError, ConfigurationError
from .protocol import Flag, TranscriptRecord, VerifierState
from .provers import ClawOracle, make_prover

VERIFIER_ROLE, PROVER_ROLE = 0, 1


def role_rng(seed: int, session_id: int, role: int) -> np.random.Generator:
    """Deterministic per-session, per-role random stream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(session_id, role))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class RunConfig:
    params: EntcfParams = field(default_factory=EntcfParams)
    sessions: int = 1000
    strategy: str = "honest"
    seed: int = 0
    retry_budget: int = 64
    force_basis: Optional[tuple[int, int]] = None
    force_round: Optional[str] = None
    transcript_path: Optional[str] = None

    def __post_init__(self):
        if self.sessions < 1:
            raise ConfigurationError("need at least one session")
        if self.force_round not in (None, "preimage", "hadamard"):
            raise ConfigurationError(f"bad forced round {self.force_round!r}")


def _start_forced(config: RunConfig, vrng: np.random.Generator,
                  session_id: int) -> tuple[VerifierState, dict]:
    state, keys_msg = protocol.start_session(config.params, vrng, session_id)
    if config.force_basis is not None and tuple(state.basis) != tuple(config.force_basis):
        # diagnostics only: resample keys until the wanted basis comes up,
        # keeping the rng stream well-defined
        while tuple(state.basis) != tuple(config.force_basis):
            state, keys_msg = protocol.start_session(config.params, vrng, session_id)
    return state, keys_msg


def run_one_session(config: RunConfig, session_id: int) -> TranscriptRecord:
    vrng = role_rng(config.seed, session_id, VERIFIER_ROLE)
    prng = role_rng(config.seed, session_id, PROVER_ROLE)
    state, keys_msg = _start_forced(config, vrng, session_id)
    oracle = ClawOracle(config.params, state.keys, state.trapdoors)
    prover = make_prover(config.strategy, config.params, prng, oracle,
                         config.retry_budget)
    commit_msg = prover.commit(keys_msg)
    round_msg = protocol.receive_commit(state, commit_msg, vrng)
    if config.force_round is not None and state.round_type != config.force_round:
        state.round_type = config.force_round
        state.phase = "preimage" if config.force_round == "preimage" else "equations"
        round_msg = protocol.message("round", session_id, {"round": config.force_round})
    if state.round_type == "preimage":
        protocol.receive_preimage(state, prover.preimage_answer())
    else:
        q_msg = protocol.receive_equations(state, prover.equations(), vrng)
        protocol.receive_answers(state, prover.answers(q_msg))
    return protocol.record_from_state(state)


_TEST_BUCKETS = {
    # name -> (basis, question pair, leg whose answer is checked)
    "z1": ((0, 1), (0, 0), 0), "zt1": ((0, 1), (0, 1), 0),
    "xt2": ((0, 1), (0, 1), 1), "x2": ((0, 1), (1, 1), 1),
    "x1": ((1, 0), (1, 1), 0), "xt1": ((1, 0), (1, 0), 0),
    "z2": ((1, 0), (0, 0), 1), "zt2": ((1, 0), (1, 0), 1),
}


@dataclass
class RunStats:
    sessions: int = 0
    flag_counts: Counter = field(default_factory=Counter)
    aborted: int = 0
    undecodable: int = 0
    pre_counts: dict = field(default_factory=dict)     # (basis, leg) -> [ok, total]
    test_counts: dict = field(default_factory=dict)    # name -> [ok, total]
    bell_counts: dict = field(default_factory=dict)    # name -> [ok, total]
    fail_cond: dict = field(default_factory=dict)      # flag -> [fails, opportunities]

    def add_record(self, rec: TranscriptRecord) -> None:
        self.sessions += 1
        self.flag_counts[rec.flag] += 1
        basis = tuple(rec.basis)
        if rec.round_type == "preimage":
            fc = self.fail_cond.setdefault("fail_pre", [0, 0])
            fc[1] += 1
            fc[0] += rec.flag == Flag.FAIL_PRE.value
            for leg, ok in enumerate(rec.pre_leg_ok):
                cell = self.pre_counts.setdefault((basis, leg), [0, 0])
                cell[1] += 1
                cell[0] += bool(ok)
            return
        targets = _record_targets(rec)
        if targets is None:
            self.undecodable += 1
            return
        q = tuple(rec.questions)
        v = tuple(rec.answers)
        if basis in ((0, 1), (1, 0)):
            fc = self.fail_cond.setdefault("fail_test", [0, 0])
            fc[1] += 1
            fc[0] += rec.flag == Flag.FAIL_TEST.value
            for name, (bb, qq, leg) in _TEST_BUCKETS.items():
                if basis == bb and q == qq:
                    cell = self.test_counts.setdefault(name, [0, 0])
                    cell[1] += 1
                    cell[0] += v[leg] == targets[leg]
        elif basis == (1, 1) and q in ((0, 1), (1, 0)):
            fc = self.fail_cond.setdefault("fail_bell", [0, 0])
            fc[1] += 1
            fc[0] += rec.flag == Flag.FAIL_BELL.value
            name = "zt1_xt2" if q == (0, 1) else "xt1_zt2"
            cell = self.bell_counts.setdefault(name, [0, 0])
            cell[1] += 1
            cell[0] += (v[0] ^ v[1]) == (targets[0] if q == (0, 1) else targets[1])

    def to_json(self) -> dict:
        return {
            "sessions": self.sessions,
            "flag_counts": dict(self.flag_counts),
            "aborted": self.aborted,
            "undecodable": self.undecodable,
            "pre_counts": {f"{b[0]}{b[1]}.leg{leg + 1}": list(v)
                           for (b, leg), v in self.pre_counts.items()},
            "test_counts": {k: list(v) for k, v in self.test_counts.items()},
            "bell_counts": {k: list(v) for k, v in self.bell_counts.items()},
            "conditional_fail": {k: list(v) for k, v in self.fail_cond.items()},
        }


def _record_targets(rec: TranscriptRecord):
    """Reconstruct the accepted answer pair from a hadamard record."""
    t = rec.targets or {}
    basis = tuple(rec.basis)
    b1, b2, u1, u2 = t.get("b1"), t.get("b2"), t.get("u1"), t.get("u2")
    if basis == (0, 0):
        return None if b1 is None or b2 is None else (b1, b2)
    if basis == (0, 1):
        return None if b1 is None or u2 is None else (b1, u2 ^ b1)
    if basis == (1, 0):
        return None if u1 is None or b2 is None else (u1 ^ b2, b2)
    return None if u1 is None or u2 is None else (u2, u1)


def run_sessions(config: RunConfig) -> RunStats:
    stats = RunStats()
    sink = None
    try:
        if config.transcript_path:
            sink = open(config.transcript_path, "w", encoding="utf-8")
        for sid in range(config.sessions):
            try:
                rec = run_one_session(config, sid)
            except AbortSessionError:
                stats.aborted += 1
                continue
            stats.add_record(rec)
            if sink is not None:
                sink.write(json.dumps(rec.to_json()) + "\n")
    finally:
        if sink is not None:
            sink.close()
    return stats


def read_transcripts(path: str) -> Iterable[TranscriptRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield TranscriptRecord.from_json(json.loads(line))


def stats_from_transcripts(path: str) -> RunStats:
    stats = RunStats()
    for rec in read_transcripts(path):
        stats.add_record(rec)
    return stats


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------

@dataclass
class Estimate:
    value: float
    sigma3: float
    bucket: str
    samples: int
    insufficient: bool

    def to_json(self) -> dict:
        return {"value": self.value, "sigma3": self.sigma3, "bucket": self.bucket,
                "samples": self.samples, "insufficient": self.insufficient}


def _deficit_estimate(counts: dict, min_samples: int) -> Estimate:
    """1 - (smallest bucket pass frequency), with its binomial error bar."""
    if not counts:
        return Estimate(float("nan"), float("nan"), "", 0, True)
    worst_name, worst_rate, worst_n = "", 2.0, 0
    insufficient = False
    for name, (ok, total) in sorted(counts.items()):
        if total < min_samples:
            insufficient = True
        rate = ok / total if total else 0.0
        if total and rate < worst_rate:
            worst_name, worst_rate, worst_n = str(name), rate, total
    sig3 = 3.0 * math.sqrt(max(worst_rate * (1.0 - worst_rate), 1.0 / worst_n) / worst_n) \
        if worst_n else float("nan")
    return Estimate(1.0 - worst_rate, sig3, worst_name, worst_n, insufficient)


@dataclass
class GammaEstimates:
    gamma_p: Estimate
    gamma_t: Estimate
    gamma_b: Estimate
    fail_rates: dict

    def to_json(self) -> dict:
        return {"gamma_p": self.gamma_p.to_json(), "gamma_t": self.gamma_t.to_json(),
                "gamma_b": self.gamma_b.to_json(),
                "conditional_fail_rates": dict(self.fail_rates)}


def estimate_gammas(stats: RunStats, min_samples: int = 20) -> GammaEstimates:
    rates = {}
    for kind, (fails, total) in stats.fail_cond.items():
        rates[kind] = fails / total if total else float("nan")
    return GammaEstimates(
        gamma_p=_deficit_estimate(stats.pre_counts, min_samples),
        gamma_t=_deficit_estimate(stats.test_counts, min_samples),
        gamma_b=_deficit_estimate(stats.bell_counts, min_samples),
        fail_rates=rates)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def sweep(noise_grid: Iterable[float], config: RunConfig) -> list[dict]:
    """White-box deficits and empirical estimates across a noise grid."""
    rows = []
    for p in noise_grid:
        dev = devmod.from_honest(p)
        report = analysis.analyze(dev)
        cfg = RunConfig(params=config.params, sessions=config.sessions,
                        strategy=f"honest_depolarized:{p}" if p else "honest",
                        seed=config.seed, retry_budget=config.retry_budget)
        est = estimate_gammas(run_sessions(cfg))
        rows.append({
            "p": p,
            "gamma_t": report.gamma_t, "gamma_b": report.gamma_b,
            "gamma_t_hat": est.gamma_t.value, "gamma_t_hat_sigma3": est.gamma_t.sigma3,
            "gamma_b_hat": est.gamma_b.value, "gamma_b_hat_sigma3": est.gamma_b.sigma3,
            "gamma_p_hat": est.gamma_p.value,
            "max_pauli_residual": max(report.pauli_rounding.values()),
            "max_bell_distance": max(c.state_distance for c in report.bell_cases),
        })
    return rows


def write_sweep_csv(rows: list[dict], path: str) -> None:
    if not rows:
        raise ConfigurationError("empty sweep")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
