"""Seeded Monte Carlo drivers comparing the algorithms to their bounds.

Trials run in lockstep chunks of CHUNK lanes; each chunk owns two RNG
streams spawned from (seed, chunk index): one for the algorithm's coins,
one for oracle salts.  Coins therefore do not depend on the salt setting
(supporting the paired salt-variation checks), and results do not depend
on the worker count, only on the seed.

Every trial's outcome is judged against the brute-force truth module on
the decoded output; reports carry the failing trial indices, so a report
is a complete record of per-trial outcomes.  Wall time is deliberately
not part of the report (reports must be byte-reproducible); the CLI
prints timing to stderr instead.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import truth
from .algebras import CayleyAlgebra
from .blackbox import VectorOracle
from .ideals import ideal_additive_generators
from .randgen import (
    GenParams,
    additive_generating_system,
    batch_random_subsums,
    reduce_generating_system,
    subproduct_failure_bound,
)
from .varieties import IdentityBasis, decide_variety_membership

CHUNK = 1024


def chunk_rngs(seed: int, chunk_index: int):
    """(coins, salts) generator pair for one chunk; both derive from the
    root seed and the chunk index alone."""
    ss = np.random.SeedSequence(seed, spawn_key=(chunk_index,))
    coins, salts = ss.spawn(2)
    return np.random.default_rng(coins), np.random.default_rng(salts)


def three_sigma_slack(bound: float, trials: int) -> float:
    p = min(max(bound, 0.0), 1.0)
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


# ---------------------------------------------------------------------------
# per-chunk workers (top level: they cross process boundaries)


def _lane_masks(decoded: np.ndarray) -> np.ndarray:
    return np.bitwise_or.reduce(np.int64(1) << decoded.astype(np.int64), axis=1)


def _judge_masks(masks: np.ndarray, judge) -> np.ndarray:
    """judge(frozenset of elements) -> bool, memoized over distinct masks."""
    cache: dict[int, bool] = {}
    out = np.zeros(masks.shape[0], dtype=bool)
    for i, mask in enumerate(masks.tolist()):
        got = cache.get(mask)
        if got is None:
            got = cache[mask] = bool(judge(truth.mask_to_set(mask)))
        out[i] = got
    return out


def _chunk_result(job: dict, ok: np.ndarray, vo: VectorOracle,
                  membership_bad: int) -> dict:
    ops = vo.ops_total_per_lane
    fails = np.flatnonzero(~ok) + job["start"]
    return {
        "successes": int(ok.sum()),
        "fail_idx": fails.tolist(),
        "op_sum": int(ops.sum()),
        "op_max": int(ops.max()) if ops.size else 0,
        "eq_sum": int(vo.equality_queries.sum()),
        "eq_max": int(vo.equality_queries.max()) if ops.size else 0,
        "membership_violations": membership_bad,
    }


def _session(job: dict):
    coins, salts = chunk_rngs(job["seed"], job["chunk"])
    vo = VectorOracle(job["alg"], job["salt_bits"], job["width"], rng=salts)
    return vo, vo.broadcast_elements(job["generators"]), coins


def _chunk_gen_additive(job: dict) -> dict:
    alg: CayleyAlgebra = job["alg"]
    vo, s0, coins = _session(job)
    out = additive_generating_system(vo, job["n"], s0, job["params"], coins)
    dec = vo.decode_for_test(out)
    bad = int((dec >= alg.size).sum())
    ok = _judge_masks(_lane_masks(dec),
                      lambda s: truth.generates_additively(alg, s))
    return _chunk_result(job, ok, vo, bad)


def _chunk_gen_ideal(job: dict) -> dict:
    alg: CayleyAlgebra = job["alg"]
    vo, s0, coins = _session(job)
    t0 = vo.broadcast_elements(job["t"])
    out = ideal_additive_generators(vo, job["n"], s0, t0, job["params"], coins)
    if job["reduce_output"]:
        out = reduce_generating_system(vo, job["n"], out, job["params"], coins)
    dec = vo.decode_for_test(out)
    ideal = job["ideal"]
    ideal_mask = truth.set_to_mask(ideal)
    masks = _lane_masks(dec)
    bad = int((masks & ~ideal_mask != 0).sum())
    ok = _judge_masks(masks, lambda s: truth.subgroup_closure(alg, s) == ideal)
    return _chunk_result(job, ok, vo, bad)


def _chunk_decide(job: dict) -> dict:
    vo, s0, coins = _session(job)
    answers = decide_variety_membership(vo, job["n"], s0, job["basis"],
                                        job["params"], coins)
    ok = answers == job["ground_truth"]
    return _chunk_result(job, ok, vo, 0)


def _chunk_subproduct(job: dict) -> dict:
    alg: CayleyAlgebra = job["alg"]
    vo, g0, coins = _session(job)
    out = batch_random_subsums(vo, g0, job["k"] * job["l"], coins)
    dec = vo.decode_for_test(out)
    full = frozenset(range(alg.size))
    ok = _judge_masks(_lane_masks(dec),
                      lambda s: truth.subgroup_closure(alg, s) == full)
    return _chunk_result(job, ok, vo, 0)


_WORKERS = {
    "gen-additive": _chunk_gen_additive,
    "gen-ideal": _chunk_gen_ideal,
    "decide-variety": _chunk_decide,
    "subproduct-bound": _chunk_subproduct,
}


def _run_chunk(job: dict) -> dict:
    return _WORKERS[job["kind"]](job)


def _execute(common: dict, trials: int, seed: int, threads: int) -> dict:
    jobs = []
    start = 0
    chunk = 0
    while start < trials:
        width = min(CHUNK, trials - start)
        jobs.append({**common, "chunk": chunk, "start": start,
                     "width": width, "seed": seed})
        start += width
        chunk += 1
    if threads <= 1 or len(jobs) == 1:
        results = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_chunk, jobs))
    agg = {
        "successes": sum(r["successes"] for r in results),
        "fail_idx": [i for r in results for i in r["fail_idx"]],
        "op_sum": sum(r["op_sum"] for r in results),
        "op_max": max(r["op_max"] for r in results),
        "eq_sum": sum(r["eq_sum"] for r in results),
        "eq_max": max(r["eq_max"] for r in results),
        "membership_violations": sum(r["membership_violations"] for r in results),
    }
    return agg


def _results_block(agg: dict, trials: int) -> dict:
    failures = trials - agg["successes"]
    return {
        "successes": agg["successes"],
        "failures": failures,
        "empirical_failure_rate": failures / trials,
        "failure_trial_indices": agg["fail_idx"],
        "membership_violations": agg["membership_violations"],
    }


def _bounds_block(bound: float, trials: int, failures: int) -> dict:
    slack = three_sigma_slack(bound, trials)
    rate = failures / trials
    return {
        "analytic_bound": bound,
        "three_sigma_slack": slack,
        "threshold": bound + slack,
        "satisfied": rate <= bound + slack,
    }


def _queries_block(agg: dict, trials: int) -> dict:
    return {
        "operation_mean": round(agg["op_sum"] / trials, 6),
        "operation_max": agg["op_max"],
        "equality_mean": round(agg["eq_sum"] / trials, 6),
        "equality_max": agg["eq_max"],
    }


def _resolve_generators(alg: CayleyAlgebra, generators) -> tuple[int, ...]:
    if generators is not None:
        return tuple(generators)
    return tuple(truth.sigma_generators_greedy(alg))


# ---------------------------------------------------------------------------
# experiment drivers


def gen_additive_experiment(alg: CayleyAlgebra, *, n: int, salt_bits: int,
                            params: GenParams, trials: int, seed: int,
                            generators=None, threads: int = 1) -> dict:
    gens = _resolve_generators(alg, generators)
    k = params.resolved_k()
    agg = _execute({"kind": "gen-additive", "alg": alg, "n": n,
                    "salt_bits": salt_bits, "params": params,
                    "generators": gens}, trials, seed, threads)
    return {
        "parameters": {
            "algebra": alg.name, "size": alg.size, "n": n, "c": params.c,
            "k": k, "m": len(gens), "generators": list(gens),
            "salt_bits": salt_bits, "trials": trials, "seed": seed,
        },
        "results": _results_block(agg, trials),
        "bounds": _bounds_block(params.failure_bound(n), trials,
                                trials - agg["successes"]),
        "queries": _queries_block(agg, trials),
    }


def gen_ideal_experiment(alg: CayleyAlgebra, t: tuple[int, ...], *, n: int,
                         salt_bits: int, params: GenParams, trials: int,
                         seed: int, generators=None, reduce_output: bool = False,
                         threads: int = 1) -> dict:
    gens = _resolve_generators(alg, generators)
    k = params.resolved_k()
    ideal = frozenset(truth.ideal_closure(alg, set(t)))
    agg = _execute({"kind": "gen-ideal", "alg": alg, "n": n,
                    "salt_bits": salt_bits, "params": params,
                    "generators": gens, "t": tuple(t), "ideal": ideal,
                    "reduce_output": reduce_output}, trials, seed, threads)
    return {
        "parameters": {
            "algebra": alg.name, "size": alg.size, "n": n, "c": params.c,
            "k": k, "m": len(gens), "generators": list(gens),
            "t": list(t), "ideal_size": len(ideal),
            "reduce_output": reduce_output,
            "salt_bits": salt_bits, "trials": trials, "seed": seed,
        },
        "results": _results_block(agg, trials),
        "bounds": _bounds_block(params.failure_bound(n, runs=2), trials,
                                trials - agg["successes"]),
        "queries": _queries_block(agg, trials),
    }


def decide_variety_experiment(alg: CayleyAlgebra, basis: IdentityBasis, *,
                              n: int, salt_bits: int, params: GenParams,
                              trials: int, seed: int, generators=None,
                              threads: int = 1) -> dict:
    gens = _resolve_generators(alg, generators)
    k = params.resolved_k()
    ground_truth = truth.satisfies_basis(alg, basis)
    agg = _execute({"kind": "decide-variety", "alg": alg, "n": n,
                    "salt_bits": salt_bits, "params": params,
                    "generators": gens, "basis": basis,
                    "ground_truth": ground_truth}, trials, seed, threads)
    failures = trials - agg["successes"]
    return {
        "parameters": {
            "algebra": alg.name, "size": alg.size, "basis": basis.name,
            "ground_truth": ground_truth, "n": n, "c": params.c, "k": k,
            "m": len(gens), "generators": list(gens),
            "salt_bits": salt_bits, "trials": trials, "seed": seed,
        },
        "results": {
            **_results_block(agg, trials),
            "agreement_rate": agg["successes"] / trials,
        },
        "bounds": _bounds_block(params.failure_bound(n), trials, failures),
        "queries": _queries_block(agg, trials),
    }


def subproduct_experiment(alg: CayleyAlgebra, *, k: int, salt_bits: int,
                          trials: int, seed: int, additive_generators=None,
                          threads: int = 1) -> dict:
    if additive_generators is not None:
        gens = tuple(additive_generators)
    else:
        gens = tuple(truth.additive_generators_greedy(alg))
    l = truth.max_chain_length(alg)
    bound = subproduct_failure_bound(k, l)
    agg = _execute({"kind": "subproduct-bound", "alg": alg, "k": k, "l": l,
                    "salt_bits": salt_bits, "generators": gens},
                   trials, seed, threads)
    return {
        "parameters": {
            "algebra": alg.name, "size": alg.size, "k": k,
            "chain_length": l, "subsums": k * l, "m": len(gens),
            "generators": list(gens),
            "salt_bits": salt_bits, "trials": trials, "seed": seed,
        },
        "results": _results_block(agg, trials),
        "bounds": _bounds_block(bound, trials, trials - agg["successes"]),
        "queries": _queries_block(agg, trials),
    }


def render_report(report: dict) -> str:
    """Stable text form: insertion-ordered keys, two-space indent."""
    return json.dumps(report, indent=2) + "\n"
