"""Run a batch of verifier/prover sessions and summarize the outcome.

Try a noisy prover to see the failure flags appear:

    python3 demos/run_protocol.py --strategy honest_depolarized:0.2
"""
from __future__ import annotations

import argparse

from bellcert.entcf import EntcfParams
from bellcert.harness import RunConfig, estimate_gammas, run_sessions


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--backend", choices=("ideal", "lwe"), default="ideal")
    ap.add_argument("--sessions", type=int, default=4000)
    ap.add_argument("--strategy", default="honest")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RunConfig(params=EntcfParams(backend=args.backend),
                    sessions=args.sessions, strategy=args.strategy, seed=args.seed)
    stats = run_sessions(cfg)

    print(f"{args.sessions} sessions against the {args.backend} backend, "
          f"strategy {args.strategy!r}:")
    for flag, count in sorted(stats.flag_counts.items()):
        print(f"  {flag:>10}: {count}")

    est = estimate_gammas(stats)
    print("\nestimated pass deficits (3-sigma error on the weakest bucket):")
    for name, e in (("gamma_p", est.gamma_p), ("gamma_t", est.gamma_t),
                    ("gamma_b", est.gamma_b)):
        if e.samples:
            print(f"  {name} = {e.value:.4f} +/- {e.sigma3:.4f}  "
                  f"[bucket {e.bucket}, n={e.samples}]")
    print("\nconditional failure rates:")
    for kind, rate in sorted(est.fail_rates.items()):
        print(f"  {kind}: {rate:.4f}")


if __name__ == "__main__":
    main()
