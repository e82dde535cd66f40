"""Verifier and prover talking over a real TCP socket.

Starts a verifier server on an ephemeral loopback port, plays a few
sessions against it, and shows that the transcripts match what the same
seed produces in-process.
"""
from __future__ import annotations

import argparse
import json
import tempfile
from pathlib import Path

from bellcert import net
from bellcert.entcf import EntcfParams
from bellcert.harness import RunConfig, run_sessions


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sessions", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--strategy", default="honest")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wire_path = Path(tmp) / "wire.jsonl"
        cfg = RunConfig(params=EntcfParams(backend="ideal"),
                        sessions=args.sessions, seed=args.seed,
                        transcript_path=str(wire_path))
        thread, port, result = net.serve_in_thread("127.0.0.1", 0, cfg)
        print(f"verifier listening on 127.0.0.1:{port}")

        for i in range(args.sessions):
            flag = net.run_prover("127.0.0.1", port, args.strategy, args.seed)
            print(f"  session {i}: verdict {flag}")
        thread.join(30)
        print(f"server done: {result[0].sessions} sessions, "
              f"{result[0].aborted} aborted")

        inproc_path = Path(tmp) / "inproc.jsonl"
        run_sessions(RunConfig(params=EntcfParams(backend="ideal"),
                               sessions=args.sessions, seed=args.seed,
                               strategy=args.strategy,
                               transcript_path=str(inproc_path)))
        same = wire_path.read_bytes() == inproc_path.read_bytes()
        print(f"transcripts identical to in-process run: {same}")
        first = json.loads(wire_path.read_text().splitlines()[0])
        print(f"first record: basis {first['basis']}, round {first['round_type']}, "
              f"flag {first['flag']}")


if __name__ == "__main__":
    main()
