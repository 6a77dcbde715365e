"""Time the compiled edit-distance kernel against the pure-Python one.

Runs the same workload twice in fresh interpreters, once per kernel
(selection happens at import, so each needs its own process), and
prints pairs/second for both plus the speedup.

    python3 benchmarks/bench_editdist.py [n_pairs]
"""

import json
import os
import random
import subprocess
import sys
import time

DEFAULT_PAIRS = 50_000
ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def workload(n_pairs: int, seed: int = 11):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        a = "".join(rng.choices(ALPHABET, k=rng.randint(3, 12)))
        b = "".join(rng.choices(ALPHABET, k=rng.randint(3, 12)))
        pairs.append((a, b))
    return pairs


def run_child(n_pairs: int) -> dict:
    pairs = workload(n_pairs)
    from surpdec.editdist import KERNEL, char_dl_distance, char_dl_distance_many

    start = time.perf_counter()
    checksum = 0
    for a, b in pairs:
        checksum += char_dl_distance(a, b)
    single = time.perf_counter() - start

    words = [a for a, _ in pairs[:10_000]]
    target = pairs[0][1]
    start = time.perf_counter()
    batch_out = char_dl_distance_many(target, words)
    batch = time.perf_counter() - start
    checksum += int(sum(batch_out))

    return {
        "kernel": KERNEL,
        "single_seconds": single,
        "single_pairs_per_s": n_pairs / single,
        "batch_seconds": batch,
        "batch_pairs_per_s": len(words) / batch,
        "checksum": checksum,
    }


def main() -> int:
    if len(sys.argv) > 1 and sys.argv[1] == "--child":
        print(json.dumps(run_child(int(sys.argv[2]))))
        return 0

    n_pairs = int(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_PAIRS
    results = {}
    for forced, label in ((None, "default"), ("1", "pure")):
        env = dict(os.environ)
        env.pop("SURPDEC_PURE_KERNEL", None)
        if forced:
            env["SURPDEC_PURE_KERNEL"] = forced
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child", str(n_pairs)],
            capture_output=True, text=True, env=env, check=True,
        )
        results[label] = json.loads(out.stdout)

    default, pure = results["default"], results["pure"]
    if default["checksum"] != pure["checksum"]:
        print("kernels disagree on the workload, refusing to report timings")
        return 1

    print(f"workload: {n_pairs} random pairs, lengths 3-12")
    for label in ("default", "pure"):
        r = results[label]
        print(
            f"{r['kernel']:>12}: single {r['single_pairs_per_s']:>10.0f} pairs/s"
            f"   batch {r['batch_pairs_per_s']:>10.0f} pairs/s"
        )
    if default["kernel"] == pure["kernel"]:
        print("compiled kernel unavailable; both runs used the fallback")
    else:
        print(
            f"speedup: single {default['single_pairs_per_s'] / pure['single_pairs_per_s']:.1f}x"
            f"   batch {default['batch_pairs_per_s'] / pure['batch_pairs_per_s']:.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
