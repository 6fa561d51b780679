"""Capping the agenda at k * gamma hypotheses.

When the cap is hit, the worst hypothesis of the shortest stored length is
dropped. Small gamma saves memory at the price of occasional search errors
(different output from beam search); at gamma = n_max the cap never binds.
"""

import argparse

from bfbeam import (DecoderInput, LogProbAdapter, beam_search_reference, decode, make_strategy,
                    random_model)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=300)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--n-max", type=int, default=10)
    args = parser.parse_args()

    adapter = LogProbAdapter()
    cases = []
    for seed in range(args.instances):
        model = random_model(seed, 6, 1)
        inp = DecoderInput((0,), args.n_max)
        cases.append((model, inp, beam_search_reference(inp, model, adapter, args.k)))

    print(f"{'gamma':>6}{'cap':>6}{'search err':>12}{'mean peak':>11}{'mean calls':>12}")
    for gamma in (1, 2, 5, args.n_max):
        errors = peak = calls = 0
        for model, inp, ref in cases:
            res = decode(inp, model, adapter, make_strategy("bf_beam", args.k, memory_gamma=gamma))
            errors += res.best != ref.best
            peak += res.stats.peak_active
            calls += res.stats.score_calls
        n = len(cases)
        print(f"{gamma:>6}{args.k * gamma:>6}{errors / n:>12.3f}{peak / n:>11.1f}{calls / n:>12.1f}")


if __name__ == "__main__":
    main()
