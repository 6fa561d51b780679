"""Two older ways to stop beam search early.

"early" stops once the best finished hypothesis in the current beam
outscores the best unfinished one; with log-probabilities this never changes
the answer. "shrinking" sets finished hypotheses aside and narrows the beam
by one for each; it is cheaper but can miss the beam search answer.
"""

import argparse

import numpy as np

from bfbeam import (DecoderInput, LogProbAdapter, beam_search_reference, decode, decode_es,
                    decode_shrinking, make_strategy, random_model)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=300)
    parser.add_argument("--k", type=int, default=5)
    args = parser.parse_args()

    adapter = LogProbAdapter()
    rows = {"beam": [], "early": [], "shrinking": [], "bf_beam": []}
    errors = {name: 0 for name in rows}
    for seed in range(args.instances):
        model = random_model(seed, 7, 1)
        inp = DecoderInput((0,), 12)
        ref = beam_search_reference(inp, model, adapter, args.k)
        results = {
            "beam": ref,
            "early": decode_es(inp, model, adapter, args.k),
            "shrinking": decode_shrinking(inp, model, adapter, args.k),
            "bf_beam": decode(inp, model, adapter, make_strategy("bf_beam", args.k)),
        }
        for name, res in results.items():
            rows[name].append(res.stats.score_calls)
            errors[name] += res.best != ref.best
    print(f"{'decoder':<11}{'mean calls':>11}{'search err':>12}")
    for name, calls in rows.items():
        print(f"{name:<11}{np.mean(calls):>11.2f}{errors[name] / args.instances:>12.3f}")


if __name__ == "__main__":
    main()
