"""Non-monotonic scores: length reward and PMI.

Both adapters can raise a hypothesis' score as it grows, so stopping at the
first finished hypothesis is no longer safe. With the generalized stopping
rule (stop once the best finished score beats every live score plus its
length-based upper bound) best-first beam search still reproduces beam
search exactly. A* beam search with the same bounds used as heuristics is
allowed to disagree; its disagreement rate is printed for comparison.
"""

import argparse

import numpy as np

from bfbeam import (DecoderInput, LengthNormAdapter, LengthNormParams, PmiAdapter, PmiParams,
                    beam_search_reference, decode, make_strategy, random_model, train_ngram)


def random_lm(model, seed):
    rng = np.random.default_rng(seed)
    regular = [model.vocab.tokens[i] for i in model.vocab.regular_ids]
    corpus = [list(rng.choice(regular, size=int(rng.integers(1, 6)))) for _ in range(30)]
    return train_ngram(corpus, 2, vocab=model.vocab)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=100)
    parser.add_argument("--k", type=int, default=3)
    args = parser.parse_args()

    configs = {
        "length reward b=n_max, beta=0.5": lambda m, s: LengthNormAdapter(LengthNormParams(0.5)),
        "length reward b=1.5|x|, beta=1": lambda m, s: LengthNormAdapter(
            LengthNormParams(1.0, "ratio", 1.5)),
        "pmi lambda=0.05, eps=1e-4": lambda m, s: PmiAdapter(PmiParams(0.05, 1e-4),
                                                             random_lm(m, s)),
    }
    print(f"{'adapter':<34}{'generalized=beam':>18}{'astar_beam err':>16}{'call ratio':>12}")
    for label, make in configs.items():
        same = err = 0
        ratios = []
        for seed in range(args.instances):
            model = random_model(seed, 6, 1)
            inp = DecoderInput((0, 1, 2, 3), 10)
            adapter = make(model, seed)
            ref = beam_search_reference(inp, model, adapter, args.k)
            gen = decode(inp, model, adapter, make_strategy("bf_beam", args.k, stop_rule="gen"))
            ast = decode(inp, model, adapter, make_strategy("astar_beam", args.k))
            same += gen.best == ref.best
            err += ast.best.tokens != ref.best.tokens
            ratios.append(gen.stats.score_calls / ref.stats.score_calls)
        print(f"{label:<34}{same:>14}/{args.instances}{err / args.instances:>16.3f}"
              f"{np.mean(ratios):>12.3f}")


if __name__ == "__main__":
    main()
