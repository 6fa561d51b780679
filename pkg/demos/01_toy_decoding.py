"""Every decoder on a three-token toy model.

The model prefers "a" first (0.7) and then EOS (0.6), so greedy decoding
and exhaustive search agree on "a <eos>" with log-probability
log 0.7 + log 0.6. The table shows how many times each strategy asked the
model for a next-token distribution.
"""

import argparse
import math

from bfbeam import DecoderInput, LogProbAdapter, decode, load_table_model, make_strategy
from bfbeam.oracle import exhaustive_best

TOY = """
vocab: a b <eos>
order: 1
ctx <bos> | 0.7 0.2 0.1
ctx a     | 0.3 0.1 0.6
ctx b     | 0.3 0.3 0.4
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--n-max", type=int, default=5)
    args = parser.parse_args()

    model = load_table_model(TOY)
    inp = DecoderInput((0,), args.n_max)
    adapter = LogProbAdapter()
    best = exhaustive_best(inp, model, adapter)
    print(f"exhaustive best: {' '.join(model.vocab.decode(best.tokens))}  "
          f"score {best.score:.4f} (log .7 + log .6 = {math.log(.7) + math.log(.6):.4f})\n")

    print(f"{'strategy':<12}{'output':<22}{'score':>9}{'calls':>7}{'pops':>6}")
    for name, k in [("greedy", None), ("beam", args.k), ("bf_beam", args.k),
                    ("astar_beam", args.k), ("bfs", None), ("best_first", None), ("astar", None)]:
        res = decode(inp, model, adapter, make_strategy(name, k))
        out = " ".join(model.vocab.decode(res.best.tokens))
        print(f"{name:<12}{out:<22}{res.best.score:>9.4f}{res.stats.score_calls:>7}"
              f"{res.stats.pops:>6}")


if __name__ == "__main__":
    main()
