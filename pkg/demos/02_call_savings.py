"""How many model calls best-first beam search saves over beam search.

A character bigram model is trained on synthetic sentences and mixed with a
bag-of-characters of each source line, so each "source" gets its own output
distribution. Both decoders return the same output for every line; only the
number of next-token evaluations differs, and the gap widens with k.
"""

import argparse

import numpy as np

from bfbeam import (DecoderInput, LogProbAdapter, SourceMixtureModel, beam_search_reference,
                    char_corpus, decode, make_strategy, synthetic_sentences, train_ngram)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lines", type=int, default=200, help="corpus size")
    parser.add_argument("--instances", type=int, default=30)
    parser.add_argument("--n-max", type=int, default=20)
    parser.add_argument("--widths", default="1,5,10,50,100")
    args = parser.parse_args()

    corpus = char_corpus(synthetic_sentences(0, args.lines))
    lm = train_ngram(corpus, 2)
    model = SourceMixtureModel(lm, weight=0.3)
    adapter = LogProbAdapter()

    print(f"{'k':>5}{'beam calls':>12}{'bf_beam calls':>15}{'ratio':>8}{'same output':>13}")
    for k in (int(w) for w in args.widths.split(",")):
        ref_calls, bf_calls, same = [], [], 0
        for line in corpus[:args.instances]:
            inp = DecoderInput(lm.vocab.encode(line), args.n_max)
            ref = beam_search_reference(inp, model, adapter, k)
            bf = decode(inp, model, adapter, make_strategy("bf_beam", k))
            ref_calls.append(ref.stats.score_calls)
            bf_calls.append(bf.stats.score_calls)
            same += ref.best == bf.best
        ratio = np.mean(np.array(bf_calls) / np.array(ref_calls))
        print(f"{k:>5}{np.mean(ref_calls):>12.1f}{np.mean(bf_calls):>15.1f}{ratio:>8.3f}"
              f"{same:>9}/{args.instances}")


if __name__ == "__main__":
    main()
