"""Cocktail mixing of KB and SOLVE corpora, then a seeded 90/10 split."""

from collections import Counter

from neuroprolog.dataset import (KB_INSTRUCTION, SOLVE_INSTRUCTION, CorpusEntry, MixSpec, Task,
                                 corpus_stats, mix_cocktail, split_train_val)

kb = [CorpusEntry(Task.KB, KB_INSTRUCTION, f"concept {i}",
                  f":- use_module(library(clpq)).\nsolve(Result) :- Result = ok.\n% concept {i}\n")
      for i in range(200)]
solve = [CorpusEntry(Task.SOLVE, SOLVE_INSTRUCTION, f"problem {i}",
                     f"solve(Result) :- Result is {i} * 2.\n") for i in range(310)]

mixed, manifest = mix_cocktail(kb, solve, MixSpec.natural(len(kb), len(solve), seed=0))
print(len(mixed), "records,", len(set(mixed)), "distinct")
print(manifest["counts"])

train, val = split_train_val(mixed, 0.9, seed=0)
print(len(train), "train /", len(val), "val")

# a KB-heavy mix reuses KB entries only after every one has been drawn once
heavy, _ = mix_cocktail(kb, solve, MixSpec(0.7, 0.3, seed=1), total=600)
uses = Counter(e for e in heavy if e.task is Task.KB)
print("KB draws:", sum(uses.values()), "max reuse:", max(uses.values()))

print(corpus_stats(mixed))
