"""
Aligned bitext corpora and their manifests
==========================================

Every corpus on disk is two aligned text files plus a JSON manifest
holding language codes, provenance, and content checksums. Loading
re-verifies all of it.
"""

import tempfile
from pathlib import Path

from mtkit import (
    BitextCorpus,
    SentencePair,
    corpus_stats,
    load_bitext,
    split_validation,
    write_bitext,
)

workdir = Path(tempfile.mkdtemp(prefix="mtkit-demo-"))

# a tiny English-Zulu-style corpus; pairs are (source, target)
pairs = tuple(
    SentencePair(src, tgt)
    for src, tgt in [
        ("the river is wide", "umfula ubanzi"),
        ("a child sees the moon", "umntwana ubona inyanga"),
        ("we walk to the village", "sihamba edolobheni"),
        ("the moon is bright", "inyanga ikhanya"),
        ("rain falls on the field", "imvula iwela ensimini"),
    ]
)
corpus = BitextCorpus(name="demo-eng-zul", src_lang="eng", tgt_lang="zul",
                      pairs=pairs)

# write: demo-eng-zul.eng, demo-eng-zul.zul, demo-eng-zul.json
manifest = write_bitext(corpus, workdir)
print("manifest:", manifest)
print(manifest.read_text())

# loading verifies checksums, alignment, and language codes
reloaded = load_bitext(manifest)
assert reloaded.pairs == corpus.pairs

# summary numbers for a data table
stats = corpus_stats(reloaded)
print(f"{stats.pair_count} pairs, {stats.src_tokens} source tokens, "
      f"{stats.tgt_tokens} target tokens")

# reserve the first two pairs as a validation split, rest stays training
valid, train = split_validation(reloaded, 2)
print("validation:", [p.src for p in valid.pairs])
print("training:  ", [p.src for p in train.pairs])
