"""
BPE versus overlap-aware BPE
============================

Plain BPE ranks merge candidates by pooled frequency, so the biggest
language dominates the vocabulary. The overlap-aware variant scores
each candidate with a weighted power mean of per-language relative
frequencies; a negative exponent favors pairs that every language
actually uses.
"""

from mtkit import LangCorpusSet, VocabConfig, train_bpe, train_obpe
from mtkit.vocab_metrics import representation_change

# one high-resource language where "xy" dominates, one low-resource
# language that never contains it; "ab" appears in both
hrl = ["xy xy xy ab cd ef gh ij kl mn"] * 4
lrl = ["ab op qr st uv wz ce df gi hj"]
data = LangCorpusSet({"eng": tuple(hrl), "zul": tuple(lrl)})

config = VocabConfig(vocab_size=80, mean_exponent_p=-2.0)

bpe = train_bpe(data, config)
obpe = train_obpe(data, config)

# BPE merges the HRL-only pair first; OBPE refuses it outright while it
# has zero support in the LRL
print("first BPE merges: ", bpe.merges[:3])
print("first OBPE merges:", obpe.merges[:3])

# the report quantifies what that does to each language's token counts:
# negative change_% means the second vocabulary spends fewer tokens
report = representation_change(data, bpe, obpe)
print()
print(report.render_table())

# both vocabularies encode and decode losslessly
sentence = "ab xy cd"
print()
print("BPE segmentation: ", bpe.segment(sentence))
print("OBPE segmentation:", obpe.segment(sentence))
assert bpe.decode(bpe.encode(sentence)) == sentence
assert obpe.decode(obpe.encode(sentence)) == sentence
