"""Independent reference implementations used to check the library.

Everything here is deliberately naive: full recounts instead of
incremental bookkeeping, literal rule-by-rule merge application, and
brute-force n-gram enumeration. Slow, but simple enough to be read as
obviously correct.
"""

from __future__ import annotations

import math
import random
from collections import Counter

MARKER = "</w>"


# -- subword training --------------------------------------------------

def mark(word: str, marker: str = MARKER) -> list[str]:
    return list(word[:-1]) + [word[-1] + marker]


def merge_word(word: list[str], left: str, right: str) -> list[str]:
    """Replace left-to-right non-overlapping (left, right) occurrences."""
    merged: list[str] = []
    i = 0
    while i < len(word):
        if i + 1 < len(word) and word[i] == left and word[i + 1] == right:
            merged.append(left + right)
            i += 2
        else:
            merged.append(word[i])
            i += 1
    return merged


def count_pairs(words: list[list[str]], freqs: list[int]) -> Counter:
    counts: Counter = Counter()
    for word, f in zip(words, freqs):
        for a, b in zip(word, word[1:]):
            counts[(a, b)] += f
    return counts


def word_table(sentences_by_lang: dict[str, list[str]],
               marker: str = MARKER):
    """(words, freqs, langs) with the same deterministic ordering rules the
    library documents: languages sorted, word types sorted within each."""
    words, freqs, langs = [], [], []
    for lang in sorted(sentences_by_lang):
        bag: Counter = Counter()
        for sent in sentences_by_lang[lang]:
            bag.update(sent.split())
        for w in sorted(bag):
            words.append(mark(w, marker))
            freqs.append(bag[w])
            langs.append(lang)
    return words, freqs, langs


def reference_bpe(sentences_by_lang: dict[str, list[str]], budget: int,
                  marker: str = MARKER):
    """Quadratic BPE: full recount each step, highest pooled count wins,
    ties go to the lexicographically smaller pair, stop below count 2.

    budget is the number of new token surfaces allowed (vocab_size minus
    specials minus base alphabet). Returns (merges, final words, the
    pooled count chosen at each step).
    """
    words, freqs, _ = word_table(sentences_by_lang, marker)
    surfaces = {sym for w in words for sym in w}
    merges: list[tuple[str, str]] = []
    chosen_counts: list[int] = []
    new_tokens = 0
    while new_tokens < budget:
        counts = count_pairs(words, freqs)
        best, best_count = None, 0
        for pair, c in counts.items():
            if c < 2:
                continue
            if c > best_count or (c == best_count and pair < best):
                best, best_count = pair, c
        if best is None:
            break
        merges.append(best)
        chosen_counts.append(best_count)
        joined = best[0] + best[1]
        if joined not in surfaces:
            surfaces.add(joined)
            new_tokens += 1
        words = [merge_word(w, *best) for w in words]
    return merges, words, chosen_counts


def power_mean_score(counts_by_lang: dict[str, int],
                     totals_by_lang: dict[str, int], p: float) -> float:
    """The overlap score, written straight from its definition: weighted
    power mean of per-language relative frequencies, weights proportional
    to per-language adjacent-pair totals, zero anywhere -> zero for p<=0."""
    langs = sorted(totals_by_lang)
    grand = sum(totals_by_lang.values())
    rel = {l: counts_by_lang.get(l, 0) / totals_by_lang[l] for l in langs}
    weights = {l: totals_by_lang[l] / grand for l in langs}
    if p == 0:
        if any(rel[l] == 0 for l in langs):
            return 0.0
        return math.exp(sum(weights[l] * math.log(rel[l]) for l in langs))
    if p < 0 and any(rel[l] == 0 for l in langs):
        return 0.0
    acc = sum(weights[l] * rel[l] ** p for l in langs if rel[l] > 0)
    return acc ** (1.0 / p) if acc > 0 else 0.0


def reference_encode(word: str, merges: list[tuple[str, str]],
                     marker: str = MARKER) -> list[str]:
    """Apply every merge rule once, in training order, to one word."""
    symbols = mark(word, marker)
    for left, right in merges:
        symbols = merge_word(symbols, left, right)
    return symbols


def encode_token_count(sentence: str, merges, marker: str = MARKER) -> int:
    return sum(len(reference_encode(w, merges, marker))
               for w in sentence.split())


# -- metrics -----------------------------------------------------------

def ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def char_ngrams(text: str, n: int) -> list[str]:
    squeezed = "".join(text.split())
    return [squeezed[i:i + n] for i in range(len(squeezed) - n + 1)]


def clipped_matches(hyp_grams: list, ref_grams: list) -> int:
    hyp_counts, ref_counts = Counter(hyp_grams), Counter(ref_grams)
    return sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())


def reference_bleu(hyps: list[str], refs: list[str], max_n: int = 4,
                   smoothing: str = "none", eps: float = 0.1) -> float:
    """Corpus BLEU from first principles over whitespace tokens."""
    correct = [0] * max_n
    total = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h, r = hyp.split(), ref.split()
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hg, rg = ngrams(h, n), ngrams(r, n)
            correct[n - 1] += clipped_matches(hg, rg)
            total[n - 1] += len(hg)
    if hyp_len == 0:
        return 0.0
    log_sum, orders = 0.0, 0
    for n in range(max_n):
        if total[n] == 0:
            continue
        orders += 1
        if correct[n] == 0:
            if smoothing == "none":
                return 0.0
            log_sum += math.log(eps / total[n])
        else:
            log_sum += math.log(correct[n] / total[n])
    if orders == 0:
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_sum / orders)


def reference_chrf(hyps: list[str], refs: list[str], char_n: int = 6,
                   word_n: int = 2, beta: float = 2.0) -> float:
    """Segment-level chrF, macro-averaged: per order F_beta, orders with an
    empty reference n-gram set skipped, char orders on whitespace-stripped
    text, word orders on whitespace tokens."""
    beta2 = beta * beta
    seg_scores = []
    for hyp, ref in zip(hyps, refs):
        fs = []
        for n in range(1, char_n + 1):
            hg, rg = char_ngrams(hyp, n), char_ngrams(ref, n)
            if not rg:
                continue
            m = clipped_matches(hg, rg)
            prec = m / len(hg) if hg else 0.0
            rec = m / len(rg)
            fs.append((1 + beta2) * prec * rec / (beta2 * prec + rec)
                      if prec + rec > 0 else 0.0)
        for n in range(1, word_n + 1):
            hg, rg = ngrams(hyp.split(), n), ngrams(ref.split(), n)
            if not rg:
                continue
            m = clipped_matches(hg, rg)
            prec = m / len(hg) if hg else 0.0
            rec = m / len(rg)
            fs.append((1 + beta2) * prec * rec / (beta2 * prec + rec)
                      if prec + rec > 0 else 0.0)
        seg_scores.append(sum(fs) / len(fs) if fs else 0.0)
    return 100.0 * sum(seg_scores) / len(seg_scores)


def random_sentences_by_lang(seed: int, max_sentences: int = 100
                             ) -> dict[str, list[str]]:
    """Small randomized multilingual corpus for trainer-vs-oracle checks."""
    rng = random.Random(seed)
    langs = rng.sample(["eng", "xho", "afr", "zul", "tsn", "nso"],
                       rng.randint(1, 3))
    alphabet = "abcdefgh"[: rng.randint(3, 8)]
    total = rng.randint(3, max_sentences)
    data: dict[str, list[str]] = {}
    for i, lang in enumerate(langs):
        quota = total // len(langs) + (1 if i < total % len(langs) else 0)
        pool = ["".join(rng.choice(alphabet)
                        for _ in range(rng.randint(1, 6)))
                for _ in range(rng.randint(4, 30))]
        data[lang] = [" ".join(rng.choice(pool)
                               for _ in range(rng.randint(1, 12)))
                      for _ in range(max(quota, 1))]
    return data


# -- cipher corpora for lexicon tests ----------------------------------

def make_cipher(vocab: list[str], seed: int) -> dict[str, str]:
    """Deterministic bijective word substitution over *vocab*."""
    rng = random.Random(seed)
    shuffled = list(vocab)
    rng.shuffle(shuffled)
    return {w: f"x{t}" for w, t in zip(vocab, shuffled)}


def cipher_corpus(n_pairs: int, vocab_words: int, seed: int,
                  min_len: int = 4, max_len: int = 8):
    """(src sentences, tgt sentences, cipher map) for EM recovery tests."""
    vocab = [f"w{i:02d}" for i in range(vocab_words)]
    cipher = make_cipher(vocab, seed + 1)
    rng = random.Random(seed)
    srcs, tgts = [], []
    for _ in range(n_pairs):
        length = rng.randint(min_len, max_len)
        words = [vocab[rng.randrange(vocab_words)] for _ in range(length)]
        srcs.append(" ".join(words))
        tgts.append(" ".join(cipher[w] for w in words))
    return srcs, tgts, cipher
