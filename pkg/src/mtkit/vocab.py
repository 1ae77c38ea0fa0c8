"""Subword vocabularies: BPE and overlap-aware BPE (OBPE) training.

Both trainers run greedy pair merging over whitespace-pretokenized words
with an end-of-word marker appended to each word's final character. BPE
ranks candidate pairs by pooled occurrence count. OBPE ranks them by a
weighted power mean of per-language relative pair frequencies, so a
negative exponent rewards pairs shared across languages and a positive
one rewards raw frequency; exponent 1 reduces exactly to BPE.

Pair counts are maintained incrementally (only words containing the
merged pair are rescanned), which keeps training near-linear instead of
recounting the whole corpus every step.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import DEFAULT_LANGUAGES, BitextCorpus
from .errors import EmptyCorpus, InvalidConfig, UnknownId, VocabSizeTooSmall

END_OF_WORD = "</w>"
UNK = "<unk>"

DEFAULT_HRL = frozenset({"eng", "xho", "tsn", "sna"})
DEFAULT_LRL = frozenset({"afr", "zul", "ssw", "nso", "tso"})


def default_special_tokens(
        languages: Iterable[str] = DEFAULT_LANGUAGES) -> tuple[str, ...]:
    """pad/unk/bos/eos plus one source and one target tag per language."""
    specials = ["<pad>", UNK, "<bos>", "<eos>"]
    for lang in sorted(languages):
        specials.append(f"<src:{lang}>")
        specials.append(f"<tgt:{lang}>")
    return tuple(specials)


@dataclass(frozen=True)
class VocabConfig:
    """Training-time settings, embedded verbatim in saved vocabularies.

    vocab_size is the full token budget: special tokens and the base
    alphabet count against it, not just learned merges.
    """

    vocab_size: int = 40_000
    hrl_langs: frozenset[str] = DEFAULT_HRL
    lrl_langs: frozenset[str] = DEFAULT_LRL
    mean_exponent_p: float = -2.0
    special_tokens: tuple[str, ...] = field(default_factory=default_special_tokens)
    end_of_word_marker: str = END_OF_WORD

    def __post_init__(self) -> None:
        object.__setattr__(self, "hrl_langs", frozenset(self.hrl_langs))
        object.__setattr__(self, "lrl_langs", frozenset(self.lrl_langs))
        object.__setattr__(self, "special_tokens", tuple(self.special_tokens))
        if self.vocab_size < 1:
            raise InvalidConfig(f"vocab_size must be positive, got {self.vocab_size}")
        overlap = self.hrl_langs & self.lrl_langs
        if overlap:
            raise InvalidConfig(f"languages in both hrl and lrl: {sorted(overlap)}")
        if len(set(self.special_tokens)) != len(self.special_tokens):
            raise InvalidConfig("duplicate special tokens")
        if UNK not in self.special_tokens:
            raise InvalidConfig(f"special tokens must include {UNK!r}")
        if not self.end_of_word_marker:
            raise InvalidConfig("end_of_word_marker must be non-empty")

    @property
    def languages(self) -> frozenset[str]:
        return self.hrl_langs | self.lrl_langs

    def to_json(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "hrl_langs": sorted(self.hrl_langs),
            "lrl_langs": sorted(self.lrl_langs),
            "mean_exponent_p": self.mean_exponent_p,
            "special_tokens": list(self.special_tokens),
            "end_of_word_marker": self.end_of_word_marker,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "VocabConfig":
        try:
            return cls(
                vocab_size=obj["vocab_size"],
                hrl_langs=frozenset(obj["hrl_langs"]),
                lrl_langs=frozenset(obj["lrl_langs"]),
                mean_exponent_p=obj["mean_exponent_p"],
                special_tokens=tuple(obj["special_tokens"]),
                end_of_word_marker=obj["end_of_word_marker"],
            )
        except KeyError as exc:
            raise InvalidConfig(f"vocab config missing field {exc}") from exc


def pretokenize(text: str, marker: str = END_OF_WORD) -> list[list[str]]:
    """Split on Unicode whitespace; append *marker* to each word's last char.

    Joining all symbols and turning the marker back into a space restores
    the whitespace-normalized sentence.
    """
    return [list(w[:-1]) + [w[-1] + marker] for w in text.split()]


@dataclass(frozen=True)
class LangCorpusSet:
    """Per-language monolingual token streams, e.g. pooled bitext sides."""

    sentences: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "sentences",
            {lang: tuple(sents) for lang, sents in self.sentences.items()})

    @classmethod
    def from_bitexts(cls, corpora: Iterable[BitextCorpus]) -> "LangCorpusSet":
        acc: dict[str, list[str]] = {}
        for c in corpora:
            acc.setdefault(c.src_lang, []).extend(c.src_sentences)
            acc.setdefault(c.tgt_lang, []).extend(c.tgt_sentences)
        return cls({lang: tuple(v) for lang, v in acc.items()})

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self.sentences))

    def total_sentences(self) -> int:
        return sum(len(v) for v in self.sentences.values())


def _word_frequencies(sentences: Sequence[str], threads: int) -> Counter:
    def count(chunk: Sequence[str]) -> Counter:
        c: Counter = Counter()
        for s in chunk:
            c.update(s.split())
        return c

    if threads <= 1 or len(sentences) < 2 * threads:
        return count(sentences)
    step = (len(sentences) + threads - 1) // threads
    chunks = [sentences[i:i + step] for i in range(0, len(sentences), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(count, chunks))
    total: Counter = Counter()
    for part in parts:  # integer sums: chunk order cannot change the result
        total.update(part)
    return total


class _MergeState:
    """Word types plus incrementally maintained adjacent-pair counts."""

    def __init__(self, data: LangCorpusSet, marker: str, threads: int) -> None:
        self.langs: tuple[str, ...] = data.languages
        n = len(self.langs)
        self.words: list[list[str]] = []
        self.freqs: list[int] = []
        self.word_lang: list[int] = []
        for li, lang in enumerate(self.langs):
            freq = _word_frequencies(data.sentences[lang], threads)
            for w in sorted(freq):
                self.words.append(list(w[:-1]) + [w[-1] + marker])
                self.freqs.append(freq[w])
                self.word_lang.append(li)
        self.pair_pooled: dict[tuple[str, str], int] = {}
        self.pair_bylang: dict[tuple[str, str], list[int]] = {}
        self.pair_words: dict[tuple[str, str], set[int]] = {}
        self.lang_totals: list[int] = [0] * n
        self._support: dict[tuple[str, str], int] = {}
        self.full_support: set[tuple[str, str]] = set()
        for idx in range(len(self.words)):
            self._shift(idx, +1)

    def alphabet(self) -> list[str]:
        return sorted({sym for word in self.words for sym in word})

    def _shift(self, idx: int, sign: int) -> set[tuple[str, str]]:
        """Add (+1) or remove (-1) one word's pair contributions."""
        word = self.words[idx]
        li = self.word_lang[idx]
        f = self.freqs[idx] * sign
        n = len(self.langs)
        touched: set[tuple[str, str]] = set()
        for a, b in zip(word, word[1:]):
            pair = (a, b)
            touched.add(pair)
            pooled = self.pair_pooled.get(pair, 0) + f
            arr = self.pair_bylang.get(pair)
            if arr is None:
                arr = [0] * n
                self.pair_bylang[pair] = arr
                self._support[pair] = 0
                self.pair_words[pair] = set()
            was = arr[li]
            arr[li] = was + f
            if was == 0 and arr[li] > 0:
                self._support[pair] += 1
                if self._support[pair] == n:
                    self.full_support.add(pair)
            elif was > 0 and arr[li] == 0:
                if self._support[pair] == n:
                    self.full_support.discard(pair)
                self._support[pair] -= 1
            if sign > 0:
                self.pair_words[pair].add(idx)
            if pooled:
                self.pair_pooled[pair] = pooled
            else:
                del self.pair_pooled[pair]
                del self.pair_bylang[pair]
                del self._support[pair]
                del self.pair_words[pair]
                self.full_support.discard(pair)
            self.lang_totals[li] += f
        if sign < 0:
            for pair in touched:
                words = self.pair_words.get(pair)
                if words is not None:
                    words.discard(idx)
        return touched

    def apply_merge(self, pair: tuple[str, str]) -> set[tuple[str, str]]:
        """Merge *pair* in every word containing it; returns touched pairs."""
        left, right = pair
        joined = left + right
        touched: set[tuple[str, str]] = set()
        for idx in sorted(self.pair_words.get(pair, ())):
            word = self.words[idx]
            touched |= self._shift(idx, -1)
            merged: list[str] = []
            i = 0
            while i < len(word):
                if i + 1 < len(word) and word[i] == left and word[i + 1] == right:
                    merged.append(joined)
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            self.words[idx] = merged
            touched |= self._shift(idx, +1)
        return touched

    def segmentations(self) -> dict[tuple[str, str], list[str]]:
        """Final (lang, marked word) -> symbols; the trainer's end state."""
        out: dict[tuple[str, str], list[str]] = {}
        for idx, word in enumerate(self.words):
            lang = self.langs[self.word_lang[idx]]
            out[(lang, "".join(word))] = list(word)
        return out


def _obpe_best(state: _MergeState, p: float
               ) -> tuple[tuple[str, str], float] | None:
    """Highest-scoring candidate pair, or None when training must stop.

    Ties prefer the lexicographically smaller pair, matching BPE.
    """
    totals = state.lang_totals
    grand = sum(totals)
    if grand == 0:
        return None
    best_pair: tuple[str, str] | None = None
    best_score = 0.0

    if p == 1:
        # Weighted arithmetic mean of per-language relative counts with
        # pair-total-proportional weights collapses to pooled_count/grand;
        # comparing pooled counts keeps ties exact instead of trusting
        # float summation to preserve them.
        best_count = 0
        for pair, count in state.pair_pooled.items():
            if count < 2:
                continue
            if count > best_count or (count == best_count and
                                      (best_pair is None or pair < best_pair)):
                best_count, best_pair = count, pair
        if best_pair is None:
            return None
        return best_pair, best_count / grand

    weights = [t / grand for t in totals]
    candidates: Iterable[tuple[str, str]] = (
        state.full_support if p < 0 else state.pair_pooled)
    for pair in candidates:
        if state.pair_pooled[pair] < 2:
            continue
        counts = state.pair_bylang[pair]
        if p < 0:
            acc = 0.0
            for li, c in enumerate(counts):
                acc += weights[li] * (c / totals[li]) ** p
            score = acc ** (1.0 / p)
        elif p == 0:
            # geometric mean; zero anywhere sends the whole score to zero
            if any(c == 0 and w > 0 for c, w in zip(counts, weights)):
                continue
            log_acc = 0.0
            for li, c in enumerate(counts):
                if weights[li] > 0:
                    log_acc += weights[li] * math.log(c / totals[li])
            score = math.exp(log_acc)
        else:
            acc = 0.0
            for li, c in enumerate(counts):
                if c:
                    acc += weights[li] * (c / totals[li]) ** p
            score = acc ** (1.0 / p) if acc > 0 else 0.0
        if score <= 0.0:
            continue
        if (score > best_score or
                (score == best_score and (best_pair is None or pair < best_pair))):
            best_score, best_pair = score, pair
    if best_pair is None:
        return None
    return best_pair, best_score


def _train(data: LangCorpusSet, cfg: VocabConfig, mode: str,
           threads: int) -> "Vocabulary":
    if data.total_sentences() == 0:
        raise EmptyCorpus("no training sentences")
    unknown = set(data.languages) - cfg.languages
    if unknown:
        raise InvalidConfig(
            f"languages not covered by hrl/lrl sets: {sorted(unknown)}")

    state = _MergeState(data, cfg.end_of_word_marker, threads)
    tokens: list[str] = list(cfg.special_tokens) + state.alphabet()
    token_set = set(tokens)
    if cfg.vocab_size <= len(tokens):
        raise VocabSizeTooSmall(
            f"vocab_size {cfg.vocab_size} <= {len(cfg.special_tokens)} special "
            f"tokens + {len(tokens) - len(cfg.special_tokens)} base symbols")

    merges: list[tuple[str, str]] = []
    if mode == "bpe":
        heap = [(-c, pair) for pair, c in state.pair_pooled.items() if c >= 2]
        heapq.heapify(heap)
        while len(tokens) < cfg.vocab_size:
            pair = None
            while heap:
                negc, cand = heapq.heappop(heap)
                if state.pair_pooled.get(cand, 0) == -negc:
                    pair = cand
                    break
            if pair is None:
                break
            merges.append(pair)
            joined = pair[0] + pair[1]
            if joined not in token_set:
                tokens.append(joined)
                token_set.add(joined)
            for touched in state.apply_merge(pair):
                count = state.pair_pooled.get(touched, 0)
                if count >= 2:
                    heapq.heappush(heap, (-count, touched))
    else:
        while len(tokens) < cfg.vocab_size:
            best = _obpe_best(state, cfg.mean_exponent_p)
            if best is None:
                break
            pair, _ = best
            merges.append(pair)
            joined = pair[0] + pair[1]
            if joined not in token_set:
                tokens.append(joined)
                token_set.add(joined)
            state.apply_merge(pair)

    vocab = Vocabulary(mode=mode, tokens=tuple(tokens),
                       merges=tuple(merges), config=cfg)
    object.__setattr__(vocab, "_final_segmentations", state.segmentations())
    return vocab


def train_bpe(data: LangCorpusSet, config: VocabConfig | None = None,
              threads: int = 1) -> "Vocabulary":
    """Greedy merges on pooled pair counts until the budget is spent or no
    pair occurs at least twice. Equal counts merge the lexicographically
    smaller pair first, making the merge list deterministic."""
    return _train(data, config or VocabConfig(), "bpe", threads)


def train_obpe(data: LangCorpusSet, config: VocabConfig | None = None,
               threads: int = 1) -> "Vocabulary":
    """Greedy merges ranked by the overlap score: a weighted power mean
    (exponent config.mean_exponent_p, weights proportional to each
    language's current adjacent-pair total) of per-language relative pair
    frequencies. Negative exponents score any pair absent from some
    language as zero; training stops when every candidate scores zero."""
    return _train(data, config or VocabConfig(), "obpe", threads)


@dataclass(frozen=True, eq=True)
class Vocabulary:
    """Immutable token table plus ordered merge rules.

    Token ids are contiguous positions in *tokens*: special tokens first,
    then the sorted base alphabet, then merge outputs in learned order.
    """

    mode: str
    tokens: tuple[str, ...]
    merges: tuple[tuple[str, str], ...]
    config: VocabConfig

    def __post_init__(self) -> None:
        if self.mode not in ("bpe", "obpe"):
            raise InvalidConfig(f"mode {self.mode!r}")
        if len(set(self.tokens)) != len(self.tokens):
            raise InvalidConfig("duplicate token surfaces")
        if len(self.tokens) > self.config.vocab_size:
            raise InvalidConfig("token table exceeds configured vocab_size")
        if self.tokens[:len(self.config.special_tokens)] != self.config.special_tokens:
            raise InvalidConfig("special tokens must occupy the first ids")
        object.__setattr__(self, "_ids",
                           {tok: i for i, tok in enumerate(self.tokens)})
        object.__setattr__(self, "_ranks",
                           {pair: i for i, pair in enumerate(self.merges)})
        object.__setattr__(self, "_cache", {})
        object.__setattr__(self, "_final_segmentations", None)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def n_special(self) -> int:
        return len(self.config.special_tokens)

    @property
    def unk_id(self) -> int:
        return self._ids[UNK]

    def token_id(self, surface: str) -> int | None:
        return self._ids.get(surface)

    def _encode_word(self, word: str) -> tuple[int, ...]:
        marker = self.config.end_of_word_marker
        symbols = list(word[:-1]) + [word[-1] + marker]
        ranks = self._ranks
        while len(symbols) > 1:
            best_rank = None
            best_at = -1
            for i in range(len(symbols) - 1):
                rank = ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_at = rank, i
            if best_rank is None:
                break
            left, right = self.merges[best_rank]
            joined = left + right
            merged: list[str] = []
            i = 0
            while i < len(symbols):
                if (i + 1 < len(symbols) and symbols[i] == left
                        and symbols[i + 1] == right):
                    merged.append(joined)
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        unk = self.unk_id
        return tuple(self._ids.get(s, unk) for s in symbols)

    def encode(self, text: str) -> list[int]:
        """Token ids for *text*; unknown characters become unk. Applies
        merges in training order within each whitespace-separated word."""
        ids: list[int] = []
        cache = self._cache
        for word in text.split():
            got = cache.get(word)
            if got is None:
                got = self._encode_word(word)
                cache[word] = got
            ids.extend(got)
        return ids

    def decode(self, ids: Sequence[int]) -> str:
        """Inverse of encode up to whitespace normalization (and exactly
        inverse when no unk is involved)."""
        parts: list[str] = []
        n = len(self.tokens)
        for i in ids:
            if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < n:
                raise UnknownId(f"token id {i!r} outside [0, {n})")
            surface = self.tokens[i]
            parts.append(surface + " " if i < self.n_special else surface)
        text = "".join(parts).replace(self.config.end_of_word_marker, " ")
        return " ".join(text.split())

    def segment(self, text: str) -> list[str]:
        """Token surfaces rather than ids; convenience for inspection."""
        return [self.tokens[i] for i in self.encode(text)]

    @property
    def trainer_segmentations(self) -> dict[tuple[str, str], list[str]] | None:
        """Final (lang, marked word) -> symbols state of the training run
        that produced this vocabulary; None for loaded vocabularies.
        encode() must reproduce these segmentations exactly."""
        return self._final_segmentations

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "mode": self.mode,
            "config": self.config.to_json(),
            "tokens": list(self.tokens),
            "merges": [list(m) for m in self.merges],
        }
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n",
                        encoding="utf-8")
        return path


def _is_base_symbol(token: str, marker: str) -> bool:
    if token.endswith(marker):
        return len(token) - len(marker) == 1
    return len(token) == 1


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Load a saved vocabulary, re-validating structural invariants:
    contiguous ids, specials first, and every token reachable as a
    special, a base symbol, or the output of a listed merge."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot parse vocabulary {path}: {exc}") from exc
    try:
        cfg = VocabConfig.from_json(payload["config"])
        mode = payload["mode"]
        tokens = tuple(payload["tokens"])
        merges = tuple((m[0], m[1]) for m in payload["merges"])
    except (KeyError, IndexError, TypeError) as exc:
        raise InvalidConfig(f"malformed vocabulary {path}: {exc}") from exc

    marker = cfg.end_of_word_marker
    token_set = set(tokens)
    available = {t for t in tokens if _is_base_symbol(t, marker)}
    produced: set[str] = set()
    for left, right in merges:
        if left not in available or right not in available:
            raise InvalidConfig(
                f"merge ({left!r}, {right!r}) uses a token that is neither a "
                f"base symbol nor an earlier merge output")
        joined = left + right
        if joined not in token_set:
            raise InvalidConfig(f"merge output {joined!r} missing from tokens")
        produced.add(joined)
        available.add(joined)
    specials = set(cfg.special_tokens)
    for tok in tokens:
        if tok in specials or tok in produced or _is_base_symbol(tok, marker):
            continue
        raise InvalidConfig(f"unreachable token {tok!r}")
    return Vocabulary(mode=mode, tokens=tokens, merges=merges, config=cfg)
