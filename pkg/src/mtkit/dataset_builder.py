"""Direction-tagged training mixtures for multilingual models.

Stage 1 mixes every English-centric corpus in both directions. Stage 2
adds new (non-English) directions and rebalances: each new direction of
size N is matched with its encoder-side old direction X->eng and its
decoder-side old direction eng->Y, both sliced down to min(N, available)
by seeded uniform sampling; old directions no plan entry matches are
capped at a default (the median new-direction size). Exports are
globally shuffled with the mixture seed and byte-stable for a given
seed, with a sidecar manifest recording per-direction example counts.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import BitextCorpus, SentencePair
from .errors import (
    MissingCorpus,
    MissingTagToken,
    NonEnglishCorpus,
    PlanCoverage,
)
from .vocab import Vocabulary


@dataclass(frozen=True)
class DirectionSpec:
    src: str
    tgt: str
    role: str  # "old" (English-centric stage-1) or "new" (added in stage 2)

    def __post_init__(self) -> None:
        if self.role not in ("old", "new"):
            raise ValueError(f"role {self.role!r}")
        if self.src == self.tgt:
            raise ValueError(f"direction {self.src}->{self.tgt}")

    @property
    def label(self) -> str:
        return f"{self.src}-{self.tgt}"

    @property
    def languages(self) -> frozenset[str]:
        return frozenset((self.src, self.tgt))


def parse_direction(label: str, role: str) -> DirectionSpec:
    parts = label.split("-")
    if len(parts) != 2:
        raise ValueError(f"direction label {label!r}, want 'src-tgt'")
    return DirectionSpec(parts[0], parts[1], role)


@dataclass(frozen=True)
class TaggedExample:
    src_tokens: tuple[int, ...]
    tgt_tokens: tuple[int, ...]
    direction: DirectionSpec
    synthetic: bool


def tag_direction(pair: SentencePair, direction: DirectionSpec,
                  vocab: Vocabulary, synthetic: bool = False) -> TaggedExample:
    """Prepend <src:xxx> / <tgt:xxx> tag ids to the encoded sides."""
    src_tag = vocab.token_id(f"<src:{direction.src}>")
    tgt_tag = vocab.token_id(f"<tgt:{direction.tgt}>")
    if src_tag is None:
        raise MissingTagToken(f"vocabulary lacks <src:{direction.src}>")
    if tgt_tag is None:
        raise MissingTagToken(f"vocabulary lacks <tgt:{direction.tgt}>")
    return TaggedExample(
        src_tokens=(src_tag, *vocab.encode(pair.src)),
        tgt_tokens=(tgt_tag, *vocab.encode(pair.tgt)),
        direction=direction,
        synthetic=synthetic,
    )


def downsample(corpus: BitextCorpus, n: int, seed: int) -> BitextCorpus:
    """Uniform sample of n pairs without replacement, original order kept.

    Fully determined by (corpus, n, seed); relative order of survivors is
    the corpus order, so a sample of everything is the identity."""
    if not 0 <= n <= len(corpus):
        raise ValueError(f"cannot sample {n} of {len(corpus)} pairs")
    if n == len(corpus):
        return corpus
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(corpus), size=n, replace=False))
    return BitextCorpus(
        name=f"{corpus.name}-sample{n}",
        src_lang=corpus.src_lang,
        tgt_lang=corpus.tgt_lang,
        pairs=tuple(corpus.pairs[i] for i in keep),
        src_provenance=corpus.src_provenance,
        tgt_provenance=corpus.tgt_provenance,
    )


@dataclass(frozen=True)
class MixtureSlice:
    corpus: BitextCorpus
    direction: DirectionSpec
    indices: tuple[int, ...]

    @property
    def corpus_name(self) -> str:
        return self.corpus.name

    @property
    def count(self) -> int:
        return len(self.indices)

    @property
    def synthetic(self) -> bool:
        return (self.corpus.src_provenance.kind == "synthetic"
                or self.corpus.tgt_provenance.kind == "synthetic")

    def oriented_pairs(self) -> list[SentencePair]:
        """Pairs flipped if the corpus stores the opposite orientation."""
        flip = self.corpus.src_lang != self.direction.src
        if flip and self.corpus.tgt_lang != self.direction.src:
            raise MissingCorpus(
                f"{self.corpus.name} cannot serve {self.direction.label}")
        pairs = [self.corpus.pairs[i] for i in self.indices]
        if flip:
            pairs = [SentencePair(p.tgt, p.src) for p in pairs]
        return pairs


@dataclass(frozen=True)
class TrainingMixture:
    stage: str  # "stage1" | "stage2"
    slices: tuple[MixtureSlice, ...]
    seed: int

    def direction_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.slices:
            counts[s.direction.label] = counts.get(s.direction.label, 0) + s.count
        return counts

    def total(self) -> int:
        return sum(s.count for s in self.slices)


def _slice_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def build_stage1_mixture(corpora: Sequence[BitextCorpus],
                         seed: int = 0) -> TrainingMixture:
    """Both directions of every English-centric corpus, nothing sampled."""
    slices: list[MixtureSlice] = []
    for corpus in corpora:
        if "eng" not in corpus.languages():
            raise NonEnglishCorpus(
                f"{corpus.name} ({corpus.src_lang}-{corpus.tgt_lang}) has no "
                f"English side; stage 1 is English-centric")
        everything = tuple(range(len(corpus)))
        for direction in (DirectionSpec(corpus.src_lang, corpus.tgt_lang, "old"),
                          DirectionSpec(corpus.tgt_lang, corpus.src_lang, "old")):
            slices.append(MixtureSlice(corpus, direction, everything))
    return TrainingMixture("stage1", tuple(slices), seed)


@dataclass(frozen=True)
class PlanEntry:
    new: DirectionSpec
    old: tuple[DirectionSpec, DirectionSpec]
    n: int | None = None


@dataclass(frozen=True)
class BalancePlan:
    entries: tuple[PlanEntry, ...]

    def to_json(self) -> dict:
        return {"entries": [
            {"new": e.new.label, "old": [o.label for o in e.old],
             **({"n": e.n} if e.n is not None else {})}
            for e in self.entries]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "BalancePlan":
        entries = []
        for raw in obj["entries"]:
            old = raw["old"]
            if len(old) != 2:
                raise PlanCoverage(
                    f"entry {raw['new']!r} lists {len(old)} old directions, "
                    f"want exactly 2 (encoder X->eng, decoder eng->Y)")
            entries.append(PlanEntry(
                new=parse_direction(raw["new"], "new"),
                old=(parse_direction(old[0], "old"),
                     parse_direction(old[1], "old")),
                n=raw.get("n"),
            ))
        return cls(tuple(entries))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2) + "\n",
                        encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "BalancePlan":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def make_balance_plan(new_directions: Iterable[str | DirectionSpec]
                      ) -> BalancePlan:
    """Apply the matching rule: new X->Y pairs with X->eng (the encoder
    keeps seeing X input) and eng->Y (the decoder keeps emitting Y)."""
    entries = []
    for d in new_directions:
        spec = parse_direction(d, "new") if isinstance(d, str) else d
        entries.append(PlanEntry(
            new=spec,
            old=(DirectionSpec(spec.src, "eng", "old"),
                 DirectionSpec("eng", spec.tgt, "old")),
        ))
    return BalancePlan(tuple(entries))


def _find_corpus(corpora: Sequence[BitextCorpus], direction: DirectionSpec,
                 kind: str) -> BitextCorpus:
    found = [c for c in corpora if c.languages() == direction.languages]
    if not found:
        raise MissingCorpus(f"no {kind} corpus for {direction.label}")
    if len(found) > 1:
        raise MissingCorpus(
            f"{len(found)} {kind} corpora for {direction.label}; "
            f"concatenate them first")
    return found[0]


def build_stage2_mixture(old: Sequence[BitextCorpus],
                         new: Sequence[BitextCorpus],
                         plan: BalancePlan,
                         seed: int,
                         default_cap: int | None = None) -> TrainingMixture:
    """Balanced stage-2 mixture per the plan. Every new corpus must be
    covered by a plan entry; every matched old direction must have a
    corpus. Sampling is per-slice seeded, so adding or removing one
    entry never reshuffles the others."""
    covered = {e.new.languages for e in plan.entries}
    uncovered = [c.name for c in new if c.languages() not in covered]
    if uncovered:
        raise PlanCoverage(f"plan does not cover new corpora: {uncovered}")

    new_sizes = []
    for entry in plan.entries:
        corpus = _find_corpus(new, entry.new, "new")
        new_sizes.append(entry.n if entry.n is not None else len(corpus))
    cap = default_cap if default_cap is not None else (
        int(statistics.median(new_sizes)) if new_sizes else 0)

    slices: list[MixtureSlice] = []
    matched: set[str] = set()

    def sampled_slice(corpus: BitextCorpus, direction: DirectionSpec,
                      n: int) -> MixtureSlice:
        n = min(n, len(corpus))
        if n == len(corpus):
            indices = tuple(range(len(corpus)))
        else:
            rng = np.random.default_rng(
                _slice_seed(seed, f"stage2:{direction.label}:{corpus.name}"))
            indices = tuple(
                int(i) for i in
                np.sort(rng.choice(len(corpus), size=n, replace=False)))
        return MixtureSlice(corpus, direction, indices)

    for entry, n in zip(plan.entries, new_sizes):
        corpus = _find_corpus(new, entry.new, "new")
        slices.append(sampled_slice(corpus, entry.new, n))
        for old_dir in entry.old:
            old_corpus = _find_corpus(old, old_dir, "old")
            slices.append(sampled_slice(old_corpus, old_dir, n))
            matched.add(old_dir.label)

    leftovers = []
    for corpus in old:
        for direction in (DirectionSpec(corpus.src_lang, corpus.tgt_lang, "old"),
                          DirectionSpec(corpus.tgt_lang, corpus.src_lang, "old")):
            if direction.label not in matched:
                leftovers.append((direction.label, corpus, direction))
    for _, corpus, direction in sorted(leftovers, key=lambda x: x[0]):
        slices.append(sampled_slice(corpus, direction, cap))

    return TrainingMixture("stage2", tuple(slices), seed)


@dataclass(frozen=True)
class ExportResult:
    src_path: Path
    tgt_path: Path
    sidecar_path: Path
    direction_counts: dict[str, int]
    total: int


def export_mixture(mixture: TrainingMixture, vocab: Vocabulary,
                   out_dir: str | Path, threads: int = 1) -> ExportResult:
    """Write the shuffled, tagged mixture as aligned token-surface files.

    Lines are space-joined token surfaces with the direction tag first,
    so `grep -c '^<src:xho>'` style recounts can audit the sidecar. The
    global shuffle is seeded by the mixture seed; output bytes depend
    only on (mixture, vocab), never on thread count.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def render_slice(s: MixtureSlice) -> list[tuple[str, str]]:
        rows = []
        for pair in s.oriented_pairs():
            ex = tag_direction(pair, s.direction, vocab, s.synthetic)
            rows.append((" ".join(vocab.tokens[i] for i in ex.src_tokens),
                         " ".join(vocab.tokens[i] for i in ex.tgt_tokens)))
        return rows

    if threads > 1 and len(mixture.slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rendered = list(pool.map(render_slice, mixture.slices))
    else:
        rendered = [render_slice(s) for s in mixture.slices]
    rows = [row for block in rendered for row in block]

    order = np.random.default_rng(mixture.seed).permutation(len(rows))
    rows = [rows[i] for i in order]

    src_path = out_dir / f"{mixture.stage}.src"
    tgt_path = out_dir / f"{mixture.stage}.tgt"
    src_path.write_text("".join(r[0] + "\n" for r in rows), encoding="utf-8")
    tgt_path.write_text("".join(r[1] + "\n" for r in rows), encoding="utf-8")

    counts = mixture.direction_counts()
    sidecar = {
        "stage": mixture.stage,
        "seed": mixture.seed,
        "total": mixture.total(),
        "src_file": src_path.name,
        "tgt_file": tgt_path.name,
        "directions": {k: counts[k] for k in sorted(counts)},
        "slices": [{
            "corpus": s.corpus_name,
            "direction": s.direction.label,
            "role": s.direction.role,
            "count": s.count,
            "synthetic": s.synthetic,
        } for s in mixture.slices],
    }
    sidecar_path = out_dir / f"{mixture.stage}.mixture.json"
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n",
                            encoding="utf-8")
    return ExportResult(src_path, tgt_path, sidecar_path, counts,
                        mixture.total())
