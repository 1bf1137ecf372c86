"""Dictionary segmentation of unspaced Thai text.

Text is cut only at extended grapheme cluster boundaries, so a combining
vowel or tone mark always stays with its base consonant. Among all
segmentations into lexicon words and single-cluster out-of-vocabulary
(OOV) fallbacks, :func:`segment` returns the one with the smallest cost::

    (oov_count, token_count, longer-earlier-tokens tie-break)

Whitespace and punctuation clusters never join a word; they always come out
as single OOV tokens.
"""

from __future__ import annotations

import itertools
import math
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator

import regex

from .corpus_io import Lexicon
from .errors import ValidationError

_CLUSTER = regex.compile(r"\X")

MAX_BRUTEFORCE_CHARS = 20


def grapheme_clusters(text: str) -> list[str]:
    return _CLUSTER.findall(text)


def cluster_boundaries(text: str) -> list[int]:
    """Character offsets of every cluster boundary, including 0 and len(text)."""
    bounds = [0]
    for m in _CLUSTER.finditer(text):
        bounds.append(m.end())
    return bounds


def is_boundary_cluster(cluster: str) -> bool:
    ch = cluster[0]
    return ch.isspace() or unicodedata.category(ch).startswith("P")


class _Node:
    __slots__ = ("children", "terminal", "freq")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.terminal = False
        self.freq = 0


class TrieIndex:
    """Character trie over a lexicon. Read-only once built."""

    def __init__(self, lexicon: Lexicon):
        self.root = _Node()
        self._size = 0
        for word, freq in lexicon.entries.items():
            node = self.root
            for ch in word:
                node = node.children.setdefault(ch, _Node())
            if not node.terminal:
                self._size += 1
            node.terminal = True
            node.freq = freq

    def __len__(self):
        return self._size

    def __contains__(self, word: str) -> bool:
        return self.contains(word)

    def _find(self, word: str) -> _Node | None:
        node = self.root
        for ch in word:
            node = node.children.get(ch)
            if node is None:
                return None
        return node

    def contains(self, word: str) -> bool:
        node = self._find(word)
        return node is not None and node.terminal

    def frequency(self, word: str) -> int:
        node = self._find(word)
        return node.freq if node is not None and node.terminal else 0

    def prefix_ends(self, text: str, start: int) -> Iterator[int]:
        """Yield every end offset ``e`` with ``text[start:e]`` in the lexicon."""
        node = self.root
        for i in range(start, len(text)):
            node = node.children.get(text[i])
            if node is None:
                return
            if node.terminal:
                yield i + 1

    def words(self) -> Iterator[str]:
        stack = [(self.root, "")]
        while stack:
            node, prefix = stack.pop()
            if node.terminal:
                yield prefix
            for ch, child in sorted(node.children.items(), reverse=True):
                stack.append((child, prefix + ch))

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count

    def depth(self) -> int:
        best = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children.values())
        return best


def build_trie(lexicon: Lexicon) -> TrieIndex:
    if len(lexicon) == 0:
        raise ValidationError("cannot index an empty lexicon")
    return TrieIndex(lexicon)


@dataclass(frozen=True)
class Segmentation:
    tokens: tuple[str, ...] = ()
    oov_flags: tuple[bool, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "oov_flags", tuple(bool(f) for f in self.oov_flags))
        if len(self.tokens) != len(self.oov_flags):
            raise ValidationError("tokens and oov_flags differ in length")

    @property
    def text(self) -> str:
        return "".join(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def segmentation_cost(seg: Segmentation) -> tuple:
    """Default cost tuple; smaller is better."""
    return (sum(seg.oov_flags), len(seg.tokens), tuple(-len(t) for t in seg.tokens))


def frequency_cost(seg: Segmentation, freq_of) -> tuple:
    """Cost used by ``mode="frequency"``; ``freq_of`` maps a word to its count."""
    weight = -sum(math.log1p(freq_of(t)) for t, oov in zip(seg.tokens, seg.oov_flags) if not oov)
    return (sum(seg.oov_flags), len(seg.tokens), weight, tuple(-len(t) for t in seg.tokens))


def _candidates(text: str, k: int, bounds: list[int], pos_index: dict[int, int],
                blocked: list[bool], word_ends) -> list[tuple[int, bool]]:
    """(end cluster index, is_oov) options for a token starting at cluster k."""
    start = bounds[k]
    out = []
    if not blocked[k]:
        for e in word_ends(text, start):
            j = pos_index.get(e)
            if j is None:
                continue
            if any(blocked[k:j]):
                break
            out.append((j, False))
    if not any(j == k + 1 for j, _ in out):
        out.append((k + 1, True))
    return out


def segment(text: str, trie: TrieIndex, mode: str = "default") -> Segmentation:
    """Minimum-cost dictionary segmentation by dynamic programming.

    ``mode="frequency"`` inserts a frequency term (maximise the summed
    log-frequency of in-lexicon tokens) ahead of the length tie-break.
    """
    if mode not in ("default", "frequency"):
        raise ValidationError(f"unknown segmentation mode {mode!r}")
    if not text:
        return Segmentation()
    bounds = cluster_boundaries(text)
    m = len(bounds) - 1
    pos_index = {p: i for i, p in enumerate(bounds)}
    blocked = [is_boundary_cluster(text[bounds[i]:bounds[i + 1]]) for i in range(m)]
    freq = mode == "frequency"

    # best[k] = (cost tuple of text[bounds[k]:], first token end index, oov flag)
    best: list = [None] * (m + 1)
    best[m] = ((0, 0, 0.0, ()) if freq else (0, 0, ()), None, False)
    for k in range(m - 1, -1, -1):
        choice = None
        for j, oov in _candidates(text, k, bounds, pos_index, blocked, trie.prefix_ends):
            rest = best[j][0]
            length = bounds[j] - bounds[k]
            if freq:
                w = 0.0 if oov else -math.log1p(trie.frequency(text[bounds[k]:bounds[j]]))
                cost = (rest[0] + oov, rest[1] + 1, rest[2] + w, (-length,) + rest[3])
            else:
                cost = (rest[0] + oov, rest[1] + 1, (-length,) + rest[2])
            if choice is None or cost < choice[0]:
                choice = (cost, j, oov)
        best[k] = choice

    tokens, flags = [], []
    k = 0
    while k < m:
        _, j, oov = best[k]
        tokens.append(text[bounds[k]:bounds[j]])
        flags.append(oov)
        k = j
    return Segmentation(tuple(tokens), tuple(flags))


def segment_bruteforce(text: str, lexicon: Lexicon | Iterable[str]) -> list[Segmentation]:
    """Enumerate every admissible segmentation, sorted by the default cost.

    Exponential; only for texts of at most 20 characters.
    """
    if len(text) > MAX_BRUTEFORCE_CHARS:
        raise ValidationError(f"text longer than {MAX_BRUTEFORCE_CHARS} characters")
    words = set(lexicon)
    clusters = grapheme_clusters(text)
    m = len(clusters)
    results = []
    # every subset of inner cluster boundaries is a candidate cut set
    for cuts in itertools.product((False, True), repeat=max(m - 1, 0)):
        pieces: list[list[str]] = [[clusters[0]]] if m else []
        for i in range(1, m):
            if cuts[i - 1]:
                pieces.append([clusters[i]])
            else:
                pieces[-1].append(clusters[i])
        tokens, flags = [], []
        for piece in pieces:
            tok = "".join(piece)
            if tok in words and not any(is_boundary_cluster(c) for c in piece):
                flags.append(False)
            elif len(piece) == 1:
                flags.append(True)
            else:
                break
            tokens.append(tok)
        else:
            results.append(Segmentation(tuple(tokens), tuple(flags)))
    results.sort(key=segmentation_cost)
    return results
