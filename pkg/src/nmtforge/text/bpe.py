"""Byte-pair encoding over whitespace-tokenized text.

Words are split into characters and the most frequent adjacent symbol
pair is merged greedily, ties broken by lexicographic pair order. At
apply time every non-final subword of a word carries the ``@@``
continuation marker, so ``bpe_undo`` is a plain marker join.
"""

from collections import Counter

SEPARATOR = "@@"


class BpeModel:
    def __init__(self, merges):
        self.merges = list(merges)
        self._cache = {}

    @property
    def merge_count(self):
        return len(self.merges)

    def segment_word(self, word):
        """Split one word into subword symbols (no separator markers)."""
        hit = self._cache.get(word)
        if hit is not None:
            return hit
        symbols = list(word)
        for left, right in self.merges:
            if len(symbols) < 2:
                break
            merged = []
            i = 0
            n = len(symbols)
            while i < n:
                if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
                    merged.append(left + right)
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        self._cache[word] = symbols
        return symbols

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for left, right in self.merges:
                f.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path):
        merges = []
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                left, right = line.split(" ")
                merges.append((left, right))
        return cls(merges)


def _pair_counts(words):
    counts = Counter()
    for symbols, freq in words:
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] += freq
    return counts


def bpe_learn(lines, merges: int) -> BpeModel:
    """Learn up to ``merges`` greedy most-frequent-pair merges."""
    if merges < 0:
        raise ValueError("merges must be >= 0")
    freqs = Counter()
    for line in lines:
        freqs.update(line.split())
    words = [(list(word), freq) for word, freq in sorted(freqs.items())]

    learned = []
    for _ in range(merges):
        counts = _pair_counts(words)
        if not counts:
            break
        # Most frequent pair; ties go to the lexicographically smallest.
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        learned.append(best)
        left, right = best
        for entry in words:
            symbols = entry[0]
            i = 0
            while i < len(symbols) - 1:
                if symbols[i] == left and symbols[i + 1] == right:
                    symbols[i : i + 2] = [left + right]
                else:
                    i += 1
    return BpeModel(learned)


def bpe_apply(line: str, model: BpeModel):
    """Segment a line into subword tokens with continuation markers."""
    out = []
    for word in line.split():
        symbols = model.segment_word(word)
        out.extend(s + SEPARATOR for s in symbols[:-1])
        if symbols:
            out.append(symbols[-1])
    return out


def bpe_undo(tokens) -> str:
    """Invert bpe_apply. Exact whenever the input text itself does not
    contain the separator marker."""
    if isinstance(tokens, str):
        joined = tokens
    else:
        joined = " ".join(tokens)
    return joined.replace(SEPARATOR + " ", "")
