"""Frequency-based truecasing of sentence-initial tokens."""

from collections import Counter


class EmptyCorpusError(ValueError):
    pass


class TruecaseModel:
    """Corpus-wide surface-form counts."""

    def __init__(self, counts):
        self.counts = dict(counts)

    def best_case(self, token: str) -> str:
        """Lowercase the token iff its lowercase form is strictly more
        frequent corpus-wide than the form as written."""
        low = token.lower()
        if low != token and self.counts.get(low, 0) > self.counts.get(token, 0):
            return low
        return token

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for form in sorted(self.counts, key=lambda t: (-self.counts[t], t)):
                f.write(f"{form}\t{self.counts[form]}\n")

    @classmethod
    def load(cls, path):
        counts = {}
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                form, count = line.rstrip("\n").split("\t")
                counts[form] = int(count)
        return cls(counts)


def truecase_learn(lines) -> TruecaseModel:
    """Count token surface forms over tokenized lines."""
    counts = Counter()
    for line in lines:
        counts.update(line.split())
    if not counts:
        raise EmptyCorpusError("cannot learn a truecaser from an empty corpus")
    return TruecaseModel(counts)


def truecase_apply(line: str, model: TruecaseModel) -> str:
    tokens = line.split()
    if not tokens:
        return line
    tokens[0] = model.best_case(tokens[0])
    return " ".join(tokens)


def detruecase(line: str) -> str:
    """Restore the sentence-initial capital."""
    tokens = line.split()
    if not tokens:
        return line
    tokens[0] = tokens[0][:1].upper() + tokens[0][1:]
    return " ".join(tokens)
