"""Punctuation normalization and line-oriented UTF-8 file helpers."""

import re


class EncodingError(ValueError):
    """Input bytes are not valid UTF-8."""


# Full-width / typographic punctuation to half-width ASCII. All values are
# ASCII, so applying the table twice is a no-op.
_PUNCT_TABLE = {
    "，": ",",
    "。": ".",
    "．": ".",
    "、": ",",
    "！": "!",
    "？": "?",
    "；": ";",
    "：": ":",
    "（": "(",
    "）": ")",
    "［": "[",
    "］": "]",
    "【": "[",
    "】": "]",
    "｛": "{",
    "｝": "}",
    "「": '"',
    "」": '"',
    "『": '"',
    "』": '"',
    "《": '"',
    "》": '"',
    "〈": '"',
    "〉": '"',
    "“": '"',
    "”": '"',
    "„": '"',
    "‘": "'",
    "’": "'",
    "‚": "'",
    "—": "-",
    "–": "-",
    "―": "-",
    "…": "...",
    "％": "%",
    "＃": "#",
    "＆": "&",
    "＊": "*",
    "＠": "@",
    "／": "/",
    "＼": "\\",
    "｜": "|",
    "＋": "+",
    "－": "-",
    "＝": "=",
    "＜": "<",
    "＞": ">",
    "～": "~",
    "〜": "~",
    "　": " ",
}

_TRANSLATE = str.maketrans(_PUNCT_TABLE)
_SPACES = re.compile(r"\s+")


def normalize_punct(line: str) -> str:
    """Map full-width punctuation to half-width and collapse whitespace.

    Idempotent: every replacement value is plain ASCII that the table
    leaves alone.
    """
    out = line.translate(_TRANSLATE)
    return _SPACES.sub(" ", out).strip()


def read_lines(path):
    """Read a UTF-8 text file as a list of lines without newlines."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [line.rstrip("\n") for line in f]
    except UnicodeDecodeError as e:
        raise EncodingError(f"{path}: invalid UTF-8 ({e})") from e


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line)
            f.write("\n")
