from nmtforge.text.normalize import EncodingError, normalize_punct, read_lines, write_lines
from nmtforge.text.truecase import (
    EmptyCorpusError,
    TruecaseModel,
    detruecase,
    truecase_apply,
    truecase_learn,
)
from nmtforge.text.bpe import BpeModel, bpe_apply, bpe_learn, bpe_undo
from nmtforge.text.vocab import Vocabulary
