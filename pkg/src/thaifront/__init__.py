"""Thai text-to-speech front-end: pauses, segmentation, tone-aware G2P,
phoneme-tone encoding, acoustic features, prosody predictors and metrics."""

__version__ = "0.1.0"

from .corpus_io import (
    Lexicon,
    PauseAnnotatedSentence,
    PhonemeToneEntry,
    PhonemeToneSequence,
    Syllable,
    Tone,
    Utterance,
)
from .encoding import EncodedSequence, PhonemeVocab, build_vocab, decode, encode
from .errors import ParseError, ThaiFrontError, UnresolvableWordError, ValidationError
from .pauses import PauseModel, predict_pauses, train_pause_model
from .phonology import determine_tone, g2p, parse_syllables
from .pipeline import PipelineConfig, run_pipeline, validate_config
from .segmentation import Segmentation, TrieIndex, build_trie, segment, segment_bruteforce
