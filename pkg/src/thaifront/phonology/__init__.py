"""Thai syllable structure, tone rules and grapheme-to-phoneme conversion."""

from ..corpus_io import PhonemeToneSequence, Syllable, Tone
from .g2p import (
    annotation_fallback,
    check_inventory,
    consonant_class,
    determine_tone,
    exception_dict,
    g2p,
    phoneme_error_rate,
    rule_g2p,
)
from .syllables import SyllableParseError, SyllableStructure, parse_syllables
from .tables import (
    ConsonantClass,
    Liveness,
    ToneMark,
    ToneRules,
    VowelLength,
    all_tone_keys,
    default_tone_rules,
    ipa_inventory,
    load_tone_rules,
    parse_tone_rules,
    render_tone_rules,
    save_tone_rules,
)
