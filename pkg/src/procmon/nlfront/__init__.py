"""Instruction sentences in, grounded temporal formulas out."""

from .alphabet import (
    Landmark,
    LandmarkError,
    SymbolAlphabet,
    build_alphabet,
    parse_landmarks,
)
from .dataset import (
    SURFACE_TEMPLATES,
    ClassAccuracy,
    DatasetPair,
    ExtractionReport,
    dataset_tsv,
    evaluate_extraction,
    evaluate_profiles,
    format_extraction_table,
    generate_dataset,
)
from .patterns import NAV_FAMILY, PATTERNS, PatternSpec, instantiate
from .pipeline import (
    PROFILE_NAMES,
    Grounding,
    PipelineConfig,
    PlaceholderAssignment,
    ReferringExpression,
    RerProfile,
    SymbolicTranslation,
    TranslationError,
    TranslationResult,
    UnresolvedSymbolError,
    assign_placeholders,
    fixture_text,
    ground_symbols,
    load_landmarks,
    load_profile,
    oracle_rer_table,
    parse_rer_profile,
    profile_symbol_coverage,
    recognize_referring_expressions,
    symbolic_translate,
    symbolize,
    translate_sentence,
)

__all__ = [
    "ClassAccuracy", "DatasetPair", "ExtractionReport", "Grounding", "Landmark",
    "LandmarkError", "NAV_FAMILY", "PATTERNS", "PROFILE_NAMES", "PatternSpec",
    "PipelineConfig", "PlaceholderAssignment", "ReferringExpression",
    "RerProfile", "SURFACE_TEMPLATES", "SymbolAlphabet", "SymbolicTranslation",
    "TranslationError", "TranslationResult", "UnresolvedSymbolError",
    "assign_placeholders", "build_alphabet", "dataset_tsv",
    "evaluate_extraction", "evaluate_profiles", "fixture_text",
    "format_extraction_table", "generate_dataset", "ground_symbols",
    "instantiate", "load_landmarks", "load_profile", "oracle_rer_table",
    "parse_landmarks",
    "parse_rer_profile", "profile_symbol_coverage",
    "recognize_referring_expressions", "symbolic_translate", "symbolize",
    "translate_sentence",
]
