"""Frontend tests: patterns, landmarks, the three pipeline phases, dataset."""

import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procmon.llmclient import BackendConfig, split_sections
from procmon.ltlf import atoms, parse, pretty
from procmon.ltlf.semantics import evaluate, trace
from procmon.nlfront import (
    NAV_FAMILY,
    PATTERNS,
    PROFILE_NAMES,
    LandmarkError,
    PipelineConfig,
    TranslationError,
    UnresolvedSymbolError,
    assign_placeholders,
    build_alphabet,
    dataset_tsv,
    evaluate_extraction,
    evaluate_profiles,
    fixture_text,
    format_extraction_table,
    generate_dataset,
    ground_symbols,
    instantiate,
    load_landmarks,
    load_profile,
    parse_landmarks,
    parse_rer_profile,
    profile_symbol_coverage,
    recognize_referring_expressions,
    symbolic_translate,
    symbolize,
    translate_sentence,
)

PAPER_SENTENCE = (
    "You cannot call the support robot without visiting line 1 right before, "
    "and you cannot visit line 1 without calling the support robot right after that"
)
PAPER_SPANS = ("call the support robot", "line 1", "calling the support robot")


def oracle_backend(**overrides):
    return BackendConfig(kind="mock-oracle", **overrides)


# -- pattern catalog -----------------------------------------------------------


class TestPatterns:
    def test_eleven_patterns_with_expected_arities(self):
        assert len(PATTERNS) == 11
        arities = {name: spec.arity for name, spec in PATTERNS.items()}
        assert arities["visit"] == 1
        assert arities["global_avoidance"] == 1
        assert all(a == 2 for n, a in arities.items()
                   if n not in ("visit", "global_avoidance"))

    def test_nav_family_is_the_visit_group(self):
        assert set(NAV_FAMILY) == {
            "visit", "sequenced_visit", "ordered_visit", "strict_ordered_visit"
        }

    def test_characteristic_traces(self):
        # Hand-enumerated accept/reject traces are the authority for each
        # template; every entry must agree with the trace semantics.
        table = json.loads(fixture_text("pattern-traces.json"))
        assert set(table) == set(PATTERNS)
        for name, entry in table.items():
            symbols = tuple(entry["symbols"])
            formula = instantiate(name, symbols)
            for steps in entry["positive"]:
                t = trace(*[frozenset(s) for s in steps], alphabet=symbols)
                assert evaluate(formula, t), (name, steps)
            for steps in entry["negative"]:
                t = trace(*[frozenset(s) for s in steps], alphabet=symbols)
                assert not evaluate(formula, t), (name, steps)

    def test_every_pattern_has_positive_and_negative_traces(self):
        table = json.loads(fixture_text("pattern-traces.json"))
        for entry in table.values():
            assert entry["positive"] and entry["negative"]

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError, match="takes 2 symbols"):
            instantiate("wait", ("a",))

    def test_unknown_pattern_rejected(self):
        with pytest.raises(KeyError):
            instantiate("zigzag", ("a",))


# -- landmarks and alphabet ----------------------------------------------------


class TestLandmarks:
    def test_fixture_has_23_symbols_in_known_classes(self):
        alphabet = build_alphabet(load_landmarks())
        assert len(alphabet.symbols) == 23
        assert len(alphabet.locations) == 4
        assert len(alphabet.conditions) == 13
        assert len(alphabet.actions) == 6

    def test_location_names_read_off_bindings(self):
        alphabet = build_alphabet(load_landmarks())
        assert set(alphabet.location_names) == {"l0", "l1", "l2", "l3"}

    def test_surface_texts_include_plain_identifier(self):
        alphabet = build_alphabet(load_landmarks())
        lm = alphabet.landmark("call_support")
        assert "call support" in lm.surface_texts
        assert "call the support robot" in lm.aliases

    def test_parse_roundtrip_fields(self):
        text = (
            "identifier: box_full\n"
            "description: the box is full\n"
            "aliases: a full box | the box is full\n"
            "binds: (box-full)\n"
        )
        (lm,) = parse_landmarks(text)
        assert lm.aliases == ("a full box", "the box is full")
        assert lm.binds == "(box-full)"

    def test_duplicate_identifier_rejected(self):
        record = "identifier: x\ndescription: d\n"
        with pytest.raises(LandmarkError, match="duplicate"):
            parse_landmarks(record + "\n" + record)

    def test_malformed_line_rejected(self):
        with pytest.raises(LandmarkError, match="malformed"):
            parse_landmarks("identifier box_full\n")


class TestProfiles:
    def test_counts_and_symbol_coverage(self):
        landmarks = load_landmarks()
        expected = {
            "vanilla-16": (16, 4),
            "augmented-34-11sym": (34, 11),
            "augmented-34-18sym": (34, 18),
        }
        for name, (n_examples, n_covered) in expected.items():
            profile = load_profile(name)
            assert len(profile.examples) == n_examples, name
            covered = profile_symbol_coverage(profile, landmarks)
            assert len(covered) == n_covered, name

    def test_vanilla_covers_only_locations(self):
        landmarks = load_landmarks()
        alphabet = build_alphabet(landmarks)
        covered = profile_symbol_coverage(load_profile("vanilla-16"), landmarks)
        assert covered == frozenset(alphabet.locations)

    def test_unknown_profile_rejected(self):
        with pytest.raises(ValueError, match="unknown profile"):
            load_profile("vanilla-99")

    def test_profile_without_tab_rejected(self):
        with pytest.raises(ValueError, match="missing tab"):
            parse_rer_profile("profile: p\nvisit line 1 line 1\n")


# -- phase 1: referring expressions --------------------------------------------


class TestRecognize:
    def test_paper_sentence_spans(self):
        backend = oracle_backend(rer_table={PAPER_SENTENCE: PAPER_SPANS})
        found = recognize_referring_expressions(
            PAPER_SENTENCE, "augmented-34-18sym", backend
        )
        assert tuple(e.text for e in found) == PAPER_SPANS
        for e in found:
            assert PAPER_SENTENCE[e.offset:e.offset + len(e.text)].lower() == e.text.lower()

    def test_single_referent_sentence(self):
        backend = oracle_backend(rer_table={"Visit line 1": ("line 1",)})
        (expr,) = recognize_referring_expressions(
            "Visit line 1", "vanilla-16", backend
        )
        assert expr.text == "line 1"
        assert expr.offset == 6

    def test_oracle_fixture_roundtrip(self):
        # 20 hand-labeled sentences pinned as the RER ground truth.
        table = json.loads(fixture_text("rer-oracle.json"))
        assert len(table) == 21
        backend = oracle_backend(
            rer_table={s: tuple(spans) for s, spans in table.items()}
        )
        for sentence, spans in table.items():
            found = recognize_referring_expressions(
                sentence, "augmented-34-18sym", backend
            )
            assert tuple(e.text for e in found) == tuple(spans), sentence

    def test_duplicate_and_nonverbatim_spans_filtered(self):
        spans = ("line 1", "Line 1", "warp drive")
        backend = oracle_backend(rer_table={"visit line 1": spans})
        found = recognize_referring_expressions("visit line 1", "vanilla-16", backend)
        assert tuple(e.text for e in found) == ("line 1",)

    def test_no_spans_found_is_an_error(self):
        backend = oracle_backend(rer_table={"do something": ("nonsense",)})
        with pytest.raises(TranslationError, match="no referring expressions"):
            recognize_referring_expressions("do something", "vanilla-16", backend)

    def test_prompt_carries_profile_examples(self, monkeypatch):
        import procmon.nlfront.pipeline as pipeline_module

        captured = {}

        def fake_chat(request, config):
            captured["user"] = request.user
            from procmon.llmclient import ChatResponse
            return ChatResponse(text="line 1")

        monkeypatch.setattr(pipeline_module, "chat", fake_chat)
        recognize_referring_expressions("visit line 1", "vanilla-16", oracle_backend())
        sections = split_sections(captured["user"])
        assert "find referring expressions" in sections
        assert "visit line 1 before line 2 -> line 1; line 2" in sections["examples"]
        assert sections["sentence"].strip() == "visit line 1"


# -- phase 2: symbolic translation ---------------------------------------------


class TestSymbolicTranslate:
    def test_paper_example(self):
        result = symbolic_translate(PAPER_SENTENCE, PAPER_SPANS)
        assert result.pattern == "bound_delay"
        assert result.formula == parse("G (b <-> X a)")
        by_symbol = {a.symbol: a.expressions for a in result.assignments}
        assert by_symbol == {
            "a": ("call the support robot", "calling the support robot"),
            "b": ("line 1",),
        }

    def test_presymbolized_variant(self):
        sentence = (
            "You cannot b without a right before; "
            "and you cannot a without b right after"
        )
        result = symbolic_translate(sentence, ("a", "b"))
        assert result.formula == parse("G (b <-> X a)")

    def test_visit_template(self):
        result = symbolic_translate("visit a", ("a",))
        assert result.formula == parse("F a")
        assert result.pattern == "visit"

    def test_avoidance_template(self):
        result = symbolic_translate("never a", ("a",))
        assert result.formula == parse("G !a")

    def test_inflection_variants_share_a_placeholder(self):
        sentence = "avoid harvesting the grapes until you can harvest the grapes"
        result = symbolic_translate(
            sentence, ("harvesting the grapes", "harvest the grapes")
        )
        assert len(result.assignments) == 1
        assert result.assignments[0].symbol == "a"

    def test_distinct_concepts_get_distinct_letters(self):
        sentence = "visit line 1 before line 2"
        result = symbolic_translate(sentence, ("line 1", "line 2"))
        symbols = [a.symbol for a in result.assignments]
        assert symbols == ["a", "b"]
        assert result.formula == parse("(!b U a) & F b")

    def test_symbolize_replaces_whole_tokens_only(self):
        assignments = assign_placeholders("visit line 1 not line 10", ("line 1",))
        assert symbolize("visit line 1 not line 10", assignments) == "visit a not line 10"

    def test_expression_missing_from_sentence_rejected(self):
        with pytest.raises(TranslationError, match="does not occur"):
            symbolic_translate("visit line 1", ("line 9",))

    def test_unmatched_sentence_without_backend_rejected(self):
        with pytest.raises(TranslationError, match="no pattern matched"):
            symbolic_translate("ponder a quietly", ("a",))

    def test_backend_fallback_parses_scripted_formula(self):
        sentence = "alternate a and b forever"
        backend = BackendConfig(
            kind="mock-scripted", script={sentence: "G (a -> X b)"}
        )
        result = symbolic_translate(sentence, ("a", "b"), backend=backend)
        assert result.pattern is None
        assert result.formula == parse("G (a -> X b)")

    def test_backend_formula_with_unknown_atoms_rejected(self):
        sentence = "alternate a and b forever"
        backend = BackendConfig(kind="mock-scripted", script={sentence: "F zz"})
        with pytest.raises(TranslationError, match="unknown symbols"):
            symbolic_translate(sentence, ("a", "b"), backend=backend)

    def test_backend_gibberish_rejected(self):
        sentence = "alternate a and b forever"
        backend = BackendConfig(kind="mock-scripted", script={sentence: "???"})
        with pytest.raises(TranslationError, match="unparsable"):
            symbolic_translate(sentence, ("a", "b"), backend=backend)

    @given(st.permutations(["line 1", "line 2", "the far end", "a full box"]))
    @settings(max_examples=25, deadline=None)
    def test_assignment_injective_and_occurrence_ordered(self, phrases):
        sentence = "consider " + ", then ".join(phrases)
        assignments = assign_placeholders(sentence, tuple(phrases))
        letters = [a.symbol for a in assignments]
        assert letters == ["a", "b", "c", "d"]
        reps = [a.representative for a in assignments]
        assert reps == list(phrases)


# -- phase 3: grounding ----------------------------------------------------------


class TestGroundSymbols:
    def test_paper_example(self):
        grounding = ground_symbols(
            parse("G (b <-> X a)"),
            ("call the support robot", "line 1"),
            load_landmarks(),
        )
        assert grounding.formula == parse("G (robot_at_loc_l1 <-> X call_support)")
        assert grounding.bindings == {"a": "call_support", "b": "robot_at_loc_l1"}

    def test_zero_placeholders_returned_unchanged(self):
        formula = parse("F robot_at_loc_l1")
        grounding = ground_symbols(formula, (), load_landmarks())
        assert grounding.formula == formula
        assert grounding.bindings == {}

    def test_harvest_phrase_grounds_to_the_action(self):
        grounding = ground_symbols(
            parse("F a"), ("harvest the grapes",), load_landmarks()
        )
        assert grounding.bindings == {"a": "harvest"}

    def test_hand_checked_grounding_table(self):
        expected = {
            "line 1": "robot_at_loc_l1",
            "the loading area": "robot_at_loc_l0",
            "the far end": "robot_at_loc_l3",
            "a full box": "box_full",
            "the box is empty": "box_empty",
            "bunch one is ripe": "ripe_g1",
            "unripe grapes on bunch two": "unripe_g2",
            "support summoned": "support_called",
            "inspect a bunch": "check_grape",
            "waiting": "wait",
        }
        landmarks = load_landmarks()
        for phrase, identifier in expected.items():
            grounding = ground_symbols(parse("F a"), (phrase,), landmarks)
            assert grounding.bindings["a"] == identifier, phrase

    def test_floor_above_one_rejects_everything(self):
        with pytest.raises(UnresolvedSymbolError) as err:
            ground_symbols(parse("F a"), ("line 1",), load_landmarks(), floor=1.01)
        assert err.value.candidates
        assert err.value.candidates[0][0] == "robot_at_loc_l1"

    def test_expression_count_mismatch_rejected(self):
        with pytest.raises(TranslationError, match="placeholders but"):
            ground_symbols(parse("F a"), ("line 1", "line 2"), load_landmarks())

    def test_grounding_is_deterministic(self):
        args = (parse("F (a & F b)"), ("line 1", "line 2"), load_landmarks())
        assert ground_symbols(*args) == ground_symbols(*args)


# -- full pipeline -----------------------------------------------------------------


class TestTranslateSentence:
    def test_paper_sentence_end_to_end(self):
        config = PipelineConfig(
            backend=oracle_backend(rer_table={PAPER_SENTENCE: PAPER_SPANS}),
        )
        result = translate_sentence(PAPER_SENTENCE, config)
        assert result.formula == parse("G (robot_at_loc_l1 <-> X call_support)")
        assert result.symbolic.pattern == "bound_delay"

    def test_visit_sentence_end_to_end(self):
        config = PipelineConfig(
            backend=oracle_backend(rer_table={"visit line 1": ("line 1",)}),
        )
        result = translate_sentence("visit line 1", config)
        assert result.formula == parse("F robot_at_loc_l1")


# -- dataset and accuracy harness ----------------------------------------------------


def vineyard_alphabet():
    return build_alphabet(load_landmarks())


def small_dataset(seed=7):
    return generate_dataset(
        vineyard_alphabet(), n_per_pattern=3, generic_per_pattern=2, seed=seed
    )


class TestGenerateDataset:
    def test_default_sizes(self):
        pairs = generate_dataset(vineyard_alphabet())
        assert len(pairs) >= 500
        by_class = {"navigation": 0, "generic": 0}
        for p in pairs:
            by_class[p.task_class] += 1
        assert by_class["navigation"] == 200
        assert by_class["generic"] == 301
        assert {p.pattern for p in pairs} == set(PATTERNS)

    def test_deterministic_under_seed(self):
        a = generate_dataset(vineyard_alphabet(), seed=3)
        b = generate_dataset(vineyard_alphabet(), seed=3)
        assert a == b
        assert a != generate_dataset(vineyard_alphabet(), seed=4)

    def test_every_sentence_engine_translates_to_its_pattern(self):
        for pair in generate_dataset(vineyard_alphabet(), seed=11):
            result = symbolic_translate(pair.sentence, pair.expressions)
            assert result.pattern == pair.pattern, pair.sentence

    def test_formulas_use_landmark_identifiers(self):
        alphabet = vineyard_alphabet()
        for pair in small_dataset():
            assert atoms(pair.formula) <= set(alphabet.symbols)

    def test_navigation_pairs_range_over_locations(self):
        alphabet = vineyard_alphabet()
        for pair in small_dataset():
            if pair.task_class == "navigation":
                assert atoms(pair.formula) <= set(alphabet.locations)

    def test_tsv_emission(self):
        pairs = small_dataset()
        lines = dataset_tsv(pairs).splitlines()
        assert len(lines) == len(pairs)
        sentence, formula = lines[0].split("\t")
        assert sentence == pairs[0].sentence
        assert parse(formula) == pairs[0].formula

    def test_alphabet_too_small_rejected(self):
        alphabet = build_alphabet(load_landmarks()[:5])
        with pytest.raises(ValueError, match="needs 2"):
            generate_dataset(
                alphabet, patterns=("wait",), generic_per_pattern=1,
            )


class TestEvaluateExtraction:
    def test_oracle_backend_is_perfect_on_both_classes(self):
        config = PipelineConfig(backend=oracle_backend())
        report = evaluate_extraction(small_dataset(), config)
        assert report.errors == 0
        assert report.accuracy("navigation") == 1.0
        assert report.accuracy("generic") == 1.0

    def test_unresolvable_floor_scores_zero(self):
        config = PipelineConfig(backend=oracle_backend(), floor=1.01)
        report = evaluate_extraction(small_dataset(), config)
        assert report.accuracy("navigation") == 0.0
        assert report.accuracy("generic") == 0.0
        assert report.errors == sum(row.total for row in report.by_class)

    def test_report_table_has_three_profile_rows(self):
        config = PipelineConfig(backend=oracle_backend())
        reports = evaluate_profiles(small_dataset(), config)
        table = format_extraction_table(reports)
        lines = table.splitlines()
        assert len(lines) == 4
        assert "navigation" in lines[0] and "generic" in lines[0]
        for name, line in zip(PROFILE_NAMES, lines[1:]):
            assert line.startswith(name)
            assert "100.0%" in line

    def test_equivalence_judged_by_language_not_syntax(self):
        # A pair whose expected formula is written differently but accepts
        # the same traces must count as correct.
        pairs = small_dataset()
        pair = next(p for p in pairs if p.pattern == "visit")
        (atom,) = atoms(pair.formula)
        rewritten = replace(pair, formula=parse(f"true U {atom}"))
        config = PipelineConfig(backend=oracle_backend())
        report = evaluate_extraction((rewritten,), config)
        assert report.accuracy("navigation") == 1.0
