from __future__ import annotations

import random

import pytest

import oracle
from conftest import load_jsonl
from negfact.core import (
    AnnotatedSentence,
    FactualityLabel,
    NormalizationPolicy,
    normalize,
    parse_tagged,
    record_to_sentence,
)
from negfact.engine import (
    EngineConfig,
    LanguageMismatch,
    Precedence,
    classify,
    classify_batch,
    detection_to_record,
    match_triggers,
    resolve_scope,
    tokenize,
)
from negfact.triggers import (
    Trigger,
    TriggerCategory,
    TriggerSet,
    compile_trigger_set,
    load_bundled,
)
from test_triggers import FOLD_ALL, FOLD_CASE, make_set, random_trigger_set, trig, VOCAB


def sentence_from_tagged(tagged: str, lang: str, id_: str = "t") -> AnnotatedSentence:
    text, span = parse_tagged(tagged)
    return AnnotatedSentence(id_, text, span, lang)


@pytest.fixture(scope="module")
def en_matcher():
    return compile_trigger_set(load_bundled("en"))


@pytest.fixture(scope="module")
def de_baseline():
    return compile_trigger_set(load_bundled("de", "baseline"))


@pytest.fixture(scope="module")
def de_fixed():
    return compile_trigger_set(load_bundled("de", "fixed"))


class TestTokenize:
    def test_basic(self):
        tokens = tokenize("Patient denies headache.", FOLD_CASE, (15, 23))
        assert [t.text for t in tokens] == ["patient", "denies", "headache"]
        assert [t.inside_entity for t in tokens] == [False, False, True]
        assert tokens[2].source_span == (15, 23)

    def test_empty(self):
        assert tokenize("", FOLD_CASE, None) == []

    def test_punctuation_dropped_hyphen_kept(self):
        tokens = tokenize("Blut / Urin, Pat.-Nr x-1 -", FOLD_CASE, None)
        assert [t.text for t in tokens] == ["blut", "urin", "pat", "nr", "x-1"]

    def test_overlap_marks_entity(self):
        # entity covers only the "schmerz" prefix inside "schmerzfrei"
        text = "Sie war schmerzfrei."
        start = text.index("schmerz")
        tokens = tokenize(text, FOLD_CASE, (start, start + len("schmerz")))
        token = [t for t in tokens if t.text == "schmerzfrei"][0]
        assert token.inside_entity

    def test_expansion_keeps_source_spans(self):
        text = "Überschuß da"
        tokens = tokenize(text, FOLD_ALL, None)
        assert [t.text for t in tokens] == ["ueberschuss", "da"]
        assert tokens[0].source_span == (0, len("Überschuß"))
        assert text[slice(*tokens[1].source_span)] == "da"

    def test_tokens_ordered_non_overlapping(self):
        tokens = tokenize("kein Blut im Bett", FOLD_CASE, (0, 4))
        spans = [t.source_span for t in tokens]
        assert spans == sorted(spans)
        for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
            assert next_start >= prev_end


class TestMatchTriggers:
    def test_simple_match(self, de_fixed):
        tokens = tokenize("Patient verneint Kopfschmerzen", FOLD_ALL, (17, 30))
        matches = match_triggers(tokens, de_fixed, EngineConfig.fixed())
        assert len(matches) == 1
        assert matches[0].trigger.phrase == ("verneint",)
        assert matches[0].trigger.category is TriggerCategory.PRE_NEGATION

    def test_entity_internal_dropped_in_baseline_mode(self, de_baseline):
        text, span = parse_tagged("Sie bemerkte <E>kein Blut</E>")
        tokens = tokenize(text, FOLD_CASE, span)
        assert match_triggers(tokens, de_baseline, EngineConfig.baseline()) == []

    def test_entity_internal_kept_in_fixed_mode(self, de_fixed):
        text, span = parse_tagged("Sie bemerkte <E>kein Blut</E>")
        tokens = tokenize(text, FOLD_ALL, span)
        matches = match_triggers(tokens, de_fixed, EngineConfig.fixed())
        assert [m.trigger.phrase for m in matches] == [("kein",)]
        assert matches[0].inside_entity

    def test_pseudo_retained_and_marked(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("kein anstieg", TriggerCategory.PSEUDO_NEGATION),
                ]
            )
        )
        tokens = tokenize("kein Anstieg der Schmerzen", FOLD_ALL, None)
        matches = match_triggers(tokens, matcher, EngineConfig.fixed())
        assert len(matches) == 1
        assert matches[0].pseudo
        assert (matches[0].start, matches[0].end) == (0, 2)


class TestResolveScope:
    def make_match(self, matcher, text, config=EngineConfig.fixed()):
        tokens = tokenize(text, matcher.policy, None)
        return tokens, match_triggers(tokens, matcher, config)

    def test_forward_window(self):
        matcher = compile_trigger_set(
            make_set([trig("no", TriggerCategory.PRE_NEGATION)], language="en")
        )
        tokens, matches = self.make_match(
            matcher, "no shortness of breath cough vomiting diarrhea"
        )
        scope = resolve_scope(matches[0], tokens, EngineConfig.fixed())
        assert scope == (1, 6)  # the following five tokens

    def test_termination_empty_scope(self):
        matcher = compile_trigger_set(make_set([trig("aber", TriggerCategory.TERMINATION)]))
        tokens, matches = self.make_match(matcher, "aber")
        scope = resolve_scope(matches[0], tokens, EngineConfig.fixed())
        assert scope[0] == scope[1]

    def test_backward_at_sentence_end(self, en_matcher):
        text, span = parse_tagged("a <E>tumour</E> cannot be ruled out")
        tokens = tokenize(text, en_matcher.policy, span)
        matches = match_triggers(tokens, en_matcher, EngineConfig.fixed())
        assert matches[0].trigger.phrase_text == "cannot be ruled out"
        scope = resolve_scope(matches[0], tokens, EngineConfig.fixed())
        assert scope == (0, 2)

    def test_termination_truncates_forward(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("aber", TriggerCategory.TERMINATION),
                ]
            )
        )
        tokens, matches = self.make_match(matcher, "kein Husten aber Fieber da")
        negation = [m for m in matches if not m.trigger.category is TriggerCategory.TERMINATION][0]
        terminations = [m for m in matches if m.trigger.category is TriggerCategory.TERMINATION]
        scope = resolve_scope(negation, tokens, EngineConfig.fixed(), terminations)
        assert scope == (1, 2)


GOLDEN = load_jsonl("golden_sentences.jsonl")


class TestClassify:
    @pytest.mark.parametrize("record", GOLDEN, ids=[r["id"] for r in GOLDEN])
    @pytest.mark.parametrize("mode", ["baseline", "fixed"])
    def test_golden_sentences_both_modes(self, record, mode):
        sentence = record_to_sentence(record)
        matcher = compile_trigger_set(load_bundled(sentence.language, mode))
        config = EngineConfig.baseline() if mode == "baseline" else EngineConfig.fixed()
        detection = classify(sentence, matcher, config)
        assert detection.label is sentence.gold

    def test_suffix_negation_fixed_vs_baseline(self, de_fixed, de_baseline):
        sentence = sentence_from_tagged(
            "Sie war am Tag der Entlassung <E>schmerzfrei</E>.", "de"
        )
        fixed = classify(sentence, de_fixed, EngineConfig.fixed())
        assert fixed.label is FactualityLabel.NEGATED
        assert fixed.mode_notes == ("compound-suffix match",)
        assert fixed.trigger.phrase == ("frei",)
        baseline = classify(sentence, de_baseline, EngineConfig.baseline())
        assert baseline.label is FactualityLabel.AFFIRMED

    def test_suffix_requires_stem(self, de_fixed):
        # "frei" alone and too-short stems must not negate
        for tagged in ("Sie ist <E>frei</E>.", "Der Weg ist <E>obfrei</E>."):
            sentence = sentence_from_tagged(tagged, "de")
            assert classify(sentence, de_fixed, EngineConfig.fixed()).label is (
                FactualityLabel.AFFIRMED
            )

    def test_verleugnet_missing_in_baseline(self, de_fixed, de_baseline):
        sentence = sentence_from_tagged(
            "Verleugnet <E>Fieber,</E> pleuritische Brustschmerzen oder Husten.", "de"
        )
        assert classify(sentence, de_fixed, EngineConfig.fixed()).label is FactualityLabel.NEGATED
        assert (
            classify(sentence, de_baseline, EngineConfig.baseline()).label
            is FactualityLabel.AFFIRMED
        )

    def test_detection_spans_in_source_coordinates(self, en_matcher):
        sentence = sentence_from_tagged("Patient denies <E>headache</E>.", "en")
        detection = classify(sentence, en_matcher, EngineConfig.fixed())
        text = sentence.text
        assert text[slice(*detection.trigger_span)] == "denies"
        assert text[slice(*detection.scope)] == "headache"

    def test_language_mismatch(self, en_matcher):
        sentence = sentence_from_tagged("Patient verneint <E>Kopfschmerzen</E>.", "de")
        with pytest.raises(LanguageMismatch):
            classify(sentence, en_matcher, EngineConfig.fixed())

    def test_no_trigger_means_affirmed(self, en_matcher):
        sentence = sentence_from_tagged("Patient reports <E>headache</E> since Monday.", "en")
        detection = classify(sentence, en_matcher, EngineConfig.fixed())
        assert detection.label is FactualityLabel.AFFIRMED
        assert detection.trigger is None
        assert detection.scope is None

    def test_pseudo_blocks_subphrase_negation(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("kein anstieg", TriggerCategory.PSEUDO_NEGATION),
                ]
            )
        )
        sentence = sentence_from_tagged("kein Anstieg der <E>Schmerzen</E>", "de")
        assert classify(sentence, matcher, EngineConfig.fixed()).label is (
            FactualityLabel.AFFIRMED
        )

    def test_nearest_trigger_precedence(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("verdacht auf", TriggerCategory.PRE_POSSIBLE),
                ]
            )
        )
        sentence = sentence_from_tagged("Verdacht auf kein <E>Blut</E>", "de")
        detection = classify(sentence, matcher, EngineConfig.fixed())
        assert detection.label is FactualityLabel.NEGATED  # "kein" is closer

    def test_equal_distance_tie_goes_to_possible(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("moeglich", TriggerCategory.POST_POSSIBLE),
                ]
            )
        )
        sentence = sentence_from_tagged("kein <E>Schmerz</E> moeglich", "de")
        detection = classify(sentence, matcher, EngineConfig.fixed())
        assert detection.label is FactualityLabel.POSSIBLE

    def test_possible_over_negated_precedence(self):
        matcher = compile_trigger_set(
            make_set(
                [
                    trig("kein", TriggerCategory.PRE_NEGATION),
                    trig("verdacht auf", TriggerCategory.PRE_POSSIBLE),
                ]
            )
        )
        sentence = sentence_from_tagged("Verdacht auf kein <E>Blut</E>", "de")
        config = EngineConfig(
            entity_internal_triggers=True,
            compound_suffix_negation=True,
            precedence=Precedence.POSSIBLE_OVER_NEGATED,
        )
        assert classify(sentence, matcher, config).label is FactualityLabel.POSSIBLE

    def test_trigger_scope_must_cover_entity(self, en_matcher):
        sentence = sentence_from_tagged(
            "No cough at the last four visits; <E>fever</E> persists.", "en"
        )
        assert classify(sentence, en_matcher, EngineConfig.fixed()).label is (
            FactualityLabel.AFFIRMED
        )

    def test_normalization_invariance(self, de_fixed):
        tagged = "<E>Die Hypernatrimie</E> vollständig aufgelöst, als er ankam."
        sentence = sentence_from_tagged(tagged, "de")
        detection = classify(sentence, de_fixed, EngineConfig.fixed())

        # classify the pre-normalized sentence with an identity-policy matcher,
        # mapping the entity span through the offset map
        normalized = normalize(sentence.text, de_fixed.policy)
        a, b = sentence.entity
        norm_start = min(
            i for i, r in enumerate(normalized.ranges) if r[1] > a
        )
        norm_end = max(
            i + 1 for i, r in enumerate(normalized.ranges) if r[0] < b
        )
        pre = AnnotatedSentence("n", normalized.text, (norm_start, norm_end), "de")
        identity_set = TriggerSet(
            language="de",
            policy=NormalizationPolicy.identity(),
            triggers=de_fixed.trigger_set.triggers,
        )
        identity_matcher = compile_trigger_set(identity_set)
        pre_detection = classify(pre, identity_matcher, EngineConfig.fixed())
        assert pre_detection.label is detection.label


ERRORS_EN = load_jsonl("errors_en.jsonl")


class TestEnglishErrorRows:
    @pytest.mark.parametrize("record", ERRORS_EN, ids=[r["id"] for r in ERRORS_EN])
    def test_english_side_is_correct(self, record, en_matcher):
        sentence = record_to_sentence(record)
        detection = classify(sentence, en_matcher, EngineConfig.fixed())
        assert detection.label is sentence.gold


class TestClassifyBatch:
    def test_empty(self, en_matcher):
        assert list(classify_batch([], en_matcher)) == []

    def test_golden_stream(self, de_fixed):
        sentences = [record_to_sentence(r) for r in GOLDEN if r["lang"] == "de"]
        results = list(classify_batch(sentences, de_fixed, EngineConfig.fixed()))
        assert [r.id for r in results] == [s.id for s in sentences]
        assert [r.detection.label for r in results] == [s.gold for s in sentences]

    def test_bad_record_isolated(self, en_matcher):
        records = [
            {"id": f"g{i}", "text": "denies pain", "entity": {"start": 7, "end": 11}, "lang": "en"}
            for i in range(5)
        ]
        records.insert(2, {"id": "bad", "text": "x", "entity": {"start": 0, "end": 9}, "lang": "en"})
        results = list(classify_batch(records, en_matcher, EngineConfig.fixed()))
        assert len(results) == 6
        errors = [r for r in results if r.error]
        assert len(errors) == 1 and errors[0].id == "bad"
        assert all(r.detection.label is FactualityLabel.NEGATED for r in results if r.detection)

    def test_detection_record_shape(self, en_matcher):
        sentence = sentence_from_tagged("Patient denies <E>headache</E>.", "en")
        [result] = classify_batch([sentence], en_matcher)
        record = detection_to_record(result.id, result.detection)
        assert record == {
            "id": "t",
            "label": "negated",
            "trigger": "denies",
            "scope": [15, 23],
        }


def random_case(rng: random.Random):
    trigger_set = random_trigger_set(rng)
    if rng.random() < 0.3:
        triggers = dict.fromkeys(trigger_set.triggers)
        suffix = Trigger(("frei",), TriggerCategory.NEGATION_SUFFIX, "xx")
        triggers[suffix] = None
        trigger_set = TriggerSet(
            language="xx", policy=FOLD_CASE, triggers=tuple(triggers)
        )
    n = rng.randint(1, 12)
    words = VOCAB + ["blutfrei", "xx", "befundfrei"]
    tokens = [rng.choice(words) for _ in range(n)]
    first = rng.randrange(n)
    last = rng.randrange(first, n)
    text = " ".join(tokens)
    starts = []
    position = 0
    for token in tokens:
        starts.append(position)
        position += len(token) + 1
    entity = (starts[first], starts[last] + len(tokens[last]))
    inside = [first <= i <= last for i in range(n)]
    sentence = AnnotatedSentence("r", text, entity, "xx")
    return trigger_set, sentence, tokens, inside


class TestScopeOracleEquivalence:
    @pytest.mark.parametrize("precedence", [Precedence.NEAREST_TRIGGER, Precedence.POSSIBLE_OVER_NEGATED])
    @pytest.mark.parametrize("mode", ["baseline", "fixed"])
    def test_classify_matches_brute_force(self, mode, precedence):
        rng = random.Random(hash((mode, precedence.value)) & 0xFFFF)
        for _ in range(250):
            trigger_set, sentence, tokens, inside = random_case(rng)
            matcher = compile_trigger_set(trigger_set)
            window = rng.choice([1, 2, 5])
            config = EngineConfig(
                scope_window=window,
                entity_internal_triggers=(mode == "fixed"),
                compound_suffix_negation=(mode == "fixed"),
                precedence=precedence,
            )
            got = classify(sentence, matcher, config).label
            want = oracle.classify(
                tokens,
                inside,
                list(trigger_set.triggers),
                window=window,
                entity_internal=(mode == "fixed"),
                suffix_rule=(mode == "fixed"),
                possible_over_negated=(precedence is Precedence.POSSIBLE_OVER_NEGATED),
            )
            assert got is want, f"tokens={tokens} inside={inside} set={trigger_set.triggers} window={window}"
