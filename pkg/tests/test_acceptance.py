"""Acceptance suite: one test per release criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion.  Tolerances are pinned here and nowhere else.
"""

from __future__ import annotations

import json
import random
import time

import oracle
from conftest import DATA_DIR, load_jsonl
from negfact.adapters import (
    FragmentedEntity,
    bronco_mapping,
    ex4cds_mapping,
    merge_fragments,
)
from negfact.cli import main as cli_main
from negfact.core import FactualityLabel, read_corpus, record_to_sentence, write_corpus
from negfact.engine import EngineConfig, Precedence, classify
from negfact.evaluation import metrics, score
from negfact.projection import project_corpus, stub_backend
from negfact.triggers import compile_trigger_set, load_bundled
from test_engine import random_case

A, N, P = FactualityLabel.AFFIRMED, FactualityLabel.NEGATED, FactualityLabel.POSSIBLE


def report(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


MATCHERS = {
    ("en", "baseline"): compile_trigger_set(load_bundled("en", "baseline")),
    ("en", "fixed"): compile_trigger_set(load_bundled("en", "fixed")),
    ("de", "baseline"): compile_trigger_set(load_bundled("de", "baseline")),
    ("de", "fixed"): compile_trigger_set(load_bundled("de", "fixed")),
}
CONFIGS = {"baseline": EngineConfig.baseline(), "fixed": EngineConfig.fixed()}


def test_golden_sentence_suite():
    """Both language columns classify as labeled, in both German modes,
    inside one second."""
    sentences = [record_to_sentence(r) for r in load_jsonl("golden_sentences.jsonl")]
    assert len(sentences) == 6
    started = time.perf_counter()
    checked = 0
    for sentence in sentences:
        for mode in ("baseline", "fixed"):
            detection = classify(
                sentence, MATCHERS[(sentence.language, mode)], CONFIGS[mode]
            )
            assert detection.label is sentence.gold, (
                f"{sentence.id} [{mode}]: got {detection.label}, want {sentence.gold}"
            )
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"golden suite took {elapsed:.3f}s"
    report(f"golden-sentence suite ({checked} checks in {elapsed * 1000:.0f} ms)")


def test_error_analysis_regression_suite():
    """Each documented German failure: wrong under baseline, right under
    fixed.  5/5 pairs must pass."""
    sentences = {r["id"]: record_to_sentence(r) for r in load_jsonl("regression_de.jsonl")}
    expected_pairs = {
        "reg-compound-suffix",
        "reg-umlaut-encoding",
        "reg-word-order",
        "reg-missing-cue",
        "reg-entity-internal",
    }
    assert set(sentences) == expected_pairs
    passed = 0
    for sentence in sentences.values():
        baseline = classify(sentence, MATCHERS[("de", "baseline")], CONFIGS["baseline"])
        fixed = classify(sentence, MATCHERS[("de", "fixed")], CONFIGS["fixed"])
        assert baseline.label is not sentence.gold, (
            f"{sentence.id}: baseline unexpectedly correct ({baseline.label})"
        )
        assert fixed.label is sentence.gold, (
            f"{sentence.id}: fixed got {fixed.label}, want {sentence.gold}"
        )
        passed += 1
    assert passed == 5
    report(f"error-analysis regression suite ({passed}/5 baseline-vs-fixed pairs)")


def test_scope_oracle_property():
    """1,000 randomized sentences (<=12 tokens) x random trigger sets
    (<=8 triggers): classify agrees with the brute-force oracle on 100%."""
    rng = random.Random(1898)
    agree = 0
    total = 1000
    for _ in range(total):
        trigger_set, sentence, tokens, inside = random_case(rng)
        matcher = compile_trigger_set(trigger_set)
        window = rng.choice([1, 2, 5])
        internal = rng.random() < 0.5
        suffix = rng.random() < 0.5
        precedence = rng.choice(list(Precedence))
        config = EngineConfig(
            scope_window=window,
            entity_internal_triggers=internal,
            compound_suffix_negation=suffix,
            precedence=precedence,
        )
        got = classify(sentence, matcher, config).label
        want = oracle.classify(
            tokens,
            inside,
            list(trigger_set.triggers),
            window=window,
            entity_internal=internal,
            suffix_rule=suffix,
            possible_over_negated=(precedence is Precedence.POSSIBLE_OVER_NEGATED),
        )
        assert got is want, f"disagreement on tokens={tokens} inside={inside}"
        agree += 1
    assert agree == total
    report(f"scope-oracle property ({agree}/{total} random cases agree)")


def test_metric_correctness():
    """Hand-tallied six-pair case exact to 1e-12; diagonal gives 1.0;
    empty classes give 0 under the zero convention."""
    tolerance = 1e-12
    gold = [("e1", A), ("e2", A), ("e3", N), ("e4", N), ("e5", P), ("e6", P)]
    pred = [("e1", A), ("e2", N), ("e3", N), ("e4", N), ("e5", P), ("e6", A)]
    hand = metrics(score(gold, pred))
    expected = {
        A: (0.5, 0.5, 0.5),
        N: (2 / 3, 1.0, 0.8),
        P: (1.0, 0.5, 2 / 3),
    }
    for label, (precision, recall, f1) in expected.items():
        assert abs(hand.precision[label] - precision) <= tolerance
        assert abs(hand.recall[label] - recall) <= tolerance
        assert abs(hand.f1[label] - f1) <= tolerance

    diagonal = metrics(score(gold, gold))
    assert all(diagonal.precision[label] == 1.0 for label in (A, N, P))
    assert all(diagonal.recall[label] == 1.0 for label in (A, N, P))
    assert all(diagonal.f1[label] == 1.0 for label in (A, N, P))

    two_class = metrics(score(gold[:4], gold[:4]))
    assert two_class.precision[P] == two_class.recall[P] == two_class.f1[P] == 0.0
    report("metric correctness (six-pair tally exact at 1e-12, diagonal, zero convention)")


def test_projection_conservation():
    """Seeded 20-record fixture: 11 retained, discards {markup_lost: 5,
    corrupt: 3, empty: 1, backend_error: 0}; totals conserve; reruns are
    byte-identical with the stub backend."""
    corpus_lines = (DATA_DIR / "projection_source.jsonl").read_text(encoding="utf-8").splitlines()
    lexicon = json.loads((DATA_DIR / "projection_lexicon.json").read_text(encoding="utf-8"))

    def run() -> tuple[str, str]:
        sentences = list(read_corpus(corpus_lines))
        backend = stub_backend(lexicon, default="error")
        retained, projection_report = project_corpus(sentences, backend, "de")
        return "\n".join(write_corpus(retained)), projection_report.to_json()

    first_out, first_report = run()
    payload = json.loads(first_report)
    assert payload["input"] == 20
    assert payload["retained"] == 11
    assert payload["discarded"] == {
        "markup_lost": 5,
        "corrupt": 3,
        "empty": 1,
        "backend_error": 0,
    }
    assert payload["input"] == payload["retained"] + sum(payload["discarded"].values())

    second_out, second_report = run()
    assert (first_out, first_report) == (second_out, second_report)
    report("projection conservation (20 -> 11 retained, 5/3/1/0 discards, byte-stable)")


def test_adapter_rules():
    """Label-mapping and fragment-merging rules, table driven."""
    ex4cds = ex4cds_mapping()
    assert ex4cds.apply("possible-future") is P
    assert ex4cds.apply("unlikely") is P
    assert ex4cds.apply("minor") is A
    assert bronco_mapping().apply("speculation") is P

    text = "y" * 80
    merged = merge_fragments(text, FragmentedEntity(((0, 5), (55, 60)), max_gap=50))
    assert merged == (0, 60)
    excluded = merge_fragments(text, FragmentedEntity(((0, 5), (56, 61)), max_gap=50))
    assert excluded is None
    report("adapter rules (ex4cds/bronco mappings, 50-merge/51-exclude)")


def test_trigger_validation_exit_codes(tmp_path, capsys):
    """`triggers validate`: raw-umlaut phrase under a folding policy exits
    1; the normalized file exits 0."""
    raw = tmp_path / "raw.tsv"
    raw.write_text("aufgelöst\tPostNegation\n", encoding="utf-8")
    folded = tmp_path / "folded.tsv"
    folded.write_text("aufgeloest\tPostNegation\n", encoding="utf-8")

    code_raw = cli_main(["triggers", "validate", "--triggers", str(raw), "--lang", "de"])
    code_folded = cli_main(["triggers", "validate", "--triggers", str(folded), "--lang", "de"])
    capsys.readouterr()
    assert code_raw == 1
    assert code_folded == 0
    report("trigger validation (umlaut file exits 1, normalized file exits 0)")
