import sys
import textwrap

import pytest

from entailsum import (MockBackend, RuleBasedExtractor, SubprocessExtractor,
                       mnli_doc_score, ner_overlap_score)
from entailsum.errors import ExtractorUnavailable


# ----------------------------------------------------- rule-based extractor

def test_extractor_finds_capitalized_runs():
    got = RuleBasedExtractor().extract(
        "Maria Lopez visited Berlin on Tuesday with Hans Gruber.")
    names = [text for text, _ in got]
    assert "Maria Lopez" in names
    assert "Berlin" in names
    assert "Hans Gruber" in names
    assert all(etype == "entity" for _, etype in got)


def test_extractor_sheds_positional_capitalization():
    got = RuleBasedExtractor().extract("The mayor spoke. The Riverside Bridge closed.")
    names = [text for text, _ in got]
    assert "The mayor" not in names
    assert "Riverside Bridge" in names
    assert "The Riverside Bridge" not in names


def test_extractor_keeps_mid_sentence_articles_in_names():
    # not sentence-initial, so 'The' stays part of the run
    got = RuleBasedExtractor().extract("She flew to The Hague yesterday.")
    assert ("The Hague", "entity") in got


def test_extractor_strips_surrounding_punctuation():
    got = RuleBasedExtractor().extract('Investors praised "Acme Corp." loudly.')
    names = [text for text, _ in got]
    assert "Acme Corp" in names


def test_extractor_handles_entity_at_sentence_end():
    got = RuleBasedExtractor().extract("We meet in Paris.")
    assert ("Paris", "entity") in got


def test_extractor_empty_runs_produce_nothing():
    assert RuleBasedExtractor().extract("nothing capitalized here at all.") == []


def test_extractor_default_types():
    assert RuleBasedExtractor().default_types == frozenset({"entity"})


# -------------------------------------------------------------- ner overlap

DOC = "Maria Lopez met Hans Gruber in Berlin. They toured the Reichstag."


def test_overlap_subset_scores_one():
    assert ner_overlap_score(DOC, "Maria Lopez visited Berlin.",
                             RuleBasedExtractor()) == 1.0


def test_overlap_novel_entity_scores_zero():
    assert ner_overlap_score(DOC, "Maria Lopez visited Munich.",
                             RuleBasedExtractor()) == 0.0


def test_overlap_vacuous_summary_scores_one():
    assert ner_overlap_score(DOC, "a meeting happened in the capital.",
                             RuleBasedExtractor()) == 1.0


def test_overlap_is_case_folded():
    assert ner_overlap_score("we saw BERLIN today.", "We reached Berlin.",
                             RuleBasedExtractor()) == 1.0


def test_overlap_type_filter():
    class TypedExtractor:
        default_types = frozenset({"PERSON"})

        def extract(self, text):
            out = []
            if "Maria" in text:
                out.append(("Maria", "PERSON"))
            if "Berlin" in text:
                out.append(("Berlin", "GPE"))
            return out

    # Berlin is novel but its type is filtered out by default_types
    assert ner_overlap_score("Maria spoke.", "Maria went to Berlin.",
                             TypedExtractor()) == 1.0
    assert ner_overlap_score("Maria spoke.", "Maria went to Berlin.",
                             TypedExtractor(), types=("PERSON", "GPE")) == 0.0


# ------------------------------------------------------ subprocess protocol

_UPPER_EXTRACTOR = textwrap.dedent("""
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        ents = [{"text": w, "type": "WORD"}
                for w in req["text"].split() if w.isupper()]
        print(json.dumps({"entities": ents}), flush=True)
""")


def test_subprocess_extractor_round_trip():
    with SubprocessExtractor([sys.executable, "-c", _UPPER_EXTRACTOR],
                             default_types=("WORD",)) as ex:
        assert ex.extract("keep ACME drop acme keep NASA") == [
            ("ACME", "WORD"), ("NASA", "WORD")]
        assert ex.extract("nothing here") == []  # process stays alive
        assert ex.default_types == frozenset({"WORD"})


def test_subprocess_extractor_missing_binary():
    ex = SubprocessExtractor(["/no/such/binary-xyz"])
    with pytest.raises(ExtractorUnavailable, match="could not start"):
        ex.extract("text")


def test_subprocess_extractor_garbage_output():
    ex = SubprocessExtractor([sys.executable, "-c",
                              "print('not json'); import sys; sys.stdout.flush()"])
    with pytest.raises(ExtractorUnavailable, match="protocol failure"):
        ex.extract("text")
    ex.close()


def test_subprocess_extractor_exiting_child():
    # the child quits without replying; depending on timing that surfaces
    # as a closed stream or a broken pipe, but always as unavailability
    ex = SubprocessExtractor([sys.executable, "-c", "pass"])
    with pytest.raises(ExtractorUnavailable):
        ex.extract("text")
    ex.close()


# ----------------------------------------------------- whole-document score

def test_mnli_doc_score_is_the_single_pair_entailment():
    backend = MockBackend()
    doc = "A cat sat on the mat. A dog ran far."
    summary = "A cat sat on the mat."
    [probs] = backend.score_pairs([(doc, summary)])
    assert mnli_doc_score(doc, summary, backend) == probs.e


def test_mnli_doc_score_strips_whitespace():
    backend = MockBackend()
    assert mnli_doc_score("  A cat sat.  ", "\nA cat sat.\n", backend) == \
        mnli_doc_score("A cat sat.", "A cat sat.", backend)
