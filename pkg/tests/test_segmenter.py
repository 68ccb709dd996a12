import re

import numpy as np
import pytest

from entailsum import Granularity, Side, split_blocks, split_sentences
from entailsum.errors import EmptyInput, UnsupportedGranularity
from entailsum.segmenter import ABBREVIATIONS_V1, BlockList


def test_two_plain_sentences():
    assert split_sentences("A cat sat. A dog ran.") == ["A cat sat.", "A dog ran."]


def test_terminal_punctuation_variants():
    text = "Really? Yes! It works."
    assert split_sentences(text) == ["Really?", "Yes!", "It works."]


@pytest.mark.parametrize("abbrev", ["Dr.", "U.S.", "e.g.", "p.m.", "Sept.", "Corp."])
def test_abbreviations_do_not_split(abbrev):
    text = f"We met {abbrev} Smith today. It went well."
    assert len(split_sentences(text)) == 2


def test_verbs_that_look_like_weekday_abbreviations_still_split():
    # "sat." must remain a sentence end even though a day-of-week
    # abbreviation would spell the same way.
    assert split_sentences("The cat sat. The dog ran.") == [
        "The cat sat.", "The dog ran."]


def test_decimal_numbers_do_not_split():
    text = "Prices rose 3.5 percent in May. Analysts were surprised."
    assert len(split_sentences(text)) == 2


def test_lowercase_continuation_is_not_a_boundary():
    assert split_sentences("It was v. good and cheap.") == [
        "It was v. good and cheap."]


def test_no_whitespace_after_period_is_not_a_boundary():
    assert split_sentences("See file.txt for details.") == [
        "See file.txt for details."]


def test_closing_quote_after_terminal():
    text = 'He said "Stop." Then he left.'
    assert split_sentences(text) == ['He said "Stop."', "Then he left."]


def test_digit_starts_a_sentence():
    text = "The vote passed. 52 members agreed."
    assert split_sentences(text) == ["The vote passed.", "52 members agreed."]


def test_every_character_is_preserved():
    texts = [
        "One. Two! Three? Four.",
        "Mr. Jones met Dr. Lee at 3 p.m. on Jan. 5. They spoke briefly.",
        'A "quoted. End." B follows. C too.',
        "No terminal punctuation at all",
    ]
    strip_ws = lambda s: re.sub(r"\s+", "", s)
    for text in texts:
        joined = "".join(split_sentences(text))
        assert strip_ws(joined) == strip_ws(text)


def test_empty_text_rejected():
    with pytest.raises(EmptyInput):
        split_sentences("")
    with pytest.raises(EmptyInput):
        split_sentences("   \n\t  ")


def test_abbreviation_list_is_all_lowercase_with_trailing_periods():
    for abbrev in ABBREVIATIONS_V1:
        assert abbrev == abbrev.lower()
        assert abbrev.endswith(".")


def test_full_granularity_single_block():
    got = split_blocks("  One. Two.  ", Granularity.FULL, Side.DOCUMENT)
    assert got.blocks == ("One. Two.",)
    assert len(got) == 1
    assert got.granularity is Granularity.FULL


def test_paragraph_granularity():
    text = "First para. More.\n\nSecond para.\n   \n\nThird."
    got = split_blocks(text, Granularity.PARAGRAPH, Side.DOCUMENT)
    assert got.blocks == ("First para. More.", "Second para.", "Third.")


def test_single_newline_does_not_break_paragraphs():
    got = split_blocks("line one\nline two", Granularity.PARAGRAPH, Side.DOCUMENT)
    assert len(got) == 1


def test_two_sentence_granularity_pairs_in_order():
    text = "A one. B two. C three. D four. E five."
    got = split_blocks(text, Granularity.TWO_SENTENCE, Side.DOCUMENT)
    assert got.blocks == ("A one. B two.", "C three. D four.", "E five.")


def test_sentence_granularity_matches_split_sentences():
    text = "A one. B two. C three."
    got = split_blocks(text, Granularity.SENTENCE, Side.DOCUMENT)
    assert list(got.blocks) == split_sentences(text)


def test_summary_side_granularity_restrictions():
    text = "A one. B two. C three."
    for gran in (Granularity.FULL, Granularity.SENTENCE):
        split_blocks(text, gran, Side.SUMMARY)  # allowed
    for gran in (Granularity.PARAGRAPH, Granularity.TWO_SENTENCE):
        with pytest.raises(UnsupportedGranularity):
            split_blocks(text, gran, Side.SUMMARY)


def test_split_blocks_empty_text_rejected():
    for gran in Granularity:
        with pytest.raises(EmptyInput):
            split_blocks(" ", gran, Side.DOCUMENT)


def test_blocklist_rejects_blank_blocks():
    with pytest.raises(EmptyInput):
        BlockList(blocks=("ok", "  "), side=Side.DOCUMENT,
                  granularity=Granularity.SENTENCE)


def test_splitting_is_deterministic():
    rng = np.random.default_rng(7)
    words = ["alpha", "beta", "Gamma", "delta", "Epsilon", "zeta"]
    for _ in range(20):
        n = int(rng.integers(3, 30))
        tokens = [words[int(k)] for k in rng.integers(0, len(words), size=n)]
        text = " ".join(tokens) + "."
        assert split_sentences(text) == split_sentences(text)
