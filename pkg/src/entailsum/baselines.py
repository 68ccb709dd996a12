"""Reference baselines: entity overlap and single-pair full-document scoring.

The entity-overlap baseline marks a summary consistent (1.0) exactly when
every entity it mentions also appears in the document, compared after case
folding. Extraction is pluggable: a small deterministic rule-based
extractor ships for tests and offline use, and any external NER tool can
be attached through a line-oriented subprocess protocol.
"""

from __future__ import annotations

import json
import subprocess
from typing import Iterable, Protocol, Sequence

from .errors import ExtractorUnavailable
from .segmenter import split_sentences

Entity = tuple[str, str]  # (surface text, type)


class EntityExtractor(Protocol):
    @property
    def default_types(self) -> frozenset[str]: ...

    def extract(self, text: str) -> list[Entity]: ...


# sentence starters that are capitalized only by position, not because they
# name anything
_STOPLIST = frozenset("""
    the a an and but or nor so yet for if when while after before because
    although though since as until unless once he she it they we i you his
    her its their our my your this that these those there here not no in on
    at by to from with without within during over under about against
    between among through into onto what which who whom whose how why where
    then now today yesterday tomorrow one two some many most few all both
    each every another other such only even just still also meanwhile
    however moreover according officials police government
""".split())


def _is_capitalized(token: str) -> bool:
    return bool(token) and token[0].isupper() and any(ch.isalpha() for ch in token)


class RuleBasedExtractor:
    """Capitalized-run extractor; every entity has type 'entity'.

    A maximal run of capitalized tokens within a sentence forms one entity.
    A run beginning at the first token of a sentence sheds that token when
    it is an ordinary word that is only capitalized by position.
    """

    @property
    def default_types(self) -> frozenset[str]:
        return frozenset({"entity"})

    def extract(self, text: str) -> list[Entity]:
        entities: list[Entity] = []
        for sentence in split_sentences(text):
            tokens = sentence.split()
            stripped = [t.strip("\"'“”‘’()[]{}.,;:!?«»") for t in tokens]
            run: list[str] = []
            run_start = -1
            for i, tok in enumerate(stripped + [""]):  # sentinel flushes last run
                if _is_capitalized(tok):
                    if not run:
                        run_start = i
                    run.append(tok)
                    continue
                if run:
                    if run_start == 0 and run[0].lower() in _STOPLIST:
                        run = run[1:]
                    if run:
                        entities.append((" ".join(run), "entity"))
                    run = []
        return entities


class SubprocessExtractor:
    """Adapter for an external extractor spoken to over stdin/stdout.

    Protocol: one JSON object per line. Request {"text": ...}; response
    {"entities": [{"text": ..., "type": ...}, ...]}. The process is started
    lazily and kept alive across calls; any failure to start, write, or
    parse raises ExtractorUnavailable.
    """

    def __init__(self, command: Sequence[str],
                 default_types: Iterable[str] = ("PERSON", "ORG", "GPE", "LOC")) -> None:
        self.command = list(command)
        self._default_types = frozenset(default_types)
        self._proc: subprocess.Popen | None = None

    @property
    def default_types(self) -> frozenset[str]:
        return self._default_types

    def _ensure_started(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise ExtractorUnavailable(
                    f"could not start extractor {self.command!r}: {exc}"
                ) from exc
        return self._proc

    def extract(self, text: str) -> list[Entity]:
        proc = self._ensure_started()
        try:
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(json.dumps({"text": text}, ensure_ascii=False) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
            if not line:
                raise ExtractorUnavailable("extractor closed its output stream")
            reply = json.loads(line)
            return [(e["text"], e["type"]) for e in reply["entities"]]
        except ExtractorUnavailable:
            raise
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ExtractorUnavailable(f"extractor protocol failure: {exc}") from exc

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    def __enter__(self) -> "SubprocessExtractor":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def ner_overlap_score(
    document: str,
    summary: str,
    extractor: EntityExtractor,
    types: Iterable[str] | None = None,
) -> float:
    """1.0 when every summary entity also occurs in the document, else 0.0.

    Matching is case-folded exact string equality over the selected entity
    types. A summary with no entities of those types cannot contradict the
    document this way, so it scores 1.0.
    """
    wanted = frozenset(types) if types is not None else extractor.default_types
    doc_entities = {
        text.casefold() for text, etype in extractor.extract(document)
        if etype in wanted
    }
    sum_entities = {
        text.casefold() for text, etype in extractor.extract(summary)
        if etype in wanted
    }
    return 1.0 if sum_entities <= doc_entities else 0.0


def mnli_doc_score(document: str, summary: str, backend) -> float:
    """Entailment probability of the whole summary given the whole document.

    Equivalent to the parameter-free scorer at full/full granularity: one
    pair, no aggregation.
    """
    [probs] = backend.score_pairs([(document.strip(), summary.strip())])
    return probs.e
