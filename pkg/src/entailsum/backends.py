"""Scoring backends producing (entailment, contradiction, neutral) probabilities.

Three implementations share one interface:

* MockBackend   - deterministic token-overlap formula, used by the test suite
                  and synthetic corpora; no model, no network.
* FixtureBackend - exact lookup from a JSON file of pre-scored pairs.
* RemoteBackend  - HTTP client for the /nli wire protocol (see the sidecar
                   service); batched with bounded concurrency and one retry.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import requests

from .errors import BackendUnavailable, EmptyPair, FixtureMiss

Pair = tuple[str, str]

_SIMPLEX_TOL = 1e-6
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class NliProbs:
    """Probability triple over the three inference categories."""

    e: float
    c: float
    n: float

    def __post_init__(self) -> None:
        for name, v in (("e", self.e), ("c", self.c), ("n", self.n)):
            if not (-_SIMPLEX_TOL <= v <= 1.0 + _SIMPLEX_TOL):
                raise ValueError(f"{name}={v} outside [0, 1]")
        total = self.e + self.c + self.n
        if abs(total - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.e, self.c, self.n)


@dataclass(frozen=True)
class BackendId:
    """Identifies a backend (and its version) in cache keys and reports."""

    name: str
    version: str

    def __post_init__(self) -> None:
        if not self.name or not self.version:
            raise ValueError("backend name and version must be non-empty")


def _check_pairs(pairs: Sequence[Pair]) -> None:
    for i, (premise, hypothesis) in enumerate(pairs):
        if not premise or not premise.strip():
            raise EmptyPair(f"pair {i}: empty premise")
        if not hypothesis or not hypothesis.strip():
            raise EmptyPair(f"pair {i}: empty hypothesis")


def _tokens(text: str) -> frozenset[str]:
    return frozenset(_TOKEN.findall(text.lower()))


def mock_score(premise: str, hypothesis: str) -> NliProbs:
    """Deterministic stand-in for a real inference model.

    Entailment is the fraction of the hypothesis's unique lowercase
    alphanumeric tokens that also occur in the premise; the remainder is
    split 1:9 between contradiction and neutral.
    """
    if not premise.strip() or not hypothesis.strip():
        raise EmptyPair("premise and hypothesis must be non-empty")
    hyp = _tokens(hypothesis)
    if not hyp:
        raise EmptyPair("hypothesis has no tokens")
    r = len(hyp & _tokens(premise)) / len(hyp)
    return NliProbs(e=r, c=0.1 * (1.0 - r), n=0.9 * (1.0 - r))


class MockBackend:
    """Backend wrapper around mock_score."""

    def __init__(self) -> None:
        self.backend_id = BackendId("mock-lexical-overlap", "1")

    def score_pairs(self, pairs: Sequence[Pair]) -> list[NliProbs]:
        _check_pairs(pairs)
        return [mock_score(p, h) for p, h in pairs]


class FixtureBackend:
    """Exact-lookup backend over a fixed table of scored pairs."""

    def __init__(
        self,
        entries: dict[Pair, NliProbs],
        backend_id: BackendId | None = None,
    ) -> None:
        self.entries = dict(entries)
        self.backend_id = backend_id or BackendId("fixture", "1")

    def score_pairs(self, pairs: Sequence[Pair]) -> list[NliProbs]:
        _check_pairs(pairs)
        out = []
        for premise, hypothesis in pairs:
            probs = self.entries.get((premise, hypothesis))
            if probs is None:
                raise FixtureMiss(
                    f"pair not in fixture: ({premise[:60]!r}, {hypothesis[:60]!r})"
                )
            out.append(probs)
        return out

    @classmethod
    def from_matrix(cls, doc_blocks: Iterable[str], sum_blocks: Iterable[str],
                    matrix) -> "FixtureBackend":
        """Build a fixture reproducing a scored PairMatrix exactly."""
        doc_blocks = list(doc_blocks)
        sum_blocks = list(sum_blocks)
        entries: dict[Pair, NliProbs] = {}
        for i, premise in enumerate(doc_blocks):
            for j, hypothesis in enumerate(sum_blocks):
                entries[(premise, hypothesis)] = matrix.cell(i, j)
        return cls(entries, backend_id=matrix.backend)

    def to_json_dict(self) -> dict:
        return {
            "backend": {"name": self.backend_id.name, "version": self.backend_id.version},
            "entries": [
                {"premise": p, "hypothesis": h, "e": v.e, "c": v.c, "n": v.n}
                for (p, h), v in self.entries.items()
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FixtureBackend":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            backend = BackendId(raw["backend"]["name"], raw["backend"]["version"])
            entries: dict[Pair, NliProbs] = {}
            for entry in raw["entries"]:
                key = (entry["premise"], entry["hypothesis"])
                if key in entries:
                    raise ValueError(f"duplicate fixture entry for {key!r}")
                entries[key] = NliProbs(e=entry["e"], c=entry["c"], n=entry["n"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed fixture file {path}: {exc}") from exc
        return cls(entries, backend_id=backend)


class RemoteBackend:
    """Client for an HTTP scoring service speaking the /nli protocol.

    Requests are split into batches (default 64) posted with up to
    max_in_flight concurrent batches; a failed batch is retried once.
    Before the first batch the /health endpoint is polled until the
    service reports ready (services without /health are tolerated).
    """

    def __init__(
        self,
        base_url: str,
        *,
        name: str = "remote",
        version: str = "1",
        batch_size: int = 64,
        max_in_flight: int = 4,
        timeout: float = 60.0,
        health_timeout: float = 10.0,
        poll_health: bool = True,
        session: requests.Session | None = None,
    ) -> None:
        if batch_size < 1 or max_in_flight < 1:
            raise ValueError("batch_size and max_in_flight must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.backend_id = BackendId(name, version)
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.timeout = timeout
        self.health_timeout = health_timeout
        self.poll_health = poll_health
        self._session = session or requests.Session()
        self._health_checked = False

    def _wait_for_ready(self) -> None:
        deadline = time.monotonic() + self.health_timeout
        url = self.base_url + "/health"
        while True:
            try:
                resp = self._session.get(url, timeout=self.timeout)
                if resp.status_code == 404:
                    return  # service has no health endpoint
                if resp.status_code == 200 and resp.json().get("ready"):
                    return
            except (requests.RequestException, ValueError):
                pass
            if time.monotonic() >= deadline:
                raise BackendUnavailable(f"service at {self.base_url} never became ready")
            time.sleep(min(0.1, self.health_timeout / 10))

    def _post_batch(self, batch: Sequence[Pair]) -> list[NliProbs]:
        body = {"pairs": [{"premise": p, "hypothesis": h} for p, h in batch]}
        url = self.base_url + "/nli"
        last_error: Exception | None = None
        for _attempt in range(2):  # one retry
            try:
                resp = self._session.post(url, json=body, timeout=self.timeout)
                if resp.status_code != 200:
                    raise BackendUnavailable(
                        f"POST /nli returned HTTP {resp.status_code}: {resp.text[:200]}"
                    )
                probs = resp.json()["probs"]
                if len(probs) != len(batch):
                    raise BackendUnavailable(
                        f"response has {len(probs)} triples for {len(batch)} pairs"
                    )
                return [NliProbs(e=t[0], c=t[1], n=t[2]) for t in probs]
            except (requests.RequestException, ValueError, KeyError, IndexError,
                    TypeError, BackendUnavailable) as exc:
                last_error = exc
        raise BackendUnavailable(f"batch failed after retry: {last_error}")

    def score_pairs(self, pairs: Sequence[Pair]) -> list[NliProbs]:
        _check_pairs(pairs)
        if not pairs:
            return []
        if self.poll_health and not self._health_checked:
            self._wait_for_ready()
            self._health_checked = True
        batches = [pairs[i:i + self.batch_size] for i in range(0, len(pairs), self.batch_size)]
        if len(batches) == 1:
            return self._post_batch(batches[0])
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            results = list(pool.map(self._post_batch, batches))
        out: list[NliProbs] = []
        for chunk in results:
            out.extend(chunk)
        return out
