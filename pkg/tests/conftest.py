import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from evotext.embeddings import SynonymIndex, WordEmbeddingTable
from evotext.engine import AttackDeps
from evotext.perturb import QwertyMap
from evotext.scorers import MeanEmbeddingEncoder, train_ngram_lm
from evotext.victim import LabelDistribution, VictimModel

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    def record(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@pytest.fixture
def toy_tables():
    """good/great/fine are mutual synonyms; bad is close to good only in the general space."""
    words = ["good", "great", "fine", "bad", "movie", "the", "is", "plot"]
    rng = np.random.default_rng(3)
    g = {w: unit(rng.normal(size=8)) for w in words}
    c = {w: unit(rng.normal(size=8)) for w in words}
    base_g, base_c = g["good"], c["good"]
    g["great"] = unit(base_g + 0.3 * g["great"])
    g["fine"] = unit(base_g + 0.6 * g["fine"])
    g["bad"] = unit(base_g + 0.4 * g["bad"])
    c["great"] = unit(base_c + 0.3 * c["great"])
    c["fine"] = unit(base_c + 0.6 * c["fine"])
    c["bad"] = unit(-base_c + 0.2 * c["bad"])
    general = WordEmbeddingTable(words, np.array([g[w] for w in words]))
    counter = WordEmbeddingTable(words, np.array([c[w] for w in words]))
    return general, counter


class StubVictim(VictimModel):
    """Posterior of 'pos' is a fixed function of the tokens."""

    def __init__(self, fn, labels=("neg", "pos")):
        super().__init__()
        self.fn = fn
        self.labels = labels

    def _classify_batch(self, seqs):
        out = []
        for s in seqs:
            p = float(self.fn(s))
            out.append(LabelDistribution((1 - p, p), self.labels))
        return out


@pytest.fixture
def stub_victim():
    return StubVictim


@pytest.fixture
def toy_deps(toy_tables):
    general, counter = toy_tables

    def make(victim, delta=0.6):
        return AttackDeps(
            victim=victim,
            synonyms=SynonymIndex(general, counter, delta, 8),
            encoder=MeanEmbeddingEncoder(general),
            lm=train_ngram_lm(["the movie is good", "the plot is fine", "the movie is great"], order=3),
            qwerty=QwertyMap.load(),
        )

    return make


class _Handler(BaseHTTPRequestHandler):
    routes = {}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        fn = self.server.routes.get(self.path)
        if fn is None:
            self.send_response(404)
            self.end_headers()
            return
        self.server.calls.append((self.path, body))
        status, payload = fn(body)
        data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_service():
    """Start a local JSON service; ``routes`` maps path -> fn(body) -> (status, payload)."""
    servers = []

    def start(routes):
        srv = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        srv.routes = routes
        srv.calls = []
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        servers.append(srv)
        return f"http://127.0.0.1:{srv.server_address[1]}", srv

    yield start
    for srv in servers:
        srv.shutdown()
        srv.server_close()
