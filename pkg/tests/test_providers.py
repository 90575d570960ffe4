import json
import logging
import threading

import httpx
import numpy as np
import pytest

from enthymeme.providers import (
    PROMPT_TEMPLATE,
    DimensionMismatch,
    DiskCache,
    GenerationRequest,
    HttpEmbedder,
    HttpGenerator,
    HttpNli,
    HttpParser,
    MalformedResponse,
    NliOutcome,
    NliScores,
    OutOfRangeScore,
    PremiseKind,
    ProviderUnavailable,
    StubEmbedder,
    StubNli,
    UnparseableResponse,
    ZeroVector,
    build_prompt,
    cosine_similarity,
    fixture_key,
    hash_vector,
    make_key,
    merge_fixtures,
    nli_label,
    parse_completion,
    stub_providers,
    with_cache,
)
from enthymeme.providers.generation import split_statements
from enthymeme.providers.http import JsonClient, endpoint


# -- similarity and NLI labels ------------------------------------------------


def test_cosine_examples():
    v = [0.3, -1.2, 2.0]
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    assert cosine_similarity([1, 0], [-1, 0]) == -1.0
    with pytest.raises(DimensionMismatch):
        cosine_similarity([1, 0], [1, 0, 0])
    with pytest.raises(ZeroVector):
        cosine_similarity([0, 0], [1, 0])


def test_cosine_fuzz():
    rng = np.random.default_rng(17)
    for _ in range(10_000):
        d = int(rng.integers(1, 16))
        a, b = rng.normal(size=d) * rng.uniform(1e-3, 1e3), rng.normal(size=d)
        s = cosine_similarity(a, b)
        assert abs(s) <= 1 + 1e-9
        assert s == cosine_similarity(b, a)


def test_nli_scores_validated():
    with pytest.raises(OutOfRangeScore):
        NliScores(0, 101, 0)
    with pytest.raises(OutOfRangeScore):
        NliScores(-1, 0, 0)
    with pytest.raises(OutOfRangeScore):
        NliScores(float("nan"), 0, 0)


def test_nli_label():
    assert nli_label(NliScores(10, 85, 5)) is NliOutcome.CON
    assert nli_label(NliScores(0, 0, 100)) is NliOutcome.NEU
    tie = NliScores(50, 50, 0)
    picks = {nli_label(tie, seed=7) for _ in range(20)}
    assert len(picks) == 1 and picks <= {NliOutcome.ENT, NliOutcome.CON}
    # different seeds can pick differently, but only among the tied outcomes
    assert {nli_label(tie, seed=s) for s in range(50)} == {NliOutcome.ENT, NliOutcome.CON}


# -- stubs ------------------------------------------------------------------------


def test_hash_vectors_are_deterministic_unit_vectors():
    a, b = hash_vector("hello"), hash_vector("hello")
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert not np.array_equal(a, hash_vector("hello", seed=1))


def test_stub_embedder_fixture_vectors():
    e = StubEmbedder({"a": [1.0, 2.0], "b": {"3": 1.0}}, dim=4)
    assert e.embed("a").tolist() == [1.0, 2.0, 0.0, 0.0]
    assert e.embed("b").tolist() == [0.0, 0.0, 0.0, 1.0]
    assert e.embed("unknown").shape == (4,)
    with pytest.raises(ValueError):
        e.embed("")


def test_worked_nli_fixture(worked_providers):
    nli = worked_providers.nli
    walk, sleep = "tiger is the agent performing action walk.", "tiger is the agent performing action sleep."
    assert nli.nli(walk, sleep).con == 85
    walk_loc, sleep_loc = "cage is the location of action walk.", "cage is the location of action sleep."
    assert nli.nli(walk_loc, sleep_loc).con == 82
    assert nli.nli("x", "y") == NliScores(0, 0, 100)


def test_stub_generator_replays(tmp_path):
    from enthymeme.providers import load_fixtures

    fx = load_fixtures(__import__("pathlib").Path(__file__).parent / "data" / "generation_fixtures.json")
    gen = stub_providers(fx).generator
    p = "Jane was a professor teaching piano to students."
    c = "Jane spent the morning sipping coffee and reading a book."
    assert gen.generate(GenerationRequest(p, c, 2, PremiseKind.UNHELPFUL)) == [
        "Two students came early.", "Jane taught all morning."]
    with pytest.raises(UnparseableResponse):
        gen.generate(GenerationRequest(p, c, 3, PremiseKind.UNHELPFUL))
    with pytest.raises(ProviderUnavailable):
        gen.generate(GenerationRequest("other", c, 1))


def test_merge_fixtures():
    a = {"embed": {"dim": 8, "vectors": {"x": [1]}}, "nli": {fixture_key("a", "b"): {"ent": 1, "con": 2, "neu": 97}}}
    b = {"embed": {"vectors": {"y": [0, 1]}}, "parse": {"s": "(c / cat)"}}
    m = merge_fixtures(a, b)
    assert m["embed"] == {"dim": 8, "vectors": {"x": [1], "y": [0, 1]}}
    assert stub_providers(m).parser.parse("s") == "(c / cat)"


# -- prompt and parsing -------------------------------------------------------------


def test_prompt_substitution():
    text = build_prompt("P.", "C.", 2)
    assert "**Premise:** P." in text and "Claim: C." in text
    assert "Give two statements" in text and "{" not in text
    assert PROMPT_TEMPLATE.count("{count}") == 2


def test_parse_completion():
    out = parse_completion("Premise: p\nClaim: c\nHelpful: A b. C d.\nNon-Helpful: E f. G h.", 2)
    assert out == {PremiseKind.HELPFUL: ["A b.", "C d."], PremiseKind.UNHELPFUL: ["E f.", "G h."]}
    with pytest.raises(UnparseableResponse):
        parse_completion("Helpful: A. B.", 2)
    with pytest.raises(UnparseableResponse):
        parse_completion("Helpful: A.\nNon-Helpful: B. C.", 1)


def test_split_statements():
    assert split_statements(" One two. Three four.  ") == ["One two.", "Three four."]


def test_generation_request_validation():
    with pytest.raises(ValueError):
        GenerationRequest("p", "c", 4)
    with pytest.raises(ValueError):
        GenerationRequest(" ", "c", 1)


# -- cache ------------------------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    cache = DiskCache(tmp_path)
    key = make_key("prov", "embed", "text")
    assert cache.get(key) is None
    cache.put(key, b"payload")
    assert cache.get(key) == b"payload" and key in cache
    assert make_key("prov", "embed", "text") == key != make_key("prov", "embed", "other")


def test_corrupt_entry_is_a_miss(tmp_path, caplog):
    cache = DiskCache(tmp_path)
    key = make_key("p", "op")
    cache.put(key, b"good")
    (tmp_path / key).write_bytes(b"deadbeef\ngood")
    with caplog.at_level(logging.WARNING):
        assert cache.get(key) is None
    assert "checksum" in caplog.text


def test_cache_rejects_bad_keys(tmp_path):
    with pytest.raises(ValueError):
        DiskCache(tmp_path).get("../etc/passwd")


def test_concurrent_puts(tmp_path):
    cache = DiskCache(tmp_path)
    keys = [make_key("p", "op", i) for i in range(50)]
    threads = [threading.Thread(target=cache.put, args=(k, str(i).encode())) for i, k in enumerate(keys)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert [cache.get(k) for k in keys] == [str(i).encode() for i in range(50)]


# -- HTTP -------------------------------------------------------------------------------


def mock(handler):
    calls = []

    def wrapped(request: httpx.Request) -> httpx.Response:
        calls.append((request.url.path, json.loads(request.content)))
        return handler(request)

    return httpx.MockTransport(wrapped), calls


def test_endpoint():
    assert endpoint("http://h:1/", "embed") == "http://h:1/embed"
    assert endpoint("http://h:1/embed", "embed") == "http://h:1/embed"


def test_http_embed_and_nli():
    def handler(request):
        if request.url.path == "/embed":
            return httpx.Response(200, json={"embedding": [0.0, 3.0, 4.0]})
        return httpx.Response(200, json={"ent": 0.1, "con": 0.85, "neu": 0.05})

    transport, calls = mock(handler)
    emb = HttpEmbedder("http://m", transport=transport)
    assert emb.embed("hi").tolist() == [0.0, 3.0, 4.0]
    nli = HttpNli("http://m", transport=transport)
    s = nli.nli("a", "b")
    assert (s.ent, s.con, s.neu) == pytest.approx((10, 85, 5))
    assert calls == [("/embed", {"text": "hi"}), ("/nli", {"premise": "a", "hypothesis": "b"})]


def test_http_generate_and_parse():
    completion = "Helpful: A. B.\nNon-Helpful: C. D."

    def handler(request):
        if request.url.path == "/generate":
            return httpx.Response(200, json={"completion": completion})
        return httpx.Response(200, json={"penman": "(c / cat)"})

    transport, calls = mock(handler)
    gen = HttpGenerator("http://m", transport=transport)
    assert gen.generate(GenerationRequest("p", "c", 2, PremiseKind.UNHELPFUL)) == ["C.", "D."]
    assert calls[0][1]["prompt"] == build_prompt("p", "c", 2)
    assert HttpParser("http://m", transport=transport).parse("cat") == "(c / cat)"


def test_http_retries_then_succeeds():
    replies = iter([httpx.Response(503), httpx.Response(500), httpx.Response(200, json={"embedding": [1.0]})])
    transport, calls = mock(lambda r: next(replies))
    sleeps = []
    emb = HttpEmbedder("http://m", transport=transport, sleep=sleeps.append, backoff=0.5)
    assert emb.embed("x").tolist() == [1.0]
    assert sleeps == [0.5, 1.0] and len(calls) == 3


def test_http_gives_up_after_three_attempts():
    transport, calls = mock(lambda r: httpx.Response(503))
    with pytest.raises(ProviderUnavailable):
        HttpNli("http://m", transport=transport, sleep=lambda s: None).nli("a", "b")
    assert len(calls) == 3


def test_http_connection_errors_are_retried():
    def handler(request):
        raise httpx.ConnectError("refused")

    client = JsonClient("http://m/x", transport=httpx.MockTransport(handler), sleep=lambda s: None)
    with pytest.raises(ProviderUnavailable):
        client.post({})


@pytest.mark.parametrize("body,error", [
    ({"wrong": 1}, MalformedResponse),
    ({"embedding": ["a"]}, MalformedResponse),
    ([1, 2], MalformedResponse),
])
def test_http_malformed(body, error):
    transport, _ = mock(lambda r: httpx.Response(200, json=body))
    with pytest.raises(error):
        HttpEmbedder("http://m", transport=transport).embed("x")


def test_http_out_of_range_nli():
    transport, _ = mock(lambda r: httpx.Response(200, json={"ent": 0.2, "con": 1.5, "neu": 0}))
    with pytest.raises(OutOfRangeScore):
        HttpNli("http://m", transport=transport).nli("a", "b")


def test_http_client_error_not_retried():
    transport, calls = mock(lambda r: httpx.Response(404))
    with pytest.raises(ProviderUnavailable):
        HttpParser("http://m", transport=transport, sleep=lambda s: None).parse("x")
    assert len(calls) == 1


def test_in_flight_limit():
    active, peak, lock = [0], [0], threading.Lock()
    gate = threading.Event()

    def handler(request):
        with lock:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        gate.wait(0.05)
        with lock:
            active[0] -= 1
        return httpx.Response(200, json={"embedding": [1.0]})

    emb = HttpEmbedder("http://m", transport=httpx.MockTransport(handler), max_in_flight=2)
    threads = [threading.Thread(target=emb.embed, args=(f"t{i}",)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert 1 <= peak[0] <= 2


def test_env_timeout(monkeypatch):
    monkeypatch.setenv("ENTHYMEME_TIMEOUT", "2.5")
    assert JsonClient("http://m/x")._client.timeout.read == 2.5


def test_cached_provider_skips_network(tmp_path):
    transport, calls = mock(lambda r: httpx.Response(200, json={"embedding": [1.0, 2.0]}))
    cache = DiskCache(tmp_path)
    first = with_cache(HttpEmbedder("http://m", transport=transport), cache)
    assert first.embed("x").tolist() == [1.0, 2.0]
    dead, dead_calls = mock(lambda r: httpx.Response(503))
    second = with_cache(HttpEmbedder("http://m", transport=dead, sleep=lambda s: None), cache)
    assert second.embed("x").tolist() == [1.0, 2.0]
    assert len(calls) == 1 and dead_calls == []


def test_cached_nli_matches_uncached(tmp_path):
    nli = StubNli({("a", "b"): NliScores(1, 90, 9)})
    cached = with_cache(nli, DiskCache(tmp_path))
    assert cached.nli("a", "b") == nli.nli("a", "b")
    assert cached.nli("a", "b") == nli.nli("a", "b")
