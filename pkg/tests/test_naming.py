import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dris import (
    DomainName,
    DrisError,
    Layer,
    NodeRegistry,
    SimClock,
    class_name,
    layer_of,
    parse_domain,
    resource_class,
    service_url,
)
from dris.models import empty_collection


def test_parse_known_domain():
    d = parse_domain("hust.edu.cn")
    assert d.labels == ("hust", "edu", "cn")
    assert d.text == "hust.edu.cn"


def test_parse_is_case_insensitive():
    assert parse_domain("HUST.Edu.CN").text == "hust.edu.cn"


@pytest.mark.parametrize(
    "bad",
    [
        "a..b",
        "",
        ".",
        "a.b.",
        ".a.b",
        "a_b.cn",
        "a b.cn",
        "-a.cn",
        "a-.cn",
        "a.b.c.d.e.f.g.h.i",  # 9 labels
        "x" * 64 + ".cn",
    ],
)
def test_parse_rejects_bad_domains(bad):
    with pytest.raises(DrisError) as err:
        parse_domain(bad)
    assert err.value.code == "BAD_DOMAIN"


def test_parse_accepts_limits():
    assert len(parse_domain("a.b.c.d.e.f.g.h").labels) == 8
    assert parse_domain("x" * 63 + ".cn").labels[0] == "x" * 63
    assert parse_domain("a-b.c0.cn").text == "a-b.c0.cn"


def test_class_name_examples():
    assert class_name(parse_domain("hust.edu.cn")) == "DRIS.cn.edu.hust"
    assert class_name(parse_domain("cn")) == "DRIS.cn"
    assert class_name(parse_domain("edu.cn")) == "DRIS.cn.edu"


def test_service_url_examples():
    assert service_url(parse_domain("hust.edu.cn")) == "http://DRIS.hust.edu.cn"
    assert service_url(parse_domain("cn")) == "http://DRIS.cn"


def test_service_url_round_trip():
    d = parse_domain("lib.hust.edu.cn")
    url = service_url(d)
    assert url.startswith("http://DRIS.")
    assert parse_domain(url[len("http://DRIS."):]) == d


def test_layer_of():
    assert layer_of(parse_domain("cn")) is Layer.COUNTRY
    assert layer_of(parse_domain("edu.cn")) is Layer.SUB_INTERNET
    assert layer_of(parse_domain("hust.edu.cn")) is Layer.ORGANIZATION
    assert layer_of(parse_domain("lib.hust.edu.cn")) is Layer.ORGANIZATION


def test_layer_of_parent_is_one_above():
    for text in ("edu.cn", "hust.edu.cn"):
        d = parse_domain(text)
        assert layer_of(d.parent()).value == layer_of(d).value - 1


def test_resource_class_examples():
    hust = parse_domain("hust.edu.cn")
    assert resource_class(hust, "webpage") == "DRIS.cn.edu.hust.webpage"
    assert resource_class(hust, "ftp") == "DRIS.cn.edu.hust.ftp"
    assert resource_class(parse_domain("cn"), "pdf") == "DRIS.cn.pdf"
    with pytest.raises(DrisError):
        resource_class(hust, "hologram")


def _random_domain(rng: random.Random) -> str:
    labels = []
    for _ in range(rng.randint(1, 8)):
        n = rng.randint(1, 12)
        chars = [rng.choice(string.ascii_lowercase + string.digits) for _ in range(n)]
        if n > 2 and rng.random() < 0.3:
            chars[rng.randint(1, n - 2)] = "-"
        labels.append("".join(chars))
    return ".".join(labels)


def test_round_trip_1000_random_domains():
    rng = random.Random(20040301)
    for _ in range(1000):
        text = _random_domain(rng)
        d = parse_domain(text)
        assert d.text == text
        assert parse_domain(d.text) == d
        # class name reversal is an involution
        reversed_labels = class_name(d)[len("DRIS."):].split(".")
        assert tuple(reversed(reversed_labels)) == d.labels


label = st.from_regex(r"[a-z0-9]([a-z0-9-]{0,10}[a-z0-9])?", fullmatch=True)


@settings(max_examples=200, deadline=None)
@given(st.lists(label, min_size=1, max_size=8))
def test_round_trip_property(labels):
    text = ".".join(labels)
    d = parse_domain(text)
    assert d.text == text
    assert class_name(d).startswith("DRIS.")


def test_class_name_injective_on_sample():
    rng = random.Random(42)
    domains = {_random_domain(rng) for _ in range(300)}
    names = {class_name(parse_domain(t)) for t in domains}
    assert len(names) == len(domains)


# -- registry ----------------------------------------------------------------


def _registry(owner: str = "edu.cn") -> NodeRegistry:
    return NodeRegistry(parse_domain(owner), SimClock(500))


def _cd(domain: str):
    return empty_collection(parse_domain(domain))


def test_registry_accepts_direct_child():
    reg = _registry("edu.cn")
    reg.register(parse_domain("hust.edu.cn"), "http://127.0.0.1:8301", _cd("hust.edu.cn"))
    assert parse_domain("hust.edu.cn") in reg
    assert reg.get(parse_domain("hust.edu.cn")).registered_at == 500


def test_registry_rejects_self():
    reg = _registry("edu.cn")
    with pytest.raises(DrisError) as err:
        reg.register(parse_domain("edu.cn"), "http://x", _cd("edu.cn"))
    assert err.value.code == "NOT_CHILD"


def test_registry_rejects_level_skip():
    reg = _registry("cn")
    with pytest.raises(DrisError) as err:
        reg.register(parse_domain("hust.edu.cn"), "http://x", _cd("hust.edu.cn"))
    assert err.value.code == "NOT_CHILD"


def test_registry_rejects_wrong_suffix():
    reg = _registry("edu.cn")
    with pytest.raises(DrisError) as err:
        reg.register(parse_domain("hust.com.cn"), "http://x", _cd("hust.com.cn"))
    assert err.value.code == "NOT_CHILD"


def test_registry_rejects_mismatched_collection_domain():
    reg = _registry("edu.cn")
    with pytest.raises(DrisError) as err:
        reg.register(parse_domain("hust.edu.cn"), "http://x", _cd("whu.edu.cn"))
    assert err.value.code == "BAD_DOMAIN"


def test_registry_upsert_keeps_count():
    reg = _registry("edu.cn")
    child = parse_domain("hust.edu.cn")
    reg.register(child, "http://old", _cd("hust.edu.cn"))
    reg.register(child, "http://new", _cd("hust.edu.cn"))
    assert len(reg) == 1
    assert reg.resolve(child) == "http://new"


def test_registry_resolve_falls_back_to_convention():
    reg = _registry("edu.cn")
    assert reg.resolve(parse_domain("whu.edu.cn")) == "http://DRIS.whu.edu.cn"


def test_registry_never_contains_non_child():
    rng = random.Random(9)
    reg = _registry("edu.cn")
    accepted = 0
    for _ in range(200):
        text = _random_domain(rng)
        d = parse_domain(text)
        try:
            reg.register(d, "http://x", empty_collection(d))
            accepted += 1
        except DrisError:
            pass
    for entry in reg.children():
        assert entry.domain.is_child_of(parse_domain("edu.cn"))
    assert len(reg) <= accepted


def test_parent_of_single_label_fails():
    with pytest.raises(DrisError):
        parse_domain("cn").parent()


def test_domain_is_frozen_value():
    d = parse_domain("edu.cn")
    assert d == DomainName(("edu", "cn"))
    assert hash(d) == hash(DomainName(("edu", "cn")))
