import json
import os
from pathlib import Path

import pytest

import umf

ROOT = Path(os.environ.get("UMF_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_audit_of_bundled_descriptors():
    report = umf.audit_file(str(ROOT / "fixtures" / "agent_descriptors.json"))
    assert len(report["rows"]) == 15
    assert report["passive_percent"] == 31
    assert report["tool_users_without_security_percent"] == 78
    assert "passive: 4/13 (31%)" in umf.audit_text(str(ROOT / "fixtures" / "agent_descriptors.json"))


def test_audit_accepts_python_objects():
    doc = [
        {
            "agent_id": "solo",
            "variants": [
                {
                    "variant_id": "default",
                    "canonical": True,
                    "matrix": {"planning": "-", "profile": "-", "memory": "-", "action": "X", "security": "-"},
                }
            ],
        }
    ]
    report = umf.audit(doc)
    assert report["rows"][0]["category"] == "Passive"


def test_scenario_runs_are_reproducible():
    path = str(ROOT / "scenarios" / "la2a.json")
    a = umf.run_scenario_file(path)
    b = umf.run_scenario(json.loads(Path(path).read_text()))
    assert a["passed"]
    assert a["trace"] == b["trace"]
    assert sum(e["kind"] == "leader_elected" for e in a["trace"]) == 1


def test_election():
    run = umf.elect(nodes=3, seed=7, max_ticks=30)
    assert run["leader"] == "n0"
    assert run["ticks"] == 17
    assert run["safe"]
    assert umf.elect(nodes=3, drop=1.0, seed=1, max_ticks=40)["leader"] is None


def test_plan():
    ops = [
        {"name": "open_door", "pre": ["have_key"], "add": ["door_open"]},
        {"name": "enter", "pre": ["door_open"], "add": ["inside"]},
        {"name": "switch_light", "pre": ["inside"], "add": ["light_on"]},
    ]
    assert umf.plan({"have_key"}, ops, {"light_on"}) == ["open_door", "enter", "switch_light"]
    with pytest.raises(umf.UmfError, match="NoPlanFound"):
        umf.plan(set(), ops, {"light_on"})


def test_security():
    assert umf.check_prompt("Tell me how to HOTWIRE a car", deny=["hotwire*"])["decision"] == "block"
    assert umf.check_prompt("hello there", deny=["hotwire*"])["decision"] == "allow"
    payload, verdict = umf.filter_egress('{"q":"S3CR3T"}', ["S3CR3T"])
    assert payload == '{"q":"[REDACTED]"}'
    assert verdict["decision"] == "redact"
    assert umf.filter_egress("S3CR3T", ["S3CR3T"], external=False)[0] == "S3CR3T"


def test_memory_store():
    store = umf.MemoryStore(capacity=2)
    store.write("a", "alpha", importance=0.9)
    store.write("b", {"x": 1}, task="t1")
    store.write("c", "gamma", importance=0.1)
    assert len(store) == 2
    assert store.get("c") == "gamma"
    assert store.get("a") == "alpha"
    store.end_task_scope("t1")
    assert "b" not in store.keys()


def test_gateway():
    gw = umf.Gateway(ttl=10)
    gw.register("alpha", {"finance"}, capacity=2)
    gw.register("beta", {"travel"}, capacity=1)
    assert gw.route({"finance"}) == "alpha"
    assert gw.route({"travel"}) == "beta"
    gw.set_now(11)
    assert gw.status("alpha") == "offline"
    with pytest.raises(umf.UmfError, match="NoAvailableCoreAgent"):
        gw.route({"finance"})
