import json
import pathlib

import pytest

import awb

MODELS = pathlib.Path(__file__).resolve().parents[2] / "models"


def test_ring_of_three():
    sys = awb.philosophers(3)
    assert sys.components == ["p1", "f1", "p2", "f2", "p3", "f3"]
    bfs = awb.check(sys)
    assert bfs["reachable"] == 26
    assert bfs["deadlocks"] == [{"p1": "1", "f1": "r", "p2": "1", "f2": "r", "p3": "1", "f3": "r"}]
    misa = awb.check(sys, algo="misa", mode="atomic", stable=True)
    assert misa["explored"] == 20
    assert misa["elapsed_ms"] == 0


def test_variants_and_budget():
    assert len(awb.check(awb.philosophers(3, "nondet"))["deadlocks"]) == 8
    with pytest.raises(awb.ResourceError) as caught:
        awb.check(awb.scheduler(3), max_states=10)
    partial = json.loads(caught.value.args[1])
    assert partial["complete"] is False
    with pytest.raises(awb.InputError):
        awb.philosophers(1)
    with pytest.raises(ValueError):
        awb.philosophers(3, "bogus")


def test_algebra():
    f = awb.load_model(str(MODELS / "philosophers3.awb"))
    p, q = f.automaton("P"), f.automaton("Q")
    pq = awb.bind(p, q, 1, 0)
    assert pq.num_states == 12
    assert awb.reachable(awb.evaluate(f.system("phil3"))).num_states == 26
    assert awb.isomorphic(awb.product(p, q), awb.product(p, q))
    assert not awb.language_equivalent(p, q)
    assert p.is_linear() and not pq.is_linear()
    assert ("0", "1", ["lock", "tau"]) in p.motions()


def test_model_file():
    f = awb.load_model(str(MODELS / "philosophers3.awb"))
    assert "phil3" in f.systems
    assert f.verify_simulation("p_prime_to_p") == {"verified": True, "liftings": 14}
    bad = f.verify_simulation("p_dprime_to_p_prime")
    assert bad["verified"] is False and bad["state"] == "0"
    again = awb.parse_model(f.render(), "again.awb")
    assert again.systems == f.systems
    with pytest.raises(awb.InputError, match="again.awb:1"):
        awb.parse_model("automaton {", "again.awb")


def test_protocol():
    ev = awb.reachable(awb.evaluate(awb.ack_protocol("cap1", 2)))
    mp = awb.load_model(str(MODELS / "protocol2.awb")).automaton("MP_M")
    assert awb.language_equivalent(ev, mp)
    assert awb.check(awb.ack_protocol("lossy", 1))["deadlocks"]
