"""Smoke test for the opacity_py extension on the running example.

Build the module first (see README), then run:
    python3 python/smoke_test.py
"""

import pathlib
import sys

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import opacity_py  # noqa: E402

FIXTURES = HERE.parent / "fixtures"


def read(name):
    return (FIXTURES / name).read_text()


def main():
    model = opacity_py.Model(read("run.json"))
    assert model.states == [str(i) for i in range(8)], model.states
    assert model.secret == ["7"]
    assert model.verify_open_loop().opaque

    # the open-loop intruder cannot tell much after `a`; the controlled one can
    assert model.open_loop_estimate(["a"], ["a", "b"]) == [str(i) for i in range(1, 8)]
    assert opacity_py.estimate(model, read("flow_example2.trace")) == ["7"]
    assert opacity_py.estimate(model, read("flow_initial.trace")) == ["0"]
    flipped = opacity_py.estimate(model, read("flow_decision_triggered.trace"), mode="decision")
    assert flipped == ["5", "6", "7"], flipped

    leaky = opacity_py.verify(model, read("srun.json"))
    assert not leaky.opaque
    assert leaky.counterexample == ["a", "u1", "u2", "u2"], leaky
    assert opacity_py.verify(model, read("srun.json"), mode="decision").opaque
    assert opacity_py.verify(model, read("srun_prime.json")).opaque

    for mode in ("observation", "decision"):
        structures = opacity_py.synthesize(model, mode=mode, policy="locally_maximal")
        assert len(structures) == 1
        s = structures[0]
        assert s.mode == mode
        assert s.verify().opaque
        assert s.decide([]) is not None
        again = opacity_py.Structure.from_json(model, s.to_json())
        assert again.to_json() == s.to_json()
        assert s.to_dot().startswith("digraph")

    try:
        opacity_py.synthesize(model, size_guard=5)
    except ValueError as err:
        assert "size guard" in str(err)
    else:
        raise AssertionError("size guard did not trip")

    try:
        opacity_py.Model("{")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed model accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
