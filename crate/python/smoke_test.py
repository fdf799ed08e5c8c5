"""Exercises the Python bindings end to end against the bundled dataset.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import json
import math
import sys

import crypto_stackelberg as cs


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    inst = cs.bundled_dataset()
    assert len(inst.algorithm_ids) == 8, inst.algorithm_ids
    assert inst.attack_method_count == 38
    assert inst.scenario_budgets == [11.0, 15.0, 20.0, 25.0, 30.0]

    again = cs.Instance.from_json(inst.to_json())
    assert again.to_json() == inst.to_json()

    rsa = cs.solve_attacker(inst, "RSA-2048", solver="dp")
    brute = cs.solve_attacker(inst, "RSA-2048", solver="brute")
    assert rsa["plan"]["methods"] == brute["plan"]["methods"]
    assert close(rsa["plan"]["utility"], 220.5, 1e-9)

    report = cs.solve_defender(inst, budget=40)
    assert close(report["objective"], 19.1217, 1e-3), report["objective"]
    assert math.isclose(sum(report["strategy"]), 1.0, abs_tol=1e-9)
    assert report["support_size"] <= report["binding_count"]

    robust = cs.solve_robust(inst, mode="regret")
    regrets = robust["result"]["per_scenario_regret"]
    assert all(r >= -1e-9 for r in regrets)
    assert close(max(regrets), robust["result"]["max_regret"], 1e-12)
    assert robust["regret_matrix"]["rows"][-1]["label"] == "minimax_regret"

    maximin = cs.solve_robust(inst, budgets=[11, 40], mode="maximin")
    assert len(maximin["result"]["scenario_values"]) == 2

    cmp = cs.baselines(inst, samples=5, seed=1)
    assert cmp["rows"][0]["label"] == "stackelberg"
    assert cmp == cs.baselines(inst, samples=5, seed=1)

    cal = cs.calibrate(time_limit=0.2, max_methods=10)
    assert cal["threshold"] <= 10 and len(cal["series"]) >= 1


    broken = json.loads(inst.to_json())
    broken["algorithms"][0]["attacks"][0]["success"] = 1.2
    try:
        cs.Instance.from_json(json.dumps(broken))
    except ValueError as e:
        assert "success" in str(e)
    else:
        raise AssertionError("invalid success probability accepted")

    infeasible = json.loads(inst.to_json())
    infeasible["budgets"]["resilience_min"] = 0.99
    try:
        cs.solve_defender(cs.Instance.from_json(json.dumps(infeasible)))
    except cs.InfeasibleError:
        pass
    else:
        raise AssertionError("infeasible budgets accepted")

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
