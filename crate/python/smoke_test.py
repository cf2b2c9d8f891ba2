"""Smoke test for the cci_py extension module.

Build and install it first, for example:
    pip install --no-build-isolation -e crates/python
then run:
    python python/smoke_test.py
"""

import csv
import io
import json
import math

import cci_py


def close(a, b, tol=1e-4):
    return abs(a - b) <= tol


def main():
    assert close(cci_py.sigma(0.9), 1.6, 1e-12)
    assert close(cci_py.score(0.9, 1), 0.0225 / 1.6, 1e-12)

    lo, hi = cci_py.cci_interval(0.8, 0.01)
    assert close(lo, 0.61262, 1e-3) and close(hi, 0.87738, 1e-3), (lo, hi)
    lo0, hi0 = cci_py.cci_interval(0.2, 0.01)
    assert close(lo0, 1 - hi, 1e-9) and close(hi0, 1 - lo, 1e-9)

    lo, hi = cci_py.naive_interval([0.2, 0.4, 0.6])
    assert close(lo, 0.23670, 1e-5) and close(hi, 0.56330, 1e-5), (lo, hi)

    assert cci_py.decide_interval(0.6, 0.9) == "UTI"
    assert cci_py.decide_interval(0.3, 0.8) == "ABSTAIN"
    assert cci_py.decide_interval(0.1, 0.4) == "NO_UTI"

    q = cci_py.calibrate([0.9, 0.2, 0.6, 0.4], [1, 0, 1, 0], 0.1, "split_conformal")
    assert math.isinf(q)
    q = cci_py.calibrate([0.9, 0.2, 0.6, 0.4], [1, 0, 1, 0], 0.1, "paper_eq4")
    assert q > 0

    text = cci_py.synthetic_features_csv()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 117
    assert sum(r["label"] == "1" for r in rows) == 56
    assert text == cci_py.synthetic_features_csv(json.dumps({"seed": 42}))

    configs = [
        {"model": "random_guess", "uq": "none", "n_runs": 3},
        {"model": "logistic", "uq": "cci", "n_runs": 3},
    ]
    report = json.loads(cci_py.run_experiments(text, json.dumps(configs)))
    names = [m["method"] for m in report["methods"]]
    assert names == ["random_guess", "cci"], names
    assert len(report["methods"][1]["runs"]) == 3

    try:
        cci_py.sigma(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("sigma(1.5) should raise ValueError")

    print("cci_py smoke test passed")


if __name__ == "__main__":
    main()
