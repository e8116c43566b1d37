"""Smoke test for the qcorr Python extension.

Build the module first:

    cargo build --release -p qcorr-py --features extension-module

then run `python3 python/smoke_test.py`. The script copies the built
shared library next to a temporary `qcorr.so` and imports it.
"""

import importlib
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libqcorr_py.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "qcorr.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("qcorr")
    sys.exit("libqcorr_py.so not found; build with: cargo build --release -p qcorr-py --features extension-module")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    qc = load_module()

    s = qc.State.parse("w_mixture:n=3,f=0.5")
    assert s.num_parties == 3 and not s.is_dense
    scan = qc.pauli_covariance_scan(s)
    assert len(scan["values"]) == 27 and scan["max_abs"] < 1e-10

    post, q, fid = qc.distill(s, 0.25)
    close(q, 0.15625, 1e-12)
    close(fid, 0.8, 1e-12)
    close(qc.covariance(post, "ZZZ"), qc.wmix_closed_form(3, 0.8)[1], 1e-10)

    q_closed = (1 / 1.8) * (0.1 / 0.9)
    close(qc.q_of_fidelity(3, 0.9), q_closed, 1e-12)
    try:
        qc.q_of_fidelity(3, 0.3)
    except qc.DomainError:
        pass
    else:
        raise AssertionError("expected DomainError")

    assert qc.degree_of_correlations(qc.State.named("parity_even", 4)) == 4
    pair = qc.State.parse("bell:psi+").tensor(qc.State.parse("bell:psi+"))
    assert sorted(len(f) for f in qc.factorize(pair)) == [2, 2]
    report = qc.analyze(qc.State.parse("example2_tripartite"))
    assert report["genuine"] and all(not c["product"] for c in report["cuts"])

    best = qc.best_work(s)
    close(best["work_bits"], 0.4502, 1e-3)
    dw = qc.delta_w(s)
    close(dw["delta_w_bits"], 0.100, 2e-3)

    h = lambda x: -x * math.log2(x) - (1 - x) * math.log2(1 - x)
    protocol = (
        '{"steps": [{"op": "dephase_broadcast", "party": 0, "basis": "x"},'
        ' {"op": "conditional_unitary", "party": 1, "table": {"0": "x*h", "1": "x*h"}},'
        ' {"op": "collect", "destination": 0}]}'
    )
    r = qc.run_protocol(qc.State.parse("bell_diag_example"), protocol)
    close(r["work_bits"], 1 - h(5 / 6), 1e-9)

    rep = qc.run_scenario('{"scenario": "split_party", "state": "w_mixture:n=3,f=0.5"}')
    assert rep["verdicts"][0]["status"] == "violated"

    dense = s.densified()
    close(dense.trace_distance(qc.State.from_json(s.to_json())), 0.0, 1e-12)
    m = dense.to_matrix()
    assert len(m) == 8 and abs(sum(m[i][i] for i in range(8)) - 1) < 1e-12
    print(f"qcorr {qc.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
