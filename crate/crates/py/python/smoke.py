"""Smoke test for the dsess_py extension module.

Install the module with `pip install crates/py` (maturin builds it), or
build it in place:

    cargo build -p dsess-py --features extension-module --release
    cp target/release/libdsess_py.so crates/py/python/dsess_py.so

then run `python3 crates/py/python/smoke.py`.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import dsess_py  # noqa: E402

CORPUS = pathlib.Path(__file__).resolve().parents[3] / "corpus"


def main() -> None:
    hello = (CORPUS / "hello.mps").read_text()

    ok = dsess_py.check(hello)
    assert ok == {"ok": True, "main_type": "unit"}, ok

    bad = dsess_py.check(hello.replace("brecv(c)", "recv(c)"))
    assert not bad["ok"] and bad["diagnostic"]["code"] == "protocol-head-mismatch", bad

    out = dsess_py.run(hello, seed=7, checked=True)
    assert out["outcome"] == "AllDone", out
    assert [e["kind"] for e in out["trace"] if e["kind"] != "lift"] == ["fork", "bmsg", "bmsg", "end", "gc"]
    assert dsess_py.run(hello, seed=7, checked=True) == out

    snaps = dsess_py.analyze((CORPUS / "cloud.mps").read_text(), seed=1)
    assert snaps and all(s["relaxed"] and s["df_reducible"] for s in snaps)

    try:
        dsess_py.run((CORPUS / "mutants" / "reuse_endpoint.mps").read_text())
    except ValueError as e:
        assert "linear-var-reused" in str(e), e
    else:
        raise AssertionError("an ill-typed program ran")

    v = dsess_py.entails("0 in s", props=["s = {0, 1}"], universe=[0, 1, 2], set_vars=["s"])
    assert v == {"verdict": "valid"}, v
    v = dsess_py.entails("n < 3", int_vars=["n"])
    assert v["verdict"] == "invalid" and int(v["counterexample"]["n"]) >= 3, v

    crossed = [[(0, [0]), (1, [1])], [(0, [1]), (1, [0])]]
    assert dsess_py.reducibility(crossed) == {
        "relaxed": False,
        "df_reducible": False,
        "df_reducible_graph": False,
    }
    print("dsess_py smoke test passed")


if __name__ == "__main__":
    main()
