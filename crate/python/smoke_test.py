"""Smoke test for the Python bindings.

Build and install first:

    maturin develop --release    # or: pip install . --no-build-isolation

then run `python python/smoke_test.py` from the repository root.
"""

import pathlib
import tempfile

import mutagoal

ROOT = pathlib.Path(__file__).resolve().parent.parent
BANK = ROOT / "fixtures" / "bank-account"


def main():
    summary = mutagoal.check(str(BANK))
    assert summary["tests"] == 1 and summary["failing"] == [], summary

    failing = mutagoal.check(str(ROOT / "fixtures" / "seeded-failure"))["failing"]
    assert [f["test"] for f in failing] == ["AccountTest.testDepositWithoutPin"], failing

    mutants = mutagoal.mutants(str(BANK))
    assert len(mutants) == 10
    assert len(mutagoal.mutants(str(BANK), ops="AOR")) == 2

    focal = mutagoal.focal(str(BANK))
    withdraw = [t for t in focal["tests"] if t["test_id"] == "AccountTest.testWithdraw"]
    assert withdraw[0]["focal_methods"] == ["Account.withdraw"], withdraw

    with tempfile.TemporaryDirectory() as tmp:
        for strategy in ("full", "class", "focal"):
            result = mutagoal.run(str(BANK), strategy=strategy, out=tmp, jobs=2)
            assert result["mutants"] == 10, result
        report = mutagoal.report(tmp)
        focal_total = [r for r in report["rows"] if r["class"] is None and r["technique"] == "focal"]
        assert focal_total[0]["false_negatives"] == 0, focal_total
        table = mutagoal.report(tmp, format="table")
        assert "Total" in table
        try:
            mutagoal.run(str(ROOT / "fixtures" / "seeded-failure"), out=tmp)
        except RuntimeError as e:
            assert "testDepositWithoutPin" in str(e)
        else:
            raise AssertionError("precheck did not fail")

    print("python smoke test ok")


if __name__ == "__main__":
    main()
