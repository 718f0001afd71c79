"""Builds the extension module with cargo and exercises it end to end.

Run from anywhere: python3 python/smoke_test.py
"""

import importlib.util
import json
import os
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def build_module(dest):
    subprocess.run(["cargo", "build", "-p", "alignforge-py"], cwd=ROOT, check=True)
    target = pathlib.Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    lib = target / "debug" / "libalignforge.so"
    so = pathlib.Path(dest) / ("alignforge" + sysconfig.get_config_var("EXT_SUFFIX"))
    shutil.copy(lib, so)
    found = importlib.util.spec_from_file_location("alignforge", so)
    module = importlib.util.module_from_spec(found)
    found.loader.exec_module(module)
    return module


def main():
    with tempfile.TemporaryDirectory() as tmp:
        af = build_module(tmp)

        t = af.Term("inv(inv(chain(ex:p, inv(ex:q))))", [("ex", "http://example.org/")])
        n = t.normalized()
        assert str(n) == "chain(ex:p, inv(ex:q))", str(n)
        assert t.equivalent(n) and t != n and n == n.normalized()
        try:
            af.Term("and((")
        except af.AlignforgeError as e:
            assert e.args[0] == "malformed_term", e.args
        else:
            raise AssertionError("malformed term accepted")

        ws = af.Workspace(str(FIXTURES))
        cands = ws.candidates()
        assert len(cands) == 10, cands
        assert cands[2].tau == "emmo-semiotics:sign"
        assert ws.check(1)["logical"] == "derivable"
        assert any(p["text"] == "viso:model_object ⊑ emmo-graphical:symbolic" for p in ws.suggest(4, "strengthen"))

        ws.replay((FIXTURES / "sessions" / "golden-session.jsonl").read_text())
        assert ws.candidate(3).status == "discarded"
        assert ws.candidate(6).merged_into == 5
        ttl, rules = ws.artifacts()
        assert rules.count("rule corr_") == 2

        reference = (FIXTURES / "expected" / "alignment.ttl").read_text()
        m = af.metrics(ttl, reference)
        assert (m["precision"], m["recall"], m["fMeasure"]) == (1.0, 1.0, 1.0), m
        empty = af.metrics("", reference)
        assert empty["precision"] is None and empty["recall"] == 0.0, empty

        fresh = af.Workspace(str(FIXTURES))
        c = fresh.decide(3, "discard", reason="not a sign", timestamp="2020-06-01T00:00:00Z")
        assert c.status == "discarded"
        try:
            fresh.decide(3, "accept")
        except af.AlignforgeError as e:
            assert e.args[0] == "illegal_transition", e.args
        else:
            raise AssertionError("accepted a discarded candidate")
        assert json.loads(fresh.log_jsonl())["action"] == "discard"

        report = af.tier_check(str(FIXTURES))
        assert report["violations"] == [], report["violations"]

    print("python smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
