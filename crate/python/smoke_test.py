"""Builds the extension module and exercises its public surface."""

import os
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build():
    subprocess.run(["cargo", "build", "--release", "-p", "kolmo-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libkolmo_py.so"
    dest = pathlib.Path(tempfile.mkdtemp()) / "kolmo.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))


def main():
    if os.environ.get("KOLMO_SKIP_BUILD") is None:
        build()
    import kolmo

    assert len(kolmo.layout_hash()) == 16

    succ = kolmo.Term("S")
    assert succ.arity == 1
    out = succ.eval([41])
    assert out["status"] == "value" and out["value"] == 42, out
    one = kolmo.Term("C[S; Z(0)]")
    assert one.arity == 0 and one.eval()["value"] == 1
    assert kolmo.Term.from_index(one.index()) == one
    assert one.encoded_len() == len(one.bits())

    big = succ.eval([2**100])
    assert big["value"] == 2**100 + 1

    try:
        kolmo.Term("Q[")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed term accepted")

    rec = kolmo.k_exp(5, m_max=4096)
    assert rec["k_value"] is not None

    sm = kolmo.Semimeasure(20)
    assert 0 < sm.total <= 1
    assert sm.prob(0) > sm.prob(1000)
    num, log2_den = sm.prob_exact(0)
    assert abs(num / 2**log2_den - sm.prob(0)) < 1e-15
    assert len(sm) > 0

    counts = kolmo.extract_numbers("seven, 7 and twelve")
    assert counts[7] == 2 and counts[12] == 1

    scan = kolmo.spurious_scan(population=10_000, groups=4, outcomes=20, seed=1)
    assert len(scan["records"]) == 4 * 20

    traj = kolmo.integrate("circular", steps=100, stride=10)
    assert len(traj["samples"]) == 11 and traj["aborted"] is None

    assert kolmo.lz_upper_bound(b"abababab")["total_bits"] > 0
    print("python smoke test passed")


if __name__ == "__main__":
    main()
