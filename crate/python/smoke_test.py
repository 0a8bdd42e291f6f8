"""Smoke test for the pyfpp extension.

Build it with `cargo build --release -p pyfpp`, then run this script; it
finds target/release/libpyfpp.so on its own.
"""

import importlib.machinery
import importlib.util
import pathlib
import sys


def load():
    root = pathlib.Path(__file__).resolve().parent.parent
    so = root / "target" / "release" / "libpyfpp.so"
    if not so.exists():
        sys.exit(f"missing {so}; run `cargo build --release -p pyfpp` first")
    loader = importlib.machinery.ExtensionFileLoader("pyfpp", str(so))
    spec = importlib.util.spec_from_file_location("pyfpp", so, loader=loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


def main():
    fpp = load()

    a = fpp.Vector(list(range(1, 9)) + list(range(10, 30)))
    b = a.with_push_back(30)
    assert len(a) == 28 and len(b) == 29 and b[-1] == 30

    z = a.iter_at(7)
    y = z.copy()
    y.advance()
    y.insert(9)
    assert y.value().to_list() == list(range(1, 30))
    assert z.get() == 8 and len(a) == 28

    s = fpp.SortedSet([5, 1, 9, 3, 1])
    assert s.to_list() == [1, 3, 5, 9] and 3 in s and s.lower_rank(4) == 2
    t = s.with_insert(4)
    assert 4 in t and 4 not in s
    assert s.as_vector() == [1, 3, 5, 9]

    m = fpp.SortedMap([(2, 20), (1, 10)])
    m[3] = 30
    del m[1]
    assert m.items() == [(2, 20), (3, 30)] and m.get(1) is None
    try:
        m[7]
    except KeyError:
        pass
    else:
        raise AssertionError("missing key did not raise")

    u = fpp.Utf8String("héllo")
    assert len(u) == 5 and u.byte_size() == 6 and u[1] == "é"
    u.push_str(" wörld")
    assert str(u) == "héllo wörld" and "".join(u) == "héllo wörld"
    assert str(u.slice(6, 11)) == "wörld"
    try:
        fpp.Utf8String.from_bytes([0x68, 0xC3])
    except ValueError as e:
        assert "offset 1" in str(e)
    else:
        raise AssertionError("invalid UTF-8 accepted")

    for x in (a, b, s, m, u):
        x.check()
    print("pyfpp smoke test ok")


if __name__ == "__main__":
    main()
