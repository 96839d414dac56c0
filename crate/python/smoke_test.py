"""Smoke test for the motkip Python extension.

Build and install first:  maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/motkip-*.whl
Run with:  python3 python/smoke_test.py   (or pytest python/)
"""

import json
import pathlib
import zlib

import motkip

VECTORS = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "vectors"


def rc4_ref(key, data):
    s = list(range(256))
    j = 0
    for i in range(256):
        j = (j + s[i] + key[i % len(key)]) & 0xFF
        s[i], s[j] = s[j], s[i]
    out = bytearray()
    i = j = 0
    for b in data:
        i = (i + 1) & 0xFF
        j = (j + s[i]) & 0xFF
        s[i], s[j] = s[j], s[i]
        out.append(b ^ s[(s[i] + s[j]) & 0xFF])
    return bytes(out)


def fields(line):
    return dict(tok.split("=", 1) for tok in line.split()[1:] if tok != "->")


def test_primitives_match_reference():
    data = bytes(range(200))
    assert motkip.rc4(b"Key", b"Plaintext") == rc4_ref(b"Key", b"Plaintext")
    assert motkip.rc4(bytes(16), data) == rc4_ref(bytes(16), data)
    assert motkip.crc32(data) == zlib.crc32(data).to_bytes(4, "little")
    for line in (VECTORS / "crypto.txt").read_text().splitlines():
        if line.startswith("MICHAEL"):
            f = fields(line)
            assert motkip.michael(bytes.fromhex(f["key"]), bytes.fromhex(f["msg"])).hex() == f["out"]


def test_keymix_vectors():
    checked = 0
    for line in (VECTORS / "keymix.txt").read_text().splitlines():
        f = fields(line) if line[:2] in ("P1", "P2") else None
        if f is None:
            continue
        tk = bytes.fromhex(f["tk"])
        if line.startswith("P1"):
            p1k = motkip.phase1(tk, bytes.fromhex(f["ta"]), int(f["iv32"], 16))
            assert "".join(f"{w:04x}" for w in p1k) == f["p1k"]
        else:
            p1k = [int(f["p1k"][i : i + 4], 16) for i in range(0, 20, 4)]
            assert motkip.phase2(p1k, tk, int(f["iv16"], 16)).hex() == f["seed"]
        checked += 1
    assert checked == 10


def test_flags_roundtrip():
    for octet in range(256):
        try:
            d = motkip.flags_decode(octet)
        except motkip.MotkipError:
            continue
        assert motkip.flags_encode(**d) == octet


def test_wep_regression():
    frame = motkip.wep_encrypt(bytes(range(1, 14)), 0xABCDEF, b"WEP-128 regression")
    assert frame.body.hex() == "172d96248c2c787436df11978d5f2d3392a8b1f72fee"
    assert motkip.wep_decrypt(bytes(range(1, 14)), frame) == b"WEP-128 regression"


def test_association_roundtrip_and_errors():
    keys = motkip.KeyMaterial(7)
    assert motkip.KeyMaterial.from_key_file(keys.to_key_file()).tk == keys.tk
    for scheme in ("plain", "wep", "tkip", "motkip"):
        tx = motkip.Association(scheme, "transmitter", keys)
        rx = motkip.Association(scheme, "receiver", keys)
        payload = bytes(i & 0xFF for i in range(3000))
        frames = tx.encap(payload, max_fragment=1024)
        assert len(frames) == 3
        wire = motkip.load(motkip.dump(frames))
        assert wire == frames
        out = [rx.decap(f) for f in wire]
        assert out[:2] == [None, None] and out[2] == payload
        if scheme in ("tkip", "motkip"):
            try:
                rx.decap(wire[0])
                raise AssertionError("replay accepted")
            except motkip.ReplayError:
                pass

    tx = motkip.Association("motkip", "tx", keys)
    rx = motkip.Association("motkip", "rx", keys)
    frames = tx.encap(b"hello, world")
    assert frames[0].kind == "motkip-first"
    wire = bytearray(frames[0].to_bytes())
    wire[-1] ^= 1
    try:
        rx.decap(motkip.Frame.parse("motkip-first", bytes(wire)))
        raise AssertionError("tampered frame accepted")
    except motkip.IntegrityError:
        pass
    try:
        motkip.Frame.parse("motkip-first", bytes(wire[:30]))
        raise AssertionError("truncated frame parsed")
    except motkip.MotkipError:
        pass
    assert rx.decap(frames[0]) == b"hello, world"
    assert rx.ops()["michael_octets"] > 0

    before = tx.next_tsc
    tx.encap(b"x")
    assert tx.next_tsc == before + 1

    tx.set_next_tsc(2**48 - 1)
    try:
        tx.encap(b"x" * 3000, max_fragment=1024)
        raise AssertionError("TSC space overrun")
    except motkip.MotkipError:
        pass
    for line in tx.events().splitlines():
        json.loads(line)

def test_run_session_and_sweep():
    row = motkip.run_session("motkip", 64, 500, seed=3, loss=0.05, reorder=4, corrupt=0.01)
    assert row["ledger_balances"]
    assert row["mic_failures"] == 0
    assert row["check_order_violations"] == 0
    assert row == motkip.run_session("motkip", 64, 500, seed=3, loss=0.05, reorder=4, corrupt=0.01)

    rows = motkip.sweep(1500, 200, seeds=[1, 2], threads=2)
    assert [r["scheme"] for r in rows[:4]] == ["plain", "wep", "tkip", "motkip"]
    serial = motkip.sweep(1500, 200, seeds=[1, 2], threads=1)
    assert rows == serial
    by = {r["scheme"]: r["on_air_octets"] for r in rows[:4]}
    assert by["plain"] < by["wep"] < by["motkip"] < by["tkip"]


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} passed")
