#!/usr/bin/env python3
"""Independent reference oracle for the cweth-core known-answer fixtures.

Plain Python integers and pycryptodome's Keccak; shares no code with the
Rust crate. Regenerate with:

    python3 crates/core/fixtures/oracle.py

Writes the Poseidon parameter asset (data/poseidon_t3.json) and the
known-answer files in fixtures/.
"""

import json
import os

from Crypto.Hash import keccak as _keccak

HERE = os.path.dirname(os.path.abspath(__file__))

Q = 21888242871839275222246405745257275088548364400416034343698204186575808495617
L = 2736030358979909402780800718157159386076813972158567259200215660948447373041
A = 168700
D = 168696
BASE8 = (
    5299619240641551281634865583518297030282874472190772894086521144482721001553,
    16950150798460657717958625567821834550301663161624707787222815936182638968203,
)


def keccak(data: bytes) -> bytes:
    h = _keccak.new(digest_bits=256)
    h.update(data)
    return h.digest()


def hx(v: int) -> str:
    return "0x%064x" % v


# ---------------------------------------------------------------- poseidon

class Grain:
    def __init__(self, field, sbox, n, t, rf, rp):
        bits = []
        for value, width in ((field, 2), (sbox, 4), (n, 12), (t, 12), (rf, 10), (rp, 10)):
            bits += [int(b) for b in bin(value)[2:].zfill(width)]
        bits += [1] * 30
        self.state = bits
        for _ in range(160):
            self._step()

    def _step(self):
        s = self.state
        b = s[62] ^ s[51] ^ s[38] ^ s[23] ^ s[13] ^ s[0]
        s.pop(0)
        s.append(b)
        return b

    def bit(self):
        while True:
            first = self._step()
            second = self._step()
            if first == 1:
                return second

    def bits(self, n):
        v = 0
        for _ in range(n):
            v = (v << 1) | self.bit()
        return v


def poseidon_params(t=3, rf=8, rp=57, n=254):
    g = Grain(1, 0, n, t, rf, rp)
    constants = []
    while len(constants) < (rf + rp) * t:
        v = g.bits(n)
        if v < Q:
            constants.append(v)
    while True:
        xs_ys = [g.bits(n) % Q for _ in range(2 * t)]
        if len(set(xs_ys)) != 2 * t:
            continue
        xs, ys = xs_ys[:t], xs_ys[t:]
        if any((x + y) % Q == 0 for x in xs for y in ys):
            continue
        mds = [[pow(x + y, Q - 2, Q) for y in ys] for x in xs]
        return constants, mds


CONSTANTS, MDS = poseidon_params()


def poseidon2(a: int, b: int) -> int:
    t, rf, rp = 3, 8, 57
    state = [0, a % Q, b % Q]
    for r in range(rf + rp):
        state = [(s + CONSTANTS[r * t + i]) % Q for i, s in enumerate(state)]
        if r < rf // 2 or r >= rf // 2 + rp:
            state = [pow(s, 5, Q) for s in state]
        else:
            state[0] = pow(state[0], 5, Q)
        state = [sum(MDS[i][j] * state[j] for j in range(t)) % Q for i in range(t)]
    return state[0]


# ---------------------------------------------------------------- curve

def on_curve(p):
    x, y = p
    return (A * x * x + y * y - 1 - D * x * x * y * y) % Q == 0


def add(p1, p2):
    x1, y1 = p1
    x2, y2 = p2
    k = D * x1 * x2 * y1 * y2 % Q
    x3 = (x1 * y2 + y1 * x2) * pow(1 + k, Q - 2, Q) % Q
    y3 = (y1 * y2 - A * x1 * x2) * pow(1 - k, Q - 2, Q) % Q
    return (x3, y3)


def mul(s, p):
    acc = (0, 1)
    for bit in bin(s)[2:]:
        acc = add(acc, acc)
        if bit == "1":
            acc = add(acc, p)
    return acc


def sqrt_mod(n):
    n %= Q
    if n == 0:
        return 0
    if pow(n, (Q - 1) // 2, Q) != 1:
        return None
    s, qq = 0, Q - 1
    while qq % 2 == 0:
        s += 1
        qq //= 2
    z = 5
    while pow(z, (Q - 1) // 2, Q) != Q - 1:
        z += 1
    m, c, t, r = s, pow(z, qq, Q), pow(n, qq, Q), pow(n, (qq + 1) // 2, Q)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % Q
            i += 1
        b = pow(c, 1 << (m - i - 1), Q)
        m, c, t, r = i, b * b % Q, t * b * b % Q, r * b % Q
    return r


def derive_h():
    counter = 0
    while True:
        digest = keccak(b"cWETH:H" + counter.to_bytes(4, "big"))
        y = int.from_bytes(digest, "big") % Q
        num = (1 - y * y) % Q
        den = (A - D * y * y) % Q
        if den != 0:
            x = sqrt_mod(num * pow(den, Q - 2, Q))
            if x is not None:
                x = min(x, Q - x)
                p = mul(8, (x, y))
                if p != (0, 1) and mul(L, p) == (0, 1):
                    return counter, p
        counter += 1


# ---------------------------------------------------------------- kdf

def kdf_struct_hash(address: bytes) -> bytes:
    typehash = keccak(b"KDF(address cWETHAddress)")
    return keccak(typehash + bytes(12) + address)


def derive_sk(signature: bytes) -> int:
    return int.from_bytes(keccak(keccak(signature)), "big") % L


def test_sign(seed: bytes, digest: bytes) -> bytes:
    c0 = keccak(seed + digest)
    c1 = keccak(c0)
    c2 = keccak(c1)
    return c0 + c1 + c2[:1]


def main():
    data_dir = os.path.join(HERE, "..", "data")
    with open(os.path.join(data_dir, "poseidon_t3.json"), "w") as f:
        json.dump(
            {
                "t": 3,
                "full_rounds": 8,
                "partial_rounds": 57,
                "alpha": 5,
                "round_constants": [hx(c) for c in CONSTANTS],
                "mds": [[hx(v) for v in row] for row in MDS],
            },
            f,
            indent=1,
        )
        f.write("\n")

    pairs = [(0, 0), (1, 2), (0, 1), (Q - 1, Q - 1), (12345678901234567890, 98765432109876543210),
             (int.from_bytes(keccak(b"a"), "big") % Q, int.from_bytes(keccak(b"b"), "big") % Q)]
    pos = [{"a": hx(a), "b": hx(b), "out": hx(poseidon2(a, b))} for a, b in pairs]

    inputs = [b"", b"abc", bytes(range(200)), b"KDF(address cWETHAddress)", bytes(136), bytes(137),
              b"The quick brown fox jumps over the lazy dog"]
    kec = [{"input": "0x" + i.hex(), "digest": "0x" + keccak(i).hex()} for i in inputs]

    scalars = [1, 2, 3, 7, 0xDEADBEEF, L - 1, int.from_bytes(keccak(b"scalar"), "big") % L]
    muls = []
    for s in scalars:
        p = mul(s, BASE8)
        assert on_curve(p)
        muls.append({"scalar": hx(s), "x": hx(p[0]), "y": hx(p[1])})

    counter, h = derive_h()
    assert on_curve(h)

    zero_addr = bytes(20)
    addr = bytes.fromhex("1111111111111111111111111111111111111111")
    seed = b"alice"
    sig = test_sign(seed, kdf_struct_hash(addr))
    sk = derive_sk(sig)
    pk = mul(sk, BASE8)

    sk_b = derive_sk(test_sign(b"bob", kdf_struct_hash(addr)))
    pk_b = mul(sk_b, BASE8)
    shared = mul(sk, pk_b)
    assert shared == mul(sk_b, pk)
    kx = shared[0]
    nonce = 42
    mask = (kx + poseidon2(kx, nonce)) % Q

    with open(os.path.join(HERE, "poseidon_kat.json"), "w") as f:
        json.dump(pos, f, indent=1)
        f.write("\n")
    with open(os.path.join(HERE, "keccak_kat.json"), "w") as f:
        json.dump(kec, f, indent=1)
        f.write("\n")
    with open(os.path.join(HERE, "protocol_kat.json"), "w") as f:
        json.dump(
            {
                "generator_h": {"counter": counter, "x": hx(h[0]), "y": hx(h[1])},
                "base8_mul": muls,
                "kdf": {
                    "zero_address_struct_hash": "0x" + kdf_struct_hash(zero_addr).hex(),
                    "signature_01_private_key": hx(derive_sk(b"\x01")),
                    "address": "0x" + addr.hex(),
                    "signer_seed": "0x" + seed.hex(),
                    "signature": "0x" + sig.hex(),
                    "sk": hx(sk),
                    "pk": [hx(pk[0]), hx(pk[1])],
                },
                "dh": {
                    "peer_seed": "0x" + b"bob".hex(),
                    "peer_sk": hx(sk_b),
                    "shared_x": hx(kx),
                    "nonce": hx(nonce),
                    "mask": hx(mask),
                },
            },
            f,
            indent=1,
        )
        f.write("\n")


if __name__ == "__main__":
    main()
