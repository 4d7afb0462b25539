"""Convert the CRAN rrecsys package's ml100k.rda into MovieLens u.data format.

Parses the R serialization (XDR v2/v3) directly; only the subset of the
format needed for a saved rating matrix is implemented. The `ml100k` object
is a dense 943x1682 integer matrix holding the complete MovieLens-100k
ratings (0 = unrated); row/column indices are the original 1-based ids.
Timestamps are not preserved in the matrix, so the output writes 0 in the
timestamp column (nothing downstream reads it).

Usage: python3 ml100k_rda_to_udata.py ml100k.rda u.data
"""
import bz2
import gzip
import lzma
import struct
import sys


class RSexp:
    def __init__(self, kind, value=None, attrs=None, tag=None):
        self.kind = kind
        self.value = value
        self.attrs = attrs or {}
        self.tag = tag

    def __repr__(self):
        return f"RSexp({self.kind}, attrs={list(self.attrs)})"


NILVALUE = 254
REFSXP = 255
ALTREP = 238
SYMSXP = 1
LISTSXP = 2
CHARSXP = 9
LGLSXP = 10
INTSXP = 13
REALSXP = 14
STRSXP = 16
VECSXP = 19
RAWSXP = 24
S4SXP = 25


class Reader:
    def __init__(self, buf):
        self.buf = buf
        self.off = 0
        self.refs = []

    def i4(self):
        v = struct.unpack_from(">i", self.buf, self.off)[0]
        self.off += 4
        return v

    def f8(self):
        v = struct.unpack_from(">d", self.buf, self.off)[0]
        self.off += 8
        return v

    def raw(self, n):
        v = self.buf[self.off : self.off + n]
        self.off += n
        return v

    def header(self):
        magic = self.raw(5)
        if magic not in (b"RDX2\n", b"RDX3\n"):
            raise ValueError(f"not an rda file: {magic!r}")
        fmt = self.raw(2)
        if fmt != b"X\n":
            raise ValueError(f"only XDR format supported, got {fmt!r}")
        version = self.i4()
        self.i4()  # writer R version
        self.i4()  # minimal reader R version
        if version >= 3:
            enc_len = self.i4()
            self.raw(enc_len)

    def read(self):
        flags = self.i4()
        ptype = flags & 255
        has_attr = bool(flags & (1 << 9))
        has_tag = bool(flags & (1 << 10))

        if ptype == NILVALUE or ptype == 0:
            return None
        if ptype == REFSXP:
            idx = flags >> 8
            if idx == 0:
                idx = self.i4()
            return self.refs[idx - 1]
        if ptype == SYMSXP:
            name = self.read()  # CHARSXP
            sym = RSexp("symbol", value=name.value)
            self.refs.append(sym)
            return sym
        if ptype == CHARSXP:
            n = self.i4()
            if n == -1:
                return RSexp("char", value=None)
            return RSexp("char", value=self.raw(n).decode("utf-8", "replace"))
        if ptype == LISTSXP:
            attrs = self.read_attrs() if has_attr else {}
            tag = self.read() if has_tag else None
            car = self.read()
            cdr = self.read()
            cell = RSexp("pairlist", value=(car, cdr), attrs=attrs, tag=tag)
            return cell
        if ptype in (LGLSXP, INTSXP):
            n = self.i4()
            vals = [self.i4() for _ in range(n)]
            return self.with_attrs(RSexp("int", value=vals), has_attr)
        if ptype == REALSXP:
            n = self.i4()
            vals = struct.unpack_from(f">{n}d", self.buf, self.off)
            self.off += 8 * n
            return self.with_attrs(RSexp("real", value=list(vals)), has_attr)
        if ptype == STRSXP:
            n = self.i4()
            vals = [self.read().value for _ in range(n)]
            return self.with_attrs(RSexp("str", value=vals), has_attr)
        if ptype == VECSXP:
            n = self.i4()
            vals = [self.read() for _ in range(n)]
            return self.with_attrs(RSexp("list", value=vals), has_attr)
        if ptype == RAWSXP:
            n = self.i4()
            return self.with_attrs(RSexp("raw", value=self.raw(n)), has_attr)
        if ptype == S4SXP:
            obj = RSexp("s4")
            obj.attrs = self.read_attrs() if has_attr else {}
            return obj
        if ptype == ALTREP:
            info = self.read()
            state = self.read()
            self.read()  # attributes
            return self.expand_altrep(info, state)
        raise ValueError(f"unhandled SEXP type {ptype} at offset {self.off}")

    def with_attrs(self, obj, has_attr):
        if has_attr:
            obj.attrs = self.read_attrs()
        return obj

    def read_attrs(self):
        attrs = {}
        node = self.read()
        while node is not None:
            if node.kind != "pairlist":
                raise ValueError("malformed attribute list")
            car, cdr = node.value
            if node.tag is not None:
                attrs[node.tag.value] = car
            node = cdr
        return attrs

    def expand_altrep(self, info, state):
        # info is a pairlist: class symbol, package symbol, sexp type
        cls = info.value[0].value if info.kind == "pairlist" else None
        if cls == "compact_intseq":
            n, start, step = state.value
            return RSexp("int", value=[int(start + i * step) for i in range(int(n))])
        if cls in ("wrap_integer", "wrap_real", "wrap_string", "wrap_logical"):
            return state.value[0] if state.kind == "pairlist" else state
        raise ValueError(f"unhandled ALTREP class {cls}")


def decompress(path):
    data = open(path, "rb").read()
    if data[:3] == b"BZh":
        return bz2.decompress(data)
    if data[:2] == b"\x1f\x8b":
        return gzip.decompress(data)
    if data[:6] == b"\xfd7zXZ\x00":
        return lzma.decompress(data)
    return data


def toplevel_objects(root):
    out = {}
    node = root
    while node is not None:
        car, cdr = node.value
        out[node.tag.value] = car
        node = cdr
    return out


NA_INTEGER = -(2**31)


def main():
    src, dst = sys.argv[1], sys.argv[2]
    r = Reader(decompress(src))
    r.header()
    objs = toplevel_objects(r.read())
    mat = objs["ml100k"]  # dense integer matrix, column-major
    nrow, ncol = mat.attrs["dim"].value
    vals = mat.value
    triples = []
    for col in range(ncol):
        base = col * nrow
        for row in range(nrow):
            v = vals[base + row]
            if v == NA_INTEGER or v == 0:
                continue
            triples.append((row + 1, col + 1, v))
    triples.sort()
    with open(dst, "w") as f:
        for u, it, rating in triples:
            f.write(f"{u}\t{it}\t{rating}\t0\n")
    users = len({t[0] for t in triples})
    items = len({t[1] for t in triples})
    print(f"wrote {len(triples)} ratings, {users} users, {items} items ({nrow}x{ncol})")


if __name__ == "__main__":
    main()
