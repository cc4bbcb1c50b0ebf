#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 wasm-bpf authors
"""Generate a fixture manifest for a relocatable eBPF ELF object.

Walks the ELF, BTF and .BTF.ext structures directly with struct unpacking.
Deliberately shares no code with the C++ runtime so the manifests serve as an
independent oracle for the parser tests.
"""

import struct
import sys

SHT_SYMTAB = 2
SHT_STRTAB = 3
SHT_REL = 9
SHF_EXECINSTR = 0x4
STT_FUNC = 2
STT_OBJECT = 1

PROG_PREFIXES = [
    "kprobe/", "uprobe/", "tracepoint/", "xdp", "sockops",
    "lsm/", "socket",
]


def cstr(buf, off):
    end = buf.index(b"\0", off)
    return buf[off:end].decode()


class Elf:
    def __init__(self, data):
        self.data = data
        if data[:4] != b"\x7fELF":
            raise ValueError("not an ELF file")
        if data[4] != 2 or data[5] != 1:
            raise ValueError("expected ELF64 little-endian")
        (self.e_machine,) = struct.unpack_from("<H", data, 18)
        (self.e_shoff,) = struct.unpack_from("<Q", data, 40)
        (self.e_shentsize, self.e_shnum, self.e_shstrndx) = struct.unpack_from(
            "<HHH", data, 58)
        self.sections = []
        for i in range(self.e_shnum):
            off = self.e_shoff + i * self.e_shentsize
            (name, sh_type, flags, _addr, offset, size, link, info,
             _align, entsize) = struct.unpack_from("<IIQQQQIIQQ", data, off)
            self.sections.append(dict(
                name_off=name, type=sh_type, flags=flags, offset=offset,
                size=size, link=link, info=info, entsize=entsize))
        shstr = self.sections[self.e_shstrndx]
        strtab = data[shstr["offset"]:shstr["offset"] + shstr["size"]]
        for s in self.sections:
            s["name"] = cstr(strtab, s["name_off"])

    def section_bytes(self, s):
        return self.data[s["offset"]:s["offset"] + s["size"]]

    def find(self, name):
        for s in self.sections:
            if s["name"] == name:
                return s
        return None

    def symbols(self):
        symtab = None
        for s in self.sections:
            if s["type"] == SHT_SYMTAB:
                symtab = s
        if symtab is None:
            return []
        strs = self.section_bytes(self.sections[symtab["link"]])
        raw = self.section_bytes(symtab)
        out = []
        nsyms = len(raw) // 24
        for i in range(nsyms):
            (name_off, info, _other, shndx, value, size) = struct.unpack_from(
                "<IBBHQQ", raw, i * 24)
            nm = cstr(strs, name_off) if name_off else ""
            out.append(dict(name=nm, type=info & 0xF, shndx=shndx,
                            value=value, size=size, index=i))
        return out


def btf_type_count(blob):
    magic, _ver, _flags = struct.unpack_from("<HBB", blob, 0)
    if magic != 0xEB9F:
        raise ValueError("bad BTF magic")
    hdr_len, type_off, type_len = struct.unpack_from("<III", blob, 4)
    base = hdr_len + type_off
    off = base
    count = 0
    # payload sizes per kind, vlen-scaled where applicable
    while off < base + type_len:
        _name, info, _sz = struct.unpack_from("<III", blob, off)
        off += 12
        kind = (info >> 24) & 0x1F
        vlen = info & 0xFFFF
        extra = {
            1: 4,            # INT
            3: 12,           # ARRAY
            4: 12 * vlen,    # STRUCT
            5: 12 * vlen,    # UNION
            6: 8 * vlen,     # ENUM
            13: 8 * vlen,    # FUNC_PROTO
            14: 4,           # VAR
            15: 12 * vlen,   # DATASEC
            17: 4,           # DECL_TAG
            19: 12 * vlen,   # ENUM64
        }.get(kind, 0)
        off += extra
        count += 1
    return count


def btf_ext_core_relos(blob, btf_blob):
    """Returns {section_name: relo_count}."""
    magic, _ver, _flags = struct.unpack_from("<HBB", blob, 0)
    if magic != 0xEB9F:
        raise ValueError("bad BTF.ext magic")
    (hdr_len,) = struct.unpack_from("<I", blob, 4)
    if hdr_len < 32:
        return {}
    (_fo, _fl, _lo, _ll, core_off, core_len) = struct.unpack_from(
        "<IIIIII", blob, 8)
    if core_len == 0:
        return {}
    # BTF string table for section names
    bhdr_len, _to, _tl, str_off, str_len = struct.unpack_from(
        "<IIIII", btf_blob, 4)
    strs = btf_blob[bhdr_len + str_off:bhdr_len + str_off + str_len]
    base = hdr_len + core_off
    (rec_size,) = struct.unpack_from("<I", blob, base)
    off = base + 4
    end = base + core_len
    out = {}
    while off < end:
        sec_name_off, num = struct.unpack_from("<II", blob, off)
        off += 8
        out[cstr(strs, sec_name_off)] = num
        off += num * rec_size
    return out


def main(path):
    with open(path, "rb") as f:
        data = f.read()
    elf = Elf(data)
    if elf.e_machine != 247:
        raise ValueError("not an eBPF object (e_machine=%d)" % elf.e_machine)

    syms = elf.symbols()
    sec_index = {i: s for i, s in enumerate(elf.sections)}

    progs = []
    for i, s in enumerate(elf.sections):
        if not (s["flags"] & SHF_EXECINSTR) or s["size"] == 0:
            continue
        if not any(s["name"].startswith(p) or s["name"] == p.rstrip("/")
                   for p in PROG_PREFIXES):
            continue
        for sym in syms:
            if sym["shndx"] == i and sym["type"] == STT_FUNC:
                insns = sym["size"] // 8 if sym["size"] else s["size"] // 8
                progs.append(dict(name=sym["name"], section=s["name"],
                                  insns=insns, sec_index=i))

    maps_sec = elf.find(".maps")
    maps = []
    maps_index = None
    if maps_sec is not None:
        maps_index = elf.sections.index(maps_sec)
        for sym in syms:
            if sym["shndx"] == maps_index and sym["type"] == STT_OBJECT:
                maps.append(sym["name"])

    # map relocations: entries of .rel<prog section> whose symbol lives in .maps
    map_relocs = {p["name"]: 0 for p in progs}
    for s in elf.sections:
        if s["type"] != SHT_REL:
            continue
        target = sec_index.get(s["info"])
        if target is None:
            continue
        tprogs = [p for p in progs if p["section"] == target["name"]]
        if not tprogs:
            continue
        raw = elf.section_bytes(s)
        for j in range(len(raw) // 16):
            r_offset, r_info = struct.unpack_from("<QQ", raw, j * 16)
            sym = syms[r_info >> 32]
            if sym["shndx"] == maps_index:
                # attribute to the program whose [value, value+size) covers it
                for p in tprogs:
                    fsym = next(x for x in syms
                                if x["name"] == p["name"] and x["type"] == STT_FUNC)
                    if fsym["value"] <= r_offset < fsym["value"] + fsym["size"]:
                        map_relocs[p["name"]] += 1

    btf_sec = elf.find(".BTF")
    btf_blob = elf.section_bytes(btf_sec) if btf_sec else b""
    ext_sec = elf.find(".BTF.ext")
    core = {}
    if ext_sec and btf_blob:
        core = btf_ext_core_relos(elf.section_bytes(ext_sec), btf_blob)

    print("fixture: %s" % path.split("/")[-1])
    print("endianness: little")
    print("programs: %d" % len(progs))
    for p in sorted(progs, key=lambda x: x["name"]):
        print("program: %s section=%s insns=%d map_relocs=%d core_relos=%d" % (
            p["name"], p["section"], p["insns"], map_relocs[p["name"]],
            core.get(p["section"], 0)))
    print("maps: %d" % len(maps))
    for m in sorted(maps):
        print("map: %s" % m)
    if btf_blob:
        print("btf_types: %d" % btf_type_count(btf_blob))


if __name__ == "__main__":
    main(sys.argv[1])
