// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace testsupport {

/// Minimal ELF64 relocatable writer for parser error-path tests. Builds a
/// syntactically valid object byte-by-byte, independent of the parser
/// under test.
class ElfBuilder {
    public:
	static constexpr uint16_t kMachineBpf = 247;

	explicit ElfBuilder(uint16_t machine = kMachineBpf, bool big = false)
		: machine_(machine), big_(big)
	{
		add_section("", 0, 0, {}); // null section
		shstrtab_index_ = add_section(".shstrtab", 3, 0, {});
	}

	struct Sym {
		std::string name;
		uint8_t type; // 1 STT_OBJECT, 2 STT_FUNC, 3 STT_SECTION
		uint16_t shndx;
		uint64_t value;
		uint64_t size;
	};

	size_t add_section(const std::string &name, uint32_t type,
			   uint64_t flags, std::vector<uint8_t> content,
			   uint32_t link = 0, uint32_t info = 0,
			   uint64_t entsize = 0)
	{
		sections_.push_back({name, type, flags, std::move(content),
				     link, info, entsize});
		return sections_.size() - 1;
	}

	size_t add_prog_section(const std::string &name,
				std::vector<uint8_t> insns)
	{
		return add_section(name, 1 /*PROGBITS*/, 0x4 | 0x2,
				   std::move(insns));
	}

	void add_symbols(const std::vector<Sym> &syms)
	{
		std::vector<uint8_t> strtab{0};
		std::vector<uint8_t> symtab(24, 0); // null symbol
		for (const Sym &s : syms) {
			uint32_t name_off = 0;
			if (!s.name.empty()) {
				name_off = uint32_t(strtab.size());
				strtab.insert(strtab.end(), s.name.begin(),
					      s.name.end());
				strtab.push_back(0);
			}
			std::vector<uint8_t> e(24, 0);
			put32(e, 0, name_off);
			e[4] = uint8_t((1 << 4) | s.type); // GLOBAL binding
			put16(e, 6, s.shndx);
			put64(e, 8, s.value);
			put64(e, 16, s.size);
			symtab.insert(symtab.end(), e.begin(), e.end());
		}
		size_t strtab_idx = add_section(".strtab", 3, 0, strtab);
		add_section(".symtab", 2, 0, symtab, uint32_t(strtab_idx), 0,
			    24);
	}

	void add_rel(const std::string &target_section_name,
		     uint32_t target_index,
		     const std::vector<std::pair<uint64_t, uint64_t>> &relocs)
	{
		// relocs: (r_offset, symbol index); type R_BPF_64_64
		std::vector<uint8_t> content;
		for (auto [off, sym] : relocs) {
			std::vector<uint8_t> e(16, 0);
			put64(e, 0, off);
			put64(e, 8, (sym << 32) | 1);
			content.insert(content.end(), e.begin(), e.end());
		}
		// link resolved at build(): the symtab section index
		rel_sections_.push_back(
			{".rel" + target_section_name, std::move(content),
			 target_index});
	}

	std::vector<uint8_t> build()
	{
		for (auto &r : rel_sections_) {
			uint32_t symtab = 0;
			for (size_t i = 0; i < sections_.size(); i++)
				if (sections_[i].type == 2)
					symtab = uint32_t(i);
			add_section(r.name, 9 /*REL*/, 0, r.content, symtab,
				    r.target, 16);
		}
		rel_sections_.clear();

		// build .shstrtab
		std::vector<uint8_t> shstr{0};
		std::vector<uint32_t> name_offsets(sections_.size(), 0);
		for (size_t i = 0; i < sections_.size(); i++) {
			if (sections_[i].name.empty())
				continue;
			name_offsets[i] = uint32_t(shstr.size());
			shstr.insert(shstr.end(), sections_[i].name.begin(),
				     sections_[i].name.end());
			shstr.push_back(0);
		}
		sections_[shstrtab_index_].content = shstr;

		// layout: header, section contents, section headers
		std::vector<uint8_t> out(64, 0);
		out[0] = 0x7f;
		out[1] = 'E';
		out[2] = 'L';
		out[3] = 'F';
		out[4] = 2;		   // ELFCLASS64
		out[5] = big_ ? 2 : 1;	   // EI_DATA
		out[6] = 1;		   // version
		put16(out, 16, 1);	   // ET_REL
		put16(out, 18, machine_);
		put32(out, 20, 1);

		std::vector<uint64_t> offsets(sections_.size(), 0);
		for (size_t i = 0; i < sections_.size(); i++) {
			offsets[i] = out.size();
			out.insert(out.end(), sections_[i].content.begin(),
				   sections_[i].content.end());
			while (out.size() % 8)
				out.push_back(0);
		}
		uint64_t shoff = out.size();
		for (size_t i = 0; i < sections_.size(); i++) {
			std::vector<uint8_t> sh(64, 0);
			put32(sh, 0, name_offsets[i]);
			put32(sh, 4, sections_[i].type);
			put64(sh, 8, sections_[i].flags);
			put64(sh, 24, sections_[i].content.empty()
					      ? 0
					      : offsets[i]);
			put64(sh, 32, sections_[i].content.size());
			put32(sh, 40, sections_[i].link);
			put32(sh, 44, sections_[i].info);
			put64(sh, 56, sections_[i].entsize);
			out.insert(out.end(), sh.begin(), sh.end());
		}
		put64(out, 40, shoff);
		put16(out, 58, 64); // shentsize
		put16(out, 60, uint16_t(sections_.size()));
		put16(out, 62, uint16_t(shstrtab_index_));
		return out;
	}

    private:
	struct Section {
		std::string name;
		uint32_t type;
		uint64_t flags;
		std::vector<uint8_t> content;
		uint32_t link;
		uint32_t info;
		uint64_t entsize;
	};
	struct RelSection {
		std::string name;
		std::vector<uint8_t> content;
		uint32_t target;
	};

	void put16(std::vector<uint8_t> &v, size_t off, uint16_t x)
	{
		if (big_)
			x = uint16_t((x >> 8) | (x << 8));
		std::memcpy(v.data() + off, &x, 2);
	}
	void put32(std::vector<uint8_t> &v, size_t off, uint32_t x)
	{
		if (big_)
			x = __builtin_bswap32(x);
		std::memcpy(v.data() + off, &x, 4);
	}
	void put64(std::vector<uint8_t> &v, size_t off, uint64_t x)
	{
		if (big_)
			x = __builtin_bswap64(x);
		std::memcpy(v.data() + off, &x, 8);
	}

	uint16_t machine_;
	bool big_;
	std::vector<Section> sections_;
	std::vector<RelSection> rel_sections_;
	size_t shstrtab_index_;
};

/// Encodes a little-endian eBPF instruction (test-side, independent of the
/// library encoder).
inline std::vector<uint8_t> raw_insn(uint8_t opcode, uint8_t dst, uint8_t src,
				     int16_t off, int32_t imm)
{
	std::vector<uint8_t> b(8, 0);
	b[0] = opcode;
	b[1] = uint8_t((src << 4) | (dst & 0xf));
	std::memcpy(b.data() + 2, &off, 2);
	std::memcpy(b.data() + 4, &imm, 4);
	return b;
}

inline void append(std::vector<uint8_t> &out, const std::vector<uint8_t> &b)
{
	out.insert(out.end(), b.begin(), b.end());
}

} // namespace testsupport
