// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/elf_object.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "wasmbpf/btf.hpp"
#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

constexpr uint16_t kMachineBpf = 247;
constexpr uint32_t kShtProgbits = 1;
constexpr uint32_t kShtSymtab = 2;
constexpr uint32_t kShtStrtab = 3;
constexpr uint32_t kShtRela = 4;
constexpr uint32_t kShtNobits = 8;
constexpr uint32_t kShtRel = 9;
constexpr uint64_t kShfExecinstr = 0x4;
constexpr uint8_t kSttObject = 1;
constexpr uint8_t kSttFunc = 2;

struct Section {
	std::string name;
	uint32_t type = 0;
	uint64_t flags = 0;
	uint64_t offset = 0;
	uint64_t size = 0;
	uint32_t link = 0;
	uint32_t info = 0;
	uint64_t entsize = 0;
};

struct Symbol {
	std::string name;
	uint8_t type = 0;
	uint16_t shndx = 0;
	uint64_t value = 0;
	uint64_t size = 0;
};

class ElfReader {
    public:
	ElfReader(std::span<const uint8_t> data, Endian endian)
		: data_(data), swap_(endian == Endian::big)
	{
	}

	uint16_t u16(uint64_t off) const
	{
		check(off, 2);
		uint16_t v;
		std::memcpy(&v, data_.data() + off, 2);
		return swap_ ? uint16_t((v >> 8) | (v << 8)) : v;
	}
	uint32_t u32(uint64_t off) const
	{
		check(off, 4);
		uint32_t v;
		std::memcpy(&v, data_.data() + off, 4);
		return swap_ ? __builtin_bswap32(v) : v;
	}
	uint64_t u64(uint64_t off) const
	{
		check(off, 8);
		uint64_t v;
		std::memcpy(&v, data_.data() + off, 8);
		return swap_ ? __builtin_bswap64(v) : v;
	}

    private:
	void check(uint64_t off, uint64_t n) const
	{
		if (off + n > data_.size())
			raise(Errc::MalformedSection,
			      "read past end of file at offset " +
				      std::to_string(off));
	}
	std::span<const uint8_t> data_;
	bool swap_;
};

std::string section_string(std::span<const uint8_t> tab, uint64_t off)
{
	if (off >= tab.size())
		raise(Errc::MalformedSection, "string offset out of range");
	auto end = std::find(tab.begin() + off, tab.end(), uint8_t(0));
	if (end == tab.end())
		raise(Errc::MalformedSection, "unterminated string");
	return std::string(tab.begin() + off, end);
}

bool is_power_of_two(uint64_t v)
{
	return v != 0 && (v & (v - 1)) == 0;
}

// BTF-defined map attribute decoding: __uint emits `int (*name)[N]`,
// __type emits `typeof(T) *name`.
uint32_t uint_attr(const BtfTypeGraph &btf, const BtfMember &m,
		   const std::string &map_name)
{
	const BtfType &ptr = btf.type(btf.resolve(m.type_id));
	if (ptr.kind != BtfKind::Ptr)
		raise(Errc::MalformedSection,
		      "map '" + map_name + "' attribute '" + m.name +
			      "' is not in __uint form");
	const BtfType &arr = btf.type(btf.resolve(ptr.ref_type));
	if (arr.kind != BtfKind::Array)
		raise(Errc::MalformedSection,
		      "map '" + map_name + "' attribute '" + m.name +
			      "' is not in __uint form");
	return arr.array_nelems;
}

uint32_t type_attr(const BtfTypeGraph &btf, const BtfMember &m,
		   const std::string &map_name)
{
	const BtfType &ptr = btf.type(btf.resolve(m.type_id));
	if (ptr.kind != BtfKind::Ptr)
		raise(Errc::MalformedSection,
		      "map '" + map_name + "' attribute '" + m.name +
			      "' is not in __type form");
	return btf.resolve(ptr.ref_type);
}

std::vector<MapDef> parse_btf_maps(const BtfTypeGraph &btf,
				   std::vector<std::string> &warnings)
{
	std::vector<MapDef> defs;
	std::optional<uint32_t> sec = btf.find_by_name(BtfKind::DataSec, ".maps");
	if (!sec)
		return defs;

	for (const BtfVarSecInfo &vi : btf.type(*sec).vars) {
		const BtfType &var = btf.type(vi.type_id);
		if (var.kind != BtfKind::Var)
			raise(Errc::MalformedSection,
			      ".maps datasec entry is not a variable");
		MapDef def;
		def.name = var.name;
		const BtfType &st = btf.type(btf.resolve(var.ref_type));
		if (st.kind != BtfKind::Struct)
			raise(Errc::MalformedSection,
			      "map '" + def.name + "' is not a struct definition");

		std::optional<uint32_t> type_num;
		for (const BtfMember &m : st.members) {
			if (m.name == "type") {
				type_num = uint_attr(btf, m, def.name);
			} else if (m.name == "max_entries") {
				def.max_entries = uint_attr(btf, m, def.name);
			} else if (m.name == "key_size") {
				def.key_size = uint_attr(btf, m, def.name);
			} else if (m.name == "value_size") {
				def.value_size = uint_attr(btf, m, def.name);
			} else if (m.name == "key") {
				uint32_t id = type_attr(btf, m, def.name);
				def.key_size = uint32_t(btf.type_size(id));
				def.btf_key_type_id = id;
			} else if (m.name == "value") {
				uint32_t id = type_attr(btf, m, def.name);
				def.value_size = uint32_t(btf.type_size(id));
				def.btf_value_type_id = id;
			} else {
				warnings.push_back("map '" + def.name +
						   "': ignoring attribute '" +
						   m.name + "'");
			}
		}
		if (!type_num)
			raise(Errc::MalformedSection,
			      "map '" + def.name + "' has no type attribute");
		switch (*type_num) {
		case 1:
			def.type = MapType::hash;
			break;
		case 2:
			def.type = MapType::array;
			break;
		case 4:
			def.type = MapType::perf_event_array;
			break;
		case 27:
			def.type = MapType::ringbuf;
			break;
		default:
			raise(Errc::UnsupportedMapType,
			      "map '" + def.name + "' has unsupported type " +
				      std::to_string(*type_num));
		}
		defs.push_back(std::move(def));
	}
	return defs;
}

void validate_map_def(const MapDef &def)
{
	switch (def.type) {
	case MapType::ringbuf:
		if (def.key_size != 0 || def.value_size != 0)
			raise(Errc::MalformedSection,
			      "ringbuf map '" + def.name +
				      "' must have zero key/value sizes");
		if (!is_power_of_two(def.max_entries))
			raise(Errc::MalformedSection,
			      "ringbuf map '" + def.name +
				      "' max_entries must be a power of two");
		break;
	case MapType::array:
		if (def.key_size != 4)
			raise(Errc::MalformedSection,
			      "array map '" + def.name +
				      "' must have 4-byte keys");
		break;
	case MapType::hash:
		if (def.key_size == 0 || def.value_size == 0)
			raise(Errc::MalformedSection,
			      "hash map '" + def.name +
				      "' needs nonzero key and value sizes");
		break;
	case MapType::perf_event_array:
		break;
	}
}

} // namespace

const char *prog_type_name(ProgType t)
{
	switch (t) {
	case ProgType::kprobe:
		return "kprobe";
	case ProgType::uprobe:
		return "uprobe";
	case ProgType::tracepoint:
		return "tracepoint";
	case ProgType::xdp:
		return "xdp";
	case ProgType::sockops:
		return "sockops";
	case ProgType::lsm:
		return "lsm";
	case ProgType::socket_filter:
		return "socket_filter";
	}
	return "unknown";
}

const char *map_type_name(MapType t)
{
	switch (t) {
	case MapType::hash:
		return "hash";
	case MapType::array:
		return "array";
	case MapType::ringbuf:
		return "ringbuf";
	case MapType::perf_event_array:
		return "perf_event_array";
	}
	return "unknown";
}

std::optional<ProgType> prog_type_from_section(std::string_view section)
{
	// fixed prefix table; one entry per supported program type
	static constexpr std::array<std::pair<std::string_view, ProgType>, 7>
		kTable{{
			{"kprobe/", ProgType::kprobe},
			{"uprobe/", ProgType::uprobe},
			{"tracepoint/", ProgType::tracepoint},
			{"xdp", ProgType::xdp},
			{"sockops", ProgType::sockops},
			{"lsm/", ProgType::lsm},
			{"socket", ProgType::socket_filter},
		}};
	for (auto [prefix, type] : kTable)
		if (section.starts_with(prefix))
			return type;
	return std::nullopt;
}

const ProgramBlob *ElfBpfObject::find_program(std::string_view name) const
{
	for (const ProgramBlob &p : programs)
		if (p.name == name)
			return &p;
	return nullptr;
}

const MapDef *ElfBpfObject::find_map(std::string_view name) const
{
	for (const MapDef &m : map_defs)
		if (m.name == name)
			return &m;
	return nullptr;
}

ElfBpfObject parse_object(std::span<const uint8_t> bytes)
{
	if (bytes.size() < 4 || bytes[0] != 0x7f || bytes[1] != 'E' ||
	    bytes[2] != 'L' || bytes[3] != 'F')
		raise(Errc::NotElf, "bad ELF magic");
	if (bytes.size() < 64)
		raise(Errc::MalformedSection, "file shorter than an ELF header");
	if (bytes[4] != 2)
		raise(Errc::MalformedSection, "not a 64-bit ELF object");

	Endian endian;
	switch (bytes[5]) {
	case 1:
		endian = Endian::little;
		break;
	case 2:
		endian = Endian::big;
		break;
	default:
		raise(Errc::MalformedSection, "bad EI_DATA byte");
	}

	ElfReader rd(bytes, endian);
	uint16_t machine = rd.u16(18);
	if (machine != kMachineBpf)
		raise(Errc::WrongMachine,
		      "ELF machine " + std::to_string(machine) +
			      " is not eBPF (247)");

	uint64_t shoff = rd.u64(40);
	uint16_t shentsize = rd.u16(58);
	uint16_t shnum = rd.u16(60);
	uint16_t shstrndx = rd.u16(62);
	if (shentsize < 64)
		raise(Errc::MalformedSection, "section header entry too small");
	if (shstrndx >= shnum)
		raise(Errc::MalformedSection, "shstrndx out of range");

	std::vector<Section> sections(shnum);
	for (uint16_t i = 0; i < shnum; i++) {
		uint64_t off = shoff + uint64_t(i) * shentsize;
		Section &s = sections[i];
		s.type = rd.u32(off + 4);
		s.flags = rd.u64(off + 8);
		s.offset = rd.u64(off + 24);
		s.size = rd.u64(off + 32);
		s.link = rd.u32(off + 40);
		s.info = rd.u32(off + 44);
		s.entsize = rd.u64(off + 56);
		if (s.type != kShtNobits && s.size > 0 &&
		    s.offset + s.size > bytes.size())
			raise(Errc::MalformedSection,
			      "section " + std::to_string(i) +
				      " truncated (past end of file)");
	}
	{
		const Section &strsec = sections[shstrndx];
		auto tab = bytes.subspan(strsec.offset, strsec.size);
		for (uint16_t i = 0; i < shnum; i++)
			sections[i].name = section_string(
				tab, rd.u32(shoff + uint64_t(i) * shentsize));
	}

	// overlapping file-backed sections are a malformed object
	{
		std::vector<std::pair<uint64_t, uint64_t>> ranges;
		for (const Section &s : sections)
			if (s.type != kShtNobits && s.size > 0)
				ranges.emplace_back(s.offset, s.offset + s.size);
		std::sort(ranges.begin(), ranges.end());
		for (size_t i = 1; i < ranges.size(); i++)
			if (ranges[i].first < ranges[i - 1].second)
				raise(Errc::MalformedSection,
				      "overlapping sections");
	}

	auto section_bytes = [&](const Section &s) {
		return s.type == kShtNobits
			       ? std::span<const uint8_t>{}
			       : bytes.subspan(s.offset, s.size);
	};

	// symbol table
	std::vector<Symbol> symbols;
	for (const Section &s : sections) {
		if (s.type != kShtSymtab)
			continue;
		if (s.link >= shnum)
			raise(Errc::MalformedSection, "symtab strtab link bad");
		auto strtab = section_bytes(sections[s.link]);
		size_t count = s.entsize ? s.size / s.entsize : s.size / 24;
		for (size_t i = 0; i < count; i++) {
			uint64_t off = s.offset + i * (s.entsize ? s.entsize : 24);
			Symbol sym;
			uint32_t name_off = rd.u32(off);
			sym.type = uint8_t(rd.u16(off + 4) & 0x0f);
			sym.shndx = rd.u16(off + 6);
			sym.value = rd.u64(off + 8);
			sym.size = rd.u64(off + 16);
			if (name_off)
				sym.name = section_string(strtab, name_off);
			symbols.push_back(std::move(sym));
		}
	}

	ElfBpfObject obj;
	obj.endianness = endian;

	// raw BTF blobs, license, legacy-maps rejection
	for (const Section &s : sections) {
		if (s.name == ".BTF") {
			auto b = section_bytes(s);
			obj.btf_blob.assign(b.begin(), b.end());
		} else if (s.name == ".BTF.ext") {
			auto b = section_bytes(s);
			obj.btf_ext_blob.assign(b.begin(), b.end());
		} else if (s.name == "license") {
			auto b = section_bytes(s);
			obj.license.assign(b.begin(),
					   std::find(b.begin(), b.end(),
						     uint8_t(0)));
		} else if (s.name == "maps") {
			raise(Errc::LegacyMapsSection,
			      "legacy 'maps' section is not supported; "
			      "use BTF-defined maps (.maps)");
		}
	}

	// programs from executable sections with recognized prefixes
	for (uint16_t si = 0; si < shnum; si++) {
		const Section &s = sections[si];
		if (s.type != kShtProgbits || !(s.flags & kShfExecinstr) ||
		    s.size == 0)
			continue;
		auto type = prog_type_from_section(s.name);
		if (!type) {
			if (s.name != ".text")
				obj.warnings.push_back(
					"skipping program section '" + s.name +
					"' with unrecognized prefix");
			continue;
		}
		std::vector<Symbol> funcs;
		for (const Symbol &sym : symbols)
			if (sym.shndx == si && sym.type == kSttFunc &&
			    sym.size > 0)
				funcs.push_back(sym);
		std::sort(funcs.begin(), funcs.end(),
			  [](const Symbol &a, const Symbol &b) {
				  return a.value < b.value;
			  });
		if (funcs.empty()) {
			obj.warnings.push_back("section '" + s.name +
					       "' has no function symbols");
			continue;
		}
		for (const Symbol &f : funcs) {
			if (f.value + f.size > s.size)
				raise(Errc::MalformedSection,
				      "function '" + f.name +
					      "' extends past its section");
			ProgramBlob prog;
			prog.name = f.name;
			prog.section_name = s.name;
			prog.prog_type = *type;
			prog.section_offset = uint32_t(f.value);
			prog.insns = decode_instructions(
				section_bytes(s).subspan(f.value, f.size),
				endian);
			if (prog.insns.empty() ||
			    prog.insns.back().opcode != insn::kExit)
				raise(Errc::MalformedSection,
				      "program '" + f.name +
					      "' does not end with EXIT");
			obj.programs.push_back(std::move(prog));
		}
	}
	if (obj.programs.empty())
		raise(Errc::NoPrograms,
		      "no recognized program sections in object");

	{
		std::vector<std::string> names;
		for (const ProgramBlob &p : obj.programs)
			names.push_back(p.name);
		std::sort(names.begin(), names.end());
		if (std::adjacent_find(names.begin(), names.end()) != names.end())
			raise(Errc::MalformedSection,
			      "duplicate program name in object");
	}

	// BTF-defined maps
	int maps_section_index = -1;
	for (uint16_t si = 0; si < shnum; si++)
		if (sections[si].name == ".maps")
			maps_section_index = si;
	if (maps_section_index >= 0) {
		if (obj.btf_blob.empty())
			raise(Errc::MalformedSection,
			      ".maps section present but object has no BTF");
		BtfTypeGraph btf = parse_btf(obj.btf_blob);
		obj.map_defs = parse_btf_maps(btf, obj.warnings);
		for (const MapDef &d : obj.map_defs)
			validate_map_def(d);
		std::vector<std::string> names;
		for (const MapDef &d : obj.map_defs)
			names.push_back(d.name);
		std::sort(names.begin(), names.end());
		if (std::adjacent_find(names.begin(), names.end()) != names.end())
			raise(Errc::MalformedSection,
			      "duplicate map name in object");
	}

	// relocations: map references only; anything else is unsupported
	for (const Section &s : sections) {
		if (s.type != kShtRel && s.type != kShtRela)
			continue;
		if (s.info >= shnum)
			continue;
		const Section &target = sections[s.info];
		std::vector<ProgramBlob *> progs;
		for (ProgramBlob &p : obj.programs)
			if (p.section_name == target.name)
				progs.push_back(&p);
		if (progs.empty())
			continue;
		size_t entsize = s.type == kShtRel ? 16 : 24;
		size_t count = s.size / entsize;
		for (size_t i = 0; i < count; i++) {
			uint64_t off = s.offset + i * entsize;
			uint64_t r_offset = rd.u64(off);
			uint64_t r_info = rd.u64(off + 8);
			uint32_t sym_idx = uint32_t(r_info >> 32);
			if (sym_idx >= symbols.size())
				raise(Errc::MalformedSection,
				      "relocation symbol index out of range");
			const Symbol &sym = symbols[sym_idx];
			ProgramBlob *prog = nullptr;
			for (ProgramBlob *p : progs)
				if (r_offset >= p->section_offset &&
				    r_offset < p->section_offset +
						       p->insns.size() * 8)
					prog = p;
			if (!prog)
				raise(Errc::MalformedSection,
				      "relocation outside any program");
			bool is_map = maps_section_index >= 0 &&
				      sym.shndx == uint16_t(maps_section_index);
			if (!is_map)
				raise(Errc::MalformedSection,
				      "program '" + prog->name +
					      "' references unsupported symbol '" +
					      sym.name +
					      "' (only map references are "
					      "supported)");
			uint64_t rel = r_offset - prog->section_offset;
			if (rel % 8 != 0)
				raise(Errc::MalformedSection,
				      "relocation not instruction-aligned");
			uint32_t idx = uint32_t(rel / 8);
			if (idx >= prog->insns.size() ||
			    !insn::is_ld_imm64(prog->insns[idx]))
				raise(Errc::MalformedSection,
				      "map relocation does not target an "
				      "LD_IMM64 instruction");
			prog->map_relocs.push_back({idx, sym.name});
		}
	}

	// every referenced map must exist
	for (const ProgramBlob &p : obj.programs)
		for (const MapReloc &r : p.map_relocs)
			if (!obj.find_map(r.map_name))
				raise(Errc::MalformedSection,
				      "program '" + p.name +
					      "' references unknown map '" +
					      r.map_name + "'");

	return obj;
}

std::vector<EbpfProgramImage>
bind_maps(const ElfBpfObject &obj,
	  const std::map<std::string, int32_t> &assignment)
{
	if (obj.endianness == Endian::big)
		raise(Errc::BigEndianObject,
		      "big-endian objects cannot be bound: the interpreter "
		      "is little-endian only");

	std::vector<EbpfProgramImage> images;
	images.reserve(obj.programs.size());
	for (const ProgramBlob &p : obj.programs) {
		EbpfProgramImage img;
		img.name = p.name;
		img.prog_type = p.prog_type;
		img.insns = p.insns;
		for (const MapReloc &r : p.map_relocs) {
			auto it = assignment.find(r.map_name);
			if (it == assignment.end())
				raise(Errc::UnboundMap,
				      "no handle assigned for map '" +
					      r.map_name + "'");
			Insn &lo = img.insns.at(r.insn_index);
			Insn &hi = img.insns.at(r.insn_index + 1);
			lo.src_reg = insn::kPseudoMapFd;
			lo.imm = it->second;
			hi.imm = 0;
		}
		images.push_back(std::move(img));
	}
	return images;
}

} // namespace wasmbpf
