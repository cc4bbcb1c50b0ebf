// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wasmbpf/insn.hpp"

namespace wasmbpf {

enum class ProgType {
	kprobe,
	uprobe,
	tracepoint,
	xdp,
	sockops,
	lsm,
	socket_filter,
};

const char *prog_type_name(ProgType t);

/// Maps a program section name ("kprobe/do_sys_open", "xdp", ...) to a
/// program type. Unknown prefixes return nullopt; the parser skips them
/// with a warning.
std::optional<ProgType> prog_type_from_section(std::string_view section);

enum class MapType {
	hash,
	array,
	ringbuf,
	perf_event_array,
};

const char *map_type_name(MapType t);

struct MapDef {
	std::string name;
	MapType type = MapType::hash;
	uint32_t key_size = 0;
	uint32_t value_size = 0;
	uint32_t max_entries = 0;
	std::optional<uint32_t> btf_key_type_id;
	std::optional<uint32_t> btf_value_type_id;
};

struct MapReloc {
	uint32_t insn_index = 0;
	std::string map_name;
};

struct ProgramBlob {
	std::string name;
	std::string section_name;
	ProgType prog_type = ProgType::tracepoint;
	uint32_t section_offset = 0; // byte offset of the function in its section
	std::vector<Insn> insns;
	std::vector<MapReloc> map_relocs;
};

struct ElfBpfObject {
	std::vector<ProgramBlob> programs;
	std::vector<MapDef> map_defs;
	std::vector<uint8_t> btf_blob;	   // empty when absent
	std::vector<uint8_t> btf_ext_blob; // empty when absent
	std::string license;
	Endian endianness = Endian::little;
	std::vector<std::string> warnings;

	const ProgramBlob *find_program(std::string_view name) const;
	const MapDef *find_map(std::string_view name) const;
};

/// Parses a relocatable eBPF ELF object (machine type 247).
ElfBpfObject parse_object(std::span<const uint8_t> bytes);

/// Executable instruction image with map references patched to handles.
struct EbpfProgramImage {
	std::string name;
	ProgType prog_type = ProgType::tracepoint;
	std::vector<Insn> insns;
	std::string arch_profile; // set by the pt_regs pass; empty = as compiled
};

/// Patches every LD_IMM64 map reference with the assigned handle. The
/// assignment must cover all referenced maps; big-endian objects are
/// rejected here.
std::vector<EbpfProgramImage>
bind_maps(const ElfBpfObject &obj,
	  const std::map<std::string, int32_t> &assignment);

} // namespace wasmbpf
