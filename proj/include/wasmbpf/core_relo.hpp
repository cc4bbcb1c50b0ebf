// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wasmbpf/btf.hpp"
#include "wasmbpf/elf_object.hpp"

namespace wasmbpf {

namespace core {
constexpr uint32_t kFieldByteOffset = 0;
constexpr uint32_t kFieldExists = 2;
} // namespace core

struct CoreRelo {
	uint32_t insn_off = 0; // byte offset into the program's instructions
	uint32_t type_id = 0;  // root type in the object's own BTF
	uint32_t kind = core::kFieldByteOffset;
	std::vector<uint32_t> access_spec; // decoded "0:1:2" indices
	std::string access_str;
};

/// Parses the CO-RE relocation records of a `.BTF.ext` blob, keyed by
/// program section name. Access strings resolve against the object BTF's
/// string table, so the raw `.BTF` blob is required too.
std::map<std::string, std::vector<CoreRelo>>
parse_core_relos(std::span<const uint8_t> btf_ext,
		 std::span<const uint8_t> btf);

/// Relocations for one program within a section, rebased so insn_off is
/// relative to the program start.
std::vector<CoreRelo> relos_for_program(
	const std::map<std::string, std::vector<CoreRelo>> &by_section,
	const ProgramBlob &prog);

/// Applies field_byte_offset / field_exists relocations, rewriting the
/// local offsets to the target BTF's layout. Field identity is matched by
/// type name and member-name path; with target == local the image is
/// unchanged.
EbpfProgramImage apply_core_relocations(const EbpfProgramImage &image,
					std::span<const CoreRelo> relos,
					const BtfTypeGraph &local,
					const BtfTypeGraph &target);

/// Resolves a relocation's access path in the *local* graph to the byte
/// offset the compiler baked into the instruction.
uint64_t core_local_offset(const BtfTypeGraph &local, const CoreRelo &relo);

} // namespace wasmbpf
