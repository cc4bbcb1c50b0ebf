// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wasmbpf/core_relo.hpp"
#include "wasmbpf/elf_object.hpp"

namespace wasmbpf {

/// Byte offsets of the first function-argument registers within an
/// architecture's register-frame struct, plus the properties the loader
/// needs to reason about that architecture.
struct ArchProfile {
	std::string name;
	uint32_t pointer_width = 8;
	Endian endianness = Endian::little;
	std::vector<uint16_t> param_reg_offsets; // >= 5 entries, distinct
};

/// Built-in profiles ("x86_64", "arm64"); mirrors the checked-in data
/// files under data/arch/.
const ArchProfile &builtin_arch_profile(std::string_view name);

/// Parses a profile data file (key=value lines, '#' comments).
ArchProfile parse_arch_profile(std::string_view text);
ArchProfile load_arch_profile(const std::filesystem::path &path);

struct PtRegsAccess {
	uint32_t insn_index = 0;
	uint32_t param_index = 0;
};

/// Identifies register-frame parameter accesses from CO-RE relocations
/// whose root type is the register-frame struct ("pt_regs"): each matching
/// load's local offset is mapped back to a parameter index of `from`.
std::vector<PtRegsAccess>
find_ptregs_accesses(std::span<const CoreRelo> relos, const BtfTypeGraph &local,
		     const ArchProfile &from);

/// Rewrites the listed context loads from one architecture's register
/// offsets to another's. Every listed instruction must currently read at
/// the from-profile offset of its parameter.
EbpfProgramImage relocate_ptregs(const EbpfProgramImage &image,
				 std::span<const PtRegsAccess> accesses,
				 const ArchProfile &from,
				 const ArchProfile &to);

} // namespace wasmbpf
