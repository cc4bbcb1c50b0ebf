// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/arch_profile.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

// Must agree with data/arch/*.profile (cross-checked by tests).
const ArchProfile kX86_64{
	"x86_64",
	8,
	Endian::little,
	// struct pt_regs slots of rdi, rsi, rdx, rcx, r8
	{112, 104, 96, 88, 72},
};

const ArchProfile kArm64{
	"arm64",
	8,
	Endian::little,
	// struct pt_regs regs[0..4] (x0-x4)
	{0, 8, 16, 24, 32},
};

void validate_profile(const ArchProfile &p)
{
	if (p.param_reg_offsets.size() < 5)
		raise(Errc::BadConfig, "arch profile '" + p.name +
					       "' needs >= 5 parameter slots");
	std::set<uint16_t> uniq(p.param_reg_offsets.begin(),
				p.param_reg_offsets.end());
	if (uniq.size() != p.param_reg_offsets.size())
		raise(Errc::BadConfig, "arch profile '" + p.name +
					       "' has duplicate offsets");
}

} // namespace

const ArchProfile &builtin_arch_profile(std::string_view name)
{
	if (name == "x86_64")
		return kX86_64;
	if (name == "arm64" || name == "aarch64")
		return kArm64;
	raise(Errc::BadConfig,
	      "unknown architecture '" + std::string(name) + "'");
}

ArchProfile parse_arch_profile(std::string_view text)
{
	ArchProfile p;
	std::istringstream in{std::string(text)};
	std::string line;
	while (std::getline(in, line)) {
		auto hash = line.find('#');
		if (hash != std::string::npos)
			line.resize(hash);
		auto eq = line.find('=');
		if (eq == std::string::npos)
			continue;
		auto trim = [](std::string s) {
			size_t a = s.find_first_not_of(" \t");
			size_t b = s.find_last_not_of(" \t");
			return a == std::string::npos
				       ? std::string()
				       : s.substr(a, b - a + 1);
		};
		std::string key = trim(line.substr(0, eq));
		std::string value = trim(line.substr(eq + 1));
		if (key == "name") {
			p.name = value;
		} else if (key == "pointer_width") {
			p.pointer_width = uint32_t(std::stoul(value));
		} else if (key == "endianness") {
			if (value == "little")
				p.endianness = Endian::little;
			else if (value == "big")
				p.endianness = Endian::big;
			else
				raise(Errc::BadConfig,
				      "bad endianness '" + value + "'");
		} else if (key == "param_reg_offsets") {
			std::istringstream vs(value);
			std::string tok;
			while (std::getline(vs, tok, ','))
				p.param_reg_offsets.push_back(
					uint16_t(std::stoul(tok)));
		} else {
			raise(Errc::BadConfig,
			      "unknown profile key '" + key + "'");
		}
	}
	if (p.name.empty())
		raise(Errc::BadConfig, "profile has no name");
	validate_profile(p);
	return p;
}

ArchProfile load_arch_profile(const std::filesystem::path &path)
{
	std::ifstream in(path);
	if (!in)
		raise(Errc::BadConfig,
		      "cannot open arch profile " + path.string());
	std::ostringstream buf;
	buf << in.rdbuf();
	return parse_arch_profile(buf.str());
}

std::vector<PtRegsAccess>
find_ptregs_accesses(std::span<const CoreRelo> relos, const BtfTypeGraph &local,
		     const ArchProfile &from)
{
	std::vector<PtRegsAccess> out;
	for (const CoreRelo &r : relos) {
		if (r.kind != core::kFieldByteOffset)
			continue;
		uint32_t root = local.resolve(r.type_id);
		const BtfType &t = local.type(root);
		if (t.kind != BtfKind::Struct || t.name != "pt_regs")
			continue;
		uint64_t off = core_local_offset(local, r);
		auto it = std::find(from.param_reg_offsets.begin(),
				    from.param_reg_offsets.end(), off);
		if (it == from.param_reg_offsets.end())
			continue; // not a parameter register slot
		out.push_back({r.insn_off / 8,
			       uint32_t(it - from.param_reg_offsets.begin())});
	}
	return out;
}

EbpfProgramImage relocate_ptregs(const EbpfProgramImage &image,
				 std::span<const PtRegsAccess> accesses,
				 const ArchProfile &from, const ArchProfile &to)
{
	EbpfProgramImage out = image;
	for (const PtRegsAccess &a : accesses) {
		if (a.param_index >= from.param_reg_offsets.size() ||
		    a.param_index >= to.param_reg_offsets.size())
			raise(Errc::ParamIndexOutOfRange,
			      "parameter " + std::to_string(a.param_index) +
				      " exceeds the profile's " +
				      std::to_string(std::min(
					      from.param_reg_offsets.size(),
					      to.param_reg_offsets.size())) +
				      " slots");
		if (a.insn_index >= out.insns.size())
			raise(Errc::RelocOutOfRange,
			      "pt_regs access instruction " +
				      std::to_string(a.insn_index) +
				      " outside program");
		Insn &ins = out.insns[a.insn_index];
		if (!insn::is_mem_access(ins.opcode))
			raise(Errc::OffsetMismatch,
			      "pt_regs access instruction " +
				      std::to_string(a.insn_index) +
				      " is not a memory access");
		uint16_t expect = from.param_reg_offsets[a.param_index];
		if (ins.offset < 0 || uint16_t(ins.offset) != expect)
			raise(Errc::OffsetMismatch,
			      "instruction offset " +
				      std::to_string(ins.offset) +
				      " does not match " + from.name +
				      " parameter " +
				      std::to_string(a.param_index) +
				      " slot " + std::to_string(expect));
		ins.offset = int16_t(to.param_reg_offsets[a.param_index]);
	}
	out.arch_profile = to.name;
	return out;
}

} // namespace wasmbpf
