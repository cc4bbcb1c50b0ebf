// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/core_relo.hpp"

#include <cstring>
#include <optional>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

constexpr uint16_t kBtfMagic = 0xeB9F;

uint32_t rd32(std::span<const uint8_t> b, size_t off, const char *what)
{
	if (off + 4 > b.size())
		raise(Errc::TruncatedHeader,
		      std::string(".BTF.ext truncated reading ") + what);
	uint32_t v;
	std::memcpy(&v, b.data() + off, 4);
	return v;
}

std::string btf_string(std::span<const uint8_t> btf, uint32_t off)
{
	// reach into the raw BTF string section without a full parse
	if (btf.size() < 24)
		raise(Errc::TruncatedHeader, "BTF blob too small");
	uint32_t hdr_len = rd32(btf, 4, "hdr_len");
	uint32_t str_off = rd32(btf, 16, "str_off");
	uint32_t str_len = rd32(btf, 20, "str_len");
	uint64_t start = uint64_t(hdr_len) + str_off;
	if (start + str_len > btf.size())
		raise(Errc::TruncatedHeader, "BTF string section out of range");
	if (off >= str_len)
		raise(Errc::BadStringOffset,
		      "access string offset out of range");
	const uint8_t *p = btf.data() + start + off;
	const uint8_t *end = btf.data() + start + str_len;
	const uint8_t *nul = std::find(p, end, uint8_t(0));
	if (nul == end)
		raise(Errc::BadStringOffset, "unterminated access string");
	return std::string(p, nul);
}

std::vector<uint32_t> decode_access_string(const std::string &s)
{
	std::vector<uint32_t> out;
	size_t pos = 0;
	while (pos < s.size()) {
		size_t colon = s.find(':', pos);
		std::string part = s.substr(
			pos, colon == std::string::npos ? std::string::npos
							: colon - pos);
		if (part.empty())
			raise(Errc::BadAccessPath,
			      "empty component in access string '" + s + "'");
		out.push_back(uint32_t(std::stoul(part)));
		if (colon == std::string::npos)
			break;
		pos = colon + 1;
	}
	if (out.empty())
		raise(Errc::BadAccessPath, "empty access string");
	return out;
}

// One step of a name-identified access path.
struct PathStep {
	bool is_member = false;
	std::string member_name; // when is_member
	uint32_t array_index = 0; // otherwise
};

// Resolves access indices against `graph` into named steps.
std::vector<PathStep> name_path(const BtfTypeGraph &graph, uint32_t root,
				std::span<const uint32_t> access)
{
	std::vector<PathStep> steps;
	uint32_t id = graph.resolve(root);
	for (size_t i = 1; i < access.size(); i++) {
		const BtfType &t = graph.type(graph.resolve(id));
		uint32_t idx = access[i];
		if (t.kind == BtfKind::Struct || t.kind == BtfKind::Union) {
			if (idx >= t.members.size())
				raise(Errc::BadAccessPath,
				      "member index " + std::to_string(idx) +
					      " out of range in '" + t.name +
					      "'");
			const BtfMember &m = t.members[idx];
			if (m.bitfield_size != 0 || m.bit_offset % 8 != 0)
				raise(Errc::BitfieldUnsupported,
				      "bitfield member '" + m.name +
					      "' in relocation path");
			steps.push_back({true, m.name, 0});
			id = m.type_id;
		} else if (t.kind == BtfKind::Array) {
			steps.push_back({false, "", idx});
			id = t.array_elem_type;
		} else {
			raise(Errc::BadAccessPath,
			      std::string("cannot step into ") +
				      btf_kind_name(t.kind));
		}
	}
	return steps;
}

// Finds a member by name, descending into anonymous struct/union members.
struct MemberHit {
	uint64_t offset;
	uint32_t type_id;
};

std::optional<MemberHit> find_member(const BtfTypeGraph &graph, uint32_t id,
				     const std::string &name)
{
	const BtfType &t = graph.type(graph.resolve(id));
	if (t.kind != BtfKind::Struct && t.kind != BtfKind::Union)
		return std::nullopt;
	for (const BtfMember &m : t.members) {
		if (m.bit_offset % 8 != 0)
			continue;
		if (m.name == name) {
			if (m.bitfield_size != 0)
				raise(Errc::BitfieldUnsupported,
				      "target member '" + name +
					      "' is a bitfield");
			return MemberHit{m.bit_offset / 8, m.type_id};
		}
		if (m.name.empty()) {
			auto hit = find_member(graph, m.type_id, name);
			if (hit)
				return MemberHit{m.bit_offset / 8 + hit->offset,
						 hit->type_id};
		}
	}
	return std::nullopt;
}

// Walks the named path in the target graph; nullopt when a field is missing.
std::optional<uint64_t> target_offset(const BtfTypeGraph &target,
				      const std::string &root_name,
				      BtfKind root_kind, uint32_t leading_index,
				      std::span<const PathStep> steps)
{
	auto root = target.find_by_name(root_kind, root_name);
	if (!root)
		return std::nullopt;
	uint32_t id = *root;
	uint64_t off = leading_index * target.type_size(id);
	for (const PathStep &s : steps) {
		if (s.is_member) {
			auto hit = find_member(target, id, s.member_name);
			if (!hit)
				return std::nullopt;
			off += hit->offset;
			id = hit->type_id;
		} else {
			const BtfType &t = target.type(target.resolve(id));
			if (t.kind != BtfKind::Array ||
			    s.array_index >= t.array_nelems)
				return std::nullopt;
			off += target.type_size(t.array_elem_type) *
			       s.array_index;
			id = t.array_elem_type;
		}
	}
	return off;
}

} // namespace

std::map<std::string, std::vector<CoreRelo>>
parse_core_relos(std::span<const uint8_t> btf_ext, std::span<const uint8_t> btf)
{
	std::map<std::string, std::vector<CoreRelo>> out;
	if (btf_ext.empty())
		return out;
	if (btf_ext.size() < 12)
		raise(Errc::TruncatedHeader, ".BTF.ext blob too small");
	uint16_t magic;
	std::memcpy(&magic, btf_ext.data(), 2);
	if (magic != kBtfMagic)
		raise(Errc::BadMagic, ".BTF.ext magic mismatch");
	uint32_t hdr_len = rd32(btf_ext, 4, "hdr_len");
	if (hdr_len < 32)
		return out; // header predates CO-RE records
	uint32_t core_off = rd32(btf_ext, 24, "core_relo_off");
	uint32_t core_len = rd32(btf_ext, 28, "core_relo_len");
	if (core_len == 0)
		return out;

	uint64_t base = uint64_t(hdr_len) + core_off;
	if (base + core_len > btf_ext.size())
		raise(Errc::TruncatedHeader,
		      ".BTF.ext core_relo section out of range");
	uint32_t rec_size = rd32(btf_ext, base, "record size");
	if (rec_size < 16)
		raise(Errc::TruncatedHeader, "core_relo record size too small");

	uint64_t pos = base + 4;
	uint64_t end = base + core_len;
	while (pos < end) {
		uint32_t sec_name_off = rd32(btf_ext, pos, "section name");
		uint32_t num = rd32(btf_ext, pos + 4, "record count");
		pos += 8;
		std::string sec = btf_string(btf, sec_name_off);
		auto &list = out[sec];
		for (uint32_t i = 0; i < num; i++) {
			if (pos + rec_size > end)
				raise(Errc::TruncatedHeader,
				      "core_relo records truncated");
			CoreRelo r;
			r.insn_off = rd32(btf_ext, pos, "insn_off");
			r.type_id = rd32(btf_ext, pos + 4, "type_id");
			uint32_t access_off =
				rd32(btf_ext, pos + 8, "access_str_off");
			r.kind = rd32(btf_ext, pos + 12, "kind");
			r.access_str = btf_string(btf, access_off);
			r.access_spec = decode_access_string(r.access_str);
			if (r.insn_off % 8 != 0)
				raise(Errc::RelocOutOfRange,
				      "core relocation insn_off not "
				      "instruction-aligned");
			list.push_back(std::move(r));
			pos += rec_size;
		}
	}
	return out;
}

std::vector<CoreRelo> relos_for_program(
	const std::map<std::string, std::vector<CoreRelo>> &by_section,
	const ProgramBlob &prog)
{
	std::vector<CoreRelo> out;
	auto it = by_section.find(prog.section_name);
	if (it == by_section.end())
		return out;
	uint32_t begin = prog.section_offset;
	uint32_t end = begin + uint32_t(prog.insns.size()) * 8;
	for (const CoreRelo &r : it->second) {
		if (r.insn_off < begin || r.insn_off >= end)
			continue;
		CoreRelo rebased = r;
		rebased.insn_off -= begin;
		out.push_back(std::move(rebased));
	}
	return out;
}

uint64_t core_local_offset(const BtfTypeGraph &local, const CoreRelo &relo)
{
	uint32_t root = local.resolve(relo.type_id);
	uint64_t off = relo.access_spec[0] * local.type_size(root);
	if (relo.access_spec.size() > 1)
		off += field_byte_offset(
			local, root,
			std::span(relo.access_spec).subspan(1));
	return off;
}

EbpfProgramImage apply_core_relocations(const EbpfProgramImage &image,
					std::span<const CoreRelo> relos,
					const BtfTypeGraph &local,
					const BtfTypeGraph &target)
{
	EbpfProgramImage out = image;
	for (const CoreRelo &relo : relos) {
		if (relo.kind != core::kFieldByteOffset &&
		    relo.kind != core::kFieldExists)
			raise(Errc::UnsupportedReloKind,
			      "CO-RE relocation kind " +
				      std::to_string(relo.kind) +
				      " is not supported");

		uint32_t idx = relo.insn_off / 8;
		if (idx >= out.insns.size())
			raise(Errc::RelocOutOfRange,
			      "relocation at byte " +
				      std::to_string(relo.insn_off) +
				      " outside program '" + out.name + "'");
		Insn &ins = out.insns[idx];

		uint32_t root = local.resolve(relo.type_id);
		const BtfType &root_type = local.type(root);
		auto steps = name_path(local, root,
				       std::span(relo.access_spec));
		auto target_off = target_offset(target, root_type.name,
						root_type.kind,
						relo.access_spec[0],
						std::span(steps));

		if (relo.kind == core::kFieldExists) {
			int32_t exists = target_off.has_value() ? 1 : 0;
			uint8_t cls = ins.opcode & insn::kClassMask;
			bool mov_imm =
				(cls == insn::kClassAlu ||
				 cls == insn::kClassAlu64) &&
				(ins.opcode & insn::kOpMask) == insn::kAluMov &&
				!(ins.opcode & insn::kSrcX);
			if (!mov_imm && !insn::is_ld_imm64(ins))
				raise(Errc::RelocOutOfRange,
				      "field_exists relocation targets a "
				      "non-immediate instruction");
			ins.imm = exists;
			continue;
		}

		uint64_t local_off = core_local_offset(local, relo);
		if (!target_off)
			raise(Errc::TargetFieldMissing,
			      "field '" + relo.access_str + "' of '" +
				      root_type.name +
				      "' is absent in the target BTF");

		if (insn::is_mem_access(ins.opcode)) {
			if (ins.offset < 0 ||
			    uint64_t(ins.offset) != local_off)
				raise(Errc::RelocOutOfRange,
				      "instruction offset " +
					      std::to_string(ins.offset) +
					      " does not encode local field "
					      "offset " +
					      std::to_string(local_off));
			if (*target_off > 0x7fff)
				raise(Errc::RelocOutOfRange,
				      "target offset " +
					      std::to_string(*target_off) +
					      " does not fit a 16-bit field");
			ins.offset = int16_t(*target_off);
		} else if (insn::is_ld_imm64(ins) ||
			   ((ins.opcode & insn::kClassMask) == insn::kClassAlu ||
			    (ins.opcode & insn::kClassMask) ==
				    insn::kClassAlu64)) {
			if (ins.imm < 0 || uint64_t(ins.imm) != local_off)
				raise(Errc::RelocOutOfRange,
				      "instruction immediate " +
					      std::to_string(ins.imm) +
					      " does not encode local field "
					      "offset " +
					      std::to_string(local_off));
			ins.imm = int32_t(*target_off);
		} else {
			raise(Errc::RelocOutOfRange,
			      "relocation targets an unsupported instruction "
			      "class");
		}
	}
	return out;
}

} // namespace wasmbpf
