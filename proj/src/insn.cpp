// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/insn.hpp"

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

std::vector<Insn> decode_instructions(std::span<const uint8_t> bytes,
				      Endian endian)
{
	if (bytes.size() % 8 != 0)
		raise(Errc::BadLength,
		      "instruction stream length " +
			      std::to_string(bytes.size()) +
			      " is not a multiple of 8");

	const bool be = endian == Endian::big;
	size_t n = bytes.size() / 8;
	std::vector<Insn> out;
	out.reserve(n);

	bool pending_imm64_slot = false;
	for (size_t i = 0; i < n; i++) {
		const uint8_t *p = bytes.data() + i * 8;
		Insn ins;
		ins.opcode = p[0];
		// dst/src nibbles swap between the two encodings
		ins.dst_reg = be ? (p[1] >> 4) : (p[1] & 0x0f);
		ins.src_reg = be ? (p[1] & 0x0f) : (p[1] >> 4);
		if (be) {
			ins.offset = static_cast<int16_t>(
				(uint16_t(p[2]) << 8) | p[3]);
			ins.imm = static_cast<int32_t>(
				(uint32_t(p[4]) << 24) | (uint32_t(p[5]) << 16) |
				(uint32_t(p[6]) << 8) | p[7]);
		} else {
			ins.offset = static_cast<int16_t>(
				uint16_t(p[2]) | (uint16_t(p[3]) << 8));
			ins.imm = static_cast<int32_t>(
				uint32_t(p[4]) | (uint32_t(p[5]) << 8) |
				(uint32_t(p[6]) << 16) | (uint32_t(p[7]) << 24));
		}

		// the pseudo slot after LD_IMM64 is exempt from register checks
		if (!pending_imm64_slot &&
		    (ins.dst_reg > insn::kMaxReg || ins.src_reg > insn::kMaxReg))
			raise(Errc::BadRegister,
			      "instruction " + std::to_string(i) +
				      " uses register > r10");
		pending_imm64_slot =
			!pending_imm64_slot && insn::is_ld_imm64(ins);
		out.push_back(ins);
	}
	if (pending_imm64_slot)
		raise(Errc::TruncatedLdImm64,
		      "LD_IMM64 at instruction " + std::to_string(n - 1) +
			      " has no second slot");
	return out;
}

std::vector<uint8_t> encode_instructions(std::span<const Insn> insns,
					 Endian endian)
{
	const bool be = endian == Endian::big;
	std::vector<uint8_t> out;
	out.reserve(insns.size() * 8);
	for (const Insn &ins : insns) {
		uint8_t regs = be ? uint8_t((ins.dst_reg << 4) | ins.src_reg)
				  : uint8_t((ins.src_reg << 4) | ins.dst_reg);
		uint16_t off = static_cast<uint16_t>(ins.offset);
		uint32_t imm = static_cast<uint32_t>(ins.imm);
		out.push_back(ins.opcode);
		out.push_back(regs);
		if (be) {
			out.push_back(uint8_t(off >> 8));
			out.push_back(uint8_t(off));
			out.push_back(uint8_t(imm >> 24));
			out.push_back(uint8_t(imm >> 16));
			out.push_back(uint8_t(imm >> 8));
			out.push_back(uint8_t(imm));
		} else {
			out.push_back(uint8_t(off));
			out.push_back(uint8_t(off >> 8));
			out.push_back(uint8_t(imm));
			out.push_back(uint8_t(imm >> 8));
			out.push_back(uint8_t(imm >> 16));
			out.push_back(uint8_t(imm >> 24));
		}
	}
	return out;
}

} // namespace wasmbpf
