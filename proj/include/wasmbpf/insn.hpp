// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wasmbpf {

enum class Endian { little, big };

/// One 64-bit eBPF instruction. LD_IMM64 occupies two of these; the second
/// slot carries the high 32 bits of the immediate and nothing else.
struct Insn {
	uint8_t opcode = 0;
	uint8_t dst_reg = 0;
	uint8_t src_reg = 0;
	int16_t offset = 0;
	int32_t imm = 0;

	bool operator==(const Insn &) const = default;
};

namespace insn {

constexpr uint8_t kClassMask = 0x07;
constexpr uint8_t kClassLd = 0x00;
constexpr uint8_t kClassLdx = 0x01;
constexpr uint8_t kClassSt = 0x02;
constexpr uint8_t kClassStx = 0x03;
constexpr uint8_t kClassAlu = 0x04;
constexpr uint8_t kClassJmp = 0x05;
constexpr uint8_t kClassJmp32 = 0x06;
constexpr uint8_t kClassAlu64 = 0x07;

constexpr uint8_t kSrcK = 0x00; // operand from immediate
constexpr uint8_t kSrcX = 0x08; // operand from src_reg

constexpr uint8_t kOpMask = 0xf0;
constexpr uint8_t kAluAdd = 0x00;
constexpr uint8_t kAluSub = 0x10;
constexpr uint8_t kAluMul = 0x20;
constexpr uint8_t kAluDiv = 0x30;
constexpr uint8_t kAluOr = 0x40;
constexpr uint8_t kAluAnd = 0x50;
constexpr uint8_t kAluLsh = 0x60;
constexpr uint8_t kAluRsh = 0x70;
constexpr uint8_t kAluNeg = 0x80;
constexpr uint8_t kAluMod = 0x90;
constexpr uint8_t kAluXor = 0xa0;
constexpr uint8_t kAluMov = 0xb0;
constexpr uint8_t kAluArsh = 0xc0;
constexpr uint8_t kAluEnd = 0xd0;

constexpr uint8_t kJmpJa = 0x00;
constexpr uint8_t kJmpJeq = 0x10;
constexpr uint8_t kJmpJgt = 0x20;
constexpr uint8_t kJmpJge = 0x30;
constexpr uint8_t kJmpJset = 0x40;
constexpr uint8_t kJmpJne = 0x50;
constexpr uint8_t kJmpJsgt = 0x60;
constexpr uint8_t kJmpJsge = 0x70;
constexpr uint8_t kJmpCall = 0x80;
constexpr uint8_t kJmpExit = 0x90;
constexpr uint8_t kJmpJlt = 0xa0;
constexpr uint8_t kJmpJle = 0xb0;
constexpr uint8_t kJmpJslt = 0xc0;
constexpr uint8_t kJmpJsle = 0xd0;

// ld/st size bits
constexpr uint8_t kSizeMask = 0x18;
constexpr uint8_t kSizeW = 0x00;
constexpr uint8_t kSizeH = 0x08;
constexpr uint8_t kSizeB = 0x10;
constexpr uint8_t kSizeDw = 0x18;

// ld/st mode bits
constexpr uint8_t kModeMask = 0xe0;
constexpr uint8_t kModeImm = 0x00;
constexpr uint8_t kModeAbs = 0x20;
constexpr uint8_t kModeInd = 0x40;
constexpr uint8_t kModeMem = 0x60;
constexpr uint8_t kModeAtomic = 0xc0;

constexpr uint8_t kLdImm64 = kClassLd | kSizeDw | kModeImm; // 0x18
constexpr uint8_t kExit = kClassJmp | kJmpExit;		    // 0x95
constexpr uint8_t kCall = kClassJmp | kJmpCall;		    // 0x85

// src_reg value marking an LD_IMM64 that references a map
constexpr uint8_t kPseudoMapFd = 1;

constexpr uint8_t kMaxReg = 10;

inline bool is_ld_imm64(const Insn &i)
{
	return i.opcode == kLdImm64;
}

inline bool is_mem_access(uint8_t opcode)
{
	uint8_t cls = opcode & kClassMask;
	return cls == kClassLdx || cls == kClassSt || cls == kClassStx;
}

} // namespace insn

/// Decodes raw instruction bytes. Length must be a multiple of 8; register
/// fields are range-checked; an LD_IMM64 must be followed by its second slot.
std::vector<Insn> decode_instructions(std::span<const uint8_t> bytes,
				      Endian endian = Endian::little);

std::vector<uint8_t> encode_instructions(std::span<const Insn> insns,
					 Endian endian = Endian::little);

} // namespace wasmbpf
