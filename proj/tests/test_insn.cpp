// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <random>

#include "wasmbpf/errors.hpp"
#include "wasmbpf/insn.hpp"

using namespace wasmbpf;

TEST_CASE("decode recognizes MOV64 imm")
{
	// b7 00 00 00 2a 00 00 00 disassembles to r0 = 42
	std::vector<uint8_t> bytes{0xb7, 0x00, 0x00, 0x00,
				   0x2a, 0x00, 0x00, 0x00};
	auto insns = decode_instructions(bytes);
	REQUIRE(insns.size() == 1);
	CHECK(insns[0].opcode ==
	      (insn::kClassAlu64 | insn::kAluMov | insn::kSrcK));
	CHECK(insns[0].dst_reg == 0);
	CHECK(insns[0].imm == 42);
}

TEST_CASE("decode recognizes EXIT")
{
	std::vector<uint8_t> bytes{0x95, 0x00, 0x00, 0x00,
				   0x00, 0x00, 0x00, 0x00};
	auto insns = decode_instructions(bytes);
	REQUIRE(insns.size() == 1);
	CHECK(insns[0].opcode == insn::kExit);
}

TEST_CASE("decode rejects 7 bytes")
{
	std::vector<uint8_t> bytes(7, 0);
	CHECK_THROWS_WITH_AS(decode_instructions(bytes),
			     doctest::Contains("not a multiple of 8"), Error);
	try {
		decode_instructions(bytes);
	} catch (const Error &e) {
		CHECK(e.code() == Errc::BadLength);
	}
}

TEST_CASE("decode rejects registers above r10")
{
	// dst = 11
	std::vector<uint8_t> bytes{0xb7, 0x0b, 0x00, 0x00,
				   0x00, 0x00, 0x00, 0x00};
	try {
		decode_instructions(bytes);
		FAIL("expected BadRegister");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::BadRegister);
	}
}

TEST_CASE("decode rejects LD_IMM64 without its second slot")
{
	std::vector<uint8_t> bytes{0x18, 0x01, 0x00, 0x00,
				   0x07, 0x00, 0x00, 0x00};
	try {
		decode_instructions(bytes);
		FAIL("expected TruncatedLdImm64");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::TruncatedLdImm64);
	}
}

TEST_CASE("LD_IMM64 second slot escapes register validation")
{
	std::vector<uint8_t> bytes;
	// ld_imm64 r1, <64-bit imm whose second slot has junk reg nibbles>
	std::vector<uint8_t> lo{0x18, 0x01, 0x00, 0x00, 0xff, 0xff, 0xff, 0xff};
	std::vector<uint8_t> hi{0x00, 0x00, 0x00, 0x00, 0xee, 0xff, 0xc0, 0x00};
	bytes.insert(bytes.end(), lo.begin(), lo.end());
	bytes.insert(bytes.end(), hi.begin(), hi.end());
	auto insns = decode_instructions(bytes);
	CHECK(insns.size() == 2);
}

TEST_CASE("encode/decode roundtrip on random instruction streams")
{
	std::mt19937 rng(7);
	for (int trial = 0; trial < 200; trial++) {
		std::vector<Insn> insns;
		size_t n = 1 + rng() % 20;
		for (size_t i = 0; i < n; i++) {
			Insn ins;
			ins.opcode = uint8_t(rng());
			if (ins.opcode == insn::kLdImm64)
				ins.opcode = 0xb7; // keep streams pairless
			ins.dst_reg = uint8_t(rng() % 11);
			ins.src_reg = uint8_t(rng() % 11);
			ins.offset = int16_t(rng());
			ins.imm = int32_t(rng());
			insns.push_back(ins);
		}
		auto bytes = encode_instructions(insns);
		auto back = decode_instructions(bytes);
		CHECK(back == insns);
	}
}

TEST_CASE("big-endian decode swaps register nibbles and fields")
{
	// the same MOV64 r1, 42 in big-endian encoding
	std::vector<uint8_t> bytes{0xb7, 0x10, 0x00, 0x00,
				   0x00, 0x00, 0x00, 0x2a};
	auto insns = decode_instructions(bytes, Endian::big);
	REQUIRE(insns.size() == 1);
	CHECK(insns[0].dst_reg == 1);
	CHECK(insns[0].imm == 42);
}
