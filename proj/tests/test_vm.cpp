// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <cstring>
#include <random>

#include "support/fixtures.hpp"
#include "wasmbpf/errors.hpp"
#include "wasmbpf/vm.hpp"

using namespace wasmbpf;
using namespace wasmbpf::vm;

namespace {

EbpfProgramImage image_of(std::vector<Insn> insns,
			  ProgType type = ProgType::tracepoint)
{
	EbpfProgramImage img;
	img.name = "test";
	img.prog_type = type;
	img.insns = std::move(insns);
	return img;
}

Errc trap_code(const std::function<void()> &fn)
{
	try {
		fn();
	} catch (const Error &e) {
		return e.code();
	}
	throw std::runtime_error("expected a trap");
}

VmEnv plain_env()
{
	VmEnv env;
	env.ktime_ns = [] { return uint64_t(112233); };
	env.pid_tgid = (uint64_t(42) << 32) | 43;
	return env;
}

} // namespace

TEST_CASE("MOV64 r0, 42; EXIT returns 42")
{
	auto img = image_of({{0xb7, 0, 0, 0, 42}, {0x95, 0, 0, 0, 0}});
	VmEnv env = plain_env();
	CHECK(execute(img, {}, env) == 42);
}

TEST_CASE("ALU64 add wraps around two's complement")
{
	// r1 = 0x7fffffffffffffff; r1 += 1; r0 = r1
	auto img = image_of({
		{0x18, 1, 0, 0, int32_t(0xffffffff)},
		{0x00, 0, 0, 0, int32_t(0x7fffffff)},
		{0x07, 1, 0, 0, 1},	   // add imm 1
		{0xbf, 0, 1, 0, 0},	   // r0 = r1
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(execute(img, {}, env) == 0x8000000000000000ull);
}

TEST_CASE("ALU32 MOV zero-extends")
{
	auto img = image_of({
		{0xb4, 2, 0, 0, -1}, // w2 = -1
		{0xbf, 0, 2, 0, 0},  // r0 = r2
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(execute(img, {}, env) == 0x00000000ffffffffull);
}

TEST_CASE("division and modulo by zero follow the documented semantics")
{
	SUBCASE("DIV64 by zero register yields 0")
	{
		auto img = image_of({
			{0xb7, 3, 0, 0, 1234},
			{0xb7, 4, 0, 0, 0},
			{0x3f, 3, 4, 0, 0}, // r3 /= r4
			{0xbf, 0, 3, 0, 0},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == 0);
	}
	SUBCASE("MOD64 by zero leaves dst unchanged")
	{
		auto img = image_of({
			{0xb7, 3, 0, 0, 1234},
			{0xb7, 4, 0, 0, 0},
			{0x9f, 3, 4, 0, 0}, // r3 %= r4
			{0xbf, 0, 3, 0, 0},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == 1234);
	}
}

TEST_CASE("jump target outside range is load-time BadJump")
{
	auto img = image_of({
		{0x05, 0, 0, 7, 0}, // ja +7
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(trap_code([&] { execute(img, {}, env); }) == Errc::BadJump);
}

TEST_CASE("jump into an LD_IMM64 pair is BadJump")
{
	auto img = image_of({
		{0x05, 0, 0, 1, 0}, // ja into the second slot
		{0x18, 1, 0, 0, 1},
		{0x00, 0, 0, 0, 0},
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(trap_code([&] { execute(img, {}, env); }) == Errc::BadJump);
}

TEST_CASE("writes to r10 are rejected at load time")
{
	auto img = image_of({
		{0xb7, 10, 0, 0, 1},
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(trap_code([&] { execute(img, {}, env); }) ==
	      Errc::BadInstruction);
}

TEST_CASE("a tight loop exhausts the instruction budget")
{
	auto img = image_of({
		{0x05, 0, 0, -1, 0}, // ja -1
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	VmOptions opts;
	opts.insn_budget = 10000;
	CHECK(trap_code([&] { execute(img, {}, env, opts); }) ==
	      Errc::BudgetExhausted);
}

TEST_CASE("stack accesses are bounds-checked")
{
	SUBCASE("8 bytes at r10-8 is permitted")
	{
		auto img = image_of({
			{0x7b, 10, 1, -8, 0}, // *(u64*)(r10-8) = r1
			{0x79, 0, 10, -8, 0}, // r0 = *(u64*)(r10-8)
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == 0);
	}
	SUBCASE("8 bytes at r10-512 touches the base exactly")
	{
		auto img = image_of({
			{0x7b, 10, 1, -512, 0},
			{0x79, 0, 10, -512, 0},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == 0);
	}
	SUBCASE("8 bytes at r10-516 crosses the base and traps")
	{
		auto img = image_of({
			{0x7b, 10, 1, -516, 0},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(trap_code([&] { execute(img, {}, env); }) ==
		      Errc::OutOfBounds);
	}
	SUBCASE("read past the stack top traps")
	{
		auto img = image_of({
			{0x79, 0, 10, 0, 0}, // r0 = *(u64*)(r10)
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(trap_code([&] { execute(img, {}, env); }) ==
		      Errc::OutOfBounds);
	}
}

TEST_CASE("ctx is read-only for tracing programs and writable for xdp")
{
	std::vector<Insn> insns{
		{0x62, 1, 0, 0, 7}, // *(u32*)(r1+0) = 7
		{0xb7, 0, 0, 0, 0},
		{0x95, 0, 0, 0, 0},
	};
	std::vector<uint8_t> ctx(8, 0);

	auto tracing = image_of(insns, ProgType::tracepoint);
	VmEnv env = plain_env();
	CHECK(trap_code([&] { execute(tracing, ctx, env); }) ==
	      Errc::OutOfBounds);

	auto xdp = image_of(insns, ProgType::xdp);
	CHECK(execute(xdp, ctx, env) == 0);
	uint32_t stored;
	std::memcpy(&stored, ctx.data(), 4);
	CHECK(stored == 7);
}

TEST_CASE("guard patterns around the context stay intact")
{
	// program writes over the whole writable ctx, guards must survive
	std::vector<uint8_t> buffer(64, 0xaa);
	std::span<uint8_t> ctx(buffer.data() + 16, 32);
	std::vector<Insn> insns;
	for (int16_t off = 0; off < 32; off += 8)
		insns.push_back({0x7b, 1, 2, off, 0}); // store r2(=0) everywhere
	insns.push_back({0xb7, 0, 0, 0, 0});
	insns.push_back({0x95, 0, 0, 0, 0});
	auto img = image_of(insns, ProgType::xdp);
	VmEnv env = plain_env();
	execute(img, ctx, env);
	for (size_t i = 0; i < 16; i++) {
		CHECK(buffer[i] == 0xaa);
		CHECK(buffer[48 + i] == 0xaa);
	}
	for (size_t i = 16; i < 48; i++)
		CHECK(buffer[i] == 0x00);
}

TEST_CASE("unknown helper ids trap")
{
	auto img = image_of({
		{0x85, 0, 0, 0, 9999},
		{0x95, 0, 0, 0, 0},
	});
	VmEnv env = plain_env();
	CHECK(trap_code([&] { execute(img, {}, env); }) == Errc::UnknownHelper);
}

TEST_CASE("map helpers write and read through the registry")
{
	MapRegistry reg;
	MapDef def;
	def.name = "m";
	def.type = MapType::hash;
	def.key_size = 4;
	def.value_size = 8;
	def.max_entries = 8;
	auto store = reg.create(def);

	// key=1 val=7: store on stack, call update, then lookup and load
	std::vector<Insn> insns{
		{0x62, 10, 0, -4, 1},	// *(u32*)(r10-4) = 1 (key)
		{0xb7, 6, 0, 0, 7},
		{0x7b, 10, 6, -16, 0},	// *(u64*)(r10-16) = 7 (value)
		{0x18, 1, 1, 0, store->handle()},
		{0x00, 0, 0, 0, 0},
		{0xbf, 2, 10, 0, 0},
		{0x07, 2, 0, 0, -4},	// r2 = r10-4
		{0xbf, 3, 10, 0, 0},
		{0x07, 3, 0, 0, -16},	// r3 = r10-16
		{0xb7, 4, 0, 0, 0},	// flags
		{0x85, 0, 0, 0, 2},	// map_update_elem
		{0x18, 1, 1, 0, store->handle()},
		{0x00, 0, 0, 0, 0},
		{0xbf, 2, 10, 0, 0},
		{0x07, 2, 0, 0, -4},
		{0x85, 0, 0, 0, 1},	// map_lookup_elem
		{0x15, 0, 0, 2, 0},	// if r0 == 0 goto +2
		{0x79, 0, 0, 0, 0},	// r0 = *(u64*)(r0)
		{0x05, 0, 0, 1, 0},
		{0xb7, 0, 0, 0, -1},	// miss marker
		{0x95, 0, 0, 0, 0},
	};
	auto img = image_of(insns);
	VmEnv env = plain_env();
	env.maps = &reg;
	CHECK(execute(img, {}, env) == 7);

	// the host-side view agrees
	uint32_t key = 1;
	std::vector<uint8_t> out(8);
	CHECK(store->lookup(std::span(reinterpret_cast<uint8_t *>(&key), 4),
			    out) == MapStatus::ok);
	uint64_t host_value;
	std::memcpy(&host_value, out.data(), 8);
	CHECK(host_value == 7);
}

TEST_CASE("ringbuf helpers reserve, fill and submit records")
{
	MapRegistry reg;
	MapDef def;
	def.name = "rb";
	def.type = MapType::ringbuf;
	def.max_entries = 4096;
	auto store = reg.create(def);

	std::vector<Insn> insns{
		{0x18, 1, 1, 0, store->handle()},
		{0x00, 0, 0, 0, 0},
		{0xb7, 2, 0, 0, 16},	// size
		{0xb7, 3, 0, 0, 0},	// flags
		{0x85, 0, 0, 0, 131},	// ringbuf_reserve
		{0x15, 0, 0, 5, 0},	// if r0 == 0 exit
		{0xb7, 6, 0, 0, 0x11},
		{0x7b, 0, 6, 0, 0},	// payload[0..8] = 0x11
		{0x7b, 0, 6, 8, 0},	// payload[8..16] = 0x11
		{0xbf, 1, 0, 0, 0},
		{0x85, 0, 0, 0, 132},	// ringbuf_submit
		{0x95, 0, 0, 0, 0},
	};
	auto img = image_of(insns);
	VmEnv env = plain_env();
	env.maps = &reg;
	execute(img, {}, env);

	size_t got = store->ring().consume([&](std::span<const uint8_t> p) {
		REQUIRE(p.size() == 16);
		uint64_t a, b;
		std::memcpy(&a, p.data(), 8);
		std::memcpy(&b, p.data() + 8, 8);
		CHECK(a == 0x11);
		CHECK(b == 0x11);
		return true;
	});
	CHECK(got == 1);
}

TEST_CASE("helper-granted regions die with submit")
{
	MapRegistry reg;
	MapDef def;
	def.name = "rb";
	def.type = MapType::ringbuf;
	def.max_entries = 4096;
	auto store = reg.create(def);

	// write into the reservation after submitting it: must trap
	std::vector<Insn> insns{
		{0x18, 1, 1, 0, store->handle()},
		{0x00, 0, 0, 0, 0},
		{0xb7, 2, 0, 0, 8},
		{0xb7, 3, 0, 0, 0},
		{0x85, 0, 0, 0, 131},
		{0x15, 0, 0, 4, 0},
		{0xbf, 6, 0, 0, 0},
		{0xbf, 1, 0, 0, 0},
		{0x85, 0, 0, 0, 132}, // submit
		{0x7b, 6, 6, 0, 0},   // use-after-submit
		{0x95, 0, 0, 0, 0},
	};
	auto img = image_of(insns);
	VmEnv env = plain_env();
	env.maps = &reg;
	CHECK(trap_code([&] { execute(img, {}, env); }) == Errc::OutOfBounds);
}

TEST_CASE("tracing helpers report the configured identity")
{
	SUBCASE("pid_tgid")
	{
		auto img = image_of({
			{0x85, 0, 0, 0, 14},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == ((uint64_t(42) << 32) | 43));
	}
	SUBCASE("ktime")
	{
		auto img = image_of({
			{0x85, 0, 0, 0, 5},
			{0x95, 0, 0, 0, 0},
		});
		VmEnv env = plain_env();
		CHECK(execute(img, {}, env) == 112233);
	}
}

TEST_CASE("step_alu differential check against a simple evaluator")
{
	// quick scalar cross-check; the acceptance suite runs the full
	// 1000-program differential oracle
	std::mt19937 rng(11);
	std::array<uint64_t, 11> regs{};
	for (int step = 0; step < 20000; step++) {
		Insn ins;
		uint8_t ops[] = {0x00, 0x10, 0x20, 0x30, 0x40, 0x50, 0x60,
				 0x70, 0x90, 0xa0, 0xb0, 0xc0};
		uint8_t op = ops[rng() % 12];
		ins.opcode = uint8_t(op | (rng() % 2 ? 0x07 : 0x04) |
				     (rng() % 2 ? 0x08 : 0x00));
		ins.dst_reg = uint8_t(rng() % 10);
		ins.src_reg = uint8_t(rng() % 10);
		ins.imm = int32_t(rng());

		auto before = regs;
		step_alu(ins, regs);

		// independent recomputation with plain integer arithmetic
		bool is64 = (ins.opcode & 0x07) == 0x07;
		bool x = ins.opcode & 0x08;
		uint64_t a = before[ins.dst_reg];
		uint64_t b = x ? before[ins.src_reg]
			       : uint64_t(int64_t(ins.imm));
		if (!is64) {
			a &= 0xffffffffull;
			b &= 0xffffffffull;
		}
		uint64_t expect = 0;
		switch (op) {
		case 0x00:
			expect = a + b;
			break;
		case 0x10:
			expect = a - b;
			break;
		case 0x20:
			expect = a * b;
			break;
		case 0x30:
			expect = b == 0 ? 0 : a / b;
			break;
		case 0x40:
			expect = a | b;
			break;
		case 0x50:
			expect = a & b;
			break;
		case 0x60:
			expect = a << (b & (is64 ? 63 : 31));
			break;
		case 0x70:
			expect = a >> (b & (is64 ? 63 : 31));
			break;
		case 0x90:
			expect = b == 0 ? a : a % b;
			break;
		case 0xa0:
			expect = a ^ b;
			break;
		case 0xb0:
			expect = b;
			break;
		case 0xc0: {
			int64_t sa = is64 ? int64_t(a)
					  : int64_t(int32_t(uint32_t(a)));
			expect = uint64_t(sa >> (b & (is64 ? 63 : 31)));
			break;
		}
		}
		if (!is64)
			expect &= 0xffffffffull;
		CHECK(regs[ins.dst_reg] == expect);
	}
}
