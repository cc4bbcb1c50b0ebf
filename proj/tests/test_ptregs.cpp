// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <asm/ptrace.h>
#include <cstddef>

#include "support/fixtures.hpp"
#include "wasmbpf/arch_profile.hpp"
#include "wasmbpf/errors.hpp"

using namespace wasmbpf;
using namespace testsupport;

TEST_CASE("builtin x86_64 profile matches the host kernel headers")
{
	// independent oracle: offsetof into the real pt_regs on this host
	const ArchProfile &p = builtin_arch_profile("x86_64");
	REQUIRE(p.param_reg_offsets.size() == 5);
	CHECK(p.param_reg_offsets[0] == offsetof(struct pt_regs, rdi));
	CHECK(p.param_reg_offsets[1] == offsetof(struct pt_regs, rsi));
	CHECK(p.param_reg_offsets[2] == offsetof(struct pt_regs, rdx));
	CHECK(p.param_reg_offsets[3] == offsetof(struct pt_regs, rcx));
	CHECK(p.param_reg_offsets[4] == offsetof(struct pt_regs, r8));
}

TEST_CASE("builtin profiles agree with the checked-in data files")
{
	for (const char *name : {"x86_64", "arm64"}) {
		ArchProfile from_file = load_arch_profile(
			data_path(std::string("arch/") + name + ".profile"));
		const ArchProfile &builtin = builtin_arch_profile(name);
		CHECK(from_file.name == builtin.name);
		CHECK(from_file.pointer_width == builtin.pointer_width);
		CHECK(from_file.param_reg_offsets ==
		      builtin.param_reg_offsets);
	}
}

TEST_CASE("kprobe fixture yields five parameter access sites")
{
	auto bytes = read_file(fixture_path("objects/kprobe_params.bpf.o"));
	ElfBpfObject obj = parse_object(bytes);
	BtfTypeGraph local = parse_btf(obj.btf_blob);
	auto by_section = parse_core_relos(obj.btf_ext_blob, obj.btf_blob);
	auto relos = relos_for_program(by_section, obj.programs[0]);
	auto accesses = find_ptregs_accesses(relos, local,
					     builtin_arch_profile("x86_64"));
	REQUIRE(accesses.size() == 5);
	std::set<uint32_t> params;
	for (const PtRegsAccess &a : accesses)
		params.insert(a.param_index);
	CHECK(params == std::set<uint32_t>{0, 1, 2, 3, 4});
}

TEST_CASE("relocating the kprobe fixture rewrites to arm64 slots")
{
	auto bytes = read_file(fixture_path("objects/kprobe_params.bpf.o"));
	ElfBpfObject obj = parse_object(bytes);
	BtfTypeGraph local = parse_btf(obj.btf_blob);
	auto by_section = parse_core_relos(obj.btf_ext_blob, obj.btf_blob);
	auto relos = relos_for_program(by_section, obj.programs[0]);
	const ArchProfile &x86 = builtin_arch_profile("x86_64");
	const ArchProfile &arm = builtin_arch_profile("arm64");
	auto accesses = find_ptregs_accesses(relos, local, x86);

	auto images = bind_maps(obj, {{"events", 1}});
	EbpfProgramImage moved =
		relocate_ptregs(images[0], accesses, x86, arm);
	CHECK(moved.arch_profile == "arm64");
	for (const PtRegsAccess &a : accesses) {
		CHECK(uint16_t(moved.insns[a.insn_index].offset) ==
		      arm.param_reg_offsets[a.param_index]);
	}

	SUBCASE("round trip restores the original bytes exactly")
	{
		EbpfProgramImage back =
			relocate_ptregs(moved, accesses, arm, x86);
		CHECK(encode_instructions(back.insns) ==
		      encode_instructions(images[0].insns));
	}
}

TEST_CASE("from == to is the identity")
{
	const ArchProfile &x86 = builtin_arch_profile("x86_64");
	EbpfProgramImage img;
	img.name = "id";
	img.insns.push_back({0x79, 0, 1, int16_t(x86.param_reg_offsets[0]), 0});
	img.insns.push_back({0x95, 0, 0, 0, 0});
	std::vector<PtRegsAccess> accesses{{0, 0}};
	EbpfProgramImage out = relocate_ptregs(img, accesses, x86, x86);
	CHECK(encode_instructions(out.insns) == encode_instructions(img.insns));
}

TEST_CASE("parameter index past the profile is ParamIndexOutOfRange")
{
	const ArchProfile &x86 = builtin_arch_profile("x86_64");
	EbpfProgramImage img;
	img.insns.push_back({0x79, 0, 1, 0, 0});
	img.insns.push_back({0x95, 0, 0, 0, 0});
	std::vector<PtRegsAccess> accesses{{0, 7}};
	try {
		relocate_ptregs(img, accesses, x86, x86);
		FAIL("expected ParamIndexOutOfRange");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::ParamIndexOutOfRange);
	}
}

TEST_CASE("offset mismatch against the declared profile is rejected")
{
	const ArchProfile &x86 = builtin_arch_profile("x86_64");
	const ArchProfile &arm = builtin_arch_profile("arm64");
	EbpfProgramImage img;
	img.insns.push_back({0x79, 0, 1, 64, 0}); // not an x86_64 param slot
	img.insns.push_back({0x95, 0, 0, 0, 0});
	std::vector<PtRegsAccess> accesses{{0, 0}};
	try {
		relocate_ptregs(img, accesses, x86, arm);
		FAIL("expected OffsetMismatch");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::OffsetMismatch);
	}
}
