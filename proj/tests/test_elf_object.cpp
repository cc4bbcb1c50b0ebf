// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include "support/elf_builder.hpp"
#include "support/fixtures.hpp"
#include "wasmbpf/elf_object.hpp"
#include "wasmbpf/errors.hpp"

using namespace wasmbpf;
using namespace testsupport;

namespace {

Errc code_of(const std::function<void()> &fn)
{
	try {
		fn();
	} catch (const Error &e) {
		return e.code();
	}
	throw std::runtime_error("expected an Error");
}

// a minimal valid single-program object
std::vector<uint8_t> tiny_program_bytes()
{
	std::vector<uint8_t> insns;
	append(insns, raw_insn(0xb7, 0, 0, 0, 7)); // r0 = 7
	append(insns, raw_insn(0x95, 0, 0, 0, 0)); // exit
	return insns;
}

} // namespace

TEST_CASE("bootstrap fixture matches its manifest")
{
	auto bytes = read_file(fixture_path("objects/bootstrap.bpf.o"));
	ElfBpfObject obj = parse_object(bytes);
	Manifest m = read_manifest("bootstrap.manifest");

	CHECK(obj.programs.size() == m.programs);
	CHECK(obj.map_defs.size() == m.maps);
	REQUIRE(obj.programs.size() == 1);
	CHECK(obj.programs[0].name == "handle_exec");
	CHECK(obj.programs[0].prog_type == ProgType::tracepoint);
	CHECK(obj.programs[0].insns.size() == m.program_list[0].insns);
	CHECK(obj.programs[0].map_relocs.size() ==
	      m.program_list[0].map_relocs);
	REQUIRE(obj.map_defs.size() == 1);
	CHECK(obj.map_defs[0].name == "rb");
	CHECK(obj.map_defs[0].type == MapType::ringbuf);
	CHECK(obj.map_defs[0].max_entries == 4096);
	CHECK(obj.map_defs[0].key_size == 0);
	CHECK(obj.map_defs[0].value_size == 0);
	CHECK(!obj.btf_blob.empty());
	CHECK(!obj.btf_ext_blob.empty());
	CHECK(obj.license == "Dual BSD/GPL");
}

TEST_CASE("every corpus fixture matches its manifest")
{
	for (const char *name : {"bootstrap", "opensnoop", "kprobe_params",
				 "xdp_pass", "uprobe_counter"}) {
		CAPTURE(name);
		auto bytes = read_file(fixture_path(
			std::string("objects/") + name + ".bpf.o"));
		ElfBpfObject obj = parse_object(bytes);
		Manifest m =
			read_manifest(std::string(name) + ".manifest");
		CHECK(obj.programs.size() == m.programs);
		CHECK(obj.map_defs.size() == m.maps);
		for (const ManifestProgram &mp : m.program_list) {
			const ProgramBlob *p = obj.find_program(mp.name);
			REQUIRE(p != nullptr);
			CHECK(p->section_name == mp.section);
			CHECK(p->insns.size() == mp.insns);
			CHECK(p->map_relocs.size() == mp.map_relocs);
		}
		for (const std::string &mn : m.map_names)
			CHECK(obj.find_map(mn) != nullptr);
	}
}

TEST_CASE("parse is deterministic")
{
	auto bytes = read_file(fixture_path("objects/opensnoop.bpf.o"));
	ElfBpfObject a = parse_object(bytes);
	ElfBpfObject b = parse_object(bytes);
	REQUIRE(a.programs.size() == b.programs.size());
	for (size_t i = 0; i < a.programs.size(); i++) {
		CHECK(a.programs[i].name == b.programs[i].name);
		CHECK(a.programs[i].insns == b.programs[i].insns);
	}
	REQUIRE(a.map_defs.size() == b.map_defs.size());
	for (size_t i = 0; i < a.map_defs.size(); i++)
		CHECK(a.map_defs[i].name == b.map_defs[i].name);
	CHECK(a.btf_blob == b.btf_blob);
}

TEST_CASE("empty input is NotElf")
{
	CHECK(code_of([] { parse_object({}); }) == Errc::NotElf);
}

TEST_CASE("non-eBPF machine is WrongMachine")
{
	ElfBuilder builder(62 /*x86_64*/);
	builder.add_prog_section("xdp", tiny_program_bytes());
	auto bytes = builder.build();
	CHECK(code_of([&] { parse_object(bytes); }) == Errc::WrongMachine);
}

TEST_CASE("duplicate program names are rejected")
{
	ElfBuilder builder;
	auto insns = tiny_program_bytes();
	size_t s1 = builder.add_prog_section("xdp", insns);
	size_t s2 = builder.add_prog_section("xdp/second", insns);
	builder.add_symbols({
		{"prog", 2, uint16_t(s1), 0, insns.size()},
		{"prog", 2, uint16_t(s2), 0, insns.size()},
	});
	auto bytes = builder.build();
	CHECK(code_of([&] { parse_object(bytes); }) == Errc::MalformedSection);
}

TEST_CASE("object with no recognized sections is NoPrograms")
{
	ElfBuilder builder;
	builder.add_section("some_data", 1, 0, {1, 2, 3});
	auto bytes = builder.build();
	CHECK(code_of([&] { parse_object(bytes); }) == Errc::NoPrograms);
}

TEST_CASE("legacy maps section is rejected distinctly")
{
	ElfBuilder builder;
	auto insns = tiny_program_bytes();
	size_t s1 = builder.add_prog_section("xdp", insns);
	builder.add_section("maps", 1, 0x3, std::vector<uint8_t>(28, 0));
	builder.add_symbols({{"prog", 2, uint16_t(s1), 0, insns.size()}});
	auto bytes = builder.build();
	CHECK(code_of([&] { parse_object(bytes); }) ==
	      Errc::LegacyMapsSection);
}

TEST_CASE("truncated section is MalformedSection")
{
	ElfBuilder builder;
	auto insns = tiny_program_bytes();
	builder.add_prog_section("xdp", insns);
	auto bytes = builder.build();
	bytes.resize(bytes.size() - 80); // chop into the section headers
	Errc code = code_of([&] { parse_object(bytes); });
	CHECK(code == Errc::MalformedSection);
}

TEST_CASE("unknown section prefixes are skipped with a warning")
{
	ElfBuilder builder;
	auto insns = tiny_program_bytes();
	size_t known = builder.add_prog_section("xdp", insns);
	size_t unknown = builder.add_prog_section("fentry/foo", insns);
	builder.add_symbols({
		{"prog_a", 2, uint16_t(known), 0, insns.size()},
		{"prog_b", 2, uint16_t(unknown), 0, insns.size()},
	});
	auto bytes = builder.build();
	ElfBpfObject obj = parse_object(bytes);
	CHECK(obj.programs.size() == 1);
	REQUIRE(obj.warnings.size() >= 1);
	CHECK(obj.warnings[0].find("fentry/foo") != std::string::npos);
}

TEST_CASE("program not ending in EXIT is rejected")
{
	ElfBuilder builder;
	std::vector<uint8_t> insns;
	append(insns, raw_insn(0xb7, 0, 0, 0, 7));
	size_t s1 = builder.add_prog_section("xdp", insns);
	builder.add_symbols({{"prog", 2, uint16_t(s1), 0, insns.size()}});
	auto bytes = builder.build();
	CHECK(code_of([&] { parse_object(bytes); }) == Errc::MalformedSection);
}

TEST_CASE("section-prefix table covers the supported program set")
{
	CHECK(prog_type_from_section("kprobe/do_sys_open") == ProgType::kprobe);
	CHECK(prog_type_from_section("uprobe/foo") == ProgType::uprobe);
	CHECK(prog_type_from_section("tracepoint/sched/x") ==
	      ProgType::tracepoint);
	CHECK(prog_type_from_section("xdp") == ProgType::xdp);
	CHECK(prog_type_from_section("sockops") == ProgType::sockops);
	CHECK(prog_type_from_section("lsm/file_open") == ProgType::lsm);
	CHECK(prog_type_from_section("socket") == ProgType::socket_filter);
	CHECK(!prog_type_from_section("fentry/foo"));
	CHECK(!prog_type_from_section(".text"));
}

TEST_CASE("bind_maps patches only the listed LD_IMM64 pairs")
{
	auto bytes = read_file(fixture_path("objects/bootstrap.bpf.o"));
	ElfBpfObject obj = parse_object(bytes);
	auto images = bind_maps(obj, {{"rb", 7}});
	REQUIRE(images.size() == 1);

	const ProgramBlob &orig = obj.programs[0];
	const EbpfProgramImage &img = images[0];
	REQUIRE(orig.map_relocs.size() == 1);
	uint32_t patched = orig.map_relocs[0].insn_index;

	// byte-level diff: only the patched pair may change
	auto before = encode_instructions(orig.insns);
	auto after = encode_instructions(img.insns);
	REQUIRE(before.size() == after.size());
	for (size_t i = 0; i < before.size(); i++) {
		size_t insn_index = i / 8;
		if (insn_index == patched || insn_index == patched + 1)
			continue;
		CHECK(before[i] == after[i]);
	}
	CHECK(img.insns[patched].imm == 7);
	CHECK(img.insns[patched].src_reg == insn::kPseudoMapFd);
}

TEST_CASE("bind_maps identity case leaves instructions untouched")
{
	ElfBuilder builder;
	auto insns = tiny_program_bytes();
	size_t s1 = builder.add_prog_section("xdp", insns);
	builder.add_symbols({{"prog", 2, uint16_t(s1), 0, insns.size()}});
	auto bytes = builder.build();
	ElfBpfObject obj = parse_object(bytes);
	auto images = bind_maps(obj, {});
	REQUIRE(images.size() == 1);
	CHECK(images[0].insns == obj.programs[0].insns);
}

TEST_CASE("bind_maps reports the missing map by name")
{
	auto bytes = read_file(fixture_path("objects/bootstrap.bpf.o"));
	ElfBpfObject obj = parse_object(bytes);
	try {
		bind_maps(obj, {});
		FAIL("expected UnboundMap");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::UnboundMap);
		CHECK(std::string(e.what()).find("rb") != std::string::npos);
	}
}

TEST_CASE("big-endian objects parse but refuse to bind")
{
	ElfBuilder builder(ElfBuilder::kMachineBpf, true);
	std::vector<uint8_t> insns;
	// big-endian field order
	insns.insert(insns.end(), {0xb7, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
				   0x07});
	insns.insert(insns.end(), {0x95, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
				   0x00});
	size_t s1 = builder.add_prog_section("xdp", insns);
	builder.add_symbols({{"prog", 2, uint16_t(s1), 0, insns.size()}});
	auto bytes = builder.build();
	ElfBpfObject obj = parse_object(bytes);
	CHECK(obj.endianness == Endian::big);
	CHECK(obj.programs.size() == 1);
	CHECK(obj.programs[0].insns[0].imm == 7);
	CHECK(code_of([&] { bind_maps(obj, {}); }) == Errc::BigEndianObject);
}
