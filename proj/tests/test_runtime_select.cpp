// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <fstream>

#include "support/fixtures.hpp"
#include "wasmbpf/errors.hpp"
#include "wasmbpf/runtime_select.hpp"

using namespace wasmbpf;
using namespace testsupport;

namespace {

// synthetic objects characterizing each compatibility-matrix row
ElfBpfObject matrix_object(const std::string &program)
{
	ElfBpfObject obj;
	ProgramBlob prog;
	prog.name = program;
	MapDef map;
	map.name = "m";
	if (program == "bootstrap") {
		prog.prog_type = ProgType::tracepoint;
		map.type = MapType::ringbuf;
		map.max_entries = 4096;
		obj.map_defs.push_back(map);
	} else if (program == "lsm") {
		prog.prog_type = ProgType::lsm;
	} else if (program == "opensnoop") {
		prog.prog_type = ProgType::tracepoint;
		map.type = MapType::hash;
		map.key_size = 4;
		map.value_size = 8;
		map.max_entries = 16;
		obj.map_defs.push_back(map);
	} else if (program == "sockops") {
		prog.prog_type = ProgType::sockops;
	} else if (program == "kprobe") {
		prog.prog_type = ProgType::kprobe;
	} else if (program == "uprobe") {
		prog.prog_type = ProgType::uprobe;
	} else if (program == "xdp") {
		prog.prog_type = ProgType::xdp;
	} else {
		throw std::runtime_error("unknown matrix program " + program);
	}
	obj.programs.push_back(std::move(prog));
	return obj;
}

} // namespace

TEST_CASE("feature derivation follows the version rules")
{
	SUBCASE("linux 5.5 lacks ringbuf and lsm")
	{
		auto f = derive_features(OsKind::linux_os, {5, 5});
		CHECK(!f.count(Feature::ringbuf));
		CHECK(!f.count(Feature::lsm));
		CHECK(f.count(Feature::kprobe));
		CHECK(f.count(Feature::perf_event));
	}
	SUBCASE("linux 6.10 has both")
	{
		auto f = derive_features(OsKind::linux_os, {6, 10});
		CHECK(f.count(Feature::ringbuf));
		CHECK(f.count(Feature::lsm));
	}
	SUBCASE("cutoff boundaries")
	{
		CHECK(derive_features(OsKind::linux_os, {5, 8})
			      .count(Feature::ringbuf));
		CHECK(!derive_features(OsKind::linux_os, {5, 7})
			       .count(Feature::ringbuf));
		CHECK(derive_features(OsKind::linux_os, {5, 7})
			      .count(Feature::lsm));
	}
	SUBCASE("unknown os is conservative")
	{
		CHECK(derive_features(OsKind::other, {9, 9}).empty());
	}
}

TEST_CASE("profile configs parse and override")
{
	EnvironmentProfile p = profile_from_config_text(
		"os: linux\nkernel: 5.5\narch: x86_64\n");
	CHECK(p.os == OsKind::linux_os);
	CHECK(p.kernel_version == KernelVersion{5, 5});
	CHECK(!p.features.count(Feature::ringbuf));
	CHECK(!p.features.count(Feature::lsm));

	EnvironmentProfile q = profile_from_config_text(
		"os: other\nfeatures: uprobe,tracepoint,xdp\n");
	CHECK(q.features == std::set<Feature>{Feature::uprobe,
					      Feature::tracepoint,
					      Feature::xdp});

	CHECK_THROWS_AS(profile_from_config_text("os: plan9\n"), Error);
	CHECK_THROWS_AS(profile_from_config_text("nonsense line\n"), Error);
	// a profile claiming ringbuf below the cutoff violates the rules
	CHECK_THROWS_AS(profile_from_config_text(
				"os: linux\nkernel: 5.5\nfeatures: ringbuf\n"),
			Error);
}

TEST_CASE("probe_environment with empty config file is conservative")
{
	EnvironmentProfile p = profile_from_config_text("");
	CHECK(p.os == OsKind::other);
	CHECK(p.features.empty());
}

TEST_CASE("checked-in platform profiles equal the built-in simulations")
{
	for (const char *platform :
	     {"linux-5.5", "linux-6.10", "linux-6.10-arm64", "windows",
	      "userspace"}) {
		CAPTURE(platform);
		EnvironmentProfile built =
			simulated_platform_profile(platform);
		EnvironmentProfile from_file = probe_environment(
			data_path(std::string("profiles/") + platform +
				  ".profile"));
		CHECK(built.os == from_file.os);
		CHECK(built.kernel_version == from_file.kernel_version);
		CHECK(built.arch == from_file.arch);
		CHECK(built.features == from_file.features);
	}
}

TEST_CASE("the compatibility matrix CSV replays 35/35 cells")
{
	std::ifstream in(data_path("compat_matrix.csv"));
	REQUIRE(in.good());
	std::string line;
	std::getline(in, line);
	CHECK(line == "program,platform,native,wasm_bpf");

	int cells = 0;
	int matched = 0;
	while (std::getline(in, line)) {
		if (line.empty())
			continue;
		std::istringstream ls(line);
		std::string program, platform, native, wasm;
		std::getline(ls, program, ',');
		std::getline(ls, platform, ',');
		std::getline(ls, native, ',');
		std::getline(ls, wasm, ',');
		cells++;

		ElfBpfObject obj = matrix_object(program);
		EnvironmentProfile env = simulated_platform_profile(platform);
		BackendSelection sel = select_backend(obj, env);
		bool supported =
			std::holds_alternative<BackendDescriptor>(sel);
		bool expected = wasm == "O";
		CAPTURE(program);
		CAPTURE(platform);
		CHECK(supported == expected);
		if (supported == expected)
			matched++;
		if (!supported) {
			const auto &report = std::get<UnsupportedReport>(sel);
			CHECK(!report.program.empty());
			CHECK(!report.rule.empty());
		}
	}
	CHECK(cells == 35);
	CHECK(matched == 35);
}

TEST_CASE("select_backend is deterministic for equal inputs")
{
	ElfBpfObject obj = matrix_object("bootstrap");
	EnvironmentProfile env = simulated_platform_profile("linux-6.10");
	auto a = select_backend(obj, env);
	auto b = select_backend(obj, env);
	REQUIRE(std::holds_alternative<BackendDescriptor>(a));
	REQUIRE(std::holds_alternative<BackendDescriptor>(b));
	CHECK(std::get<BackendDescriptor>(a).notes ==
	      std::get<BackendDescriptor>(b).notes);
	CHECK(std::get<BackendDescriptor>(a).kind ==
	      BackendDescriptor::Kind::userspace_vm);
}

TEST_CASE("ringbuf fallback decision lands in the notes")
{
	ElfBpfObject obj = matrix_object("bootstrap");
	auto sel55 = select_backend(obj,
				    simulated_platform_profile("linux-5.5"));
	REQUIRE(std::holds_alternative<BackendDescriptor>(sel55));
	CHECK(std::get<BackendDescriptor>(sel55).notes.find("perf_event") !=
	      std::string::npos);
	auto sel610 = select_backend(obj,
				     simulated_platform_profile("linux-6.10"));
	REQUIRE(std::holds_alternative<BackendDescriptor>(sel610));
	CHECK(std::get<BackendDescriptor>(sel610).notes.find(
		      "event channel: ringbuf") != std::string::npos);
}

TEST_CASE("find_target_btf searches version directories first")
{
	EnvironmentProfile env;
	env.os = OsKind::linux_os;
	env.kernel_version = {5, 15};
	env.btf_search_paths = {fixture_path("btf")};
	BtfSearchResult res = find_target_btf(env);
	CHECK(res.found.string().find("5.15") != std::string::npos);
	CHECK(res.graph.type_count() > 0);
}

TEST_CASE("a corrupt candidate is skipped with a warning")
{
	EnvironmentProfile env;
	env.os = OsKind::linux_os;
	env.kernel_version = {9, 9}; // no version directory exists
	// first path is the corrupt blob as an explicit file; second works
	env.btf_search_paths = {fixture_path("btf/corrupt.btf"),
				fixture_path("btf/6.10/vmlinux.btf")};
	BtfSearchResult res = find_target_btf(env);
	CHECK(res.found.string().find("6.10") != std::string::npos);
	REQUIRE(!res.warnings.empty());
	CHECK(res.warnings[0].find("corrupt.btf") != std::string::npos);
}

TEST_CASE("empty directories produce BtfNotFound listing paths tried")
{
	EnvironmentProfile env;
	env.kernel_version = {1, 2};
	env.btf_search_paths = {fixture_path("objects")}; // no BTF here
	try {
		find_target_btf(env);
		FAIL("expected BtfNotFound");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::BtfNotFound);
		CHECK(std::string(e.what()).find("vmlinux.btf") !=
		      std::string::npos);
	}
}
