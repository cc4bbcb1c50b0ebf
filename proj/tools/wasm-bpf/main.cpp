// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wasmbpf/bench.hpp"
#include "wasmbpf/btf.hpp"
#include "wasmbpf/core_relo.hpp"
#include "wasmbpf/errors.hpp"
#include "wasmbpf/oci.hpp"
#include "wasmbpf/runner.hpp"

namespace {

using namespace wasmbpf;

std::vector<uint8_t> read_file_or_exit(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		std::cerr << "error: cannot open " << path << "\n";
		std::exit(kExitLoadFailure);
	}
	return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
				    std::istreambuf_iterator<char>());
}

std::string core_relo_kind_name(uint32_t kind)
{
	switch (kind) {
	case core::kFieldByteOffset:
		return "field_byte_offset";
	case core::kFieldExists:
		return "field_exists";
	default:
		return "kind_" + std::to_string(kind);
	}
}

int inspect_bpf_object(const std::filesystem::path &path, bool json_out)
{
	auto bytes = read_file_or_exit(path);
	ElfBpfObject obj;
	try {
		obj = parse_object(bytes);
	} catch (const Error &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitUsage;
	}

	std::map<std::string, std::vector<CoreRelo>> relos;
	uint32_t btf_types = 0;
	std::optional<BtfTypeGraph> btf;
	if (!obj.btf_blob.empty()) {
		btf = parse_btf(obj.btf_blob);
		btf_types = btf->type_count();
		if (!obj.btf_ext_blob.empty())
			relos = parse_core_relos(obj.btf_ext_blob,
						 obj.btf_blob);
	}

	if (json_out) {
		nlohmann::json j;
		j["object"] = path.filename().string();
		j["endianness"] =
			obj.endianness == Endian::little ? "little" : "big";
		j["license"] = obj.license;
		j["btf_types"] = btf_types;
		j["programs"] = nlohmann::json::array();
		for (const ProgramBlob &p : obj.programs) {
			nlohmann::json jp;
			jp["name"] = p.name;
			jp["section"] = p.section_name;
			jp["type"] = prog_type_name(p.prog_type);
			jp["insns"] = p.insns.size();
			jp["map_relocs"] = nlohmann::json::array();
			for (const MapReloc &r : p.map_relocs)
				jp["map_relocs"].push_back(
					{{"insn", r.insn_index},
					 {"map", r.map_name}});
			auto pr = relos_for_program(relos, p);
			jp["core_relos"] = nlohmann::json::array();
			for (const CoreRelo &r : pr)
				jp["core_relos"].push_back(
					{{"insn_off", r.insn_off},
					 {"type_id", r.type_id},
					 {"kind",
					  core_relo_kind_name(r.kind)},
					 {"access", r.access_str}});
			j["programs"].push_back(std::move(jp));
		}
		j["maps"] = nlohmann::json::array();
		for (const MapDef &m : obj.map_defs)
			j["maps"].push_back(
				{{"name", m.name},
				 {"type", map_type_name(m.type)},
				 {"key_size", m.key_size},
				 {"value_size", m.value_size},
				 {"max_entries", m.max_entries}});
		std::cout << j.dump(2) << "\n";
		return kExitOk;
	}

	std::cout << "object: " << path.filename().string() << "\n";
	std::cout << "endianness: "
		  << (obj.endianness == Endian::little ? "little" : "big")
		  << "\n";
	std::cout << "license: " << obj.license << "\n";
	std::cout << "programs: " << obj.programs.size() << "\n";
	for (const ProgramBlob &p : obj.programs) {
		std::cout << "  program " << p.name << "\n";
		std::cout << "    section: " << p.section_name << "\n";
		std::cout << "    type: " << prog_type_name(p.prog_type)
			  << "\n";
		std::cout << "    insns: " << p.insns.size() << "\n";
		for (const MapReloc &r : p.map_relocs)
			std::cout << "    map_reloc: insn=" << r.insn_index
				  << " map=" << r.map_name << "\n";
		for (const CoreRelo &r : relos_for_program(relos, p))
			std::cout << "    core_relo: insn_off=" << r.insn_off
				  << " type="
				  << (btf ? btf->type(r.type_id).name
					  : std::to_string(r.type_id))
				  << " kind=" << core_relo_kind_name(r.kind)
				  << " access=" << r.access_str << "\n";
	}
	std::cout << "maps: " << obj.map_defs.size() << "\n";
	for (const MapDef &m : obj.map_defs)
		std::cout << "  map " << m.name << ": type="
			  << map_type_name(m.type)
			  << " key_size=" << m.key_size
			  << " value_size=" << m.value_size
			  << " max_entries=" << m.max_entries << "\n";
	std::cout << "btf_types: " << btf_types << "\n";
	for (const std::string &w : obj.warnings)
		std::cout << "warning: " << w << "\n";
	return kExitOk;
}

bool looks_like_elf(const std::vector<uint8_t> &bytes)
{
	return bytes.size() >= 4 && bytes[0] == 0x7f && bytes[1] == 'E' &&
	       bytes[2] == 'L' && bytes[3] == 'F';
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"wasm-bpf: run, package and inspect Wasm eBPF "
		     "applications"};
	app.require_subcommand(1);

	// run
	auto *run = app.add_subcommand(
		"run", "run a Wasm eBPF app (raw module or OCI layout)");
	std::string run_input;
	std::string env_profile;
	std::string arch;
	std::vector<std::string> btf_paths;
	std::string script;
	int timeout_ms = 0;
	run->add_option("input", run_input,
			"module .wasm file or OCI layout directory")
		->required();
	run->add_option("--env-profile", env_profile,
			"environment profile config file");
	run->add_option("--arch", arch, "host architecture override")
		->check(CLI::IsMember({"x86_64", "arm64"}));
	run->add_option("--btf-path", btf_paths,
			"target BTF search directory (repeatable)");
	run->add_option("--script", script,
			"event script: lines of 'trigger <source> <hex ctx>'");
	run->add_option("--timeout-ms", timeout_ms,
			"interrupt blocked polls after this long");

	// pack
	auto *pack = app.add_subcommand(
		"pack", "package a Wasm module as an OCI image layout");
	std::string pack_input, pack_out, pack_name, pack_version = "latest",
					  pack_tar;
	pack->add_option("module", pack_input, "Wasm module file")->required();
	pack->add_option("-o,--output", pack_out, "layout output directory")
		->required();
	pack->add_option("--name", pack_name, "image name")->required();
	pack->add_option("--version", pack_version, "image version");
	pack->add_option("--tar", pack_tar, "also write the layout as a tar");

	// unpack
	auto *unpack = app.add_subcommand(
		"unpack", "extract the Wasm module from an OCI layout");
	std::string unpack_input, unpack_out;
	unpack->add_option("layout", unpack_input, "OCI layout directory")
		->required();
	unpack->add_option("-o,--output", unpack_out, "output module path")
		->required();

	// inspect
	auto *inspect = app.add_subcommand(
		"inspect",
		"inspect a .bpf.o object, a Wasm module or an OCI layout");
	std::string inspect_input;
	bool json_out = false;
	inspect->add_option("path", inspect_input, "what to inspect")
		->required();
	inspect->add_flag("--json", json_out, "machine-readable output");

	// bench
	auto *bench_cmd = app.add_subcommand(
		"bench", "run the micro-benchmark suites");
	std::string suite = "all";
	std::string fixtures = "tests/fixtures";
	std::string csv_out;
	bench_cmd->add_option("suite", suite,
			      "map_access|ringbuf_poll|startup|sizes|all");
	bench_cmd->add_option("--fixtures", fixtures, "fixture directory");
	bench_cmd->add_option("--csv", csv_out, "write CSV to this file");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int code = app.exit(e);
		return code == 0 ? kExitOk : kExitUsage;
	}

	try {
		if (*run) {
			RunOptions options;
			options.input = run_input;
			if (!env_profile.empty())
				options.env_profile = env_profile;
			if (!arch.empty())
				options.arch_override = arch;
			for (const std::string &p : btf_paths)
				options.btf_paths.emplace_back(p);
			if (!script.empty())
				options.script = script;
			options.timeout_ms = timeout_ms;
			RunResult result = run_module(options);
			if (!result.trap_message.empty())
				std::cerr << "error: " << result.trap_message
					  << "\n";
			return result.exit_code;
		}
		if (*pack) {
			auto bytes = read_file_or_exit(pack_input);
			oci::PackMetadata meta;
			meta.name = pack_name;
			meta.version = pack_version;
			oci::pack(bytes, meta, pack_out,
				  pack_tar.empty()
					  ? std::filesystem::path{}
					  : std::filesystem::path(pack_tar));
			std::cout << "packed " << pack_input << " into "
				  << pack_out << "\n";
			return kExitOk;
		}
		if (*unpack) {
			oci::UnpackResult result = oci::unpack(unpack_input);
			std::ofstream out(unpack_out, std::ios::binary);
			if (!out) {
				std::cerr << "error: cannot create "
					  << unpack_out << "\n";
				return kExitLoadFailure;
			}
			out.write(reinterpret_cast<const char *>(
					  result.module_bytes.data()),
				  std::streamsize(result.module_bytes.size()));
			std::cout << "unpacked " << result.metadata.name << ":"
				  << result.metadata.version << " ("
				  << result.module_bytes.size()
				  << " bytes) to " << unpack_out << "\n";
			return kExitOk;
		}
		if (*inspect) {
			std::filesystem::path path = inspect_input;
			if (std::filesystem::is_directory(path)) {
				oci::SizeReport r = oci::inspect(path);
				std::cout << (json_out
						      ? oci::size_report_json(r)
						      : oci::format_size_report(
								r));
				return kExitOk;
			}
			auto bytes = read_file_or_exit(path);
			if (looks_like_elf(bytes))
				return inspect_bpf_object(path, json_out);
			oci::SizeReport r = oci::inspect(path);
			std::cout << (json_out ? oci::size_report_json(r)
					       : oci::format_size_report(r));
			return kExitOk;
		}
		if (*bench_cmd) {
			bench::FixturePaths paths{fixtures};
			bench::BenchReport report =
				bench::run_suite(suite, paths);
			std::cout << report.to_table() << "\n";
			if (!csv_out.empty()) {
				std::ofstream out(csv_out);
				out << report.to_csv();
				std::cout << "csv written to " << csv_out
					  << "\n";
			} else {
				std::cout << report.to_csv();
			}
			return kExitOk;
		}
	} catch (const Error &e) {
		std::cerr << "error: " << e.what() << "\n";
		switch (e.code()) {
		case Errc::BadArgument:
		case Errc::BadConfig:
			return kExitUsage;
		case Errc::GuestTrap:
			return kExitGuestTrap;
		default:
			return kExitLoadFailure;
		}
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitLoadFailure;
	}
	return kExitUsage;
}
