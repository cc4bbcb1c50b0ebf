// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

inline std::vector<uint8_t> read_file(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw std::runtime_error("missing fixture: " + path);
	return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
				    std::istreambuf_iterator<char>());
}

inline std::string fixture_path(const std::string &rel)
{
	return std::string(FIXTURE_DIR) + "/" + rel;
}

inline std::string data_path(const std::string &rel)
{
	return std::string(DATA_DIR) + "/" + rel;
}

struct ManifestProgram {
	std::string name;
	std::string section;
	uint32_t insns = 0;
	uint32_t map_relocs = 0;
	uint32_t core_relos = 0;
};

struct Manifest {
	uint32_t programs = 0;
	uint32_t maps = 0;
	uint32_t btf_types = 0;
	std::vector<ManifestProgram> program_list;
	std::vector<std::string> map_names;
};

/// Parses the fixture manifests the independent Python walker generates.
inline Manifest read_manifest(const std::string &name)
{
	std::ifstream in(fixture_path("manifests/" + name));
	if (!in)
		throw std::runtime_error("missing manifest: " + name);
	Manifest m;
	std::string line;
	while (std::getline(in, line)) {
		std::istringstream ls(line);
		std::string key;
		ls >> key;
		if (key == "programs:") {
			ls >> m.programs;
		} else if (key == "maps:") {
			ls >> m.maps;
		} else if (key == "btf_types:") {
			ls >> m.btf_types;
		} else if (key == "map:") {
			std::string n;
			ls >> n;
			m.map_names.push_back(n);
		} else if (key == "program:") {
			ManifestProgram p;
			ls >> p.name;
			std::string field;
			while (ls >> field) {
				auto eq = field.find('=');
				if (eq == std::string::npos)
					continue;
				std::string k = field.substr(0, eq);
				std::string v = field.substr(eq + 1);
				if (k == "section")
					p.section = v;
				else if (k == "insns")
					p.insns = uint32_t(std::stoul(v));
				else if (k == "map_relocs")
					p.map_relocs = uint32_t(std::stoul(v));
				else if (k == "core_relos")
					p.core_relos = uint32_t(std::stoul(v));
			}
			m.program_list.push_back(std::move(p));
		}
	}
	return m;
}

} // namespace testsupport
