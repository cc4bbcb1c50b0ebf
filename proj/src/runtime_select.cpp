// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/runtime_select.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/utsname.h>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

std::string trim(std::string s)
{
	size_t a = s.find_first_not_of(" \t\r");
	size_t b = s.find_last_not_of(" \t\r");
	return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

KernelVersion parse_version(const std::string &text)
{
	KernelVersion v;
	size_t dot = text.find('.');
	try {
		v.major = std::stoi(text.substr(0, dot));
		if (dot != std::string::npos) {
			std::string rest = text.substr(dot + 1);
			size_t end = rest.find_first_not_of("0123456789");
			v.minor = std::stoi(rest.substr(0, end));
		}
	} catch (const std::exception &) {
		raise(Errc::BadConfig, "bad kernel version '" + text + "'");
	}
	return v;
}

void validate_profile(const EnvironmentProfile &p, const FeatureCutoffs &cut)
{
	if (p.features.count(Feature::ringbuf) &&
	    (p.os != OsKind::linux_os || p.kernel_version < cut.ringbuf))
		raise(Errc::BadConfig,
		      "profile claims ringbuf support below the version "
		      "cutoff");
	if (p.features.count(Feature::lsm) &&
	    (p.os != OsKind::linux_os || p.kernel_version < cut.lsm))
		raise(Errc::BadConfig,
		      "profile claims lsm support below the version cutoff");
}

} // namespace

const char *feature_name(Feature f)
{
	switch (f) {
	case Feature::kprobe:
		return "kprobe";
	case Feature::uprobe:
		return "uprobe";
	case Feature::tracepoint:
		return "tracepoint";
	case Feature::xdp:
		return "xdp";
	case Feature::sockops:
		return "sockops";
	case Feature::lsm:
		return "lsm";
	case Feature::ringbuf:
		return "ringbuf";
	case Feature::perf_event:
		return "perf_event";
	}
	return "unknown";
}

std::optional<Feature> feature_from_name(std::string_view name)
{
	for (Feature f :
	     {Feature::kprobe, Feature::uprobe, Feature::tracepoint,
	      Feature::xdp, Feature::sockops, Feature::lsm, Feature::ringbuf,
	      Feature::perf_event})
		if (name == feature_name(f))
			return f;
	return std::nullopt;
}

std::set<Feature> derive_features(OsKind os, KernelVersion version,
				  const FeatureCutoffs &cutoffs)
{
	switch (os) {
	case OsKind::linux_os: {
		std::set<Feature> f{Feature::kprobe,	 Feature::uprobe,
				    Feature::tracepoint, Feature::xdp,
				    Feature::sockops,	 Feature::perf_event};
		if (version >= cutoffs.lsm)
			f.insert(Feature::lsm);
		if (version >= cutoffs.ringbuf)
			f.insert(Feature::ringbuf);
		return f;
	}
	case OsKind::windows_os:
		// the socket-layer hook is the one program type the
		// compatibility matrix supports there
		return {Feature::sockops};
	case OsKind::other:
		return {};
	}
	return {};
}

EnvironmentProfile profile_from_config_text(std::string_view text)
{
	EnvironmentProfile p;
	bool explicit_features = false;
	std::istringstream in{std::string(text)};
	std::string line;
	while (std::getline(in, line)) {
		auto hash = line.find('#');
		if (hash != std::string::npos)
			line.resize(hash);
		size_t sep = line.find_first_of(":=");
		if (sep == std::string::npos) {
			if (!trim(line).empty())
				raise(Errc::BadConfig,
				      "bad config line '" + trim(line) + "'");
			continue;
		}
		std::string key = trim(line.substr(0, sep));
		std::string value = trim(line.substr(sep + 1));
		if (key == "os") {
			if (value == "linux")
				p.os = OsKind::linux_os;
			else if (value == "windows")
				p.os = OsKind::windows_os;
			else if (value == "other")
				p.os = OsKind::other;
			else
				raise(Errc::BadConfig,
				      "unknown os '" + value + "'");
		} else if (key == "kernel") {
			p.kernel_version = parse_version(value);
		} else if (key == "arch") {
			p.arch = value;
		} else if (key == "features") {
			explicit_features = true;
			std::istringstream vs(value);
			std::string tok;
			while (std::getline(vs, tok, ',')) {
				auto f = feature_from_name(trim(tok));
				if (!f)
					raise(Errc::BadConfig,
					      "unknown feature '" + trim(tok) +
						      "'");
				p.features.insert(*f);
			}
		} else if (key == "btf_path") {
			p.btf_search_paths.emplace_back(value);
		} else {
			raise(Errc::BadConfig,
			      "unknown config key '" + key + "'");
		}
	}
	if (!explicit_features)
		p.features = derive_features(p.os, p.kernel_version);
	validate_profile(p, FeatureCutoffs{});
	return p;
}

EnvironmentProfile
probe_environment(const std::optional<std::filesystem::path> &config)
{
	EnvironmentProfile p;
	if (config) {
		std::ifstream in(*config);
		if (!in)
			raise(Errc::BadConfig,
			      "cannot open profile config " + config->string());
		std::ostringstream buf;
		buf << in.rdbuf();
		p = profile_from_config_text(buf.str());
	} else {
		struct utsname uts{};
		if (uname(&uts) == 0 &&
		    std::string_view(uts.sysname) == "Linux") {
			p.os = OsKind::linux_os;
			p.kernel_version = parse_version(uts.release);
			std::string_view machine = uts.machine;
			p.arch = machine == "aarch64" ? "arm64" : "x86_64";
			p.features =
				derive_features(p.os, p.kernel_version);
		}
		// unknown hosts keep the conservative empty feature set
	}
	if (p.btf_search_paths.empty()) {
		if (const char *env = std::getenv("WASM_BPF_BTF_PATH")) {
			std::istringstream ps{std::string(env)};
			std::string tok;
			while (std::getline(ps, tok, ':'))
				if (!tok.empty())
					p.btf_search_paths.emplace_back(tok);
		}
	}
	return p;
}

EnvironmentProfile simulated_platform_profile(std::string_view platform)
{
	EnvironmentProfile p;
	if (platform == "linux-5.5") {
		p.os = OsKind::linux_os;
		p.kernel_version = {5, 5};
	} else if (platform == "linux-6.10") {
		p.os = OsKind::linux_os;
		p.kernel_version = {6, 10};
	} else if (platform == "linux-6.10-arm64") {
		p.os = OsKind::linux_os;
		p.kernel_version = {6, 10};
		p.arch = "arm64";
	} else if (platform == "windows") {
		p.os = OsKind::windows_os;
	} else if (platform == "userspace") {
		p.os = OsKind::other;
		p.features = {Feature::uprobe, Feature::tracepoint,
			      Feature::xdp};
		return p;
	} else {
		raise(Errc::BadConfig,
		      "unknown platform '" + std::string(platform) + "'");
	}
	p.features = derive_features(p.os, p.kernel_version);
	return p;
}

BackendSelection select_backend(const ElfBpfObject &obj,
				const EnvironmentProfile &env)
{
	for (const ProgramBlob &prog : obj.programs) {
		std::optional<Feature> need;
		switch (prog.prog_type) {
		case ProgType::kprobe:
			need = Feature::kprobe;
			break;
		case ProgType::uprobe:
			need = Feature::uprobe;
			break;
		case ProgType::tracepoint:
			need = Feature::tracepoint;
			break;
		case ProgType::xdp:
			need = Feature::xdp;
			break;
		case ProgType::sockops:
			need = Feature::sockops;
			break;
		case ProgType::lsm:
			need = Feature::lsm;
			break;
		case ProgType::socket_filter:
			// socket filters ride the kernel socket layer;
			// no dedicated feature flag in the model
			if (env.os != OsKind::linux_os)
				return UnsupportedReport{
					prog.name,
					"socket_filter programs need a Linux "
					"socket layer"};
			continue;
		}
		if (!env.features.count(*need))
			return UnsupportedReport{
				prog.name,
				std::string("program type ") +
					prog_type_name(prog.prog_type) +
					" needs the '" + feature_name(*need) +
					"' feature, absent from this profile"};
	}

	BackendDescriptor backend;
	backend.kind = BackendDescriptor::Kind::userspace_vm;
	for (const ProgramBlob &prog : obj.programs)
		backend.supported_prog_types.insert(prog.prog_type);

	bool wants_ringbuf = false;
	for (const MapDef &m : obj.map_defs)
		if (m.type == MapType::ringbuf)
			wants_ringbuf = true;
	if (wants_ringbuf) {
		if (env.features.count(Feature::ringbuf)) {
			backend.notes = "event channel: ringbuf";
		} else if (env.features.count(Feature::perf_event)) {
			backend.notes = "event channel: perf_event fallback "
					"(ringbuf below version cutoff); "
					"shipped backend still uses ringbuf";
		} else {
			for (const MapDef &m : obj.map_defs)
				if (m.type == MapType::ringbuf)
					return UnsupportedReport{
						m.name,
						"object needs an event "
						"channel (ringbuf or "
						"perf_event), absent from "
						"this profile"};
		}
	}
	// policy: kernel preferred when available; with only the userspace
	// VM shipped this is a recorded decision, not a branch
	if (!backend.notes.empty())
		backend.notes += "; ";
	backend.notes += "backend: userspace_vm (kernel preferred when "
			 "available; none shipped)";
	return backend;
}

BtfSearchResult find_target_btf(const EnvironmentProfile &env)
{
	if (env.btf_search_paths.empty())
		raise(Errc::BtfNotFound, "no BTF search paths configured");

	std::vector<std::string> tried;
	std::vector<std::string> warnings;
	std::string version = std::to_string(env.kernel_version.major) + "." +
			      std::to_string(env.kernel_version.minor);

	for (const std::filesystem::path &base : env.btf_search_paths) {
		std::vector<std::filesystem::path> candidates;
		candidates.push_back(base / version / "vmlinux.btf");
		candidates.push_back(base / "vmlinux.btf");
		if (std::filesystem::is_regular_file(base))
			candidates.push_back(base);
		for (const auto &c : candidates) {
			tried.push_back(c.string());
			std::ifstream in(c, std::ios::binary);
			if (!in)
				continue;
			std::vector<uint8_t> blob(
				(std::istreambuf_iterator<char>(in)),
				std::istreambuf_iterator<char>());
			try {
				BtfSearchResult res{parse_btf(blob), c,
						    warnings};
				return res;
			} catch (const Error &e) {
				warnings.push_back("candidate " + c.string() +
						   " failed to parse: " +
						   e.what());
			}
		}
	}
	std::string msg = "no usable BTF found; tried:";
	for (const std::string &t : tried)
		msg += "\n  " + t;
	for (const std::string &w : warnings)
		msg += "\n  " + w;
	raise(Errc::BtfNotFound, msg);
}

} // namespace wasmbpf
