// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wasmbpf/btf.hpp"
#include "wasmbpf/elf_object.hpp"

namespace wasmbpf {

enum class OsKind { linux_os, windows_os, other };

enum class Feature {
	kprobe,
	uprobe,
	tracepoint,
	xdp,
	sockops,
	lsm,
	ringbuf,
	perf_event,
};

const char *feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

struct KernelVersion {
	int major = 0;
	int minor = 0;
	auto operator<=>(const KernelVersion &) const = default;
};

struct EnvironmentProfile {
	OsKind os = OsKind::other;
	KernelVersion kernel_version{};
	std::string arch = "x86_64";
	std::set<Feature> features;
	std::vector<std::filesystem::path> btf_search_paths;
};

/// Feature availability cutoffs, kept as data. The exact kernel versions
/// are not pinned by any single upstream source (citation needed); 5.8 for
/// ring buffers and 5.7 for LSM hooks are the widely used defaults.
struct FeatureCutoffs {
	KernelVersion ringbuf{5, 8};
	KernelVersion lsm{5, 7};
};

/// Derives the feature set an OS/kernel combination offers.
std::set<Feature> derive_features(OsKind os, KernelVersion version,
				  const FeatureCutoffs &cutoffs = {});

/// Parses a profile config ("key: value" or "key = value" lines; '#'
/// comments). An explicit `features:` list overrides derivation — the
/// mechanism for simulating foreign platforms.
EnvironmentProfile profile_from_config_text(std::string_view text);

/// Config file fully overrides introspection when given; otherwise reads
/// the host's OS release info (best effort) and the WASM_BPF_BTF_PATH
/// search-path variable.
EnvironmentProfile
probe_environment(const std::optional<std::filesystem::path> &config = {});

/// The five platform columns of the compatibility matrix, by CSV name
/// ("linux-5.5", "linux-6.10", "linux-6.10-arm64", "windows", "userspace").
/// Mirrors the checked-in data/profiles/ files.
EnvironmentProfile simulated_platform_profile(std::string_view platform);

struct BackendDescriptor {
	enum class Kind { userspace_vm, kernel_stub };
	Kind kind = Kind::userspace_vm;
	std::set<ProgType> supported_prog_types;
	std::string notes;
};

struct UnsupportedReport {
	std::string program; // offending program (name or type)
	std::string rule;    // the platform rule that failed
};

using BackendSelection = std::variant<BackendDescriptor, UnsupportedReport>;

/// Pure function of the object's requirements (program types plus the
/// event-channel need implied by a ringbuf map) and the profile's
/// features.
BackendSelection select_backend(const ElfBpfObject &obj,
				const EnvironmentProfile &env);

struct BtfSearchResult {
	BtfTypeGraph graph;
	std::filesystem::path found;
	std::vector<std::string> warnings; // corrupt candidates skipped
};

/// Searches `<path>/<major>.<minor>/vmlinux.btf`, `<path>/vmlinux.btf`,
/// then `<path>` itself as a file, for each configured path in order.
/// Throws BtfNotFound listing everything tried.
BtfSearchResult find_target_btf(const EnvironmentProfile &env);

} // namespace wasmbpf
