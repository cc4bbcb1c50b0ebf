// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wasmbpf::oci {

constexpr std::string_view kLayoutVersion = "1.0.0";
constexpr std::string_view kManifestMediaType =
	"application/vnd.oci.image.manifest.v1+json";
constexpr std::string_view kConfigMediaType =
	"application/vnd.wasm.config.v1+json";
constexpr std::string_view kLayerMediaType =
	"application/vnd.wasm.content.layer.v1+wasm";

/// Recorded size of a representative minimal-container baseline image, for
/// size comparisons in inspect reports.
constexpr uint64_t kContainerBaselineBytes = 1'300'000;

std::string sha256_hex(std::span<const uint8_t> bytes);

struct PackMetadata {
	std::string name;
	std::string version = "latest";
	std::map<std::string, std::string> annotations;
};

/// Writes a deterministic OCI image layout (oci-layout, index.json,
/// blobs/sha256/*) holding one Wasm module layer. Same inputs produce
/// byte-identical output. Optionally also emits the layout as a single
/// ustar tar with zeroed timestamps.
void pack(std::span<const uint8_t> wasm_module, const PackMetadata &metadata,
	  const std::filesystem::path &out_dir,
	  const std::filesystem::path &tar_path = {});

struct UnpackResult {
	std::vector<uint8_t> module_bytes;
	PackMetadata metadata;
};

/// Verifies every digest and returns the packed module byte-identically.
UnpackResult unpack(const std::filesystem::path &layout_dir);

/// Digest-checks every blob referenced from the index without unpacking.
void validate(const std::filesystem::path &layout_dir);

struct SizeReport {
	std::string path;
	bool is_layout = false;
	uint64_t total_bytes = 0;
	std::vector<std::pair<std::string, uint64_t>> blobs; // digest, size
	uint64_t container_baseline_bytes = kContainerBaselineBytes;
	double vs_container_ratio = 0.0;
};

/// Reports artifact sizes for an OCI layout directory or a raw Wasm file.
SizeReport inspect(const std::filesystem::path &layout_or_wasm);

std::string format_size_report(const SizeReport &report);
std::string size_report_json(const SizeReport &report);

} // namespace wasmbpf::oci
