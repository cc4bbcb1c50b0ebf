// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wasmbpf::bench {

struct BenchRow {
	std::string suite;
	std::string name;
	uint64_t iterations = 0;
	double mean_ns = 0;
	double p50_ns = 0;
	double p99_ns = 0;
};

struct BenchReport {
	std::vector<BenchRow> rows;
	// free-form findings: ratios, milliseconds, sizes, reference values
	std::vector<std::tuple<std::string, std::string, std::string>> info;

	void add_info(std::string suite, std::string key, std::string value);
	double info_number(std::string_view suite, std::string_view key) const;
	std::string to_csv() const;   // section,name,metric,value
	std::string to_table() const; // human-readable
	void merge(const BenchReport &other);
};

struct FixturePaths {
	std::filesystem::path fixture_dir; // tests/fixtures
	std::filesystem::path bench_guest_wasm() const
	{
		return fixture_dir / "wasm" / "bench_guest.wasm";
	}
	std::filesystem::path bootstrap_guest_wasm() const
	{
		return fixture_dir / "wasm" / "bootstrap_guest.wasm";
	}
	std::filesystem::path wasm_dir() const
	{
		return fixture_dir / "wasm";
	}
};

/// Guest-via-ABI map update+lookup latency vs the host-direct path.
BenchReport bench_map_access(const FixturePaths &paths);
/// Per-record ring buffer delivery latency (guest poll) vs host-direct
/// consumption.
BenchReport bench_ringbuf_poll(const FixturePaths &paths);
/// Wall time to instantiate the guest and load+attach the object.
BenchReport bench_startup(const FixturePaths &paths);
/// Artifact sizes vs the recorded minimal-container baseline.
BenchReport bench_sizes(const FixturePaths &paths);

BenchReport run_suite(std::string_view suite, const FixturePaths &paths);

} // namespace wasmbpf::bench
