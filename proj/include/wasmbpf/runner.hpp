// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wasmbpf/host_abi.hpp"

namespace wasmbpf {

struct RunOptions {
	std::filesystem::path input; // .wasm file or OCI layout directory
	std::optional<std::filesystem::path> env_profile;
	std::optional<std::string> arch_override;
	std::vector<std::filesystem::path> btf_paths;
	std::optional<std::filesystem::path> script;
	int timeout_ms = 0; // > 0 interrupts blocked polls after this long
	std::function<void(std::string_view)> out; // guest stdout sink
	std::function<void(std::string_view)> log; // runner diagnostics
};

struct RunResult {
	int exit_code = 0;	// guest exit code, or 2 load / 3 trap
	std::string trap_message;
};

/// Exit codes used by the CLI.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitLoadFailure = 2;
constexpr int kExitGuestTrap = 3;

/// Loads a Wasm module (raw or from an OCI layout), wires the wasm_bpf and
/// WASI host functions, optionally replays an event script on a second
/// thread (`trigger <source> <hex ctx>` lines), and runs the guest's
/// _start.
RunResult run_module(const RunOptions &options);

/// Builds the host ABI configuration a run would use; shared with bench.
abi::AbiConfig
make_abi_config(const std::optional<std::filesystem::path> &env_profile,
		const std::optional<std::string> &arch_override,
		const std::vector<std::filesystem::path> &btf_paths,
		const std::function<void(std::string_view)> &log);

struct ScriptEvent {
	std::string source;
	std::vector<uint8_t> ctx;
};

std::vector<ScriptEvent> parse_event_script(const std::string &text);

} // namespace wasmbpf
