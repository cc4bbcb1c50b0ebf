// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <functional>
#include <string>

#include "wasmbpf/wasm/interp.hpp"

namespace wasmbpf::wasm {

/// Minimal wasi_snapshot_preview1 surface: fd_write to stdout/stderr
/// (routed through `out`), proc_exit (thrown as ProcExit), a monotonic
/// clock, and benign stubs for the descriptors a libc-less guest may probe.
void register_wasi(ImportTable &imports,
		   std::function<void(std::string_view)> out);

} // namespace wasmbpf::wasm
