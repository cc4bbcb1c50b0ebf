// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wasmbpf/wasm/module.hpp"

namespace wasmbpf::wasm {

class Instance;

/// Host import: values are passed as raw 64-bit slots in declaration order.
struct HostFunc {
	FuncType type;
	std::function<void(Instance &, std::span<const uint64_t> args,
			   std::span<uint64_t> results)>
		fn;
};

class ImportTable {
    public:
	void add(const std::string &module, const std::string &name,
		 HostFunc fn);
	const HostFunc *find(const std::string &module,
			     const std::string &name) const;

    private:
	std::map<std::pair<std::string, std::string>, HostFunc> funcs_;
};

/// Thrown when the guest calls proc_exit.
struct ProcExit {
	int32_t code;
};

constexpr uint32_t kPageSize = 65536;
constexpr uint32_t kMaxPages = 4096; // 256 MiB guest memory cap
constexpr uint32_t kMaxCallDepth = 1000;

class Instance {
    public:
	Instance(const Module &mod, const ImportTable &imports);

	std::span<uint8_t> memory()
	{
		return memory_;
	}
	/// Bounds-checked guest memory views; throws GuestTrap on overflow.
	std::span<uint8_t> mem_span(uint32_t ptr, uint32_t len);
	std::string read_cstring(uint32_t ptr, uint32_t max_len);

	bool has_export(std::string_view name) const;
	/// Calls an exported function. Returns the single result, or 0 for
	/// void results.
	uint64_t call_export(std::string_view name,
			     std::span<const uint64_t> args = {});
	/// Calls through the indirect function table with a signature check.
	uint64_t call_table(uint32_t table_index,
			    std::span<const uint64_t> args,
			    const FuncType &expected);

	uint64_t call_function(uint32_t func_index,
			       std::span<const uint64_t> args);

	const Module &module() const
	{
		return mod_;
	}

	/// Embedder hook slot: the host-ABI state rides along with the
	/// instance so host functions can find it.
	void *user_data = nullptr;

    private:
	friend struct Interp;
	const Module &mod_;
	std::vector<const HostFunc *> host_funcs_; // by import index
	std::vector<uint8_t> memory_;
	uint32_t memory_pages_ = 0;
	uint32_t memory_max_pages_ = kMaxPages;
	std::vector<uint64_t> globals_;
	std::vector<int64_t> table_; // func index or -1
	// shared interpreter stacks; no per-call allocation
	std::vector<uint64_t> vstack_;
	struct Ctrl {
		uint32_t target;
		uint32_t vheight;
		uint32_t arity;
		bool is_loop;
	};
	std::vector<Ctrl> cstack_;
	uint32_t call_depth_ = 0;

	uint32_t grow_memory(uint32_t delta_pages);
};

} // namespace wasmbpf::wasm
