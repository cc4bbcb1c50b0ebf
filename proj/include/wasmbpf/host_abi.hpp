// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wasmbpf/arch_profile.hpp"
#include "wasmbpf/elf_object.hpp"
#include "wasmbpf/maps.hpp"
#include "wasmbpf/runtime_select.hpp"
#include "wasmbpf/vm.hpp"

namespace wasmbpf::wasm {
class ImportTable;
class Instance;
} // namespace wasmbpf::wasm

namespace wasmbpf::abi {

/// Stable guest-visible status codes.
constexpr int32_t kOk = 0;
constexpr int32_t kErrBadHandle = -1;
constexpr int32_t kErrNotFound = -2; // also NoSuchProgram
constexpr int32_t kErrOutOfBoundsGuestPointer = -3;
constexpr int32_t kErrUnsupported = -4;
constexpr int32_t kErrBadArgument = -5; // also BadCommand/BadString/NotARingbuf
constexpr int32_t kErrAlreadyExists = -6;
constexpr int32_t kErrCapacityExceeded = -7;
constexpr int32_t kErrBusy = -8;
constexpr int32_t kErrIndexOutOfRange = -9;

constexpr uint32_t kMaxGuestString = 512;

/// The guest seen from the ABI: linear memory plus a callback table. The
/// Wasm engine provides the real one; tests may substitute a fake.
class GuestEnv {
    public:
	virtual ~GuestEnv() = default;
	virtual std::span<uint8_t> memory() = 0;
	/// Invokes the guest sample callback (ctx, data, size) -> i32.
	virtual int32_t invoke_sample(uint32_t func_index, uint32_t ctx,
				      uint32_t data_ptr, uint32_t size) = 0;
};

struct AbiConfig {
	EnvironmentProfile env;
	std::shared_ptr<const BtfTypeGraph> target_btf; // optional
	std::string object_arch = "x86_64"; // what objects are compiled for
	uint64_t insn_budget = vm::kDefaultInsnBudget;
	std::function<uint64_t()> clock_ns; // VM ktime source
	uint64_t pid_tgid = 0;
	std::array<char, 16> comm{};
};

struct Attachment {
	int32_t link_id = 0;
	std::string program;
	std::string target; // event source name
	bool active = true;
};

struct LoadedObject {
	ElfBpfObject object;
	std::vector<EbpfProgramImage> images;
	std::map<std::string, int32_t> maps; // name -> map handle
	std::vector<Attachment> links;
	BackendSelection backend;
};

struct AbiCounters {
	uint64_t boundary_copies = 0;   // payload copies across the boundary
	uint64_t records_delivered = 0;
	uint64_t records_skipped = 0; // oversized, dropped with position advance
};

/// Per-Wasm-instance host state: the handle table, map registry, event
/// attachments and the six ABI entry points. ABI calls happen on the
/// instance thread; trigger_event may run from any thread.
class BpfInstance {
    public:
	explicit BpfInstance(AbiConfig config);

	// --- the ABI surface ---
	uint64_t load_bpf_object(GuestEnv &guest, uint32_t ptr, uint32_t size);
	int32_t close_bpf_object(uint64_t handle);
	int32_t attach_bpf_program(GuestEnv &guest, uint64_t handle,
				   uint32_t name_ptr, uint32_t target_ptr);
	int32_t buffer_poll(GuestEnv &guest, uint64_t handle, int32_t fd,
			    uint32_t sample_func, uint32_t ctx,
			    uint32_t data_ptr, uint32_t max_size,
			    int32_t timeout_ms);
	int32_t map_fd_by_name(GuestEnv &guest, uint64_t handle,
			       uint32_t name_ptr);
	int32_t map_operate(GuestEnv &guest, int32_t fd, int32_t cmd,
			    uint32_t key_ptr, uint32_t value_ptr,
			    uint32_t next_key_ptr, uint64_t flags);

	// --- host-side surface ---
	/// Runs every active attachment on `source` with a copy of the
	/// context bytes; returns how many programs executed.
	int trigger_event(std::string_view source,
			  std::span<const uint8_t> ctx_bytes);
	bool has_attachment(std::string_view source) const;
	/// Blocks until an attachment exists on `source` (script replay
	/// synchronization). Returns false on timeout.
	bool wait_for_attachment(std::string_view source, int timeout_ms);

	std::optional<Errc> last_error() const;
	std::string last_error_message() const;
	const AbiCounters &counters() const
	{
		return counters_;
	}
	MapRegistry &map_registry()
	{
		return maps_;
	}
	const LoadedObject *object(uint64_t handle) const;
	const AbiConfig &config() const
	{
		return config_;
	}

	/// Requests that a blocking buffer_poll return early.
	void interrupt_polls()
	{
		interrupt_.store(true);
	}

    private:
	void set_error(Errc code, std::string msg);
	std::shared_ptr<MapStore> object_map(uint64_t handle, int32_t fd);
	vm::VmEnv make_vm_env();

	AbiConfig config_;
	ArchProfile from_arch_;
	ArchProfile to_arch_;

	mutable std::mutex mutex_;
	uint64_t next_handle_ = 1;
	std::map<uint64_t, std::shared_ptr<LoadedObject>> objects_;
	MapRegistry maps_;
	int32_t next_link_id_ = 0;

	std::optional<Errc> last_error_;
	std::string last_error_message_;
	AbiCounters counters_;
	std::atomic<bool> interrupt_{false};
};

/// Registers the six `wasm_bpf` host functions against a Wasm import
/// table, bound to the given instance state.
void register_wasm_bpf_abi(wasm::ImportTable &imports,
			   std::shared_ptr<BpfInstance> state);

} // namespace wasmbpf::abi
