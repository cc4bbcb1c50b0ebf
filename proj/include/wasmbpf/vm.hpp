// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "wasmbpf/elf_object.hpp"
#include "wasmbpf/maps.hpp"

namespace wasmbpf::vm {

constexpr uint32_t kStackSize = 512;
constexpr uint64_t kDefaultInsnBudget = 1'000'000;

/// Region-token memory sandbox. Guest-visible addresses are opaque 64-bit
/// tokens: region i occupies [(i+1)<<32, (i+1)<<32 + size). Every access is
/// bounds- and permission-checked; nothing outside a granted region is
/// reachable. Ring-backed regions translate offsets through the ring mask
/// so reservations that wrap the ring stay contiguous for the program.
class MemorySandbox {
    public:
	uint64_t add_region(uint8_t *host, uint64_t size, bool writable,
			    std::shared_ptr<void> keepalive = nullptr);
	uint64_t add_ring_region(uint8_t *ring_data, uint64_t ring_mask,
				 uint64_t start_counter, uint64_t size,
				 bool writable);
	void revoke(uint64_t base);

	/// check_mem: true = permit. Width must be 1, 2, 4 or 8 for
	/// instruction accesses; byte-span helpers use arbitrary lengths.
	bool check(uint64_t addr, uint64_t size, bool write) const;

	uint64_t load(uint64_t addr, uint32_t width) const; // traps OutOfBounds
	void store(uint64_t addr, uint32_t width, uint64_t value);
	void read_bytes(uint64_t addr, std::span<uint8_t> out) const;
	void write_bytes(uint64_t addr, std::span<const uint8_t> in);

    private:
	struct Region {
		uint64_t size = 0;
		uint8_t *host = nullptr;
		bool writable = false;
		bool revoked = false;
		bool ring = false;
		uint64_t ring_mask = 0;
		uint64_t ring_start = 0;
		std::shared_ptr<void> keepalive;
	};
	const Region *find(uint64_t addr, uint64_t size, bool write) const;
	std::vector<Region> regions_;
};

/// Execution environment: the maps the program may touch plus the synthetic
/// clock/task identity the tracing helpers report.
struct VmEnv {
	MapRegistry *maps = nullptr;
	std::function<uint64_t()> ktime_ns; // default: steady_clock
	uint64_t pid_tgid = 0;
	std::array<char, 16> comm{};
};

struct VmOptions {
	uint64_t insn_budget = kDefaultInsnBudget;
	// -1 = derive from program type (xdp/sockops writable)
	int ctx_writable = -1;
};

/// Load-time checks: jump targets in bounds and not into an LD_IMM64
/// second slot, EXIT termination, no write to r10, no unsupported
/// instruction forms.
void validate_image(const EbpfProgramImage &image);

bool ctx_writable_for(ProgType type);

/// Runs a validated image to EXIT and returns r0. All memory effects stay
/// within the stack, the context (if writable) and maps reached through
/// helpers. Traps are thrown as Error with OutOfBounds, BudgetExhausted,
/// UnknownHelper, BadJump or BadHandle codes.
uint64_t execute(const EbpfProgramImage &image, std::span<uint8_t> ctx,
		 VmEnv &env, const VmOptions &opts = {});

/// Applies one ALU/ALU64 instruction to a register file; total on its
/// class. Exposed for differential testing; execute() uses this same path.
void step_alu(const Insn &ins, std::array<uint64_t, 11> &regs);

/// Helper ids implemented by the VM (conventional numbering).
namespace helper {
constexpr uint32_t kMapLookupElem = 1;
constexpr uint32_t kMapUpdateElem = 2;
constexpr uint32_t kMapDeleteElem = 3;
constexpr uint32_t kKtimeGetNs = 5;
constexpr uint32_t kGetCurrentPidTgid = 14;
constexpr uint32_t kGetCurrentComm = 16;
constexpr uint32_t kRingbufOutput = 130;
constexpr uint32_t kRingbufReserve = 131;
constexpr uint32_t kRingbufSubmit = 132;
constexpr uint32_t kRingbufDiscard = 133;
} // namespace helper

} // namespace wasmbpf::vm
