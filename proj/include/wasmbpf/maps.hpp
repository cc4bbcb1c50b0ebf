// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wasmbpf/elf_object.hpp"
#include "wasmbpf/ringbuf.hpp"

namespace wasmbpf {

enum class MapStatus {
	ok,
	not_found,
	already_exists,
	capacity_exceeded,
	bad_handle,
	index_out_of_range,
	bad_argument,
	bad_command,
};

const char *map_status_name(MapStatus s);

namespace mapcmd {
// mirrors the bpf syscall command space
constexpr int32_t kLookup = 1;
constexpr int32_t kUpdate = 2;
constexpr int32_t kDelete = 3;
constexpr int32_t kGetNextKey = 4;
} // namespace mapcmd

namespace mapflags {
constexpr uint64_t kAny = 0;
constexpr uint64_t kNoExist = 1;
constexpr uint64_t kExist = 2;
} // namespace mapflags

/// One live map. Hash and array maps are internally synchronized; the ring
/// buffer carries its own single-producer/single-consumer discipline.
/// get_next_key on hash maps iterates in stable insertion order (an
/// implementation guarantee for reproducible tests, not a portability one).
class MapStore {
    public:
	MapStore(int32_t handle, MapDef def);

	int32_t handle() const
	{
		return handle_;
	}
	const MapDef &def() const
	{
		return def_;
	}
	bool is_ringbuf() const
	{
		return def_.type == MapType::ringbuf;
	}

	MapStatus lookup(std::span<const uint8_t> key,
			 std::span<uint8_t> value_out);
	MapStatus update(std::span<const uint8_t> key,
			 std::span<const uint8_t> value, uint64_t flags);
	MapStatus erase(std::span<const uint8_t> key);
	/// Empty `key` = return the first key. A key not present in the map
	/// restarts iteration from the first key.
	MapStatus get_next_key(std::span<const uint8_t> key,
			       std::span<uint8_t> next_key_out);

	/// Command-style dispatcher; `value` is written for lookup and read
	/// for update.
	MapStatus operate(int32_t cmd, std::span<const uint8_t> key,
			  std::span<uint8_t> value,
			  std::span<uint8_t> next_key, uint64_t flags);

	/// In-place value reference for the VM's map_lookup_elem helper.
	/// The buffer stays valid while the shared_ptr is held, even across
	/// a delete. Null on miss.
	std::shared_ptr<std::vector<uint8_t>>
	lookup_ref(std::span<const uint8_t> key);

	RingBuffer &ring(); // throws NotARingbuf for other types

	uint64_t element_count() const;

    private:
	using Value = std::shared_ptr<std::vector<uint8_t>>;
	struct HashEntry {
		Value value;
		std::list<std::string>::iterator order_it;
	};

	int32_t handle_;
	MapDef def_;
	mutable std::mutex mutex_;
	// hash backing
	std::unordered_map<std::string, HashEntry> table_;
	std::list<std::string> order_;
	// array backing: preallocated, zero-filled slots
	std::vector<Value> slots_;
	// ringbuf backing
	std::unique_ptr<RingBuffer> ring_;
};

/// Issues map handles (> 0, strictly increasing, never reused) and owns the
/// stores. Thread-safe.
class MapRegistry {
    public:
	std::shared_ptr<MapStore> create(const MapDef &def);
	std::shared_ptr<MapStore> get(int32_t handle) const;
	void destroy(int32_t handle);

    private:
	mutable std::mutex mutex_;
	int32_t next_handle_ = 1;
	std::map<int32_t, std::shared_ptr<MapStore>> stores_;
};

} // namespace wasmbpf
