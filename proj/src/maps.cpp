// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/maps.hpp"

#include <cstring>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

const char *map_status_name(MapStatus s)
{
	switch (s) {
	case MapStatus::ok:
		return "ok";
	case MapStatus::not_found:
		return "not_found";
	case MapStatus::already_exists:
		return "already_exists";
	case MapStatus::capacity_exceeded:
		return "capacity_exceeded";
	case MapStatus::bad_handle:
		return "bad_handle";
	case MapStatus::index_out_of_range:
		return "index_out_of_range";
	case MapStatus::bad_argument:
		return "bad_argument";
	case MapStatus::bad_command:
		return "bad_command";
	}
	return "unknown";
}

MapStore::MapStore(int32_t handle, MapDef def)
	: handle_(handle), def_(std::move(def))
{
	switch (def_.type) {
	case MapType::hash:
		break;
	case MapType::array:
		slots_.resize(def_.max_entries);
		for (auto &slot : slots_)
			slot = std::make_shared<std::vector<uint8_t>>(
				def_.value_size, 0);
		break;
	case MapType::ringbuf:
		ring_ = std::make_unique<RingBuffer>(def_.max_entries);
		break;
	case MapType::perf_event_array:
		raise(Errc::UnsupportedMapType,
		      "perf_event_array maps are declared but not supported "
		      "by the userspace backend");
	}
}

RingBuffer &MapStore::ring()
{
	if (!ring_)
		raise(Errc::NotARingbuf,
		      "map '" + def_.name + "' is not a ring buffer");
	return *ring_;
}

uint64_t MapStore::element_count() const
{
	std::lock_guard lock(mutex_);
	if (def_.type == MapType::hash)
		return table_.size();
	if (def_.type == MapType::array)
		return def_.max_entries;
	return 0;
}

MapStatus MapStore::lookup(std::span<const uint8_t> key,
			   std::span<uint8_t> value_out)
{
	if (key.size() != def_.key_size || value_out.size() != def_.value_size)
		return MapStatus::bad_argument;
	std::lock_guard lock(mutex_);
	switch (def_.type) {
	case MapType::hash: {
		auto it = table_.find(
			std::string(key.begin(), key.end()));
		if (it == table_.end())
			return MapStatus::not_found;
		std::memcpy(value_out.data(), it->second.value->data(),
			    def_.value_size);
		return MapStatus::ok;
	}
	case MapType::array: {
		uint32_t idx;
		std::memcpy(&idx, key.data(), 4);
		if (idx >= def_.max_entries)
			return MapStatus::index_out_of_range;
		std::memcpy(value_out.data(), slots_[idx]->data(),
			    def_.value_size);
		return MapStatus::ok;
	}
	default:
		return MapStatus::bad_argument;
	}
}

MapStatus MapStore::update(std::span<const uint8_t> key,
			   std::span<const uint8_t> value, uint64_t flags)
{
	if (key.size() != def_.key_size || value.size() != def_.value_size)
		return MapStatus::bad_argument;
	if (flags > mapflags::kExist)
		return MapStatus::bad_argument;
	std::lock_guard lock(mutex_);
	switch (def_.type) {
	case MapType::hash: {
		std::string k(key.begin(), key.end());
		auto it = table_.find(k);
		if (it != table_.end()) {
			if (flags == mapflags::kNoExist)
				return MapStatus::already_exists;
			// update in place so held references see new bytes
			std::memcpy(it->second.value->data(), value.data(),
				    def_.value_size);
			return MapStatus::ok;
		}
		if (flags == mapflags::kExist)
			return MapStatus::not_found;
		if (table_.size() >= def_.max_entries)
			return MapStatus::capacity_exceeded;
		order_.push_back(k);
		HashEntry entry;
		entry.value = std::make_shared<std::vector<uint8_t>>(
			value.begin(), value.end());
		entry.order_it = std::prev(order_.end());
		table_.emplace(std::move(k), std::move(entry));
		return MapStatus::ok;
	}
	case MapType::array: {
		uint32_t idx;
		std::memcpy(&idx, key.data(), 4);
		if (idx >= def_.max_entries)
			return MapStatus::index_out_of_range;
		// array slots always exist
		if (flags == mapflags::kNoExist)
			return MapStatus::already_exists;
		std::memcpy(slots_[idx]->data(), value.data(), def_.value_size);
		return MapStatus::ok;
	}
	default:
		return MapStatus::bad_argument;
	}
}

MapStatus MapStore::erase(std::span<const uint8_t> key)
{
	if (key.size() != def_.key_size)
		return MapStatus::bad_argument;
	std::lock_guard lock(mutex_);
	switch (def_.type) {
	case MapType::hash: {
		auto it = table_.find(std::string(key.begin(), key.end()));
		if (it == table_.end())
			return MapStatus::not_found;
		order_.erase(it->second.order_it);
		table_.erase(it);
		return MapStatus::ok;
	}
	case MapType::array:
		// preallocated slots cannot be deleted
		return MapStatus::bad_argument;
	default:
		return MapStatus::bad_argument;
	}
}

MapStatus MapStore::get_next_key(std::span<const uint8_t> key,
				 std::span<uint8_t> next_key_out)
{
	if (next_key_out.size() != def_.key_size)
		return MapStatus::bad_argument;
	if (!key.empty() && key.size() != def_.key_size)
		return MapStatus::bad_argument;
	std::lock_guard lock(mutex_);
	switch (def_.type) {
	case MapType::hash: {
		if (order_.empty())
			return MapStatus::not_found;
		std::list<std::string>::const_iterator next;
		if (key.empty()) {
			next = order_.begin();
		} else {
			auto it = table_.find(
				std::string(key.begin(), key.end()));
			if (it == table_.end()) {
				// unknown key restarts iteration
				next = order_.begin();
			} else {
				next = std::next(it->second.order_it);
				if (next == order_.end())
					return MapStatus::not_found;
			}
		}
		std::memcpy(next_key_out.data(), next->data(), def_.key_size);
		return MapStatus::ok;
	}
	case MapType::array: {
		if (def_.max_entries == 0)
			return MapStatus::not_found;
		uint32_t next = 0;
		if (!key.empty()) {
			uint32_t idx;
			std::memcpy(&idx, key.data(), 4);
			if (idx < def_.max_entries) {
				if (idx + 1 >= def_.max_entries)
					return MapStatus::not_found;
				next = idx + 1;
			}
		}
		std::memcpy(next_key_out.data(), &next, 4);
		return MapStatus::ok;
	}
	default:
		return MapStatus::bad_argument;
	}
}

MapStatus MapStore::operate(int32_t cmd, std::span<const uint8_t> key,
			    std::span<uint8_t> value,
			    std::span<uint8_t> next_key, uint64_t flags)
{
	switch (cmd) {
	case mapcmd::kLookup:
		return lookup(key, value);
	case mapcmd::kUpdate:
		return update(key, value, flags);
	case mapcmd::kDelete:
		return erase(key);
	case mapcmd::kGetNextKey:
		return get_next_key(key, next_key);
	default:
		return MapStatus::bad_command;
	}
}

std::shared_ptr<std::vector<uint8_t>>
MapStore::lookup_ref(std::span<const uint8_t> key)
{
	if (key.size() != def_.key_size)
		return nullptr;
	std::lock_guard lock(mutex_);
	switch (def_.type) {
	case MapType::hash: {
		auto it = table_.find(std::string(key.begin(), key.end()));
		return it == table_.end() ? nullptr : it->second.value;
	}
	case MapType::array: {
		uint32_t idx;
		std::memcpy(&idx, key.data(), 4);
		return idx < def_.max_entries ? slots_[idx] : nullptr;
	}
	default:
		return nullptr;
	}
}

std::shared_ptr<MapStore> MapRegistry::create(const MapDef &def)
{
	std::lock_guard lock(mutex_);
	auto store = std::make_shared<MapStore>(next_handle_, def);
	stores_.emplace(next_handle_, store);
	next_handle_++;
	return store;
}

std::shared_ptr<MapStore> MapRegistry::get(int32_t handle) const
{
	std::lock_guard lock(mutex_);
	auto it = stores_.find(handle);
	return it == stores_.end() ? nullptr : it->second;
}

void MapRegistry::destroy(int32_t handle)
{
	std::lock_guard lock(mutex_);
	stores_.erase(handle);
}

} // namespace wasmbpf
