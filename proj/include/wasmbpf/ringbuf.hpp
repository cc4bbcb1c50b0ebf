// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

namespace wasmbpf {

/// Single-producer/single-consumer byte ring with kernel-style record
/// headers: a little-endian 4-byte length word (bit 31 = BUSY while the
/// record is being written, bit 30 = DISCARD) plus 4 reserved bytes, then
/// the payload rounded up to 8 bytes. Positions are monotonically
/// increasing byte counters; the data array is indexed modulo the
/// power-of-two size.
///
/// Concurrency: one consumer thread; concurrent producers are serialized
/// internally at reserve time, submit/discard touch only their own record.
class RingBuffer {
    public:
	static constexpr uint32_t kBusyBit = 1u << 31;
	static constexpr uint32_t kDiscardBit = 1u << 30;
	static constexpr uint32_t kHeaderSize = 8;

	struct Reservation {
		uint64_t pos = 0; // counter of the record header
		uint32_t len = 0; // payload length as requested
	};

	enum class ReserveStatus { ok, busy, too_large };

	explicit RingBuffer(uint32_t size);

	ReserveStatus reserve(uint32_t len, Reservation &out);
	void submit(const Reservation &r);  // throws DoubleSubmit
	void discard(const Reservation &r); // throws DoubleSubmit

	/// Copies `payload` into a reservation (producer-side convenience).
	void write_payload(const Reservation &r,
			   std::span<const uint8_t> payload);

	/// Delivers every complete, non-BUSY, non-DISCARD record in order.
	/// The sink returns false to stop after the current record. Returns
	/// the number of records delivered.
	size_t consume(const std::function<bool(std::span<const uint8_t>)> &sink);

	/// Peeks at the next pending record's payload length without
	/// consuming; returns false when none is ready.
	bool peek_len(uint32_t &len_out) const;
	/// Skips the next pending record (after a peek) without delivering.
	void skip_one();

	uint64_t producer_pos() const
	{
		return producer_pos_.load(std::memory_order_relaxed);
	}
	uint64_t consumer_pos() const
	{
		return consumer_pos_.load(std::memory_order_relaxed);
	}
	uint32_t size() const
	{
		return uint32_t(data_.size());
	}
	uint64_t mask() const
	{
		return data_.size() - 1;
	}
	uint8_t *data()
	{
		return data_.data();
	}
	const uint8_t *data() const
	{
		return data_.data();
	}

	static uint32_t round_up_8(uint32_t v)
	{
		return (v + 7u) & ~7u;
	}

    private:
	uint32_t load_header(uint64_t pos,
			     std::memory_order order) const;
	void store_header(uint64_t pos, uint32_t value,
			  std::memory_order order);
	uint64_t pending_header_pos(bool &ok) const;

	std::vector<uint8_t> data_;
	std::atomic<uint64_t> producer_pos_{0};
	std::atomic<uint64_t> consumer_pos_{0};
	std::mutex producer_mutex_;
	mutable std::vector<uint8_t> scratch_; // wrap assembly, consumer-owned
	std::atomic<bool> consuming_{false};
};

} // namespace wasmbpf
