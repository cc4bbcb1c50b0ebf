// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/ringbuf.hpp"

#include <cassert>
#include <cstring>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

bool is_power_of_two(uint64_t v)
{
	return v != 0 && (v & (v - 1)) == 0;
}

} // namespace

RingBuffer::RingBuffer(uint32_t size) : data_(size)
{
	if (!is_power_of_two(size) || size < kHeaderSize)
		raise(Errc::BadArgument,
		      "ring size " + std::to_string(size) +
			      " is not a power of two >= 8");
}

uint32_t RingBuffer::load_header(uint64_t pos, std::memory_order order) const
{
	// positions stay 8-aligned, so the 4-byte word never wraps
	uint8_t *p = const_cast<uint8_t *>(data_.data()) + (pos & mask());
	return std::atomic_ref<uint32_t>(*reinterpret_cast<uint32_t *>(p))
		.load(order);
}

void RingBuffer::store_header(uint64_t pos, uint32_t value,
			      std::memory_order order)
{
	uint8_t *p = data_.data() + (pos & mask());
	std::atomic_ref<uint32_t>(*reinterpret_cast<uint32_t *>(p))
		.store(value, order);
}

RingBuffer::ReserveStatus RingBuffer::reserve(uint32_t len, Reservation &out)
{
	if (len == 0 || len > size() - kHeaderSize)
		return ReserveStatus::too_large;
	uint32_t total = kHeaderSize + round_up_8(len);

	std::lock_guard lock(producer_mutex_);
	uint64_t prod = producer_pos_.load(std::memory_order_relaxed);
	uint64_t cons = consumer_pos_.load(std::memory_order_acquire);
	if (prod + total - cons > size())
		return ReserveStatus::busy;

	store_header(prod, len | kBusyBit, std::memory_order_relaxed);
	// zero the reserved word for byte-exact external parsing
	uint8_t *p = data_.data() + ((prod + 4) & mask());
	std::memset(p, 0, 4);
	producer_pos_.store(prod + total, std::memory_order_release);
	out = {prod, len};
	return ReserveStatus::ok;
}

void RingBuffer::submit(const Reservation &r)
{
	uint32_t hdr = load_header(r.pos, std::memory_order_relaxed);
	if (!(hdr & kBusyBit))
		raise(Errc::DoubleSubmit,
		      "record at position " + std::to_string(r.pos) +
			      " was already submitted or discarded");
	store_header(r.pos, r.len, std::memory_order_release);
}

void RingBuffer::discard(const Reservation &r)
{
	uint32_t hdr = load_header(r.pos, std::memory_order_relaxed);
	if (!(hdr & kBusyBit))
		raise(Errc::DoubleSubmit,
		      "record at position " + std::to_string(r.pos) +
			      " was already submitted or discarded");
	store_header(r.pos, r.len | kDiscardBit, std::memory_order_release);
}

void RingBuffer::write_payload(const Reservation &r,
			       std::span<const uint8_t> payload)
{
	if (payload.size() > r.len)
		raise(Errc::TooLarge, "payload exceeds reservation");
	uint64_t start = r.pos + kHeaderSize;
	for (size_t i = 0; i < payload.size(); i++)
		data_[(start + i) & mask()] = payload[i];
}

uint64_t RingBuffer::pending_header_pos(bool &ok) const
{
	uint64_t cons = consumer_pos_.load(std::memory_order_relaxed);
	uint64_t prod = producer_pos_.load(std::memory_order_acquire);
	ok = cons < prod;
	return cons;
}

bool RingBuffer::peek_len(uint32_t &len_out) const
{
	bool ok;
	uint64_t pos = pending_header_pos(ok);
	if (!ok)
		return false;
	uint32_t hdr = load_header(pos, std::memory_order_acquire);
	if (hdr & kBusyBit)
		return false;
	len_out = hdr & ~(kBusyBit | kDiscardBit);
	return true;
}

void RingBuffer::skip_one()
{
	bool ok;
	uint64_t pos = pending_header_pos(ok);
	if (!ok)
		return;
	uint32_t hdr = load_header(pos, std::memory_order_acquire);
	if (hdr & kBusyBit)
		return;
	uint32_t len = hdr & ~(kBusyBit | kDiscardBit);
	consumer_pos_.store(pos + kHeaderSize + round_up_8(len),
			    std::memory_order_release);
}

size_t RingBuffer::consume(
	const std::function<bool(std::span<const uint8_t>)> &sink)
{
	bool was_consuming = consuming_.exchange(true);
	assert(!was_consuming && "RingBuffer has a single-consumer contract");
	(void)was_consuming;

	size_t delivered = 0;
	for (;;) {
		uint64_t cons = consumer_pos_.load(std::memory_order_relaxed);
		uint64_t prod = producer_pos_.load(std::memory_order_acquire);
		if (cons >= prod)
			break;
		uint32_t hdr = load_header(cons, std::memory_order_acquire);
		if (hdr & kBusyBit)
			break;
		uint32_t len = hdr & ~(kBusyBit | kDiscardBit);
		uint64_t next = cons + kHeaderSize + round_up_8(len);
		bool keep_going = true;
		if (!(hdr & kDiscardBit)) {
			uint64_t start = cons + kHeaderSize;
			uint64_t first = (start & mask());
			std::span<const uint8_t> payload;
			if (first + len <= data_.size()) {
				payload = {data_.data() + first, len};
			} else {
				scratch_.resize(len);
				for (uint32_t i = 0; i < len; i++)
					scratch_[i] =
						data_[(start + i) & mask()];
				payload = {scratch_.data(), len};
			}
			keep_going = sink(payload);
			delivered++;
		}
		consumer_pos_.store(next, std::memory_order_release);
		if (!keep_going)
			break;
	}
	consuming_.store(false);
	return delivered;
}

} // namespace wasmbpf
