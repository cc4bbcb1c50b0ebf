// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <cstring>
#include <deque>
#include <random>
#include <thread>

#include "wasmbpf/errors.hpp"
#include "wasmbpf/ringbuf.hpp"

using namespace wasmbpf;

namespace {

std::vector<uint8_t> payload_of(uint32_t tag, uint32_t len)
{
	std::vector<uint8_t> p(len);
	for (uint32_t i = 0; i < len; i++)
		p[i] = uint8_t(tag + i);
	return p;
}

} // namespace

TEST_CASE("reserve(5) advances the producer by 16")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	CHECK(rb.reserve(5, res) == RingBuffer::ReserveStatus::ok);
	CHECK(rb.producer_pos() == 16); // 8 header + 8 rounded payload
	CHECK(res.len == 5);
}

TEST_CASE("reserve of the full ring size is too_large")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	CHECK(rb.reserve(4096, res) == RingBuffer::ReserveStatus::too_large);
	CHECK(rb.reserve(4096 - 8, res) == RingBuffer::ReserveStatus::ok);
}

TEST_CASE("a full ring of unconsumed records reports busy")
{
	// capacity oracle from the layout rule: each record takes
	// 8 + round_up_8(len) bytes
	RingBuffer rb(256);
	uint32_t len = 8;
	uint32_t per_record = 8 + RingBuffer::round_up_8(len);
	uint32_t fits = 256 / per_record;
	RingBuffer::Reservation res;
	for (uint32_t i = 0; i < fits; i++) {
		CHECK(rb.reserve(len, res) == RingBuffer::ReserveStatus::ok);
		rb.submit(res);
	}
	CHECK(rb.reserve(len, res) == RingBuffer::ReserveStatus::busy);
	// consuming one record frees exactly one slot
	rb.consume([](std::span<const uint8_t>) { return false; });
	CHECK(rb.reserve(len, res) == RingBuffer::ReserveStatus::ok);
}

TEST_CASE("reserve-submit-consume delivers one record")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	REQUIRE(rb.reserve(16, res) == RingBuffer::ReserveStatus::ok);
	auto p = payload_of(7, 16);
	rb.write_payload(res, p);
	rb.submit(res);

	std::vector<uint8_t> got;
	size_t n = rb.consume([&](std::span<const uint8_t> data) {
		got.assign(data.begin(), data.end());
		return true;
	});
	CHECK(n == 1);
	CHECK(got == p);
	CHECK(rb.consumer_pos() == rb.producer_pos());
}

TEST_CASE("discarded records are skipped but advance the consumer")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	REQUIRE(rb.reserve(16, res) == RingBuffer::ReserveStatus::ok);
	rb.discard(res);
	size_t n = rb.consume([](std::span<const uint8_t>) { return true; });
	CHECK(n == 0);
	CHECK(rb.consumer_pos() == rb.producer_pos());
	CHECK(rb.consumer_pos() == 24);
}

TEST_CASE("double submit is rejected")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	REQUIRE(rb.reserve(8, res) == RingBuffer::ReserveStatus::ok);
	rb.submit(res);
	try {
		rb.submit(res);
		FAIL("expected DoubleSubmit");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::DoubleSubmit);
	}
}

TEST_CASE("record headers are byte-exact for external parsing")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation res;
	REQUIRE(rb.reserve(5, res) == RingBuffer::ReserveStatus::ok);

	// BUSY set while outstanding
	uint32_t hdr;
	std::memcpy(&hdr, rb.data(), 4);
	CHECK(hdr == (5u | RingBuffer::kBusyBit));

	rb.submit(res);
	std::memcpy(&hdr, rb.data(), 4);
	CHECK(hdr == 5u);

	// reserved word is zeroed
	uint32_t reserved;
	std::memcpy(&reserved, rb.data() + 4, 4);
	CHECK(reserved == 0);

	RingBuffer::Reservation res2;
	REQUIRE(rb.reserve(9, res2) == RingBuffer::ReserveStatus::ok);
	rb.discard(res2);
	std::memcpy(&hdr, rb.data() + 16, 4);
	CHECK(hdr == (9u | RingBuffer::kDiscardBit));
}

TEST_CASE("consumer stops at a BUSY record and resumes after submit")
{
	RingBuffer rb(4096);
	RingBuffer::Reservation first, second;
	REQUIRE(rb.reserve(8, first) == RingBuffer::ReserveStatus::ok);
	REQUIRE(rb.reserve(8, second) == RingBuffer::ReserveStatus::ok);
	rb.submit(second); // out of order: first still BUSY
	CHECK(rb.consume([](std::span<const uint8_t>) { return true; }) == 0);
	rb.submit(first);
	CHECK(rb.consume([](std::span<const uint8_t>) { return true; }) == 2);
}

TEST_CASE("payloads that wrap the ring edge survive intact")
{
	RingBuffer rb(64);
	// walk the positions to the edge
	RingBuffer::Reservation res;
	for (int i = 0; i < 3; i++) {
		REQUIRE(rb.reserve(8, res) == RingBuffer::ReserveStatus::ok);
		rb.submit(res);
		rb.consume([](std::span<const uint8_t>) { return true; });
	}
	// producer_pos = 48; a 24-byte payload wraps at 64
	REQUIRE(rb.reserve(24, res) == RingBuffer::ReserveStatus::ok);
	auto p = payload_of(3, 24);
	rb.write_payload(res, p);
	rb.submit(res);
	std::vector<uint8_t> got;
	CHECK(rb.consume([&](std::span<const uint8_t> data) {
		got.assign(data.begin(), data.end());
		return true;
	}) == 1);
	CHECK(got == p);
}

TEST_CASE("1000 random operations match a queue model")
{
	std::mt19937 rng(23);
	RingBuffer rb(512);
	std::deque<std::vector<uint8_t>> model;
	std::vector<std::pair<RingBuffer::Reservation, std::vector<uint8_t>>>
		outstanding;
	uint32_t tag = 0;

	for (int step = 0; step < 1000; step++) {
		switch (rng() % 3) {
		case 0: { // reserve (+ submit or discard)
			uint32_t len = 1 + rng() % 48;
			RingBuffer::Reservation res;
			auto st = rb.reserve(len, res);
			if (st != RingBuffer::ReserveStatus::ok)
				break;
			auto p = payload_of(tag++, len);
			rb.write_payload(res, p);
			if (rng() % 4 == 0) {
				rb.discard(res);
			} else {
				rb.submit(res);
				model.push_back(p);
			}
			break;
		}
		case 1: { // consume everything available
			rb.consume([&](std::span<const uint8_t> data) {
				REQUIRE(!model.empty());
				CHECK(std::vector<uint8_t>(data.begin(),
							   data.end()) ==
				      model.front());
				model.pop_front();
				return true;
			});
			break;
		}
		case 2: { // consume at most one
			rb.consume([&](std::span<const uint8_t> data) {
				REQUIRE(!model.empty());
				CHECK(std::vector<uint8_t>(data.begin(),
							   data.end()) ==
				      model.front());
				model.pop_front();
				return false;
			});
			break;
		}
		}
	}
	// drain
	rb.consume([&](std::span<const uint8_t> data) {
		REQUIRE(!model.empty());
		CHECK(std::vector<uint8_t>(data.begin(), data.end()) ==
		      model.front());
		model.pop_front();
		return true;
	});
	CHECK(model.empty());
}

TEST_CASE("one producer and one consumer deliver exactly once in order")
{
	RingBuffer rb(1024);
	constexpr uint32_t kTotal = 20000;

	std::thread producer([&] {
		std::mt19937 rng(5);
		for (uint32_t i = 0; i < kTotal;) {
			RingBuffer::Reservation res;
			if (rb.reserve(8, res) !=
			    RingBuffer::ReserveStatus::ok) {
				std::this_thread::yield();
				continue;
			}
			std::vector<uint8_t> p(8);
			std::memcpy(p.data(), &i, 4);
			rb.write_payload(res, p);
			rb.submit(res);
			i++;
			if (rng() % 64 == 0)
				std::this_thread::sleep_for(
					std::chrono::microseconds(rng() % 50));
		}
	});

	uint32_t expect = 0;
	std::mt19937 rng(6);
	while (expect < kTotal) {
		rb.consume([&](std::span<const uint8_t> data) {
			uint32_t got;
			std::memcpy(&got, data.data(), 4);
			CHECK(got == expect);
			expect++;
			return true;
		});
		if (rng() % 16 == 0)
			std::this_thread::sleep_for(
				std::chrono::microseconds(rng() % 20));
	}
	producer.join();
	CHECK(expect == kTotal);
}
