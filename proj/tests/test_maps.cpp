// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "wasmbpf/errors.hpp"
#include "wasmbpf/maps.hpp"

using namespace wasmbpf;

namespace {

MapDef hash_def(uint32_t max = 16)
{
	MapDef d;
	d.name = "h";
	d.type = MapType::hash;
	d.key_size = 4;
	d.value_size = 8;
	d.max_entries = max;
	return d;
}

std::vector<uint8_t> key_of(uint32_t k)
{
	std::vector<uint8_t> v(4);
	std::memcpy(v.data(), &k, 4);
	return v;
}

std::vector<uint8_t> value_of(uint64_t x)
{
	std::vector<uint8_t> v(8);
	std::memcpy(v.data(), &x, 8);
	return v;
}

} // namespace

TEST_CASE("lookup on an empty hash map is not_found")
{
	MapStore m(1, hash_def());
	std::vector<uint8_t> out(8);
	CHECK(m.lookup(key_of(1), out) == MapStatus::not_found);
}

TEST_CASE("update then lookup roundtrips byte-exactly")
{
	MapStore m(1, hash_def());
	auto k = key_of(0xdeadbeef);
	auto v = value_of(0x0123456789abcdefull);
	CHECK(m.update(k, v, mapflags::kAny) == MapStatus::ok);
	std::vector<uint8_t> out(8);
	CHECK(m.lookup(k, out) == MapStatus::ok);
	CHECK(out == v);
}

TEST_CASE("get_next_key enumerates exactly the inserted keys")
{
	MapStore m(1, hash_def(128));
	std::set<uint32_t> inserted;
	std::mt19937 rng(3);
	while (inserted.size() < 100) {
		uint32_t k = rng();
		if (!inserted.insert(k).second)
			continue;
		CHECK(m.update(key_of(k), value_of(k), 0) == MapStatus::ok);
	}

	std::set<uint32_t> seen;
	std::vector<uint8_t> key;
	std::vector<uint8_t> next(4);
	while (m.get_next_key(key, next) == MapStatus::ok) {
		uint32_t k;
		std::memcpy(&k, next.data(), 4);
		CHECK(seen.insert(k).second); // no duplicates
		key = next;
	}
	CHECK(seen == inserted);
}

TEST_CASE("hash iteration order is stable insertion order")
{
	MapStore m(1, hash_def());
	for (uint32_t k : {7u, 3u, 9u})
		m.update(key_of(k), value_of(k), 0);
	std::vector<uint32_t> order;
	std::vector<uint8_t> key;
	std::vector<uint8_t> next(4);
	while (m.get_next_key(key, next) == MapStatus::ok) {
		uint32_t k;
		std::memcpy(&k, next.data(), 4);
		order.push_back(k);
		key = next;
	}
	CHECK(order == std::vector<uint32_t>{7, 3, 9});
}

TEST_CASE("update flags follow the syscall semantics")
{
	MapStore m(1, hash_def());
	auto k = key_of(1);
	CHECK(m.update(k, value_of(1), mapflags::kExist) ==
	      MapStatus::not_found);
	CHECK(m.update(k, value_of(1), mapflags::kNoExist) == MapStatus::ok);
	CHECK(m.update(k, value_of(2), mapflags::kNoExist) ==
	      MapStatus::already_exists);
	CHECK(m.update(k, value_of(3), mapflags::kExist) == MapStatus::ok);
	std::vector<uint8_t> out(8);
	CHECK(m.lookup(k, out) == MapStatus::ok);
	CHECK(out == value_of(3));
}

TEST_CASE("hash map capacity is enforced")
{
	MapStore m(1, hash_def(4));
	for (uint32_t k = 0; k < 4; k++)
		CHECK(m.update(key_of(k), value_of(k), 0) == MapStatus::ok);
	CHECK(m.update(key_of(99), value_of(99), 0) ==
	      MapStatus::capacity_exceeded);
	// replacing an existing key still works at capacity
	CHECK(m.update(key_of(2), value_of(22), 0) == MapStatus::ok);
}

TEST_CASE("array maps bound-check indices and reject delete")
{
	MapDef d;
	d.name = "a";
	d.type = MapType::array;
	d.key_size = 4;
	d.value_size = 8;
	d.max_entries = 4;
	MapStore m(1, d);

	std::vector<uint8_t> out(8);
	// slots exist from the start, zero-filled
	CHECK(m.lookup(key_of(0), out) == MapStatus::ok);
	CHECK(out == value_of(0));
	CHECK(m.update(key_of(3), value_of(33), 0) == MapStatus::ok);
	CHECK(m.lookup(key_of(3), out) == MapStatus::ok);
	CHECK(out == value_of(33));
	CHECK(m.update(key_of(4), value_of(4), 0) ==
	      MapStatus::index_out_of_range);
	CHECK(m.lookup(key_of(4), out) == MapStatus::index_out_of_range);
	CHECK(m.erase(key_of(0)) == MapStatus::bad_argument);

	// get_next_key walks 0..max-1
	std::vector<uint8_t> key;
	std::vector<uint8_t> next(4);
	std::vector<uint32_t> keys;
	while (m.get_next_key(key, next) == MapStatus::ok) {
		uint32_t k;
		std::memcpy(&k, next.data(), 4);
		keys.push_back(k);
		key = next;
	}
	CHECK(keys == std::vector<uint32_t>{0, 1, 2, 3});
}

TEST_CASE("perf_event_array creation is Unsupported")
{
	MapDef d;
	d.name = "pe";
	d.type = MapType::perf_event_array;
	d.key_size = 4;
	d.value_size = 4;
	d.max_entries = 8;
	try {
		MapStore m(1, d);
		FAIL("expected UnsupportedMapType");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::UnsupportedMapType);
	}
}

TEST_CASE("hash map agrees with a reference model over random ops")
{
	MapStore m(1, hash_def(64));
	std::map<uint32_t, uint64_t> model;
	std::mt19937 rng(17);

	for (int step = 0; step < 5000; step++) {
		uint32_t k = rng() % 96;
		uint64_t v = rng();
		switch (rng() % 4) {
		case 0: { // update any
			MapStatus st = m.update(key_of(k), value_of(v), 0);
			if (model.count(k) || model.size() < 64) {
				CHECK(st == MapStatus::ok);
				model[k] = v;
			} else {
				CHECK(st == MapStatus::capacity_exceeded);
			}
			break;
		}
		case 1: { // lookup
			std::vector<uint8_t> out(8);
			MapStatus st = m.lookup(key_of(k), out);
			auto it = model.find(k);
			if (it == model.end()) {
				CHECK(st == MapStatus::not_found);
			} else {
				CHECK(st == MapStatus::ok);
				CHECK(out == value_of(it->second));
			}
			break;
		}
		case 2: { // delete
			MapStatus st = m.erase(key_of(k));
			CHECK(st == (model.erase(k) ? MapStatus::ok
						    : MapStatus::not_found));
			break;
		}
		case 3: { // full enumeration
			std::set<uint32_t> seen;
			std::vector<uint8_t> key;
			std::vector<uint8_t> next(4);
			while (m.get_next_key(key, next) == MapStatus::ok) {
				uint32_t kk;
				std::memcpy(&kk, next.data(), 4);
				seen.insert(kk);
				key = next;
			}
			std::set<uint32_t> expect;
			for (auto &[mk, mv] : model)
				expect.insert(mk);
			CHECK(seen == expect);
			break;
		}
		}
	}
}

TEST_CASE("registry handles are positive, increasing, never reused")
{
	MapRegistry reg;
	auto a = reg.create(hash_def());
	auto b = reg.create(hash_def());
	CHECK(a->handle() > 0);
	CHECK(b->handle() > a->handle());
	reg.destroy(a->handle());
	CHECK(reg.get(a->handle()) == nullptr);
	auto c = reg.create(hash_def());
	CHECK(c->handle() > b->handle());
}
