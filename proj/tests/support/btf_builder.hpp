// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "wasmbpf/btf.hpp"

namespace testsupport {

/// Raw BTF blob writer for parse_btf tests; writes the binary format
/// directly, sharing nothing with the parser.
class BtfBlobBuilder {
    public:
	BtfBlobBuilder()
	{
		strings_.push_back(0); // offset 0 = empty string
	}

	uint32_t str(const std::string &s)
	{
		if (s.empty())
			return 0;
		uint32_t off = uint32_t(strings_.size());
		strings_.insert(strings_.end(), s.begin(), s.end());
		strings_.push_back(0);
		return off;
	}

	// returns the 1-based type id
	uint32_t add_int(const std::string &name, uint32_t size, bool sign)
	{
		header(str(name), 1 /*INT*/, 0, size);
		push32((sign ? 1u << 24 : 0) | (size * 8));
		return ++count_;
	}

	uint32_t add_ptr(uint32_t ref)
	{
		header(0, 2 /*PTR*/, 0, ref);
		return ++count_;
	}

	uint32_t add_array(uint32_t elem, uint32_t index_type, uint32_t n)
	{
		header(0, 3 /*ARRAY*/, 0, 0);
		push32(elem);
		push32(index_type);
		push32(n);
		return ++count_;
	}

	struct Member {
		std::string name;
		uint32_t type;
		uint32_t bit_offset;
	};

	uint32_t add_struct(const std::string &name, uint32_t size,
			    const std::vector<Member> &members)
	{
		header(str(name), 4 /*STRUCT*/, uint32_t(members.size()),
		       size);
		for (const Member &m : members) {
			push32(str(m.name));
			push32(m.type);
			push32(m.bit_offset);
		}
		return ++count_;
	}

	uint32_t add_typedef(const std::string &name, uint32_t ref)
	{
		header(str(name), 8 /*TYPEDEF*/, 0, ref);
		return ++count_;
	}

	uint32_t add_var(const std::string &name, uint32_t ref)
	{
		header(str(name), 14 /*VAR*/, 0, ref);
		push32(0); // linkage
		return ++count_;
	}

	uint32_t add_datasec(const std::string &name,
			     const std::vector<std::array<uint32_t, 3>> &vars)
	{
		header(str(name), 15 /*DATASEC*/, uint32_t(vars.size()), 0);
		for (const auto &v : vars) {
			push32(v[0]);
			push32(v[1]);
			push32(v[2]);
		}
		return ++count_;
	}

	std::vector<uint8_t> build() const
	{
		std::vector<uint8_t> out;
		auto push = [&](uint32_t v) {
			for (int i = 0; i < 4; i++)
				out.push_back(uint8_t(v >> (8 * i)));
		};
		out.push_back(0x9f); // magic, little-endian
		out.push_back(0xeb);
		out.push_back(1); // version
		out.push_back(0); // flags
		push(24);	  // hdr_len
		push(0);	  // type_off
		push(uint32_t(types_.size()));
		push(uint32_t(types_.size())); // str_off
		push(uint32_t(strings_.size()));
		out.insert(out.end(), types_.begin(), types_.end());
		out.insert(out.end(), strings_.begin(), strings_.end());
		return out;
	}

	uint32_t count() const
	{
		return count_;
	}

    private:
	void header(uint32_t name_off, uint32_t kind, uint32_t vlen,
		    uint32_t size_or_type)
	{
		push32(name_off);
		push32((kind << 24) | (vlen & 0xffff));
		push32(size_or_type);
	}
	void push32(uint32_t v)
	{
		for (int i = 0; i < 4; i++)
			types_.push_back(uint8_t(v >> (8 * i)));
	}

	std::vector<uint8_t> types_;
	std::vector<uint8_t> strings_;
	uint32_t count_ = 0;
};

/// In-memory BtfTypeGraph builder for relocation/layout tests.
class GraphBuilder {
    public:
	wasmbpf::BtfTypeGraph graph;

	uint32_t int_type(const std::string &name, uint32_t size)
	{
		wasmbpf::BtfType t;
		t.kind = wasmbpf::BtfKind::Int;
		t.name = name;
		t.size = size;
		t.int_bits = size * 8;
		return graph.add_type(std::move(t));
	}

	uint32_t ptr(uint32_t ref)
	{
		wasmbpf::BtfType t;
		t.kind = wasmbpf::BtfKind::Ptr;
		t.ref_type = ref;
		return graph.add_type(std::move(t));
	}

	uint32_t array(uint32_t elem, uint32_t n)
	{
		wasmbpf::BtfType t;
		t.kind = wasmbpf::BtfKind::Array;
		t.array_elem_type = elem;
		t.array_nelems = n;
		return graph.add_type(std::move(t));
	}

	struct M {
		std::string name;
		uint32_t type;
		uint32_t byte_offset;
	};

	uint32_t struct_type(const std::string &name, uint32_t size,
			     const std::vector<M> &members)
	{
		wasmbpf::BtfType t;
		t.kind = wasmbpf::BtfKind::Struct;
		t.name = name;
		t.size = size;
		for (const M &m : members)
			t.members.push_back(
				{m.name, m.type, m.byte_offset * 8, 0});
		return graph.add_type(std::move(t));
	}

	uint32_t union_type(const std::string &name, uint32_t size,
			    const std::vector<M> &members)
	{
		wasmbpf::BtfType t;
		t.kind = wasmbpf::BtfKind::Union;
		t.name = name;
		t.size = size;
		for (const M &m : members)
			t.members.push_back(
				{m.name, m.type, m.byte_offset * 8, 0});
		return graph.add_type(std::move(t));
	}
};

} // namespace testsupport
