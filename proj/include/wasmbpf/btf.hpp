// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wasmbpf/insn.hpp"

namespace wasmbpf {

enum class BtfKind : uint8_t {
	Void = 0,
	Int = 1,
	Ptr = 2,
	Array = 3,
	Struct = 4,
	Union = 5,
	Enum = 6,
	Fwd = 7,
	Typedef = 8,
	Volatile = 9,
	Const = 10,
	Restrict = 11,
	Func = 12,
	FuncProto = 13,
	Var = 14,
	DataSec = 15,
	Float = 16,
	DeclTag = 17,
	TypeTag = 18,
	Enum64 = 19,
};

const char *btf_kind_name(BtfKind kind);

struct BtfMember {
	std::string name;
	uint32_t type_id = 0;
	uint32_t bit_offset = 0;
	uint32_t bitfield_size = 0; // 0 = plain member
};

struct BtfVarSecInfo {
	uint32_t type_id = 0;
	uint32_t offset = 0;
	uint32_t size = 0;
};

struct BtfType {
	BtfKind kind = BtfKind::Void;
	std::string name;
	uint32_t size = 0;     // INT/STRUCT/UNION/ENUM/FLOAT/DATASEC
	uint32_t ref_type = 0; // PTR/TYPEDEF/CONST/... referenced type id
	uint32_t kind_flag = 0;
	// INT
	uint32_t int_bits = 0;
	bool int_signed = false;
	// ARRAY
	uint32_t array_elem_type = 0;
	uint32_t array_nelems = 0;
	// STRUCT / UNION
	std::vector<BtfMember> members;
	// DATASEC
	std::vector<BtfVarSecInfo> vars;
	// ENUM
	std::vector<std::pair<std::string, int64_t>> enum_values;
	// FUNC_PROTO
	std::vector<uint32_t> proto_params;
};

/// Indexed BTF type table. Id 0 is void; real types start at 1.
class BtfTypeGraph {
    public:
	BtfTypeGraph();

	const BtfType &type(uint32_t id) const;
	uint32_t type_count() const
	{
		return static_cast<uint32_t>(types_.size() - 1);
	}

	std::optional<uint32_t> find_by_name(BtfKind kind,
					     std::string_view name) const;

	/// Peels TYPEDEF/CONST/VOLATILE/RESTRICT/TYPE_TAG wrappers.
	uint32_t resolve(uint32_t id) const;

	/// Byte size of a type; throws UnsizedType for void/func/fwd.
	uint64_t type_size(uint32_t id) const;
	/// Natural alignment of a type.
	uint64_t type_align(uint32_t id) const;

	uint32_t add_type(BtfType t); // returns new id (test/builder use)

    private:
	friend BtfTypeGraph parse_btf(std::span<const uint8_t>);
	std::vector<BtfType> types_; // [0] = void
};

BtfTypeGraph parse_btf(std::span<const uint8_t> blob);

/// Walks a member/array access path and returns the byte offset.
/// `access` elements index struct/union members or array elements in turn;
/// bitfield members are rejected.
uint64_t field_byte_offset(const BtfTypeGraph &graph, uint32_t type_id,
			   std::span<const uint32_t> access);

struct LayoutField {
	std::string name;
	uint64_t offset = 0;
	uint64_t size = 0;
};

struct LayoutReport {
	uint32_t type_id = 0;
	uint64_t total_size = 0;
	std::vector<LayoutField> fields;
	bool wasm_safe = false;
	std::vector<std::string> violations;
};

/// Checks that a type can be shared with a 32-bit Wasm guest by direct copy:
/// no pointers anywhere, no bitfields, and a layout that is identical under
/// 32-bit and 64-bit C rules.
LayoutReport validate_shared_layout(const BtfTypeGraph &graph,
				    uint32_t type_id, uint32_t wasm_ptr_width);

std::string format_layout_report(const LayoutReport &report);

} // namespace wasmbpf
