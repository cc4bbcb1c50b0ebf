// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wasmbpf::wasm {

enum class ValType : uint8_t {
	i32 = 0x7f,
	i64 = 0x7e,
	f32 = 0x7d,
	f64 = 0x7c,
};

const char *valtype_name(ValType t);

struct FuncType {
	std::vector<ValType> params;
	std::vector<ValType> results;
	bool operator==(const FuncType &) const = default;
};

enum class ImportKind : uint8_t { func = 0, table = 1, memory = 2, global = 3 };

struct Import {
	std::string module;
	std::string name;
	ImportKind kind = ImportKind::func;
	uint32_t type_index = 0; // functions only
};

// Pre-decoded instruction. Operand meaning depends on the opcode:
// branches carry resolved instruction indices, memory ops their static
// offset, consts their raw bits.
struct WInstr {
	uint16_t op = 0;
	uint32_t a = 0;
	uint64_t b = 0;
};

struct BrTableData {
	std::vector<uint32_t> depths;
	uint32_t default_depth = 0;
};

struct Code {
	uint32_t num_params = 0;
	uint32_t num_locals = 0; // excluding params
	uint32_t result_arity = 0;
	std::vector<WInstr> body;
	std::vector<BrTableData> br_tables;
};

struct Limits {
	uint32_t min = 0;
	std::optional<uint32_t> max;
};

struct GlobalDef {
	ValType type = ValType::i32;
	bool mutable_ = false;
	uint64_t init_bits = 0;
};

struct ExportEntry {
	std::string name;
	ImportKind kind = ImportKind::func;
	uint32_t index = 0;
};

struct ElemSegment {
	uint32_t offset = 0;
	std::vector<uint32_t> func_indices;
};

struct DataSegment {
	uint32_t offset = 0;
	std::vector<uint8_t> bytes;
};

struct Module {
	std::vector<FuncType> types;
	std::vector<Import> imports; // function imports only survive decode
	std::vector<uint32_t> func_type_indices; // defined functions
	std::vector<Code> codes;
	std::optional<Limits> memory;
	std::optional<Limits> table;
	std::vector<GlobalDef> globals;
	std::vector<ExportEntry> exports;
	std::optional<uint32_t> start;
	std::vector<ElemSegment> elems;
	std::vector<DataSegment> datas;

	uint32_t num_imported_funcs = 0;
	uint32_t total_funcs() const
	{
		return num_imported_funcs + uint32_t(codes.size());
	}
	const FuncType &func_type(uint32_t func_index) const;
	const ExportEntry *find_export(std::string_view name,
				       ImportKind kind) const;
};

/// Decodes a binary Wasm module (MVP feature set plus sign-extension and
/// saturating-truncation/bulk-memory ops). Throws ModuleInvalid.
Module decode_module(std::span<const uint8_t> bytes);

// Internal opcode numbers for 0xFC-prefixed instructions: 0x100 + subop.
constexpr uint16_t kFcOpBase = 0x100;

} // namespace wasmbpf::wasm
