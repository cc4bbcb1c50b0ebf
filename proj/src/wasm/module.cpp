// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/wasm/module.hpp"

#include <cstring>

#include "wasmbpf/errors.hpp"

namespace wasmbpf::wasm {

namespace {

[[noreturn]] void bad(const std::string &msg)
{
	raise(Errc::ModuleInvalid, msg);
}

struct Cursor {
	std::span<const uint8_t> buf;
	size_t pos = 0;

	bool done() const
	{
		return pos >= buf.size();
	}
	uint8_t u8()
	{
		if (pos >= buf.size())
			bad("unexpected end of module");
		return buf[pos++];
	}
	uint32_t u32_leb()
	{
		uint32_t result = 0;
		for (int shift = 0; shift < 35; shift += 7) {
			uint8_t byte = u8();
			result |= uint32_t(byte & 0x7f) << shift;
			if (!(byte & 0x80))
				return result;
		}
		bad("overlong u32 LEB");
	}
	int32_t s32_leb()
	{
		int64_t result = 0;
		int shift = 0;
		for (;;) {
			uint8_t byte = u8();
			result |= int64_t(byte & 0x7f) << shift;
			shift += 7;
			if (!(byte & 0x80)) {
				if (shift < 64 && (byte & 0x40))
					result |= -(int64_t(1) << shift);
				return int32_t(result);
			}
			if (shift >= 35)
				bad("overlong s32 LEB");
		}
	}
	int64_t s64_leb()
	{
		int64_t result = 0;
		int shift = 0;
		for (;;) {
			uint8_t byte = u8();
			result |= int64_t(byte & 0x7f) << shift;
			shift += 7;
			if (!(byte & 0x80)) {
				if (shift < 64 && (byte & 0x40))
					result |= -(int64_t(1) << shift);
				return result;
			}
			if (shift >= 70)
				bad("overlong s64 LEB");
		}
	}
	uint32_t f32_bits()
	{
		uint32_t v = 0;
		for (int i = 0; i < 4; i++)
			v |= uint32_t(u8()) << (8 * i);
		return v;
	}
	uint64_t f64_bits()
	{
		uint64_t v = 0;
		for (int i = 0; i < 8; i++)
			v |= uint64_t(u8()) << (8 * i);
		return v;
	}
	std::string name()
	{
		uint32_t len = u32_leb();
		if (pos + len > buf.size())
			bad("name extends past module end");
		std::string s(buf.begin() + pos, buf.begin() + pos + len);
		pos += len;
		return s;
	}
	std::span<const uint8_t> bytes(uint32_t len)
	{
		if (pos + len > buf.size())
			bad("bytes extend past module end");
		auto s = buf.subspan(pos, len);
		pos += len;
		return s;
	}
};

ValType valtype(uint8_t byte)
{
	switch (byte) {
	case 0x7f:
		return ValType::i32;
	case 0x7e:
		return ValType::i64;
	case 0x7d:
		return ValType::f32;
	case 0x7c:
		return ValType::f64;
	default:
		bad("unsupported value type 0x" + std::to_string(byte));
	}
}

Limits limits(Cursor &c)
{
	Limits l;
	uint8_t flags = c.u8();
	l.min = c.u32_leb();
	if (flags & 1)
		l.max = c.u32_leb();
	else if (flags > 1)
		bad("unsupported limits flags");
	return l;
}

// wasm opcodes used by the decoder
enum : uint16_t {
	opUnreachable = 0x00,
	opNop = 0x01,
	opBlock = 0x02,
	opLoop = 0x03,
	opIf = 0x04,
	opElse = 0x05,
	opEnd = 0x0b,
	opBr = 0x0c,
	opBrIf = 0x0d,
	opBrTable = 0x0e,
	opReturn = 0x0f,
	opCall = 0x10,
	opCallIndirect = 0x11,
	opDrop = 0x1a,
	opSelect = 0x1b,
	opLocalGet = 0x20,
	opLocalSet = 0x21,
	opLocalTee = 0x22,
	opGlobalGet = 0x23,
	opGlobalSet = 0x24,
	opI32Const = 0x41,
	opI64Const = 0x42,
	opF32Const = 0x43,
	opF64Const = 0x44,
	opMemorySize = 0x3f,
	opMemoryGrow = 0x40,
};

// expression decoding shared by function bodies and (restricted) init exprs
struct BodyDecoder {
	Cursor &c;
	const Module &mod;
	Code &out;

	struct Pending {
		uint16_t op;	      // opBlock / opLoop / opIf / 0 = func
		uint32_t instr_index; // of the block/loop/if instruction
		uint32_t else_index = UINT32_MAX;
	};
	std::vector<Pending> stack;

	void emit(uint16_t op, uint32_t a = 0, uint64_t b = 0)
	{
		out.body.push_back({op, a, b});
	}

	uint32_t block_arity(int64_t bt)
	{
		if (bt == -64) // 0x40 empty
			return 0;
		if (bt < 0) {
			valtype(uint8_t(bt & 0x7f));
			return 1;
		}
		bad("multi-value block types are not supported");
	}

	void decode()
	{
		stack.push_back({0, 0});
		while (!stack.empty()) {
			uint16_t op = c.u8();
			switch (op) {
			case opBlock:
			case opLoop:
			case opIf: {
				uint32_t arity =
					block_arity(c.s32_leb());
				stack.push_back(
					{op, uint32_t(out.body.size())});
				emit(op, arity, 0);
				break;
			}
			case opElse: {
				if (stack.empty() || stack.back().op != opIf)
					bad("else outside if");
				stack.back().else_index =
					uint32_t(out.body.size());
				emit(op, 0, 0);
				break;
			}
			case opEnd: {
				Pending p = stack.back();
				stack.pop_back();
				uint32_t end_index =
					uint32_t(out.body.size());
				emit(op, 0, 0);
				if (p.op == opBlock || p.op == opIf) {
					out.body[p.instr_index].b = end_index;
					if (p.op == opIf) {
						// false target: after else,
						// or the end itself
						out.body[p.instr_index].a |=
							(p.else_index !=
									 UINT32_MAX
								 ? (p.else_index +
								    1)
								 : end_index)
							<< 1;
						if (p.else_index != UINT32_MAX)
							out.body[p.else_index]
								.b = end_index;
					}
				}
				// loop needs no patch: br jumps to its start
				break;
			}
			case opBr:
			case opBrIf:
				emit(op, c.u32_leb(), 0);
				break;
			case opBrTable: {
				BrTableData t;
				uint32_t n = c.u32_leb();
				for (uint32_t i = 0; i < n; i++)
					t.depths.push_back(c.u32_leb());
				t.default_depth = c.u32_leb();
				emit(op, 0, out.br_tables.size());
				out.br_tables.push_back(std::move(t));
				break;
			}
			case opReturn:
			case opUnreachable:
			case opNop:
			case opDrop:
			case opSelect:
				emit(op);
				break;
			case opCall: {
				uint32_t idx = c.u32_leb();
				if (idx >= mod.total_funcs())
					bad("call of unknown function");
				emit(op, idx, 0);
				break;
			}
			case opCallIndirect: {
				uint32_t type_idx = c.u32_leb();
				uint32_t table_idx = c.u32_leb();
				if (type_idx >= mod.types.size())
					bad("call_indirect to unknown type");
				if (table_idx != 0)
					bad("multiple tables not supported");
				emit(op, type_idx, 0);
				break;
			}
			case opLocalGet:
			case opLocalSet:
			case opLocalTee: {
				uint32_t idx = c.u32_leb();
				if (idx >= out.num_params + out.num_locals)
					bad("local index out of range");
				emit(op, idx, 0);
				break;
			}
			case opGlobalGet:
			case opGlobalSet: {
				uint32_t idx = c.u32_leb();
				if (idx >= mod.globals.size())
					bad("global index out of range");
				emit(op, idx, 0);
				break;
			}
			case opI32Const:
				emit(op, 0, uint64_t(uint32_t(c.s32_leb())));
				break;
			case opI64Const:
				emit(op, 0, uint64_t(c.s64_leb()));
				break;
			case opF32Const:
				emit(op, 0, c.f32_bits());
				break;
			case opF64Const:
				emit(op, 0, c.f64_bits());
				break;
			case opMemorySize:
			case opMemoryGrow:
				if (c.u8() != 0)
					bad("bad memory index");
				emit(op);
				break;
			case 0xfc: {
				uint32_t sub = c.u32_leb();
				switch (sub) {
				case 0:
				case 1:
				case 2:
				case 3:
				case 4:
				case 5:
				case 6:
				case 7: // saturating truncations
					emit(kFcOpBase + uint16_t(sub));
					break;
				case 10: // memory.copy
					if (c.u8() != 0 || c.u8() != 0)
						bad("bad memory index");
					emit(kFcOpBase + 10);
					break;
				case 11: // memory.fill
					if (c.u8() != 0)
						bad("bad memory index");
					emit(kFcOpBase + 11);
					break;
				default:
					bad("unsupported 0xFC opcode " +
					    std::to_string(sub));
				}
				break;
			}
			default: {
				if (op >= 0x28 && op <= 0x3e) {
					// memory access: align, offset
					uint32_t align = c.u32_leb();
					uint64_t offset = c.u32_leb();
					emit(op, align, offset);
					break;
				}
				if ((op >= 0x45 && op <= 0xbf) ||
				    (op >= 0xc0 && op <= 0xc4)) {
					emit(op); // numeric, no immediates
					break;
				}
				bad("unsupported opcode 0x" +
				    std::to_string(op));
			}
			}
		}
	}
};

} // namespace

const char *valtype_name(ValType t)
{
	switch (t) {
	case ValType::i32:
		return "i32";
	case ValType::i64:
		return "i64";
	case ValType::f32:
		return "f32";
	case ValType::f64:
		return "f64";
	}
	return "?";
}

const FuncType &Module::func_type(uint32_t func_index) const
{
	if (func_index < num_imported_funcs)
		return types.at(imports.at(func_index).type_index);
	return types.at(
		func_type_indices.at(func_index - num_imported_funcs));
}

const ExportEntry *Module::find_export(std::string_view name,
				       ImportKind kind) const
{
	for (const ExportEntry &e : exports)
		if (e.kind == kind && e.name == name)
			return &e;
	return nullptr;
}

Module decode_module(std::span<const uint8_t> bytes)
{
	Cursor c{bytes};
	if (bytes.size() < 8 || bytes[0] != 0x00 || bytes[1] != 0x61 ||
	    bytes[2] != 0x73 || bytes[3] != 0x6d)
		bad("missing \\0asm magic");
	c.pos = 4;
	if (c.f32_bits() != 1)
		bad("unsupported wasm version");

	Module mod;
	std::vector<std::pair<uint32_t, std::span<const uint8_t>>> code_bodies;

	int last_section = 0;
	while (!c.done()) {
		uint8_t id = c.u8();
		uint32_t size = c.u32_leb();
		auto content = c.bytes(size);
		if (id != 0) {
			if (id <= last_section)
				bad("section " + std::to_string(id) +
				    " out of order");
			last_section = id;
		}
		Cursor sc{content};
		switch (id) {
		case 0: // custom, skipped
			break;
		case 1: { // types
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				if (sc.u8() != 0x60)
					bad("bad functype tag");
				FuncType ft;
				uint32_t np = sc.u32_leb();
				for (uint32_t j = 0; j < np; j++)
					ft.params.push_back(valtype(sc.u8()));
				uint32_t nr = sc.u32_leb();
				if (nr > 1)
					bad("multiple results not supported");
				for (uint32_t j = 0; j < nr; j++)
					ft.results.push_back(valtype(sc.u8()));
				mod.types.push_back(std::move(ft));
			}
			break;
		}
		case 2: { // imports
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				Import imp;
				imp.module = sc.name();
				imp.name = sc.name();
				uint8_t kind = sc.u8();
				switch (kind) {
				case 0:
					imp.kind = ImportKind::func;
					imp.type_index = sc.u32_leb();
					if (imp.type_index >= mod.types.size())
						bad("import type out of range");
					mod.imports.push_back(std::move(imp));
					mod.num_imported_funcs++;
					break;
				default:
					raise(Errc::MissingImport,
					      "unsupported non-function "
					      "import " +
						      imp.module + "." +
						      imp.name);
				}
			}
			break;
		}
		case 3: { // functions
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				uint32_t ti = sc.u32_leb();
				if (ti >= mod.types.size())
					bad("function type out of range");
				mod.func_type_indices.push_back(ti);
			}
			break;
		}
		case 4: { // tables
			uint32_t n = sc.u32_leb();
			if (n > 1)
				bad("multiple tables not supported");
			for (uint32_t i = 0; i < n; i++) {
				if (sc.u8() != 0x70)
					bad("only funcref tables supported");
				mod.table = limits(sc);
			}
			break;
		}
		case 5: { // memories
			uint32_t n = sc.u32_leb();
			if (n > 1)
				bad("multiple memories not supported");
			for (uint32_t i = 0; i < n; i++)
				mod.memory = limits(sc);
			break;
		}
		case 6: { // globals
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				GlobalDef g;
				g.type = valtype(sc.u8());
				g.mutable_ = sc.u8() == 1;
				uint8_t op = sc.u8();
				switch (op) {
				case opI32Const:
					g.init_bits =
						uint64_t(uint32_t(sc.s32_leb()));
					break;
				case opI64Const:
					g.init_bits = uint64_t(sc.s64_leb());
					break;
				case opF32Const:
					g.init_bits = sc.f32_bits();
					break;
				case opF64Const:
					g.init_bits = sc.f64_bits();
					break;
				default:
					bad("unsupported global initializer");
				}
				if (sc.u8() != opEnd)
					bad("global initializer not "
					    "terminated");
				mod.globals.push_back(g);
			}
			break;
		}
		case 7: { // exports
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				ExportEntry e;
				e.name = sc.name();
				uint8_t kind = sc.u8();
				if (kind > 3)
					bad("bad export kind");
				e.kind = ImportKind(kind);
				e.index = sc.u32_leb();
				mod.exports.push_back(std::move(e));
			}
			break;
		}
		case 8: // start
			mod.start = sc.u32_leb();
			break;
		case 9: { // elements
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				uint32_t flags = sc.u32_leb();
				if (flags != 0)
					bad("only active table-0 element "
					    "segments supported");
				if (sc.u8() != opI32Const)
					bad("element offset must be a "
					    "constant");
				ElemSegment seg;
				seg.offset = uint32_t(sc.s32_leb());
				if (sc.u8() != opEnd)
					bad("element offset not terminated");
				uint32_t count = sc.u32_leb();
				for (uint32_t j = 0; j < count; j++)
					seg.func_indices.push_back(
						sc.u32_leb());
				mod.elems.push_back(std::move(seg));
			}
			break;
		}
		case 10: { // code
			uint32_t n = sc.u32_leb();
			if (n != mod.func_type_indices.size())
				bad("code count != function count");
			for (uint32_t i = 0; i < n; i++) {
				uint32_t body_size = sc.u32_leb();
				code_bodies.emplace_back(
					i, sc.bytes(body_size));
			}
			break;
		}
		case 11: { // data
			uint32_t n = sc.u32_leb();
			for (uint32_t i = 0; i < n; i++) {
				uint32_t flags = sc.u32_leb();
				if (flags != 0)
					bad("only active memory-0 data "
					    "segments supported");
				if (sc.u8() != opI32Const)
					bad("data offset must be a constant");
				DataSegment seg;
				seg.offset = uint32_t(sc.s32_leb());
				if (sc.u8() != opEnd)
					bad("data offset not terminated");
				uint32_t len = sc.u32_leb();
				auto b = sc.bytes(len);
				seg.bytes.assign(b.begin(), b.end());
				mod.datas.push_back(std::move(seg));
			}
			break;
		}
		default:
			bad("unknown section id " + std::to_string(id));
		}
	}

	// decode function bodies once the full index space is known
	for (auto &[index, body] : code_bodies) {
		Cursor bc{body};
		Code code;
		const FuncType &ft =
			mod.types.at(mod.func_type_indices.at(index));
		code.num_params = uint32_t(ft.params.size());
		code.result_arity = uint32_t(ft.results.size());
		uint32_t groups = bc.u32_leb();
		for (uint32_t g = 0; g < groups; g++) {
			uint32_t count = bc.u32_leb();
			valtype(bc.u8());
			code.num_locals += count;
			if (code.num_locals > 1u << 20)
				bad("too many locals");
		}
		BodyDecoder bd{bc, mod, code};
		bd.decode();
		mod.codes.push_back(std::move(code));
	}
	return mod;
}

} // namespace wasmbpf::wasm
