// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/wasm/interp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "wasmbpf/errors.hpp"

namespace wasmbpf::wasm {

namespace {

[[noreturn]] void wtrap(const std::string &msg)
{
	raise(Errc::GuestTrap, msg);
}

template <typename F> F wasm_min(F a, F b)
{
	if (std::isnan(a) || std::isnan(b))
		return std::numeric_limits<F>::quiet_NaN();
	if (a == b)
		return std::signbit(a) ? a : b;
	return a < b ? a : b;
}

template <typename F> F wasm_max(F a, F b)
{
	if (std::isnan(a) || std::isnan(b))
		return std::numeric_limits<F>::quiet_NaN();
	if (a == b)
		return std::signbit(a) ? b : a;
	return a > b ? a : b;
}

template <typename To> To trunc_checked(double x, const char *what)
{
	if (std::isnan(x))
		wtrap(std::string("invalid conversion to integer in ") + what);
	double t = std::trunc(x);
	if constexpr (std::is_signed_v<To>) {
		// the bound is a power of two, exactly representable
		double max_plus_1 = std::ldexp(1.0, sizeof(To) * 8 - 1);
		if (t < -max_plus_1 || t >= max_plus_1)
			wtrap(std::string("integer overflow in ") + what);
	} else {
		double max_plus_1 = std::ldexp(1.0, sizeof(To) * 8);
		if (t <= -1.0 || t >= max_plus_1)
			wtrap(std::string("integer overflow in ") + what);
	}
	return To(t);
}

template <typename To> To trunc_sat(double x)
{
	if (std::isnan(x))
		return 0;
	double t = std::trunc(x);
	if constexpr (std::is_signed_v<To>) {
		double max_plus_1 = std::ldexp(1.0, sizeof(To) * 8 - 1);
		if (t >= max_plus_1)
			return std::numeric_limits<To>::max();
		if (t < double(std::numeric_limits<To>::min()))
			return std::numeric_limits<To>::min();
	} else {
		double max_plus_1 = std::ldexp(1.0, sizeof(To) * 8);
		if (t >= max_plus_1)
			return std::numeric_limits<To>::max();
		if (t <= -1.0)
			return 0;
	}
	return To(t);
}

} // namespace

void ImportTable::add(const std::string &module, const std::string &name,
		      HostFunc fn)
{
	funcs_[{module, name}] = std::move(fn);
}

const HostFunc *ImportTable::find(const std::string &module,
				  const std::string &name) const
{
	auto it = funcs_.find({module, name});
	return it == funcs_.end() ? nullptr : &it->second;
}

Instance::Instance(const Module &mod, const ImportTable &imports) : mod_(mod)
{
	for (const Import &imp : mod.imports) {
		const HostFunc *host = imports.find(imp.module, imp.name);
		if (!host)
			raise(Errc::MissingImport,
			      "unresolved import " + imp.module + "." +
				      imp.name);
		if (!(host->type == mod.types.at(imp.type_index)))
			raise(Errc::MissingImport,
			      "signature mismatch for import " + imp.module +
				      "." + imp.name);
		host_funcs_.push_back(host);
	}

	if (mod.memory) {
		memory_pages_ = mod.memory->min;
		memory_max_pages_ = std::min(
			mod.memory->max.value_or(kMaxPages), kMaxPages);
		if (memory_pages_ > memory_max_pages_)
			raise(Errc::ModuleInvalid, "memory min above max");
		memory_.assign(size_t(memory_pages_) * kPageSize, 0);
	}

	for (const GlobalDef &g : mod.globals)
		globals_.push_back(g.init_bits);

	if (mod.table)
		table_.assign(mod.table->min, -1);
	for (const ElemSegment &seg : mod.elems) {
		if (uint64_t(seg.offset) + seg.func_indices.size() >
		    table_.size())
			raise(Errc::ModuleInvalid,
			      "element segment out of table bounds");
		for (size_t i = 0; i < seg.func_indices.size(); i++) {
			uint32_t fi = seg.func_indices[i];
			if (fi >= mod.total_funcs())
				raise(Errc::ModuleInvalid,
				      "element references unknown function");
			table_[seg.offset + i] = fi;
		}
	}

	for (const DataSegment &seg : mod.datas) {
		if (uint64_t(seg.offset) + seg.bytes.size() > memory_.size())
			raise(Errc::ModuleInvalid,
			      "data segment out of memory bounds");
		std::memcpy(memory_.data() + seg.offset, seg.bytes.data(),
			    seg.bytes.size());
	}

	vstack_.reserve(1 << 16);
	cstack_.reserve(256);

	if (mod.start)
		call_function(*mod.start, {});
}

std::span<uint8_t> Instance::mem_span(uint32_t ptr, uint32_t len)
{
	if (uint64_t(ptr) + len > memory_.size())
		wtrap("guest memory access out of bounds");
	return {memory_.data() + ptr, len};
}

std::string Instance::read_cstring(uint32_t ptr, uint32_t max_len)
{
	std::string out;
	for (uint32_t i = 0; i < max_len; i++) {
		if (uint64_t(ptr) + i >= memory_.size())
			wtrap("unterminated string in guest memory");
		char c = char(memory_[ptr + i]);
		if (c == '\0')
			return out;
		out.push_back(c);
	}
	wtrap("guest string exceeds maximum length");
}

uint32_t Instance::grow_memory(uint32_t delta_pages)
{
	uint64_t want = uint64_t(memory_pages_) + delta_pages;
	if (want > memory_max_pages_)
		return 0xffffffffu;
	uint32_t old = memory_pages_;
	memory_pages_ = uint32_t(want);
	memory_.resize(size_t(memory_pages_) * kPageSize, 0);
	return old;
}

bool Instance::has_export(std::string_view name) const
{
	return mod_.find_export(name, ImportKind::func) != nullptr;
}

uint64_t Instance::call_export(std::string_view name,
			       std::span<const uint64_t> args)
{
	const ExportEntry *e = mod_.find_export(name, ImportKind::func);
	if (!e)
		raise(Errc::ModuleInvalid,
		      "module does not export function '" + std::string(name) +
			      "'");
	return call_function(e->index, args);
}

uint64_t Instance::call_table(uint32_t table_index,
			      std::span<const uint64_t> args,
			      const FuncType &expected)
{
	if (table_index >= table_.size() || table_[table_index] < 0)
		raise(Errc::BadCallback,
		      "function table slot " + std::to_string(table_index) +
			      " is empty");
	uint32_t fi = uint32_t(table_[table_index]);
	if (!(mod_.func_type(fi) == expected))
		raise(Errc::BadCallback,
		      "function table slot " + std::to_string(table_index) +
			      " has the wrong signature");
	return call_function(fi, args);
}

struct Interp {
	Instance &in;

	uint64_t pop()
	{
		uint64_t v = in.vstack_.back();
		in.vstack_.pop_back();
		return v;
	}
	void push(uint64_t v)
	{
		in.vstack_.push_back(v);
	}
	uint32_t pop32()
	{
		return uint32_t(pop());
	}
	void push32(uint32_t v)
	{
		push(uint64_t(v));
	}
	float popf32()
	{
		return std::bit_cast<float>(pop32());
	}
	void pushf32(float v)
	{
		push32(std::bit_cast<uint32_t>(v));
	}
	double popf64()
	{
		return std::bit_cast<double>(pop());
	}
	void pushf64(double v)
	{
		push(std::bit_cast<uint64_t>(v));
	}

	template <typename T> T mem_load(uint64_t addr_base, uint64_t offset)
	{
		uint64_t addr = addr_base + offset;
		if (addr + sizeof(T) > in.memory_.size())
			wtrap("memory load out of bounds");
		T v;
		std::memcpy(&v, in.memory_.data() + addr, sizeof(T));
		return v;
	}
	template <typename T>
	void mem_store(uint64_t addr_base, uint64_t offset, T v)
	{
		uint64_t addr = addr_base + offset;
		if (addr + sizeof(T) > in.memory_.size())
			wtrap("memory store out of bounds");
		std::memcpy(in.memory_.data() + addr, &v, sizeof(T));
	}

	void invoke(uint32_t func_index)
	{
		if (func_index < in.mod_.num_imported_funcs) {
			const HostFunc *host = in.host_funcs_[func_index];
			size_t nargs = host->type.params.size();
			std::array<uint64_t, 16> args{};
			if (nargs > args.size())
				wtrap("host import takes too many arguments");
			for (size_t i = 0; i < nargs; i++)
				args[i] = in.vstack_[in.vstack_.size() -
						     nargs + i];
			in.vstack_.resize(in.vstack_.size() - nargs);
			std::array<uint64_t, 1> results{};
			host->fn(in, std::span(args.data(), nargs),
				 std::span(results.data(),
					   host->type.results.size()));
			if (!host->type.results.empty())
				push(results[0]);
			return;
		}
		run(func_index - in.mod_.num_imported_funcs);
	}

	// Executes one defined function; its arguments are the top stack
	// values and are consumed in place as locals.
	void run(uint32_t defined_index)
	{
		if (++in.call_depth_ > kMaxCallDepth) {
			in.call_depth_--;
			wtrap("call stack exhausted");
		}
		const Code &code = in.mod_.codes[defined_index];
		size_t locals_base = in.vstack_.size() - code.num_params;
		in.vstack_.resize(locals_base + code.num_params +
					  code.num_locals,
				  0);
		size_t ctrl_base = in.cstack_.size();

		const WInstr *body = code.body.data();
		size_t pc = 0;
		auto do_branch = [&](uint32_t depth) {
			size_t live = in.cstack_.size() - ctrl_base;
			if (depth >= live) {
				pc = code.body.size(); // function return
				return;
			}
			size_t frame_idx = in.cstack_.size() - 1 - depth;
			Instance::Ctrl &frame = in.cstack_[frame_idx];
			uint32_t carry = frame.is_loop ? 0 : frame.arity;
			uint64_t carried = carry ? in.vstack_.back() : 0;
			in.vstack_.resize(frame.vheight);
			if (carry)
				push(carried);
			if (frame.is_loop) {
				in.cstack_.resize(frame_idx + 1);
				pc = frame.target; // first body instruction
			} else {
				in.cstack_.resize(frame_idx + 1);
				pc = frame.target; // the End, which pops
			}
		};

		while (pc < code.body.size()) {
			const WInstr &x = body[pc];
			switch (x.op) {
			case 0x00:
				wtrap("unreachable executed");
			case 0x01: // nop
				pc++;
				break;
			case 0x02: // block
				in.cstack_.push_back(
					{uint32_t(x.b),
					 uint32_t(in.vstack_.size()), x.a,
					 false});
				pc++;
				break;
			case 0x03: // loop
				in.cstack_.push_back(
					{uint32_t(pc + 1),
					 uint32_t(in.vstack_.size()), x.a,
					 true});
				pc++;
				break;
			case 0x04: { // if
				uint32_t cond = pop32();
				in.cstack_.push_back(
					{uint32_t(x.b),
					 uint32_t(in.vstack_.size()),
					 x.a & 1, false});
				pc = cond ? pc + 1 : (x.a >> 1);
				break;
			}
			case 0x05: // else: then-branch done, jump to end
				pc = size_t(x.b);
				break;
			case 0x0b: // end
				if (in.cstack_.size() == ctrl_base) {
					pc = code.body.size();
					break;
				}
				in.cstack_.pop_back();
				pc++;
				break;
			case 0x0c: // br
				do_branch(x.a);
				break;
			case 0x0d: // br_if
				if (pop32())
					do_branch(x.a);
				else
					pc++;
				break;
			case 0x0e: { // br_table
				const BrTableData &t = code.br_tables[x.b];
				uint32_t i = pop32();
				do_branch(i < t.depths.size()
						  ? t.depths[i]
						  : t.default_depth);
				break;
			}
			case 0x0f: // return
				pc = code.body.size();
				break;
			case 0x10: // call
				invoke(x.a);
				pc++;
				break;
			case 0x11: { // call_indirect
				uint32_t idx = pop32();
				if (idx >= in.table_.size() ||
				    in.table_[idx] < 0)
					wtrap("undefined table element");
				uint32_t fi = uint32_t(in.table_[idx]);
				if (!(in.mod_.func_type(fi) ==
				      in.mod_.types[x.a]))
					wtrap("indirect call type mismatch");
				invoke(fi);
				pc++;
				break;
			}
			case 0x1a: // drop
				pop();
				pc++;
				break;
			case 0x1b: { // select
				uint32_t cond = pop32();
				uint64_t v2 = pop(), v1 = pop();
				push(cond ? v1 : v2);
				pc++;
				break;
			}
			case 0x20: // local.get
				push(in.vstack_[locals_base + x.a]);
				pc++;
				break;
			case 0x21: // local.set
				in.vstack_[locals_base + x.a] = pop();
				pc++;
				break;
			case 0x22: // local.tee
				in.vstack_[locals_base + x.a] =
					in.vstack_.back();
				pc++;
				break;
			case 0x23: // global.get
				push(in.globals_[x.a]);
				pc++;
				break;
			case 0x24: // global.set
				in.globals_[x.a] = pop();
				pc++;
				break;

			// memory loads
			case 0x28:
				push32(mem_load<uint32_t>(pop32(), x.b));
				pc++;
				break;
			case 0x29:
				push(mem_load<uint64_t>(pop32(), x.b));
				pc++;
				break;
			case 0x2a:
				push32(mem_load<uint32_t>(pop32(), x.b));
				pc++;
				break;
			case 0x2b:
				push(mem_load<uint64_t>(pop32(), x.b));
				pc++;
				break;
			case 0x2c:
				push32(uint32_t(int32_t(
					mem_load<int8_t>(pop32(), x.b))));
				pc++;
				break;
			case 0x2d:
				push32(mem_load<uint8_t>(pop32(), x.b));
				pc++;
				break;
			case 0x2e:
				push32(uint32_t(int32_t(
					mem_load<int16_t>(pop32(), x.b))));
				pc++;
				break;
			case 0x2f:
				push32(mem_load<uint16_t>(pop32(), x.b));
				pc++;
				break;
			case 0x30:
				push(uint64_t(int64_t(
					mem_load<int8_t>(pop32(), x.b))));
				pc++;
				break;
			case 0x31:
				push(mem_load<uint8_t>(pop32(), x.b));
				pc++;
				break;
			case 0x32:
				push(uint64_t(int64_t(
					mem_load<int16_t>(pop32(), x.b))));
				pc++;
				break;
			case 0x33:
				push(mem_load<uint16_t>(pop32(), x.b));
				pc++;
				break;
			case 0x34:
				push(uint64_t(int64_t(
					mem_load<int32_t>(pop32(), x.b))));
				pc++;
				break;
			case 0x35:
				push(mem_load<uint32_t>(pop32(), x.b));
				pc++;
				break;

			// memory stores
			case 0x36: {
				uint32_t v = pop32();
				mem_store<uint32_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x37: {
				uint64_t v = pop();
				mem_store<uint64_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x38: {
				uint32_t v = pop32();
				mem_store<uint32_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x39: {
				uint64_t v = pop();
				mem_store<uint64_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x3a: {
				uint8_t v = uint8_t(pop32());
				mem_store<uint8_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x3b: {
				uint16_t v = uint16_t(pop32());
				mem_store<uint16_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x3c: {
				uint8_t v = uint8_t(pop());
				mem_store<uint8_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x3d: {
				uint16_t v = uint16_t(pop());
				mem_store<uint16_t>(pop32(), x.b, v);
				pc++;
				break;
			}
			case 0x3e: {
				uint32_t v = uint32_t(pop());
				mem_store<uint32_t>(pop32(), x.b, v);
				pc++;
				break;
			}

			case 0x3f: // memory.size
				push32(in.memory_pages_);
				pc++;
				break;
			case 0x40: { // memory.grow
				uint32_t delta = pop32();
				push32(in.grow_memory(delta));
				pc++;
				break;
			}

			case 0x41: // i32.const
			case 0x42: // i64.const
			case 0x43: // f32.const
			case 0x44: // f64.const
				push(x.b);
				pc++;
				break;

			default:
				exec_numeric(x.op);
				pc++;
				break;
			}
		}

		// function return: carry results, drop locals
		uint64_t result =
			code.result_arity ? in.vstack_.back() : 0;
		in.vstack_.resize(locals_base);
		if (code.result_arity)
			push(result);
		in.cstack_.resize(ctrl_base);
		in.call_depth_--;
	}

	void exec_numeric(uint16_t op)
	{
		switch (op) {
		// i32 comparisons
		case 0x45:
			push32(pop32() == 0);
			break;
		case 0x46: {
			uint32_t b = pop32(), a = pop32();
			push32(a == b);
			break;
		}
		case 0x47: {
			uint32_t b = pop32(), a = pop32();
			push32(a != b);
			break;
		}
		case 0x48: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			push32(a < b);
			break;
		}
		case 0x49: {
			uint32_t b = pop32(), a = pop32();
			push32(a < b);
			break;
		}
		case 0x4a: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			push32(a > b);
			break;
		}
		case 0x4b: {
			uint32_t b = pop32(), a = pop32();
			push32(a > b);
			break;
		}
		case 0x4c: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			push32(a <= b);
			break;
		}
		case 0x4d: {
			uint32_t b = pop32(), a = pop32();
			push32(a <= b);
			break;
		}
		case 0x4e: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			push32(a >= b);
			break;
		}
		case 0x4f: {
			uint32_t b = pop32(), a = pop32();
			push32(a >= b);
			break;
		}
		// i64 comparisons
		case 0x50:
			push32(pop() == 0);
			break;
		case 0x51: {
			uint64_t b = pop(), a = pop();
			push32(a == b);
			break;
		}
		case 0x52: {
			uint64_t b = pop(), a = pop();
			push32(a != b);
			break;
		}
		case 0x53: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			push32(a < b);
			break;
		}
		case 0x54: {
			uint64_t b = pop(), a = pop();
			push32(a < b);
			break;
		}
		case 0x55: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			push32(a > b);
			break;
		}
		case 0x56: {
			uint64_t b = pop(), a = pop();
			push32(a > b);
			break;
		}
		case 0x57: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			push32(a <= b);
			break;
		}
		case 0x58: {
			uint64_t b = pop(), a = pop();
			push32(a <= b);
			break;
		}
		case 0x59: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			push32(a >= b);
			break;
		}
		case 0x5a: {
			uint64_t b = pop(), a = pop();
			push32(a >= b);
			break;
		}
		// f32 comparisons
		case 0x5b: {
			float b = popf32(), a = popf32();
			push32(a == b);
			break;
		}
		case 0x5c: {
			float b = popf32(), a = popf32();
			push32(a != b);
			break;
		}
		case 0x5d: {
			float b = popf32(), a = popf32();
			push32(a < b);
			break;
		}
		case 0x5e: {
			float b = popf32(), a = popf32();
			push32(a > b);
			break;
		}
		case 0x5f: {
			float b = popf32(), a = popf32();
			push32(a <= b);
			break;
		}
		case 0x60: {
			float b = popf32(), a = popf32();
			push32(a >= b);
			break;
		}
		// f64 comparisons
		case 0x61: {
			double b = popf64(), a = popf64();
			push32(a == b);
			break;
		}
		case 0x62: {
			double b = popf64(), a = popf64();
			push32(a != b);
			break;
		}
		case 0x63: {
			double b = popf64(), a = popf64();
			push32(a < b);
			break;
		}
		case 0x64: {
			double b = popf64(), a = popf64();
			push32(a > b);
			break;
		}
		case 0x65: {
			double b = popf64(), a = popf64();
			push32(a <= b);
			break;
		}
		case 0x66: {
			double b = popf64(), a = popf64();
			push32(a >= b);
			break;
		}

		// i32 arithmetic
		case 0x67: {
			uint32_t v = pop32();
			push32(v ? uint32_t(__builtin_clz(v)) : 32);
			break;
		}
		case 0x68: {
			uint32_t v = pop32();
			push32(v ? uint32_t(__builtin_ctz(v)) : 32);
			break;
		}
		case 0x69:
			push32(uint32_t(__builtin_popcount(pop32())));
			break;
		case 0x6a: {
			uint32_t b = pop32(), a = pop32();
			push32(a + b);
			break;
		}
		case 0x6b: {
			uint32_t b = pop32(), a = pop32();
			push32(a - b);
			break;
		}
		case 0x6c: {
			uint32_t b = pop32(), a = pop32();
			push32(a * b);
			break;
		}
		case 0x6d: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			if (b == 0)
				wtrap("integer divide by zero");
			if (a == std::numeric_limits<int32_t>::min() && b == -1)
				wtrap("integer overflow");
			push32(uint32_t(a / b));
			break;
		}
		case 0x6e: {
			uint32_t b = pop32(), a = pop32();
			if (b == 0)
				wtrap("integer divide by zero");
			push32(a / b);
			break;
		}
		case 0x6f: {
			int32_t b = int32_t(pop32()), a = int32_t(pop32());
			if (b == 0)
				wtrap("integer divide by zero");
			push32(b == -1 ? 0 : uint32_t(a % b));
			break;
		}
		case 0x70: {
			uint32_t b = pop32(), a = pop32();
			if (b == 0)
				wtrap("integer divide by zero");
			push32(a % b);
			break;
		}
		case 0x71: {
			uint32_t b = pop32(), a = pop32();
			push32(a & b);
			break;
		}
		case 0x72: {
			uint32_t b = pop32(), a = pop32();
			push32(a | b);
			break;
		}
		case 0x73: {
			uint32_t b = pop32(), a = pop32();
			push32(a ^ b);
			break;
		}
		case 0x74: {
			uint32_t b = pop32(), a = pop32();
			push32(a << (b & 31));
			break;
		}
		case 0x75: {
			uint32_t b = pop32();
			int32_t a = int32_t(pop32());
			push32(uint32_t(a >> (b & 31)));
			break;
		}
		case 0x76: {
			uint32_t b = pop32(), a = pop32();
			push32(a >> (b & 31));
			break;
		}
		case 0x77: {
			uint32_t b = pop32(), a = pop32();
			push32(std::rotl(a, int(b & 31)));
			break;
		}
		case 0x78: {
			uint32_t b = pop32(), a = pop32();
			push32(std::rotr(a, int(b & 31)));
			break;
		}
		// i64 arithmetic
		case 0x79: {
			uint64_t v = pop();
			push(v ? uint64_t(__builtin_clzll(v)) : 64);
			break;
		}
		case 0x7a: {
			uint64_t v = pop();
			push(v ? uint64_t(__builtin_ctzll(v)) : 64);
			break;
		}
		case 0x7b:
			push(uint64_t(__builtin_popcountll(pop())));
			break;
		case 0x7c: {
			uint64_t b = pop(), a = pop();
			push(a + b);
			break;
		}
		case 0x7d: {
			uint64_t b = pop(), a = pop();
			push(a - b);
			break;
		}
		case 0x7e: {
			uint64_t b = pop(), a = pop();
			push(a * b);
			break;
		}
		case 0x7f: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			if (b == 0)
				wtrap("integer divide by zero");
			if (a == std::numeric_limits<int64_t>::min() && b == -1)
				wtrap("integer overflow");
			push(uint64_t(a / b));
			break;
		}
		case 0x80: {
			uint64_t b = pop(), a = pop();
			if (b == 0)
				wtrap("integer divide by zero");
			push(a / b);
			break;
		}
		case 0x81: {
			int64_t b = int64_t(pop()), a = int64_t(pop());
			if (b == 0)
				wtrap("integer divide by zero");
			push(b == -1 ? 0 : uint64_t(a % b));
			break;
		}
		case 0x82: {
			uint64_t b = pop(), a = pop();
			if (b == 0)
				wtrap("integer divide by zero");
			push(a % b);
			break;
		}
		case 0x83: {
			uint64_t b = pop(), a = pop();
			push(a & b);
			break;
		}
		case 0x84: {
			uint64_t b = pop(), a = pop();
			push(a | b);
			break;
		}
		case 0x85: {
			uint64_t b = pop(), a = pop();
			push(a ^ b);
			break;
		}
		case 0x86: {
			uint64_t b = pop(), a = pop();
			push(a << (b & 63));
			break;
		}
		case 0x87: {
			uint64_t b = pop();
			int64_t a = int64_t(pop());
			push(uint64_t(a >> (b & 63)));
			break;
		}
		case 0x88: {
			uint64_t b = pop(), a = pop();
			push(a >> (b & 63));
			break;
		}
		case 0x89: {
			uint64_t b = pop(), a = pop();
			push(std::rotl(a, int(b & 63)));
			break;
		}
		case 0x8a: {
			uint64_t b = pop(), a = pop();
			push(std::rotr(a, int(b & 63)));
			break;
		}

		// f32 arithmetic
		case 0x8b:
			pushf32(std::fabs(popf32()));
			break;
		case 0x8c:
			pushf32(-popf32());
			break;
		case 0x8d:
			pushf32(std::ceil(popf32()));
			break;
		case 0x8e:
			pushf32(std::floor(popf32()));
			break;
		case 0x8f:
			pushf32(std::trunc(popf32()));
			break;
		case 0x90:
			pushf32(std::nearbyint(popf32()));
			break;
		case 0x91:
			pushf32(std::sqrt(popf32()));
			break;
		case 0x92: {
			float b = popf32(), a = popf32();
			pushf32(a + b);
			break;
		}
		case 0x93: {
			float b = popf32(), a = popf32();
			pushf32(a - b);
			break;
		}
		case 0x94: {
			float b = popf32(), a = popf32();
			pushf32(a * b);
			break;
		}
		case 0x95: {
			float b = popf32(), a = popf32();
			pushf32(a / b);
			break;
		}
		case 0x96: {
			float b = popf32(), a = popf32();
			pushf32(wasm_min(a, b));
			break;
		}
		case 0x97: {
			float b = popf32(), a = popf32();
			pushf32(wasm_max(a, b));
			break;
		}
		case 0x98: {
			float b = popf32(), a = popf32();
			pushf32(std::copysign(a, b));
			break;
		}
		// f64 arithmetic
		case 0x99:
			pushf64(std::fabs(popf64()));
			break;
		case 0x9a:
			pushf64(-popf64());
			break;
		case 0x9b:
			pushf64(std::ceil(popf64()));
			break;
		case 0x9c:
			pushf64(std::floor(popf64()));
			break;
		case 0x9d:
			pushf64(std::trunc(popf64()));
			break;
		case 0x9e:
			pushf64(std::nearbyint(popf64()));
			break;
		case 0x9f:
			pushf64(std::sqrt(popf64()));
			break;
		case 0xa0: {
			double b = popf64(), a = popf64();
			pushf64(a + b);
			break;
		}
		case 0xa1: {
			double b = popf64(), a = popf64();
			pushf64(a - b);
			break;
		}
		case 0xa2: {
			double b = popf64(), a = popf64();
			pushf64(a * b);
			break;
		}
		case 0xa3: {
			double b = popf64(), a = popf64();
			pushf64(a / b);
			break;
		}
		case 0xa4: {
			double b = popf64(), a = popf64();
			pushf64(wasm_min(a, b));
			break;
		}
		case 0xa5: {
			double b = popf64(), a = popf64();
			pushf64(wasm_max(a, b));
			break;
		}
		case 0xa6: {
			double b = popf64(), a = popf64();
			pushf64(std::copysign(a, b));
			break;
		}

		// conversions
		case 0xa7:
			push32(uint32_t(pop()));
			break;
		case 0xa8:
			push32(uint32_t(trunc_checked<int32_t>(
				popf32(), "i32.trunc_f32_s")));
			break;
		case 0xa9:
			push32(trunc_checked<uint32_t>(popf32(),
						       "i32.trunc_f32_u"));
			break;
		case 0xaa:
			push32(uint32_t(trunc_checked<int32_t>(
				popf64(), "i32.trunc_f64_s")));
			break;
		case 0xab:
			push32(trunc_checked<uint32_t>(popf64(),
						       "i32.trunc_f64_u"));
			break;
		case 0xac:
			push(uint64_t(int64_t(int32_t(pop32()))));
			break;
		case 0xad:
			push(uint64_t(pop32()));
			break;
		case 0xae:
			push(uint64_t(trunc_checked<int64_t>(
				popf32(), "i64.trunc_f32_s")));
			break;
		case 0xaf:
			push(trunc_checked<uint64_t>(popf32(),
						     "i64.trunc_f32_u"));
			break;
		case 0xb0:
			push(uint64_t(trunc_checked<int64_t>(
				popf64(), "i64.trunc_f64_s")));
			break;
		case 0xb1:
			push(trunc_checked<uint64_t>(popf64(),
						     "i64.trunc_f64_u"));
			break;
		case 0xb2:
			pushf32(float(int32_t(pop32())));
			break;
		case 0xb3:
			pushf32(float(pop32()));
			break;
		case 0xb4:
			pushf32(float(int64_t(pop())));
			break;
		case 0xb5:
			pushf32(float(pop()));
			break;
		case 0xb6:
			pushf32(float(popf64()));
			break;
		case 0xb7:
			pushf64(double(int32_t(pop32())));
			break;
		case 0xb8:
			pushf64(double(pop32()));
			break;
		case 0xb9:
			pushf64(double(int64_t(pop())));
			break;
		case 0xba:
			pushf64(double(pop()));
			break;
		case 0xbb:
			pushf64(double(popf32()));
			break;
		case 0xbc:
		case 0xbd:
		case 0xbe:
		case 0xbf:
			break; // reinterpret: bits already raw

		// sign extension
		case 0xc0:
			push32(uint32_t(int32_t(int8_t(pop32()))));
			break;
		case 0xc1:
			push32(uint32_t(int32_t(int16_t(pop32()))));
			break;
		case 0xc2:
			push(uint64_t(int64_t(int8_t(pop()))));
			break;
		case 0xc3:
			push(uint64_t(int64_t(int16_t(pop()))));
			break;
		case 0xc4:
			push(uint64_t(int64_t(int32_t(pop()))));
			break;

		// 0xFC: saturating truncations and bulk memory
		case kFcOpBase + 0:
			push32(uint32_t(trunc_sat<int32_t>(popf32())));
			break;
		case kFcOpBase + 1:
			push32(trunc_sat<uint32_t>(popf32()));
			break;
		case kFcOpBase + 2:
			push32(uint32_t(trunc_sat<int32_t>(popf64())));
			break;
		case kFcOpBase + 3:
			push32(trunc_sat<uint32_t>(popf64()));
			break;
		case kFcOpBase + 4:
			push(uint64_t(trunc_sat<int64_t>(popf32())));
			break;
		case kFcOpBase + 5:
			push(trunc_sat<uint64_t>(popf32()));
			break;
		case kFcOpBase + 6:
			push(uint64_t(trunc_sat<int64_t>(popf64())));
			break;
		case kFcOpBase + 7:
			push(trunc_sat<uint64_t>(popf64()));
			break;
		case kFcOpBase + 10: { // memory.copy
			uint32_t n = pop32(), src = pop32(), dst = pop32();
			if (uint64_t(src) + n > in.memory_.size() ||
			    uint64_t(dst) + n > in.memory_.size())
				wtrap("memory.copy out of bounds");
			std::memmove(in.memory_.data() + dst,
				     in.memory_.data() + src, n);
			break;
		}
		case kFcOpBase + 11: { // memory.fill
			uint32_t n = pop32(), val = pop32(), dst = pop32();
			if (uint64_t(dst) + n > in.memory_.size())
				wtrap("memory.fill out of bounds");
			std::memset(in.memory_.data() + dst, int(val & 0xff),
				    n);
			break;
		}
		default:
			wtrap("unimplemented opcode 0x" + std::to_string(op));
		}
	}
};

uint64_t Instance::call_function(uint32_t func_index,
				 std::span<const uint64_t> args)
{
	const FuncType &type = mod_.func_type(func_index);
	if (args.size() != type.params.size())
		raise(Errc::BadArgument,
		      "function expects " +
			      std::to_string(type.params.size()) +
			      " arguments, got " + std::to_string(args.size()));
	size_t base = vstack_.size();
	for (uint64_t a : args)
		vstack_.push_back(a);
	Interp interp{*this};
	interp.invoke(func_index);
	uint64_t result = 0;
	if (!type.results.empty()) {
		result = vstack_.back();
		vstack_.pop_back();
	}
	vstack_.resize(base);
	return result;
}

} // namespace wasmbpf::wasm
