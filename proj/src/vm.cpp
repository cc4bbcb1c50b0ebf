// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/vm.hpp"

#include <cstring>

#include "wasmbpf/errors.hpp"

namespace wasmbpf::vm {

namespace {

using namespace wasmbpf::insn;

constexpr uint64_t kRegionShift = 32;

[[noreturn]] void trap(Errc code, const std::string &msg)
{
	raise(code, msg);
}

} // namespace

uint64_t MemorySandbox::add_region(uint8_t *host, uint64_t size, bool writable,
				   std::shared_ptr<void> keepalive)
{
	Region r;
	r.size = size;
	r.host = host;
	r.writable = writable;
	r.keepalive = std::move(keepalive);
	regions_.push_back(std::move(r));
	return uint64_t(regions_.size()) << kRegionShift;
}

uint64_t MemorySandbox::add_ring_region(uint8_t *ring_data, uint64_t ring_mask,
					uint64_t start_counter, uint64_t size,
					bool writable)
{
	Region r;
	r.size = size;
	r.host = ring_data;
	r.writable = writable;
	r.ring = true;
	r.ring_mask = ring_mask;
	r.ring_start = start_counter;
	regions_.push_back(std::move(r));
	return uint64_t(regions_.size()) << kRegionShift;
}

void MemorySandbox::revoke(uint64_t base)
{
	uint64_t idx = base >> kRegionShift;
	if (idx == 0 || idx > regions_.size())
		return;
	regions_[idx - 1].revoked = true;
}

const MemorySandbox::Region *
MemorySandbox::find(uint64_t addr, uint64_t size, bool write) const
{
	uint64_t idx = addr >> kRegionShift;
	if (idx == 0 || idx > regions_.size())
		return nullptr;
	const Region &r = regions_[idx - 1];
	if (r.revoked)
		return nullptr;
	uint64_t off = addr & 0xffffffffull;
	if (off + size > r.size)
		return nullptr;
	if (write && !r.writable)
		return nullptr;
	return &r;
}

bool MemorySandbox::check(uint64_t addr, uint64_t size, bool write) const
{
	return find(addr, size, write) != nullptr;
}

uint64_t MemorySandbox::load(uint64_t addr, uint32_t width) const
{
	const Region *r = find(addr, width, false);
	if (!r)
		trap(Errc::OutOfBounds,
		     "read of " + std::to_string(width) + " bytes at 0x" +
			     std::to_string(addr) + " outside any region");
	uint64_t off = addr & 0xffffffffull;
	uint64_t v = 0;
	if (r->ring) {
		for (uint32_t i = 0; i < width; i++)
			v |= uint64_t(r->host[(r->ring_start + off + i) &
					      r->ring_mask])
			     << (8 * i);
	} else {
		std::memcpy(&v, r->host + off, width);
	}
	return v;
}

void MemorySandbox::store(uint64_t addr, uint32_t width, uint64_t value)
{
	const Region *r = find(addr, width, true);
	if (!r)
		trap(Errc::OutOfBounds,
		     "write of " + std::to_string(width) + " bytes at 0x" +
			     std::to_string(addr) +
			     " outside any writable region");
	uint64_t off = addr & 0xffffffffull;
	if (r->ring) {
		for (uint32_t i = 0; i < width; i++)
			r->host[(r->ring_start + off + i) & r->ring_mask] =
				uint8_t(value >> (8 * i));
	} else {
		std::memcpy(r->host + off, &value, width);
	}
}

void MemorySandbox::read_bytes(uint64_t addr, std::span<uint8_t> out) const
{
	const Region *r = find(addr, out.size(), false);
	if (!r)
		trap(Errc::OutOfBounds,
		     "read of " + std::to_string(out.size()) + " bytes at 0x" +
			     std::to_string(addr) + " outside any region");
	uint64_t off = addr & 0xffffffffull;
	if (r->ring) {
		for (size_t i = 0; i < out.size(); i++)
			out[i] = r->host[(r->ring_start + off + i) &
					 r->ring_mask];
	} else {
		std::memcpy(out.data(), r->host + off, out.size());
	}
}

void MemorySandbox::write_bytes(uint64_t addr, std::span<const uint8_t> in)
{
	const Region *r = find(addr, in.size(), true);
	if (!r)
		trap(Errc::OutOfBounds,
		     "write of " + std::to_string(in.size()) + " bytes at 0x" +
			     std::to_string(addr) +
			     " outside any writable region");
	uint64_t off = addr & 0xffffffffull;
	if (r->ring) {
		for (size_t i = 0; i < in.size(); i++)
			r->host[(r->ring_start + off + i) & r->ring_mask] =
				in[i];
	} else {
		std::memcpy(r->host + off, in.data(), in.size());
	}
}

bool ctx_writable_for(ProgType type)
{
	return type == ProgType::xdp || type == ProgType::sockops;
}

void validate_image(const EbpfProgramImage &image)
{
	const auto &ins = image.insns;
	size_t n = ins.size();
	if (n == 0)
		raise(Errc::BadInstruction, "empty program");
	if (ins.back().opcode != kExit)
		raise(Errc::BadInstruction,
		      "program '" + image.name + "' does not end with EXIT");

	std::vector<bool> is_imm64_slot(n, false);
	for (size_t i = 0; i < n; i++) {
		if (!is_imm64_slot[i] && is_ld_imm64(ins[i])) {
			if (i + 1 >= n)
				raise(Errc::TruncatedLdImm64,
				      "LD_IMM64 at end of program");
			is_imm64_slot[i + 1] = true;
		}
	}

	for (size_t i = 0; i < n; i++) {
		if (is_imm64_slot[i])
			continue;
		const Insn &x = ins[i];
		if (x.dst_reg > kMaxReg || x.src_reg > kMaxReg)
			raise(Errc::BadRegister,
			      "instruction " + std::to_string(i) +
				      " uses register > r10");
		uint8_t cls = x.opcode & kClassMask;
		uint8_t op = x.opcode & kOpMask;

		bool writes_dst = false;
		switch (cls) {
		case kClassAlu:
		case kClassAlu64:
			writes_dst = true;
			if (op == kAluEnd &&
			    (x.imm != 16 && x.imm != 32 && x.imm != 64))
				raise(Errc::BadInstruction,
				      "byte-swap width must be 16/32/64");
			if ((op == kAluDiv || op == kAluMod) &&
			    !(x.opcode & kSrcX) && x.imm == 0)
				raise(Errc::BadInstruction,
				      "division by constant zero");
			break;
		case kClassLdx:
			writes_dst = true;
			if ((x.opcode & kModeMask) != kModeMem)
				raise(Errc::BadInstruction,
				      "LDX supports only MEM mode");
			break;
		case kClassLd:
			if (!is_ld_imm64(x))
				raise(Errc::BadInstruction,
				      "LD class supports only LD_IMM64 "
				      "(no ABS/IND)");
			writes_dst = true;
			if (x.src_reg != 0 && x.src_reg != kPseudoMapFd)
				raise(Errc::BadInstruction,
				      "unsupported LD_IMM64 pseudo source " +
					      std::to_string(x.src_reg));
			break;
		case kClassSt:
		case kClassStx:
			if ((x.opcode & kModeMask) == kModeAtomic)
				raise(Errc::BadInstruction,
				      "atomic operations are not supported");
			if ((x.opcode & kModeMask) != kModeMem)
				raise(Errc::BadInstruction,
				      "ST/STX supports only MEM mode");
			break;
		case kClassJmp:
		case kClassJmp32: {
			if (op == kJmpExit) {
				if (cls == kClassJmp32)
					raise(Errc::BadInstruction,
					      "EXIT must be JMP class");
				break;
			}
			if (op == kJmpCall) {
				if (cls == kClassJmp32 || x.src_reg != 0)
					raise(Errc::BadInstruction,
					      "only helper calls are "
					      "supported (no bpf-to-bpf)");
				break;
			}
			if (op == kJmpJa && cls == kClassJmp32)
				raise(Errc::BadInstruction,
				      "32-bit JA is not supported");
			int64_t target =
				int64_t(i) + 1 + x.offset;
			if (target < 0 || target >= int64_t(n))
				raise(Errc::BadJump,
				      "jump at " + std::to_string(i) +
					      " targets " +
					      std::to_string(target) +
					      " outside [0, " +
					      std::to_string(n) + ")");
			if (is_imm64_slot[size_t(target)])
				raise(Errc::BadJump,
				      "jump at " + std::to_string(i) +
					      " lands inside an LD_IMM64 pair");
			break;
		}
		default:
			raise(Errc::BadInstruction, "unknown instruction class");
		}
		if (writes_dst && x.dst_reg == 10)
			raise(Errc::BadInstruction,
			      "instruction " + std::to_string(i) +
				      " writes r10");
	}
}

void step_alu(const Insn &ins, std::array<uint64_t, 11> &regs)
{
	uint8_t cls = ins.opcode & kClassMask;
	uint8_t op = ins.opcode & kOpMask;
	bool is64 = cls == kClassAlu64;
	bool from_reg = ins.opcode & kSrcX;

	uint64_t dst = regs[ins.dst_reg];
	uint64_t src = from_reg ? regs[ins.src_reg]
				: uint64_t(int64_t(ins.imm)); // sign-extend K

	if (op == kAluEnd) {
		// BPF_TO_LE (K) is identity-plus-truncate on this
		// little-endian interpreter; BPF_TO_BE (X bit) swaps.
		uint64_t v = dst;
		bool to_be = from_reg;
		switch (ins.imm) {
		case 16:
			v = uint16_t(v);
			if (to_be)
				v = __builtin_bswap16(uint16_t(v));
			break;
		case 32:
			v = uint32_t(v);
			if (to_be)
				v = __builtin_bswap32(uint32_t(v));
			break;
		case 64:
			if (to_be)
				v = __builtin_bswap64(v);
			break;
		}
		regs[ins.dst_reg] = v;
		return;
	}

	if (!is64) {
		dst = uint32_t(dst);
		src = uint32_t(src);
	}
	uint64_t result = dst;
	switch (op) {
	case kAluAdd:
		result = dst + src;
		break;
	case kAluSub:
		result = dst - src;
		break;
	case kAluMul:
		result = dst * src;
		break;
	case kAluDiv:
		// unsigned; division by zero yields zero
		if (is64)
			result = src ? dst / src : 0;
		else
			result = uint32_t(src) ? uint32_t(dst) / uint32_t(src)
					       : 0;
		break;
	case kAluOr:
		result = dst | src;
		break;
	case kAluAnd:
		result = dst & src;
		break;
	case kAluLsh:
		result = is64 ? dst << (src & 63)
			      : uint64_t(uint32_t(dst) << (src & 31));
		break;
	case kAluRsh:
		result = is64 ? dst >> (src & 63)
			      : uint64_t(uint32_t(dst) >> (src & 31));
		break;
	case kAluNeg:
		result = is64 ? uint64_t(-int64_t(dst))
			      : uint64_t(uint32_t(-int32_t(uint32_t(dst))));
		break;
	case kAluMod:
		// modulo by zero leaves dst unchanged
		if (is64)
			result = src ? dst % src : dst;
		else
			result = uint32_t(src)
					 ? uint32_t(dst) % uint32_t(src)
					 : uint32_t(dst);
		break;
	case kAluXor:
		result = dst ^ src;
		break;
	case kAluMov:
		result = src;
		break;
	case kAluArsh:
		if (is64)
			result = uint64_t(int64_t(dst) >> (src & 63));
		else
			result = uint64_t(uint32_t(
				int32_t(uint32_t(dst)) >> (src & 31)));
		break;
	}
	// 32-bit ops zero-extend into the destination
	regs[ins.dst_reg] = is64 ? result : uint64_t(uint32_t(result));
}

namespace {

bool jump_taken(const Insn &ins, const std::array<uint64_t, 11> &regs)
{
	uint8_t cls = ins.opcode & kClassMask;
	uint8_t op = ins.opcode & kOpMask;
	bool is32 = cls == kClassJmp32;
	uint64_t dst = regs[ins.dst_reg];
	uint64_t src = (ins.opcode & kSrcX) ? regs[ins.src_reg]
					    : uint64_t(int64_t(ins.imm));
	if (is32) {
		dst = uint32_t(dst);
		src = uint32_t(src);
	}
	int64_t sdst = is32 ? int64_t(int32_t(uint32_t(dst))) : int64_t(dst);
	int64_t ssrc = is32 ? int64_t(int32_t(uint32_t(src))) : int64_t(src);

	switch (op) {
	case kJmpJa:
		return true;
	case kJmpJeq:
		return dst == src;
	case kJmpJgt:
		return dst > src;
	case kJmpJge:
		return dst >= src;
	case kJmpJset:
		return (dst & src) != 0;
	case kJmpJne:
		return dst != src;
	case kJmpJsgt:
		return sdst > ssrc;
	case kJmpJsge:
		return sdst >= ssrc;
	case kJmpJlt:
		return dst < src;
	case kJmpJle:
		return dst <= src;
	case kJmpJslt:
		return sdst < ssrc;
	case kJmpJsle:
		return sdst <= ssrc;
	}
	return false;
}

struct Execution {
	const EbpfProgramImage &image;
	VmEnv &env;
	MemorySandbox sandbox;
	std::array<uint64_t, 11> regs{};
	// outstanding ring reservations keyed by payload token
	struct Outstanding {
		std::shared_ptr<MapStore> store;
		RingBuffer::Reservation reservation;
	};
	std::unordered_map<uint64_t, Outstanding> reservations;
	// lookup-region cache keyed by value buffer address
	std::unordered_map<void *, uint64_t> value_regions;

	std::shared_ptr<MapStore> map_from_reg(uint64_t value)
	{
		if (!env.maps)
			trap(Errc::BadHandle,
			     "program uses maps but no registry is attached");
		auto store = env.maps->get(int32_t(value));
		if (!store)
			trap(Errc::BadHandle,
			     "helper called with invalid map handle " +
				     std::to_string(int64_t(value)));
		return store;
	}

	uint64_t call_helper(uint32_t id)
	{
		uint64_t r1 = regs[1], r2 = regs[2], r3 = regs[3],
			 r4 = regs[4];
		switch (id) {
		case helper::kMapLookupElem: {
			auto store = map_from_reg(r1);
			if (store->is_ringbuf())
				return 0;
			std::vector<uint8_t> key(store->def().key_size);
			sandbox.read_bytes(r2, key);
			auto ref = store->lookup_ref(key);
			if (!ref)
				return 0;
			auto it = value_regions.find(ref->data());
			if (it != value_regions.end())
				return it->second;
			uint64_t tok = sandbox.add_region(
				ref->data(), ref->size(), true, ref);
			value_regions.emplace(ref->data(), tok);
			return tok;
		}
		case helper::kMapUpdateElem: {
			auto store = map_from_reg(r1);
			std::vector<uint8_t> key(store->def().key_size);
			std::vector<uint8_t> value(store->def().value_size);
			sandbox.read_bytes(r2, key);
			sandbox.read_bytes(r3, value);
			MapStatus st = store->update(key, value, r4);
			return st == MapStatus::ok ? 0 : uint64_t(-1);
		}
		case helper::kMapDeleteElem: {
			auto store = map_from_reg(r1);
			std::vector<uint8_t> key(store->def().key_size);
			sandbox.read_bytes(r2, key);
			MapStatus st = store->erase(key);
			return st == MapStatus::ok ? 0 : uint64_t(-1);
		}
		case helper::kKtimeGetNs:
			return env.ktime_ns
				       ? env.ktime_ns()
				       : uint64_t(std::chrono::duration_cast<
							  std::chrono::
								  nanoseconds>(
							  std::chrono::
								  steady_clock::
									  now()
									  .time_since_epoch())
							  .count());
		case helper::kGetCurrentPidTgid:
			return env.pid_tgid;
		case helper::kGetCurrentComm: {
			uint64_t n = std::min<uint64_t>(r2, env.comm.size());
			sandbox.write_bytes(
				r1, std::span(reinterpret_cast<const uint8_t *>(
						      env.comm.data()),
					      n));
			return 0;
		}
		case helper::kRingbufOutput: {
			auto store = map_from_reg(r1);
			RingBuffer &rb = store->ring();
			if (r3 == 0 || r3 > 0xffffffffull)
				return uint64_t(-1);
			std::vector<uint8_t> payload(size_t(r3));
			sandbox.read_bytes(r2, payload);
			RingBuffer::Reservation res;
			if (rb.reserve(uint32_t(r3), res) !=
			    RingBuffer::ReserveStatus::ok)
				return uint64_t(-1);
			rb.write_payload(res, payload);
			rb.submit(res);
			return 0;
		}
		case helper::kRingbufReserve: {
			auto store = map_from_reg(r1);
			RingBuffer &rb = store->ring();
			if (r2 == 0 || r2 > 0xffffffffull)
				return 0;
			RingBuffer::Reservation res;
			if (rb.reserve(uint32_t(r2), res) !=
			    RingBuffer::ReserveStatus::ok)
				return 0;
			uint64_t tok = sandbox.add_ring_region(
				rb.data(), rb.mask(),
				res.pos + RingBuffer::kHeaderSize,
				res.len, true);
			reservations.emplace(tok,
					     Outstanding{store, res});
			return tok;
		}
		case helper::kRingbufSubmit:
		case helper::kRingbufDiscard: {
			auto it = reservations.find(r1);
			if (it == reservations.end())
				trap(Errc::DoubleSubmit,
				     "ringbuf submit/discard of an unknown "
				     "or finished reservation");
			RingBuffer &rb = it->second.store->ring();
			if (id == helper::kRingbufSubmit)
				rb.submit(it->second.reservation);
			else
				rb.discard(it->second.reservation);
			sandbox.revoke(r1);
			reservations.erase(it);
			return 0;
		}
		default:
			trap(Errc::UnknownHelper,
			     "helper id " + std::to_string(id) +
				     " is not in the helper table");
		}
	}
};

} // namespace

uint64_t execute(const EbpfProgramImage &image, std::span<uint8_t> ctx,
		 VmEnv &env, const VmOptions &opts)
{
	validate_image(image);

	Execution ex{image, env};
	alignas(8) std::array<uint8_t, kStackSize> stack{};

	uint64_t stack_base =
		ex.sandbox.add_region(stack.data(), stack.size(), true);
	bool ctx_rw = opts.ctx_writable >= 0
			      ? opts.ctx_writable != 0
			      : ctx_writable_for(image.prog_type);
	uint64_t ctx_base = 0;
	if (!ctx.empty())
		ctx_base = ex.sandbox.add_region(ctx.data(), ctx.size(),
						 ctx_rw);

	ex.regs[1] = ctx_base;
	ex.regs[10] = stack_base + kStackSize;

	const auto &ins = image.insns;
	uint64_t budget = opts.insn_budget;
	size_t pc = 0;

	for (;;) {
		if (budget-- == 0)
			trap(Errc::BudgetExhausted,
			     "instruction budget exhausted in '" + image.name +
				     "'");
		const Insn &x = ins[pc];
		uint8_t cls = x.opcode & kClassMask;

		switch (cls) {
		case kClassAlu:
		case kClassAlu64:
			step_alu(x, ex.regs);
			pc++;
			break;
		case kClassLd: { // LD_IMM64 (validated)
			const Insn &hi = ins[pc + 1];
			if (x.src_reg == kPseudoMapFd)
				ex.regs[x.dst_reg] = uint64_t(uint32_t(x.imm));
			else
				ex.regs[x.dst_reg] =
					uint64_t(uint32_t(x.imm)) |
					(uint64_t(uint32_t(hi.imm)) << 32);
			pc += 2;
			break;
		}
		case kClassLdx: {
			uint32_t width;
			switch (x.opcode & kSizeMask) {
			case kSizeB:
				width = 1;
				break;
			case kSizeH:
				width = 2;
				break;
			case kSizeW:
				width = 4;
				break;
			default:
				width = 8;
				break;
			}
			uint64_t addr = ex.regs[x.src_reg] +
					uint64_t(int64_t(x.offset));
			ex.regs[x.dst_reg] = ex.sandbox.load(addr, width);
			pc++;
			break;
		}
		case kClassSt:
		case kClassStx: {
			uint32_t width;
			switch (x.opcode & kSizeMask) {
			case kSizeB:
				width = 1;
				break;
			case kSizeH:
				width = 2;
				break;
			case kSizeW:
				width = 4;
				break;
			default:
				width = 8;
				break;
			}
			uint64_t addr = ex.regs[x.dst_reg] +
					uint64_t(int64_t(x.offset));
			uint64_t value = cls == kClassSt
						 ? uint64_t(int64_t(x.imm))
						 : ex.regs[x.src_reg];
			ex.sandbox.store(addr, width, value);
			pc++;
			break;
		}
		case kClassJmp:
		case kClassJmp32: {
			uint8_t op = x.opcode & kOpMask;
			if (op == kJmpExit) {
				// leaked reservations are discarded so the
				// ring never stays BUSY after a buggy program
				for (auto &[tok, o] : ex.reservations)
					o.store->ring().discard(o.reservation);
				return ex.regs[0];
			}
			if (op == kJmpCall) {
				ex.regs[0] = ex.call_helper(
					uint32_t(x.imm));
				pc++;
				break;
			}
			if (jump_taken(x, ex.regs))
				pc = size_t(int64_t(pc) + 1 + x.offset);
			else
				pc++;
			break;
		}
		}
	}
}

} // namespace wasmbpf::vm
