// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/wasm/wasi.hpp"

#include <chrono>
#include <cstring>
#include <random>

namespace wasmbpf::wasm {

namespace {

constexpr uint16_t kErrnoSuccess = 0;
constexpr uint16_t kErrnoBadf = 8;
constexpr uint16_t kErrnoInval = 28;

FuncType sig(std::initializer_list<ValType> params,
	     std::initializer_list<ValType> results)
{
	return FuncType{params, results};
}

} // namespace

void register_wasi(ImportTable &imports,
		   std::function<void(std::string_view)> out)
{
	const std::string ns = "wasi_snapshot_preview1";
	using VT = ValType;
	auto shared_out =
		std::make_shared<std::function<void(std::string_view)>>(
			std::move(out));

	imports.add(ns, "fd_write",
		    {sig({VT::i32, VT::i32, VT::i32, VT::i32}, {VT::i32}),
		     [shared_out](Instance &in,
				  std::span<const uint64_t> args,
				  std::span<uint64_t> results) {
			     uint32_t fd = uint32_t(args[0]);
			     uint32_t iovs = uint32_t(args[1]);
			     uint32_t iovs_len = uint32_t(args[2]);
			     uint32_t nwritten_ptr = uint32_t(args[3]);
			     if (fd != 1 && fd != 2) {
				     results[0] = kErrnoBadf;
				     return;
			     }
			     uint32_t written = 0;
			     for (uint32_t i = 0; i < iovs_len; i++) {
				     auto iov = in.mem_span(iovs + i * 8, 8);
				     uint32_t buf, len;
				     std::memcpy(&buf, iov.data(), 4);
				     std::memcpy(&len, iov.data() + 4, 4);
				     auto data = in.mem_span(buf, len);
				     (*shared_out)(std::string_view(
					     reinterpret_cast<const char *>(
						     data.data()),
					     data.size()));
				     written += len;
			     }
			     auto outp = in.mem_span(nwritten_ptr, 4);
			     std::memcpy(outp.data(), &written, 4);
			     results[0] = kErrnoSuccess;
		     }});

	imports.add(ns, "proc_exit",
		    {sig({VT::i32}, {}),
		     [](Instance &, std::span<const uint64_t> args,
			std::span<uint64_t>) {
			     throw ProcExit{int32_t(uint32_t(args[0]))};
		     }});

	imports.add(ns, "clock_time_get",
		    {sig({VT::i32, VT::i64, VT::i32}, {VT::i32}),
		     [](Instance &in, std::span<const uint64_t> args,
			std::span<uint64_t> results) {
			     uint64_t ns = uint64_t(
				     std::chrono::duration_cast<
					     std::chrono::nanoseconds>(
					     std::chrono::steady_clock::now()
						     .time_since_epoch())
					     .count());
			     auto outp = in.mem_span(uint32_t(args[2]), 8);
			     std::memcpy(outp.data(), &ns, 8);
			     results[0] = kErrnoSuccess;
		     }});

	imports.add(ns, "random_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &in, std::span<const uint64_t> args,
			std::span<uint64_t> results) {
			     auto buf = in.mem_span(uint32_t(args[0]),
						    uint32_t(args[1]));
			     std::mt19937_64 rng(0x77617369); // deterministic
			     for (auto &b : buf)
				     b = uint8_t(rng());
			     results[0] = kErrnoSuccess;
		     }});

	// zero args / zero environment
	imports.add(ns, "args_sizes_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &in, std::span<const uint64_t> args,
			std::span<uint64_t> results) {
			     uint32_t zero = 0;
			     std::memcpy(in.mem_span(uint32_t(args[0]), 4)
						 .data(),
					 &zero, 4);
			     std::memcpy(in.mem_span(uint32_t(args[1]), 4)
						 .data(),
					 &zero, 4);
			     results[0] = kErrnoSuccess;
		     }});
	imports.add(ns, "args_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoSuccess;
		     }});
	imports.add(ns, "environ_sizes_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &in, std::span<const uint64_t> args,
			std::span<uint64_t> results) {
			     uint32_t zero = 0;
			     std::memcpy(in.mem_span(uint32_t(args[0]), 4)
						 .data(),
					 &zero, 4);
			     std::memcpy(in.mem_span(uint32_t(args[1]), 4)
						 .data(),
					 &zero, 4);
			     results[0] = kErrnoSuccess;
		     }});
	imports.add(ns, "environ_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoSuccess;
		     }});

	// descriptor stubs a probing guest may touch
	imports.add(ns, "fd_close",
		    {sig({VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoBadf;
		     }});
	imports.add(ns, "fd_seek",
		    {sig({VT::i32, VT::i64, VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoBadf;
		     }});
	imports.add(ns, "fd_fdstat_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoInval;
		     }});
	imports.add(ns, "fd_prestat_get",
		    {sig({VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoBadf;
		     }});
	imports.add(ns, "fd_prestat_dir_name",
		    {sig({VT::i32, VT::i32, VT::i32}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoBadf;
		     }});
	imports.add(ns, "sched_yield",
		    {sig({}, {VT::i32}),
		     [](Instance &, std::span<const uint64_t>,
			std::span<uint64_t> results) {
			     results[0] = kErrnoSuccess;
		     }});
}

} // namespace wasmbpf::wasm
