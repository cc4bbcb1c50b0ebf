// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/host_abi.hpp"

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <thread>

#include "wasmbpf/core_relo.hpp"
#include "wasmbpf/errors.hpp"
#include "wasmbpf/wasm/interp.hpp"

namespace wasmbpf::abi {

namespace {

int32_t errc_to_code(Errc code)
{
	switch (code) {
	case Errc::BadHandle:
		return kErrBadHandle;
	case Errc::NotFound:
	case Errc::NoSuchProgram:
		return kErrNotFound;
	case Errc::OutOfBoundsGuestPointer:
		return kErrOutOfBoundsGuestPointer;
	case Errc::Unsupported:
	case Errc::UnsupportedMapType:
	case Errc::UnsupportedReloKind:
		return kErrUnsupported;
	case Errc::AlreadyExists:
		return kErrAlreadyExists;
	case Errc::CapacityExceeded:
		return kErrCapacityExceeded;
	case Errc::Busy:
		return kErrBusy;
	case Errc::IndexOutOfRange:
		return kErrIndexOutOfRange;
	default:
		return kErrBadArgument;
	}
}

int32_t map_status_code(MapStatus st)
{
	switch (st) {
	case MapStatus::ok:
		return kOk;
	case MapStatus::not_found:
		return kErrNotFound;
	case MapStatus::already_exists:
		return kErrAlreadyExists;
	case MapStatus::capacity_exceeded:
		return kErrCapacityExceeded;
	case MapStatus::bad_handle:
		return kErrBadHandle;
	case MapStatus::index_out_of_range:
		return kErrIndexOutOfRange;
	case MapStatus::bad_argument:
	case MapStatus::bad_command:
		return kErrBadArgument;
	}
	return kErrBadArgument;
}

Errc map_status_errc(MapStatus st)
{
	switch (st) {
	case MapStatus::not_found:
		return Errc::NotFound;
	case MapStatus::already_exists:
		return Errc::AlreadyExists;
	case MapStatus::capacity_exceeded:
		return Errc::CapacityExceeded;
	case MapStatus::bad_handle:
		return Errc::BadHandle;
	case MapStatus::index_out_of_range:
		return Errc::IndexOutOfRange;
	case MapStatus::bad_command:
		return Errc::BadCommand;
	default:
		return Errc::BadArgument;
	}
}

bool guest_range_ok(std::span<uint8_t> memory, uint32_t ptr, uint64_t size)
{
	return uint64_t(ptr) + size <= memory.size();
}

Feature feature_for_attach(ProgType type)
{
	switch (type) {
	case ProgType::kprobe:
		return Feature::kprobe;
	case ProgType::uprobe:
		return Feature::uprobe;
	case ProgType::tracepoint:
		return Feature::tracepoint;
	case ProgType::xdp:
		return Feature::xdp;
	case ProgType::sockops:
		return Feature::sockops;
	case ProgType::lsm:
		return Feature::lsm;
	case ProgType::socket_filter:
		return Feature::sockops; // socket layer gating
	}
	return Feature::tracepoint;
}

} // namespace

BpfInstance::BpfInstance(AbiConfig config)
	: config_(std::move(config)),
	  from_arch_(builtin_arch_profile(config_.object_arch)),
	  to_arch_(builtin_arch_profile(config_.env.arch))
{
}

void BpfInstance::set_error(Errc code, std::string msg)
{
	last_error_ = code;
	last_error_message_ = std::move(msg);
}

std::optional<Errc> BpfInstance::last_error() const
{
	std::lock_guard lock(mutex_);
	return last_error_;
}

std::string BpfInstance::last_error_message() const
{
	std::lock_guard lock(mutex_);
	return last_error_message_;
}

const LoadedObject *BpfInstance::object(uint64_t handle) const
{
	std::lock_guard lock(mutex_);
	auto it = objects_.find(handle);
	return it == objects_.end() ? nullptr : it->second.get();
}

vm::VmEnv BpfInstance::make_vm_env()
{
	vm::VmEnv env;
	env.maps = &maps_;
	env.ktime_ns = config_.clock_ns;
	env.pid_tgid = config_.pid_tgid;
	env.comm = config_.comm;
	return env;
}

uint64_t BpfInstance::load_bpf_object(GuestEnv &guest, uint32_t ptr,
				      uint32_t size)
{
	std::lock_guard lock(mutex_);
	try {
		auto memory = guest.memory();
		if (size == 0)
			raise(Errc::BadArgument, "zero-sized object");
		if (!guest_range_ok(memory, ptr, size))
			raise(Errc::OutOfBoundsGuestPointer,
			      "object bytes outside guest memory");
		// the single copy out of guest memory
		std::vector<uint8_t> bytes(memory.begin() + ptr,
					   memory.begin() + ptr + size);
		counters_.boundary_copies++;

		auto loaded = std::make_shared<LoadedObject>();
		loaded->object = parse_object(bytes);
		const ElfBpfObject &obj = loaded->object;

		loaded->backend = select_backend(obj, config_.env);

		// CO-RE + pt_regs relocation, when the object carries records
		std::map<std::string, std::vector<CoreRelo>> relos_by_section;
		std::optional<BtfTypeGraph> local_btf;
		if (!obj.btf_ext_blob.empty() && !obj.btf_blob.empty()) {
			local_btf = parse_btf(obj.btf_blob);
			relos_by_section = parse_core_relos(obj.btf_ext_blob,
							    obj.btf_blob);
		}

		// create maps
		for (const MapDef &def : obj.map_defs) {
			auto store = maps_.create(def);
			loaded->maps[def.name] = store->handle();
		}

		loaded->images = bind_maps(obj, loaded->maps);

		if (local_btf) {
			const BtfTypeGraph &target =
				config_.target_btf ? *config_.target_btf
						   : *local_btf;
			for (size_t i = 0; i < loaded->images.size(); i++) {
				const ProgramBlob &prog = obj.programs[i];
				auto relos = relos_for_program(
					relos_by_section, prog);
				auto ptregs = find_ptregs_accesses(
					relos, *local_btf, from_arch_);
				// profile-owned slots leave the CO-RE pass
				std::vector<CoreRelo> field_relos;
				for (const CoreRelo &r : relos) {
					bool owned = false;
					for (const auto &a : ptregs)
						if (a.insn_index ==
						    r.insn_off / 8)
							owned = true;
					if (!owned)
						field_relos.push_back(r);
				}
				loaded->images[i] = apply_core_relocations(
					loaded->images[i], field_relos,
					*local_btf, target);
				if (from_arch_.name != to_arch_.name)
					loaded->images[i] = relocate_ptregs(
						loaded->images[i], ptregs,
						from_arch_, to_arch_);
			}
		}

		for (const EbpfProgramImage &img : loaded->images)
			vm::validate_image(img);

		uint64_t handle = next_handle_++;
		objects_.emplace(handle, std::move(loaded));
		return handle;
	} catch (const Error &e) {
		set_error(e.code(), e.what());
		return 0;
	} catch (const std::exception &e) {
		set_error(Errc::BadArgument, e.what());
		return 0;
	}
}

int32_t BpfInstance::close_bpf_object(uint64_t handle)
{
	std::lock_guard lock(mutex_);
	auto it = objects_.find(handle);
	if (it == objects_.end()) {
		set_error(Errc::BadHandle,
			  "close of unknown handle " + std::to_string(handle));
		return kErrBadHandle;
	}
	for (Attachment &a : it->second->links)
		a.active = false; // detach is idempotent
	for (auto &[name, fd] : it->second->maps)
		maps_.destroy(fd);
	objects_.erase(it);
	return kOk;
}

int32_t BpfInstance::attach_bpf_program(GuestEnv &guest, uint64_t handle,
					uint32_t name_ptr, uint32_t target_ptr)
{
	std::lock_guard lock(mutex_);
	auto it = objects_.find(handle);
	if (it == objects_.end()) {
		set_error(Errc::BadHandle, "attach on unknown handle");
		return kErrBadHandle;
	}
	auto memory = guest.memory();
	auto read_string = [&](uint32_t ptr, std::string &out) -> bool {
		if (ptr == 0)
			return false;
		for (uint32_t i = 0; i < kMaxGuestString; i++) {
			if (!guest_range_ok(memory, ptr + i, 1))
				return false;
			char c = char(memory[ptr + i]);
			if (c == '\0')
				return true;
			out.push_back(c);
		}
		return false;
	};

	std::string name;
	std::string target;
	if (!read_string(name_ptr, name)) {
		set_error(Errc::BadString, "program name string invalid");
		return kErrBadArgument;
	}
	if (target_ptr != 0) {
		target.clear();
		if (!read_string(target_ptr, target)) {
			set_error(Errc::BadString,
				  "attach target string invalid");
			return kErrBadArgument;
		}
	}

	const ProgramBlob *prog = it->second->object.find_program(name);
	if (!prog) {
		set_error(Errc::NoSuchProgram,
			  "object has no program '" + name + "'");
		return kErrNotFound;
	}
	if (!config_.env.features.count(feature_for_attach(prog->prog_type)) &&
	    !(prog->prog_type == ProgType::socket_filter &&
	      config_.env.os == OsKind::linux_os)) {
		set_error(Errc::Unsupported,
			  std::string("attach type ") +
				  prog_type_name(prog->prog_type) +
				  " is unsupported on this profile");
		return kErrUnsupported;
	}

	if (target.empty())
		target = prog->section_name;
	int32_t link_id = next_link_id_++;
	it->second->links.push_back({link_id, name, target, true});
	return link_id;
}

std::shared_ptr<MapStore> BpfInstance::object_map(uint64_t handle, int32_t fd)
{
	auto it = objects_.find(handle);
	if (it == objects_.end())
		return nullptr;
	for (const auto &[name, mfd] : it->second->maps)
		if (mfd == fd)
			return maps_.get(fd);
	return nullptr;
}

int32_t BpfInstance::buffer_poll(GuestEnv &guest, uint64_t handle, int32_t fd,
				 uint32_t sample_func, uint32_t ctx,
				 uint32_t data_ptr, uint32_t max_size,
				 int32_t timeout_ms)
{
	std::shared_ptr<MapStore> store;
	{
		std::lock_guard lock(mutex_);
		store = object_map(handle, fd);
		if (!store) {
			set_error(Errc::BadHandle,
				  "poll with unknown handle or fd");
			return kErrBadHandle;
		}
		if (!store->is_ringbuf()) {
			set_error(Errc::NotARingbuf,
				  "fd " + std::to_string(fd) +
					  " is not a ring buffer");
			return kErrBadArgument;
		}
		if (!guest_range_ok(guest.memory(), data_ptr, max_size) ||
		    max_size == 0) {
			set_error(Errc::OutOfBoundsGuestPointer,
				  "poll buffer outside guest memory");
			return kErrOutOfBoundsGuestPointer;
		}
	}
	RingBuffer &rb = store->ring();

	auto deadline = std::chrono::steady_clock::now() +
			std::chrono::milliseconds(timeout_ms < 0 ? 0
								 : timeout_ms);
	int32_t delivered = 0;
	int32_t callback_status = 0;
	for (;;) {
		for (;;) {
			uint32_t len = 0;
			if (!rb.peek_len(len))
				break;
			if (len > max_size) {
				rb.skip_one();
				std::lock_guard lock(mutex_);
				counters_.records_skipped++;
				set_error(Errc::TooLarge,
					  "record of " + std::to_string(len) +
						  " bytes skipped (buffer is " +
						  std::to_string(max_size) +
						  ")");
				continue;
			}
			rb.consume([&](std::span<const uint8_t> payload) {
				// the single copy into guest memory
				auto memory = guest.memory();
				std::memcpy(memory.data() + data_ptr,
					    payload.data(), payload.size());
				{
					std::lock_guard lock(mutex_);
					counters_.boundary_copies++;
					counters_.records_delivered++;
				}
				callback_status = guest.invoke_sample(
					sample_func, ctx, data_ptr,
					uint32_t(payload.size()));
				delivered++;
				return false; // one record per step
			});
			if (callback_status < 0)
				return callback_status;
		}
		if (delivered > 0)
			return delivered;
		if (timeout_ms >= 0 &&
		    std::chrono::steady_clock::now() >= deadline)
			return 0;
		if (interrupt_.exchange(false))
			return 0;
		std::this_thread::sleep_for(std::chrono::microseconds(200));
	}
}

int32_t BpfInstance::map_fd_by_name(GuestEnv &guest, uint64_t handle,
				    uint32_t name_ptr)
{
	std::lock_guard lock(mutex_);
	auto it = objects_.find(handle);
	if (it == objects_.end()) {
		set_error(Errc::BadHandle, "unknown object handle");
		return kErrBadHandle;
	}
	auto memory = guest.memory();
	std::string name;
	for (uint32_t i = 0;; i++) {
		if (i >= kMaxGuestString ||
		    !guest_range_ok(memory, name_ptr + i, 1)) {
			set_error(Errc::BadString, "map name string invalid");
			return kErrBadArgument;
		}
		char c = char(memory[name_ptr + i]);
		if (c == '\0')
			break;
		name.push_back(c);
	}
	auto mit = it->second->maps.find(name);
	if (mit == it->second->maps.end()) {
		set_error(Errc::NotFound, "object has no map '" + name + "'");
		return kErrNotFound;
	}
	return mit->second;
}

int32_t BpfInstance::map_operate(GuestEnv &guest, int32_t fd, int32_t cmd,
				 uint32_t key_ptr, uint32_t value_ptr,
				 uint32_t next_key_ptr, uint64_t flags)
{
	std::lock_guard lock(mutex_);
	auto store = maps_.get(fd);
	if (!store) {
		set_error(Errc::BadHandle,
			  "map fd " + std::to_string(fd) + " is not live");
		return kErrBadHandle;
	}
	if (store->is_ringbuf()) {
		set_error(Errc::BadArgument,
			  "map commands do not apply to ring buffers");
		return kErrBadArgument;
	}
	const MapDef &def = store->def();
	auto memory = guest.memory();

	auto in_span = [&](uint32_t ptr,
			   uint32_t size) -> std::span<const uint8_t> {
		if (!guest_range_ok(memory, ptr, size))
			raise(Errc::OutOfBoundsGuestPointer,
			      "map operand outside guest memory");
		return {memory.data() + ptr, size};
	};
	auto out_span = [&](uint32_t ptr, uint32_t size) -> std::span<uint8_t> {
		if (!guest_range_ok(memory, ptr, size))
			raise(Errc::OutOfBoundsGuestPointer,
			      "map operand outside guest memory");
		return {memory.data() + ptr, size};
	};

	try {
		MapStatus st = MapStatus::bad_command;
		switch (cmd) {
		case mapcmd::kLookup: {
			if (key_ptr == 0 || value_ptr == 0)
				raise(Errc::OutOfBoundsGuestPointer,
				      "null map operand");
			std::vector<uint8_t> key(def.key_size);
			std::memcpy(key.data(), in_span(key_ptr, def.key_size)
						       .data(),
				    def.key_size);
			std::vector<uint8_t> value(def.value_size);
			st = store->lookup(key, value);
			if (st == MapStatus::ok) {
				auto out = out_span(value_ptr, def.value_size);
				std::memcpy(out.data(), value.data(),
					    def.value_size);
				counters_.boundary_copies++;
			}
			break;
		}
		case mapcmd::kUpdate: {
			if (key_ptr == 0 || value_ptr == 0)
				raise(Errc::OutOfBoundsGuestPointer,
				      "null map operand");
			auto key = in_span(key_ptr, def.key_size);
			auto value = in_span(value_ptr, def.value_size);
			counters_.boundary_copies++;
			st = store->update(key, value, flags);
			break;
		}
		case mapcmd::kDelete: {
			if (key_ptr == 0)
				raise(Errc::OutOfBoundsGuestPointer,
				      "null map operand");
			st = store->erase(in_span(key_ptr, def.key_size));
			break;
		}
		case mapcmd::kGetNextKey: {
			if (next_key_ptr == 0)
				raise(Errc::OutOfBoundsGuestPointer,
				      "null next_key operand");
			std::span<const uint8_t> key{};
			if (key_ptr != 0)
				key = in_span(key_ptr, def.key_size);
			auto next = out_span(next_key_ptr, def.key_size);
			st = store->get_next_key(key, next);
			if (st == MapStatus::ok)
				counters_.boundary_copies++;
			break;
		}
		default:
			set_error(Errc::BadCommand,
				  "unknown map command " + std::to_string(cmd));
			return kErrBadArgument;
		}
		if (st != MapStatus::ok)
			set_error(map_status_errc(st), map_status_name(st));
		return map_status_code(st);
	} catch (const Error &e) {
		set_error(e.code(), e.what());
		return errc_to_code(e.code());
	}
}

int BpfInstance::trigger_event(std::string_view source,
			       std::span<const uint8_t> ctx_bytes)
{
	// snapshot the work under the lock, execute outside it
	struct Job {
		EbpfProgramImage image;
	};
	std::vector<Job> jobs;
	{
		std::lock_guard lock(mutex_);
		for (auto &[handle, obj] : objects_) {
			for (const Attachment &a : obj->links) {
				if (!a.active || a.target != source)
					continue;
				for (const EbpfProgramImage &img : obj->images)
					if (img.name == a.program)
						jobs.push_back({img});
			}
		}
	}
	vm::VmEnv env = make_vm_env();
	vm::VmOptions opts;
	opts.insn_budget = config_.insn_budget;
	int executed = 0;
	for (Job &job : jobs) {
		std::vector<uint8_t> ctx(ctx_bytes.begin(), ctx_bytes.end());
		vm::execute(job.image, ctx, env, opts);
		executed++;
	}
	return executed;
}

bool BpfInstance::has_attachment(std::string_view source) const
{
	std::lock_guard lock(mutex_);
	for (const auto &[handle, obj] : objects_)
		for (const Attachment &a : obj->links)
			if (a.active && a.target == source)
				return true;
	return false;
}

bool BpfInstance::wait_for_attachment(std::string_view source, int timeout_ms)
{
	auto deadline = std::chrono::steady_clock::now() +
			std::chrono::milliseconds(timeout_ms);
	while (!has_attachment(source)) {
		if (std::chrono::steady_clock::now() >= deadline)
			return false;
		std::this_thread::sleep_for(std::chrono::milliseconds(1));
	}
	return true;
}

namespace {

/// GuestEnv over a live Wasm instance.
class WasmGuestEnv : public GuestEnv {
    public:
	explicit WasmGuestEnv(wasm::Instance &instance) : instance_(instance)
	{
	}
	std::span<uint8_t> memory() override
	{
		return instance_.memory();
	}
	int32_t invoke_sample(uint32_t func_index, uint32_t ctx,
			      uint32_t data_ptr, uint32_t size) override
	{
		using wasm::ValType;
		wasm::FuncType expected{
			{ValType::i32, ValType::i32, ValType::i32},
			{ValType::i32}};
		std::array<uint64_t, 3> args{ctx, data_ptr, size};
		return int32_t(
			uint32_t(instance_.call_table(func_index, args,
						      expected)));
	}

    private:
	wasm::Instance &instance_;
};

} // namespace

void register_wasm_bpf_abi(wasm::ImportTable &imports,
			   std::shared_ptr<BpfInstance> state)
{
	using wasm::ValType;
	const std::string ns = "wasm_bpf";
	auto sig = [](std::initializer_list<ValType> params,
		      std::initializer_list<ValType> results) {
		return wasm::FuncType{params, results};
	};

	imports.add(ns, "wasm_load_bpf_object",
		    {sig({ValType::i32, ValType::i32}, {ValType::i64}),
		     [state](wasm::Instance &in,
			     std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     WasmGuestEnv env(in);
			     results[0] = state->load_bpf_object(
				     env, uint32_t(args[0]),
				     uint32_t(args[1]));
		     }});
	imports.add(ns, "wasm_close_bpf_object",
		    {sig({ValType::i64}, {ValType::i32}),
		     [state](wasm::Instance &, std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     results[0] = uint64_t(uint32_t(
				     state->close_bpf_object(args[0])));
		     }});
	imports.add(ns, "wasm_attach_bpf_program",
		    {sig({ValType::i64, ValType::i32, ValType::i32},
			 {ValType::i32}),
		     [state](wasm::Instance &in,
			     std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     WasmGuestEnv env(in);
			     results[0] = uint64_t(uint32_t(
				     state->attach_bpf_program(
					     env, args[0], uint32_t(args[1]),
					     uint32_t(args[2]))));
		     }});
	imports.add(ns, "wasm_bpf_buffer_poll",
		    {sig({ValType::i64, ValType::i32, ValType::i32,
			  ValType::i32, ValType::i32, ValType::i32,
			  ValType::i32},
			 {ValType::i32}),
		     [state](wasm::Instance &in,
			     std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     WasmGuestEnv env(in);
			     results[0] = uint64_t(uint32_t(
				     state->buffer_poll(
					     env, args[0],
					     int32_t(uint32_t(args[1])),
					     uint32_t(args[2]),
					     uint32_t(args[3]),
					     uint32_t(args[4]),
					     uint32_t(args[5]),
					     int32_t(uint32_t(args[6])))));
		     }});
	imports.add(ns, "wasm_bpf_map_fd_by_name",
		    {sig({ValType::i64, ValType::i32}, {ValType::i32}),
		     [state](wasm::Instance &in,
			     std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     WasmGuestEnv env(in);
			     results[0] = uint64_t(uint32_t(
				     state->map_fd_by_name(
					     env, args[0],
					     uint32_t(args[1]))));
		     }});
	imports.add(ns, "wasm_bpf_map_operate",
		    {sig({ValType::i32, ValType::i32, ValType::i32,
			  ValType::i32, ValType::i32, ValType::i64},
			 {ValType::i32}),
		     [state](wasm::Instance &in,
			     std::span<const uint64_t> args,
			     std::span<uint64_t> results) {
			     WasmGuestEnv env(in);
			     results[0] = uint64_t(uint32_t(
				     state->map_operate(
					     env,
					     int32_t(uint32_t(args[0])),
					     int32_t(uint32_t(args[1])),
					     uint32_t(args[2]),
					     uint32_t(args[3]),
					     uint32_t(args[4]), args[5])));
		     }});
}

} // namespace wasmbpf::abi
