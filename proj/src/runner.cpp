// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/runner.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "wasmbpf/errors.hpp"
#include "wasmbpf/oci.hpp"
#include "wasmbpf/wasm/interp.hpp"
#include "wasmbpf/wasm/wasi.hpp"

namespace wasmbpf {

namespace {

std::vector<uint8_t> load_input(const std::filesystem::path &input)
{
	if (std::filesystem::is_directory(input))
		return oci::unpack(input).module_bytes;
	std::ifstream in(input, std::ios::binary);
	if (!in)
		raise(Errc::IoError, "cannot open " + input.string());
	return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
				    std::istreambuf_iterator<char>());
}

uint8_t hex_nibble(char c)
{
	if (c >= '0' && c <= '9')
		return uint8_t(c - '0');
	if (c >= 'a' && c <= 'f')
		return uint8_t(c - 'a' + 10);
	if (c >= 'A' && c <= 'F')
		return uint8_t(c - 'A' + 10);
	raise(Errc::BadConfig, std::string("bad hex digit '") + c + "'");
}

} // namespace

std::vector<ScriptEvent> parse_event_script(const std::string &text)
{
	std::vector<ScriptEvent> events;
	std::istringstream in(text);
	std::string line;
	int lineno = 0;
	while (std::getline(in, line)) {
		lineno++;
		auto hash = line.find('#');
		if (hash != std::string::npos)
			line.resize(hash);
		std::istringstream ls(line);
		std::string verb;
		if (!(ls >> verb))
			continue;
		if (verb != "trigger")
			raise(Errc::BadConfig,
			      "script line " + std::to_string(lineno) +
				      ": unknown verb '" + verb + "'");
		ScriptEvent ev;
		if (!(ls >> ev.source))
			raise(Errc::BadConfig,
			      "script line " + std::to_string(lineno) +
				      ": missing event source");
		std::string hex;
		if (ls >> hex) {
			if (hex.size() % 2 != 0)
				raise(Errc::BadConfig,
				      "script line " + std::to_string(lineno) +
					      ": odd hex length");
			for (size_t i = 0; i < hex.size(); i += 2)
				ev.ctx.push_back(uint8_t(
					(hex_nibble(hex[i]) << 4) |
					hex_nibble(hex[i + 1])));
		}
		events.push_back(std::move(ev));
	}
	return events;
}

abi::AbiConfig
make_abi_config(const std::optional<std::filesystem::path> &env_profile,
		const std::optional<std::string> &arch_override,
		const std::vector<std::filesystem::path> &btf_paths,
		const std::function<void(std::string_view)> &log)
{
	abi::AbiConfig config;
	config.env = probe_environment(env_profile);
	if (arch_override)
		config.env.arch = *arch_override;
	if (!btf_paths.empty())
		config.env.btf_search_paths.insert(
			config.env.btf_search_paths.begin(), btf_paths.begin(),
			btf_paths.end());

	if (!config.env.btf_search_paths.empty()) {
		try {
			BtfSearchResult found = find_target_btf(config.env);
			for (const std::string &w : found.warnings)
				if (log)
					log("warning: " + w + "\n");
			if (log)
				log("using target BTF " +
				    found.found.string() + "\n");
			config.target_btf =
				std::make_shared<BtfTypeGraph>(
					std::move(found.graph));
		} catch (const Error &e) {
			if (log)
				log(std::string("warning: ") + e.what() +
				    "; running with compiled-in offsets\n");
		}
	}
	return config;
}

RunResult run_module(const RunOptions &options)
{
	RunResult result;
	auto out = options.out ? options.out
			       : [](std::string_view s) { std::cout << s; };
	auto log = options.log ? options.log
			       : [](std::string_view s) { std::cerr << s; };

	std::vector<uint8_t> module_bytes;
	wasm::Module module;
	try {
		module_bytes = load_input(options.input);
		module = wasm::decode_module(module_bytes);
	} catch (const Error &e) {
		result.exit_code = kExitLoadFailure;
		result.trap_message = e.what();
		return result;
	}

	auto state = std::make_shared<abi::BpfInstance>(make_abi_config(
		options.env_profile, options.arch_override, options.btf_paths,
		log));

	wasm::ImportTable imports;
	wasm::register_wasi(imports, out);
	abi::register_wasm_bpf_abi(imports, state);

	std::vector<ScriptEvent> events;
	if (options.script) {
		std::ifstream in(*options.script);
		if (!in) {
			result.exit_code = kExitUsage;
			result.trap_message = "cannot open script " +
					      options.script->string();
			return result;
		}
		std::ostringstream buf;
		buf << in.rdbuf();
		try {
			events = parse_event_script(buf.str());
		} catch (const Error &e) {
			result.exit_code = kExitUsage;
			result.trap_message = e.what();
			return result;
		}
	}

	std::atomic<bool> guest_done{false};
	std::thread script_thread;
	if (!events.empty()) {
		script_thread = std::thread([&] {
			for (const ScriptEvent &ev : events) {
				if (guest_done.load())
					return;
				// wait for the guest to attach before firing
				if (!state->wait_for_attachment(ev.source,
								5000))
					continue;
				state->trigger_event(ev.source, ev.ctx);
			}
		});
	}
	std::thread watchdog;
	if (options.timeout_ms > 0) {
		watchdog = std::thread([&] {
			auto deadline =
				std::chrono::steady_clock::now() +
				std::chrono::milliseconds(options.timeout_ms);
			while (!guest_done.load()) {
				if (std::chrono::steady_clock::now() >=
				    deadline) {
					state->interrupt_polls();
					std::this_thread::sleep_for(
						std::chrono::milliseconds(10));
				} else {
					std::this_thread::sleep_for(
						std::chrono::milliseconds(5));
				}
			}
		});
	}

	try {
		wasm::Instance instance(module, imports);
		if (!instance.has_export("_start"))
			raise(Errc::ModuleInvalid,
			      "module does not export _start");
		instance.call_export("_start");
		result.exit_code = kExitOk;
	} catch (const wasm::ProcExit &exit) {
		result.exit_code = exit.code;
	} catch (const Error &e) {
		if (e.code() == Errc::MissingImport ||
		    e.code() == Errc::ModuleInvalid) {
			result.exit_code = kExitLoadFailure;
		} else {
			result.exit_code = kExitGuestTrap;
			if (auto last = state->last_error())
				result.trap_message =
					std::string(e.what()) +
					" (last host-abi error: " +
					state->last_error_message() + ")";
		}
		if (result.trap_message.empty())
			result.trap_message = e.what();
	}

	guest_done.store(true);
	if (script_thread.joinable())
		script_thread.join();
	if (watchdog.joinable())
		watchdog.join();
	return result;
}

} // namespace wasmbpf
