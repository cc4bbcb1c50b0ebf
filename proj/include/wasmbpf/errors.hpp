// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#pragma once

#include <stdexcept>
#include <string>

namespace wasmbpf {

enum class Errc {
	// elf object parsing
	NotElf,
	WrongMachine,
	MalformedSection,
	NoPrograms,
	LegacyMapsSection,
	BadLength,
	BadRegister,
	TruncatedLdImm64,
	UnboundMap,
	BigEndianObject,
	// btf / relocation
	BadMagic,
	TruncatedHeader,
	DanglingTypeRef,
	BadStringOffset,
	NotAStruct,
	BadAccessPath,
	BitfieldUnsupported,
	UnsupportedReloKind,
	TargetFieldMissing,
	RelocOutOfRange,
	OffsetMismatch,
	ParamIndexOutOfRange,
	UnsizedType,
	// maps runtime
	NotFound,
	AlreadyExists,
	CapacityExceeded,
	BadHandle,
	IndexOutOfRange,
	Busy,
	TooLarge,
	DoubleSubmit,
	UnsupportedMapType,
	// vm traps
	OutOfBounds,
	BudgetExhausted,
	UnknownHelper,
	BadJump,
	BadInstruction,
	// host abi
	NoSuchProgram,
	OutOfBoundsGuestPointer,
	Unsupported,
	BadArgument,
	NotARingbuf,
	BadCallback,
	BadCommand,
	BadString,
	// runtime selection
	BadConfig,
	BtfNotFound,
	ParseError,
	// packaging
	NotAWasmModule,
	IoError,
	DigestMismatch,
	MissingBlob,
	BadIndex,
	// cli
	ModuleInvalid,
	MissingImport,
	GuestTrap,
	FixtureMissing,
};

const char *errc_name(Errc code);

class Error : public std::runtime_error {
    public:
	Error(Errc code, const std::string &msg)
		: std::runtime_error(std::string(errc_name(code)) + ": " + msg),
		  code_(code)
	{
	}

	Errc code() const
	{
		return code_;
	}

    private:
	Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string &msg)
{
	throw Error(code, msg);
}

} // namespace wasmbpf
