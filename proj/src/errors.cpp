// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

const char *errc_name(Errc code)
{
	switch (code) {
	case Errc::NotElf:
		return "NotElf";
	case Errc::WrongMachine:
		return "WrongMachine";
	case Errc::MalformedSection:
		return "MalformedSection";
	case Errc::NoPrograms:
		return "NoPrograms";
	case Errc::LegacyMapsSection:
		return "LegacyMapsSection";
	case Errc::BadLength:
		return "BadLength";
	case Errc::BadRegister:
		return "BadRegister";
	case Errc::TruncatedLdImm64:
		return "TruncatedLdImm64";
	case Errc::UnboundMap:
		return "UnboundMap";
	case Errc::BigEndianObject:
		return "BigEndianObject";
	case Errc::BadMagic:
		return "BadMagic";
	case Errc::TruncatedHeader:
		return "TruncatedHeader";
	case Errc::DanglingTypeRef:
		return "DanglingTypeRef";
	case Errc::BadStringOffset:
		return "BadStringOffset";
	case Errc::NotAStruct:
		return "NotAStruct";
	case Errc::BadAccessPath:
		return "BadAccessPath";
	case Errc::BitfieldUnsupported:
		return "BitfieldUnsupported";
	case Errc::UnsupportedReloKind:
		return "UnsupportedReloKind";
	case Errc::TargetFieldMissing:
		return "TargetFieldMissing";
	case Errc::RelocOutOfRange:
		return "RelocOutOfRange";
	case Errc::OffsetMismatch:
		return "OffsetMismatch";
	case Errc::ParamIndexOutOfRange:
		return "ParamIndexOutOfRange";
	case Errc::UnsizedType:
		return "UnsizedType";
	case Errc::NotFound:
		return "NotFound";
	case Errc::AlreadyExists:
		return "AlreadyExists";
	case Errc::CapacityExceeded:
		return "CapacityExceeded";
	case Errc::BadHandle:
		return "BadHandle";
	case Errc::IndexOutOfRange:
		return "IndexOutOfRange";
	case Errc::Busy:
		return "Busy";
	case Errc::TooLarge:
		return "TooLarge";
	case Errc::DoubleSubmit:
		return "DoubleSubmit";
	case Errc::UnsupportedMapType:
		return "UnsupportedMapType";
	case Errc::OutOfBounds:
		return "OutOfBounds";
	case Errc::BudgetExhausted:
		return "BudgetExhausted";
	case Errc::UnknownHelper:
		return "UnknownHelper";
	case Errc::BadJump:
		return "BadJump";
	case Errc::BadInstruction:
		return "BadInstruction";
	case Errc::NoSuchProgram:
		return "NoSuchProgram";
	case Errc::OutOfBoundsGuestPointer:
		return "OutOfBoundsGuestPointer";
	case Errc::Unsupported:
		return "Unsupported";
	case Errc::BadArgument:
		return "BadArgument";
	case Errc::NotARingbuf:
		return "NotARingbuf";
	case Errc::BadCallback:
		return "BadCallback";
	case Errc::BadCommand:
		return "BadCommand";
	case Errc::BadString:
		return "BadString";
	case Errc::BadConfig:
		return "BadConfig";
	case Errc::BtfNotFound:
		return "BtfNotFound";
	case Errc::ParseError:
		return "ParseError";
	case Errc::NotAWasmModule:
		return "NotAWasmModule";
	case Errc::IoError:
		return "IoError";
	case Errc::DigestMismatch:
		return "DigestMismatch";
	case Errc::MissingBlob:
		return "MissingBlob";
	case Errc::BadIndex:
		return "BadIndex";
	case Errc::ModuleInvalid:
		return "ModuleInvalid";
	case Errc::MissingImport:
		return "MissingImport";
	case Errc::GuestTrap:
		return "GuestTrap";
	case Errc::FixtureMissing:
		return "FixtureMissing";
	}
	return "UnknownError";
}

} // namespace wasmbpf
