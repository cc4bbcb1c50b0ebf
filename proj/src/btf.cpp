// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/btf.hpp"

#include <algorithm>
#include <sstream>

#include "wasmbpf/errors.hpp"

namespace wasmbpf {

namespace {

constexpr uint16_t kBtfMagic = 0xeB9F;
constexpr uint16_t kBtfMagicSwapped = 0x9FeB;

struct Reader {
	std::span<const uint8_t> buf;
	size_t pos = 0;
	bool swap = false;

	void need(size_t n, const char *what) const
	{
		if (pos + n > buf.size())
			raise(Errc::TruncatedHeader,
			      std::string("BTF blob truncated reading ") + what);
	}
	uint8_t u8(const char *what)
	{
		need(1, what);
		return buf[pos++];
	}
	uint16_t u16(const char *what)
	{
		need(2, what);
		uint16_t v = uint16_t(buf[pos]) | (uint16_t(buf[pos + 1]) << 8);
		pos += 2;
		return swap ? uint16_t((v >> 8) | (v << 8)) : v;
	}
	uint32_t u32(const char *what)
	{
		need(4, what);
		uint32_t v = uint32_t(buf[pos]) | (uint32_t(buf[pos + 1]) << 8) |
			     (uint32_t(buf[pos + 2]) << 16) |
			     (uint32_t(buf[pos + 3]) << 24);
		pos += 4;
		return swap ? __builtin_bswap32(v) : v;
	}
};

std::string read_string(std::span<const uint8_t> strings, uint32_t off)
{
	if (off >= strings.size())
		raise(Errc::BadStringOffset,
		      "string offset " + std::to_string(off) +
			      " past string section of size " +
			      std::to_string(strings.size()));
	auto end = std::find(strings.begin() + off, strings.end(), uint8_t(0));
	if (end == strings.end())
		raise(Errc::BadStringOffset,
		      "unterminated string at offset " + std::to_string(off));
	return std::string(strings.begin() + off, end);
}

uint64_t align_up(uint64_t v, uint64_t a)
{
	return (v + a - 1) / a * a;
}

} // namespace

const char *btf_kind_name(BtfKind kind)
{
	switch (kind) {
	case BtfKind::Void:
		return "void";
	case BtfKind::Int:
		return "int";
	case BtfKind::Ptr:
		return "ptr";
	case BtfKind::Array:
		return "array";
	case BtfKind::Struct:
		return "struct";
	case BtfKind::Union:
		return "union";
	case BtfKind::Enum:
		return "enum";
	case BtfKind::Fwd:
		return "fwd";
	case BtfKind::Typedef:
		return "typedef";
	case BtfKind::Volatile:
		return "volatile";
	case BtfKind::Const:
		return "const";
	case BtfKind::Restrict:
		return "restrict";
	case BtfKind::Func:
		return "func";
	case BtfKind::FuncProto:
		return "func_proto";
	case BtfKind::Var:
		return "var";
	case BtfKind::DataSec:
		return "datasec";
	case BtfKind::Float:
		return "float";
	case BtfKind::DeclTag:
		return "decl_tag";
	case BtfKind::TypeTag:
		return "type_tag";
	case BtfKind::Enum64:
		return "enum64";
	}
	return "unknown";
}

BtfTypeGraph::BtfTypeGraph()
{
	types_.emplace_back(); // id 0: void
}

const BtfType &BtfTypeGraph::type(uint32_t id) const
{
	if (id >= types_.size())
		raise(Errc::DanglingTypeRef,
		      "type id " + std::to_string(id) + " out of range (" +
			      std::to_string(types_.size()) + " types)");
	return types_[id];
}

std::optional<uint32_t> BtfTypeGraph::find_by_name(BtfKind kind,
						   std::string_view name) const
{
	for (uint32_t i = 1; i < types_.size(); i++)
		if (types_[i].kind == kind && types_[i].name == name)
			return i;
	return std::nullopt;
}

uint32_t BtfTypeGraph::resolve(uint32_t id) const
{
	for (int depth = 0; depth < 64; depth++) {
		const BtfType &t = type(id);
		switch (t.kind) {
		case BtfKind::Typedef:
		case BtfKind::Volatile:
		case BtfKind::Const:
		case BtfKind::Restrict:
		case BtfKind::TypeTag:
			id = t.ref_type;
			break;
		default:
			return id;
		}
	}
	raise(Errc::DanglingTypeRef, "typedef chain too deep at id " +
					     std::to_string(id));
}

uint64_t BtfTypeGraph::type_size(uint32_t id) const
{
	const BtfType &t = type(resolve(id));
	switch (t.kind) {
	case BtfKind::Int:
	case BtfKind::Struct:
	case BtfKind::Union:
	case BtfKind::Enum:
	case BtfKind::Enum64:
	case BtfKind::Float:
	case BtfKind::DataSec:
		return t.size;
	case BtfKind::Ptr:
		return 8; // eBPF-side pointer width
	case BtfKind::Array: {
		return type_size(t.array_elem_type) * t.array_nelems;
	}
	default:
		raise(Errc::UnsizedType,
		      std::string("type of kind ") + btf_kind_name(t.kind) +
			      " has no size (id " + std::to_string(id) + ")");
	}
}

uint64_t BtfTypeGraph::type_align(uint32_t id) const
{
	const BtfType &t = type(resolve(id));
	switch (t.kind) {
	case BtfKind::Int:
	case BtfKind::Enum:
	case BtfKind::Enum64:
	case BtfKind::Float:
		return std::min<uint64_t>(t.size ? t.size : 1, 8);
	case BtfKind::Ptr:
		return 8;
	case BtfKind::Array:
		return type_align(t.array_elem_type);
	case BtfKind::Struct:
	case BtfKind::Union: {
		uint64_t a = 1;
		for (const BtfMember &m : t.members)
			a = std::max(a, type_align(m.type_id));
		return a;
	}
	default:
		return 1;
	}
}

uint32_t BtfTypeGraph::add_type(BtfType t)
{
	types_.push_back(std::move(t));
	return static_cast<uint32_t>(types_.size() - 1);
}

BtfTypeGraph parse_btf(std::span<const uint8_t> blob)
{
	Reader r{blob};
	uint16_t magic = r.u16("magic");
	if (magic == kBtfMagicSwapped)
		r.swap = true;
	else if (magic != kBtfMagic)
		raise(Errc::BadMagic,
		      "BTF magic 0x" + [&] {
			      std::ostringstream os;
			      os << std::hex << magic;
			      return os.str();
		      }());
	r.u8("version");
	r.u8("flags");
	uint32_t hdr_len = r.u32("hdr_len");
	uint32_t type_off = r.u32("type_off");
	uint32_t type_len = r.u32("type_len");
	uint32_t str_off = r.u32("str_off");
	uint32_t str_len = r.u32("str_len");
	if (hdr_len < 24)
		raise(Errc::TruncatedHeader, "BTF header shorter than 24 bytes");
	if (size_t(hdr_len) > blob.size())
		raise(Errc::TruncatedHeader, "BTF hdr_len past end of blob");

	auto section = [&](uint32_t off, uint32_t len,
			   const char *what) -> std::span<const uint8_t> {
		uint64_t start = uint64_t(hdr_len) + off;
		if (start + len > blob.size())
			raise(Errc::TruncatedHeader,
			      std::string("BTF ") + what +
				      " section past end of blob");
		return blob.subspan(start, len);
	};
	auto types_bytes = section(type_off, type_len, "type");
	auto strings = section(str_off, str_len, "string");

	BtfTypeGraph graph;
	Reader tr{types_bytes, 0, r.swap};
	while (tr.pos < types_bytes.size()) {
		uint32_t name_off = tr.u32("type name_off");
		uint32_t info = tr.u32("type info");
		uint32_t size_or_type = tr.u32("type size");

		BtfType t;
		uint32_t kind_raw = (info >> 24) & 0x1f;
		uint32_t vlen = info & 0xffff;
		t.kind_flag = (info >> 31) & 1;
		if (kind_raw > uint32_t(BtfKind::Enum64))
			raise(Errc::MalformedSection,
			      "unknown BTF kind " + std::to_string(kind_raw));
		t.kind = BtfKind(kind_raw);
		if (name_off)
			t.name = read_string(strings, name_off);

		switch (t.kind) {
		case BtfKind::Int: {
			t.size = size_or_type;
			uint32_t data = tr.u32("int data");
			t.int_bits = data & 0xff;
			t.int_signed = (data >> 24) & 0x1;
			break;
		}
		case BtfKind::Ptr:
		case BtfKind::Typedef:
		case BtfKind::Volatile:
		case BtfKind::Const:
		case BtfKind::Restrict:
		case BtfKind::Func:
		case BtfKind::TypeTag:
			t.ref_type = size_or_type;
			break;
		case BtfKind::Fwd:
			break;
		case BtfKind::Array: {
			t.array_elem_type = tr.u32("array elem");
			tr.u32("array index type");
			t.array_nelems = tr.u32("array nelems");
			break;
		}
		case BtfKind::Struct:
		case BtfKind::Union: {
			t.size = size_or_type;
			uint32_t prev_off = 0;
			for (uint32_t i = 0; i < vlen; i++) {
				BtfMember m;
				uint32_t mname = tr.u32("member name");
				m.type_id = tr.u32("member type");
				uint32_t moff = tr.u32("member offset");
				if (mname)
					m.name = read_string(strings, mname);
				if (t.kind_flag) {
					m.bitfield_size = moff >> 24;
					m.bit_offset = moff & 0xffffff;
				} else {
					m.bit_offset = moff;
				}
				if (t.kind == BtfKind::Struct &&
				    m.bit_offset < prev_off)
					raise(Errc::MalformedSection,
					      "struct " + t.name +
						      " member offsets decrease");
				if (t.kind == BtfKind::Struct)
					prev_off = m.bit_offset;
				t.members.push_back(std::move(m));
			}
			break;
		}
		case BtfKind::Enum: {
			t.size = size_or_type;
			for (uint32_t i = 0; i < vlen; i++) {
				uint32_t ename = tr.u32("enum name");
				int32_t val = int32_t(tr.u32("enum value"));
				t.enum_values.emplace_back(
					ename ? read_string(strings, ename) : "",
					val);
			}
			break;
		}
		case BtfKind::Enum64: {
			t.size = size_or_type;
			for (uint32_t i = 0; i < vlen; i++) {
				uint32_t ename = tr.u32("enum64 name");
				uint32_t lo = tr.u32("enum64 lo");
				uint32_t hi = tr.u32("enum64 hi");
				t.enum_values.emplace_back(
					ename ? read_string(strings, ename) : "",
					int64_t((uint64_t(hi) << 32) | lo));
			}
			break;
		}
		case BtfKind::FuncProto: {
			t.ref_type = size_or_type; // return type
			for (uint32_t i = 0; i < vlen; i++) {
				tr.u32("param name");
				t.proto_params.push_back(tr.u32("param type"));
			}
			break;
		}
		case BtfKind::Var: {
			t.ref_type = size_or_type;
			tr.u32("var linkage");
			break;
		}
		case BtfKind::DataSec: {
			t.size = size_or_type;
			for (uint32_t i = 0; i < vlen; i++) {
				BtfVarSecInfo v;
				v.type_id = tr.u32("datasec var type");
				v.offset = tr.u32("datasec var offset");
				v.size = tr.u32("datasec var size");
				t.vars.push_back(v);
			}
			break;
		}
		case BtfKind::DeclTag: {
			t.ref_type = size_or_type;
			tr.u32("decl tag component");
			break;
		}
		case BtfKind::Float:
			t.size = size_or_type;
			break;
		case BtfKind::Void:
			raise(Errc::MalformedSection, "explicit void type entry");
		}
		graph.types_.push_back(std::move(t));
	}

	// reject dangling references up front
	uint32_t n = uint32_t(graph.types_.size());
	auto check = [&](uint32_t ref, uint32_t id) {
		if (ref >= n)
			raise(Errc::DanglingTypeRef,
			      "type " + std::to_string(id) + " references id " +
				      std::to_string(ref) + " of " +
				      std::to_string(n));
	};
	for (uint32_t id = 1; id < n; id++) {
		const BtfType &t = graph.types_[id];
		if (t.ref_type)
			check(t.ref_type, id);
		if (t.kind == BtfKind::Array)
			check(t.array_elem_type, id);
		for (const BtfMember &m : t.members)
			check(m.type_id, id);
		for (const BtfVarSecInfo &v : t.vars)
			check(v.type_id, id);
		for (uint32_t p : t.proto_params)
			check(p, id);
	}
	return graph;
}

uint64_t field_byte_offset(const BtfTypeGraph &graph, uint32_t type_id,
			   std::span<const uint32_t> access)
{
	uint32_t id = graph.resolve(type_id);
	{
		const BtfType &root = graph.type(id);
		if (root.kind != BtfKind::Struct && root.kind != BtfKind::Union)
			raise(Errc::NotAStruct,
			      std::string("access path roots at ") +
				      btf_kind_name(root.kind) + " '" +
				      root.name + "'");
	}
	if (access.empty())
		raise(Errc::BadAccessPath, "empty access path");

	uint64_t offset = 0;
	for (size_t step = 0; step < access.size(); step++) {
		uint32_t idx = access[step];
		const BtfType &t = graph.type(graph.resolve(id));
		switch (t.kind) {
		case BtfKind::Struct:
		case BtfKind::Union: {
			if (idx >= t.members.size())
				raise(Errc::BadAccessPath,
				      "member index " + std::to_string(idx) +
					      " past " +
					      std::to_string(t.members.size()) +
					      " members of '" + t.name + "'");
			const BtfMember &m = t.members[idx];
			if (m.bitfield_size != 0 || m.bit_offset % 8 != 0)
				raise(Errc::BitfieldUnsupported,
				      "member '" + m.name + "' of '" + t.name +
					      "' is a bitfield");
			offset += m.bit_offset / 8;
			id = m.type_id;
			break;
		}
		case BtfKind::Array: {
			if (idx >= t.array_nelems)
				raise(Errc::BadAccessPath,
				      "array index " + std::to_string(idx) +
					      " past " +
					      std::to_string(t.array_nelems) +
					      " elements");
			offset += graph.type_size(t.array_elem_type) * idx;
			id = t.array_elem_type;
			break;
		}
		default:
			raise(Errc::BadAccessPath,
			      std::string("cannot index into ") +
				      btf_kind_name(t.kind));
		}
	}
	return offset;
}

namespace {

struct LayoutWalker {
	const BtfTypeGraph &graph;
	LayoutReport &report;
	uint32_t wasm_ptr_width;

	void walk(uint32_t id, const std::string &path, uint64_t base)
	{
		const BtfType &t = graph.type(graph.resolve(id));
		switch (t.kind) {
		case BtfKind::Ptr:
			report.violations.push_back(
				"pointer member at '" + path + "'");
			break;
		case BtfKind::Union: {
			for (const BtfMember &m : t.members)
				walk(m.type_id,
				     path + "." + (m.name.empty() ? "<anon>"
							          : m.name),
				     base + m.bit_offset / 8);
			break;
		}
		case BtfKind::Struct: {
			for (const BtfMember &m : t.members) {
				std::string mpath =
					path + "." +
					(m.name.empty() ? "<anon>" : m.name);
				if (m.bitfield_size != 0 ||
				    m.bit_offset % 8 != 0) {
					report.violations.push_back(
						"bitfield member at '" + mpath +
						"'");
					continue;
				}
				walk(m.type_id, mpath, base + m.bit_offset / 8);
			}
			break;
		}
		case BtfKind::Array:
			if (t.array_nelems > 0)
				walk(t.array_elem_type, path + "[0]", base);
			break;
		case BtfKind::Int:
		case BtfKind::Enum:
		case BtfKind::Enum64:
		case BtfKind::Float:
			break;
		default:
			report.violations.push_back(
				std::string("unsupported member kind ") +
				btf_kind_name(t.kind) + " at '" + path + "'");
		}
	}

	// C layout under a given pointer width; pointers already rejected, so
	// the only width-sensitive primitive is long double (absent in BTF).
	// Sizes therefore match across widths when alignment does; verify by
	// recomputing the natural layout and comparing to recorded offsets.
	void check_natural(uint32_t id, const std::string &path)
	{
		const BtfType &t = graph.type(graph.resolve(id));
		if (t.kind != BtfKind::Struct)
			return;
		uint64_t cursor = 0;
		uint64_t max_align = 1;
		for (const BtfMember &m : t.members) {
			if (m.bitfield_size != 0 || m.bit_offset % 8 != 0)
				continue;
			uint64_t a = graph.type_align(m.type_id);
			max_align = std::max(max_align, a);
			cursor = align_up(cursor, a);
			if (cursor != m.bit_offset / 8) {
				report.violations.push_back(
					"member '" + path + "." + m.name +
					"' offset " +
					std::to_string(m.bit_offset / 8) +
					" differs from natural layout " +
					std::to_string(cursor) +
					" (packing attributes?)");
				return;
			}
			cursor += graph.type_size(m.type_id);
			const BtfType &mt =
				graph.type(graph.resolve(m.type_id));
			if (mt.kind == BtfKind::Struct ||
			    mt.kind == BtfKind::Union)
				check_natural(m.type_id, path + "." + m.name);
		}
		if (align_up(cursor, max_align) != t.size)
			report.violations.push_back(
				"struct '" + path + "' recorded size " +
				std::to_string(t.size) +
				" differs from natural layout size " +
				std::to_string(align_up(cursor, max_align)));
	}
};

} // namespace

LayoutReport validate_shared_layout(const BtfTypeGraph &graph,
				    uint32_t type_id, uint32_t wasm_ptr_width)
{
	LayoutReport report;
	report.type_id = type_id;
	report.total_size = graph.type_size(type_id); // throws UnsizedType

	uint32_t id = graph.resolve(type_id);
	const BtfType &t = graph.type(id);
	std::string root = t.name.empty() ? "<anon>" : t.name;

	if (t.kind == BtfKind::Struct || t.kind == BtfKind::Union) {
		for (const BtfMember &m : t.members) {
			LayoutField f;
			f.name = m.name;
			f.offset = m.bit_offset / 8;
			f.size = (m.bitfield_size == 0)
					 ? graph.type_size(m.type_id)
					 : 0;
			report.fields.push_back(std::move(f));
		}
	} else {
		report.fields.push_back({root, 0, report.total_size});
	}

	LayoutWalker walker{graph, report, wasm_ptr_width};
	walker.walk(id, root, 0);
	walker.check_natural(id, root);

	report.wasm_safe = report.violations.empty();
	return report;
}

std::string format_layout_report(const LayoutReport &report)
{
	std::ostringstream os;
	os << "type " << report.type_id << " size " << report.total_size
	   << " wasm_safe=" << (report.wasm_safe ? "yes" : "no") << "\n";
	for (const LayoutField &f : report.fields)
		os << "  field " << f.name << " off=" << f.offset
		   << " size=" << f.size << "\n";
	for (const std::string &v : report.violations)
		os << "  violation: " << v << "\n";
	return os.str();
}

} // namespace wasmbpf
