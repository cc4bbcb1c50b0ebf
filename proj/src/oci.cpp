// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "wasmbpf/oci.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "wasmbpf/errors.hpp"

namespace wasmbpf::oci {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<uint8_t, 4> kWasmMagic{0x00, 0x61, 0x73, 0x6d};

std::vector<uint8_t> read_file(const fs::path &path, Errc missing_code)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		raise(missing_code, "cannot open " + path.string());
	return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
				    std::istreambuf_iterator<char>());
}

void write_file(const fs::path &path, std::span<const uint8_t> bytes)
{
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out)
		raise(Errc::IoError, "cannot create " + path.string());
	out.write(reinterpret_cast<const char *>(bytes.data()),
		  std::streamsize(bytes.size()));
	if (!out)
		raise(Errc::IoError, "short write to " + path.string());
}

void write_file(const fs::path &path, const std::string &text)
{
	write_file(path,
		   std::span(reinterpret_cast<const uint8_t *>(text.data()),
			     text.size()));
}

struct Blob {
	std::string digest; // hex, without the sha256: prefix
	std::vector<uint8_t> bytes;
};

Blob make_blob(std::string content)
{
	std::vector<uint8_t> bytes(content.begin(), content.end());
	std::string digest = sha256_hex(bytes);
	return {std::move(digest), std::move(bytes)};
}

json descriptor(std::string_view media_type, const std::string &digest,
		size_t size)
{
	return json{{"mediaType", media_type},
		    {"digest", "sha256:" + digest},
		    {"size", size}};
}

// Minimal deterministic ustar writer: regular files only, mode 0644,
// mtime 0, no owner names.
void append_tar_entry(std::vector<uint8_t> &tar, const std::string &name,
		      std::span<const uint8_t> content)
{
	std::array<uint8_t, 512> hdr{};
	auto put = [&](size_t off, const std::string &s) {
		std::memcpy(hdr.data() + off, s.data(),
			    std::min(s.size(), size_t(99)));
	};
	auto put_octal = [&](size_t off, size_t width, uint64_t value) {
		std::ostringstream os;
		os << std::oct << value;
		std::string s = os.str();
		while (s.size() < width - 1)
			s.insert(s.begin(), '0');
		std::memcpy(hdr.data() + off, s.data(), width - 1);
	};
	if (name.size() > 99)
		raise(Errc::IoError, "tar entry name too long: " + name);
	put(0, name);
	put_octal(100, 8, 0644);   // mode
	put_octal(108, 8, 0);	   // uid
	put_octal(116, 8, 0);	   // gid
	put_octal(124, 12, content.size());
	put_octal(136, 12, 0);	   // mtime
	hdr[156] = '0';		   // regular file
	std::memcpy(hdr.data() + 257, "ustar", 5);
	hdr[263] = '0';
	hdr[264] = '0';
	std::memset(hdr.data() + 148, ' ', 8); // checksum field spaces
	uint32_t sum = 0;
	for (uint8_t b : hdr)
		sum += b;
	put_octal(148, 7, sum);
	hdr[155] = ' ';

	tar.insert(tar.end(), hdr.begin(), hdr.end());
	tar.insert(tar.end(), content.begin(), content.end());
	size_t pad = (512 - content.size() % 512) % 512;
	tar.insert(tar.end(), pad, 0);
}

} // namespace

std::string sha256_hex(std::span<const uint8_t> bytes)
{
	unsigned char digest[EVP_MAX_MD_SIZE];
	unsigned int len = 0;
	if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len,
			EVP_sha256(), nullptr))
		raise(Errc::IoError, "sha256 digest failed");
	static const char hex[] = "0123456789abcdef";
	std::string out;
	out.reserve(len * 2);
	for (unsigned int i = 0; i < len; i++) {
		out.push_back(hex[digest[i] >> 4]);
		out.push_back(hex[digest[i] & 0xf]);
	}
	return out;
}

void pack(std::span<const uint8_t> wasm_module, const PackMetadata &metadata,
	  const fs::path &out_dir, const fs::path &tar_path)
{
	if (wasm_module.size() < 4 ||
	    !std::equal(kWasmMagic.begin(), kWasmMagic.end(),
			wasm_module.begin()))
		raise(Errc::NotAWasmModule,
		      "input does not start with the Wasm magic");

	// layer blob = the module itself
	Blob layer{sha256_hex(wasm_module),
		   {wasm_module.begin(), wasm_module.end()}};

	json config{
		{"architecture", "wasm"},
		{"os", "wasip1"},
		{"name", metadata.name},
		{"version", metadata.version},
	};
	if (!metadata.annotations.empty())
		config["annotations"] = metadata.annotations;
	Blob config_blob = make_blob(config.dump(2) + "\n");

	json layer_desc = descriptor(kLayerMediaType, layer.digest,
				     layer.bytes.size());
	layer_desc["annotations"] = {
		{"org.opencontainers.image.title", metadata.name},
		{"org.wasmbpf.arch.independent", "true"},
	};
	json manifest{
		{"schemaVersion", 2},
		{"mediaType", kManifestMediaType},
		{"config", descriptor(kConfigMediaType, config_blob.digest,
				      config_blob.bytes.size())},
		{"layers", json::array({layer_desc})},
	};
	Blob manifest_blob = make_blob(manifest.dump(2) + "\n");

	json index{
		{"schemaVersion", 2},
		{"manifests",
		 json::array({[&] {
			 json d = descriptor(kManifestMediaType,
					     manifest_blob.digest,
					     manifest_blob.bytes.size());
			 d["annotations"] = {
				 {"org.opencontainers.image.ref.name",
				  metadata.name + ":" + metadata.version}};
			 return d;
		 }()})},
	};
	std::string index_text = index.dump(2) + "\n";
	std::string layout_text =
		json{{"imageLayoutVersion", kLayoutVersion}}.dump(2) + "\n";

	std::error_code ec;
	fs::create_directories(out_dir / "blobs" / "sha256", ec);
	if (ec)
		raise(Errc::IoError, "cannot create layout directory " +
					     out_dir.string());

	write_file(out_dir / "oci-layout", layout_text);
	write_file(out_dir / "index.json", index_text);
	for (const Blob *b : {&layer, &config_blob, &manifest_blob})
		write_file(out_dir / "blobs" / "sha256" / b->digest, b->bytes);

	if (!tar_path.empty()) {
		std::vector<uint8_t> tar;
		auto text_span = [](const std::string &s) {
			return std::span(
				reinterpret_cast<const uint8_t *>(s.data()),
				s.size());
		};
		append_tar_entry(tar, "oci-layout", text_span(layout_text));
		append_tar_entry(tar, "index.json", text_span(index_text));
		std::vector<const Blob *> blobs{&layer, &config_blob,
						&manifest_blob};
		std::sort(blobs.begin(), blobs.end(),
			  [](const Blob *a, const Blob *b) {
				  return a->digest < b->digest;
			  });
		for (const Blob *b : blobs)
			append_tar_entry(tar, "blobs/sha256/" + b->digest,
					 b->bytes);
		tar.insert(tar.end(), 1024, 0); // end-of-archive
		write_file(tar_path, tar);
	}
}

namespace {

json load_json(const fs::path &path, Errc code, const char *what)
{
	auto bytes = read_file(path, code);
	json parsed = json::parse(bytes.begin(), bytes.end(), nullptr, false);
	if (parsed.is_discarded())
		raise(code, std::string("unparseable ") + what + " at " +
				    path.string());
	return parsed;
}

std::vector<uint8_t> checked_blob(const fs::path &layout_dir,
				  const std::string &digest)
{
	if (!digest.starts_with("sha256:"))
		raise(Errc::BadIndex, "unsupported digest '" + digest + "'");
	std::string hex = digest.substr(7);
	fs::path path = layout_dir / "blobs" / "sha256" / hex;
	if (!fs::exists(path))
		raise(Errc::MissingBlob,
		      "blob " + digest + " is missing from the layout");
	auto bytes = read_file(path, Errc::MissingBlob);
	std::string actual = sha256_hex(bytes);
	if (actual != hex)
		raise(Errc::DigestMismatch, "blob " + digest +
						    " hashes to sha256:" +
						    actual);
	return bytes;
}

json manifest_of(const fs::path &layout_dir, std::string *digest_out = nullptr)
{
	json index = load_json(layout_dir / "index.json", Errc::BadIndex,
			       "index");
	if (!index.contains("manifests") || !index["manifests"].is_array() ||
	    index["manifests"].empty())
		raise(Errc::BadIndex, "index has no manifests");
	std::string digest =
		index["manifests"][0].value("digest", std::string());
	if (digest.empty())
		raise(Errc::BadIndex, "manifest descriptor has no digest");
	if (digest_out)
		*digest_out = digest;
	auto bytes = checked_blob(layout_dir, digest);
	json manifest = json::parse(bytes.begin(), bytes.end(), nullptr, false);
	if (manifest.is_discarded())
		raise(Errc::BadIndex, "manifest blob is not JSON");
	return manifest;
}

} // namespace

void validate(const fs::path &layout_dir)
{
	json layout = load_json(layout_dir / "oci-layout", Errc::BadIndex,
				"oci-layout");
	if (layout.value("imageLayoutVersion", std::string()) != kLayoutVersion)
		raise(Errc::BadIndex, "unsupported image layout version");
	json manifest = manifest_of(layout_dir);
	if (!manifest.contains("config") || !manifest.contains("layers"))
		raise(Errc::BadIndex, "manifest missing config or layers");
	checked_blob(layout_dir,
		     manifest["config"].value("digest", std::string()));
	for (const json &layer : manifest["layers"])
		checked_blob(layout_dir, layer.value("digest", std::string()));
}

UnpackResult unpack(const fs::path &layout_dir)
{
	validate(layout_dir);
	json manifest = manifest_of(layout_dir);

	UnpackResult result;
	auto config_bytes = checked_blob(
		layout_dir, manifest["config"].value("digest", std::string()));
	json config =
		json::parse(config_bytes.begin(), config_bytes.end(), nullptr,
			    false);
	if (!config.is_discarded()) {
		result.metadata.name = config.value("name", std::string());
		result.metadata.version =
			config.value("version", std::string());
		if (config.contains("annotations"))
			for (auto &[k, v] : config["annotations"].items())
				result.metadata.annotations[k] =
					v.get<std::string>();
	}
	const json &layers = manifest["layers"];
	if (!layers.is_array() || layers.size() != 1)
		raise(Errc::BadIndex, "expected exactly one layer");
	result.module_bytes = checked_blob(
		layout_dir, layers[0].value("digest", std::string()));
	return result;
}

SizeReport inspect(const fs::path &layout_or_wasm)
{
	SizeReport report;
	report.path = layout_or_wasm.string();
	if (!fs::exists(layout_or_wasm))
		raise(Errc::IoError,
		      "no such path: " + layout_or_wasm.string());

	if (fs::is_directory(layout_or_wasm)) {
		report.is_layout = true;
		validate(layout_or_wasm);
		json manifest = manifest_of(layout_or_wasm);
		auto add = [&](const json &desc) {
			std::string digest =
				desc.value("digest", std::string());
			uint64_t size = desc.value("size", uint64_t(0));
			report.blobs.emplace_back(digest, size);
			report.total_bytes += size;
		};
		std::string manifest_digest;
		json index = load_json(layout_or_wasm / "index.json",
				       Errc::BadIndex, "index");
		add(index["manifests"][0]);
		add(manifest["config"]);
		for (const json &layer : manifest["layers"])
			add(layer);
	} else {
		report.total_bytes = fs::file_size(layout_or_wasm);
	}
	report.vs_container_ratio = double(report.total_bytes) /
				    double(report.container_baseline_bytes);
	return report;
}

std::string format_size_report(const SizeReport &report)
{
	std::ostringstream os;
	os << (report.is_layout ? "oci layout " : "wasm module ")
	   << report.path << "\n";
	for (const auto &[digest, size] : report.blobs)
		os << "  " << digest << "  " << size << " bytes\n";
	os << "  total: " << report.total_bytes << " bytes ("
	   << report.total_bytes / 1024 << " KiB)\n";
	os << "  minimal-container baseline: "
	   << report.container_baseline_bytes << " bytes; ratio "
	   << report.vs_container_ratio << "\n";
	return os.str();
}

std::string size_report_json(const SizeReport &report)
{
	json blobs = json::array();
	for (const auto &[digest, size] : report.blobs)
		blobs.push_back({{"digest", digest}, {"size", size}});
	json j{
		{"path", report.path},
		{"kind", report.is_layout ? "oci-layout" : "wasm-module"},
		{"total_bytes", report.total_bytes},
		{"blobs", blobs},
		{"container_baseline_bytes", report.container_baseline_bytes},
		{"vs_container_ratio", report.vs_container_ratio},
	};
	return j.dump(2) + "\n";
}

} // namespace wasmbpf::oci
