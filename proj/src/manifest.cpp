#include "vapor/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <json.hpp>
#include <ostream>

#include "vapor/error.hpp"

namespace vapor {
namespace {

struct DigestContext {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free};
  DigestContext() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      fail(ErrorCode::InvalidArgument, "SHA-256 initialization failed");
    }
  }
  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) {
      fail(ErrorCode::InvalidArgument, "SHA-256 update failed");
    }
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 0xf];
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestContext d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read " + path.string());
  DigestContext d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

void record_file(RunManifest& manifest, const std::string& relative_path) {
  const auto full = std::filesystem::path(manifest.output_dir) / relative_path;
  manifest.files.push_back(
      {relative_path, static_cast<std::uint64_t>(std::filesystem::file_size(full)),
       sha256_file(full)});
}

void write_manifest_json(std::ostream& os, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["config_path"] = m.config_path;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["output_dir"] = m.output_dir;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  auto& files = j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : m.files) {
    files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace vapor
