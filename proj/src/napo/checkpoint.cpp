#include "tsc/napo/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tsc/error.hpp"

namespace tsc::napo {
namespace {

constexpr char kMagic[8] = {'T', 'S', 'C', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ValidationError(path + ": truncated checkpoint");
  return v;
}

}  // namespace

const nn::Mat& Checkpoint::array(const std::string& name) const {
  for (const auto& [n, m] : arrays) {
    if (n == name) return m;
  }
  throw ValidationError("checkpoint has no array '" + name + "'");
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header = ckpt.header;
  nlohmann::json index = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.arrays) index.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  header["arrays"] = index;
  const std::string text = header.dump();

  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot open " + tmp + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::uint64_t>(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    std::uint64_t h = fnv1a(nullptr, 0);
    for (const auto& [_, m] : ckpt.arrays) {
      const auto* bytes = reinterpret_cast<const char*>(m.data());
      const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(double);
      os.write(bytes, static_cast<std::streamsize>(n));
      h = fnv1a(bytes, n, h);
    }
    put<std::uint64_t>(os, h);
    os.flush();
    if (!os) throw ValidationError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("checkpoint not found: " + path);
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError(path + ": not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) {
    throw ValidationError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = get<std::uint64_t>(is, path);
  if (len > (1ULL << 30)) throw ValidationError(path + ": implausible header length");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw ValidationError(path + ": truncated header");
  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": corrupt header: " + e.what());
  }
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& entry : ckpt.header.at("arrays")) {
    const long rows = entry.at("rows").get<long>();
    const long cols = entry.at("cols").get<long>();
    if (rows < 0 || cols < 0) throw ValidationError(path + ": negative array shape");
    nn::Mat m(rows, cols);
    const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(double);
    if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n))) {
      throw ValidationError(path + ": truncated array '" + entry.at("name").get<std::string>() + "'");
    }
    h = fnv1a(reinterpret_cast<const char*>(m.data()), n, h);
    ckpt.arrays.emplace_back(entry.at("name").get<std::string>(), std::move(m));
  }
  if (get<std::uint64_t>(is, path) != h) throw ValidationError(path + ": checksum mismatch");
  ckpt.header.erase("arrays");
  return ckpt;
}

}  // namespace tsc::napo
