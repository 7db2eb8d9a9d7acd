#include "ladr/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ladr {
namespace {

constexpr char kMagic[4] = {'L', 'A', 'D', 'R'};

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const std::uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw FormatError("checkpoint truncated");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write(kMagic, 4);
  put_u32(os, Checkpoint::kVersion);
  put_string(os, ck.config_json);
  put_u32(os, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& t : ck.tensors) {
    put_string(os, t.name);
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (const int d : t.shape) put_u32(os, static_cast<std::uint32_t>(d));
    put_u32(os, static_cast<std::uint32_t>(t.data.size()));
    for (const float v : t.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(os, bits);
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad checkpoint magic");
  const std::uint32_t version = get_u32(is);
  if (version != Checkpoint::kVersion)
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  Checkpoint ck;
  ck.config_json = get_string(is);
  const std::uint32_t count = get_u32(is);
  ck.tensors.resize(count);
  for (auto& t : ck.tensors) {
    t.name = get_string(is);
    const std::uint32_t rank = get_u32(is);
    t.shape.resize(rank);
    std::size_t expect = 1;
    for (auto& d : t.shape) {
      d = static_cast<int>(get_u32(is));
      expect *= static_cast<std::size_t>(d);
    }
    const std::uint32_t n = get_u32(is);
    if (n != expect) throw FormatError("tensor size/shape mismatch: " + t.name);
    t.data.resize(n);
    for (auto& v : t.data) {
      const std::uint32_t bits = get_u32(is);
      std::memcpy(&v, &bits, 4);
    }
  }
  return ck;
}

}  // namespace ladr
