#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ladr/checkpoint.hpp"
#include "ladr/network.hpp"

using namespace ladr;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ladr_ckpt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Tensor<float> image(std::uint64_t seed) {
  Tensor<float> x(2, 1, 32, 32);
  std::mt19937_64 rng(seed);
  for (auto& v : x.data)
    v = static_cast<float>((rng() >> 11) * 0x1.0p-53);
  return x;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// A network whose BN running buffers have drifted off their init values, so
// the round trip below proves buffers travel with the checkpoint.
Network<float> warmed_network(std::uint64_t seed) {
  Network<float> net(tiny_network_config());
  net.init(seed);
  net.forward(image(seed + 1), true);
  net.forward(image(seed + 2), true);
  net.clear_caches();
  return net;
}

}  // namespace

TEST_CASE("checkpoint round trip restores a bit-exact network") {
  const auto dir = scratch_dir("roundtrip");
  Network<float> a = warmed_network(5);

  const std::string cfg_json = R"({"preset":"tiny"})";
  save_checkpoint((dir / "net.ladr").string(), snapshot_network(a, cfg_json));
  const Checkpoint ck = load_checkpoint((dir / "net.ladr").string());
  CHECK(ck.config_json == cfg_json);

  Network<float> b(tiny_network_config());
  b.init(99);  // deliberately different weights before the restore
  restore_network(b, ck);

  auto pa = a.parameters(), pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(*pa[i].value == *pb[i].value);
  auto ba = a.buffers(), bb = b.buffers();
  REQUIRE(ba.size() == bb.size());
  bool buffers_moved = false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    CHECK(*ba[i].value == *bb[i].value);
    // The warm-up really changed something, else this test proves nothing.
    if (ba[i].name.ends_with("run_mean"))
      for (float v : *ba[i].value) buffers_moved = buffers_moved || v != 0.0f;
  }
  CHECK(buffers_moved);

  const auto x = image(123);
  CHECK(a.forward(x, false) == b.forward(x, false));
}

TEST_CASE("checkpoint rejects damaged files") {
  const auto dir = scratch_dir("damage");
  Network<float> net = warmed_network(7);
  const fs::path good = dir / "good.ladr";
  save_checkpoint(good.string(), snapshot_network(net, "{}"));
  const std::string bytes = slurp(good);
  REQUIRE(bytes.size() > 16);
  REQUIRE(bytes.substr(0, 4) == "LADR");

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    spit(dir / "bad.ladr", bad);
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.ladr").string()), FormatError);
  }
  SUBCASE("unknown version") {
    std::string bad = bytes;
    bad[4] = 2;  // version u32 sits right after the magic, little-endian
    spit(dir / "bad.ladr", bad);
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.ladr").string()), FormatError);
  }
  SUBCASE("truncated") {
    spit(dir / "bad.ladr", bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.ladr").string()), FormatError);
  }
  SUBCASE("empty") {
    spit(dir / "bad.ladr", "");
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.ladr").string()), FormatError);
  }
}

TEST_CASE("restore is strict about the tensor registry") {
  Network<float> net(tiny_network_config());
  net.init(3);
  const Checkpoint good = snapshot_network(net, "{}");

  SUBCASE("missing tensor") {
    Checkpoint ck = good;
    ck.tensors.pop_back();
    CHECK_THROWS_AS(restore_network(net, ck), FormatError);
  }
  SUBCASE("extra tensor") {
    Checkpoint ck = good;
    ck.tensors.push_back({"stowaway", {1}, {0.0f}});
    CHECK_THROWS_AS(restore_network(net, ck), FormatError);
  }
  SUBCASE("renamed tensor") {
    Checkpoint ck = good;
    ck.tensors[0].name += "_x";
    CHECK_THROWS_AS(restore_network(net, ck), FormatError);
  }
  SUBCASE("wrong shape") {
    Checkpoint ck = good;
    ck.tensors[0].shape[0] += 1;
    CHECK_THROWS_AS(restore_network(net, ck), FormatError);
  }
}

TEST_CASE("unreadable checkpoint path raises IoError") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/net.ladr"), IoError);
}
