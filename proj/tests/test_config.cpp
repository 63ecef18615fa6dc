#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "wavepatch/config.hpp"

using namespace wavepatch;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;

  TempDir() {
    path = fs::temp_directory_path() / "wavepatch_config_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("parsing skips comments and preserves first-seen key order") {
  const ConfigMap cfg = ConfigMap::parse_text(
      "# leading comment\n"
      "grid.h = 0.5   # trailing comment\n"
      "\n"
      "  run.T =  2.0\n"
      "data.kind = bump\n");
  REQUIRE(cfg.size() == 3);
  CHECK(cfg.keys() == std::vector<std::string>{"grid.h", "run.T", "data.kind"});
  CHECK(cfg.get_double("grid.h") == 0.5);
  CHECK(cfg.get_double("run.T") == 2.0);
  CHECK(cfg.get_string("data.kind") == "bump");
}

TEST_CASE("parsing rejects malformed lines with their line number") {
  CHECK_THROWS_WITH_AS(ConfigMap::parse_text("novalue\n"),
                       doctest::Contains("line 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ConfigMap::parse_text("a = 1\na = 2\n"),
                       doctest::Contains("line 2"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigMap::parse_text("key = \n"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigMap::parse_text(" = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigMap::parse_text("bad key = 1\n"),
                  std::invalid_argument);
}

TEST_CASE("typed getters convert and validate") {
  const ConfigMap cfg = ConfigMap::parse_text(
      "n = 4\nx = 2.5\nflag = true\nname = alpha\nlist = 1 2.5 -3\n");
  CHECK(cfg.get_int("n") == 4);
  CHECK(cfg.get_double("x") == 2.5);
  CHECK(cfg.get_bool("flag"));
  CHECK(cfg.get_string("name") == "alpha");
  CHECK(cfg.get_list("list") == std::vector<double>{1.0, 2.5, -3.0});

  CHECK_THROWS_AS((void)cfg.get_int("x"), std::invalid_argument);
  CHECK_THROWS_AS((void)cfg.get_bool("name"), std::invalid_argument);
  CHECK_THROWS_AS((void)cfg.get_double("name"), std::invalid_argument);
  CHECK_THROWS_AS((void)cfg.get_string("missing"), std::out_of_range);

  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK(cfg.get_double("missing", 1.5) == 1.5);
  CHECK(cfg.get_bool("missing", false) == false);
  CHECK(cfg.get_string("missing", "z") == "z");
  CHECK(cfg.get_list("missing", {9.0}) == std::vector<double>{9.0});
}

TEST_CASE("unknown keys are reported together") {
  const ConfigMap cfg = ConfigMap::parse_text("a = 1\nb = 2\nc = 3\n");
  CHECK_NOTHROW(cfg.require_known({"a", "b", "c", "d"}));
  CHECK_THROWS_WITH_AS(cfg.require_known({"a"}), doctest::Contains("b"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.require_known({"a"}), doctest::Contains("c"),
                       std::invalid_argument);
}

TEST_CASE("setters round-trip through serialization") {
  ConfigMap cfg;
  cfg.set("name", "beta");
  cfg.set_double("x", 1.0 / 3.0);
  cfg.set_int("n", 1234567890123LL);
  cfg.set_bool("flag", false);
  cfg.set_list("list", {0.1, 0.2});

  const ConfigMap back = ConfigMap::parse_text(cfg.serialize());
  CHECK(back.get_string("name") == "beta");
  CHECK(back.get_double("x") == 1.0 / 3.0);
  CHECK(back.get_string("n") == "1234567890123");
  CHECK(back.get_bool("flag") == false);
  CHECK(back.get_list("list") == std::vector<double>{0.1, 0.2});

  CHECK_THROWS_AS(cfg.set("bad", "line\nbreak"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("bad", "has # comment"), std::invalid_argument);
}

TEST_CASE("atomic write leaves a parseable file and no temporary") {
  const TempDir tmp;
  const fs::path target = tmp.path / "manifest.txt";
  ConfigMap cfg;
  cfg.set("manifest.kind", "run");
  cfg.set_double("result.peak", 4.25);
  cfg.write_atomic(target.string());

  CHECK(fs::exists(target));
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
  const ConfigMap back = ConfigMap::parse_file(target.string());
  CHECK(back.get_string("manifest.kind") == "run");
  CHECK(back.get_double("result.peak") == 4.25);
}

TEST_CASE("parse_file reports missing files") {
  CHECK_THROWS_AS(ConfigMap::parse_file("/nonexistent/nowhere.cfg"),
                  std::runtime_error);
}
