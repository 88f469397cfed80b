#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "toa/config.hpp"
#include "toa/experiments.hpp"

using namespace toa;
using namespace toa::config;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, UnitSuffixes) {
  EXPECT_DOUBLE_EQ(parse_number("0.24 um", Dim::Length, "k"), 0.24e-6);
  EXPECT_DOUBLE_EQ(parse_number("9 cm/s", Dim::Velocity, "k"), 0.09);
  EXPECT_DOUBLE_EQ(parse_number("1.67e8 /s", Dim::Rate, "k"), 1.67e8);
  EXPECT_DOUBLE_EQ(parse_number("40us", Dim::Time, "k"), 40e-6);
  EXPECT_DOUBLE_EQ(parse_number("7.37 /um", Dim::Wavenumber, "k"), 7.37e6);
  EXPECT_DOUBLE_EQ(parse_number("-3e4", Dim::Rate, "k"), -3e4);
  EXPECT_DOUBLE_EQ(parse_number("+2", Dim::None, "k"), 2.0);
  EXPECT_THROW(parse_number("3 um", Dim::Rate, "k"), ConfigError);
  EXPECT_THROW(parse_number("3 furlongs", Dim::Length, "k"), ConfigError);
  EXPECT_THROW(parse_number("abc", Dim::None, "k"), ConfigError);
  EXPECT_THROW(parse_number("inf", Dim::None, "k"), ConfigError);
  EXPECT_THROW(parse_integer("3.5", "k"), ConfigError);
  EXPECT_THROW(parse_bool("maybe", "k"), ConfigError);
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  const std::string msg = message_of("[params]\n\xCE\x94_l = 3\n");
  EXPECT_NE(msg.find("unknown key '\xCE\x94_l'"), std::string::npos) << msg;
  EXPECT_NE(message_of("[parameters]\nmass = 1\n").find("unknown section"), std::string::npos);
  EXPECT_NE(message_of("mass = 1\n").find("outside"), std::string::npos);
  EXPECT_NE(message_of("[params]\nmass\n").find("key = value"), std::string::npos);
  EXPECT_NE(message_of("[params]\nmass = heavy\n").find("params.mass"), std::string::npos);
}

TEST(Config, CommentsAndOverlay) {
  Document a = parse("# run\n[params]\nmass = 1 u ; amu\ndecay = 3\n", "a");
  const Document b = parse("[params]\ndecay = 4 /ms\n", "b");
  a.merge(b);
  EXPECT_EQ(*a.find("params", "mass"), "1 u");
  EXPECT_EQ(*a.find("params", "decay"), "4 /ms");
}

TEST(Config, EnvironmentOverrides) {
  std::string ok = "TOA_SIM_PARAMS_LASER_DETUNING=2e3 /s", other = "HOME=/root";
  std::vector<char*> env{ok.data(), other.data(), nullptr};
  const Document d = from_environment(env.data());
  EXPECT_EQ(*d.find("params", "laser_detuning"), "2e3 /s");
  std::string bad = "TOA_SIM_PARAMS_DELTA=1";
  std::vector<char*> env2{bad.data(), nullptr};
  EXPECT_THROW(from_environment(env2.data()), ConfigError);
  std::string nosec = "TOA_SIM_DECAY=1";
  std::vector<char*> env3{nosec.data(), nullptr};
  EXPECT_THROW(from_environment(env3.data()), ConfigError);
}

TEST(Config, PresetsParse) {
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name));
  EXPECT_THROW(preset("fig9"), ConfigError);
}

TEST(Config, ExclusiveAndRequiredKeys) {
  Document d = preset("fig5");
  d.merge(parse("[packet]\nkx0 = 1e8\n", "extra"));
  EXPECT_THROW(app::run_command("eigen", d, {}), ConfigError);
  Document missing = parse("[params]\nmass = 1e-25\nrabi = 1\ndecay = 1\n", "m");
  try {
    app::run_command("eigen", missing, {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("laser_wavenumber"), std::string::npos);
  }
}

TEST(Config, CanonicalFormReproducesValues) {
  Document d = preset("fig3");
  d.merge(parse("[packet]\nsigma_ky = 1e6 /m\n[params]\ncompensate = true\n", "x"));
  d.erase("packet", "dy");
  Resolver r(d);
  const PhysParams p = app::read_params(r);
  const GaussianPacket2D g = app::read_packet(r, p.mass);
  const std::string text = r.canonical().to_text();
  EXPECT_EQ(text.find("vx0"), std::string::npos);
  EXPECT_EQ(text.find("sigma_ky"), std::string::npos);
  const Document reparsed = parse(text, "canonical");
  Resolver again(reparsed);
  const PhysParams p2 = app::read_params(again);
  const GaussianPacket2D g2 = app::read_packet(again, p2.mass);
  EXPECT_EQ(p.decay, p2.decay);
  EXPECT_EQ(g.kx0, g2.kx0);
  EXPECT_EQ(g.ky0, g2.ky0);
  EXPECT_EQ(g.dy, g2.dy);
  EXPECT_DOUBLE_EQ(g.dy, 0.5e-6);
  EXPECT_EQ(again.canonical().to_text(), text);
}

TEST(Config, CsvFormat) {
  ToaSeries s;
  s.times = {0.0, 0.5};
  s.pi_values = {-1e-20, 0.1};
  s.update_cumulative();
  const std::string csv = app::series_csv(s);
  EXPECT_EQ(csv, "# toa-sim csv v1\nt,pi_raw,pi_clipped,cumulative\n0,-9.9999999999999995e-21,0,0\n"
                 "0.5,0.10000000000000001,0.10000000000000001,0.025000000000000001\n");
}
