// toa-sim: command-line driver for the time-of-arrival model.
//
//   toa-sim <eigen|toa|compare|oracle|deconv> [--config PATH] [--preset NAME]
//           [--out DIR] [--threads N]
//
// Exit status: 0 ok, 2 configuration error, 3 numerical guard, 4 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "toa/config.hpp"
#include "toa/errors.hpp"
#include "toa/experiments.hpp"

extern char** environ;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw toa::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw toa::IoError("error reading " + path);
  return ss.str();
}

void write_outputs(const std::filesystem::path& dir, const std::vector<toa::app::Artifact>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw toa::IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& f : files) {
    const auto path = dir / f.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << f.content;
    out.close();
    if (!out) throw toa::IoError("cannot write " + path.string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-of-arrival simulations for atoms entering a laser-illuminated half plane."};
  app.footer(toa::config::describe());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".", preset_name;
  int threads = -1;
  app.add_option("--config", config_path, "Config file (sectioned key = value)");
  app.add_option("--out", out_dir, "Output directory (created if missing)");
  app.add_option("--threads", threads, "Worker cap; 0 = all cores; output does not depend on it")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--preset", preset_name, "Parameter preset")
      ->check(CLI::IsMember(toa::config::preset_names()));

  app.add_subcommand("eigen", "Reflection and transmission coefficients vs transverse velocity");
  app.add_subcommand("toa", "First-photon distribution Pi(t) by quadrature");
  app.add_subcommand("compare", "2D vs 1D Pi(t), with and without detuning compensation");
  app.add_subcommand("oracle", "Split-step propagation on a grid; Pi(t) from norm loss");
  app.add_subcommand("deconv", "Remove the at-rest delay W(t) and compare with the free flux");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    toa::config::Document doc;
    if (!preset_name.empty()) doc.merge(toa::config::preset(preset_name));
    if (!config_path.empty()) doc.merge(toa::config::parse(read_file(config_path), config_path));
    doc.merge(toa::config::from_environment(environ));
    if (config_path.empty() && preset_name.empty()) {
      throw toa::ConfigError("no input: give --config and/or --preset");
    }

    toa::app::RunOptions opt;
    opt.threads = threads;
    const auto result = toa::app::run_command(command, doc, opt);
    write_outputs(out_dir, result.files);
    for (const auto& f : result.files) std::cout << (std::filesystem::path(out_dir) / f.name).string() << "\n";
    return 0;
  } catch (const toa::IoError& e) {
    std::cerr << "toa-sim: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const toa::ParameterError& e) {
    std::cerr << "toa-sim: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const toa::NumericalGuardError& e) {
    std::cerr << "toa-sim: numerical guard: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "toa-sim: " << e.what() << "\n";
    return 1;
  }
}
