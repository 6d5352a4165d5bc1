// oks_sim: command-line front end for the Kerr-shutter simulator.
//
//   oks_sim scan-delay  [--config PATH] [--seed N] [--out PATH] [--format csv|json] [--noiseless]
//   oks_sim scan-angle  ...
//   oks_sim scan-energy ...
//   oks_sim tomography  ... [--data PATH]
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oks/config.hpp"
#include "oks/errors.hpp"
#include "oks/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  bool noiseless = false;
  std::string data_path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw oks::ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw oks::ConfigError("cannot write '" + out_path + "'");
  out << text;
}

std::string render(const oks::Table& t, const Options& o, std::uint64_t seed) {
  if (o.format == "json") return oks::to_json(t, seed).dump(2) + "\n";
  return oks::to_csv(t);
}

int run(const std::string& command, const Options& o) {
  oks::ExperimentConfig cfg = o.config_path.empty() ? oks::parse_config("") : oks::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;

  std::string text;
  if (command == "scan-delay") {
    text = render(oks::run_scan_delay(cfg, o.noiseless), o, cfg.seed);
  } else if (command == "scan-angle") {
    text = render(oks::run_scan_angle(cfg, o.noiseless), o, cfg.seed);
  } else if (command == "scan-energy") {
    text = render(oks::run_scan_energy(cfg, o.noiseless), o, cfg.seed);
  } else {
    std::optional<oks::TomographyDataset> data;
    if (!o.data_path.empty()) {
      const std::string raw = read_file(o.data_path);
      const bool json = raw.find_first_not_of(" \t\r\n") != std::string::npos &&
                        raw[raw.find_first_not_of(" \t\r\n")] == '{';
      data = json ? oks::dataset_from_json(raw) : oks::dataset_from_csv(raw);
    }
    const oks::TomographyReport report = oks::run_tomography(cfg, o.noiseless, data);
    // CSV output of a tomography run is its count table, reusable via --data.
    text = o.format == "csv" ? oks::dataset_to_csv(report.dataset) : oks::to_json(report, cfg).dump(2) + "\n";
  }
  emit(text, o.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical Kerr shutter qubit-converter simulator"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value configuration file");
    sub->add_option("--seed", opt.seed, "override the configured seed");
    sub->add_option("--out", opt.out_path, "output file (default stdout)");
    sub->add_option("--format", opt.format, "csv or json (default: csv for scans, json for tomography)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--noiseless", opt.noiseless, "expected counts instead of Poisson samples");
  };

  add_common(app.add_subcommand("scan-delay", "pump-delay scan of the single-bin shutter"));
  add_common(app.add_subcommand("scan-angle", "pump-polarization scan"));
  add_common(app.add_subcommand("scan-energy", "pump-energy scan with SNR"));
  CLI::App* tomo = app.add_subcommand("tomography", "36-setting process tomography");
  add_common(tomo);
  tomo->add_option("--data", opt.data_path, "reconstruct this count table (CSV or JSON) instead of simulating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (opt.format.empty()) opt.format = command == "tomography" ? "json" : "csv";
  try {
    return run(command, opt);
  } catch (const oks::ConfigError& e) {
    std::cerr << "oks_sim: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const oks::InputError& e) {
    std::cerr << "oks_sim: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const oks::AnalysisError& e) {
    std::cerr << "oks_sim: analysis failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const oks::ReconstructionError& e) {
    std::cerr << "oks_sim: reconstruction failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "oks_sim: " << e.what() << "\n";
    return kExitNumerical;
  }
}
