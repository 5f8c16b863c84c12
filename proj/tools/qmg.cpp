// qmg run <scenario.json> [--out DIR] [--seed N]
// qmg plotdata <csv> --x COL --y COL[,COL...] [--out FILE]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qmg/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw qmg::ValidationError("scenario", "cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_command(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed) {
  const auto doc = qmg::parse_document(slurp(path));
  const auto base = std::filesystem::path(path).parent_path();
  const auto result = qmg::run_scenario(doc, seed, base);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(qmg::scenario_output_dir(doc)) : std::filesystem::path(out);
  qmg::write_result(result, dir, {{"scenario", std::filesystem::path(path).filename().string()}});
  for (const auto& f : result.files) std::cout << (dir / f.name).string() << "\n";
  std::cout << (dir / "manifest.json").string() << "\n";
  return 0;
}

int plot_command(const std::string& csv_path, const std::string& x, const std::vector<std::string>& ys,
                 const std::string& out) {
  if (!std::filesystem::exists(csv_path)) throw qmg::ValidationError("csv", "no such file " + csv_path);
  const auto table = qmg::csv::read_file(csv_path);
  const auto data = qmg::plot_data(table, x, ys, std::filesystem::path(csv_path).filename().string());
  const std::string target = out.empty() ? std::filesystem::path(csv_path).replace_extension(".plot.json").string() : out;
  std::ofstream os(target, std::ios::binary);
  if (!os) throw qmg::Error("cannot write " + target);
  os << data.dump(2) << "\n";
  std::cout << target << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum market games: scenario runner and plot-data emitter"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  std::int64_t seed = -1;
  auto* run = app.add_subcommand("run", "Run a scenario file and write its CSV/JSON outputs");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the scenario's \"output\")");
  run->add_option("--seed", seed, "Seed override")->check(CLI::NonNegativeNumber);

  std::string csv_path, x_col, plot_out;
  std::vector<std::string> y_cols;
  auto* plot = app.add_subcommand("plotdata", "Turn a CSV into a plot-data JSON document");
  plot->add_option("csv", csv_path, "Input CSV")->required();
  plot->add_option("--x", x_col, "x column")->required();
  plot->add_option("--y", y_cols, "y column(s)")->required()->delimiter(',');
  plot->add_option("--out", plot_out, "Output file (default <csv>.plot.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(scenario_path, out_dir, seed >= 0 ? std::optional<std::uint64_t>(seed) : std::nullopt);
    return plot_command(csv_path, x_col, y_cols, plot_out);
  } catch (const qmg::ValidationError& e) {
    std::cerr << "qmg: validation error at " << e.what() << "\n";
    return qmg::exit_code(e);
  } catch (const qmg::Error& e) {
    std::cerr << "qmg: " << e.what() << "\n";
    return qmg::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "qmg: " << e.what() << "\n";
    return 4;
  }
}
