#pragma once

#include "tebounds/data.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tebounds {

/// Settings for one command-line run. A JSON config file uses the same key
/// names and overrides values given as flags.
struct RunConfig {
  std::string command;  // estimate | bands | test | compare | simulate
  std::string data;
  ColumnMap columns;
  std::string regime = "point_id";
  std::string x0 = "q:0.5";  // comma separated; each entry a number or q:<tau>
  std::string x0_b;          // second point for compare
  std::vector<std::string> subset;  // covariates of X1 for the subset regime
  std::string kernel = "epanechnikov";
  std::string bandwidth = "auto";  // auto | mc_rule | app_rule | manual
  double h = 0.0;
  std::string rate = "loglog";
  double c = 0.2;
  double trim = 0.01;
  long m_y = 401;
  long m_delta = 201;
  double pad = 0.1;
  double alpha = 0.05;
  long boot_m = 500;
  std::uint64_t seed = 20240101;
  std::string out = ".";
  std::string null_curve = "normal";  // "normal" or a CSV with delta,null columns
  std::string side = "lower";
  double p = 1.0;
  // simulate
  long reps = 500;
  long n = 500;
  std::vector<double> c_values{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> rates{"loglog", "sqrtlog", "power16"};
};

/// Reads a JSON config file into `cfg`, overriding whatever it sets.
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);

/// File name -> content for every output of a command. Nothing is written.
std::map<std::string, std::string> execute(const RunConfig& cfg, std::ostream& summary);

/// Writes each file to a temporary name in `dir`, then renames it into place.
void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

/// Full command-line entry point. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tebounds
