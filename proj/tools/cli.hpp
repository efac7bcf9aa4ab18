#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gratwave::cli {

struct RunConfig {
  std::string command;
  std::string graph_path;
  double p = 4.0;
  std::optional<double> mass;
  double alpha = 0.0;
  double h = 0.02;
  double trunc = 30.0;
  double tol = 1e-8;
  int max_iter = 5000;
  double m = 1.0;
  double c = 1.0;
  std::vector<double> c_schedule;
  std::optional<double> lambda;
  std::optional<double> omega;
  std::vector<double> masses;  // sweep
  std::string variant = "core";
  int levels = 1;
  std::string out;
  std::string format;
  std::string state_csv;
  std::string dump_prefix;
};

/// Parses arguments and runs one command. Returns the process exit code:
/// 0 success, 2 input error, 3 refused regime, 4 solver failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gratwave::cli
