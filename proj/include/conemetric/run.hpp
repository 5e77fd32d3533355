#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace conemetric {

enum ExitCode { exit_ok = 0, exit_invalid_config = 2, exit_solver_failure = 3, exit_verification = 4 };

// Command-line arguments after the program name, e.g. {"spectrum", "--beta", "2.5"}.
// A JSON file given by --config supplies the same options as keys (dashes or underscores);
// unknown keys are rejected. JSON goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses "1.5", "-0.2+0.3i", "0.4i", "inf". Throws InvalidInput otherwise.
std::complex<double> parse_complex(const std::string& s);

}  // namespace conemetric
