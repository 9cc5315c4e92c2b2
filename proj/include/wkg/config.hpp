#pragma once
// Experiment configuration: a single sectioned key-value text file.  No
// environment variables, no hidden state -- everything that affects a run
// is in the file (plus the command-line flags), so identical inputs give
// identical outputs.

#include <stdexcept>
#include <string>
#include <vector>

#include "wkg/forms.hpp"

namespace wkg {

struct GridConfig {
  double h = 1.0 / 32;
  double L = 20.0;
  double cfl = 0.4;
};

struct RunSection {
  double epsilon = 1e-3;
  double delta = 0.01;     // bootstrap growth exponent s^delta
  double t_max = 0.0;      // 0: derived from the last slice, (s_max^2+1)/2
  std::vector<double> s_list = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  std::string profile = "polynomial-bump";
  unsigned seed = 1;
};

struct OutputSection {
  std::string csv = "series.csv";
  std::string json = "report.json";
  std::string checkpoint = "state.ckpt";
  int checkpoint_cadence = 0;  // steps between checkpoints; 0 = only on error
};

struct RunConfig {
  CoefficientSet coeffs;
  GridConfig grid;
  RunSection run;
  OutputSection outputs;

  // needed final time of the front for the last slice to complete
  double required_t_max() const;
  void validate() const;
};

// Parse failure, with the 1-based line of the offending input.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Sections: [coefficients] (structure-module grammar), [grid], [run],
// [outputs].  `#` starts a comment; blank lines ignored; keys outside a
// section or unknown sections/keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // reads the file, then parses

}  // namespace wkg
