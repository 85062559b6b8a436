#pragma once

#include <string>
#include <vector>

namespace due {

// Built-in self tests behind `due check`: gradient checks for every
// differentiable operation, the variational-vs-dense GP equivalence, and
// the Lipschitz audit. corrupt_op perturbs the named operation's analytic
// gradient before comparison (negative-control hook).
struct CheckReport {
  struct Item {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
  };
  std::vector<Item> items;

  bool all_pass() const;
  std::string render() const;  // one line per check
};

CheckReport run_self_checks(const std::string& corrupt_op = "");

}  // namespace due
