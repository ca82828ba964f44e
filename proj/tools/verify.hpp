#pragma once

#include <cstdint>
#include <iosfwd>

namespace cphbl::tools {

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t knapsack_instances = 500;
  std::size_t oracle_instances = 200;
  double oracle_tolerance = 1e-9;
};

/// Random-instance property checks of the knapsack and the optimum.
/// Returns the number of failed instances.
std::size_t run_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace cphbl::tools
