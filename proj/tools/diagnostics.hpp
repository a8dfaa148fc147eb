#ifndef AKSTAB_TOOLS_DIAGNOSTICS_HPP
#define AKSTAB_TOOLS_DIAGNOSTICS_HPP

namespace akstab::tools {

/// Runs the library invariant suite at resolution n, printing one line per
/// check. Returns the number of failures.
int run_invariant_suite(int n);

/// Runs the independent-oracle cross-checks (dual formulas, conformal
/// identities, linearization probes). Returns the number of failures.
int run_oracle_suite(int n);

}  // namespace akstab::tools

#endif
