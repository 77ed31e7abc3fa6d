#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace akd::cli {

/// Runs one command line (args[0] is the program name). Normal output goes
/// to `out`; failures are reported on `err` as a single JSON object
///   {"error":{"category":"...","message":"..."}}
/// Returns 0 on success, 2 for usage errors and 1 for everything else.
int cli_run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

/// Decimal with 17 significant digits and a ".0"
/// suffix for integral values, as used in the metrics report.
std::string format_real(double v);

} // namespace akd::cli
