#pragma once

#include <string>

#include "json.hpp"

#include "coagss/laplace.hpp"
#include "coagss/solver.hpp"
#include "coagss/tail_analysis.hpp"

namespace coagss {

// Profile CSV: header "x,f,a,u", one row per node, 17 significant digits,
// '\n' newlines. a and u columns are derived from the fitted decay rate and
// are informational; readers rebuild the profile from x and f alone.
std::string profile_to_csv(const Profile& p);
void write_profile_csv(const Profile& p, const std::string& path);

// Parses x and f, rebuilds the grid from the parsed nodes bit-for-bit, and
// refits the tail closure. Throws IoError on malformed input.
Profile read_profile_csv(const std::string& path, const KernelSpec& kernel, bool validate = true);

nlohmann::json solve_report_json(const KernelSpec& kernel, const Grid& grid,
                                 const SolveOptions& opts, const SolveReport& report,
                                 double mass);

// Consolidated diagnostics document, schema 1: every check keyed by the
// statement it exercises (theorem1.sandwich, lemma_doubling.margin,
// eq_muequation.residual, ...). flags collects anything degenerate or
// untrusted; callers map a nonempty flag list to exit status 2.
struct AnalysisResult {
  nlohmann::json report;
  std::vector<std::string> flags;
};
AnalysisResult analyze_profile(const Profile& p);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace coagss
