#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubmlab/estimate.hpp"

namespace ubmlab {

/// One line of a comparison report: named numeric columns plus a verdict.
struct ReportRow {
    std::string label;
    std::map<std::string, double> values;
    std::optional<Verdict> verdict;
};

struct Report {
    std::string kind;
    std::string version = UBMLAB_VERSION;
    nlohmann::json inputs = nlohmann::json::object();
    std::vector<ReportRow> rows;

    /// True when no row carries a fail or flag verdict.
    [[nodiscard]] bool all_pass() const;
    ReportRow& add_row(std::string label);
};

/// Row built from an Monte Carlo estimate: empirical, stderr, n_samples,
/// predicted (when present) and the estimate's verdict.
ReportRow estimate_row(std::string label, const Estimate& e);

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

void write_report_json(const Report& report, const std::filesystem::path& path);
Report read_report_json(const std::filesystem::path& path);

/// "# kind=... version=..." line, then a header label,<columns>,verdict,rule.
void write_report_csv(const Report& report, std::ostream& out);
Report read_report_csv(std::istream& in);

/// Shortest text with 17 significant digits.
std::string format_double(double x);

}  // namespace ubmlab
