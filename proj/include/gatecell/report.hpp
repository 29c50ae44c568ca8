#pragma once

#include <map>
#include <string>
#include <vector>

#include "gatecell/harness.hpp"

namespace gatecell {

// One run directory's metrics.csv + summary.txt, as read back for reporting.
struct RunReport {
    std::string dir;
    std::map<std::string, std::string> summary;
    std::vector<MetricsRecord> metrics;
    bool ok = false;
    std::string warning; // why the run was skipped, when !ok
};

std::vector<MetricsRecord> read_metrics_csv(const std::string& path); // ParseError when malformed
std::map<std::string, std::string> read_summary_file(const std::string& path);

// Never throws; a malformed run comes back with ok=false and a warning.
RunReport read_run_dir(const std::string& dir);

// Standalone SVG line plot of test accuracy against epoch. The y axis always
// spans [0,1]; the x axis covers every epoch present.
std::string svg_accuracy_curve(const std::string& title, const std::vector<MetricsRecord>& metrics);

// Best-accuracy comparison keyed (variant, eta0); diverged runs annotated.
std::string report_table(const std::vector<RunReport>& runs);
std::string report_table_csv(const std::vector<RunReport>& runs);

} // namespace gatecell
