#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "gatecell/report.hpp"
#include "test_support.hpp"

using namespace gatecell;
using gatecell::testing::temp_dir;

namespace {

void write_run_dir(const std::string& dir, const std::vector<MetricsRecord>& rows,
                   const std::string& status) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir + "/metrics.csv");
    csv << kMetricsHeader << "\n";
    for (const auto& r : rows) csv << metrics_csv_row(r) << "\n";
    RunSummary s;
    s.variant = GateVariant::NoInput;
    s.m = 28;
    s.n = 6;
    s.params = param_count(s.variant, s.m, s.n);
    s.eta0 = 1e-3;
    s.status = status;
    s.metrics = rows;
    for (const auto& r : rows)
        if (r.test_accuracy > s.best_accuracy) {
            s.best_accuracy = r.test_accuracy;
            s.best_epoch = r.epoch;
        }
    write_summary_file(dir + "/summary.txt", s);
}

std::vector<MetricsRecord> sample_rows(std::size_t epochs) {
    std::vector<MetricsRecord> rows;
    for (std::size_t e = 1; e <= epochs; ++e) {
        MetricsRecord r;
        r.epoch = e;
        r.train_loss = 2.0 / static_cast<double>(e);
        r.test_accuracy = 0.5 + 0.04 * static_cast<double>(e);
        r.lr = 1e-3;
        rows.push_back(r);
    }
    return rows;
}

} // namespace

TEST_CASE("metrics csv round-trips through the reader") {
    const std::string dir = temp_dir("report_csv");
    const auto rows = sample_rows(5);
    write_run_dir(dir, rows, "completed");
    auto back = read_metrics_csv(dir + "/metrics.csv");
    REQUIRE(back.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(back[i].epoch == rows[i].epoch);
        CHECK(back[i].train_loss == rows[i].train_loss); // shortest round-trip decimal
        CHECK(back[i].test_accuracy == rows[i].test_accuracy);
        CHECK(back[i].lr == rows[i].lr);
    }
}

TEST_CASE("malformed metrics csv raises with the line number") {
    const std::string dir = temp_dir("report_badcsv");
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir + "/metrics.csv");
        csv << kMetricsHeader << "\n";
        csv << "1,0.5,0.6,0.001,0\n";
        csv << "2,oops\n";
    }
    CHECK_THROWS_WITH_AS(read_metrics_csv(dir + "/metrics.csv"), doctest::Contains("line 3"), ParseError);

    {
        std::ofstream csv(dir + "/metrics.csv");
        csv << "wrong,header\n";
    }
    CHECK_THROWS_WITH_AS(read_metrics_csv(dir + "/metrics.csv"), doctest::Contains("header"), ParseError);
}

TEST_CASE("read_run_dir flags unreadable runs instead of throwing") {
    RunReport missing = read_run_dir(temp_dir("report_missing"));
    CHECK(!missing.ok);
    CHECK(!missing.warning.empty());
}

TEST_CASE("svg curve spans the full accuracy range and every epoch") {
    const auto rows = sample_rows(12);
    const std::string svg = svg_accuracy_curve("demo", rows);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    // y-axis tick labels cover [0, 1]
    CHECK(svg.find(">0</text>") != std::string::npos);
    CHECK(svg.find(">1</text>") != std::string::npos);
    // last epoch appears as an x tick
    CHECK(svg.find(">12</text>") != std::string::npos);
    CHECK(svg.find("test accuracy") != std::string::npos);

    // single-epoch runs still render
    const std::string tiny = svg_accuracy_curve("one", sample_rows(1));
    CHECK(tiny.find("<polyline") != std::string::npos);
}

TEST_CASE("report table annotates diverged runs and keeps row count") {
    const std::string a = temp_dir("report_a");
    const std::string b = temp_dir("report_b");
    write_run_dir(a, sample_rows(3), "completed");
    write_run_dir(b, sample_rows(2), "diverged");

    std::vector<RunReport> runs = {read_run_dir(a), read_run_dir(b)};
    const std::string table = report_table(runs);
    CHECK(table.find("(diverged)") != std::string::npos);
    // header + two rows
    std::size_t lines = 0;
    for (char c : table)
        if (c == '\n') ++lines;
    CHECK(lines == 3);

    const std::string csv = report_table_csv(runs);
    CHECK(csv.find("diverged") != std::string::npos);
    CHECK(csv.rfind("variant,eta0,params", 0) == 0);
}
