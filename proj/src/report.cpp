#include "gatecell/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gatecell {

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw ParseError(path + ": line 1: bad header '" + line + "'");
    std::vector<MetricsRecord> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        MetricsRecord rec;
        try {
            std::getline(ss, field, ',');
            rec.epoch = std::stoull(field);
            std::getline(ss, field, ',');
            rec.train_loss = std::stod(field);
            std::getline(ss, field, ',');
            rec.test_accuracy = std::stod(field);
            std::getline(ss, field, ',');
            rec.lr = std::stod(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("missing field");
            rec.wall_time_s = std::stod(field);
        } catch (const std::exception&) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": malformed row '" + line + "'");
        }
        rows.push_back(rec);
    }
    return rows;
}

std::map<std::string, std::string> read_summary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

RunReport read_run_dir(const std::string& dir) {
    RunReport report;
    report.dir = dir;
    try {
        report.summary = read_summary_file(dir + "/summary.txt");
        report.metrics = read_metrics_csv(dir + "/metrics.csv");
        report.ok = true;
    } catch (const std::exception& e) {
        report.ok = false;
        report.warning = e.what();
    }
    return report;
}

namespace {

constexpr double kSvgW = 640, kSvgH = 400;
constexpr double kMarginL = 60, kMarginR = 20, kMarginT = 36, kMarginB = 44;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

} // namespace

std::string svg_accuracy_curve(const std::string& title, const std::vector<MetricsRecord>& metrics) {
    const double plot_w = kSvgW - kMarginL - kMarginR;
    const double plot_h = kSvgH - kMarginT - kMarginB;
    std::size_t max_epoch = 1;
    for (const MetricsRecord& r : metrics) max_epoch = std::max(max_epoch, r.epoch);

    auto x_of = [&](double epoch) {
        return kMarginL + (max_epoch > 1 ? (epoch - 1.0) / (static_cast<double>(max_epoch) - 1.0) : 0.5) * plot_w;
    };
    auto y_of = [&](double acc) { return kMarginT + (1.0 - acc) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgW << "\" height=\"" << kSvgH
        << "\" viewBox=\"0 0 " << kSvgW << " " << kSvgH << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kSvgW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << title << "</text>\n";

    // axes: y is accuracy in [0, 1], x is epoch 1..max
    svg << "<line x1=\"" << kMarginL << "\" y1=\"" << y_of(0.0) << "\" x2=\"" << kMarginL + plot_w
        << "\" y2=\"" << y_of(0.0) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kMarginL << "\" y1=\"" << y_of(0.0) << "\" x2=\"" << kMarginL << "\" y2=\""
        << y_of(1.0) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double acc = i / 5.0;
        svg << "<line x1=\"" << kMarginL - 4 << "\" y1=\"" << y_of(acc) << "\" x2=\"" << kMarginL
            << "\" y2=\"" << y_of(acc) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kMarginL - 8 << "\" y=\"" << y_of(acc) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(acc)
            << "</text>\n";
        svg << "<line x1=\"" << kMarginL << "\" y1=\"" << y_of(acc) << "\" x2=\"" << kMarginL + plot_w
            << "\" y2=\"" << y_of(acc) << "\" stroke=\"#dddddd\"/>\n";
    }
    const std::size_t x_ticks = std::min<std::size_t>(max_epoch, 8);
    for (std::size_t i = 0; i < x_ticks; ++i) {
        const std::size_t epoch =
            x_ticks == 1 ? 1 : 1 + i * (max_epoch - 1) / (x_ticks - 1);
        svg << "<line x1=\"" << x_of(static_cast<double>(epoch)) << "\" y1=\"" << y_of(0.0) << "\" x2=\""
            << x_of(static_cast<double>(epoch)) << "\" y2=\"" << y_of(0.0) + 4 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x_of(static_cast<double>(epoch)) << "\" y=\"" << y_of(0.0) + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << epoch
            << "</text>\n";
    }
    svg << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kSvgH - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">epoch</text>\n";
    svg << "<text x=\"14\" y=\"" << kMarginT + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
        << kMarginT + plot_h / 2 << ")\">test accuracy</text>\n";

    if (!metrics.empty()) {
        svg << "<polyline fill=\"none\" stroke=\"#1965b0\" stroke-width=\"1.5\" points=\"";
        for (const MetricsRecord& r : metrics)
            svg << fmt(x_of(static_cast<double>(r.epoch))) << "," << fmt(y_of(r.test_accuracy)) << " ";
        svg << "\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace {

std::string summary_get(const RunReport& r, const std::string& key) {
    const auto it = r.summary.find(key);
    return it == r.summary.end() ? std::string("?") : it->second;
}

std::string accuracy_cell(const RunReport& r) {
    const std::string status = summary_get(r, "status");
    std::string acc = summary_get(r, "best_accuracy");
    if (status == "diverged") acc += " (diverged)";
    return acc;
}

} // namespace

std::string report_table(const std::vector<RunReport>& runs) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "variant" << std::setw(12) << "eta0" << std::setw(10) << "params"
       << std::setw(22) << "best_accuracy" << std::setw(12) << "best_epoch" << std::setw(14) << "status"
       << "run_dir\n";
    for (const RunReport& r : runs) {
        if (!r.ok) {
            os << std::left << std::setw(10) << "?" << std::setw(12) << "?" << std::setw(10) << "?"
               << std::setw(22) << "unreadable" << std::setw(12) << "-" << std::setw(14) << "skipped"
               << r.dir << "\n";
            continue;
        }
        os << std::left << std::setw(10) << summary_get(r, "variant") << std::setw(12)
           << summary_get(r, "eta0") << std::setw(10) << summary_get(r, "param_count") << std::setw(22)
           << accuracy_cell(r) << std::setw(12) << summary_get(r, "best_epoch") << std::setw(14)
           << summary_get(r, "status") << r.dir << "\n";
    }
    return os.str();
}

std::string report_table_csv(const std::vector<RunReport>& runs) {
    std::ostringstream os;
    os << "variant,eta0,params,best_accuracy,best_epoch,status,run_dir\n";
    for (const RunReport& r : runs) {
        if (!r.ok) {
            os << "?,?,?,?,?,skipped," << r.dir << "\n";
            continue;
        }
        os << summary_get(r, "variant") << "," << summary_get(r, "eta0") << ","
           << summary_get(r, "param_count") << "," << summary_get(r, "best_accuracy") << ","
           << summary_get(r, "best_epoch") << "," << summary_get(r, "status") << "," << r.dir << "\n";
    }
    return os.str();
}

} // namespace gatecell
