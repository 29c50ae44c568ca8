// gatecell: train and compare the four gated-cell formulations, audit their
// parameter counts, gradient-check the full model, generate data fixtures and
// render run reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gatecell/config.hpp"
#include "gatecell/fixtures.hpp"
#include "gatecell/harness.hpp"
#include "gatecell/report.hpp"

namespace {

using namespace gatecell;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

struct TrainFlags {
    std::string config_path;
    std::string task, variant;
    std::size_t hidden = 0, epochs = 0, batch_size = 0, patience = 0;
    std::uint64_t seed = 0;
    double eta0 = 0.0, dropout_embed = 0.0, dropout_rows = 0.0, forget_bias = 0.0, clip_norm = 0.0;
    std::string train_images, train_labels, test_images, test_labels, tokens_train, tokens_test;
    std::size_t vocab = 0, embed_dim = 0, maxlen = 0, train_limit = 0, test_limit = 0;
    bool no_wall_time = false;
    std::string out_dir;
};

void add_train_options(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--config", f.config_path, "run configuration file (key = value lines)");
    cmd->add_option("--task", f.task, "mnist-pixel | mnist-row | tokens");
    cmd->add_option("--variant", f.variant, "vanilla | lstm1 | lstm2 | lstm3");
    cmd->add_option("--hidden", f.hidden, "hidden units n");
    cmd->add_option("--eta0", f.eta0, "learning rate coefficient (lr = eta0 * exp(loss))");
    cmd->add_option("--epochs", f.epochs, "epoch budget");
    cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    cmd->add_option("--patience", f.patience, "early-stopping patience in epochs");
    cmd->add_option("--seed", f.seed, "master seed; fixes every random draw");
    cmd->add_option("--dropout-embed", f.dropout_embed, "elementwise dropout rate on embeddings");
    cmd->add_option("--dropout-rows", f.dropout_rows, "row dropout rate on the recurrent weight matrices");
    cmd->add_option("--forget-bias", f.forget_bias, "initial forget-gate bias (when b_f exists)");
    cmd->add_option("--train-images", f.train_images, "IDX image file (gzip ok)");
    cmd->add_option("--train-labels", f.train_labels, "IDX label file (gzip ok)");
    cmd->add_option("--test-images", f.test_images, "IDX image file (gzip ok)");
    cmd->add_option("--test-labels", f.test_labels, "IDX label file (gzip ok)");
    cmd->add_option("--tokens-train", f.tokens_train, "token file: label<TAB>id id id ...");
    cmd->add_option("--tokens-test", f.tokens_test, "token file: label<TAB>id id id ...");
    cmd->add_option("--vocab", f.vocab, "vocabulary size (token task)");
    cmd->add_option("--embed-dim", f.embed_dim, "embedding dimension (token task)");
    cmd->add_option("--maxlen", f.maxlen, "pad/truncate length (token task)");
    cmd->add_option("--train-limit", f.train_limit, "fixed-seed training subset size (0 = all)");
    cmd->add_option("--test-limit", f.test_limit, "fixed-seed test subset size (0 = all)");
    cmd->add_option("--clip-norm", f.clip_norm, "global gradient-norm clip (0 disables)");
    cmd->add_flag("--no-wall-time", f.no_wall_time, "write 0 in the wall_time_s column (byte-stable CSVs)");
    cmd->add_option("--out", f.out_dir, "run directory for metrics.csv, model.bin, summary.txt");
}

RunConfig build_config(const CLI::App* cmd, const TrainFlags& f) {
    RunConfig config;
    if (cmd->count("--config")) config = load_config_file(f.config_path);
    auto set = [&](const char* flag, auto&& apply) {
        if (cmd->count(flag)) apply();
    };
    set("--task", [&] {
        const auto t = task_from_name(f.task);
        if (!t) throw std::invalid_argument("task: unknown name '" + f.task +
                                            "' (valid: mnist-pixel, mnist-row, tokens)");
        config.task = *t;
    });
    set("--variant", [&] {
        const auto v = variant_from_name(f.variant);
        if (!v) throw std::invalid_argument("variant: unknown name '" + f.variant +
                                            "' (valid: vanilla, lstm1, lstm2, lstm3)");
        config.variant = *v;
    });
    set("--hidden", [&] { config.hidden = f.hidden; });
    set("--eta0", [&] { config.eta0 = f.eta0; });
    set("--epochs", [&] { config.epochs = f.epochs; });
    set("--batch-size", [&] { config.batch_size = f.batch_size; });
    set("--patience", [&] { config.patience = f.patience; });
    set("--seed", [&] { config.seed = f.seed; });
    set("--dropout-embed", [&] { config.dropout.embed_rate = f.dropout_embed; });
    set("--dropout-rows", [&] { config.dropout.row_rate = f.dropout_rows; });
    set("--forget-bias", [&] { config.forget_bias_init = f.forget_bias; });
    set("--train-images", [&] { config.train_images = f.train_images; });
    set("--train-labels", [&] { config.train_labels = f.train_labels; });
    set("--test-images", [&] { config.test_images = f.test_images; });
    set("--test-labels", [&] { config.test_labels = f.test_labels; });
    set("--tokens-train", [&] { config.tokens_train = f.tokens_train; });
    set("--tokens-test", [&] { config.tokens_test = f.tokens_test; });
    set("--vocab", [&] { config.vocab_size = f.vocab; });
    set("--embed-dim", [&] { config.embed_dim = f.embed_dim; });
    set("--maxlen", [&] { config.maxlen = f.maxlen; });
    set("--train-limit", [&] { config.train_limit = f.train_limit; });
    set("--test-limit", [&] { config.test_limit = f.test_limit; });
    set("--clip-norm", [&] { config.clip_norm = f.clip_norm; });
    set("--no-wall-time", [&] { config.record_wall_time = false; });
    set("--out", [&] { config.out_dir = f.out_dir; });
    return config;
}

int cmd_train(const CLI::App* cmd, const TrainFlags& flags) {
    RunConfig config = build_config(cmd, flags);
    config.print_rows = true;
    validate(config);
    std::cout << kMetricsHeader << std::endl;
    RunSummary summary = run_experiment(config);
    std::cout << "status: " << summary.status << "\n";
    std::cout << "param_count: " << summary.params << "\n";
    std::cout << "best_accuracy: " << format_double(summary.best_accuracy) << " (epoch "
              << summary.best_epoch << ")\n";
    std::cout << "run_dir: " << summary.run_dir << std::endl;
    if (summary.status == "diverged") {
        std::cerr << "diverged: " << summary.error << std::endl;
        return kExitDiverged;
    }
    return kExitOk;
}

int cmd_params(const std::string& variant_name_str, std::size_t m, std::size_t n) {
    const auto v = variant_from_name(variant_name_str);
    if (!v) {
        std::cerr << "unknown variant '" << variant_name_str
                  << "' (valid: vanilla, lstm1, lstm2, lstm3)" << std::endl;
        return kExitUsage;
    }
    const std::size_t count = param_count(*v, m, n);
    const std::size_t vanilla = param_count(GateVariant::Vanilla, m, n);
    std::cout << "param_count: " << count << "\n";
    std::cout << "delta_vs_vanilla: " << (static_cast<long long>(count) - static_cast<long long>(vanilla))
              << std::endl;
    return kExitOk;
}

int cmd_gradcheck(const std::string& variant_arg, std::size_t m, std::size_t n, std::size_t seq_len,
                  std::size_t batch, std::size_t classes, std::size_t vocab, double eps,
                  std::uint64_t seed, bool dense) {
    std::vector<GateVariant> variants;
    if (variant_arg == "all") {
        variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
    } else {
        const auto v = variant_from_name(variant_arg);
        if (!v) {
            std::cerr << "unknown variant '" << variant_arg
                      << "' (valid: vanilla, lstm1, lstm2, lstm3, all)" << std::endl;
            return kExitUsage;
        }
        variants.push_back(*v);
    }

    constexpr double kThreshold = 1e-5;
    bool ok = true;
    for (GateVariant v : variants) {
        Rng root(seed + static_cast<std::uint64_t>(v));
        Model model;
        Rng lstm_rng = root.substream(streams::kInitLstm);
        model.lstm = init_params(v, m, n, lstm_rng);
        if (!dense) {
            Rng emb_rng = root.substream(streams::kInitEmbedding);
            model.embedding = init_embedding(vocab, m, emb_rng);
        }
        Rng head_rng = root.substream(streams::kInitHead);
        model.head = init_head(classes, n, head_rng);

        SequenceBatch data;
        Rng data_rng = root.substream(streams::kGradCheck);
        if (dense) {
            for (std::size_t t = 0; t < seq_len; ++t)
                data.dense.push_back(data_rng.uniform_matrix(m, batch, -1.0, 1.0));
        } else {
            data.tokens.resize(batch);
            for (auto& row : data.tokens) {
                row.resize(seq_len);
                for (auto& id : row) id = static_cast<std::uint32_t>(data_rng.below(vocab));
            }
        }
        for (std::size_t b = 0; b < batch; ++b)
            data.labels.push_back(static_cast<int>(data_rng.below(classes)));

        GradCheckResult res = gradient_check_model(model, data, eps);
        const bool pass = res.max_rel_error <= kThreshold;
        ok = ok && pass;
        std::cout << variant_name(v) << ": max_rel_error=" << format_double(res.max_rel_error)
                  << " worst=" << res.worst_block << "[" << res.worst_index << "]"
                  << " analytic=" << format_double(res.analytic)
                  << " numeric=" << format_double(res.numeric) << (pass ? "  ok" : "  FAIL")
                  << std::endl;
    }
    std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (threshold " << kThreshold << ")"
              << std::endl;
    return ok ? kExitOk : kExitUsage;
}

int cmd_fixtures(const std::string& out_dir, const FixtureSpec& spec) {
    const FixturePaths paths = write_fixtures(out_dir, spec);
    std::cout << paths.train_images << "\n"
              << paths.train_labels << "\n"
              << paths.test_images << "\n"
              << paths.test_labels << "\n"
              << paths.tokens_train << "\n"
              << paths.tokens_test << std::endl;
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<RunReport> runs;
    for (const std::string& dir : run_dirs) {
        RunReport report = read_run_dir(dir);
        if (!report.ok)
            std::cerr << "warning: skipping " << dir << ": " << report.warning << std::endl;
        runs.push_back(std::move(report));
    }
    const std::string table = report_table(runs);
    std::cout << table;
    {
        std::ofstream out(out_dir + "/table.txt");
        out << table;
    }
    {
        std::ofstream out(out_dir + "/table.csv");
        out << report_table_csv(runs);
    }
    for (const RunReport& run : runs) {
        if (!run.ok) continue;
        const std::string name = std::filesystem::path(run.dir).filename().string();
        const auto it = run.summary.find("variant");
        const std::string title = (it == run.summary.end() ? name : it->second + " - " + name);
        std::ofstream out(out_dir + "/" + name + ".svg");
        out << svg_accuracy_curve(title, run.metrics);
    }
    return kExitOk;
}

int cmd_sweep(const CLI::App* cmd, const TrainFlags& flags, const std::string& variants_csv,
              const std::vector<double>& eta0s, const std::string& out_root) {
    RunConfig base = build_config(cmd, flags);
    std::vector<GateVariant> variants;
    {
        std::istringstream ss(variants_csv);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
            const auto v = variant_from_name(piece);
            if (!v) throw std::invalid_argument("unknown variant '" + piece + "' in --variants");
            variants.push_back(*v);
        }
    }
    std::vector<double> rates = eta0s.empty() ? std::vector<double>{base.eta0} : eta0s;

    std::vector<RunConfig> configs;
    for (GateVariant v : variants)
        for (double eta0 : rates) {
            RunConfig c = base;
            c.variant = v;
            c.eta0 = eta0;
            c.out_dir = out_root + "/" + variant_name(v) + "-eta" + format_double(eta0);
            validate(c);
            configs.push_back(std::move(c));
        }

    const std::vector<RunSummary> rows = sweep(configs);
    std::vector<RunReport> reports;
    for (const RunSummary& row : rows) {
        if (row.status == "error") {
            std::cerr << "warning: " << row.run_dir << ": " << row.error << std::endl;
            RunReport r;
            r.dir = row.run_dir;
            r.ok = false;
            r.warning = row.error;
            reports.push_back(std::move(r));
            continue;
        }
        reports.push_back(read_run_dir(row.run_dir));
    }
    const std::string table = report_table(reports);
    std::cout << table;
    std::filesystem::create_directories(out_root);
    std::ofstream(out_root + "/table.txt") << table;
    std::ofstream(out_root + "/table.csv") << report_table_csv(reports);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gated-recurrent cell variants: training, auditing and reporting"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    CLI::App* train = app.add_subcommand("train", "run one training experiment");
    add_train_options(train, train_flags);

    TrainFlags sweep_flags;
    std::string sweep_variants = "vanilla,lstm1,lstm2,lstm3";
    std::vector<double> sweep_eta0s;
    std::string sweep_out = "runs/sweep";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a variant x eta0 grid and tabulate it");
    add_train_options(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--variants", sweep_variants, "comma-separated variant list");
    sweep_cmd->add_option("--eta0s", sweep_eta0s, "learning-rate coefficients to sweep")->delimiter(',');
    sweep_cmd->add_option("--sweep-out", sweep_out, "root directory for the sweep's run dirs");

    std::string params_variant;
    std::size_t params_m = 0, params_n = 0;
    CLI::App* params = app.add_subcommand("params", "print the exact parameter count");
    params->add_option("--variant", params_variant, "vanilla | lstm1 | lstm2 | lstm3")->required();
    params->add_option("--m", params_m, "input dimension")->required();
    params->add_option("--n", params_n, "hidden units")->required();

    std::string gc_variant = "all";
    std::size_t gc_m = 3, gc_n = 5, gc_T = 4, gc_B = 2, gc_K = 3, gc_vocab = 13;
    double gc_eps = 1e-5;
    std::uint64_t gc_seed = 1;
    bool gc_dense = false;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full model");
    gradcheck->add_option("--variant", gc_variant, "variant name or 'all'");
    gradcheck->add_option("--m", gc_m, "input dimension");
    gradcheck->add_option("--n", gc_n, "hidden units");
    gradcheck->add_option("--seq-len", gc_T, "timesteps");
    gradcheck->add_option("--batch", gc_B, "batch size");
    gradcheck->add_option("--classes", gc_K, "classes");
    gradcheck->add_option("--vocab", gc_vocab, "vocabulary (embedding chain)");
    gradcheck->add_option("--eps", gc_eps, "finite-difference step");
    gradcheck->add_option("--seed", gc_seed, "seed");
    gradcheck->add_flag("--dense", gc_dense, "check the dense chain (no embedding)");

    FixtureSpec fx;
    std::string fx_out = "fixtures";
    CLI::App* fixtures = app.add_subcommand("fixtures", "write miniature synthetic datasets");
    fixtures->add_option("--out", fx_out, "output directory");
    fixtures->add_option("--images", fx.train_images, "training image count");
    fixtures->add_option("--test-images", fx.test_images, "test image count");
    fixtures->add_option("--tokens", fx.token_train, "training token sequences");
    fixtures->add_option("--test-tokens", fx.token_test, "test token sequences");
    fixtures->add_option("--window", fx.window, "parity window = the maxlen to train with");
    fixtures->add_option("--seed", fx.seed, "seed");

    std::vector<std::string> report_dirs;
    std::string report_out = "report";
    CLI::App* report = app.add_subcommand("report", "tabulate runs and render accuracy curves");
    report->add_option("dirs", report_dirs, "run directories")->required();
    report->add_option("--out", report_out, "output directory for table + SVGs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train) return cmd_train(train, train_flags);
        if (*sweep_cmd) return cmd_sweep(sweep_cmd, sweep_flags, sweep_variants, sweep_eta0s, sweep_out);
        if (*params) return cmd_params(params_variant, params_m, params_n);
        if (*gradcheck)
            return cmd_gradcheck(gc_variant, gc_m, gc_n, gc_T, gc_B, gc_K, gc_vocab, gc_eps, gc_seed,
                                 gc_dense);
        if (*fixtures) return cmd_fixtures(fx_out, fx);
        if (*report) return cmd_report(report_dirs, report_out);
    } catch (const gatecell::DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << std::endl;
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitUsage;
    }
    return kExitUsage;
}
