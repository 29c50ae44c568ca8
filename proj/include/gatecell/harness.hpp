#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gatecell/data.hpp"
#include "gatecell/model.hpp"
#include "gatecell/optim.hpp"

namespace gatecell {

// Fixed substream ids; every stochastic consumer owns one, so adding a
// consumer never shifts another's draws.
namespace streams {
constexpr std::uint64_t kInitLstm = 1;
constexpr std::uint64_t kInitEmbedding = 2;
constexpr std::uint64_t kInitHead = 3;
constexpr std::uint64_t kShuffle = 4;
constexpr std::uint64_t kDropoutEmbed = 5;
constexpr std::uint64_t kDropoutRows = 6;
constexpr std::uint64_t kSubsetTrain = 7;
constexpr std::uint64_t kSubsetTest = 8;
constexpr std::uint64_t kFixtures = 9;
constexpr std::uint64_t kGradCheck = 10;
} // namespace streams

enum class TaskKind { MnistPixel, MnistRow, Tokens };

const char* task_name(TaskKind t);
std::optional<TaskKind> task_from_name(std::string_view name);

struct RunConfig {
    GateVariant variant = GateVariant::Vanilla;
    std::size_t hidden = 50;
    double eta0 = 1e-3;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::size_t patience = 25;
    std::uint64_t seed = 1;
    TaskKind task = TaskKind::MnistRow;
    DropoutSpec dropout;
    double forget_bias_init = 0.0;

    std::string train_images, train_labels, test_images, test_labels;
    std::string tokens_train, tokens_test;

    std::size_t vocab_size = 20000;
    std::size_t embed_dim = 128;
    std::size_t maxlen = 80;

    std::size_t train_limit = 0, test_limit = 0; // 0 = whole set
    double clip_norm = 0.0;                      // 0 = no clipping
    bool record_wall_time = true;                // false pins the CSV byte-for-byte
    bool print_rows = false;                     // echo each CSV row to stdout
    std::string out_dir = "runs/out";
};

void validate(const RunConfig& config); // throws std::invalid_argument

struct MetricsRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;    // nats, mean over the epoch's examples
    double test_accuracy = 0.0;
    double lr = 0.0;            // eta0 * exp(previous epoch's loss)
    double wall_time_s = 0.0;   // training pass only
};

constexpr const char* kMetricsHeader = "epoch,train_loss,test_accuracy,lr,wall_time_s";

std::string format_double(double v); // shortest round-trip decimal
std::string metrics_csv_row(const MetricsRecord& r);

// Loaded, subset and (for images) standardized data for one task.
struct TaskData {
    TaskKind task = TaskKind::MnistRow;
    ImageSet train_images, test_images;
    TokenSet train_tokens, test_tokens;

    std::size_t train_count() const;
    std::size_t test_count() const;
};

TaskData load_task_data(const RunConfig& config);

std::size_t input_dim(const RunConfig& config, const TaskData& data);
std::size_t class_count(TaskKind task); // 10 for mnist tasks, 2 for tokens

Model build_model(const RunConfig& config, const TaskData& data);

struct TrainState {
    RmspropState rmsprop;
    LrSchedule schedule; // current_loss = previous epoch's mean loss (or the probe)
    EarlyStopper<Model> stopper;
    std::uint64_t seed = 0;
};

TrainState init_train_state(Model& model, const RunConfig& config);

// Mean loss of a single forward pass over the first training batch, dropout
// off, no update; seeds the schedule for epoch 1.
double probe_loss(const Model& model, const TaskData& data, const RunConfig& config);

// Mean loss over one batch with dropout disabled and no parameter update.
double model_loss(const Model& model, const SequenceBatch& batch);

// Loss plus analytic gradients. When training, dropout_rng drives the batch's
// element and row masks (one row mask per mini-batch, reused by backward).
double model_loss_and_grads(const Model& model, const SequenceBatch& batch, ModelGrads& grads,
                            const DropoutSpec& dropout = {}, Rng* embed_rng = nullptr,
                            Rng* rows_rng = nullptr);

// One pass over shuffled batches with the epoch's fixed dynamic lr.
// Throws DivergenceError (naming batch index and lr) on a non-finite loss.
MetricsRecord train_epoch(Model& model, const TaskData& data, const RunConfig& config,
                          TrainState& state, std::size_t epoch);

std::vector<SequenceBatch> test_batches(const TaskData& data, const RunConfig& config);

// Argmax accuracy with dropout disabled; ties resolve to the lowest class id.
double evaluate(const Model& model, const std::vector<SequenceBatch>& batches);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_block;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central finite differences per parameter against the analytic gradients;
// relative error |a - n| / max(|a|, |n|, 1e-12). Dropout disabled.
GradCheckResult gradient_check_model(Model& model, const SequenceBatch& batch, double eps = 1e-5);

struct RunSummary {
    GateVariant variant = GateVariant::Vanilla;
    std::size_t m = 0, n = 0;
    std::size_t params = 0;
    double best_accuracy = 0.0;
    std::size_t best_epoch = 0;
    std::string status; // completed | early_stopped | diverged
    std::string error;  // divergence diagnostic, empty otherwise
    std::vector<MetricsRecord> metrics;
    std::string run_dir;
    double eta0 = 0.0;
};

// Full protocol: train/evaluate until the epoch budget or early stop, then
// write metrics.csv, the best checkpoint (model.bin) and summary.txt into
// config.out_dir. Divergence is recorded, not rethrown.
RunSummary run_experiment(const RunConfig& config);

void write_summary_file(const std::string& path, const RunSummary& summary);

// Runs each config; failures are recorded per-row and the sweep continues.
std::vector<RunSummary> sweep(const std::vector<RunConfig>& configs);

} // namespace gatecell
