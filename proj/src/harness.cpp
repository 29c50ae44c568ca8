#include "gatecell/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gatecell/checkpoint.hpp"

namespace gatecell {

const char* task_name(TaskKind t) {
    switch (t) {
    case TaskKind::MnistPixel: return "mnist-pixel";
    case TaskKind::MnistRow: return "mnist-row";
    case TaskKind::Tokens: return "tokens";
    }
    return "?";
}

std::optional<TaskKind> task_from_name(std::string_view name) {
    if (name == "mnist-pixel") return TaskKind::MnistPixel;
    if (name == "mnist-row") return TaskKind::MnistRow;
    if (name == "tokens") return TaskKind::Tokens;
    return std::nullopt;
}

void validate(const RunConfig& config) {
    if (!(config.eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
    if (config.hidden == 0) throw std::invalid_argument("hidden must be >= 1");
    if (config.epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (config.patience == 0) throw std::invalid_argument("patience must be >= 1");
    if (config.dropout.embed_rate < 0.0 || config.dropout.embed_rate >= 1.0 ||
        config.dropout.row_rate < 0.0 || config.dropout.row_rate >= 1.0)
        throw std::invalid_argument("dropout rates must be in [0, 1)");
    if (config.task == TaskKind::Tokens) {
        if (config.vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
        if (config.embed_dim == 0) throw std::invalid_argument("embed_dim must be >= 1");
        if (config.maxlen == 0) throw std::invalid_argument("maxlen must be >= 1");
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string metrics_csv_row(const MetricsRecord& r) {
    return std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.test_accuracy) + "," + format_double(r.lr) + "," +
           format_double(r.wall_time_s);
}

std::size_t TaskData::train_count() const {
    return task == TaskKind::Tokens ? train_tokens.sequences.size() : train_images.count;
}

std::size_t TaskData::test_count() const {
    return task == TaskKind::Tokens ? test_tokens.sequences.size() : test_images.count;
}

TaskData load_task_data(const RunConfig& config) {
    TaskData data;
    data.task = config.task;
    Rng root(config.seed);
    if (config.task == TaskKind::Tokens) {
        data.train_tokens = load_tokens(config.tokens_train, config.vocab_size);
        data.test_tokens = load_tokens(config.tokens_test, config.vocab_size);
        Rng train_rng = root.substream(streams::kSubsetTrain);
        Rng test_rng = root.substream(streams::kSubsetTest);
        data.train_tokens = subset(data.train_tokens, config.train_limit, train_rng);
        data.test_tokens = subset(data.test_tokens, config.test_limit, test_rng);
    } else {
        data.train_images = load_image_set(config.train_images, config.train_labels);
        data.test_images = load_image_set(config.test_images, config.test_labels);
        Rng train_rng = root.substream(streams::kSubsetTrain);
        Rng test_rng = root.substream(streams::kSubsetTest);
        data.train_images = subset(data.train_images, config.train_limit, train_rng);
        data.test_images = subset(data.test_images, config.test_limit, test_rng);
        standardize(data.train_images, data.test_images);
    }
    return data;
}

std::size_t input_dim(const RunConfig& config, const TaskData& data) {
    switch (config.task) {
    case TaskKind::MnistPixel: return 1;
    case TaskKind::MnistRow: return data.train_images.width ? data.train_images.width : 28;
    case TaskKind::Tokens: return config.embed_dim;
    }
    return 0;
}

std::size_t class_count(TaskKind task) { return task == TaskKind::Tokens ? 2 : 10; }

Model build_model(const RunConfig& config, const TaskData& data) {
    Rng root(config.seed);
    Model model;
    Rng lstm_rng = root.substream(streams::kInitLstm);
    model.lstm = init_params(config.variant, input_dim(config, data), config.hidden, lstm_rng,
                             config.forget_bias_init);
    if (config.task == TaskKind::Tokens) {
        Rng emb_rng = root.substream(streams::kInitEmbedding);
        model.embedding = init_embedding(config.vocab_size, config.embed_dim, emb_rng);
    }
    Rng head_rng = root.substream(streams::kInitHead);
    model.head = init_head(class_count(config.task), config.hidden, head_rng);
    check_model_dims(model);
    return model;
}

TrainState init_train_state(Model& model, const RunConfig& config) {
    TrainState state;
    state.rmsprop = make_rmsprop_state(model_tensors(model));
    state.schedule.eta0 = config.eta0;
    state.schedule.current_loss = 0.0;
    state.stopper.patience = config.patience;
    state.seed = config.seed;
    return state;
}

namespace {

// present weight matrices in block order; the row-dropout surface (biases untouched)
std::vector<Matrix*> lstm_weight_matrices(LstmParams& p) {
    std::vector<Matrix*> mats;
    for (GateBlock* blk : {&p.gate_i, &p.gate_f, &p.gate_o}) {
        if (blk->w) mats.push_back(&*blk->w);
        if (blk->u) mats.push_back(&*blk->u);
    }
    mats.push_back(&p.w_c);
    mats.push_back(&p.u_c);
    return mats;
}

struct BatchWork {
    LstmParams masked_lstm;
    bool masked = false;
    std::vector<Vector> row_scales;
    std::vector<Matrix> embed_masks;
    std::vector<Matrix> xs_own;
    const std::vector<Matrix>* xs = nullptr;
    SequenceForward seq;
    Matrix h_bt;
    Matrix logits;
    XentResult xent;
};

void run_forward(const Model& model, const SequenceBatch& batch, bool training,
                 const DropoutSpec& dropout, Rng* embed_rng, Rng* rows_rng, BatchWork& work) {
    const LstmParams* lstm = &model.lstm;
    if (training && dropout.row_rate > 0.0) {
        if (!rows_rng) throw ContractError("run_forward: row dropout requested without an rng");
        work.masked_lstm = model.lstm;
        work.masked = true;
        work.row_scales.clear();
        for (Matrix* mat : lstm_weight_matrices(work.masked_lstm)) {
            Vector scale;
            *mat = dropout_rows(*mat, dropout.row_rate, *rows_rng, true, &scale);
            work.row_scales.push_back(std::move(scale));
        }
        lstm = &work.masked_lstm;
    }

    if (!batch.tokens.empty()) {
        if (!model.embedding) throw ContractError("run_forward: token batch but the model has no embedding");
        work.xs_own = embed_forward(*model.embedding, batch.tokens);
        if (training && dropout.embed_rate > 0.0) {
            if (!embed_rng) throw ContractError("run_forward: embed dropout requested without an rng");
            work.embed_masks.assign(work.xs_own.size(), Matrix());
            for (std::size_t t = 0; t < work.xs_own.size(); ++t)
                work.xs_own[t] = dropout_elems(work.xs_own[t], dropout.embed_rate, *embed_rng, true,
                                               &work.embed_masks[t]);
        } else {
            work.embed_masks.clear();
        }
        work.xs = &work.xs_own;
    } else {
        work.xs = &batch.dense;
        work.embed_masks.clear();
    }

    const Vector h0(lstm->n), c0(lstm->n);
    work.seq = forward_sequence(*lstm, *work.xs, h0, c0);
    work.h_bt = transpose(work.seq.h_last);
    work.logits = head_forward(model.head, work.h_bt);
    work.xent = softmax_xent(work.logits, batch.labels);
}

} // namespace

double model_loss(const Model& model, const SequenceBatch& batch) {
    BatchWork work;
    run_forward(model, batch, false, {}, nullptr, nullptr, work);
    return work.xent.loss;
}

double model_loss_and_grads(const Model& model, const SequenceBatch& batch, ModelGrads& grads,
                            const DropoutSpec& dropout, Rng* embed_rng, Rng* rows_rng) {
    BatchWork work;
    const bool training = embed_rng != nullptr || rows_rng != nullptr;
    run_forward(model, batch, training, dropout, embed_rng, rows_rng, work);

    HeadGrads head = head_backward(model.head, work.h_bt, work.xent.dlogits);
    const Matrix dh_last = transpose(head.dh);

    const LstmParams& lstm = work.masked ? work.masked_lstm : model.lstm;
    SequenceGrads seq = backward_sequence(lstm, work.seq.caches, dh_last);

    if (work.masked) {
        // grads above are w.r.t. the masked weights; chain through M' = diag(s) M
        std::size_t idx = 0;
        for (Matrix* mat : lstm_weight_matrices(seq.dparams)) {
            const Vector& scale = work.row_scales[idx++];
            for (std::size_t i = 0; i < mat->rows; ++i) {
                double* row = mat->row_ptr(i);
                for (std::size_t j = 0; j < mat->cols; ++j) row[j] *= scale[i];
            }
        }
    }

    if (model.embedding && !batch.tokens.empty()) {
        if (!work.embed_masks.empty())
            for (std::size_t t = 0; t < seq.dxs.size(); ++t)
                seq.dxs[t] = hadamard(seq.dxs[t], work.embed_masks[t]);
        grads.dembedding = embed_backward(batch.tokens, seq.dxs, model.embedding->vocab,
                                          model.embedding->dim);
    } else if (model.embedding) {
        grads.dembedding = Matrix(model.embedding->vocab, model.embedding->dim);
    } else {
        grads.dembedding.reset();
    }
    grads.dlstm = std::move(seq.dparams);
    grads.dhead_w = std::move(head.dw);
    grads.dhead_b = std::move(head.db);
    return work.xent.loss;
}

namespace {

std::vector<SequenceBatch> train_batches(const TaskData& data, const RunConfig& config, Rng& rng,
                                         bool shuffle) {
    if (data.task == TaskKind::Tokens)
        return batches(data.train_tokens, config.maxlen, config.batch_size, rng, shuffle);
    return batches(data.train_images, data.task == TaskKind::MnistPixel ? SeqMode::Pixel : SeqMode::Row,
                   config.batch_size, rng, shuffle);
}

} // namespace

std::vector<SequenceBatch> test_batches(const TaskData& data, const RunConfig& config) {
    Rng unused(0);
    if (data.task == TaskKind::Tokens)
        return batches(data.test_tokens, config.maxlen, config.batch_size, unused, false);
    return batches(data.test_images, data.task == TaskKind::MnistPixel ? SeqMode::Pixel : SeqMode::Row,
                   config.batch_size, unused, false);
}

double probe_loss(const Model& model, const TaskData& data, const RunConfig& config) {
    Rng unused(0);
    std::vector<SequenceBatch> all = train_batches(data, config, unused, false);
    if (all.empty()) throw ContractError("probe_loss: empty training set");
    return model_loss(model, all.front());
}

MetricsRecord train_epoch(Model& model, const TaskData& data, const RunConfig& config,
                          TrainState& state, std::size_t epoch) {
    const double lr = state.schedule.rate();
    Rng root(config.seed);
    Rng shuffle_rng = root.substream(streams::kShuffle).substream(epoch);
    const Rng embed_base = root.substream(streams::kDropoutEmbed).substream(epoch);
    const Rng rows_base = root.substream(streams::kDropoutRows).substream(epoch);

    std::vector<SequenceBatch> train = train_batches(data, config, shuffle_rng, true);

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<TensorRef> params = model_tensors(model);
    ModelGrads grads = zero_grads(model);
    double loss_sum = 0.0;
    std::size_t examples = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        Rng embed_rng = embed_base.substream(i);
        Rng rows_rng = rows_base.substream(i);
        const double loss = model_loss_and_grads(model, train[i], grads, config.dropout,
                                                 &embed_rng, &rows_rng);
        if (!std::isfinite(loss))
            throw DivergenceError(i, lr,
                                  "non-finite training loss at batch " + std::to_string(i) +
                                      " of epoch " + std::to_string(epoch) + " (lr=" + format_double(lr) + ")");
        const std::vector<TensorRef> gref = grad_tensors(grads);
        if (config.clip_norm > 0.0) clip_global_norm(gref, config.clip_norm);
        rmsprop_step(params, gref, state.rmsprop, lr);
        loss_sum += loss * static_cast<double>(train[i].batch_size());
        examples += train[i].batch_size();
    }
    const auto t1 = std::chrono::steady_clock::now();

    MetricsRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(examples);
    rec.lr = lr;
    rec.wall_time_s =
        config.record_wall_time ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
    state.schedule.current_loss = rec.train_loss;
    return rec;
}

double evaluate(const Model& model, const std::vector<SequenceBatch>& eval_batches) {
    std::size_t correct = 0, total = 0;
    for (const SequenceBatch& batch : eval_batches) {
        BatchWork work;
        run_forward(model, batch, false, {}, nullptr, nullptr, work);
        for (std::size_t b = 0; b < work.logits.rows; ++b) {
            const double* row = work.logits.row_ptr(b);
            std::size_t arg = 0;
            for (std::size_t k = 1; k < work.logits.cols; ++k)
                if (row[k] > row[arg]) arg = k;
            if (static_cast<int>(arg) == batch.labels[b]) ++correct;
            ++total;
        }
    }
    if (total == 0) throw ContractError("evaluate: empty dataset");
    return static_cast<double>(correct) / static_cast<double>(total);
}

GradCheckResult gradient_check_model(Model& model, const SequenceBatch& batch, double eps) {
    ModelGrads grads = zero_grads(model);
    model_loss_and_grads(model, batch, grads);
    const std::vector<TensorRef> params = model_tensors(model);
    const std::vector<TensorRef> analytic = grad_tensors(grads);

    GradCheckResult res;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t k = 0; k < params[t].size; ++k) {
            const double saved = params[t].data[k];
            params[t].data[k] = saved + eps;
            const double lp = model_loss(model, batch);
            params[t].data[k] = saved - eps;
            const double lm = model_loss(model, batch);
            params[t].data[k] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double a = analytic[t].data[k];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-12});
            if (rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst_block = params[t].name;
                res.worst_index = k;
                res.analytic = a;
                res.numeric = numeric;
            }
        }
    }
    return res;
}

void write_summary_file(const std::string& path, const RunSummary& summary) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "variant = " << variant_name(summary.variant) << "\n";
    out << "m = " << summary.m << "\n";
    out << "n = " << summary.n << "\n";
    out << "param_count = " << summary.params << "\n";
    out << "eta0 = " << format_double(summary.eta0) << "\n";
    out << "best_accuracy = " << format_double(summary.best_accuracy) << "\n";
    out << "best_epoch = " << summary.best_epoch << "\n";
    out << "epochs_run = " << summary.metrics.size() << "\n";
    out << "status = " << summary.status << "\n";
    if (!summary.error.empty()) out << "error = " << summary.error << "\n";
}

RunSummary run_experiment(const RunConfig& config) {
    validate(config);
    TaskData data = load_task_data(config);
    Model model = build_model(config, data);
    TrainState state = init_train_state(model, config);

    std::filesystem::create_directories(config.out_dir);
    const std::string csv_path = config.out_dir + "/metrics.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw ParseError(csv_path + ": cannot open for writing");
    csv << kMetricsHeader << "\n";

    RunSummary summary;
    summary.variant = config.variant;
    summary.m = model.lstm.m;
    summary.n = model.lstm.n;
    summary.params = param_count(config.variant, model.lstm.m, model.lstm.n);
    summary.eta0 = config.eta0;
    summary.run_dir = config.out_dir;

    state.schedule.current_loss = probe_loss(model, data, config);
    const std::vector<SequenceBatch> testb = test_batches(data, config);

    summary.status = "completed";
    try {
        for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
            MetricsRecord rec = train_epoch(model, data, config, state, epoch);
            rec.test_accuracy = evaluate(model, testb);
            csv << metrics_csv_row(rec) << "\n";
            csv.flush();
            if (config.print_rows) std::cout << metrics_csv_row(rec) << std::endl;
            summary.metrics.push_back(rec);
            if (state.stopper.update(epoch, rec.test_accuracy, model)) {
                summary.status = "early_stopped";
                break;
            }
        }
    } catch (const DivergenceError& e) {
        summary.status = "diverged";
        summary.error = e.what();
    }

    if (state.stopper.has_best) {
        summary.best_accuracy = state.stopper.best_metric;
        summary.best_epoch = state.stopper.best_epoch;
        write_model_checkpoint(config.out_dir + "/model.bin", state.stopper.best_checkpoint);
    }
    write_summary_file(config.out_dir + "/summary.txt", summary);
    return summary;
}

std::vector<RunSummary> sweep(const std::vector<RunConfig>& configs) {
    std::vector<RunSummary> rows;
    rows.reserve(configs.size());
    for (const RunConfig& config : configs) {
        try {
            rows.push_back(run_experiment(config));
        } catch (const std::exception& e) {
            RunSummary failed;
            failed.variant = config.variant;
            failed.eta0 = config.eta0;
            failed.n = config.hidden;
            failed.status = "error";
            failed.error = e.what();
            failed.run_dir = config.out_dir;
            rows.push_back(std::move(failed));
        }
    }
    return rows;
}

} // namespace gatecell
