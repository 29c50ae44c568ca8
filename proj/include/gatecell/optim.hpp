#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gatecell/errors.hpp"
#include "gatecell/linalg.hpp"

namespace gatecell {

// Per-parameter second-moment accumulators, mirroring a tensor list built by
// param_tensors/model_tensors. Absent parameter blocks never enter the list,
// so the update cannot touch them.
struct RmspropState {
    double rho = 0.9;
    double epsilon = 1e-8;
    std::vector<std::vector<double>> accum;
};

RmspropState make_rmsprop_state(const std::vector<TensorRef>& params, double rho = 0.9,
                                double epsilon = 1e-8);

// s <- rho s + (1-rho) g^2;  theta <- theta - lr g / (sqrt(s) + eps)
void rmsprop_step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
                  RmspropState& state, double lr);

// Optional global-norm gradient clip; no-op when max_norm <= 0. Returns the
// pre-clip norm.
double clip_global_norm(const std::vector<TensorRef>& grads, double max_norm);

// Loss-coupled schedule: lr = eta0 * exp(loss). Large early losses give large
// steps; the rate falls with the loss.
double dynamic_lr(double eta0, double loss);

struct LrSchedule {
    double eta0 = 1e-3;
    double current_loss = 0.0;
    double rate() const { return dynamic_lr(eta0, current_loss); }
};

// Strict-improvement early stopping: a higher metric resets the window and
// snapshots the checkpoint; stop once epoch - best_epoch >= patience. The
// snapshot at best_epoch is the model to report.
template <class CheckpointT>
struct EarlyStopper {
    std::size_t patience = 25;
    double best_metric = -std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    CheckpointT best_checkpoint{};
    bool has_best = false;

    // returns true when training should stop
    bool update(std::size_t epoch, double metric, const CheckpointT& checkpoint) {
        if (metric > best_metric) {
            best_metric = metric;
            best_epoch = epoch;
            best_checkpoint = checkpoint;
            has_best = true;
            return false;
        }
        return epoch - best_epoch >= patience;
    }
};

} // namespace gatecell
