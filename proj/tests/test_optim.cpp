#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gatecell/cells.hpp"
#include "gatecell/optim.hpp"

using namespace gatecell;

TEST_CASE("rmsprop zero gradient leaves parameters, decays accumulator") {
    double theta[2] = {1.5, -2.0};
    double g[2] = {0.0, 0.0};
    std::vector<TensorRef> params = {{"p", theta, 2}};
    std::vector<TensorRef> grads = {{"p", g, 2}};
    RmspropState state = make_rmsprop_state(params);
    state.accum[0][0] = 4.0;
    state.accum[0][1] = 1.0;
    rmsprop_step(params, grads, state, 0.1);
    CHECK(theta[0] == 1.5);
    CHECK(theta[1] == -2.0);
    CHECK(state.accum[0][0] == 0.9 * 4.0);
    CHECK(state.accum[0][1] == 0.9 * 1.0);
}

TEST_CASE("rmsprop single step from rest") {
    double theta[1] = {0.0};
    double g[1] = {1.0};
    std::vector<TensorRef> params = {{"p", theta, 1}};
    std::vector<TensorRef> grads = {{"p", g, 1}};
    RmspropState state = make_rmsprop_state(params);
    rmsprop_step(params, grads, state, 0.1);
    // direct substitution: s = (1-rho) g^2, step = -lr g / (sqrt(s) + eps)
    const double s = (1.0 - 0.9) * 1.0;
    CHECK(theta[0] == -(0.1 * 1.0 / (std::sqrt(s) + 1e-8)));
    CHECK(theta[0] == doctest::Approx(-0.1 / (std::sqrt(0.1) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("rmsprop accumulator follows the closed-form recurrence") {
    // constant gradient: s_k = (1 - rho^k) g^2
    double theta[1] = {0.0};
    double g[1] = {0.7};
    std::vector<TensorRef> params = {{"p", theta, 1}};
    std::vector<TensorRef> grads = {{"p", g, 1}};
    RmspropState state = make_rmsprop_state(params);
    for (int k = 1; k <= 40; ++k) {
        rmsprop_step(params, grads, state, 0.01);
        const double closed = (1.0 - std::pow(0.9, k)) * 0.7 * 0.7;
        CHECK(state.accum[0][0] == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("rmsprop contract errors on shape drift") {
    double a[2], g1[1];
    std::vector<TensorRef> params = {{"p", a, 2}};
    std::vector<TensorRef> grads = {{"p", g1, 1}};
    RmspropState state = make_rmsprop_state(params);
    CHECK_THROWS_AS(rmsprop_step(params, grads, state, 0.1), ContractError);
    CHECK_THROWS_AS(rmsprop_step(params, {}, state, 0.1), ContractError);
}

TEST_CASE("rmsprop never sees absent parameter blocks") {
    // the tensor list is the update surface: pruned blocks must not be in it
    auto names = [](LstmParams& p) {
        std::vector<std::string> out;
        for (const TensorRef& t : param_tensors(p)) out.emplace_back(t.name);
        return out;
    };
    Rng rng(1);
    LstmParams vanilla = init_params(GateVariant::Vanilla, 2, 3, rng);
    CHECK(names(vanilla) == std::vector<std::string>{"W_i", "U_i", "b_i", "W_f", "U_f", "b_f", "W_o",
                                                     "U_o", "b_o", "W_c", "U_c", "b_c"});
    LstmParams l1 = init_params(GateVariant::NoInput, 2, 3, rng);
    CHECK(names(l1) == std::vector<std::string>{"U_i", "b_i", "U_f", "b_f", "U_o", "b_o", "W_c", "U_c", "b_c"});
    LstmParams l2 = init_params(GateVariant::NoInputNoBias, 2, 3, rng);
    CHECK(names(l2) == std::vector<std::string>{"U_i", "U_f", "U_o", "W_c", "U_c", "b_c"});
    LstmParams l3 = init_params(GateVariant::BiasOnly, 2, 3, rng);
    CHECK(names(l3) == std::vector<std::string>{"b_i", "b_f", "b_o", "W_c", "U_c", "b_c"});

    // one update through the list touches exactly the present blocks
    LstmParams grads = zeros_like(l3);
    for (const TensorRef& t : param_tensors(grads))
        for (std::size_t k = 0; k < t.size; ++k) t.data[k] = 1.0;
    RmspropState state = make_rmsprop_state(param_tensors(l3));
    const double before_wc = l3.w_c(0, 0);
    rmsprop_step(param_tensors(l3), param_tensors(grads), state, 0.1);
    CHECK(l3.w_c(0, 0) != before_wc);
    CHECK(!l3.gate_i.w.has_value());
    CHECK(!l3.gate_i.u.has_value());
}

TEST_CASE("clip_global_norm") {
    double g[3] = {3.0, 4.0, 0.0};
    std::vector<TensorRef> grads = {{"g", g, 3}};
    CHECK(clip_global_norm(grads, 0.0) == 5.0); // disabled, reports the norm
    CHECK(g[0] == 3.0);
    CHECK(clip_global_norm(grads, 2.5) == 5.0);
    CHECK(g[0] == doctest::Approx(1.5));
    CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("dynamic_lr values") {
    CHECK(dynamic_lr(0.02, 0.0) == 0.02);
    CHECK(dynamic_lr(1e-3, std::log(2.0)) == 2e-3); // exact on this libm
    CHECK(dynamic_lr(1.0, std::log(10.0)) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK_THROWS_AS(dynamic_lr(1e-3, std::numeric_limits<double>::quiet_NaN()), ScheduleError);
    CHECK_THROWS_AS(dynamic_lr(1e-3, std::numeric_limits<double>::infinity()), ScheduleError);
    CHECK_THROWS_AS(dynamic_lr(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("LrSchedule emits the coupled rate") {
    LrSchedule schedule{1e-3, 0.0};
    CHECK(schedule.rate() == 1e-3);
    schedule.current_loss = std::log(2.0);
    CHECK(schedule.rate() == 2e-3);
}

TEST_CASE("dynamic_lr is increasing in loss and linear in eta0") {
    double prev = 0.0;
    for (double loss = -3.0; loss <= 3.0; loss += 0.25) {
        const double lr = dynamic_lr(1e-3, loss);
        CHECK(lr > prev);
        prev = lr;
    }
    for (double loss : {0.3, 1.7, 2.4}) {
        CHECK(dynamic_lr(2e-3, loss) == 2.0 * dynamic_lr(1e-3, loss)); // power-of-two scale is exact
        CHECK(dynamic_lr(3e-3, loss) == doctest::Approx(3.0 * dynamic_lr(1e-3, loss)).epsilon(1e-15));
    }
}

TEST_CASE("early stopping never fires on a strictly improving stream") {
    EarlyStopper<int> stopper;
    stopper.patience = 25;
    for (std::size_t epoch = 1; epoch <= 200; ++epoch)
        CHECK(!stopper.update(epoch, 0.001 * static_cast<double>(epoch), static_cast<int>(epoch)));
    CHECK(stopper.best_epoch == 200);
}

TEST_CASE("early stopping counts 25 epochs past the plateau") {
    EarlyStopper<int> stopper;
    stopper.patience = 25;
    std::size_t stopped_at = 0;
    for (std::size_t epoch = 1; epoch <= 100; ++epoch) {
        const double metric = epoch <= 5 ? 0.1 * static_cast<double>(epoch) : 0.5;
        if (stopper.update(epoch, metric, 0)) {
            stopped_at = epoch;
            break;
        }
    }
    CHECK(stopped_at == 30);
    CHECK(stopper.best_epoch == 5);
    CHECK(stopper.best_metric == 0.5);
}

TEST_CASE("early stopping snapshots the best checkpoint, ties excluded") {
    EarlyStopper<std::string> stopper;
    stopper.patience = 25;
    std::vector<double> stream = {0.5, 0.6, 0.55, 0.61};
    stream.resize(60, 0.61); // flat tail of ties
    std::size_t stopped_at = 0;
    for (std::size_t epoch = 1; epoch <= stream.size(); ++epoch) {
        if (stopper.update(epoch, stream[epoch - 1], "ckpt@" + std::to_string(epoch))) {
            stopped_at = epoch;
            break;
        }
    }
    CHECK(stopper.best_epoch == 4);
    CHECK(stopper.best_metric == 0.61);
    CHECK(stopper.best_checkpoint == "ckpt@4");
    CHECK(stopped_at == 29); // 4 + 25
}
