#include "gatecell/optim.hpp"

#include <string>

namespace gatecell {

RmspropState make_rmsprop_state(const std::vector<TensorRef>& params, double rho, double epsilon) {
    RmspropState state;
    state.rho = rho;
    state.epsilon = epsilon;
    state.accum.reserve(params.size());
    for (const TensorRef& p : params)
        state.accum.emplace_back(p.size, 0.0);
    return state;
}

void rmsprop_step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
                  RmspropState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.accum.size())
        throw ContractError("rmsprop_step: " + std::to_string(params.size()) + " params, " +
                            std::to_string(grads.size()) + " grads, " + std::to_string(state.accum.size()) +
                            " accumulators");
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size != grads[t].size || params[t].size != state.accum[t].size())
            throw ContractError(std::string("rmsprop_step: size mismatch on block ") + params[t].name);
        double* theta = params[t].data;
        const double* g = grads[t].data;
        double* s = state.accum[t].data();
        for (std::size_t k = 0; k < params[t].size; ++k) {
            s[k] = state.rho * s[k] + (1.0 - state.rho) * g[k] * g[k];
            theta[k] -= lr * g[k] / (std::sqrt(s[k]) + state.epsilon);
        }
    }
}

double clip_global_norm(const std::vector<TensorRef>& grads, double max_norm) {
    double sq = 0.0;
    for (const TensorRef& g : grads)
        for (std::size_t k = 0; k < g.size; ++k) sq += g.data[k] * g.data[k];
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (const TensorRef& g : grads)
            for (std::size_t k = 0; k < g.size; ++k) g.data[k] *= scale;
    }
    return norm;
}

double dynamic_lr(double eta0, double loss) {
    if (!(eta0 > 0.0))
        throw std::invalid_argument("dynamic_lr: eta0 must be > 0");
    if (!std::isfinite(loss))
        throw ScheduleError("dynamic_lr: non-finite training loss " + std::to_string(loss));
    return eta0 * std::exp(loss);
}

} // namespace gatecell
