#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "gatecell/linalg.hpp"

namespace gatecell {

// The four cell formulations. The gate equations keep or drop terms:
//   Vanilla        gate = sigma(U h_prev + W x + b)
//   NoInput        gate = sigma(U h_prev + b)          (lstm1)
//   NoInputNoBias  gate = sigma(U h_prev)              (lstm2)
//   BiasOnly       gate = sigma(b)                     (lstm3)
// The candidate block (W_c, U_c, b_c) keeps all terms in every variant.
enum class GateVariant { Vanilla, NoInput, NoInputNoBias, BiasOnly };

constexpr bool gates_use_input(GateVariant v) { return v == GateVariant::Vanilla; }
constexpr bool gates_use_hidden(GateVariant v) { return v != GateVariant::BiasOnly; }
constexpr bool gates_use_bias(GateVariant v) { return v != GateVariant::NoInputNoBias; }

// CLI-facing names: vanilla | lstm1 | lstm2 | lstm3.
const char* variant_name(GateVariant v);
std::optional<GateVariant> variant_from_name(std::string_view name);
constexpr GateVariant kAllVariants[] = {GateVariant::Vanilla, GateVariant::NoInput,
                                        GateVariant::NoInputNoBias, GateVariant::BiasOnly};

// Total scalar count for input dimension m and hidden size n:
//   Vanilla 4(mn + n^2 + n); the variants shed 3mn, 3(mn+n), 3(mn+n^2).
std::size_t param_count(GateVariant v, std::size_t m, std::size_t n);

// One gate block (i, f or o). Members are present exactly when the variant's
// gate equation uses them; absent blocks have no storage at all, so pruned
// parameters cannot be resurrected by an optimizer update.
struct GateBlock {
    std::optional<Matrix> w; // n x m
    std::optional<Matrix> u; // n x n
    std::optional<Vector> b; // n
};

struct LstmParams {
    GateVariant variant = GateVariant::Vanilla;
    std::size_t m = 0, n = 0;
    GateBlock gate_i, gate_f, gate_o;
    Matrix w_c; // n x m
    Matrix u_c; // n x n
    Vector b_c; // n

    std::size_t scalar_count() const;
};

// Present blocks in checkpoint order: W_i,U_i,b_i, W_f,U_f,b_f, W_o,U_o,b_o,
// W_c,U_c,b_c (absent blocks skipped). Every consumer that walks parameters
// (optimizer, checkpoints, gradient checks) uses this one ordering.
std::vector<TensorRef> param_tensors(LstmParams& p);

// Same layout, zero values; the gradient container for a parameter set.
LstmParams zeros_like(const LstmParams& p);

// Zero-filled parameters with the variant's presence pattern.
LstmParams make_params(GateVariant v, std::size_t m, std::size_t n);

struct InitMeta {
    bool forget_bias_applied = false;
};

// Scaled-uniform init per matrix, U(-l, l) with l = sqrt(6/(fan_in+fan_out));
// biases zero except b_f = forget_bias_init where b_f exists.
LstmParams init_params(GateVariant v, std::size_t m, std::size_t n, Rng& rng,
                       double forget_bias_init = 0.0, InitMeta* meta = nullptr);

// Batched layout: one column per batch element. x is m x B, h/c are n x B.
// B = 1 columns make the single-sequence case; both paths share the same
// arithmetic, so chaining single steps reproduces the batched result bit for bit.

struct Gates {
    Matrix i, f, o; // each n x B, entries in (0, 1)
};

Gates gate_forward(const LstmParams& p, const Matrix& x, const Matrix& h_prev);

// Saved per-timestep activations consumed by the backward pass. tanh_c is
// stored rather than recomputed so forward and backward stay in exact agreement.
struct StepCache {
    Matrix x;      // m x B
    Matrix h_prev; // n x B
    Matrix c_prev; // n x B
    Matrix i, f, o; // gates, n x B
    Matrix g;      // tanh candidate, n x B, entries in (-1, 1)
    Matrix c;      // new cell state, n x B
    Matrix tanh_c; // n x B
};

struct BatchStep {
    Matrix h; // n x B
    StepCache cache;
};

//   c_t = f * c_prev + i * g,  g = tanh(U_c h_prev + W_c x + b_c)
//   h_t = o * tanh(c_t)
BatchStep cell_step(const LstmParams& p, const Matrix& x, const Matrix& h_prev, const Matrix& c_prev);

struct CellState {
    Vector h, c;
};

std::pair<CellState, StepCache> cell_step(const LstmParams& p, const Vector& x, const CellState& prev);

struct StepGrads {
    LstmParams dparams;
    Matrix dx;      // m x B
    Matrix dh_prev; // n x B
    Matrix dc_prev; // n x B
};

// Exact analytic gradients through one step given upstream dh_t, dc_t.
// dparams mirrors the presence pattern of p.
StepGrads cell_backward(const LstmParams& p, const StepCache& cache, const Matrix& dh, const Matrix& dc);

// Accumulating form used by the sequence unroll.
void cell_backward_accum(const LstmParams& p, const StepCache& cache, const Matrix& dh, const Matrix& dc,
                         LstmParams& dparams, Matrix& dx, Matrix& dh_prev, Matrix& dc_prev);

struct SequenceForward {
    Matrix h_last; // n x B, hidden state after the final timestep
    std::vector<StepCache> caches;
};

// Unrolls cell_step left to right over xs (T matrices of m x B); h0/c0 are
// broadcast to every column.
SequenceForward forward_sequence(const LstmParams& p, const std::vector<Matrix>& xs,
                                 const Vector& h0, const Vector& c0);

struct SequenceGrads {
    LstmParams dparams;         // summed over time and batch
    std::vector<Matrix> dxs;    // per-timestep input gradients, for the embedding path
};

// BPTT right to left. dh_last is the gradient of the scalar loss with respect
// to the final hidden state; any batch-mean factor belongs to the loss, this
// pass is the exact adjoint of forward_sequence.
SequenceGrads backward_sequence(const LstmParams& p, const std::vector<StepCache>& caches,
                                const Matrix& dh_last);

} // namespace gatecell
