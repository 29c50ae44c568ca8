#pragma once

#include <cstdint>
#include <vector>

#include "gatecell/linalg.hpp"

namespace gatecell {

// Token embedding, one row per id. Id 0 is the padding token; its row is an
// ordinary trainable row that only receives gradient when it is used.
struct EmbeddingTable {
    std::size_t vocab = 0, dim = 0;
    Matrix table; // vocab x dim
};

EmbeddingTable init_embedding(std::size_t vocab, std::size_t dim, Rng& rng);

// ids are batch-major (B rows of T ids); output is timestep-major, T matrices
// of dim x B, i.e. the dense sequence layout the recurrence consumes.
std::vector<Matrix> embed_forward(const EmbeddingTable& emb,
                                  const std::vector<std::vector<std::uint32_t>>& ids);

// Scatter-add adjoint of the gather above; rows never looked up stay zero.
Matrix embed_backward(const std::vector<std::vector<std::uint32_t>>& ids,
                      const std::vector<Matrix>& dout, std::size_t vocab, std::size_t dim);

// Softmax classifier head: logits = h W^T + b.
struct DenseHead {
    Matrix w; // classes x n
    Vector b; // classes
};

DenseHead init_head(std::size_t classes, std::size_t n, Rng& rng);

Matrix head_forward(const DenseHead& head, const Matrix& h); // h B x n -> logits B x K

struct HeadGrads {
    Matrix dw;
    Vector db;
    Matrix dh; // B x n
};

HeadGrads head_backward(const DenseHead& head, const Matrix& h, const Matrix& dlogits);

struct XentResult {
    double loss;    // mean over the batch of -log p[label], natural log
    Matrix dlogits; // (softmax - onehot) / B
};

// Numerically stable (row max subtracted before exponentiation).
XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels);

struct DropoutSpec {
    double embed_rate = 0.0; // elementwise, on the embedded sequence
    double row_rate = 0.0;   // whole rows of the recurrent weight matrices
};

// Inverted dropout: zeroed with probability rate, survivors scaled by
// 1/(1-rate); identity when training is false. mask_out (same shape, entries
// 0 or 1/(1-rate)) lets the backward pass reuse the exact mask.
Matrix dropout_elems(const Matrix& x, double rate, Rng& rng, bool training, Matrix* mask_out = nullptr);

// Row dropout: whole rows zeroed/scaled. The caller samples once per
// mini-batch and applies the same mask to that batch's forward and backward.
Matrix dropout_rows(const Matrix& m, double rate, Rng& rng, bool training, Vector* row_scale_out = nullptr);

} // namespace gatecell
