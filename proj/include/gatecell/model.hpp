#pragma once

#include <optional>

#include "gatecell/cells.hpp"
#include "gatecell/layers.hpp"

namespace gatecell {

// The full classifier: optional embedding feeding the recurrent layer, then a
// softmax head over the final hidden state.
struct Model {
    std::optional<EmbeddingTable> embedding;
    LstmParams lstm;
    DenseHead head;
};

// Checkpoint/update order: cell blocks first, then embedding table, then head
// weights and bias.
std::vector<TensorRef> model_tensors(Model& model);

std::size_t model_scalar_count(const Model& model);

// Dimension chain: embedding dim (when present) must equal lstm.m; head width
// must equal lstm.n.
void check_model_dims(const Model& model);

// Gradient container mirroring a model's present tensors.
struct ModelGrads {
    std::optional<Matrix> dembedding;
    LstmParams dlstm;
    Matrix dhead_w;
    Vector dhead_b;
};

ModelGrads zero_grads(const Model& model);
std::vector<TensorRef> grad_tensors(ModelGrads& grads);

} // namespace gatecell
