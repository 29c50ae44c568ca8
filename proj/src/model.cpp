#include "gatecell/model.hpp"

#include <string>

namespace gatecell {

std::vector<TensorRef> model_tensors(Model& model) {
    std::vector<TensorRef> refs = param_tensors(model.lstm);
    if (model.embedding)
        refs.push_back({"embedding", model.embedding->table.data.data(), model.embedding->table.size()});
    refs.push_back({"head_W", model.head.w.data.data(), model.head.w.size()});
    refs.push_back({"head_b", model.head.b.data.data(), model.head.b.size()});
    return refs;
}

std::size_t model_scalar_count(const Model& model) {
    std::size_t total = model.lstm.scalar_count() + model.head.w.size() + model.head.b.size();
    if (model.embedding) total += model.embedding->table.size();
    return total;
}

void check_model_dims(const Model& model) {
    if (model.embedding && model.embedding->dim != model.lstm.m)
        throw ContractError("model: embedding dim " + std::to_string(model.embedding->dim) +
                            " does not feed lstm input m=" + std::to_string(model.lstm.m));
    if (model.head.w.cols != model.lstm.n)
        throw ContractError("model: head expects width " + std::to_string(model.head.w.cols) +
                            " but lstm hidden size is " + std::to_string(model.lstm.n));
}

ModelGrads zero_grads(const Model& model) {
    ModelGrads g;
    if (model.embedding) g.dembedding = Matrix(model.embedding->vocab, model.embedding->dim);
    g.dlstm = zeros_like(model.lstm);
    g.dhead_w = Matrix(model.head.w.rows, model.head.w.cols);
    g.dhead_b = Vector(model.head.b.size());
    return g;
}

std::vector<TensorRef> grad_tensors(ModelGrads& grads) {
    std::vector<TensorRef> refs = param_tensors(grads.dlstm);
    if (grads.dembedding)
        refs.push_back({"embedding", grads.dembedding->data.data(), grads.dembedding->size()});
    refs.push_back({"head_W", grads.dhead_w.data.data(), grads.dhead_w.size()});
    refs.push_back({"head_b", grads.dhead_b.data.data(), grads.dhead_b.size()});
    return refs;
}

} // namespace gatecell
