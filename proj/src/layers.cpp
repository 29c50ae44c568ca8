#include "gatecell/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gatecell {

EmbeddingTable init_embedding(std::size_t vocab, std::size_t dim, Rng& rng) {
    if (vocab == 0 || dim == 0)
        throw std::invalid_argument("init_embedding: vocab and dim must be >= 1");
    EmbeddingTable emb;
    emb.vocab = vocab;
    emb.dim = dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(vocab + dim));
    emb.table = rng.uniform_matrix(vocab, dim, -limit, limit);
    return emb;
}

std::vector<Matrix> embed_forward(const EmbeddingTable& emb,
                                  const std::vector<std::vector<std::uint32_t>>& ids) {
    const std::size_t batch = ids.size();
    if (batch == 0) throw ContractError("embed_forward: empty batch");
    const std::size_t seq_len = ids.front().size();
    for (const auto& row : ids)
        if (row.size() != seq_len)
            throw ShapeError("embed_forward: ragged id rows, " + std::to_string(row.size()) + " vs " +
                             std::to_string(seq_len));

    std::vector<Matrix> out(seq_len, Matrix(emb.dim, batch));
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < seq_len; ++t) {
            const std::uint32_t id = ids[b][t];
            if (id >= emb.vocab)
                throw ContractError("embed_forward: token id " + std::to_string(id) +
                                    " out of vocabulary (V=" + std::to_string(emb.vocab) + ")");
            const double* row = emb.table.row_ptr(id);
            Matrix& slab = out[t];
            for (std::size_t d = 0; d < emb.dim; ++d) slab(d, b) = row[d];
        }
    }
    return out;
}

Matrix embed_backward(const std::vector<std::vector<std::uint32_t>>& ids,
                      const std::vector<Matrix>& dout, std::size_t vocab, std::size_t dim) {
    const std::size_t batch = ids.size();
    if (dout.size() != (batch ? ids.front().size() : 0))
        throw ShapeError("embed_backward: " + std::to_string(dout.size()) + " gradient slabs for sequence length " +
                         std::to_string(batch ? ids.front().size() : 0));
    Matrix dtable(vocab, dim);
    for (std::size_t t = 0; t < dout.size(); ++t) {
        const Matrix& slab = dout[t];
        if (slab.rows != dim || slab.cols != batch)
            throw ShapeError("embed_backward: slab " + shape_str(slab) + " expected " + std::to_string(dim) +
                             "x" + std::to_string(batch));
        for (std::size_t b = 0; b < batch; ++b) {
            const std::uint32_t id = ids[b][t];
            double* row = dtable.row_ptr(id);
            for (std::size_t d = 0; d < dim; ++d) row[d] += slab(d, b);
        }
    }
    return dtable;
}

DenseHead init_head(std::size_t classes, std::size_t n, Rng& rng) {
    if (classes == 0 || n == 0)
        throw std::invalid_argument("init_head: classes and n must be >= 1");
    DenseHead head;
    const double limit = std::sqrt(6.0 / static_cast<double>(classes + n));
    head.w = rng.uniform_matrix(classes, n, -limit, limit);
    head.b = Vector(classes);
    return head;
}

Matrix head_forward(const DenseHead& head, const Matrix& h) {
    if (h.cols != head.w.cols)
        throw ShapeError("head_forward: h " + shape_str(h) + " vs W " + shape_str(head.w));
    Matrix logits = matmul_nt(h, head.w); // B x K
    for (std::size_t b = 0; b < logits.rows; ++b) {
        double* row = logits.row_ptr(b);
        for (std::size_t k = 0; k < logits.cols; ++k) row[k] += head.b[k];
    }
    return logits;
}

HeadGrads head_backward(const DenseHead& head, const Matrix& h, const Matrix& dlogits) {
    if (dlogits.rows != h.rows || dlogits.cols != head.w.rows)
        throw ShapeError("head_backward: dlogits " + shape_str(dlogits) + " vs h " + shape_str(h) +
                         ", W " + shape_str(head.w));
    HeadGrads g;
    g.dw = matmul_tn(dlogits, h); // K x n
    g.db = Vector(head.b.size());
    for (std::size_t b = 0; b < dlogits.rows; ++b)
        for (std::size_t k = 0; k < dlogits.cols; ++k)
            g.db[k] += dlogits(b, k);
    g.dh = matmul(dlogits, head.w); // B x n
    return g;
}

XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t batch = logits.rows, classes = logits.cols;
    if (labels.size() != batch)
        throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(batch));
    XentResult res;
    res.dlogits = Matrix(batch, classes);
    double total = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const int label = labels[b];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw ContractError("softmax_xent: label " + std::to_string(label) + " out of range for K=" +
                                std::to_string(classes));
        const double* row = logits.row_ptr(b);
        double mx = row[0];
        for (std::size_t k = 1; k < classes; ++k) mx = std::max(mx, row[k]);
        double denom = 0.0;
        for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - mx);
        // -log p[label] = log(sum exp(z - mx)) - (z_label - mx)
        total += std::log(denom) - (row[static_cast<std::size_t>(label)] - mx);
        double* drow = res.dlogits.row_ptr(b);
        for (std::size_t k = 0; k < classes; ++k)
            drow[k] = std::exp(row[k] - mx) / denom * inv_b;
        drow[static_cast<std::size_t>(label)] -= inv_b;
    }
    res.loss = total * inv_b;
    return res;
}

Matrix dropout_elems(const Matrix& x, double rate, Rng& rng, bool training, Matrix* mask_out) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout_elems: rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        if (mask_out) *mask_out = Matrix(x.rows, x.cols, 1.0);
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(x.rows, x.cols);
    Matrix y(x.rows, x.cols);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double s = rng.uniform() < rate ? 0.0 : keep_scale;
        mask.data[k] = s;
        y.data[k] = x.data[k] * s;
    }
    if (mask_out) *mask_out = std::move(mask);
    return y;
}

Matrix dropout_rows(const Matrix& m, double rate, Rng& rng, bool training, Vector* row_scale_out) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout_rows: rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        if (row_scale_out) *row_scale_out = Vector(m.rows, 1.0);
        return m;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Vector scale(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        scale[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double s = scale[i];
        const double* src = m.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) dst[j] = src[j] * s;
    }
    if (row_scale_out) *row_scale_out = std::move(scale);
    return out;
}

} // namespace gatecell
