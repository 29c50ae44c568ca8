#include "gatecell/cells.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gatecell {

const char* variant_name(GateVariant v) {
    switch (v) {
    case GateVariant::Vanilla: return "vanilla";
    case GateVariant::NoInput: return "lstm1";
    case GateVariant::NoInputNoBias: return "lstm2";
    case GateVariant::BiasOnly: return "lstm3";
    }
    return "?";
}

std::optional<GateVariant> variant_from_name(std::string_view name) {
    if (name == "vanilla") return GateVariant::Vanilla;
    if (name == "lstm1") return GateVariant::NoInput;
    if (name == "lstm2") return GateVariant::NoInputNoBias;
    if (name == "lstm3") return GateVariant::BiasOnly;
    return std::nullopt;
}

std::size_t param_count(GateVariant v, std::size_t m, std::size_t n) {
    if (m == 0 || n == 0)
        throw std::invalid_argument("param_count: m and n must be >= 1");
    const std::size_t vanilla = 4 * (m * n + n * n + n);
    switch (v) {
    case GateVariant::Vanilla: return vanilla;
    case GateVariant::NoInput: return vanilla - 3 * m * n;
    case GateVariant::NoInputNoBias: return vanilla - 3 * (m * n + n);
    case GateVariant::BiasOnly: return vanilla - 3 * (m * n + n * n);
    }
    return 0;
}

std::size_t LstmParams::scalar_count() const {
    std::size_t total = w_c.size() + u_c.size() + b_c.size();
    for (const GateBlock* blk : {&gate_i, &gate_f, &gate_o}) {
        if (blk->w) total += blk->w->size();
        if (blk->u) total += blk->u->size();
        if (blk->b) total += blk->b->size();
    }
    return total;
}

std::vector<TensorRef> param_tensors(LstmParams& p) {
    std::vector<TensorRef> refs;
    refs.reserve(12);
    auto push = [&refs](const char* name, std::optional<Matrix>& m) {
        if (m) refs.push_back({name, m->data.data(), m->size()});
    };
    auto pushb = [&refs](const char* name, std::optional<Vector>& v) {
        if (v) refs.push_back({name, v->data.data(), v->size()});
    };
    push("W_i", p.gate_i.w);
    push("U_i", p.gate_i.u);
    pushb("b_i", p.gate_i.b);
    push("W_f", p.gate_f.w);
    push("U_f", p.gate_f.u);
    pushb("b_f", p.gate_f.b);
    push("W_o", p.gate_o.w);
    push("U_o", p.gate_o.u);
    pushb("b_o", p.gate_o.b);
    refs.push_back({"W_c", p.w_c.data.data(), p.w_c.size()});
    refs.push_back({"U_c", p.u_c.data.data(), p.u_c.size()});
    refs.push_back({"b_c", p.b_c.data.data(), p.b_c.size()});
    return refs;
}

LstmParams zeros_like(const LstmParams& p) {
    LstmParams z;
    z.variant = p.variant;
    z.m = p.m;
    z.n = p.n;
    for (auto [src, dst] : {std::pair{&p.gate_i, &z.gate_i}, {&p.gate_f, &z.gate_f}, {&p.gate_o, &z.gate_o}}) {
        if (src->w) dst->w = Matrix(src->w->rows, src->w->cols);
        if (src->u) dst->u = Matrix(src->u->rows, src->u->cols);
        if (src->b) dst->b = Vector(src->b->size());
    }
    z.w_c = Matrix(p.w_c.rows, p.w_c.cols);
    z.u_c = Matrix(p.u_c.rows, p.u_c.cols);
    z.b_c = Vector(p.b_c.size());
    return z;
}

LstmParams make_params(GateVariant v, std::size_t m, std::size_t n) {
    if (m == 0 || n == 0)
        throw std::invalid_argument("make_params: m and n must be >= 1");
    LstmParams p;
    p.variant = v;
    p.m = m;
    p.n = n;
    for (GateBlock* blk : {&p.gate_i, &p.gate_f, &p.gate_o}) {
        if (gates_use_input(v)) blk->w = Matrix(n, m);
        if (gates_use_hidden(v)) blk->u = Matrix(n, n);
        if (gates_use_bias(v)) blk->b = Vector(n);
    }
    p.w_c = Matrix(n, m);
    p.u_c = Matrix(n, n);
    p.b_c = Vector(n);
    return p;
}

namespace {

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

} // namespace

LstmParams init_params(GateVariant v, std::size_t m, std::size_t n, Rng& rng,
                       double forget_bias_init, InitMeta* meta) {
    LstmParams p = make_params(v, m, n);
    const double lw = glorot_limit(m, n);
    const double lu = glorot_limit(n, n);
    // draws happen in checkpoint block order so a seed pins every value
    for (GateBlock* blk : {&p.gate_i, &p.gate_f, &p.gate_o}) {
        if (blk->w) *blk->w = rng.uniform_matrix(n, m, -lw, lw);
        if (blk->u) *blk->u = rng.uniform_matrix(n, n, -lu, lu);
    }
    p.w_c = rng.uniform_matrix(n, m, -lw, lw);
    p.u_c = rng.uniform_matrix(n, n, -lu, lu);
    bool applied = false;
    if (forget_bias_init != 0.0 && p.gate_f.b) {
        for (double& x : p.gate_f.b->data) x = forget_bias_init;
        applied = true;
    }
    if (meta) meta->forget_bias_applied = applied;
    return p;
}

namespace {

void check_step_shapes(const LstmParams& p, const Matrix& x, const Matrix& h_prev, const Matrix& c_prev) {
    if (x.rows != p.m)
        throw ShapeError("cell_step: input rows " + std::to_string(x.rows) + " but params expect m=" +
                         std::to_string(p.m));
    if (h_prev.rows != p.n || c_prev.rows != p.n)
        throw ShapeError("cell_step: state rows " + std::to_string(h_prev.rows) + "/" +
                         std::to_string(c_prev.rows) + " but params expect n=" + std::to_string(p.n));
    if (x.cols != h_prev.cols || x.cols != c_prev.cols)
        throw ShapeError("cell_step: batch columns differ, x " + shape_str(x) + " h " + shape_str(h_prev) +
                         " c " + shape_str(c_prev));
}

void add_bias_broadcast(Matrix& a, const Vector& b) {
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double bi = b[i];
        double* row = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols; ++j) row[j] += bi;
    }
}

// pre-activation U h_prev + W x + b, with absent terms skipped
Matrix block_preact(const GateBlock& blk, const Matrix& x, const Matrix& h_prev,
                    std::size_t n, std::size_t batch) {
    Matrix a = blk.u ? matmul(*blk.u, h_prev) : Matrix(n, batch);
    if (blk.w) add_inplace(a, matmul(*blk.w, x));
    if (blk.b) add_bias_broadcast(a, *blk.b);
    return a;
}

} // namespace

Gates gate_forward(const LstmParams& p, const Matrix& x, const Matrix& h_prev) {
    if (x.rows != p.m || h_prev.rows != p.n || x.cols != h_prev.cols)
        throw ShapeError("gate_forward: x " + shape_str(x) + ", h_prev " + shape_str(h_prev) +
                         " vs params m=" + std::to_string(p.m) + " n=" + std::to_string(p.n));
    const std::size_t batch = x.cols;
    Gates g;
    g.i = map(MapFn::Sigmoid, block_preact(p.gate_i, x, h_prev, p.n, batch));
    g.f = map(MapFn::Sigmoid, block_preact(p.gate_f, x, h_prev, p.n, batch));
    g.o = map(MapFn::Sigmoid, block_preact(p.gate_o, x, h_prev, p.n, batch));
    return g;
}

BatchStep cell_step(const LstmParams& p, const Matrix& x, const Matrix& h_prev, const Matrix& c_prev) {
    check_step_shapes(p, x, h_prev, c_prev);
    const std::size_t batch = x.cols;

    BatchStep out;
    StepCache& cache = out.cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;

    Gates gates = gate_forward(p, x, h_prev);
    cache.i = std::move(gates.i);
    cache.f = std::move(gates.f);
    cache.o = std::move(gates.o);

    // candidate keeps all terms in every variant
    Matrix a_c = matmul(p.u_c, h_prev);
    add_inplace(a_c, matmul(p.w_c, x));
    add_bias_broadcast(a_c, p.b_c);
    cache.g = map(MapFn::Tanh, a_c);

    // c_t = f * c_prev + i * g
    cache.c = Matrix(p.n, batch);
    for (std::size_t k = 0; k < cache.c.size(); ++k)
        cache.c.data[k] = cache.f.data[k] * c_prev.data[k] + cache.i.data[k] * cache.g.data[k];
    cache.tanh_c = map(MapFn::Tanh, cache.c);

    // h_t = o * tanh(c_t)
    out.h = hadamard(cache.o, cache.tanh_c);
    return out;
}

namespace {

Matrix column(const Vector& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Vector uncolumn(const Matrix& m) {
    Vector v(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, 0);
    return v;
}

} // namespace

std::pair<CellState, StepCache> cell_step(const LstmParams& p, const Vector& x, const CellState& prev) {
    BatchStep step = cell_step(p, column(x), column(prev.h), column(prev.c));
    CellState state{uncolumn(step.h), uncolumn(step.cache.c)};
    return {std::move(state), std::move(step.cache)};
}

namespace {

void check_cache(const LstmParams& p, const StepCache& cache) {
    if (cache.x.rows != p.m || cache.h_prev.rows != p.n || cache.i.rows != p.n)
        throw ContractError("cell_backward: cache built for m=" + std::to_string(cache.x.rows) + " n=" +
                            std::to_string(cache.i.rows) + " but params have m=" + std::to_string(p.m) +
                            " n=" + std::to_string(p.n));
}

// accumulate the parameter-side and input-side gradients of one gate block
void block_backward(const GateBlock& blk, GateBlock& dblk, const Matrix& da,
                    const StepCache& cache, Matrix& dx, Matrix& dh_prev) {
    if (blk.w) {
        add_inplace(*dblk.w, matmul_nt(da, cache.x));
        add_inplace(dx, matmul_tn(*blk.w, da));
    }
    if (blk.u) {
        add_inplace(*dblk.u, matmul_nt(da, cache.h_prev));
        add_inplace(dh_prev, matmul_tn(*blk.u, da));
    }
    if (blk.b) {
        for (std::size_t i = 0; i < da.rows; ++i) {
            const double* row = da.row_ptr(i);
            double s = 0.0;
            for (std::size_t j = 0; j < da.cols; ++j) s += row[j];
            (*dblk.b)[i] += s;
        }
    }
}

} // namespace

void cell_backward_accum(const LstmParams& p, const StepCache& cache, const Matrix& dh, const Matrix& dc,
                         LstmParams& dparams, Matrix& dx, Matrix& dh_prev, Matrix& dc_prev) {
    check_cache(p, cache);
    if (dh.rows != p.n || dh.cols != cache.i.cols || dc.rows != p.n || dc.cols != cache.i.cols)
        throw ShapeError("cell_backward: upstream dh " + shape_str(dh) + " dc " + shape_str(dc) +
                         " vs cache " + shape_str(cache.i));
    const std::size_t count = cache.i.size();

    // do   = dh * tanh(c)
    // dc'  = dc + dh * o * (1 - tanh(c)^2)
    Matrix d_o(cache.i.rows, cache.i.cols);
    Matrix dc_total(cache.i.rows, cache.i.cols);
    for (std::size_t k = 0; k < count; ++k) {
        const double tc = cache.tanh_c.data[k];
        d_o.data[k] = dh.data[k] * tc;
        dc_total.data[k] = dc.data[k] + dh.data[k] * cache.o.data[k] * (1.0 - tc * tc);
    }

    // gate/candidate pre-activation gradients
    Matrix da_i(cache.i.rows, cache.i.cols), da_f(cache.i.rows, cache.i.cols);
    Matrix da_o(cache.i.rows, cache.i.cols), da_g(cache.i.rows, cache.i.cols);
    for (std::size_t k = 0; k < count; ++k) {
        const double iv = cache.i.data[k], fv = cache.f.data[k], ov = cache.o.data[k], gv = cache.g.data[k];
        const double dct = dc_total.data[k];
        da_i.data[k] = dct * gv * iv * (1.0 - iv);
        da_f.data[k] = dct * cache.c_prev.data[k] * fv * (1.0 - fv);
        da_o.data[k] = d_o.data[k] * ov * (1.0 - ov);
        da_g.data[k] = dct * iv * (1.0 - gv * gv);
        dc_prev.data[k] += dct * fv;
    }

    block_backward(p.gate_i, dparams.gate_i, da_i, cache, dx, dh_prev);
    block_backward(p.gate_f, dparams.gate_f, da_f, cache, dx, dh_prev);
    block_backward(p.gate_o, dparams.gate_o, da_o, cache, dx, dh_prev);

    // candidate path, present in every variant
    add_inplace(dparams.w_c, matmul_nt(da_g, cache.x));
    add_inplace(dparams.u_c, matmul_nt(da_g, cache.h_prev));
    for (std::size_t i = 0; i < da_g.rows; ++i) {
        const double* row = da_g.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < da_g.cols; ++j) s += row[j];
        dparams.b_c[i] += s;
    }
    add_inplace(dx, matmul_tn(p.w_c, da_g));
    add_inplace(dh_prev, matmul_tn(p.u_c, da_g));
}

StepGrads cell_backward(const LstmParams& p, const StepCache& cache, const Matrix& dh, const Matrix& dc) {
    StepGrads out;
    out.dparams = zeros_like(p);
    out.dx = Matrix(p.m, dh.cols);
    out.dh_prev = Matrix(p.n, dh.cols);
    out.dc_prev = Matrix(p.n, dh.cols);
    cell_backward_accum(p, cache, dh, dc, out.dparams, out.dx, out.dh_prev, out.dc_prev);
    return out;
}

SequenceForward forward_sequence(const LstmParams& p, const std::vector<Matrix>& xs,
                                 const Vector& h0, const Vector& c0) {
    if (h0.size() != p.n || c0.size() != p.n)
        throw ShapeError("forward_sequence: h0/c0 length " + std::to_string(h0.size()) + "/" +
                         std::to_string(c0.size()) + " vs n=" + std::to_string(p.n));
    if (xs.empty())
        throw ContractError("forward_sequence: empty sequence");
    const std::size_t batch = xs.front().cols;
    for (const Matrix& x : xs)
        if (x.rows != p.m || x.cols != batch)
            throw ShapeError("forward_sequence: ragged batch, timestep " + shape_str(x) + " expected " +
                             std::to_string(p.m) + "x" + std::to_string(batch));

    Matrix h(p.n, batch), c(p.n, batch);
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t j = 0; j < batch; ++j) {
            h(i, j) = h0[i];
            c(i, j) = c0[i];
        }

    SequenceForward out;
    out.caches.reserve(xs.size());
    for (const Matrix& x : xs) {
        BatchStep step = cell_step(p, x, h, c);
        h = std::move(step.h);
        c = step.cache.c;
        out.caches.push_back(std::move(step.cache));
    }
    out.h_last = std::move(h);
    return out;
}

SequenceGrads backward_sequence(const LstmParams& p, const std::vector<StepCache>& caches,
                                const Matrix& dh_last) {
    if (caches.empty())
        throw ContractError("backward_sequence: no caches");
    check_cache(p, caches.front());
    const std::size_t batch = caches.front().i.cols;
    if (dh_last.rows != p.n || dh_last.cols != batch)
        throw ContractError("backward_sequence: dh_last " + shape_str(dh_last) + " vs n=" +
                            std::to_string(p.n) + " batch=" + std::to_string(batch));

    SequenceGrads out;
    out.dparams = zeros_like(p);
    out.dxs.assign(caches.size(), Matrix());

    Matrix dh = dh_last;
    Matrix dc(p.n, batch);
    for (std::size_t t = caches.size(); t-- > 0;) {
        Matrix dx(p.m, batch), dh_prev(p.n, batch), dc_prev(p.n, batch);
        cell_backward_accum(p, caches[t], dh, dc, out.dparams, dx, dh_prev, dc_prev);
        out.dxs[t] = std::move(dx);
        dh = std::move(dh_prev);
        dc = std::move(dc_prev);
    }
    return out;
}

} // namespace gatecell
