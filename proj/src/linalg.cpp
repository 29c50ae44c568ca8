#include "gatecell/linalg.hpp"

#include <algorithm>
#include <string>

namespace gatecell {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void require_same_len(const Vector& a, const Vector& b, const char* op) {
    if (a.size() != b.size())
        throw ShapeError(std::string(op) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) + " * " + shape_str(b));
    Matrix c(a.rows, b.cols);
    // i-k-j order: each c(i,j) accumulates a(i,k)*b(k,j) with k ascending.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j)
                crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw ShapeError("matmul_nt: contraction dims differ, " + shape_str(a) + " * " + shape_str(b) + "^T");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k)
                s += arow[k] * brow[k];
            c(i, j) = s;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw ShapeError("matmul_tn: contraction dims differ, " + shape_str(a) + "^T * " + shape_str(b));
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row_ptr(k);
        const double* brow = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            double* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j)
                crow[j] += aki * brow[j];
        }
    }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols != x.size())
        throw ShapeError("matvec: " + shape_str(a) + " * vector of length " + std::to_string(x.size()));
    Vector y(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k)
            s += arow[k] * x[k];
        y[i] = s;
    }
    return y;
}

Matrix elementwise(Elementwise op, const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "elementwise");
    Matrix c(a.rows, a.cols);
    switch (op) {
    case Elementwise::Add:
        for (std::size_t i = 0; i < a.size(); ++i) c.data[i] = a.data[i] + b.data[i];
        break;
    case Elementwise::Sub:
        for (std::size_t i = 0; i < a.size(); ++i) c.data[i] = a.data[i] - b.data[i];
        break;
    case Elementwise::Hadamard:
        for (std::size_t i = 0; i < a.size(); ++i) c.data[i] = a.data[i] * b.data[i];
        break;
    }
    return c;
}

Vector elementwise(Elementwise op, const Vector& a, const Vector& b) {
    require_same_len(a, b, "elementwise");
    Vector c(a.size());
    switch (op) {
    case Elementwise::Add:
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
        break;
    case Elementwise::Sub:
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
        break;
    case Elementwise::Hadamard:
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
        break;
    }
    return c;
}

Matrix add(const Matrix& a, const Matrix& b) { return elementwise(Elementwise::Add, a, b); }
Matrix sub(const Matrix& a, const Matrix& b) { return elementwise(Elementwise::Sub, a, b); }
Matrix hadamard(const Matrix& a, const Matrix& b) { return elementwise(Elementwise::Hadamard, a, b); }
Vector add(const Vector& a, const Vector& b) { return elementwise(Elementwise::Add, a, b); }
Vector sub(const Vector& a, const Vector& b) { return elementwise(Elementwise::Sub, a, b); }
Vector hadamard(const Vector& a, const Vector& b) { return elementwise(Elementwise::Hadamard, a, b); }

void add_inplace(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add_inplace");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

void add_scaled(Matrix& a, const Matrix& b, double s) {
    require_same_shape(a, b, "add_scaled");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += s * b.data[i];
}

void scale_inplace(Matrix& a, double s) {
    for (double& v : a.data) v *= s;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            t(j, i) = a(i, j);
    return t;
}

namespace {

double apply_fn(MapFn fn, double x) {
    switch (fn) {
    case MapFn::Sigmoid: return sigmoid(x);
    case MapFn::Tanh: return std::tanh(x);
    case MapFn::Exp: return std::exp(x);
    }
    return 0.0; // unreachable
}

} // namespace

Vector map(MapFn fn, const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = apply_fn(fn, v[i]);
    return out;
}

Matrix map(MapFn fn, const Matrix& m) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.size(); ++i) out.data[i] = apply_fn(fn, m.data[i]);
    return out;
}

namespace {

// splitmix64 finalizer; used only to derive substream seeds.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::substream(std::uint64_t stream_id) const {
    return Rng(mix64(seed_ ^ mix64(stream_id)));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    // top 53 bits -> [0, 1); identical on every platform for a given seed
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi))
        throw std::invalid_argument("uniform: lo must be < hi, got [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + ")");
    return lo + uniform() * (hi - lo);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

Matrix Rng::uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_matrix: lo must be < hi");
    Matrix m(rows, cols);
    for (double& v : m.data) v = lo + uniform() * (hi - lo);
    return m;
}

Vector Rng::uniform_vector(std::size_t n, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_vector: lo must be < hi");
    Vector v(n);
    for (double& x : v.data) x = lo + uniform() * (hi - lo);
    return v;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i)
        std::swap(p[i - 1], p[below(i)]);
    return p;
}

} // namespace gatecell
