#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gatecell/errors.hpp"

namespace gatecell {

// Row-major dense matrix, double precision throughout.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
    std::size_t size() const { return data.size(); }
};

struct Vector {
    std::vector<double> data;

    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : data(n, fill) {}

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    std::size_t size() const { return data.size(); }
};

// View over one named flat parameter/gradient buffer. Blocks absent for a
// variant never appear in a tensor list, so nothing downstream can touch them.
struct TensorRef {
    const char* name;
    double* data;
    std::size_t size;
};

std::string shape_str(const Matrix& m);

// c = a * b, c = a * b^T, c = a^T * b. The contraction index always ascends,
// so results are bit-identical to a scalar-loop oracle and across runs.
// No fast-math / reassociation in this path; determinism is a contract.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);

enum class Elementwise { Add, Sub, Hadamard };

Matrix elementwise(Elementwise op, const Matrix& a, const Matrix& b);
Vector elementwise(Elementwise op, const Vector& a, const Vector& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector hadamard(const Vector& a, const Vector& b);

void add_inplace(Matrix& a, const Matrix& b);
void add_scaled(Matrix& a, const Matrix& b, double s); // a += s * b
void scale_inplace(Matrix& a, double s);

Matrix transpose(const Matrix& a);

// Stable logistic sigmoid: only exp of non-positive arguments, so no overflow
// for |x| <= 709 and output clamped to [0, 1] by construction.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

enum class MapFn { Sigmoid, Tanh, Exp };

Vector map(MapFn fn, const Vector& v);
Matrix map(MapFn fn, const Matrix& m);

// Deterministic RNG. Engine is std::mt19937_64 (output sequence fixed by the
// C++ standard); uniform doubles come from the top 53 bits, so a seed yields
// the same draws on every platform. substream() derives an independent child
// generator from (seed, stream id) via a splitmix64 mix without disturbing the
// parent; each stochastic consumer (init, shuffling, dropout, fixtures) gets
// its own substream so adding one never perturbs the others.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    Rng substream(std::uint64_t stream_id) const;

    std::uint64_t next_u64();
    double uniform();                     // [0, 1)
    double uniform(double lo, double hi); // [lo, hi); requires lo < hi
    std::uint64_t below(std::uint64_t bound); // [0, bound), rejection sampled

    Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);
    Vector uniform_vector(std::size_t n, double lo, double hi);

    std::vector<std::size_t> permutation(std::size_t n); // Fisher-Yates

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace gatecell
