#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "auricle/errors.hpp"

namespace auricle {

// Dense row-major array. Float is the working precision; the double
// instantiation exists so gradient checks against central differences have
// meaningful tolerances.
template <typename S>
class TensorOf {
public:
    TensorOf() = default;

    explicit TensorOf(std::vector<std::int64_t> shape)
        : shape_(std::move(shape)), data_(checked_numel(shape_), S(0)) {}

    TensorOf(std::vector<std::int64_t> shape, std::vector<S> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<std::int64_t>(data_.size()) != checked_numel(shape_)) {
            throw ShapeError("tensor: data size " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
        }
    }

    static TensorOf full(std::vector<std::int64_t> shape, S value) {
        TensorOf t(std::move(shape));
        t.fill(value);
        return t;
    }

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t dim(std::size_t i) const { return shape_[i]; }
    std::size_t rank() const { return shape_.size(); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    S* data() { return data_.data(); }
    const S* data() const { return data_.data(); }
    std::vector<S>& values() { return data_; }
    const std::vector<S>& values() const { return data_; }

    S& operator[](std::int64_t i) { return data_[i]; }
    const S& operator[](std::int64_t i) const { return data_[i]; }

    S& at(std::int64_t i, std::int64_t j) { return data_[i * shape_[1] + j]; }
    const S& at(std::int64_t i, std::int64_t j) const { return data_[i * shape_[1] + j]; }

    S& at(std::int64_t i, std::int64_t j, std::int64_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const S& at(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    S& at(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    const S& at(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) const {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    void fill(S v) {
        for (S& x : data_) x = v;
    }

    bool same_shape(const TensorOf& other) const { return shape_ == other.shape_; }

    static std::string shape_string(const std::vector<std::int64_t>& shape) {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) os << ", ";
            os << shape[i];
        }
        os << ")";
        return os.str();
    }

private:
    static std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
        std::int64_t n = 1;
        for (std::int64_t d : shape) {
            if (d < 0) throw ShapeError("tensor: negative dimension in " + shape_string(shape));
            n *= d;
        }
        return n;
    }

    std::vector<std::int64_t> shape_;
    std::vector<S> data_;
};

using Tensor = TensorOf<float>;
using Tensor64 = TensorOf<double>;

template <typename To, typename From>
TensorOf<To> cast(const TensorOf<From>& t) {
    TensorOf<To> out(t.shape());
    for (std::int64_t i = 0; i < t.numel(); ++i) out[i] = static_cast<To>(t[i]);
    return out;
}

template <typename S>
void require_shape(const char* who, const TensorOf<S>& t, const std::vector<std::int64_t>& expected) {
    if (t.shape() != expected) {
        throw ShapeError(std::string(who) + ": expected shape " +
                         TensorOf<S>::shape_string(expected) + ", got " +
                         TensorOf<S>::shape_string(t.shape()));
    }
}

template <typename S>
void require_rank(const char* who, const TensorOf<S>& t, std::size_t rank) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(who) + ": expected rank " + std::to_string(rank) +
                         " tensor, got shape " + TensorOf<S>::shape_string(t.shape()));
    }
}

template <typename S>
bool all_finite(const TensorOf<S>& t) {
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        if (!std::isfinite(static_cast<double>(t[i]))) return false;
    }
    return true;
}

// Debug-mode guard for kernel outputs.
template <typename S>
inline void debug_check_finite([[maybe_unused]] const char* who, [[maybe_unused]] const TensorOf<S>& t) {
#ifndef NDEBUG
    if (!all_finite(t)) throw TrainingError(std::string(who) + ": non-finite value in output");
#endif
}

// --- dense kernels -----------------------------------------------------------
//
// Plain ikj loops; the inner update writes independent elements, so the
// compiler vectorizes them without reassociation flags and the summation
// order is fixed. Transposed variants go through an explicit transpose, which
// costs O(rows*cols) against the O(m*k*n) multiply.

// c[m x n] += a[m x k] * b[k x n]
template <typename S>
void gemm_accumulate(const S* a, const S* b, S* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        S* crow = c + i * n;
        for (std::int64_t p = 0; p < k; ++p) {
            const S av = arow[p];
            const S* brow = b + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename S>
TensorOf<S> transpose(const TensorOf<S>& a) {
    require_rank("transpose", a, 2);
    const std::int64_t m = a.dim(0), n = a.dim(1);
    TensorOf<S> out({n, m});
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

// {m,k} x {k,n} -> {m,n}
template <typename S>
TensorOf<S> matmul(const TensorOf<S>& a, const TensorOf<S>& b) {
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    if (a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: inner dimensions disagree, " +
                         TensorOf<S>::shape_string(a.shape()) + " x " +
                         TensorOf<S>::shape_string(b.shape()));
    }
    TensorOf<S> out({a.dim(0), b.dim(1)});
    gemm_accumulate(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(1));
    return out;
}

// {m,k} x {n,k}^T -> {m,n}
template <typename S>
TensorOf<S> matmul_nt(const TensorOf<S>& a, const TensorOf<S>& b) {
    return matmul(a, transpose(b));
}

// {k,m}^T x {k,n} -> {m,n}
template <typename S>
TensorOf<S> matmul_tn(const TensorOf<S>& a, const TensorOf<S>& b) {
    return matmul(transpose(a), b);
}

template <typename S>
S dot(const TensorOf<S>& a, const TensorOf<S>& b) {
    if (a.numel() != b.numel()) {
        throw ShapeError("dot: size mismatch " + std::to_string(a.numel()) + " vs " +
                         std::to_string(b.numel()));
    }
    S acc = S(0);
    for (std::int64_t i = 0; i < a.numel(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace auricle
