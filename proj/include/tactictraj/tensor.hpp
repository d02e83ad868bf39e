#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tactictraj/errors.hpp"

namespace tactictraj {

/// Dense row-major tensor of 64-bit floats. All model math runs on these;
/// most operations treat tensors as 2-D matrices (rows x cols), but the
/// shape vector may carry more axes for trajectory blocks like [S,N,T,2].
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (count(shape_) != data_.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
        }
    }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    /// 2-D convenience constructor from nested initializer lists.
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t m = rows.size();
        const std::size_t n = m == 0 ? 0 : rows.begin()->size();
        Tensor t({m, n});
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != n) throw ShapeError("ragged initializer rows");
            std::size_t j = 0;
            for (double v : row) t.at(i, j++) = v;
            ++i;
        }
        return t;
    }

    static Tensor row(std::vector<double> values) {
        const std::size_t n = values.size();
        return Tensor({1, n}, std::move(values));
    }

    static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t ndim() const { return shape_.size(); }

    std::size_t rows() const {
        require_2d();
        return shape_[0];
    }
    std::size_t cols() const {
        require_2d();
        return shape_[1];
    }

    double& at(std::size_t r, std::size_t c) {
        require_2d();
        return data_[r * shape_[1] + c];
    }
    double at(std::size_t r, std::size_t c) const {
        require_2d();
        return data_[r * shape_[1] + c];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    /// Flat offset of a multi-index (row-major).
    std::size_t offset(std::initializer_list<std::size_t> idx) const {
        if (idx.size() != shape_.size()) {
            throw ShapeError("index rank " + std::to_string(idx.size()) +
                             " does not match tensor rank " + std::to_string(shape_.size()));
        }
        std::size_t off = 0;
        auto it = idx.begin();
        for (std::size_t d = 0; d < shape_.size(); ++d, ++it) off = off * shape_[d] + *it;
        return off;
    }

    Tensor reshaped(std::vector<std::size_t> shape) const {
        if (count(shape) != data_.size()) {
            throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
        }
        return Tensor(std::move(shape), data_);
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    double max_abs_diff(const Tensor& o) const {
        if (!same_shape(o)) {
            throw ShapeError("shape mismatch " + shape_string(shape_) + " vs " + shape_string(o.shape_));
        }
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - o.data_[i]));
        return m;
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    static std::string shape_string(const std::vector<std::size_t>& shape) {
        std::ostringstream os;
        os << '(';
        for (std::size_t d = 0; d < shape.size(); ++d) os << (d ? "x" : "") << shape[d];
        os << ')';
        return os.str();
    }

private:
    void require_2d() const {
        if (shape_.size() != 2) {
            throw ShapeError("expected 2-D tensor, got " + shape_string(shape_));
        }
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

namespace detail {
using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

/// Standard matrix product; inner dimensions must agree.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.rows()) {
        throw ShapeError("matmul shape mismatch " + Tensor::shape_string(a.shape()) + " vs " +
                         Tensor::shape_string(b.shape()));
    }
    Tensor out({a.rows(), b.cols()});
    Eigen::Map<const detail::EigenRowMat> ma(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                                             static_cast<Eigen::Index>(a.cols()));
    Eigen::Map<const detail::EigenRowMat> mb(b.data().data(), static_cast<Eigen::Index>(b.rows()),
                                             static_cast<Eigen::Index>(b.cols()));
    Eigen::Map<detail::EigenRowMat> mo(out.data().data(), static_cast<Eigen::Index>(out.rows()),
                                       static_cast<Eigen::Index>(out.cols()));
    mo.noalias() = ma * mb;
    return out;
}

inline Tensor transpose(const Tensor& a) {
    Tensor out({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

/// Row-wise softmax with max-subtraction for stability.
inline Tensor softmax_rows(const Tensor& x) {
    Tensor out({x.rows(), x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double e = std::exp(x.at(i, j) - mx);
            out.at(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < x.cols(); ++j) out.at(i, j) /= denom;
    }
    return out;
}

/// softmax(Q K^T / sqrt(d)) V. Q is q x d, K is v x d, V is v x e.
inline Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
    if (q.cols() != k.cols()) {
        throw ShapeError("attention Q/K feature mismatch " + Tensor::shape_string(q.shape()) +
                         " vs " + Tensor::shape_string(k.shape()));
    }
    if (k.rows() != v.rows()) {
        throw ShapeError("attention K/V row mismatch " + Tensor::shape_string(k.shape()) + " vs " +
                         Tensor::shape_string(v.shape()));
    }
    Tensor logits = matmul(q, transpose(k));
    const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    for (double& x : logits.data()) x *= inv;
    return matmul(softmax_rows(logits), v);
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("add shape mismatch " + Tensor::shape_string(a.shape()) + " vs " +
                         Tensor::shape_string(b.shape()));
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("sub shape mismatch " + Tensor::shape_string(a.shape()) + " vs " +
                         Tensor::shape_string(b.shape()));
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
    return out;
}

inline Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    for (double& v : out.data()) v *= c;
    return out;
}

inline double frobenius_norm(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double sum_all(const Tensor& a) {
    return std::accumulate(a.data().begin(), a.data().end(), 0.0);
}

}  // namespace tactictraj
