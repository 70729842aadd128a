#pragma once

// Dense tensor values at a point.  All slots range over the same chart
// dimension n; components are stored row-major.  The scalar type is
// either double or Jet (jet-valued components allow one further
// covariant derivative downstream).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "curvlab/errors.hpp"
#include "curvlab/jet.hpp"

namespace curvlab {

enum class Slot : unsigned char { Up, Down };

template <typename T>
class Tensor {
public:
    Tensor() = default;

    Tensor(int dim, std::vector<Slot> variance, const T& zero = T{})
        : dim_(dim), variance_(std::move(variance)) {
        std::size_t count = 1;
        for (std::size_t r = 0; r < variance_.size(); ++r) count *= static_cast<std::size_t>(dim_);
        data_.assign(count, zero);
    }

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(variance_.size()); }
    const std::vector<Slot>& variance() const { return variance_; }
    std::size_t size() const { return data_.size(); }

    T& flat(std::size_t i) { return data_[i]; }
    const T& flat(std::size_t i) const { return data_[i]; }

    template <typename... I>
    T& operator()(I... idx) {
        return data_[offset(idx...)];
    }
    template <typename... I>
    const T& operator()(I... idx) const {
        return data_[offset(idx...)];
    }

    /// Decode a flat offset into per-slot indices.
    std::vector<int> unravel(std::size_t flat_index) const {
        std::vector<int> idx(variance_.size());
        for (int r = rank() - 1; r >= 0; --r) {
            idx[static_cast<std::size_t>(r)] = static_cast<int>(flat_index % static_cast<std::size_t>(dim_));
            flat_index /= static_cast<std::size_t>(dim_);
        }
        return idx;
    }

private:
    template <typename... I>
    std::size_t offset(I... idx) const {
        static_assert((std::is_convertible_v<I, int> && ...));
        std::size_t off = 0;
        ((off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
        return off;
    }

    int dim_ = 0;
    std::vector<Slot> variance_;
    std::vector<T> data_;
};

inline double max_abs(const Tensor<double>& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t.flat(i)));
    return m;
}

/// Drop jet coefficients, keeping point values.
inline Tensor<double> values(const Tensor<Jet>& t) {
    Tensor<double> out(t.dim(), t.variance());
    for (std::size_t i = 0; i < t.size(); ++i) out.flat(i) = t.flat(i).value();
    return out;
}

inline Tensor<Jet> truncated(const Tensor<Jet>& t, int order) {
    Tensor<Jet> out(t.dim(), t.variance());
    for (std::size_t i = 0; i < t.size(); ++i) out.flat(i) = t.flat(i).truncated(order);
    return out;
}

template <typename T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.dim() != b.dim() || a.rank() != b.rank())
        throw InputError("tensor subtraction shape mismatch");
    Tensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.flat(i) = a.flat(i) - b.flat(i);
    return out;
}

template <typename T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.dim() != b.dim() || a.rank() != b.rank())
        throw InputError("tensor addition shape mismatch");
    Tensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.flat(i) = a.flat(i) + b.flat(i);
    return out;
}

} // namespace curvlab
