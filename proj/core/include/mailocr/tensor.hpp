#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "mailocr/errors.hpp"

namespace mailocr {

// Dense n-dimensional array, row-major. Scalar type is a template parameter
// so the training path can run in float while gradient verification runs
// the same code in double.
template <class S>
struct TensorT {
    std::vector<int> shape;
    std::vector<S> data;

    TensorT() = default;

    explicit TensorT(std::vector<int> shp, S fill = S(0)) : shape(std::move(shp)) {
        data.assign(static_cast<std::size_t>(count(shape)), fill);
    }

    static std::int64_t count(const std::vector<int>& shp) {
        std::int64_t n = 1;
        for (int d : shp) {
            if (d < 0) throw ShapeError("negative extent");
            n *= d;
        }
        return n;
    }

    static TensorT zeros_like(const TensorT& other) { return TensorT(other.shape); }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    const S& operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    // 2-4D convenience indexers (unchecked)
    S& at(int i, int j) { return data[static_cast<std::size_t>(i) * dim(1) + j]; }
    const S& at(int i, int j) const { return data[static_cast<std::size_t>(i) * dim(1) + j]; }
    S& at(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }
    const S& at(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k];
    }
    S& at(int i, int j, int k, int l) {
        return data[((static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k) * dim(3) + l];
    }
    const S& at(int i, int j, int k, int l) const {
        return data[((static_cast<std::size_t>(i) * dim(1) + j) * dim(2) + k) * dim(3) + l];
    }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    template <class T>
    TensorT<T> cast() const {
        TensorT<T> out(shape);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

}  // namespace mailocr
