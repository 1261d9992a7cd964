#pragma once

#include <Eigen/Core>

namespace spectronet::nn {

template <typename T>
using MatrixRM =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using MapRM = Eigen::Map<MatrixRM<T>, Eigen::Unaligned,
                         Eigen::OuterStride<Eigen::Dynamic>>;

template <typename T>
using ConstMapRM = Eigen::Map<const MatrixRM<T>, Eigen::Unaligned,
                              Eigen::OuterStride<Eigen::Dynamic>>;

/// Row-major matrix view over a raw pointer with an explicit row stride.
template <typename T>
MapRM<T> map_matrix(T* p, Eigen::Index rows, Eigen::Index cols,
                    Eigen::Index row_stride) {
    return MapRM<T>(p, rows, cols, Eigen::OuterStride<>(row_stride));
}

template <typename T>
ConstMapRM<T> map_matrix(const T* p, Eigen::Index rows, Eigen::Index cols,
                         Eigen::Index row_stride) {
    return ConstMapRM<T>(p, rows, cols, Eigen::OuterStride<>(row_stride));
}

} // namespace spectronet::nn
