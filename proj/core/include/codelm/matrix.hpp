// SPDX-License-Identifier: Apache-2.0
//
// Minimal row-major dense matrices and the three product kernels the LSTM
// needs. Kernels accumulate into the destination (C += ...).

#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

namespace codelm {

template <class T>
class MatrixView {
 public:
  MatrixView() = default;
  MatrixView(T* data, std::size_t rows, std::size_t cols) : data_(data), rows_(rows), cols_(cols) {}

  template <class U>
    requires std::is_same_v<const U, T>
  MatrixView(const MatrixView<U>& other)  // NOLINT(google-explicit-constructor)
      : data_(other.data()), rows_(other.rows()), cols_(other.cols()) {}

  T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) const { return {data_ + r * cols_, cols_}; }
  std::span<T> flat() const { return {data_, rows_ * cols_}; }

  T* data() const noexcept { return data_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }

 private:
  T* data_ = nullptr;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

using MatRef = MatrixView<double>;
using ConstMatRef = MatrixView<const double>;

/// Owning row-major matrix of doubles, zero-initialized.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : data_(rows * cols, 0.0), rows_(rows), cols_(cols) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  MatRef view() { return {data_.data(), rows_, cols_}; }
  ConstMatRef view() const { return {data_.data(), rows_, cols_}; }
  operator MatRef() { return view(); }             // NOLINT(google-explicit-constructor)
  operator ConstMatRef() const { return view(); }  // NOLINT(google-explicit-constructor)

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::vector<double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

/// C(m×n) += A(m×k) · B(n×k)ᵀ
void gemm_nt(ConstMatRef a, ConstMatRef b, MatRef c);
/// C(m×n) += A(m×k) · B(k×n)
void gemm_nn(ConstMatRef a, ConstMatRef b, MatRef c);
/// C(m×n) += A(k×m)ᵀ · B(k×n)
void gemm_tn(ConstMatRef a, ConstMatRef b, MatRef c);

}  // namespace codelm
