#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lyapflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense rank-3 tensor of size dim^3. Entry (i, j, k) holds d_j d_k f_i for
/// a vector field f, so the last two slots are the derivative slots.
class Tensor3
{
public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  /// Matrix slice for a fixed derivative index k: entry (i, j) = d_j d_k f_i.
  Mat slice(int k) const
  {
    Mat m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        m(i, j) = (*this)(i, j, k);
    return m;
  }

  double max_abs() const
  {
    double m = 0.0;
    for (double v : data_)
      m = std::max(m, std::abs(v));
    return m;
  }

  Tensor3& operator*=(double s)
  {
    for (double& v : data_)
      v *= s;
    return *this;
  }

  Tensor3& operator+=(const Tensor3& o)
  {
    for (std::size_t n = 0; n < data_.size(); ++n)
      data_[n] += o.data_[n];
    return *this;
  }

  const std::vector<double>& data() const { return data_; }

private:
  std::size_t index(int i, int j, int k) const
  {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }

  int dim_ = 0;
  std::vector<double> data_;
};

} // namespace lyapflow
