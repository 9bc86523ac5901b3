#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>

#include "solscale/error.hpp"

namespace solscale {

inline constexpr int kMaxRank = 3;
inline constexpr int kMaxXDim = 2 * kMaxRank;
inline constexpr int kMaxTDim = 2 * kMaxRank - 1;
inline constexpr double kDefaultTol = 1e-9;

// Small vector with inline storage; sizes here never exceed 2 * kMaxRank + 2.
template <class T, int N>
class FixedVec {
 public:
  FixedVec() = default;
  explicit FixedVec(int size, T fill = T{}) : size_(size) {
    if (size < 0 || size > N) throw DimensionError("FixedVec: size out of range");
    std::fill(data_.begin(), data_.begin() + size, fill);
  }
  FixedVec(std::initializer_list<T> values) : FixedVec(std::span<const T>(values.begin(), values.size())) {}
  explicit FixedVec(std::span<const T> values) {
    if (values.size() > static_cast<std::size_t>(N)) throw DimensionError("FixedVec: too many entries");
    size_ = static_cast<int>(values.size());
    std::copy(values.begin(), values.end(), data_.begin());
  }

  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  T& operator[](int i) {
    assert(i >= 0 && i < size_);
    return data_[static_cast<std::size_t>(i)];
  }
  const T& operator[](int i) const {
    assert(i >= 0 && i < size_);
    return data_[static_cast<std::size_t>(i)];
  }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + size_; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + size_; }
  std::span<const T> span() const { return {data_.data(), static_cast<std::size_t>(size_)}; }

  void push_back(T v) {
    if (size_ >= N) throw DimensionError("FixedVec: capacity exceeded");
    data_[static_cast<std::size_t>(size_++)] = v;
  }

  friend bool operator==(const FixedVec& a, const FixedVec& b) {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }
  friend auto operator<=>(const FixedVec& a, const FixedVec& b) {
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
  }

 private:
  std::array<T, N> data_{};
  int size_ = 0;
};

using XVec = FixedVec<double, kMaxXDim>;
using TVec = FixedVec<double, kMaxTDim>;

// Rank parameter n of G = R^{2n} x| R^{2n-1}; n = 1 is Sol.
class GroupSpec {
 public:
  explicit GroupSpec(int n = 1);
  int rank() const { return n_; }
  int x_dim() const { return 2 * n_; }
  int t_dim() const { return 2 * n_ - 1; }
  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  int n_;
};

class GroupPoint {
 public:
  GroupPoint() = default;
  GroupPoint(GroupSpec spec, XVec x, TVec t);
  GroupPoint(GroupSpec spec, std::span<const double> x, std::span<const double> t)
      : GroupPoint(spec, XVec(x), TVec(t)) {}

  const GroupSpec& spec() const { return spec_; }
  const XVec& x() const { return x_; }
  const TVec& t() const { return t_; }
  double x(int i) const { return x_[i]; }
  double t(int j) const { return t_[j]; }

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;

 private:
  GroupSpec spec_;
  XVec x_;
  TVec t_;
};

// Sol convenience: (a, b, c) = (x1, x2, t1).
GroupPoint sol_point(double a, double b, double c);

// h_1 = t_1, h_{j+1} = t_{j+1} - t_j, h_{2n} = -t_{2n-1}.
template <class T>
FixedVec<T, kMaxXDim> heights_of(std::span<const T> t) {
  FixedVec<T, kMaxXDim> h;
  if (t.empty()) throw DimensionError("heights: empty t-vector");
  h.push_back(t[0]);
  for (std::size_t j = 1; j < t.size(); ++j) h.push_back(t[j] - t[j - 1]);
  h.push_back(-t[t.size() - 1]);
  return h;
}

// Inverse of heights_of on the sum-zero hyperplane: t_j = h_1 + ... + h_j.
template <class T>
FixedVec<T, kMaxTDim> t_from_heights(std::span<const T> h) {
  FixedVec<T, kMaxTDim> t;
  T acc{};
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    acc += h[i];
    t.push_back(acc);
  }
  return t;
}

XVec heights(const GroupPoint& p);

GroupPoint identity(GroupSpec spec);
GroupPoint multiply(const GroupPoint& p, const GroupPoint& q);
GroupPoint inverse(const GroupPoint& p);

double hyperbolic_distance(double x1, double s1, double x2, double s2);
double quasi_distance(const GroupPoint& p, const GroupPoint& q);

std::string to_string(const GroupPoint& p);

}  // namespace solscale
