// Independent reference computations for tests. Kept deliberately naive.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "solscale/group_model.hpp"
#include "solscale/net.hpp"

namespace oracle {

// Plain arccosh form of the upper half-plane distance.
inline double hyperbolic(double x1, double s1, double x2, double s2) {
  return std::acosh(1.0 + ((x1 - x2) * (x1 - x2) + (s1 - s2) * (s1 - s2)) / (2.0 * s1 * s2));
}

inline std::vector<double> heights(const std::vector<double>& t) {
  std::vector<double> h{t[0]};
  for (std::size_t j = 1; j < t.size(); ++j) h.push_back(t[j] - t[j - 1]);
  h.push_back(-t.back());
  return h;
}

// Max-of-factors distance computed from raw coordinate vectors.
inline double distance(const std::vector<double>& x1, const std::vector<double>& t1, const std::vector<double>& x2,
                       const std::vector<double>& t2) {
  const auto h1 = heights(t1), h2 = heights(t2);
  double d = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i)
    d = std::max(d, hyperbolic(x1[i], std::exp(h1[i]), x2[i], std::exp(h2[i])));
  return d;
}

inline double distance(const solscale::NetIndex& a, const solscale::NetIndex& b) {
  auto coords = [](const solscale::NetIndex& p, std::vector<double>& x, std::vector<double>& t) {
    for (auto k : p.k) t.push_back(static_cast<double>(k));
    const auto h = heights(t);
    for (int i = 0; i < p.m.size(); ++i) x.push_back(std::exp(h[static_cast<std::size_t>(i)]) * static_cast<double>(p.m[i]));
  };
  std::vector<double> xa, ta, xb, tb;
  coords(a, xa, ta);
  coords(b, xb, tb);
  return distance(xa, ta, xb, tb);
}

inline solscale::NetIndex index(std::vector<std::int64_t> k, std::vector<std::int64_t> m) {
  return solscale::NetIndex(solscale::KVec(std::span<const std::int64_t>(k)), solscale::MVec(std::span<const std::int64_t>(m)));
}

// Calls fn on every net index with k in [-K, K]^{2n-1} and m in [-M, M]^{2n}.
template <class F>
void for_window(int n, int K, int M, F&& fn) {
  const int td = 2 * n - 1, xd = 2 * n;
  std::vector<std::int64_t> k(static_cast<std::size_t>(td), -K), m(static_cast<std::size_t>(xd), -M);
  while (true) {
    std::fill(m.begin(), m.end(), -M);
    while (true) {
      fn(index(k, m));
      int i = xd - 1;
      while (i >= 0 && ++m[static_cast<std::size_t>(i)] > M) m[static_cast<std::size_t>(i--)] = -M;
      if (i < 0) break;
    }
    int j = td - 1;
    while (j >= 0 && ++k[static_cast<std::size_t>(j)] > K) k[static_cast<std::size_t>(j--)] = -K;
    if (j < 0) break;
  }
}

inline std::vector<solscale::NetIndex> window(int n, int K, int M) {
  std::vector<solscale::NetIndex> out;
  for_window(n, K, M, [&](const solscale::NetIndex& q) { out.push_back(q); });
  return out;
}

// Brute-force net count of a box: test every candidate index in a generous window.
inline std::uint64_t count_in_box(const solscale::Box& box, std::int64_t mlimit) {
  std::uint64_t c = 0;
  const int n = box.spec().rank();
  const int td = 2 * n - 1, xd = 2 * n;
  std::vector<std::int64_t> k(static_cast<std::size_t>(td));
  std::vector<std::int64_t> klo(static_cast<std::size_t>(td)), khi(static_cast<std::size_t>(td));
  for (int j = 0; j < td; ++j) {
    klo[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(box.t(j).lo)) - 1;
    khi[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::ceil(box.t(j).hi)) + 1;
  }
  k = klo;
  while (true) {
    std::vector<double> t(k.begin(), k.end());
    const auto h = heights(t);
    bool in_t = true;
    for (int j = 0; j < td; ++j) in_t = in_t && box.t(j).lo <= t[static_cast<std::size_t>(j)] && t[static_cast<std::size_t>(j)] < box.t(j).hi;
    if (in_t) {
      std::uint64_t prod = 1;
      for (int i = 0; i < xd; ++i) {
        std::uint64_t cnt = 0;
        const double s = std::exp(h[static_cast<std::size_t>(i)]);
        for (std::int64_t m = -mlimit; m <= mlimit; ++m) {
          const double x = s * static_cast<double>(m);
          if (box.x(i).lo <= x && x < box.x(i).hi) ++cnt;
        }
        prod *= cnt;
      }
      c += prod;
    }
    int j = td - 1;
    while (j >= 0 && ++k[static_cast<std::size_t>(j)] > khi[static_cast<std::size_t>(j)]) {
      k[static_cast<std::size_t>(j)] = klo[static_cast<std::size_t>(j)];
      --j;
    }
    if (j < 0) break;
  }
  return c;
}

}  // namespace oracle
