#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the scan or lifting code it is used to check.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "hscan/corpus.hpp"
#include "hscan/skeleton.hpp"
#include "hscan/transform.hpp"

namespace hscan::testing {

// j repeated parent steps; nullopt once a root is passed.
inline OptJoint brute_ancestor(std::span<const OptJoint> parents, JointIndex i, std::size_t j) {
  OptJoint cur = i;
  for (std::size_t k = 0; k < j && cur; ++k) cur = parents[*cur];
  return cur;
}

inline std::size_t brute_depth(std::span<const OptJoint> parents, JointIndex i) {
  std::size_t d = 0;
  for (OptJoint cur = parents[i]; cur; cur = parents[*cur]) ++d;
  return d;
}

using Mat4 = std::array<std::array<long double, 4>, 4>;

inline Mat4 to_mat(const Transform<double>& t) {
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = t(r, c);
  return m;
}

// Plain full 4x4 product in extended precision.
inline Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Transform<double> to_transform(const Mat4& m) {
  Transform<double> t;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) t(r, c) = static_cast<double>(m[r][c]);
  return t;
}

// Product of the chain nodes from the root-most of the `limit` nearest
// (self included) down to i. limit == 0 means the whole chain.
inline Transform<double> brute_chain_product(std::span<const OptJoint> parents,
                                             std::span<const Transform<double>> local, JointIndex i,
                                             std::size_t limit = 0) {
  std::vector<JointIndex> chain;
  for (OptJoint cur = i; cur && (limit == 0 || chain.size() < limit); cur = parents[*cur])
    chain.push_back(*cur);
  Mat4 acc = to_mat(local[chain.back()]);
  for (auto k = chain.size() - 1; k-- > 0;) acc = matmul(acc, to_mat(local[chain[k]]));
  return to_transform(acc);
}

inline std::vector<Transform<double>> brute_model(std::span<const OptJoint> parents,
                                                  std::span<const Transform<double>> local) {
  std::vector<Transform<double>> out;
  for (JointIndex i = 0; i < parents.size(); ++i)
    out.push_back(brute_chain_product(parents, local, i));
  return out;
}

// A forest with `roots` trees in topological order; each new joint picks a
// uniformly random earlier joint (or starts a tree).
inline std::vector<OptJoint> random_forest(corpus::Rng& rng, std::size_t n, std::size_t roots = 1) {
  std::vector<OptJoint> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < roots) continue;
    p[i] = static_cast<JointIndex>(rng.below(i));
  }
  return p;
}

// Same forest with labels shuffled, so parents may come after children.
inline std::vector<OptJoint> shuffled(corpus::Rng& rng, const std::vector<OptJoint>& parents,
                                      std::vector<JointIndex>* label_out = nullptr) {
  const std::size_t n = parents.size();
  std::vector<JointIndex> label(n);
  for (JointIndex i = 0; i < n; ++i) label[i] = i;
  rng.shuffle(label.begin(), label.end());
  std::vector<OptJoint> out(n);
  for (JointIndex i = 0; i < n; ++i)
    if (parents[i]) out[label[i]] = label[*parents[i]];
  if (label_out) *label_out = label;
  return out;
}

// Deep, narrow forest: every joint hangs off one of the last few joints.
inline std::vector<OptJoint> deep_forest(corpus::Rng& rng, std::size_t n, std::size_t roots,
                                         std::size_t window) {
  std::vector<OptJoint> p(n);
  for (std::size_t i = roots; i < n; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    p[i] = static_cast<JointIndex>(lo + rng.below(i - lo));
  }
  return p;
}

inline Trs<double> random_trs(corpus::Rng& rng) {
  Trs<double> t;
  for (auto& c : t.translation) c = rng.uniform(-2.0, 2.0);
  for (auto& c : t.scale) c = rng.uniform(0.9, 1.1);
  t.rotation = Quat<double>::from_axis_angle(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                             rng.uniform(-1, 1) + 2.0,
                                             rng.uniform(-std::numbers::pi, std::numbers::pi));
  return t;
}

inline std::vector<Transform<double>> random_locals(corpus::Rng& rng, std::size_t n) {
  std::vector<Transform<double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(trs_to_matrix(random_trs(rng)));
  return out;
}

}  // namespace hscan::testing
