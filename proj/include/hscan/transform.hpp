#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <span>
#include <string>

#include "hscan/error.hpp"

namespace hscan {

template <class T>
using Vec3 = std::array<T, 3>;

// Affine 3D transform stored as a row-major 4x4 matrix whose bottom row is
// always exactly (0, 0, 0, 1).
template <class T>
struct Transform {
  std::array<T, 16> m{};

  constexpr T& operator()(int r, int c) { return m[r * 4 + c]; }
  constexpr const T& operator()(int r, int c) const { return m[r * 4 + c]; }

  static constexpr Transform identity() {
    Transform t;
    t(0, 0) = t(1, 1) = t(2, 2) = t(3, 3) = T(1);
    return t;
  }

  static constexpr Transform translation(T x, T y, T z) {
    Transform t = identity();
    t(0, 3) = x;
    t(1, 3) = y;
    t(2, 3) = z;
    return t;
  }

  static Transform rotation_z(T radians) {
    Transform t = identity();
    const T c = std::cos(radians), s = std::sin(radians);
    t(0, 0) = c;
    t(0, 1) = -s;
    t(1, 0) = s;
    t(1, 1) = c;
    return t;
  }

  Vec3<T> translation_part() const { return {m[3], m[7], m[11]}; }

  bool is_affine() const {
    return m[12] == T(0) && m[13] == T(0) && m[14] == T(0) && m[15] == T(1);
  }

  template <class U>
  Transform<U> cast() const {
    Transform<U> out;
    for (int i = 0; i < 16; ++i) out.m[i] = static_cast<U>(m[i]);
    return out;
  }
};

template <class T>
bool bit_equal(const Transform<T>& a, const Transform<T>& b) {
  return std::memcmp(a.m.data(), b.m.data(), sizeof(a.m)) == 0;
}

// parent * child for affine matrices. Only the top 3x4 block is computed; the
// bottom row is written exactly. Every scan goes through this function, so
// all algorithms share one rounding behaviour per product.
template <class T>
Transform<T> compose(const Transform<T>& parent, const Transform<T>& child) {
  Transform<T> r;
  for (int i = 0; i < 3; ++i) {
    const T a0 = parent(i, 0), a1 = parent(i, 1), a2 = parent(i, 2);
    for (int j = 0; j < 4; ++j)
      r(i, j) = a0 * child(0, j) + a1 * child(1, j) + a2 * child(2, j);
    r(i, 3) += parent(i, 3);
  }
  r(3, 3) = T(1);
  return r;
}

template <class T>
Transform<T> operator*(const Transform<T>& a, const Transform<T>& b) {
  return compose(a, b);
}

template <class T>
Transform<T> inverse(const Transform<T>& t) {
  const T a = t(0, 0), b = t(0, 1), c = t(0, 2);
  const T d = t(1, 0), e = t(1, 1), f = t(1, 2);
  const T g = t(2, 0), h = t(2, 1), k = t(2, 2);
  const T c00 = e * k - f * h, c01 = c * h - b * k, c02 = b * f - c * e;
  const T c10 = f * g - d * k, c11 = a * k - c * g, c12 = c * d - a * f;
  const T c20 = d * h - e * g, c21 = b * g - a * h, c22 = a * e - b * d;
  const T det = a * c00 + b * c10 + c * c20;
  if (det == T(0)) throw Error(ErrorCode::InvalidSpec, "singular transform has no inverse");
  const T s = T(1) / det;
  Transform<T> r;
  const T lin[3][3] = {{c00 * s, c01 * s, c02 * s}, {c10 * s, c11 * s, c12 * s},
                       {c20 * s, c21 * s, c22 * s}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = lin[i][j];
    r(i, 3) = -(lin[i][0] * t(0, 3) + lin[i][1] * t(1, 3) + lin[i][2] * t(2, 3));
  }
  r(3, 3) = T(1);
  return r;
}

template <class T>
double frobenius(const Transform<T>& t) {
  double s = 0;
  for (T v : t.m) s += double(v) * double(v);
  return std::sqrt(s);
}

// ||a - b||_F / ||b||_F, in double regardless of T.
template <class T>
double relative_frobenius_error(const Transform<T>& a, const Transform<T>& b) {
  double num = 0;
  for (int i = 0; i < 16; ++i) {
    const double d = double(a.m[i]) - double(b.m[i]);
    num += d * d;
  }
  const double den = frobenius(b);
  return std::sqrt(num) / (den > 0 ? den : 1.0);
}

template <class T>
struct Quat {
  T w = T(1), x = T(0), y = T(0), z = T(0);

  T dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  T norm() const { return std::sqrt(dot(*this)); }
  Quat normalized() const {
    const T n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  Quat operator-() const { return {-w, -x, -y, -z}; }

  static Quat from_axis_angle(T ax, T ay, T az, T radians) {
    const T len = std::sqrt(ax * ax + ay * ay + az * az);
    const T s = std::sin(radians / 2) / len;
    return {std::cos(radians / 2), ax * s, ay * s, az * s};
  }

  template <class U>
  Quat<U> cast() const {
    return {static_cast<U>(w), static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
  }

  friend bool operator==(const Quat&, const Quat&) = default;
};

// Translation, rotation, scale channels of a local joint transform.
template <class T>
struct Trs {
  Vec3<T> translation{T(0), T(0), T(0)};
  Quat<T> rotation{};
  Vec3<T> scale{T(1), T(1), T(1)};

  template <class U>
  Trs<U> cast() const {
    return {{static_cast<U>(translation[0]), static_cast<U>(translation[1]),
             static_cast<U>(translation[2])},
            rotation.template cast<U>(),
            {static_cast<U>(scale[0]), static_cast<U>(scale[1]), static_cast<U>(scale[2])}};
  }

  friend bool operator==(const Trs&, const Trs&) = default;
};

inline constexpr double kQuaternionNormTolerance = 1e-3;

// T * R * S: points are scaled, then rotated, then translated.
template <class T>
Transform<T> trs_to_matrix(const Trs<T>& trs) {
  const T n = trs.rotation.norm();
  if (!(std::abs(double(n) - 1.0) <= kQuaternionNormTolerance))
    throw Error(ErrorCode::NonUnitQuaternion, "rotation norm " + std::to_string(double(n)));
  const Quat<T> q = trs.rotation.normalized();
  const T xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  const T xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  const T wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  const T rot[3][3] = {{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
                       {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
                       {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}};
  Transform<T> t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t(i, j) = rot[i][j] * trs.scale[j];
    t(i, 3) = trs.translation[i];
  }
  t(3, 3) = T(1);
  return t;
}

}  // namespace hscan
