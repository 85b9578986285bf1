#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hscan/error.hpp"
#include "hscan/skeleton.hpp"
#include "hscan/transform.hpp"

namespace hscan {

enum class Space { Local, Model, Skin };

constexpr const char* to_string(Space s) noexcept {
  switch (s) {
    case Space::Local: return "local";
    case Space::Model: return "model";
    case Space::Skin: return "skin";
  }
  return "?";
}

template <class T>
struct Pose {
  std::vector<Transform<T>> transforms;
  Space space = Space::Local;

  std::size_t size() const noexcept { return transforms.size(); }
  const Transform<T>& operator[](std::size_t i) const { return transforms[i]; }
  Transform<T>& operator[](std::size_t i) { return transforms[i]; }
};

// Local pose still in channel form; blending happens here, before matrices.
template <class T>
using TrsPose = std::vector<Trs<T>>;

template <class T>
Pose<T> to_local_pose(std::span<const Trs<T>> channels) {
  Pose<T> p;
  p.space = Space::Local;
  p.transforms.reserve(channels.size());
  for (const auto& c : channels) p.transforms.push_back(trs_to_matrix(c));
  return p;
}

struct Keyframe {
  double time = 0;
  Trs<double> value;
};

struct AnimationClip {
  double duration = 0;
  std::vector<std::vector<Keyframe>> tracks;  // one per joint, times strictly increasing
};

enum class Wrap { Clamp, Loop };

inline void validate_clip(const AnimationClip& clip) {
  if (!(clip.duration >= 0)) throw Error(ErrorCode::InvalidSpec, "clip duration is negative");
  for (std::size_t j = 0; j < clip.tracks.size(); ++j) {
    const auto& track = clip.tracks[j];
    if (track.empty())
      throw Error(ErrorCode::InvalidSpec, "track " + std::to_string(j) + " has no keys");
    for (std::size_t k = 0; k < track.size(); ++k) {
      if (track[k].time < 0 || track[k].time > clip.duration)
        throw Error(ErrorCode::InvalidSpec,
                    "track " + std::to_string(j) + " key outside [0, duration]");
      if (k > 0 && !(track[k].time > track[k - 1].time))
        throw Error(ErrorCode::InvalidSpec,
                    "track " + std::to_string(j) + " key times not strictly increasing");
    }
  }
}

namespace detail {

template <class T>
Vec3<T> lerp(const Vec3<T>& a, const Vec3<T>& b, T u) {
  return {a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u, a[2] + (b[2] - a[2]) * u};
}

// Normalized lerp along the shorter arc.
template <class T>
Quat<T> nlerp(const Quat<T>& a, Quat<T> b, T u) {
  if (a.dot(b) < T(0)) b = -b;
  const T v = T(1) - u;
  return Quat<T>{v * a.w + u * b.w, v * a.x + u * b.x, v * a.y + u * b.y, v * a.z + u * b.z}
      .normalized();
}

inline double wrap_time(double t, double duration, Wrap wrap) {
  if (duration <= 0) return 0;
  if (wrap == Wrap::Clamp) return std::clamp(t, 0.0, duration);
  double r = std::fmod(t, duration);
  if (r < 0) r += duration;
  return r;
}

inline Trs<double> sample_track(const std::vector<Keyframe>& track, double t) {
  auto hi = std::upper_bound(track.begin(), track.end(), t,
                             [](double v, const Keyframe& k) { return v < k.time; });
  if (hi == track.begin()) return track.front().value;
  const auto lo = hi - 1;
  if (hi == track.end() || lo->time == t) return lo->value;
  const double u = (t - lo->time) / (hi->time - lo->time);
  return {lerp(lo->value.translation, hi->value.translation, u),
          nlerp(lo->value.rotation, hi->value.rotation, u),
          lerp(lo->value.scale, hi->value.scale, u)};
}

}  // namespace detail

// Channel-form local pose of the clip at time t. Key times return the stored
// key exactly.
template <class T = double>
TrsPose<T> sample_clip_trs(const AnimationClip& clip, const Skeleton& skeleton, double t,
                           Wrap wrap = Wrap::Clamp) {
  if (clip.tracks.size() != skeleton.size())
    throw Error(ErrorCode::TrackCountMismatch,
                std::to_string(clip.tracks.size()) + " tracks for " +
                    std::to_string(skeleton.size()) + " joints");
  const double tt = detail::wrap_time(t, clip.duration, wrap);
  TrsPose<T> out;
  out.reserve(clip.tracks.size());
  for (const auto& track : clip.tracks)
    out.push_back(detail::sample_track(track, tt).template cast<T>());
  return out;
}

template <class T = double>
Pose<T> sample_clip(const AnimationClip& clip, const Skeleton& skeleton, double t,
                    Wrap wrap = Wrap::Clamp) {
  const auto trs = sample_clip_trs<T>(clip, skeleton, t, wrap);
  return to_local_pose<T>(trs);
}

// Weighted blend of channel-form poses. Weights are normalized; rotations are
// sign-aligned to the first pose before averaging.
template <class T>
TrsPose<T> blend(std::span<const TrsPose<T>> poses, std::span<const T> weights) {
  if (poses.empty() || poses.size() != weights.size())
    throw Error(ErrorCode::LengthMismatch, "need one weight per pose and at least one pose");
  const std::size_t n = poses.front().size();
  for (const auto& p : poses)
    if (p.size() != n) throw Error(ErrorCode::LengthMismatch, "poses differ in joint count");
  T sum = 0;
  for (T w : weights) {
    if (w < T(0)) throw Error(ErrorCode::InvalidSpec, "negative blend weight");
    sum += w;
  }
  if (!(sum > T(0))) throw Error(ErrorCode::WeightSumZero, "blend weights sum to zero");
  if (poses.size() == 1) return poses.front();

  std::vector<T> w(weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = weights[k] / sum;

  TrsPose<T> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    Trs<T> acc{{0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0}};
    const Quat<T>& ref = poses[0][j].rotation;
    for (std::size_t k = 0; k < poses.size(); ++k) {
      const Trs<T>& src = poses[k][j];
      Quat<T> q = src.rotation;
      if (ref.dot(q) < T(0)) q = -q;
      for (int c = 0; c < 3; ++c) {
        acc.translation[c] += w[k] * src.translation[c];
        acc.scale[c] += w[k] * src.scale[c];
      }
      acc.rotation.w += w[k] * q.w;
      acc.rotation.x += w[k] * q.x;
      acc.rotation.y += w[k] * q.y;
      acc.rotation.z += w[k] * q.z;
    }
    acc.rotation = acc.rotation.normalized();
    out[j] = acc;
  }
  return out;
}

template <class T>
TrsPose<T> blend(const std::vector<TrsPose<T>>& poses, const std::vector<T>& weights) {
  return blend(std::span<const TrsPose<T>>(poses), std::span<const T>(weights));
}

// skin[i] = model[i] * inverse_bind[i]
template <class T>
Pose<T> bind_skin(const Pose<T>& model, std::span<const Transform<T>> inverse_bind) {
  if (model.space != Space::Model)
    throw Error(ErrorCode::WrongSpaceTag,
                std::string("expected model pose, got ") + to_string(model.space));
  if (model.size() != inverse_bind.size())
    throw Error(ErrorCode::LengthMismatch, "inverse bind count differs from pose length");
  Pose<T> skin;
  skin.space = Space::Skin;
  skin.transforms.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    skin.transforms.push_back(compose(model[i], inverse_bind[i]));
  return skin;
}

template <class T>
std::vector<Transform<T>> inverse_bind_from_model(const Pose<T>& bind_model) {
  std::vector<Transform<T>> out;
  out.reserve(bind_model.size());
  for (const auto& t : bind_model.transforms) out.push_back(inverse(t));
  return out;
}

}  // namespace hscan
