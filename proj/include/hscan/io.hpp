#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hscan/error.hpp"
#include "hscan/exec.hpp"
#include "hscan/pose.hpp"
#include "hscan/skeleton.hpp"

namespace hscan::io {

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---- skeleton ------------------------------------------------------------

inline json skeleton_to_json(const Skeleton& s) {
  json joints = json::array();
  for (JointIndex i = 0; i < s.size(); ++i) {
    json j;
    j["name"] = s.has_names() ? s.names()[i] : "joint_" + std::to_string(i);
    j["parent"] = s.parent(i) ? json(*s.parent(i)) : json(nullptr);
    joints.push_back(std::move(j));
  }
  return json{{"joints", std::move(joints)}};
}

struct LoadedSkeleton {
  Skeleton skeleton;
  std::vector<JointIndex> permutation;  // file index -> skeleton index
  bool reindexed = false;
};

// Accepts joints in any order; out-of-order files are reindexed and the
// permutation is kept so per-joint data (clip tracks) can follow.
inline LoadedSkeleton skeleton_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("joints") || !doc["joints"].is_array())
    throw Error(ErrorCode::InvalidSpec, "skeleton document needs a \"joints\" array");
  std::vector<OptJoint> parents;
  std::vector<std::string> names;
  for (const auto& j : doc["joints"]) {
    if (!j.is_object() || !j.contains("parent"))
      throw Error(ErrorCode::InvalidSpec, "joint entry needs a \"parent\" field");
    const auto& p = j["parent"];
    if (p.is_null())
      parents.emplace_back();
    else if (p.is_number_integer() && p.get<long long>() >= 0)
      parents.emplace_back(static_cast<JointIndex>(p.get<long long>()));
    else
      throw Error(ErrorCode::InvalidSpec, "parent must be a non-negative integer or null");
    names.push_back(j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                                : std::string{});
  }
  detail::check_range(parents);
  bool ordered = true;
  for (std::size_t i = 0; i < parents.size(); ++i)
    if (parents[i] && *parents[i] >= i) ordered = false;

  LoadedSkeleton out;
  if (ordered) {
    out.skeleton = build_skeleton(std::move(parents), std::move(names));
    out.permutation.resize(out.skeleton.size());
    for (JointIndex i = 0; i < out.permutation.size(); ++i) out.permutation[i] = i;
  } else {
    auto r = reindex_topological(parents, names);
    out.skeleton = std::move(r.skeleton);
    out.permutation = std::move(r.permutation);
    out.reindexed = true;
  }
  return out;
}

// ---- clip ----------------------------------------------------------------

namespace detail {

inline json vec3(const Vec3<double>& v) { return json::array({v[0], v[1], v[2]}); }

inline Vec3<double> read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::InvalidSpec, std::string(what) + " must have 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline json clip_to_json(const AnimationClip& clip) {
  json tracks = json::array();
  for (const auto& track : clip.tracks) {
    json keys = json::array();
    for (const auto& k : track) {
      const auto& q = k.value.rotation;
      keys.push_back({{"t", k.time},
                      {"pos", detail::vec3(k.value.translation)},
                      {"rot", json::array({q.w, q.x, q.y, q.z})},
                      {"scale", detail::vec3(k.value.scale)}});
    }
    tracks.push_back(std::move(keys));
  }
  return json{{"duration", clip.duration}, {"tracks", std::move(tracks)}};
}

inline AnimationClip clip_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("duration") || !doc.contains("tracks") ||
      !doc["tracks"].is_array())
    throw Error(ErrorCode::InvalidSpec, "clip document needs \"duration\" and \"tracks\"");
  AnimationClip clip;
  try {
    clip.duration = doc["duration"].get<double>();
    for (const auto& track : doc["tracks"]) {
      auto& keys = clip.tracks.emplace_back();
      for (const auto& k : track) {
        Keyframe key;
        key.time = k.at("t").get<double>();
        if (k.contains("pos")) key.value.translation = detail::read_vec3(k["pos"], "pos");
        if (k.contains("scale")) key.value.scale = detail::read_vec3(k["scale"], "scale");
        if (k.contains("rot")) {
          const auto& r = k["rot"];
          if (!r.is_array() || r.size() != 4)
            throw Error(ErrorCode::InvalidSpec, "rot must have 4 numbers");
          key.value.rotation = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                r[3].get<double>()};
        }
        keys.push_back(key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed clip: ") + e.what());
  }
  validate_clip(clip);
  return clip;
}

// Reorders tracks from file order to skeleton order.
inline AnimationClip permute_clip(const AnimationClip& clip,
                                  const std::vector<JointIndex>& permutation) {
  if (clip.tracks.size() != permutation.size())
    throw Error(ErrorCode::TrackCountMismatch, "clip track count differs from skeleton");
  AnimationClip out;
  out.duration = clip.duration;
  out.tracks.resize(clip.tracks.size());
  for (std::size_t old = 0; old < permutation.size(); ++old)
    out.tracks[permutation[old]] = clip.tracks[old];
  return out;
}

// ---- transforms and stats ------------------------------------------------

template <class T>
json transform_to_json(const Transform<T>& t) {
  json a = json::array();
  for (T v : t.m) a.push_back(static_cast<double>(v));
  return a;
}

inline json stats_to_json(const exec::ExecStats& s) {
  json hist = json::object();
  for (const auto& [mults, count] : s.histogram()) hist[std::to_string(mults)] = count;
  return json{{"max_mults", s.max_mults},
              {"total_mults", s.total_mults},
              {"global_barriers", s.global_barriers},
              {"group_barriers", s.group_barriers},
              {"phases", s.phases},
              {"per_thread_hist", std::move(hist)}};
}

}  // namespace hscan::io
