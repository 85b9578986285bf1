#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hscan/error.hpp"
#include "hscan/io.hpp"
#include "hscan/pose.hpp"
#include "hscan/skeleton.hpp"

// Seeded skeleton and clip generation. Output depends only on the spec and
// seed, never on platform distribution implementations.

namespace hscan::corpus {

enum class Generator { Chain, RandomTree, CharacterLike };
enum class Precision { Single, Double };

constexpr std::string_view to_string(Generator g) noexcept {
  switch (g) {
    case Generator::Chain: return "chain";
    case Generator::RandomTree: return "random_tree";
    case Generator::CharacterLike: return "character_like";
  }
  return "?";
}

constexpr std::string_view to_string(Precision p) noexcept {
  return p == Precision::Single ? "single" : "double";
}

inline std::optional<Generator> parse_generator(std::string_view s) {
  for (Generator g : {Generator::Chain, Generator::RandomTree, Generator::CharacterLike})
    if (to_string(g) == s) return g;
  return std::nullopt;
}

inline std::optional<Precision> parse_precision(std::string_view s) {
  if (s == "single") return Precision::Single;
  if (s == "double") return Precision::Double;
  return std::nullopt;
}

struct CorpusSpec {
  Generator generator = Generator::RandomTree;
  std::size_t joints_per_skeleton = 300;
  std::size_t target_depth = 120;  // chains use joints - 1
  std::size_t skeleton_count = 1;
  std::uint64_t seed = 0;
  Precision precision = Precision::Double;
};

// Fixed humanoid core: pelvis, spine, neck/head, two five-fingered arms,
// two legs. 53 joints, deepest finger tip at depth 11.
inline std::vector<OptJoint> humanoid_core(std::vector<std::string>* names = nullptr) {
  std::vector<OptJoint> p;
  std::vector<std::string> nm;
  auto add = [&](OptJoint parent, std::string name) {
    p.push_back(parent);
    nm.push_back(std::move(name));
    return static_cast<JointIndex>(p.size() - 1);
  };
  const JointIndex pelvis = add(std::nullopt, "pelvis");
  JointIndex spine = pelvis;
  for (int k = 1; k <= 3; ++k) spine = add(spine, "spine_" + std::to_string(k));
  const JointIndex chest = add(spine, "chest");
  const JointIndex neck = add(chest, "neck");
  add(neck, "head");
  for (const char* side : {"l", "r"}) {
    const std::string s = side;
    const JointIndex clav = add(chest, s + "_clavicle");
    const JointIndex upper = add(clav, s + "_upper_arm");
    const JointIndex fore = add(upper, s + "_forearm");
    const JointIndex hand = add(fore, s + "_hand");
    for (const char* finger : {"thumb", "index", "middle", "ring", "pinky"}) {
      JointIndex j = hand;
      for (int k = 1; k <= 3; ++k) j = add(j, s + "_" + finger + "_" + std::to_string(k));
    }
  }
  for (const char* side : {"l", "r"}) {
    const std::string s = side;
    const JointIndex thigh = add(pelvis, s + "_thigh");
    const JointIndex shin = add(thigh, s + "_shin");
    const JointIndex foot = add(shin, s + "_foot");
    add(foot, s + "_toe");
  }
  if (names) *names = std::move(nm);
  return p;
}

inline constexpr std::size_t kHumanoidCoreJoints = 53;
inline constexpr std::size_t kHumanoidCoreDepth = 11;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  template <class It>
  void shuffle(It first, It last) {
    for (auto n = last - first; n > 1; --n) std::iter_swap(first + (n - 1), first + below(n));
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline void validate(const CorpusSpec& spec) {
  const auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); };
  if (spec.joints_per_skeleton == 0) bad("joints_per_skeleton must be positive");
  if (spec.skeleton_count == 0) bad("skeleton_count must be positive");
  switch (spec.generator) {
    case Generator::Chain:
      if (spec.target_depth != 0 && spec.target_depth != spec.joints_per_skeleton - 1)
        bad("a chain of " + std::to_string(spec.joints_per_skeleton) + " joints has depth " +
            std::to_string(spec.joints_per_skeleton - 1));
      break;
    case Generator::RandomTree:
      if (spec.target_depth >= spec.joints_per_skeleton)
        bad("target_depth must be below joints_per_skeleton");
      break;
    case Generator::CharacterLike:
      if (spec.target_depth < kHumanoidCoreDepth)
        bad("character_like needs target_depth >= " + std::to_string(kHumanoidCoreDepth));
      if (spec.joints_per_skeleton < kHumanoidCoreJoints + spec.target_depth)
        bad("character_like needs at least " +
            std::to_string(kHumanoidCoreJoints + spec.target_depth) + " joints for depth " +
            std::to_string(spec.target_depth));
      break;
  }
}

namespace detail {

inline Skeleton relabel_and_reindex(const std::vector<OptJoint>& parents,
                                    const std::vector<std::string>& names, Rng* shuffle_rng) {
  const std::size_t n = parents.size();
  std::vector<JointIndex> label(n);
  for (JointIndex i = 0; i < n; ++i) label[i] = i;
  if (shuffle_rng) shuffle_rng->shuffle(label.begin(), label.end());
  std::vector<OptJoint> shuffled(n);
  std::vector<std::string> shuffled_names(names.empty() ? 0 : n);
  for (JointIndex i = 0; i < n; ++i) {
    if (parents[i]) shuffled[label[i]] = label[*parents[i]];
    if (!names.empty()) shuffled_names[label[i]] = names[i];
  }
  return reindex_topological(shuffled, shuffled_names).skeleton;
}

}  // namespace detail

// A path of target_depth + 1 joints, the rest attached uniformly to joints
// shallower than target_depth, then relabelled and laid out in preorder.
// Max depth is exactly target_depth.
inline Skeleton random_tree(std::size_t joints, std::size_t target_depth, Rng& rng) {
  std::vector<OptJoint> parents;
  std::vector<std::uint32_t> depth;
  std::vector<JointIndex> attachable;
  for (std::size_t d = 0; d <= target_depth; ++d) {
    parents.push_back(d == 0 ? OptJoint{} : OptJoint{static_cast<JointIndex>(d - 1)});
    depth.push_back(static_cast<std::uint32_t>(d));
    if (d < target_depth) attachable.push_back(static_cast<JointIndex>(d));
  }
  while (parents.size() < joints) {
    const JointIndex at = attachable[rng.below(attachable.size())];
    const auto id = static_cast<JointIndex>(parents.size());
    parents.push_back(at);
    depth.push_back(depth[at] + 1);
    if (depth[id] < target_depth) attachable.push_back(id);
  }
  return detail::relabel_and_reindex(parents, {}, &rng);
}

// Humanoid core plus a tail reaching target_depth and cloth strands (chains
// of 4-16 joints) hanging from core joints.
inline Skeleton character_like(std::size_t joints, std::size_t target_depth, Rng& rng) {
  std::vector<std::string> names;
  std::vector<OptJoint> parents = humanoid_core(&names);
  const auto core_depths = compute_depths(build_skeleton(parents)).depth;

  OptJoint prev = 0;
  for (std::size_t k = 1; k <= target_depth && parents.size() < joints; ++k) {
    parents.push_back(prev);
    names.push_back("tail_" + std::to_string(k));
    prev = static_cast<JointIndex>(parents.size() - 1);
  }
  for (std::size_t strand = 0; parents.size() < joints; ++strand) {
    const auto at = static_cast<JointIndex>(rng.below(kHumanoidCoreJoints));
    const std::size_t room = target_depth - core_depths[at];
    const std::size_t len =
        std::min({4 + rng.below(13), room, joints - parents.size()});
    prev = at;
    for (std::size_t k = 1; k <= len; ++k) {
      parents.push_back(prev);
      names.push_back("cloth_" + std::to_string(strand) + "_" + std::to_string(k));
      prev = static_cast<JointIndex>(parents.size() - 1);
    }
  }
  return detail::relabel_and_reindex(parents, names, nullptr);
}

inline Skeleton chain(std::size_t joints) {
  std::vector<OptJoint> parents(joints);
  for (std::size_t i = 1; i < joints; ++i) parents[i] = static_cast<JointIndex>(i - 1);
  return build_skeleton(std::move(parents));
}

inline constexpr double kClipDuration = 1.0;
inline constexpr int kKeysPerTrack = 4;

// Conditioned so long chains stay well-behaved: rotations of any angle,
// per-axis scale in [0.9, 1.1], translations with |component| <= 1.
inline AnimationClip random_clip(const Skeleton& s, Rng& rng) {
  AnimationClip clip;
  clip.duration = kClipDuration;
  clip.tracks.resize(s.size());
  for (auto& track : clip.tracks) {
    for (int k = 0; k < kKeysPerTrack; ++k) {
      Keyframe key;
      key.time = kClipDuration * k / (kKeysPerTrack - 1);
      for (auto& c : key.value.translation) c = rng.uniform(-1.0, 1.0);
      for (auto& c : key.value.scale) c = rng.uniform(0.9, 1.1);
      double ax, ay, az;
      do {
        ax = rng.uniform(-1.0, 1.0);
        ay = rng.uniform(-1.0, 1.0);
        az = rng.uniform(-1.0, 1.0);
      } while (ax * ax + ay * ay + az * az < 1e-2);
      key.value.rotation =
          Quat<double>::from_axis_angle(ax, ay, az, rng.uniform(-std::numbers::pi, std::numbers::pi));
      track.push_back(key);
    }
  }
  return clip;
}

struct Entry {
  std::string name;
  Skeleton skeleton;
  AnimationClip clip;
};

inline Entry generate_entry(const CorpusSpec& spec, std::size_t index) {
  validate(spec);
  Rng rng(splitmix64(spec.seed ^ splitmix64(index)));
  Entry e;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  e.name = std::string("skeleton_") + buf;
  switch (spec.generator) {
    case Generator::Chain: e.skeleton = chain(spec.joints_per_skeleton); break;
    case Generator::RandomTree:
      e.skeleton = random_tree(spec.joints_per_skeleton, spec.target_depth, rng);
      break;
    case Generator::CharacterLike:
      e.skeleton = character_like(spec.joints_per_skeleton, spec.target_depth, rng);
      break;
  }
  e.clip = random_clip(e.skeleton, rng);
  return e;
}

inline std::vector<Entry> generate(const CorpusSpec& spec) {
  validate(spec);
  std::vector<Entry> out;
  out.reserve(spec.skeleton_count);
  for (std::size_t i = 0; i < spec.skeleton_count; ++i) out.push_back(generate_entry(spec, i));
  return out;
}

inline io::json spec_to_json(const CorpusSpec& spec) {
  return io::json{{"generator", to_string(spec.generator)},
                  {"joints_per_skeleton", spec.joints_per_skeleton},
                  {"target_depth", spec.target_depth},
                  {"skeleton_count", spec.skeleton_count},
                  {"seed", spec.seed},
                  {"precision", to_string(spec.precision)}};
}

inline std::string skeleton_file(const std::string& name) { return name + ".json"; }
inline std::string clip_file(const std::string& name) {
  return "clip" + name.substr(name.find('_')) + ".json";
}

// Writes <name>.json and clip_<index>.json per entry plus corpus.json listing them.
inline void write(const std::filesystem::path& dir, const CorpusSpec& spec,
                  const std::vector<Entry>& entries) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  io::json files = io::json::array();
  for (const auto& e : entries) {
    io::write_text_file(dir / skeleton_file(e.name), io::skeleton_to_json(e.skeleton).dump(1) + "\n");
    io::write_text_file(dir / clip_file(e.name), io::clip_to_json(e.clip).dump() + "\n");
    files.push_back({{"skeleton", skeleton_file(e.name)}, {"clip", clip_file(e.name)}});
  }
  io::json manifest{{"spec", spec_to_json(spec)}, {"entries", std::move(files)}};
  io::write_text_file(dir / "corpus.json", manifest.dump(1) + "\n");
}

struct LoadedEntry {
  Entry entry;
  bool reindexed = false;
};

// Reads the corpus.json manifest. Errors name the offending file.
inline std::vector<LoadedEntry> load(const std::filesystem::path& dir) {
  const auto manifest = io::read_json_file(dir / "corpus.json");
  if (!manifest.contains("entries") || !manifest["entries"].is_array())
    throw Error(ErrorCode::InvalidSpec, (dir / "corpus.json").string() + ": no entries");
  std::vector<LoadedEntry> out;
  for (const auto& item : manifest["entries"]) {
    const auto sk_path = dir / item.at("skeleton").get<std::string>();
    const auto clip_path = dir / item.at("clip").get<std::string>();
    LoadedEntry le;
    try {
      auto loaded = io::skeleton_from_json(io::read_json_file(sk_path));
      le.entry.name = sk_path.stem().string();
      le.entry.clip = io::permute_clip(io::clip_from_json(io::read_json_file(clip_path)),
                                       loaded.permutation);
      le.entry.skeleton = std::move(loaded.skeleton);
      le.reindexed = loaded.reindexed;
    } catch (const Error& e) {
      throw Error(e.code(), sk_path.filename().string() + ": " + e.what());
    }
    out.push_back(std::move(le));
  }
  return out;
}

}  // namespace hscan::corpus
