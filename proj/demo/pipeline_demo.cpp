// Sample a clip, scan it to model space with the compressed algorithm and
// bind it against the t = 0 pose. Prints the counters and one skin matrix.

#include <cstdio>

#include "hscan/hscan.hpp"

int main() {
  using namespace hscan;

  corpus::Rng rng(42);
  const Skeleton skeleton = corpus::character_like(300, 120, rng);
  const AnimationClip clip = corpus::random_clip(skeleton, rng);
  const ScanTables tables = build_scan_tables(skeleton);

  const auto bind_local = sample_clip(clip, skeleton, 0.0);
  const auto inverse_bind = inverse_bind_from_model(oracle_scan(skeleton, bind_local).model_pose);

  // Blend two sampled poses before converting channels to matrices.
  const std::vector<TrsPose<double>> poses = {sample_clip_trs(clip, skeleton, 0.25),
                                              sample_clip_trs(clip, skeleton, 0.75)};
  const auto blended = blend(poses, std::vector<double>{0.3, 0.7});
  const auto local = to_local_pose<double>(blended);

  const auto result = compressed_scan(skeleton, tables.layout, local);
  const auto skin = bind_skin(result.model_pose, std::span<const Transform<double>>(inverse_bind));

  const auto& s = result.stats;
  std::printf("joints %zu, max depth %u\n", skeleton.size(), compute_depths(skeleton).max_depth);
  std::printf("max_mults %llu  total_mults %llu  global %llu  group %llu\n",
              static_cast<unsigned long long>(s.max_mults),
              static_cast<unsigned long long>(s.total_mults),
              static_cast<unsigned long long>(s.global_barriers),
              static_cast<unsigned long long>(s.group_barriers));
  const auto& last = skin[skin.size() - 1];
  for (int r = 0; r < 4; ++r)
    std::printf("  [% .5f % .5f % .5f % .5f]\n", last(r, 0), last(r, 1), last(r, 2), last(r, 3));
  return 0;
}
