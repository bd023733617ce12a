#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slv/records.hpp"

namespace slv::synth {

struct SynthSpec {
  std::size_t scenes = 20;
  std::size_t objects = 2;  // planted objects per scene
  std::size_t classes = 5;
  std::size_t min_width = 400, max_width = 560;
  std::size_t min_height = 300, max_height = 420;
  double noise = 0.06;             // relative jitter of object proposals
  std::size_t proposals_per_object = 80;
  std::size_t clutter = 200;       // background proposals per scene
  double clutter_score = 0.03;     // clutter class scores are uniform in [0, this)
  std::uint64_t seed = 1;
  bool full = false;               // also emit logits, branch scores, deltas, features
};

/// Deterministic scenes: planted ground-truth boxes, proposals jittered
/// around them scored by their overlap with the planted box, plus uniformly
/// placed low-score clutter. Identical specs give identical scenes.
std::vector<io::Scene> generate(const SynthSpec& spec);

}  // namespace slv::synth
