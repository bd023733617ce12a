#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slv/mil_losses.hpp"
#include "slv/records.hpp"
#include "slv/synth.hpp"
#include "slv/voting.hpp"

namespace slv::cli {

/// Seed used when no --seed is given: $SLV_SEED if set and numeric, else 1.
std::uint64_t default_seed();

enum class Method { Adaptive, Threshold };

struct VoteOptions {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output = "-";
  SearchParams params;
  Method method = Method::Adaptive;
  double tau = 0.5;
  std::optional<std::filesystem::path> emit_maps;
  std::size_t jobs = 1;
  bool strict = false;
};

/// Pseudo boxes for one scene, plus the raw per-class maps when requested.
Supervision vote_scene(const io::Scene& scene, const VoteOptions& opts,
                       std::vector<std::pair<int, LikelihoodMap>>* maps = nullptr);

int run_vote(const VoteOptions& opts, std::ostream& out, std::ostream& err);

enum class Metric { Map50, Map, CorLoc };

struct EvalOptions {
  std::filesystem::path detections;
  std::filesystem::path ground_truth;
  Metric metric = Metric::Map50;
  bool json = false;
  std::optional<std::filesystem::path> classes;
  std::optional<std::size_t> num_classes;
};

int run_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

/// A loss component was requested but the scene lacks a field it needs.
class MissingField : public std::runtime_error {
 public:
  MissingField(const std::string& field, const std::string& component)
      : std::runtime_error("missing field '" + field + "' required by " + component),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct LossRequest {
  bool mil = true;
  bool refine = true;
  bool slv = true;
  bool distill = true;
  SearchParams params;
  double iou_fg = 0.5;
};

/// Every requested loss of one scene; unrequested components stay 0.
LossComponents compute_losses(const io::Scene& scene, const LossRequest& request);

struct LossesOptions {
  std::filesystem::path input;
  LossRequest request;
  Schedule schedule{40000, 80000};
  bool json = false;
};

int run_losses(const LossesOptions& opts, std::ostream& out, std::ostream& err);

struct SynthOptions {
  synth::SynthSpec spec;
  std::filesystem::path output = "-";
  std::optional<std::filesystem::path> gt_output;
};

int run_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

struct BenchOptions {
  std::size_t workloads = 5;
  std::size_t boxes = 2000;
  std::size_t width = 800;
  std::size_t height = 600;
  std::uint64_t seed = 1;
};

int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace slv::cli
