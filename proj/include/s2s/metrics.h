// Copyright 2026 The s2s-offroad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef S2S_METRICS_H_
#define S2S_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2s/common.h"
#include "s2s/env.h"
#include "s2s/image.h"
#include "s2s/learner.h"
#include "s2s/render.h"
#include "s2s/vehicle.h"

namespace s2s {

inline constexpr int kMetricSamples = 10;
inline constexpr double kDefaultOfflineHorizon = 3.0;  // s

// One logged sample: odometry every tick, an observation on some ticks.
struct LogSample {
  double t = 0.0;  // s
  Pose2 pose;
  std::optional<ClassMap> class_map;
  std::optional<Image> rgb;
};
using EpisodeLog = std::vector<LogSample>;

struct OfflineRecord {
  std::string id;
  std::optional<ClassMap> class_map;
  std::optional<Image> rgb;
  Vec2 goal;            // egocentric
  Trajectory past;      // kPastLength egocentric points ending at the origin
  Trajectory reference; // egocentric, starts at the origin
};

struct OfflineBuildResult {
  std::vector<OfflineRecord> records;
  int skipped_history = 0;     // fewer than kPastLength past samples
  int skipped_future = 0;      // less than horizon of future data
  int skipped_degenerate = 0;  // zero spacing between the last two past points
};

// Anchors are samples carrying an observation. Each record's goal is the
// reference trajectory's endpoint at `horizon_s`.
OfflineBuildResult BuildOfflineDataset(std::span<const EpisodeLog> logs,
                                       double horizon_s = kDefaultOfflineHorizon,
                                       const std::string& id_prefix = "rec");

// Drives the privileged expert through `n_episodes` env episodes and logs
// odometry every action period and class maps at every decision.
std::vector<EpisodeLog> CollectExpertLogs(Env& env, int n_episodes, uint64_t seed,
                                          const ExpertConfig& expert = {});

// n points evenly spaced by arc length, endpoints included. Each heading is
// the direction of the segment the point lies on. Throws
// std::invalid_argument for zero length, fewer than 2 points, or n < 2.
Trajectory Resample(std::span<const Pose2> traj, int n = kMetricSamples);

double GtMetric(std::span<const Pose2> reference, std::span<const Pose2> traj);
double AteMetric(std::span<const Pose2> reference, std::span<const Pose2> traj);
double GtGoalMetric(Vec2 goal, std::span<const Pose2> traj);
double L2Metric(Vec2 goal, std::span<const Pose2> traj);

struct RecordMetrics {
  double gt = 0.0;
  double ate = 0.0;
  double gt_goal = 0.0;
  double l2 = 0.0;
};

struct MetricStat {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct MetricReport {
  std::vector<RecordMetrics> per_record;
  MetricStat gt, ate, gt_goal, l2;
};

MetricReport Summarize(std::vector<RecordMetrics> per_record);

// Mean and std of the per-seed means.
struct SeedSummary {
  int seeds = 0;
  int records = 0;
  MetricStat gt, ate, gt_goal, l2;
};
SeedSummary AggregateSeeds(std::span<const MetricReport> reports);

// Produces the predicted trajectory for a record, given the class map that
// was observed (native or translated).
class TrajectoryModel {
 public:
  virtual ~TrajectoryModel() = default;
  virtual Trajectory Predict(const OfflineRecord& record, const ClassMap& class_map,
                             uint64_t seed) const = 0;
};

// featurize -> act -> get_traj(A + 1).
class PolicyTrajectoryModel : public TrajectoryModel {
 public:
  PolicyTrajectoryModel(const Policy& policy, RolloutConfig rollout)
      : policy_(policy), rollout_(rollout) {}
  Trajectory Predict(const OfflineRecord& record, const ClassMap& class_map,
                     uint64_t seed) const override;

 private:
  const Policy& policy_;
  RolloutConfig rollout_;
};

// Oracle stub that returns the record's reference trajectory.
class ReplayReferenceModel : public TrajectoryModel {
 public:
  Trajectory Predict(const OfflineRecord& record, const ClassMap&, uint64_t) const override {
    return record.reference;
  }
};

// RGB to class-map translation through an external command that reads RGB
// PNG paths on stdin (one per line) and prints class-map PNG paths.
class SubprocessTranslator {
 public:
  SubprocessTranslator(std::string command, std::filesystem::path work_dir);
  std::vector<ClassMap> Translate(std::span<const Image> rgb) const;

 private:
  std::string command_;
  std::filesystem::path work_dir_;
};

// Throws std::invalid_argument for an empty dataset or for an RGB-only
// record without a translator.
MetricReport EvaluateOffline(const TrajectoryModel& model, std::span<const OfflineRecord> dataset,
                             uint64_t seed, const SubprocessTranslator* translator = nullptr,
                             int threads = 0);

// records.jsonl plus <id>_seg.png / <id>_rgb.png sidecars.
void WriteOfflineDataset(const std::filesystem::path& dir, std::span<const OfflineRecord> records);
std::vector<OfflineRecord> ReadOfflineDataset(const std::filesystem::path& dir);

struct ReportRow {
  std::string method;
  std::string dataset;
  SeedSummary summary;
};

void WriteReportCsv(const std::filesystem::path& path, std::span<const ReportRow> rows);
std::string FormatReportTable(std::span<const ReportRow> rows);

}  // namespace s2s

#endif  // S2S_METRICS_H_
