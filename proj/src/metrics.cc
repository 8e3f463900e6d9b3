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

#include "s2s/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "s2s/parallel.h"

namespace s2s {
namespace {

using nlohmann::json;

json PosesToJson(std::span<const Pose2> poses) {
  json arr = json::array();
  for (const Pose2& p : poses) arr.push_back({p.x, p.y, p.yaw});
  return arr;
}

Trajectory PosesFromJson(const json& arr) {
  Trajectory out;
  for (const json& p : arr) out.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  return out;
}

MetricStat Stat(std::span<const double> v) {
  MetricStat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= v.size();
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / v.size());
  return s;
}

}  // namespace

OfflineBuildResult BuildOfflineDataset(std::span<const EpisodeLog> logs, double horizon_s,
                                       const std::string& id_prefix) {
  if (!(horizon_s > 0)) throw std::invalid_argument("offline horizon must be positive");
  OfflineBuildResult result;
  for (size_t l = 0; l < logs.size(); ++l) {
    const EpisodeLog& log = logs[l];
    for (size_t a = 0; a < log.size(); ++a) {
      if (!log[a].class_map && !log[a].rgb) continue;
      if (a + 1 < static_cast<size_t>(kPastLength)) {
        ++result.skipped_history;
        continue;
      }
      size_t f = a + 1;
      while (f < log.size() && log[f].t < log[a].t + horizon_s - 1e-9) ++f;
      if (f >= log.size()) {
        ++result.skipped_future;
        continue;
      }
      const Pose2 anchor = log[a].pose;
      std::vector<Pose2> past_world, future_world;
      for (size_t i = a + 1 - kPastLength; i <= a; ++i) past_world.push_back(log[i].pose);
      for (size_t i = a; i <= f; ++i) future_world.push_back(log[i].pose);
      OfflineRecord rec;
      rec.past = EgocentricTransform(past_world, anchor);
      rec.reference = EgocentricTransform(future_world, anchor);
      rec.goal = rec.reference.back().Position();
      const double spacing = (rec.past[kPastLength - 1].Position() - rec.past[kPastLength - 2].Position()).Norm();
      if (spacing < 1e-9 || rec.goal.Norm() < 1e-9) {
        ++result.skipped_degenerate;
        continue;
      }
      char id[64];
      std::snprintf(id, sizeof(id), "%s%04zu_%05zu", id_prefix.c_str(), l, a);
      rec.id = id;
      rec.class_map = log[a].class_map;
      rec.rgb = log[a].rgb;
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

std::vector<EpisodeLog> CollectExpertLogs(Env& env, int n_episodes, uint64_t seed,
                                          const ExpertConfig& expert) {
  const EnvConfig& cfg = env.config();
  const double period = cfg.episode.action_period();
  std::vector<EpisodeLog> logs;
  for (int e = 0; e < n_episodes; ++e) {
    Observation obs = env.Reset(DeriveSeed(seed, e));
    EpisodeLog log;
    const auto& hist = env.history();
    for (size_t i = 0; i < hist.size(); ++i) {
      log.push_back({(static_cast<double>(i) - (hist.size() - 1)) * period, hist[i], {}, {}});
    }
    log.back().class_map = obs.class_map;
    log.back().rgb = obs.rgb;
    while (!env.done()) {
      const std::vector<ActionTuple> actions =
          ExpertActions(env.world(), env.state(), obs.past, env.goal_world(), cfg.horizon, cfg, expert);
      StepResult step = env.Step(actions);
      const size_t added = step.info.substeps / cfg.episode.substeps_per_action;
      const auto& h = env.history();
      for (size_t i = h.size() - added; i < h.size(); ++i) {
        log.push_back({log.back().t + period, h[i], {}, {}});
      }
      const bool aligned = step.info.substeps % cfg.episode.substeps_per_action == 0;
      if (!step.done && aligned) {
        log.back().class_map = step.observation.class_map;
        log.back().rgb = step.observation.rgb;
      }
      obs = std::move(step.observation);
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

Trajectory Resample(std::span<const Pose2> traj, int n) {
  if (traj.size() < 2 || n < 2) throw std::invalid_argument("Resample: need >= 2 points and n >= 2");
  std::vector<double> cum(traj.size(), 0.0);
  for (size_t i = 1; i < traj.size(); ++i) {
    cum[i] = cum[i - 1] + (traj[i].Position() - traj[i - 1].Position()).Norm();
  }
  const double total = cum.back();
  if (!(total > 1e-12)) throw std::invalid_argument("Resample: zero-length trajectory");
  size_t last_segment = 0;
  for (size_t i = 0; i + 1 < traj.size(); ++i) {
    if (cum[i + 1] > cum[i]) last_segment = i;
  }
  Trajectory out;
  out.reserve(n);
  size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = k == n - 1 ? total : total * k / (n - 1);
    // First segment whose end lies beyond s; corners take the outgoing leg.
    while (seg + 1 < traj.size() && !(cum[seg + 1] > s && cum[seg + 1] > cum[seg])) ++seg;
    const size_t i = seg + 1 < traj.size() ? seg : last_segment;
    const Vec2 a = traj[i].Position();
    const Vec2 b = traj[i + 1].Position();
    const double frac = std::clamp((s - cum[i]) / (cum[i + 1] - cum[i]), 0.0, 1.0);
    const Vec2 p = k == n - 1 ? traj.back().Position() : a + frac * (b - a);
    out.push_back({p.x, p.y, std::atan2(b.y - a.y, b.x - a.x)});
  }
  return out;
}

double GtMetric(std::span<const Pose2> reference, std::span<const Pose2> traj) {
  const Trajectory a = Resample(reference);
  const Trajectory b = Resample(traj);
  double sum = 0.0;
  for (int k = 0; k < kMetricSamples; ++k) sum += std::abs(WrapAngle(a[k].yaw - b[k].yaw));
  return sum / kMetricSamples;
}

double AteMetric(std::span<const Pose2> reference, std::span<const Pose2> traj) {
  const Trajectory a = Resample(reference);
  const Trajectory b = Resample(traj);
  double sum = 0.0;
  for (int k = 0; k < kMetricSamples; ++k) {
    const Vec2 d = a[k].Position() - b[k].Position();
    sum += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(sum / kMetricSamples);
}

double GtGoalMetric(Vec2 goal, std::span<const Pose2> traj) {
  if (!(goal.Norm() > 0)) throw std::invalid_argument("GtGoalMetric: zero goal");
  const double bearing = std::atan2(goal.y, goal.x);
  const Pose2 segment[2] = {{0.0, 0.0, bearing}, {goal.x, goal.y, bearing}};
  return GtMetric(segment, traj);
}

double L2Metric(Vec2 goal, std::span<const Pose2> traj) {
  if (!(goal.Norm() > 0)) throw std::invalid_argument("L2Metric: zero goal");
  if (traj.empty()) throw std::invalid_argument("L2Metric: empty trajectory");
  return (goal - traj.back().Position()).Norm() / goal.Norm();
}

MetricReport Summarize(std::vector<RecordMetrics> per_record) {
  MetricReport r;
  std::vector<double> gt, ate, gt_goal, l2;
  for (const RecordMetrics& m : per_record) {
    gt.push_back(m.gt);
    ate.push_back(m.ate);
    gt_goal.push_back(m.gt_goal);
    l2.push_back(m.l2);
  }
  r.gt = Stat(gt);
  r.ate = Stat(ate);
  r.gt_goal = Stat(gt_goal);
  r.l2 = Stat(l2);
  r.per_record = std::move(per_record);
  return r;
}

SeedSummary AggregateSeeds(std::span<const MetricReport> reports) {
  SeedSummary s;
  s.seeds = static_cast<int>(reports.size());
  if (reports.empty()) return s;
  s.records = static_cast<int>(reports.front().per_record.size());
  std::vector<double> gt, ate, gt_goal, l2;
  for (const MetricReport& r : reports) {
    gt.push_back(r.gt.mean);
    ate.push_back(r.ate.mean);
    gt_goal.push_back(r.gt_goal.mean);
    l2.push_back(r.l2.mean);
  }
  s.gt = Stat(gt);
  s.ate = Stat(ate);
  s.gt_goal = Stat(gt_goal);
  s.l2 = Stat(l2);
  return s;
}

Trajectory PolicyTrajectoryModel::Predict(const OfflineRecord& record, const ClassMap& class_map,
                                          uint64_t seed) const {
  Observation obs;
  obs.class_map = class_map;
  obs.past = record.past;
  obs.achieved = {0.0, 0.0};
  obs.goal = record.goal;
  Rng rng(seed);
  const std::vector<ActionTuple> actions = policy_.Act(obs, rng);
  return GetTraj(static_cast<int>(actions.size()) + 1, record.past, actions, rollout_);
}

SubprocessTranslator::SubprocessTranslator(std::string command, std::filesystem::path work_dir)
    : command_(std::move(command)), work_dir_(std::move(work_dir)) {
  if (command_.empty()) throw std::invalid_argument("translator command is empty");
}

std::vector<ClassMap> SubprocessTranslator::Translate(std::span<const Image> rgb) const {
  std::filesystem::create_directories(work_dir_);
  const auto list = work_dir_ / "translate_in.txt";
  const auto reply = work_dir_ / "translate_out.txt";
  {
    std::ofstream out(list);
    for (size_t i = 0; i < rgb.size(); ++i) {
      const auto path = work_dir_ / ("translate_" + std::to_string(i) + "_rgb.png");
      WritePng(path, rgb[i]);
      out << std::filesystem::absolute(path).string() << '\n';
    }
    if (!out) throw std::runtime_error("cannot write translation request");
  }
  const std::string cmd = command_ + " < '" + list.string() + "' > '" + reply.string() + "'";
  if (std::system(cmd.c_str()) != 0) {
    throw std::runtime_error("translation command failed: " + command_);
  }
  std::ifstream in(reply);
  std::vector<ClassMap> maps;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Image img = ReadPng(line);
    maps.push_back(img.channels == 1 ? ClassMapFromGray(img) : ClassMapFromColors(img));
  }
  if (maps.size() != rgb.size()) {
    throw std::runtime_error("translation command returned " + std::to_string(maps.size()) +
                             " maps for " + std::to_string(rgb.size()) + " images");
  }
  return maps;
}

MetricReport EvaluateOffline(const TrajectoryModel& model, std::span<const OfflineRecord> dataset,
                             uint64_t seed, const SubprocessTranslator* translator, int threads) {
  if (dataset.empty()) throw std::invalid_argument("EvaluateOffline: empty dataset");
  std::vector<const ClassMap*> maps(dataset.size(), nullptr);
  std::vector<ClassMap> translated;
  std::vector<size_t> to_translate;
  for (size_t i = 0; i < dataset.size(); ++i) {
    if (translator && dataset[i].rgb) {
      to_translate.push_back(i);
    } else if (dataset[i].class_map) {
      maps[i] = &*dataset[i].class_map;
    } else {
      throw std::invalid_argument("record " + dataset[i].id +
                                  " has only an RGB observation; a translation model is required");
    }
  }
  if (!to_translate.empty()) {
    std::vector<Image> images;
    for (size_t i : to_translate) images.push_back(*dataset[i].rgb);
    translated = translator->Translate(images);
    for (size_t j = 0; j < to_translate.size(); ++j) maps[to_translate[j]] = &translated[j];
  }
  std::vector<RecordMetrics> per_record(dataset.size());
  ParallelFor(
      dataset.size(),
      [&](size_t i, int) {
        const OfflineRecord& rec = dataset[i];
        const Trajectory traj = model.Predict(rec, *maps[i], DeriveSeed(seed, i));
        RecordMetrics& m = per_record[i];
        m.gt = GtMetric(rec.reference, traj);
        m.ate = AteMetric(rec.reference, traj);
        m.gt_goal = GtGoalMetric(rec.goal, traj);
        m.l2 = L2Metric(rec.goal, traj);
      },
      threads);
  return Summarize(std::move(per_record));
}

void WriteOfflineDataset(const std::filesystem::path& dir, std::span<const OfflineRecord> records) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "records.jsonl");
  if (!out) throw std::runtime_error("cannot write " + (dir / "records.jsonl").string());
  for (const OfflineRecord& r : records) {
    json j;
    j["id"] = r.id;
    j["goal"] = {r.goal.x, r.goal.y};
    j["past"] = PosesToJson(r.past);
    j["reference"] = PosesToJson(r.reference);
    j["obs"] = nullptr;
    j["rgb"] = nullptr;
    if (r.class_map) {
      j["obs"] = r.id + "_seg.png";
      WritePng(dir / (r.id + "_seg.png"), ClassMapToGray(*r.class_map));
    }
    if (r.rgb) {
      j["rgb"] = r.id + "_rgb.png";
      WritePng(dir / (r.id + "_rgb.png"), *r.rgb);
    }
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + (dir / "records.jsonl").string());
}

std::vector<OfflineRecord> ReadOfflineDataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "records.jsonl");
  if (!in) throw std::runtime_error("cannot open " + (dir / "records.jsonl").string());
  std::vector<OfflineRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    OfflineRecord r;
    r.id = j.at("id").get<std::string>();
    r.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
    r.past = PosesFromJson(j.at("past"));
    r.reference = PosesFromJson(j.at("reference"));
    if (r.past.size() != static_cast<size_t>(kPastLength) || r.reference.size() < 2) {
      throw std::runtime_error("record " + r.id + ": malformed trajectories");
    }
    if (!j.at("obs").is_null()) r.class_map = ClassMapFromGray(ReadPng(dir / j["obs"].get<std::string>()));
    if (!j.at("rgb").is_null()) r.rgb = ReadPng(dir / j["rgb"].get<std::string>());
    records.push_back(std::move(r));
  }
  return records;
}

void WriteReportCsv(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "method,dataset,seeds,records,GT,GT_std,ATE,ATE_std,GT_G,GT_G_std,L2,L2_std\n";
  char buf[512];
  for (const ReportRow& r : rows) {
    const SeedSummary& s = r.summary;
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.method.c_str(), r.dataset.c_str(), s.seeds, s.records, s.gt.mean, s.gt.std,
                  s.ate.mean, s.ate.std, s.gt_goal.mean, s.gt_goal.std, s.l2.mean, s.l2.std);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string FormatReportTable(std::span<const ReportRow> rows) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-18s %-14s %-15s %-15s %-15s %-15s\n", "Method", "Dataset", "GT",
                "ATE", "GT_G", "L2");
  os << buf;
  for (const ReportRow& r : rows) {
    const SeedSummary& s = r.summary;
    auto cell = [](const MetricStat& m) {
      char c[32];
      std::snprintf(c, sizeof(c), "%.3f +- %.3f", m.mean, m.std);
      return std::string(c);
    };
    std::snprintf(buf, sizeof(buf), "%-18s %-14s %-15s %-15s %-15s %-15s\n", r.method.c_str(),
                  r.dataset.c_str(), cell(s.gt).c_str(), cell(s.ate).c_str(),
                  cell(s.gt_goal).c_str(), cell(s.l2).c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace s2s
