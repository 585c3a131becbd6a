// Data-reduction stage: anisotropy quality scoring, exposure and motion
// gates, orientation dedup of local temporal neighbors, and global
// orientation-coverage pruning.

#ifndef ROOMSFM_REDUCE_HPP
#define ROOMSFM_REDUCE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "roomsfm/capsim.hpp"
#include "roomsfm/core.hpp"

namespace roomsfm {

struct ReduceConfig {
  int directions_n = 8;
  int pwd_window = 8;  // half window; sequences have 2*pwd_window+1 samples
  double renyi_alpha = 3.0;
  double aniso_keep_percentile = 50.0;
  double lum_mean_lo = 30.0;
  double lum_mean_hi = 225.0;
  double sat_frac_max = 0.05;
  double accel_dev_max = 2.0;   // m/s^2
  double jerk_max = 40.0;       // m/s^3
  int dedup_window = 5;         // frames
  double dedup_theta_min = 0.1745;  // radians, ~10 degrees
  double coverage_bin_deg = 15.0;
  int coverage_kmax = 2;

  void validate() const {
    if (directions_n < 1 || pwd_window < 1)
      throw Error(ErrorKind::InvalidArgument, "directions_n and pwd_window must be >= 1");
    if (renyi_alpha == 1.0)
      throw Error(ErrorKind::InvalidArgument, "renyi_alpha must differ from 1");
    if (aniso_keep_percentile < 0 || aniso_keep_percentile > 100)
      throw Error(ErrorKind::InvalidArgument, "percentile must lie in [0,100]");
    if (lum_mean_lo < 0 || lum_mean_hi > 255 || lum_mean_lo > lum_mean_hi)
      throw Error(ErrorKind::InvalidArgument, "luminance bounds out of range");
    if (sat_frac_max < 0 || sat_frac_max > 1)
      throw Error(ErrorKind::InvalidArgument, "sat_frac_max must lie in [0,1]");
    if (accel_dev_max < 0 || jerk_max < 0)
      throw Error(ErrorKind::InvalidArgument, "motion thresholds must be nonnegative");
    if (dedup_window < 1)
      throw Error(ErrorKind::InvalidArgument, "dedup_window must be >= 1");
    if (dedup_theta_min < 0 || coverage_bin_deg <= 0 || coverage_kmax < 1)
      throw Error(ErrorKind::InvalidArgument, "dedup/coverage parameters out of range");
  }
};

struct ReductionReport {
  std::int64_t total = 0;
  std::vector<std::int64_t> kept_ids;
  std::map<std::string, std::int64_t> dropped;  // per stage
  double reduction_ratio = 0.0;
};

// ---------------------------------------------------------------------------
// Renyi entropy

/// Order-alpha Renyi entropy of a probability vector, in bits.
inline double renyi_entropy(const std::vector<double>& p, double alpha) {
  if (alpha == 1.0)
    throw Error(ErrorKind::InvalidArgument, "renyi_entropy: alpha must differ from 1");
  double sum = 0.0, sum_pow = 0.0;
  for (double v : p) {
    if (v < 0.0)
      throw Error(ErrorKind::InvalidArgument, "renyi_entropy: negative probability");
    sum += v;
    sum_pow += std::pow(v, alpha);
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "renyi_entropy: probabilities must sum to 1");
  return std::log2(sum_pow) / (1.0 - alpha);
}

// ---------------------------------------------------------------------------
// Anisotropy score

namespace detail {

/// Renyi entropy of the normalized squared pseudo-Wigner distribution of
/// a (2M+1)-sample directional slice. The PWD of the real sequence z is
/// W(c) = sum_m z[m] z[-m] cos(4 pi m c / N); its squared magnitude,
/// normalized per anchor, is the frequency probability vector.
inline double pwd_renyi(const double* z, int half_window, double alpha) {
  const int m_max = half_window;
  const int n = 2 * half_window + 1;
  double w[64];  // n <= 64 enforced by callers via config validation
  double sum_sq = 0.0;
  for (int c = 0; c < n; ++c) {
    double acc = z[0] * z[0];
    for (int m = 1; m <= m_max; ++m)
      acc += 2.0 * z[m] * z[-m] * std::cos(4.0 * M_PI * m * c / n);
    w[c] = acc;
    sum_sq += acc * acc;
  }
  if (sum_sq <= 0.0) return 0.0;  // flat slice: delta distribution, zero entropy
  double sum_pow = 0.0;
  for (int c = 0; c < n; ++c) {
    const double p = w[c] * w[c] / sum_sq;
    sum_pow += std::pow(p, alpha);
  }
  return std::log2(sum_pow) / (1.0 - alpha);
}

}  // namespace detail

/// Directional pseudo-Wigner / Renyi-entropy anisotropy. For each of
/// directions_n orientations, 1-D pixel slices are sampled (nearest
/// neighbor) at a stride-4 anchor grid; the per-direction expected entropy
/// is averaged over anchors and the score is the population standard
/// deviation across directions. Blur and noise flatten the directional
/// entropies toward each other, driving the score to zero.
inline double anisotropy(const GrayImage& img, const ReduceConfig& cfg = {}) {
  cfg.validate();
  if (cfg.pwd_window > 31)
    throw Error(ErrorKind::InvalidArgument, "pwd_window too large");
  const int m = cfg.pwd_window;
  const int min_dim = 2 * m + 1;
  if (img.width < min_dim || img.height < min_dim)
    throw Error(ErrorKind::InvalidArgument, "image too small for anisotropy window");

  constexpr int kAnchorStride = 4;
  const int n_dirs = cfg.directions_n;

  std::vector<double> dir_entropy(n_dirs, 0.0);
  std::vector<double> slice(2 * m + 1);
  for (int d = 0; d < n_dirs; ++d) {
    const double theta = d * M_PI / n_dirs;
    const double dx = std::cos(theta), dy = std::sin(theta);
    double sum = 0.0;
    std::int64_t count = 0;
    for (int ay = m; ay <= img.height - 1 - m; ay += kAnchorStride) {
      for (int ax = m; ax <= img.width - 1 - m; ax += kAnchorStride) {
        for (int j = -m; j <= m; ++j) {
          const int sx = static_cast<int>(std::llround(ax + j * dx));
          const int sy = static_cast<int>(std::llround(ay + j * dy));
          slice[j + m] = img.at(sx, sy);
        }
        sum += detail::pwd_renyi(slice.data() + m, m, cfg.renyi_alpha);
        ++count;
      }
    }
    dir_entropy[d] = sum / static_cast<double>(count);
  }

  double mean = 0.0;
  for (double t : dir_entropy) mean += t;
  mean /= n_dirs;
  double var = 0.0;
  for (double t : dir_entropy) var += (t - mean) * (t - mean);
  var /= n_dirs;
  return std::sqrt(var);
}

// ---------------------------------------------------------------------------
// Gates

/// Luminance gate: mean within [lum_mean_lo, lum_mean_hi] and the fraction
/// of fully dark/saturated pixels at most sat_frac_max (bounds inclusive).
inline bool exposure_ok(const GrayImage& img, const ReduceConfig& cfg = {}) {
  if (img.empty())
    throw Error(ErrorKind::InvalidArgument, "exposure_ok: empty image");
  std::int64_t sum = 0, extreme = 0;
  for (std::uint8_t v : img.pixels) {
    sum += v;
    if (v == 0 || v == 255) ++extreme;
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(img.size());
  const double sat = static_cast<double>(extreme) / static_cast<double>(img.size());
  return mean >= cfg.lum_mean_lo && mean <= cfg.lum_mean_hi && sat <= cfg.sat_frac_max;
}

/// Accelerometer gate: near-gravity magnitude and bounded jerk against the
/// previous sample. Bounds inclusive.
inline bool motion_gate(const ImuSample& imu, const ImuSample* prev,
                        const ReduceConfig& cfg = {}) {
  if (std::abs(imu.accel.norm() - kGravity) > cfg.accel_dev_max) return false;
  if (prev != nullptr) {
    const double dt = (imu.t_us - prev->t_us) * 1e-6;
    if (dt <= 0.0)
      throw Error(ErrorKind::InvalidArgument, "motion_gate: non-positive time delta");
    if ((imu.accel - prev->accel).norm() / dt > cfg.jerk_max) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dedup and coverage

struct ScoredFrameRef {
  std::int64_t id = 0;
  Quaternion orient = Quaternion::identity();  // device-to-world
  double score = 0.0;
};

/// Orientation dedup over local temporal neighbors. Two frames share a
/// window when their ids (capture order) are less than dedup_window
/// apart. Frames are processed in descending score order (ties: lower id)
/// and kept only when at least dedup_theta_min away from every kept
/// neighbor. The neighbor relation lives on capture ids and keep
/// decisions depend only on kept-set geometry, so re-running on the kept
/// output drops nothing.
inline std::vector<std::int64_t> temporal_dedup(const std::vector<ScoredFrameRef>& frames,
                                                const ReduceConfig& cfg = {}) {
  const int n = static_cast<int>(frames.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frames[a].score != frames[b].score) return frames[a].score > frames[b].score;
    return frames[a].id < frames[b].id;
  });

  std::vector<bool> kept(n, false);
  for (int idx : order) {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      if (!kept[j] || j == idx) continue;
      if (std::abs(frames[idx].id - frames[j].id) >= cfg.dedup_window) continue;
      if (quat_angular_distance(frames[idx].orient, frames[j].orient) <
          cfg.dedup_theta_min)
        ok = false;
    }
    kept[idx] = ok;
  }

  std::vector<std::int64_t> out;
  for (int i = 0; i < n; ++i)
    if (kept[i]) out.push_back(frames[i].id);
  return out;
}

namespace detail {

/// Viewing direction (optical axis in world coordinates) of a frame given
/// its device-to-world orientation.
inline Vec3 view_direction(const Quaternion& orient) {
  return quat_rotate(orient, Vec3(0, 0, 1));
}

inline std::pair<int, int> coverage_bin(const Quaternion& orient, double bin_deg) {
  const Vec3 v = view_direction(orient);
  const double yaw = std::atan2(v.y(), v.x()) * 180.0 / M_PI;
  const double pitch = std::asin(std::clamp(v.z(), -1.0, 1.0)) * 180.0 / M_PI;
  return {static_cast<int>(std::floor(yaw / bin_deg)),
          static_cast<int>(std::floor(pitch / bin_deg))};
}

}  // namespace detail

/// Global coverage pruning: bin viewing directions by (yaw, pitch) cells
/// of coverage_bin_deg; per non-empty cell keep the top coverage_kmax
/// frames by score (ties: lower id).
inline std::vector<std::int64_t> coverage_prune(const std::vector<ScoredFrameRef>& frames,
                                                const ReduceConfig& cfg = {}) {
  std::map<std::pair<int, int>, std::vector<int>> bins;
  for (int i = 0; i < static_cast<int>(frames.size()); ++i)
    bins[detail::coverage_bin(frames[i].orient, cfg.coverage_bin_deg)].push_back(i);

  std::vector<std::int64_t> out;
  for (auto& [bin, members] : bins) {
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      if (frames[a].score != frames[b].score) return frames[a].score > frames[b].score;
      return frames[a].id < frames[b].id;
    });
    for (int i = 0; i < std::min<int>(cfg.coverage_kmax, members.size()); ++i)
      out.push_back(frames[members[i]].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Full reduction pipeline

namespace detail {

inline std::vector<double> score_frames(const std::vector<const GrayImage*>& images,
                                        const ReduceConfig& cfg, int threads) {
  std::vector<double> scores(images.size(), 0.0);
  if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(images.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < images.size(); ++i)
      scores[i] = anisotropy(*images[i], cfg);
    return scores;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < images.size(); i += threads)
        scores[i] = anisotropy(*images[i], cfg);
    });
  for (auto& th : pool) th.join();
  return scores;
}

// Nearest-rank percentile (inclusive threshold).
inline double percentile_threshold(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  if (values.empty()) return 0.0;
  if (pct <= 0.0) return values.front();
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  return values[std::min(values.size() - 1, std::max<std::size_t>(1, rank) - 1)];
}

}  // namespace detail

/// Runs the reduction stages in order: exposure gate, motion gate,
/// anisotropy percentile, temporal dedup, coverage prune. Scoring may use
/// multiple threads; results are merged by frame order and do not depend
/// on the thread count.
inline std::pair<std::vector<Frame>, ReductionReport> reduce_stream(
    const CaptureStream& stream, const ReduceConfig& cfg = {}, int threads = 1) {
  cfg.validate();
  ReductionReport report;
  report.total = static_cast<std::int64_t>(stream.frames.size());
  for (const char* stage : {"exposure", "motion", "anisotropy", "temporal_dedup", "coverage"})
    report.dropped[stage] = 0;
  if (stream.frames.empty()) {
    report.reduction_ratio = 0.0;
    return {{}, report};
  }

  // stage 1: exposure
  std::vector<int> alive;
  for (int i = 0; i < static_cast<int>(stream.frames.size()); ++i) {
    if (exposure_ok(stream.frames[i].image, cfg))
      alive.push_back(i);
    else
      ++report.dropped["exposure"];
  }

  // stage 2: motion (previous sample = temporal predecessor in the stream)
  {
    std::vector<int> next;
    for (int i : alive) {
      const ImuSample* prev = i > 0 ? &stream.frames[i - 1].imu : nullptr;
      if (motion_gate(stream.frames[i].imu, prev, cfg))
        next.push_back(i);
      else
        ++report.dropped["motion"];
    }
    alive.swap(next);
  }

  // stage 3: anisotropy percentile over the survivors
  std::vector<double> scores;
  {
    std::vector<const GrayImage*> images;
    images.reserve(alive.size());
    for (int i : alive) images.push_back(&stream.frames[i].image);
    scores = detail::score_frames(images, cfg, threads);
    const double thresh = detail::percentile_threshold(scores, cfg.aniso_keep_percentile);
    std::vector<int> next;
    std::vector<double> next_scores;
    for (std::size_t j = 0; j < alive.size(); ++j) {
      if (scores[j] >= thresh) {
        next.push_back(alive[j]);
        next_scores.push_back(scores[j]);
      } else {
        ++report.dropped["anisotropy"];
      }
    }
    alive.swap(next);
    scores.swap(next_scores);
  }

  // stage 4: temporal dedup
  {
    std::vector<ScoredFrameRef> refs;
    refs.reserve(alive.size());
    for (std::size_t j = 0; j < alive.size(); ++j)
      refs.push_back({stream.frames[alive[j]].id,
                      stream.frames[alive[j]].imu.orient.normalized(), scores[j]});
    const auto kept_ids = temporal_dedup(refs, cfg);
    std::vector<int> next;
    std::vector<double> next_scores;
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < alive.size(); ++j) {
      if (cursor < kept_ids.size() && stream.frames[alive[j]].id == kept_ids[cursor]) {
        next.push_back(alive[j]);
        next_scores.push_back(scores[j]);
        ++cursor;
      } else {
        ++report.dropped["temporal_dedup"];
      }
    }
    alive.swap(next);
    scores.swap(next_scores);
  }

  // stage 5: coverage prune
  {
    std::vector<ScoredFrameRef> refs;
    refs.reserve(alive.size());
    for (std::size_t j = 0; j < alive.size(); ++j)
      refs.push_back({stream.frames[alive[j]].id,
                      stream.frames[alive[j]].imu.orient.normalized(), scores[j]});
    const auto kept_ids = coverage_prune(refs, cfg);
    std::vector<int> next;
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < alive.size(); ++j) {
      if (cursor < kept_ids.size() && stream.frames[alive[j]].id == kept_ids[cursor]) {
        next.push_back(alive[j]);
        ++cursor;
      } else {
        ++report.dropped["coverage"];
      }
    }
    alive.swap(next);
  }

  std::vector<Frame> kept;
  kept.reserve(alive.size());
  for (int i : alive) {
    kept.push_back(stream.frames[i]);
    report.kept_ids.push_back(stream.frames[i].id);
  }
  report.reduction_ratio =
      report.total == 0
          ? 0.0
          : 1.0 - static_cast<double>(report.kept_ids.size()) /
                      static_cast<double>(report.total);
  return {std::move(kept), report};
}

}  // namespace roomsfm

#endif  // ROOMSFM_REDUCE_HPP
