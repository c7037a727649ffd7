#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "sgwr/gwr.hpp"
#include "sgwr/pose.hpp"
#include "sgwr/synth.hpp"

namespace testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline sgwr::Vec random_vec(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  sgwr::Vec v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

inline std::vector<bool> random_mask(std::mt19937_64& rng, std::size_t joints, double p) {
  std::vector<bool> m(joints);
  std::bernoulli_distribution b(p);
  for (std::size_t j = 0; j < joints; ++j) m[j] = b(rng);
  return m;
}

/// Smooth random walk inside [0,1]^dim.
inline std::vector<sgwr::SampleVector> random_walk(std::mt19937_64& rng, std::size_t frames, std::size_t dim,
                                                   double step) {
  std::vector<sgwr::SampleVector> out;
  sgwr::Vec x = random_vec(rng, dim, 0.3, 0.7);
  sgwr::Vec v(dim, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = 0.8 * v[i] + uniform(rng, -step, step);
      x[i] = std::clamp(x[i] + v[i], 0.0, 1.0);
    }
    out.emplace_back(x);
  }
  return out;
}

inline std::vector<sgwr::SampleVector> squat_samples(int avatar = 1, std::size_t frames = 100,
                                                     sgwr::ExerciseVariant v = sgwr::ExerciseVariant::Correct) {
  return sgwr::flatten(sgwr::generate_exercise(sgwr::make_avatar(static_cast<std::uint64_t>(avatar)), v, frames).sequence);
}

inline double rel_err(double got, double want) {
  const double scale = std::max(1.0, std::fabs(want));
  return std::fabs(got - want) / scale;
}

/// Plain Euclidean norm over unmasked joints, written without the library helpers.
inline double oracle_norm(const sgwr::Vec& a, const sgwr::Vec& b, const std::vector<bool>& joint_mask) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!joint_mask.empty() && joint_mask[i / 2]) continue;
    const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sgwr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
