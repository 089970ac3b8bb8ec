#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace c3bv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error so the
// CLI can map it onto a nonzero exit code with the message as diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kUnitNormTol = 1e-9;

/// Inner-product matching function sigma(s, u).
double match_score(const Vec& s, const Vec& u);

/// A point on the nonnegative part of the unit sphere.
///
/// Construction validates nonnegativity and unit norm (within kUnitNormTol)
/// and renormalizes to absorb accumulated drift. Vectors already at unit norm
/// to within a few ulps are stored unchanged, so re-wrapping a stored value is
/// bitwise stable.
class UnitNonnegVec {
 public:
  explicit UnitNonnegVec(Vec entries);

  const Vec& vec() const noexcept { return v_; }
  Eigen::Index dim() const noexcept { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_[i]; }

  friend bool operator==(const UnitNonnegVec& a, const UnitNonnegVec& b) {
    return a.v_.size() == b.v_.size() && (a.v_.array() == b.v_.array()).all();
  }

 private:
  struct Trusted {};
  UnitNonnegVec(Vec entries, Trusted) : v_(std::move(entries)) {}
  friend UnitNonnegVec project_nonneg_sphere(const Vec&,
                                             const std::optional<UnitNonnegVec>&);
  Vec v_;
};

/// Clamp negative entries to zero, then scale to unit norm. If nothing
/// positive survives the clamp, `fallback` is returned; without a fallback a
/// DegenerateInputError is thrown.
UnitNonnegVec project_nonneg_sphere(const Vec& x,
                                    const std::optional<UnitNonnegVec>& fallback = std::nullopt);

struct NoiseModel {
  enum class Kind { none, gaussian, uniform };
  Kind kind = Kind::none;
  double scale = 0.0;  // sigma_e for gaussian, E_bar for uniform

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma_e);
  static NoiseModel uniform(double e_bar);

  std::string to_string() const;
};

struct MechanismId {
  enum class Kind { exposure_topk, engagement_topk, softmax_share, winner_value };
  Kind kind = Kind::exposure_topk;
  double beta = 5.0;  // softmax_share temperature; ignored otherwise

  static MechanismId parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const MechanismId&, const MechanismId&) = default;
};

/// Top-K attention weights r_1 >= ... >= r_K >= 0.
class AttentionWeights {
 public:
  explicit AttentionWeights(std::vector<double> r);

  /// r_k = 1 / log2(k + 1).
  static AttentionWeights log_discount(int k);

  int k() const noexcept { return static_cast<int>(r_.size()); }
  double operator[](int i) const { return r_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const noexcept { return r_; }
  double sum() const;

 private:
  std::vector<double> r_;
};

/// The frozen game tuple (lambda, u, v, noise, K, sigma, RM, r) plus the seed.
class GameInstance {
 public:
  GameInstance(double lambda, Mat users_true, std::vector<UnitNonnegVec> contents,
               NoiseModel noise, MechanismId mechanism, AttentionWeights attention,
               std::uint64_t seed);

  double lambda() const noexcept { return lambda_; }
  const Mat& users() const noexcept { return users_; }  // m x d, one user per row
  const std::vector<UnitNonnegVec>& contents() const noexcept { return contents_; }
  const Mat& content_matrix() const noexcept { return content_rows_; }  // n x d
  const NoiseModel& noise() const noexcept { return noise_; }
  const MechanismId& mechanism() const noexcept { return mechanism_; }
  const AttentionWeights& attention() const noexcept { return attention_; }
  int k() const noexcept { return attention_.k(); }
  std::uint64_t seed() const noexcept { return seed_; }

  Eigen::Index num_users() const noexcept { return users_.rows(); }
  Eigen::Index num_contents() const noexcept { return content_rows_.rows(); }
  Eigen::Index dim() const noexcept { return users_.cols(); }

  GameInstance with_lambda(double lambda) const;
  GameInstance with_mechanism(MechanismId mechanism) const;
  GameInstance with_attention(AttentionWeights attention) const;

 private:
  double lambda_;
  Mat users_;
  std::vector<UnitNonnegVec> contents_;
  Mat content_rows_;
  NoiseModel noise_;
  MechanismId mechanism_;
  AttentionWeights attention_;
  std::uint64_t seed_;
};

/// Creator strategies s_1..s_n on the nonnegative unit sphere.
struct StrategyProfile {
  std::vector<UnitNonnegVec> strategies;
  long step = 0;

  static StrategyProfile from_contents(const GameInstance& instance);

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(strategies.size()); }
  /// n x d matrix, one strategy per row.
  Mat matrix() const;
};

}  // namespace c3bv
