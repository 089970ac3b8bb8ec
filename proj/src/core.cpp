#include "c3bv/core.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace c3bv {

namespace {

// Renormalize only when the drift is visible; keeps already-normalized
// vectors bitwise stable.
constexpr double kRenormSlack = 1e-14;

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw UsageError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

double match_score(const Vec& s, const Vec& u) {
  if (s.size() != u.size()) {
    std::ostringstream os;
    os << "match_score: dimension mismatch (" << s.size() << " vs " << u.size() << ")";
    throw UsageError(os.str());
  }
  return s.dot(u);
}

UnitNonnegVec::UnitNonnegVec(Vec entries) : v_(std::move(entries)) {
  require_finite(v_, "UnitNonnegVec");
  if (v_.size() == 0) throw UsageError("UnitNonnegVec: empty vector");
  if ((v_.array() < 0.0).any()) {
    throw UsageError("UnitNonnegVec: negative entry");
  }
  const double norm = v_.norm();
  if (std::abs(norm - 1.0) > kUnitNormTol) {
    std::ostringstream os;
    os << "UnitNonnegVec: norm " << norm << " differs from 1 by more than " << kUnitNormTol;
    throw UsageError(os.str());
  }
  if (std::abs(norm - 1.0) > kRenormSlack) v_ /= norm;
}

UnitNonnegVec project_nonneg_sphere(const Vec& x, const std::optional<UnitNonnegVec>& fallback) {
  require_finite(x, "project_nonneg_sphere");
  Vec clamped = x.cwiseMax(0.0);
  const double norm = clamped.norm();
  if (!(norm > 0.0)) {
    if (fallback) return *fallback;
    throw DegenerateInputError("project_nonneg_sphere: no positive entry survives the clamp");
  }
  if (std::abs(norm - 1.0) > kRenormSlack) clamped /= norm;
  return UnitNonnegVec(std::move(clamped), UnitNonnegVec::Trusted{});
}

NoiseModel NoiseModel::gaussian(double sigma_e) {
  if (!(sigma_e > 0.0) || !std::isfinite(sigma_e)) {
    throw UsageError("gaussian noise requires sigma_e > 0");
  }
  return {Kind::gaussian, sigma_e};
}

NoiseModel NoiseModel::uniform(double e_bar) {
  if (!(e_bar > 0.0) || !std::isfinite(e_bar)) {
    throw UsageError("uniform noise requires E_bar > 0");
  }
  return {Kind::uniform, e_bar};
}

std::string NoiseModel::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: return "none";
    case Kind::gaussian: os << "gaussian(" << scale << ")"; break;
    case Kind::uniform: os << "uniform(" << scale << ")"; break;
  }
  return os.str();
}

MechanismId MechanismId::parse(std::string_view name) {
  if (name == "exposure_topk") return {Kind::exposure_topk, 5.0};
  if (name == "engagement_topk") return {Kind::engagement_topk, 5.0};
  if (name == "winner_value") return {Kind::winner_value, 5.0};
  constexpr std::string_view softmax = "softmax_share";
  if (name.substr(0, softmax.size()) == softmax) {
    MechanismId id{Kind::softmax_share, 5.0};
    if (name.size() > softmax.size()) {
      if (name[softmax.size()] != ':') throw UsageError("unknown mechanism: " + std::string(name));
      const std::string beta(name.substr(softmax.size() + 1));
      try {
        std::size_t used = 0;
        id.beta = std::stod(beta, &used);
        if (used != beta.size()) throw std::invalid_argument(beta);
      } catch (const std::exception&) {
        throw UsageError("softmax_share: bad beta '" + beta + "'");
      }
    }
    if (!(id.beta > 0.0) || !std::isfinite(id.beta)) {
      throw UsageError("softmax_share: beta must be finite and positive");
    }
    return id;
  }
  throw UsageError("unknown mechanism: " + std::string(name));
}

std::string MechanismId::name() const {
  switch (kind) {
    case Kind::exposure_topk: return "exposure_topk";
    case Kind::engagement_topk: return "engagement_topk";
    case Kind::winner_value: return "winner_value";
    case Kind::softmax_share: {
      if (beta == 5.0) return "softmax_share";
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, beta);
      return "softmax_share:" + std::string(buf, res.ptr);
    }
  }
  return "?";
}

AttentionWeights::AttentionWeights(std::vector<double> r) : r_(std::move(r)) {
  if (r_.empty()) throw UsageError("attention weights: K must be >= 1");
  for (std::size_t k = 0; k < r_.size(); ++k) {
    if (!std::isfinite(r_[k]) || r_[k] < 0.0) {
      throw UsageError("attention weights must be finite and nonnegative");
    }
    if (k > 0 && r_[k] > r_[k - 1]) {
      throw UsageError("attention weights must be nonincreasing");
    }
  }
}

AttentionWeights AttentionWeights::log_discount(int k) {
  if (k < 1) throw UsageError("attention weights: K must be >= 1");
  std::vector<double> r(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) r[static_cast<std::size_t>(i)] = 1.0 / std::log2(i + 2.0);
  return AttentionWeights(std::move(r));
}

double AttentionWeights::sum() const {
  double s = 0.0;
  for (double x : r_) s += x;
  return s;
}

GameInstance::GameInstance(double lambda, Mat users_true, std::vector<UnitNonnegVec> contents,
                           NoiseModel noise, MechanismId mechanism, AttentionWeights attention,
                           std::uint64_t seed)
    : lambda_(lambda),
      users_(std::move(users_true)),
      contents_(std::move(contents)),
      noise_(noise),
      mechanism_(mechanism),
      attention_(std::move(attention)),
      seed_(seed) {
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
    throw UsageError("GameInstance: lambda must be finite and >= 0");
  }
  if (users_.rows() < 1) throw UsageError("GameInstance: need at least one user");
  if (!users_.allFinite()) throw UsageError("GameInstance: non-finite user feature");
  if (contents_.empty()) throw UsageError("GameInstance: need at least one content");
  const auto d = users_.cols();
  content_rows_.resize(static_cast<Eigen::Index>(contents_.size()), d);
  for (std::size_t j = 0; j < contents_.size(); ++j) {
    if (contents_[j].dim() != d) throw UsageError("GameInstance: content dimension mismatch");
    content_rows_.row(static_cast<Eigen::Index>(j)) = contents_[j].vec().transpose();
  }
  if (attention_.k() > static_cast<int>(contents_.size())) {
    throw UsageError("GameInstance: K exceeds the number of contents");
  }
  if (noise_.kind != NoiseModel::Kind::none && !(noise_.scale > 0.0)) {
    throw UsageError("GameInstance: noise scale must be positive");
  }
  if (mechanism_.kind == MechanismId::Kind::softmax_share &&
      (!(mechanism_.beta > 0.0) || !std::isfinite(mechanism_.beta))) {
    throw UsageError("GameInstance: softmax beta must be finite and positive");
  }
}

GameInstance GameInstance::with_lambda(double lambda) const {
  GameInstance copy = *this;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("GameInstance: lambda must be finite and >= 0");
  }
  copy.lambda_ = lambda;
  return copy;
}

GameInstance GameInstance::with_mechanism(MechanismId mechanism) const {
  GameInstance copy = *this;
  copy.mechanism_ = mechanism;
  return copy;
}

GameInstance GameInstance::with_attention(AttentionWeights attention) const {
  if (attention.k() > static_cast<int>(contents_.size())) {
    throw UsageError("GameInstance: K exceeds the number of contents");
  }
  GameInstance copy = *this;
  copy.attention_ = std::move(attention);
  return copy;
}

StrategyProfile StrategyProfile::from_contents(const GameInstance& instance) {
  return StrategyProfile{instance.contents(), 0};
}

Mat StrategyProfile::matrix() const {
  if (strategies.empty()) return Mat();
  Mat out(size(), strategies.front().dim());
  for (Eigen::Index j = 0; j < size(); ++j) {
    out.row(j) = strategies[static_cast<std::size_t>(j)].vec().transpose();
  }
  return out;
}

}  // namespace c3bv
