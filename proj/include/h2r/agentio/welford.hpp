#pragma once

#include <cstdint>

#include <json.hpp>

#include "h2r/common/errors.hpp"
#include "h2r/common/types.hpp"

namespace h2r::agentio {

// Running per-component mean and population variance (Welford).
template <typename Scalar, int Dim = Eigen::Dynamic>
class Welford {
 public:
  using Vector = Eigen::Matrix<Scalar, Dim, 1>;

  static constexpr Scalar kEpsilon = Scalar(1e-7);

  Welford() {
    if constexpr (Dim != Eigen::Dynamic) reset(Dim);
  }
  explicit Welford(Eigen::Index dim) { reset(dim); }

  void reset(Eigen::Index dim) {
    n_ = 0;
    mean_ = Vector::Zero(dim);
    m2_ = Vector::Zero(dim);
  }

  template <typename Derived>
  void update(const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != mean_.size()) throw ShapeError("observation size mismatch in normalizer");
    ++n_;
    const Vector delta = x - mean_;
    mean_ += delta / Scalar(n_);
    m2_ += delta.cwiseProduct(x - mean_);
  }

  std::uint64_t count() const { return n_; }
  const Vector& mean() const { return mean_; }
  const Vector& m2() const { return m2_; }
  Vector variance() const {
    if (n_ == 0) return Vector::Zero(mean_.size());
    return m2_ / Scalar(n_);
  }

  template <typename Derived>
  Vector normalize(const Eigen::MatrixBase<Derived>& x) const {
    if (n_ == 0) throw StateError("normalize() before any update");
    if (x.size() != mean_.size()) throw ShapeError("observation size mismatch in normalizer");
    const Vector sigma = variance().cwiseSqrt();
    return (x - mean_).cwiseQuotient((sigma.array() + kEpsilon).matrix());
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["mean"] = std::vector<Scalar>(mean_.data(), mean_.data() + mean_.size());
    j["m2"] = std::vector<Scalar>(m2_.data(), m2_.data() + m2_.size());
    return j;
  }
  static Welford from_json(const nlohmann::json& j) {
    const auto mean = j.at("mean").get<std::vector<Scalar>>();
    const auto m2 = j.at("m2").get<std::vector<Scalar>>();
    if (mean.size() != m2.size()) throw ShapeError("normalizer mean/m2 size mismatch");
    Welford w(static_cast<Eigen::Index>(mean.size()));
    w.n_ = j.at("n").get<std::uint64_t>();
    for (std::size_t i = 0; i < mean.size(); ++i) {
      w.mean_(i) = mean[i];
      w.m2_(i) = m2[i];
    }
    return w;
  }

 private:
  std::uint64_t n_ = 0;
  Vector mean_;
  Vector m2_;
};

using StateNormalizer = Welford<double, kStateDim>;

}  // namespace h2r::agentio
