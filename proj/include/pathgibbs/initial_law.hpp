// Copyright 2026 The pathgibbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATHGIBBS_INITIAL_LAW_HPP
#define PATHGIBBS_INITIAL_LAW_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "pathgibbs/errors.hpp"
#include "pathgibbs/rng.hpp"

namespace pathgibbs {

// Product initial laws mu = q^{(x) Z^d}. Relative entropies and densities are
// taken against the reference m = N(0, 1).

struct Dirac {
  double value = 0.0;
};

struct GaussianProduct {
  double mean = 0.0;
  double variance = 1.0;
};

/// A user-supplied one-site law q with known log dq/dm.
struct DensityProduct {
  std::string name;
  std::function<double(RngStream&)> sample;
  std::function<double(double)> log_density;
  double relative_entropy = 0.0;  // I(q; m)
  double second_moment = 0.0;
};

class InitialLaw {
 public:
  using Kind = std::variant<Dirac, GaussianProduct, DensityProduct>;

  InitialLaw() : kind_(Dirac{}) {}
    InitialLaw(Dirac d) : kind_(d) {}  // NOLINT(google-explicit-constructor)
  InitialLaw(GaussianProduct g) : kind_(g) {  // NOLINT(google-explicit-constructor)
    if (!(g.variance > 0.0)) throw PreconditionError("gaussian_product variance must be positive");
  }
  InitialLaw(DensityProduct q) : kind_(std::move(q)) {}  // NOLINT(google-explicit-constructor)

  static InitialLaw reference() { return InitialLaw(GaussianProduct{0.0, 1.0}); }

  const Kind& kind() const { return kind_; }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Dirac>) return "dirac";
          else if constexpr (std::is_same_v<T, GaussianProduct>) return "gaussian_product";
          else return k.name.empty() ? std::string("density_product") : k.name;
        },
        kind_);
  }

  double sample(RngStream& rng) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Dirac>) return k.value;
          else if constexpr (std::is_same_v<T, GaussianProduct>) return k.mean + std::sqrt(k.variance) * rng.normal();
          else return k.sample(rng);
        },
        kind_);
  }

  /// log dq/dm (x), or nullopt when q is not absolutely continuous w.r.t. m.
  std::optional<double> log_density(double x) const {
    return std::visit(
        [&](const auto& k) -> std::optional<double> {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Dirac>) return std::nullopt;
          else if constexpr (std::is_same_v<T, GaussianProduct>) {
            const double z = x - k.mean;
            return -0.5 * std::log(k.variance) - z * z / (2.0 * k.variance) + 0.5 * x * x;
          } else return k.log_density(x);
        },
        kind_);
  }

  bool has_density() const { return !std::holds_alternative<Dirac>(kind_); }

  /// Per-site I(q; m), or nullopt when infinite.
  std::optional<double> relative_entropy() const {
    return std::visit(
        [](const auto& k) -> std::optional<double> {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Dirac>) return std::nullopt;
          else if constexpr (std::is_same_v<T, GaussianProduct>)
            return 0.5 * (k.variance + k.mean * k.mean - 1.0 - std::log(k.variance));
          else return k.relative_entropy;
        },
        kind_);
  }

  /// E_q[x^2].
  double second_moment() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Dirac>) return k.value * k.value;
          else if constexpr (std::is_same_v<T, GaussianProduct>) return k.variance + k.mean * k.mean;
          else return k.second_moment;
        },
        kind_);
  }

 private:
  Kind kind_;
};

}  // namespace pathgibbs

#endif  // PATHGIBBS_INITIAL_LAW_HPP
