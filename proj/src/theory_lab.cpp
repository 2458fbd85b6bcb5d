// Copyright 2026 The HFTT Authors.
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

#include "hftt/theory_lab.hpp"

#include <cmath>
#include <limits>

#include "hftt/error.hpp"
#include "hftt/matrix.hpp"

namespace hftt {
namespace {

constexpr double kMeanUnitTolerance = 1e-9;

Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  do {
    for (double& x : v) x = gauss(rng);
  } while (l2_norm(v) == 0.0);
  normalize_in_place(v);
  return v;
}

Vector mix_unit(const Vector& a, double wa, const Vector& b, double wb) {
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = wa * a[k] + wb * b[k];
  normalize_in_place(out);
  return out;
}

EmbeddingStore sample_set(const Vector& mean, std::size_t count, double noise, Modality modality,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t dim = mean.size();
  Matrix m(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    auto row = m.row(i);
    do {
      for (std::size_t k = 0; k < dim; ++k) row[k] = mean[k] + noise * gauss(rng);
    } while (l2_norm(row) == 0.0);
    normalize_in_place(row);
  }
  return EmbeddingStore(std::move(m), {true, kDefaultTemperature, modality});
}

// Sufficient statistics of one class for the quadratic objective.
struct Moments {
  Vector mean;
  Matrix second;  // mean of u u^T
};

Moments moments_of(const EmbeddingStore& s) {
  const std::size_t d = s.dim();
  Moments mo{Vector(d, 0.0), Matrix(d, d)};
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto u = s.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      mo.mean[a] += u[a];
      for (std::size_t b = a; b < d; ++b) mo.second(a, b) += u[a] * u[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(s.count());
  for (double& v : mo.mean) v *= inv_n;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      mo.second(a, b) *= inv_n;
      mo.second(b, a) = mo.second(a, b);
    }
  }
  return mo;
}

}  // namespace

std::pair<double, double> BimodalConfig::alignment_margins() const {
  return {dot(mean_u_plus, mean_v_plus) - dot(mean_u_plus, mean_v_minus),
          dot(mean_u_minus, mean_v_minus) - dot(mean_u_minus, mean_v_plus)};
}

void BimodalConfig::validate() const {
  if (dim == 0) fail(ErrorKind::kValidation, "dim must be positive");
  if (samples_per_class == 0) fail(ErrorKind::kValidation, "samples_per_class must be positive");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    fail(ErrorKind::kValidation, "noise_scale must be positive");
  }
  for (const Vector* m : {&mean_u_minus, &mean_u_plus, &mean_v_minus, &mean_v_plus}) {
    if (m->size() != dim) fail(ErrorKind::kValidation, "mean direction has wrong dimension");
    if (std::abs(l2_norm(*m) - 1.0) > kMeanUnitTolerance) {
      fail(ErrorKind::kValidation, "mean directions must be unit vectors");
    }
  }
  const auto [plus_margin, minus_margin] = alignment_margins();
  if (!(plus_margin > 0.0 && minus_margin > 0.0)) {
    fail(ErrorKind::kValidation, "mean directions violate the cross-modal alignment inequalities");
  }
}

BimodalConfig default_bimodal_config(std::size_t dim, std::size_t samples, double noise,
                                     std::uint64_t seed) {
  if (dim < 3) fail(ErrorKind::kValidation, "default fixture needs dim >= 3");
  BimodalConfig cfg;
  cfg.dim = dim;
  cfg.samples_per_class = samples;
  cfg.noise_scale = noise;
  cfg.seed = seed;
  Vector e0(dim, 0.0), e1(dim, 0.0), e2(dim, 0.0);
  e0[0] = e1[1] = e2[2] = 1.0;
  cfg.mean_u_minus = e0;
  cfg.mean_u_plus = e1;
  cfg.mean_v_minus = mix_unit(e0, 0.8, e2, 0.6);
  cfg.mean_v_plus = mix_unit(e1, 0.8, e2, 0.6);
  return cfg;
}

BimodalConfig random_bimodal_config(std::size_t dim, std::size_t samples, double noise,
                                    double min_margin, std::mt19937_64& rng) {
  if (dim < 2) fail(ErrorKind::kValidation, "random fixture needs dim >= 2");
  std::uniform_real_distribution<double> ratio(0.4, 0.95);
  BimodalConfig cfg;
  cfg.dim = dim;
  cfg.samples_per_class = samples;
  cfg.noise_scale = noise;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    cfg.mean_u_minus = random_unit(dim, rng);
    cfg.mean_u_plus = random_unit(dim, rng);
    const Vector offset = random_unit(dim, rng);
    const double a = ratio(rng);
    const double b = std::sqrt(1.0 - a * a);
    cfg.mean_v_minus = mix_unit(cfg.mean_u_minus, a, offset, b);
    cfg.mean_v_plus = mix_unit(cfg.mean_u_plus, a, offset, b);
    cfg.seed = rng();
    const auto [p, m] = cfg.alignment_margins();
    if (p >= min_margin && m >= min_margin) return cfg;
  }
  fail(ErrorKind::kDegenerate, "could not draw a config meeting the margin requirement");
}

BimodalSample sample_bimodal(const BimodalConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.samples_per_class;
  const double s = cfg.noise_scale;
  auto u_minus = sample_set(cfg.mean_u_minus, n, s, Modality::kText, rng);
  auto u_plus = sample_set(cfg.mean_u_plus, n, s, Modality::kText, rng);
  auto v_minus = sample_set(cfg.mean_v_minus, n, s, Modality::kImage, rng);
  auto v_plus = sample_set(cfg.mean_v_plus, n, s, Modality::kImage, rng);
  return {std::move(u_minus), std::move(u_plus), std::move(v_minus), std::move(v_plus)};
}

Vector empirical_mean(const EmbeddingStore& store) {
  if (store.count() == 0) fail(ErrorKind::kValidation, "mean of an empty store");
  Vector mean(store.dim(), 0.0);
  for (std::size_t i = 0; i < store.count(); ++i) {
    const auto r = store.row(i);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r[k];
  }
  for (double& v : mean) v /= static_cast<double>(store.count());
  return mean;
}

Vector closed_form_classifier(const Vector& u_minus, const Vector& u_plus) {
  if (u_minus.size() != u_plus.size() || u_minus.empty()) {
    fail(ErrorKind::kValidation, "class means must share a positive dimension");
  }
  Vector theta(u_plus.size());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = u_plus[k] - u_minus[k];
  if (l2_norm(theta) == 0.0) fail(ErrorKind::kDegenerate, "class means are identical");
  normalize_in_place(theta);
  return theta;
}

FitResult fit_quadratic_classifier(const EmbeddingStore& u_minus, const EmbeddingStore& u_plus,
                                   const FitOptions& opts) {
  if (u_minus.count() == 0 || u_plus.count() == 0) {
    fail(ErrorKind::kValidation, "both classes need at least one sample");
  }
  if (u_minus.dim() != u_plus.dim()) fail(ErrorKind::kValidation, "class dims disagree");
  const std::size_t d = u_minus.dim();

  // The empirical objective is quadratic in theta:
  //   2 + 2 theta.(mu- - mu+) + theta^T (M- + M+) theta
  // so the per-step cost is O(d^2) once the moments are known.
  const Moments lo = moments_of(u_minus);
  const Moments hi = moments_of(u_plus);
  Vector linear(d);
  for (std::size_t k = 0; k < d; ++k) linear[k] = lo.mean[k] - hi.mean[k];
  Matrix quad(d, d);
  for (std::size_t k = 0; k < d * d; ++k) quad.data()[k] = lo.second.data()[k] + hi.second.data()[k];

  Vector q_theta(d);
  auto objective = [&](const Vector& theta) {
    for (std::size_t a = 0; a < d; ++a) q_theta[a] = dot(quad.row(a), theta);
    return 2.0 + 2.0 * dot(theta, linear) + dot(theta, q_theta);
  };

  std::mt19937_64 rng(opts.seed);
  FitResult res;
  res.theta = random_unit(d, rng);
  double value = objective(res.theta);
  res.loss_trace.push_back(value);
  double best = value;
  std::size_t stale = 0;

  Vector grad(d);
  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    // objective() left Q theta in q_theta.
    for (std::size_t k = 0; k < d; ++k) grad[k] = 2.0 * linear[k] + 2.0 * q_theta[k];
    const double radial = dot(grad, res.theta);
    double tangential = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = grad[k] - radial * res.theta[k];
      tangential += t * t;
    }
    if (std::sqrt(tangential) <= opts.tolerance) {
      res.converged = true;
      break;
    }
    if (stale >= opts.patience) break;

    for (std::size_t k = 0; k < d; ++k) res.theta[k] -= opts.learning_rate * grad[k];
    if (normalize_in_place(res.theta) == 0.0) {
      fail(ErrorKind::kNumerical, "classifier collapsed to zero at step " + std::to_string(step));
    }
    value = objective(res.theta);
    res.loss_trace.push_back(value);
    ++res.steps;
    if (value < best) {
      best = value;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return res;
}

CorollaryReport verify_corollary(const Vector& theta, const EmbeddingStore& v_minus,
                                 const EmbeddingStore& v_plus) {
  if (v_minus.count() == 0 || v_plus.count() == 0) {
    fail(ErrorKind::kValidation, "corollary check needs non-empty V sets");
  }
  if (theta.size() != v_minus.dim() || theta.size() != v_plus.dim()) {
    fail(ErrorKind::kValidation, "theta dimension does not match V sets");
  }
  CorollaryReport r;
  r.mean_minus = dot(theta, empirical_mean(v_minus));
  r.mean_plus = dot(theta, empirical_mean(v_plus));
  r.holds = r.mean_minus < 0.0 && 0.0 < r.mean_plus;
  return r;
}

double sign_accuracy(const Vector& theta, const EmbeddingStore& v_minus,
                     const EmbeddingStore& v_plus) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < v_minus.count(); ++i) correct += dot(theta, v_minus.row(i)) < 0.0;
  for (std::size_t i = 0; i < v_plus.count(); ++i) correct += dot(theta, v_plus.row(i)) > 0.0;
  return static_cast<double>(correct) / static_cast<double>(v_minus.count() + v_plus.count());
}

double cosine(const Vector& a, const Vector& b) {
  return dot(a, b) / (l2_norm(a) * l2_norm(b));
}

TheoryReport run_theory(const BimodalConfig& cfg, const BimodalSample& sample,
                        const FitOptions& opts) {
  TheoryReport r;
  r.margins = cfg.alignment_margins();
  r.theta_closed =
      closed_form_classifier(empirical_mean(sample.u_minus), empirical_mean(sample.u_plus));
  const FitResult fit = fit_quadratic_classifier(sample.u_minus, sample.u_plus, opts);
  r.theta_fitted = fit.theta;
  r.fit_converged = fit.converged;
  r.fit_steps = fit.steps;
  r.cosine = cosine(r.theta_closed, r.theta_fitted);
  r.corollary = verify_corollary(r.theta_fitted, sample.v_minus, sample.v_plus);
  r.accuracy = sign_accuracy(r.theta_fitted, sample.v_minus, sample.v_plus);
  return r;
}

void to_json(nlohmann::json& j, const TheoryReport& r) {
  j = nlohmann::json{
      {"theta_closed", r.theta_closed},
      {"theta_fitted", r.theta_fitted},
      {"cosine", r.cosine},
      {"corollary",
       {{"mean_minus", r.corollary.mean_minus},
        {"mean_plus", r.corollary.mean_plus},
        {"holds", r.corollary.holds}}},
      {"accuracy", r.accuracy},
      {"margins", {r.margins.first, r.margins.second}},
      {"fit", {{"converged", r.fit_converged}, {"steps", r.fit_steps}}},
  };
}

}  // namespace hftt
