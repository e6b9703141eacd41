// Copyright 2026 The mdetect Authors
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

#include "mdetect/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mdetect/errors.hpp"
#include "mdetect/format.hpp"

namespace mdetect {

double Hyperparams::tolerance_for(std::size_t n_examples) const {
  if (convergence_tol) return *convergence_tol;
  return 1e-6 * static_cast<double>(std::max<std::size_t>(n_examples, 1));
}

void Hyperparams::validate() const {
  if (!(c_neg > 0)) throw ConfigError("c_neg must be positive");
  if (!(c_pos > 0)) throw ConfigError("c_pos must be positive");
  if (!(w_review >= 1)) throw ConfigError("w_review must be at least 1");
  if (convergence_tol && !(*convergence_tol > 0))
    throw ConfigError("convergence_tol must be positive");
  if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::vendor_consensus: return "vendor_consensus";
    case Provenance::auto_relabel: return "auto_relabel";
    case Provenance::reviewer: return "reviewer";
    case Provenance::default_benign: return "default_benign";
  }
  return "unknown";
}

double logistic_loss(double z) {
  return z >= 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

namespace {

// 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0) {
    double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_dims(std::span<const double> w, const FeatureVector& x) {
  if (x.dims != w.size())
    throw std::invalid_argument("feature vector has " + std::to_string(x.dims) +
                                " dims but the weight vector has " +
                                std::to_string(w.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double objective(std::span<const double> w, std::span<const TrainingExample> examples,
                 const Hyperparams& hyper, std::vector<double>* grad) {
  double f = 0.5 * dot(w, w);
  if (grad) grad->assign(w.begin(), w.end());
  for (const auto& ex : examples) {
    check_dims(w, ex.x);
    double margin = 0;
    for (auto k : ex.x.active) margin += w[k];
    const double c = (ex.y > 0 ? hyper.c_pos : hyper.c_neg) * ex.weight;
    const double z = ex.y > 0 ? margin : -margin;
    f += c * logistic_loss(z);
    if (grad) {
      const double coef = -(ex.y > 0 ? 1.0 : -1.0) * c * sigmoid_neg(z);
      for (auto k : ex.x.active) (*grad)[k] += coef;
    }
  }
  return f;
}

}  // namespace

double loss(std::span<const double> w, std::span<const TrainingExample> examples,
            const Hyperparams& hyper) {
  return objective(w, examples, hyper, nullptr);
}

std::vector<double> gradient(std::span<const double> w,
                             std::span<const TrainingExample> examples,
                             const Hyperparams& hyper) {
  std::vector<double> g;
  objective(w, examples, hyper, &g);
  return g;
}

double loss_and_gradient(std::span<const double> w,
                         std::span<const TrainingExample> examples,
                         const Hyperparams& hyper, std::vector<double>& grad) {
  return objective(w, examples, hyper, &grad);
}

TrainResult train(std::span<const TrainingExample> examples, std::size_t d,
                  const Hyperparams& hyper, std::uint64_t dict_fingerprint) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  for (const auto& ex : examples)
    if (ex.x.dims != d)
      throw std::invalid_argument("training example dims do not match d = " +
                                  std::to_string(d));

  TrainResult result;
  TrainReport& report = result.report;
  report.tolerance = hyper.tolerance_for(examples.size());

  std::vector<double> w(d, 0.0), g, w_next(d), g_next, dir(d);
  double f = objective(w, examples, hyper, &g);
  if (!std::isfinite(f)) throw DataError("non-finite training objective");
  report.objective_trace.push_back(f);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha(kMemory);

  while (report.iterations < hyper.max_iters) {
    double gnorm = norm_inf(g);
    if (gnorm <= report.tolerance) break;

    // Two-loop recursion: dir = -H g.
    for (std::size_t i = 0; i < d; ++i) dir[i] = -g[i];
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      alpha[j] = rho_hist[j] * dot(s_hist[j], dir);
      for (std::size_t i = 0; i < d; ++i) dir[i] -= alpha[j] * y_hist[j][i];
    }
    if (!s_hist.empty()) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      double gamma = dot(s, y) / dot(y, y);
      for (double& v : dir) v *= gamma;
    }
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      double beta = rho_hist[j] * dot(y_hist[j], dir);
      for (std::size_t i = 0; i < d; ++i) dir[i] += (alpha[j] - beta) * s_hist[j][i];
    }

    double slope = dot(g, dir);
    if (!(slope < 0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < d; ++i) dir[i] = -g[i];
      slope = -dot(g, g);
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    bool accepted = false;
    double f_next = f;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      for (std::size_t i = 0; i < d; ++i) w_next[i] = w[i] + step * dir[i];
      f_next = objective(w_next, examples, hyper, &g_next);
      if (!std::isfinite(f_next)) throw DataError("non-finite training objective");
      if (f_next <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further decrease representable

    std::vector<double> s(d), y(d);
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = w_next[i] - w[i];
      y[i] = g_next[i] - g[i];
    }
    double sy = dot(s, y);
    if (sy > 0) {
      if (s_hist.size() == kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    w.swap(w_next);
    g.swap(g_next);
    f = f_next;
    report.objective_trace.push_back(f);
    ++report.iterations;
  }

  report.gradient_norm = norm_inf(g);
  report.converged = report.gradient_norm <= report.tolerance;
  result.model.w = std::move(w);
  result.model.dict_fingerprint = dict_fingerprint;
  result.model.hyper = hyper;
  return result;
}

double score(std::span<const double> w, const FeatureVector& x) {
  check_dims(w, x);
  double s = 0;
  for (auto k : x.active) s += w[k];
  return s;
}

double score(const Model& model, const FeatureVector& x) { return score(model.w, x); }

std::uint64_t Model::fingerprint() const {
  std::uint64_t h = fnv1a64("");
  for (double v : w) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    h = fnv1a64(std::string_view(bytes, 8), h);
  }
  return h ^ dict_fingerprint;
}

namespace {

constexpr char kModelMagic[4] = {'M', 'D', 'L', 'W'};
constexpr std::uint32_t kModelVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("truncated model file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError("truncated model file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_model(const Model& model, std::ostream& out) {
  out.write(kModelMagic, 4);
  put_u32(out, kModelVersion);
  put_u64(out, model.w.size());
  put_f64(out, model.hyper.c_neg);
  put_f64(out, model.hyper.c_pos);
  put_f64(out, model.hyper.w_review);
  put_f64(out, model.hyper.convergence_tol.value_or(0.0));
  put_u64(out, static_cast<std::uint64_t>(model.hyper.max_iters));
  put_u64(out, model.dict_fingerprint);
  for (double v : model.w) put_f64(out, v);
}

Model read_model(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kModelMagic))
    throw DataError("not a model file");
  if (auto version = get_u32(in); version != kModelVersion)
    throw DataError("unsupported model version " + std::to_string(version));
  Model model;
  std::uint64_t d = get_u64(in);
  model.hyper.c_neg = get_f64(in);
  model.hyper.c_pos = get_f64(in);
  model.hyper.w_review = get_f64(in);
  double tol = get_f64(in);
  if (tol > 0) model.hyper.convergence_tol = tol;
  model.hyper.max_iters = static_cast<int>(get_u64(in));
  model.dict_fingerprint = get_u64(in);
  model.w.reserve(d);
  for (std::uint64_t i = 0; i < d; ++i) model.w.push_back(get_f64(in));
  return model;
}

RocCurve roc(std::span<const ScoredLabel> scores) {
  std::size_t positives = 0;
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw DataError("roc: NaN score");
    positives += s.malicious;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0)
    throw DataError("roc: need at least one malicious and one benign score");

  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocCurve curve;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i)
      sorted[i].malicious ? ++tp : ++fp;
    curve.points.push_back({threshold, static_cast<double>(fp) / negatives,
                            static_cast<double>(tp) / positives});
  }
  return curve;
}

double detection_at_fpr(const RocCurve& curve, double target_fpr) {
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.fpr <= target_fpr) best = std::max(best, p.tpr);
  return best;
}

double operating_threshold(const RocCurve& curve, double target_fpr) {
  double threshold = std::numeric_limits<double>::infinity();
  for (const auto& p : curve.points) {
    if (p.fpr > target_fpr) break;
    threshold = p.threshold;
  }
  return threshold;
}

void write_roc_csv(const RocCurve& curve, std::ostream& out) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    out << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
        << format_double(p.tpr) << '\n';
}

}  // namespace mdetect
