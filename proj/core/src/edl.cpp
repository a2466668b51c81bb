#include "uaml/edl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "uaml/error.hpp"
#include "uaml/random.hpp"
#include "uaml/special_functions.hpp"

namespace uaml::edl {

namespace {

void check_label(std::span<const double> alpha, std::span<const double> y) {
  if (alpha.size() != y.size() || alpha.size() < 2) {
    throw Error(ErrorCode::kInvalidLabel, "label size " + std::to_string(y.size()) +
                                              " does not match " +
                                              std::to_string(alpha.size()) + " classes");
  }
  int ones = 0;
  for (double v : y) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw Error(ErrorCode::kInvalidLabel, "label is not one-hot");
    }
  }
  if (ones != 1) throw Error(ErrorCode::kInvalidLabel, "label is not one-hot");
  for (double a : alpha) {
    if (!(a >= 1.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::kInvalidCounts, "alpha must be finite and >= 1");
    }
  }
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> EvidenceOutput::alpha() const {
  std::vector<double> a(evidence);
  for (double& v : a) v += 1.0;
  return a;
}

double EvidenceOutput::strength() const {
  double s = static_cast<double>(evidence.size());
  for (double e : evidence) s += e;
  return s;
}

std::size_t LabeledPoint::label() const {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

double expected_sse(std::span<const double> alpha, std::span<const double> y) {
  check_label(alpha, y);
  double s = 0.0;
  for (double a : alpha) s += a;
  double loss = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const double p = alpha[j] / s;
    loss += (y[j] - p) * (y[j] - p) + p * (1.0 - p) / (s + 1.0);
  }
  return loss;
}

std::vector<double> expected_sse_gradient(std::span<const double> alpha,
                                          std::span<const double> y) {
  check_label(alpha, y);
  const std::size_t k = alpha.size();
  double s = 0.0;
  for (double a : alpha) s += a;
  std::vector<double> g(k);
  double gp = 0.0;
  double var_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double p = alpha[j] / s;
    g[j] = -2.0 * (y[j] - p) + (1.0 - 2.0 * p) / (s + 1.0);
    gp += g[j] * p;
    var_sum += p * (1.0 - p);
  }
  const double ds = var_sum / ((s + 1.0) * (s + 1.0));
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = (g[j] - gp) / s - ds;
  return out;
}

double kl_regularizer(std::span<const double> alpha, std::span<const double> y) {
  check_label(alpha, y);
  const std::size_t k = alpha.size();
  std::vector<double> at(k);
  double st = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    at[j] = y[j] + (1.0 - y[j]) * alpha[j];
    st += at[j];
  }
  double kl = log_gamma(st) - log_gamma(static_cast<double>(k));
  const double psi_s = digamma(st);
  for (std::size_t j = 0; j < k; ++j) {
    kl -= log_gamma(at[j]);
    kl += (at[j] - 1.0) * (digamma(at[j]) - psi_s);
  }
  return kl;
}

std::vector<double> kl_regularizer_gradient(std::span<const double> alpha,
                                            std::span<const double> y) {
  check_label(alpha, y);
  const std::size_t k = alpha.size();
  std::vector<double> at(k);
  double st = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    at[j] = y[j] + (1.0 - y[j]) * alpha[j];
    st += at[j];
  }
  const double common = (st - static_cast<double>(k)) * trigamma(st);
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = (1.0 - y[j]) * ((at[j] - 1.0) * trigamma(at[j]) - common);
  }
  return out;
}

double TrainConfig::regularizer_weight(std::size_t epoch) const {
  if (!regularize) return 0.0;
  const std::size_t horizon = std::min(anneal_epochs, epochs);
  if (horizon == 0) return 1.0;
  return std::min(1.0, static_cast<double>(epoch) / static_cast<double>(horizon));
}

ToyClassifier::ToyClassifier(std::size_t hidden, std::size_t classes)
    : hidden_(hidden), classes_(classes), params_(3 * hidden + classes * hidden + classes) {
  if (hidden == 0 || classes < 2) {
    throw Error(ErrorCode::kDomainTooSmall, "classifier needs hidden >= 1 and classes >= 2");
  }
}

ToyClassifier::ToyClassifier(std::size_t hidden, std::size_t classes, std::uint64_t seed)
    : ToyClassifier(hidden, classes) {
  Rng rng(seed);
  const std::size_t h = hidden_;
  for (std::size_t i = 0; i < 2 * h; ++i) params_[i] = rng.normal();
  for (std::size_t i = 2 * h; i < 3 * h; ++i) params_[i] = 0.5 * rng.normal();
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t i = 3 * h; i < 3 * h + classes_ * h; ++i) params_[i] = scale * rng.normal();
}

EvidenceOutput ToyClassifier::evidence(const Point2& x) const {
  const std::size_t h = hidden_;
  const double* w1 = params_.data();
  const double* b1 = w1 + 2 * h;
  const double* w2 = b1 + h;
  const double* b2 = w2 + classes_ * h;
  std::vector<double> act(h);
  for (std::size_t i = 0; i < h; ++i) {
    act[i] = std::tanh(w1[2 * i] * x[0] + w1[2 * i + 1] * x[1] + b1[i]);
  }
  EvidenceOutput out;
  out.evidence.resize(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    double z = b2[c];
    for (std::size_t i = 0; i < h; ++i) z += w2[c * h + i] * act[i];
    out.evidence[c] = softplus(z);
  }
  return out;
}

double ToyClassifier::loss(std::span<const LabeledPoint> data, double reg_weight) const {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pt : data) {
    const auto alpha = evidence(pt.x).alpha();
    total += expected_sse(alpha, pt.y);
    if (reg_weight != 0.0) total += reg_weight * kl_regularizer(alpha, pt.y);
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> ToyClassifier::gradient(std::span<const LabeledPoint> data,
                                            double reg_weight) const {
  const std::size_t h = hidden_;
  const std::size_t c_n = classes_;
  const double* w1 = params_.data();
  const double* b1 = w1 + 2 * h;
  const double* w2 = b1 + h;
  const double* b2 = w2 + c_n * h;
  std::vector<double> grad(params_.size(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + 2 * h;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + c_n * h;
  if (data.empty()) return grad;
  const double inv_n = 1.0 / static_cast<double>(data.size());

  std::vector<double> act(h), z(c_n), alpha(c_n), d_z(c_n), d_act(h);
  for (const auto& pt : data) {
    for (std::size_t i = 0; i < h; ++i) {
      act[i] = std::tanh(w1[2 * i] * pt.x[0] + w1[2 * i + 1] * pt.x[1] + b1[i]);
    }
    for (std::size_t c = 0; c < c_n; ++c) {
      z[c] = b2[c];
      for (std::size_t i = 0; i < h; ++i) z[c] += w2[c * h + i] * act[i];
      alpha[c] = softplus(z[c]) + 1.0;
    }
    auto d_alpha = expected_sse_gradient(alpha, pt.y);
    if (reg_weight != 0.0) {
      const auto d_kl = kl_regularizer_gradient(alpha, pt.y);
      for (std::size_t c = 0; c < c_n; ++c) d_alpha[c] += reg_weight * d_kl[c];
    }
    for (std::size_t c = 0; c < c_n; ++c) d_z[c] = d_alpha[c] * sigmoid(z[c]) * inv_n;
    std::fill(d_act.begin(), d_act.end(), 0.0);
    for (std::size_t c = 0; c < c_n; ++c) {
      g_b2[c] += d_z[c];
      for (std::size_t i = 0; i < h; ++i) {
        g_w2[c * h + i] += d_z[c] * act[i];
        d_act[i] += d_z[c] * w2[c * h + i];
      }
    }
    for (std::size_t i = 0; i < h; ++i) {
      const double d_pre = d_act[i] * (1.0 - act[i] * act[i]);
      g_w1[2 * i] += d_pre * pt.x[0];
      g_w1[2 * i + 1] += d_pre * pt.x[1];
      g_b1[i] += d_pre;
    }
  }
  return grad;
}

Json ToyClassifier::to_json() const {
  Json j;
  j["hidden"] = hidden_;
  j["classes"] = classes_;
  j["parameters"] = params_;
  return j;
}

ToyClassifier ToyClassifier::from_json(const Json& j) {
  try {
    ToyClassifier model(j.at("hidden").get<std::size_t>(), j.at("classes").get<std::size_t>());
    auto params = j.at("parameters").get<std::vector<double>>();
    if (params.size() != model.params_.size()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "model has " + std::to_string(params.size()) + " parameters, expected " +
                      std::to_string(model.params_.size()));
    }
    model.params_ = std::move(params);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("invalid model: ") + e.what());
  }
}

TrainResult train_toy(std::span<const LabeledPoint> data, const TrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::kDomainTooSmall, "no training data");
  const std::size_t classes = data.front().y.size();
  TrainResult result{ToyClassifier(cfg.hidden, classes, cfg.seed), {}};
  auto& params = result.model.parameters();
  std::vector<double> velocity(params.size(), 0.0);
  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lambda = cfg.regularizer_weight(epoch);
    const auto diverged = [epoch] {
      return Error(ErrorCode::kTrainingDiverged,
                   "loss became non-finite at epoch " + std::to_string(epoch));
    };
    // Non-finite evidence fails the alpha checks inside loss(); report it as
    // divergence rather than as a bad argument.
    for (const auto& pt : data) {
      for (double e : result.model.evidence(pt.x).evidence) {
        if (!std::isfinite(e)) throw diverged();
      }
    }
    const double loss = result.model.loss(data, lambda);
    if (!std::isfinite(loss)) throw diverged();
    result.loss_history.push_back(loss);
    const auto grad = result.model.gradient(data, lambda);
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
      params[i] += velocity[i];
    }
  }
  return result;
}

Opinion classify(const ToyClassifier& model, const Point2& x) {
  const EvidenceOutput out = model.evidence(x);
  const double s = out.strength();
  std::vector<double> beliefs(out.evidence.size());
  for (std::size_t j = 0; j < beliefs.size(); ++j) beliefs[j] = out.evidence[j] / s;
  return Opinion(std::move(beliefs), static_cast<double>(out.evidence.size()) / s);
}

double training_accuracy(const ToyClassifier& model, std::span<const LabeledPoint> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& pt : data) {
    const auto e = model.evidence(pt.x).evidence;
    const auto best = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    if (best == pt.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

SyntheticData make_synthetic(std::uint64_t seed) {
  SyntheticData data;
  const std::array<Point2, 2> means{kClassOneMean, kClassTwoMean};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < kPointsPerClass; ++i) {
      Rng rng = Rng::substream(seed, c * kPointsPerClass + i);
      LabeledPoint pt;
      pt.x = {means[c][0] + kClusterSigma * rng.normal(),
              means[c][1] + kClusterSigma * rng.normal()};
      pt.y = {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0};
      data.points.push_back(std::move(pt));
    }
  }
  data.probes = {kClassOneMean, kClassTwoMean, Point2{0.0, 0.0}, Point2{0.0, 12.0}};
  return data;
}

std::string render_svg(const ToyClassifier& model, const SyntheticData& data) {
  constexpr double kWidth = 480.0;
  constexpr double kHeight = 560.0;
  constexpr double kXMin = -5.0, kXMax = 5.0, kYMin = -3.0, kYMax = 14.0;
  auto sx = [&](double x) { return 20.0 + (x - kXMin) / (kXMax - kXMin) * (kWidth - 40.0); };
  auto sy = [&](double y) { return kHeight - 20.0 - (y - kYMin) / (kYMax - kYMin) * (kHeight - 40.0); };
  char buf[256];
  std::ostringstream svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                kWidth, kHeight);
  svg << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& pt : data.points) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n",
                  sx(pt.x[0]), sy(pt.x[1]), pt.label() == 0 ? "#1f77b4" : "#d62728");
    svg << buf;
  }
  for (const auto& probe : data.probes) {
    const double u = classify(model, probe).uncertainty();
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\">u=%.3f</text>\n",
                  sx(probe[0]), sy(probe[1]), 4.0 + 12.0 * u, sx(probe[0]) + 8.0,
                  sy(probe[1]) - 8.0, u);
    svg << buf;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace uaml::edl
