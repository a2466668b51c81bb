#ifndef UAML_EDL_HPP_
#define UAML_EDL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uaml/json.hpp"
#include "uaml/opinion.hpp"

namespace uaml::edl {

using Point2 = std::array<double, 2>;

// Nonnegative per-class evidence; alpha = e + 1.
struct EvidenceOutput {
  std::vector<double> evidence;

  std::vector<double> alpha() const;
  double strength() const;  // sum(alpha)
};

struct LabeledPoint {
  Point2 x{};
  std::vector<double> y;  // one-hot

  std::size_t label() const;
};

// Expected squared error of a one-hot label under Dir(alpha):
// sum_j (y_j - P_j)^2 + P_j (1 - P_j) / (S + 1), P = alpha / S.
// Throws Error(kInvalidLabel) unless y is one-hot of matching size.
double expected_sse(std::span<const double> alpha, std::span<const double> y);
std::vector<double> expected_sse_gradient(std::span<const double> alpha,
                                          std::span<const double> y);

// KL(Dir(alpha_tilde) || Dir(1)) with alpha_tilde = y + (1 - y) * alpha, i.e.
// the true class's evidence removed before comparing to uniform.
double kl_regularizer(std::span<const double> alpha, std::span<const double> y);
std::vector<double> kl_regularizer_gradient(std::span<const double> alpha,
                                            std::span<const double> y);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 500;
  // Regularizer weight ramps linearly from 0 to 1 over
  // min(anneal_epochs, epochs) epochs.
  std::size_t anneal_epochs = 10;
  bool regularize = true;
  std::size_t hidden = 16;
  std::uint64_t seed = 1;

  double regularizer_weight(std::size_t epoch) const;
};

// Two-layer perceptron: 2 inputs -> tanh hidden layer -> softplus evidence.
class ToyClassifier {
 public:
  ToyClassifier(std::size_t hidden, std::size_t classes, std::uint64_t seed);

  std::size_t hidden() const { return hidden_; }
  std::size_t classes() const { return classes_; }

  EvidenceOutput evidence(const Point2& x) const;

  // Flattened parameters: W1 (hidden x 2), b1, W2 (classes x hidden), b2.
  const std::vector<double>& parameters() const { return params_; }
  std::vector<double>& parameters() { return params_; }

  // Mean over the dataset of expected_sse + reg_weight * kl_regularizer.
  double loss(std::span<const LabeledPoint> data, double reg_weight) const;
  // Analytic gradient of loss() with respect to parameters().
  std::vector<double> gradient(std::span<const LabeledPoint> data,
                               double reg_weight) const;

  Json to_json() const;
  static ToyClassifier from_json(const Json& j);

 private:
  ToyClassifier(std::size_t hidden, std::size_t classes);

  std::size_t hidden_;
  std::size_t classes_;
  std::vector<double> params_;
};

struct TrainResult {
  ToyClassifier model;
  std::vector<double> loss_history;  // objective at the start of each epoch
};

// Full-batch gradient descent with momentum.  Throws
// Error(kTrainingDiverged) naming the epoch if the loss becomes non-finite.
TrainResult train_toy(std::span<const LabeledPoint> data, const TrainConfig& cfg);

// beliefs e_j / S, uncertainty n / S.
Opinion classify(const ToyClassifier& model, const Point2& x);

double training_accuracy(const ToyClassifier& model, std::span<const LabeledPoint> data);

struct SyntheticData {
  std::vector<LabeledPoint> points;
  // Class-1 centroid, class-2 centroid, midpoint, far-away point.
  std::array<Point2, 4> probes{};
};

inline constexpr Point2 kClassOneMean{-2.0, 0.0};
inline constexpr Point2 kClassTwoMean{2.0, 0.0};
inline constexpr double kClusterSigma = 0.7;
inline constexpr std::size_t kPointsPerClass = 100;

// Two isotropic Gaussian clusters plus the four probe points.
SyntheticData make_synthetic(std::uint64_t seed);

// Scatter plot of the data with probe markers sized by uncertainty.
std::string render_svg(const ToyClassifier& model, const SyntheticData& data);

}  // namespace uaml::edl

#endif  // UAML_EDL_HPP_
