#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "abandon/common/binary_io.hpp"
#include "abandon/common/matrix.hpp"
#include "abandon/mlcore/model_spec.hpp"
#include "abandon/mlcore/tree.hpp"

namespace abandon {

// A binary classifier. decision_scores are monotone in the confidence of the
// positive class; predict() thresholds them (strictly above).
class Classifier {
 public:
  explicit Classifier(ModelSpec spec);
  virtual ~Classifier() = default;

  const ModelSpec& spec() const { return spec_; }
  bool fitted() const { return fitted_; }

  // Resolves the model spec's class weighting into per-row weights.
  void fit(const Matrix& X, const Labels& y);
  virtual void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) = 0;
  virtual std::vector<double> decision_scores(const Matrix& X) const = 0;
  virtual Labels predict(const Matrix& X) const;
  virtual double threshold() const { return 0.5; }

  void save(BinaryWriter& w) const;

 protected:
  virtual void save_state(BinaryWriter& w) const = 0;
  virtual void load_state(BinaryReader& r) = 0;
  void require_fitted() const;
  void check_training_set(const Matrix& X, const Labels& y, std::span<const double> weights) const;

  ModelSpec spec_;
  std::size_t n_features_ = 0;
  bool fitted_ = false;

  friend std::unique_ptr<Classifier> load_classifier(BinaryReader& r);
};

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec);
std::unique_ptr<Classifier> load_classifier(BinaryReader& r);

// Per-row majority over member predictions; a tie goes to the positive class.
Labels majority_vote(const std::vector<Labels>& member_predictions);

class GaussianNB final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Posterior probability of the positive class.
  std::vector<double> decision_scores(const Matrix& X) const override;
  double log_posterior_ratio(std::span<const double> x) const;

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  std::array<double, 2> log_prior_{};
  std::array<std::vector<double>, 2> mean_, var_;
};

class KNearestNeighbors final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Weighted share of positive votes among the k nearest training rows;
  // equal distances go to the lower training index.
  std::vector<double> decision_scores(const Matrix& X) const override;

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  Matrix X_;
  Labels y_;
  std::array<double, 2> class_weight_{1.0, 1.0};
};

class DecisionTree final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  std::vector<double> decision_scores(const Matrix& X) const override;
  const Tree& tree() const { return tree_; }

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  Tree tree_;
};

class RandomForest final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Share of trees voting positive.
  std::vector<double> decision_scores(const Matrix& X) const override;

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  std::vector<Tree> trees_;
};

// SAMME boosting of shallow Gini trees.
class AdaBoost final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Alpha-weighted vote in [-1, 1].
  std::vector<double> decision_scores(const Matrix& X) const override;
  double threshold() const override { return 0.0; }

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  std::vector<Tree> trees_;
  std::vector<double> alphas_;
};

// Logistic-loss boosting with Newton-step regression trees. Each round's
// step is halved until the weighted training loss does not increase.
class GradientBoosting final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Log-odds of the positive class.
  std::vector<double> decision_scores(const Matrix& X) const override;
  double threshold() const override { return 0.0; }
  // Weighted mean training loss after the prior and after each round.
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  double base_score_ = 0;
  std::vector<Tree> trees_;
  std::vector<double> loss_history_;
};

// Linear SVM: L2-regularized hinge loss minimized by averaged stochastic
// subgradient descent over seeded epoch shuffles.
class LinearSVM final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Signed margin w.x + b.
  std::vector<double> decision_scores(const Matrix& X) const override;
  double threshold() const override { return 0.0; }
  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  std::vector<double> w_;
  double b_ = 0;
};

// Majority vote of members trained under derived seeds. A tie goes to the
// positive class.
class VoteEnsemble final : public Classifier {
 public:
  using Classifier::Classifier;
  void fit_weighted(const Matrix& X, const Labels& y, std::span<const double> weights) override;
  // Share of members voting positive.
  std::vector<double> decision_scores(const Matrix& X) const override;
  Labels predict(const Matrix& X) const override;
  const std::vector<std::unique_ptr<Classifier>>& members() const { return members_; }

 private:
  void save_state(BinaryWriter& w) const override;
  void load_state(BinaryReader& r) override;
  std::vector<std::unique_ptr<Classifier>> members_;
};

}  // namespace abandon
