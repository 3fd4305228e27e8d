#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "h2r/common/errors.hpp"

namespace h2r::evalcli {

using Tokens = std::vector<std::string>;

// Lowercased whitespace tokens; empty padding tokens are dropped.
Tokens tokenize(const std::string& text);
Tokens normalize_tokens(const Tokens& tokens);

struct BleuReport {
  std::array<double, 4> bleu{};        // BLEU-1..4
  std::array<double, 4> precision{};   // modified n-gram precisions
  std::array<long, 4> matches{};
  std::array<long, 4> totals{};
  double brevity_penalty = 0.0;
  long candidate_length = 0;
  long reference_length = 0;
};

// Corpus-level BLEU over aligned pairs, one reference per candidate, no
// smoothing: a zero precision at any order k <= n makes BLEU-n zero.
BleuReport bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references);

// sum_t gamma^t r_t, evaluated back to front.
template <typename Derived>
typename Derived::Scalar discounted_return(const Eigen::DenseBase<Derived>& rewards,
                                           typename Derived::Scalar gamma) {
  using Scalar = typename Derived::Scalar;
  Scalar g(0);
  for (Eigen::Index t = rewards.size() - 1; t >= 0; --t) g = rewards(t) + gamma * g;
  return g;
}

double discounted_return(const std::vector<double>& rewards, double gamma);

struct SuccessCell {
  long successes = 0;
  long episodes = 0;

  double percent() const;
  // Exact decimal rendering of successes * 100 / episodes with `digits`
  // fractional digits, rounded half up.
  std::string format(int digits = 1) const;
};

struct SuccessRow {
  std::string action;
  std::vector<SuccessCell> cells;
};

struct SuccessTable {
  std::vector<double> thresholds_cm;
  std::vector<SuccessRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

// One evaluation run: an action, a threshold and its per-episode outcomes.
struct EvalRun {
  std::string action;
  double threshold_cm = 0.0;
  std::vector<bool> successes;
};

// Rows in first-seen action order, columns sorted by threshold. Runs sharing
// an (action, threshold) pair are pooled. Missing cells are reported as 0/0.
SuccessTable success_table(const std::vector<EvalRun>& runs);

}  // namespace h2r::evalcli
