#include "h2r/evalcli/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace h2r::evalcli {

Tokens tokenize(const std::string& text) {
  std::istringstream in(text);
  Tokens out;
  for (std::string w; in >> w;) out.push_back(w);
  return normalize_tokens(out);
}

Tokens normalize_tokens(const Tokens& tokens) {
  Tokens out;
  for (std::string t : tokens) {
    if (t.empty()) continue;
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

std::map<Tokens, long> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<Tokens, long> counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++counts[Tokens(t.begin() + i, t.begin() + i + n)];
  return counts;
}

}  // namespace

BleuReport bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
  if (candidates.empty()) throw ShapeError("BLEU needs a non-empty corpus");
  if (candidates.size() != references.size())
    throw ShapeError("BLEU got " + std::to_string(candidates.size()) + " candidates and " +
                     std::to_string(references.size()) + " references");
  BleuReport r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Tokens c = normalize_tokens(candidates[i]);
    const Tokens ref = normalize_tokens(references[i]);
    r.candidate_length += static_cast<long>(c.size());
    r.reference_length += static_cast<long>(ref.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cc = ngram_counts(c, n);
      const auto rc = ngram_counts(ref, n);
      for (const auto& [gram, count] : cc) {
        r.totals[n - 1] += count;
        const auto it = rc.find(gram);
        if (it != rc.end()) r.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (r.candidate_length == 0) return r;
  r.brevity_penalty = r.candidate_length > r.reference_length
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(r.reference_length) /
                                               static_cast<double>(r.candidate_length));
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precision[n] = r.totals[n] > 0 ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
    zero = zero || r.precision[n] == 0.0;
    if (!zero) log_sum += std::log(r.precision[n]);
    r.bleu[n] = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return r;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  return discounted_return(Eigen::Map<const Eigen::VectorXd>(rewards.data(), static_cast<Eigen::Index>(rewards.size())),
                           gamma);
}

double SuccessCell::percent() const {
  return episodes == 0 ? 0.0 : static_cast<double>(successes * 100) / static_cast<double>(episodes);
}

std::string SuccessCell::format(int digits) const {
  if (episodes == 0) return "-";
  long scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  // round(successes * 100 * scale / episodes) in integers
  const long num = successes * 100 * scale;
  const long q = (2 * num + episodes) / (2 * episodes);
  std::ostringstream s;
  s << q / scale;
  if (digits > 0) s << '.' << std::setw(digits) << std::setfill('0') << q % scale;
  return s.str();
}

SuccessTable success_table(const std::vector<EvalRun>& runs) {
  if (runs.empty()) throw ShapeError("success table needs at least one evaluation run");
  SuccessTable t;
  std::vector<std::string> actions;
  for (const auto& r : runs) {
    if (r.successes.empty())
      throw ShapeError("evaluation run for '" + r.action + "' has no episodes");
    if (std::find(actions.begin(), actions.end(), r.action) == actions.end()) actions.push_back(r.action);
    if (std::find(t.thresholds_cm.begin(), t.thresholds_cm.end(), r.threshold_cm) == t.thresholds_cm.end())
      t.thresholds_cm.push_back(r.threshold_cm);
  }
  std::sort(t.thresholds_cm.begin(), t.thresholds_cm.end());
  for (const auto& a : actions) {
    SuccessRow row{a, std::vector<SuccessCell>(t.thresholds_cm.size())};
    for (const auto& r : runs) {
      if (r.action != a) continue;
      const auto col = std::find(t.thresholds_cm.begin(), t.thresholds_cm.end(), r.threshold_cm) -
                       t.thresholds_cm.begin();
      row.cells[col].episodes += static_cast<long>(r.successes.size());
      row.cells[col].successes += std::count(r.successes.begin(), r.successes.end(), true);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string threshold_label(double cm) {
  std::ostringstream s;
  s << cm << "cm";
  return s.str();
}

}  // namespace

std::string SuccessTable::to_csv() const {
  std::ostringstream s;
  s << "action";
  for (double th : thresholds_cm) s << ',' << threshold_label(th);
  s << '\n';
  for (const auto& r : rows) {
    s << r.action;
    for (const auto& c : r.cells) s << ',' << c.format(1);
    s << '\n';
  }
  return s.str();
}

std::string SuccessTable::to_text() const {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"action"});
  for (double th : thresholds_cm) grid.back().push_back(threshold_label(th));
  for (const auto& r : rows) {
    grid.push_back({r.action});
    for (const auto& c : r.cells) grid.back().push_back(c.format(1));
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& row : grid)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream s;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0)
        s << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      else
        s << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace h2r::evalcli
