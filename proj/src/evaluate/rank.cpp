#include "abandon/evaluate/rank.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "abandon/common/error.hpp"
#include "abandon/common/stats.hpp"

namespace abandon {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("correlation inputs differ in length");
}

}  // namespace

Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  if (x.size() < 2) return {0.0, false};
  const double mx = stats::mean(x), my = stats::mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return {0.0, false};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), true};
}

Correlation spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  auto rx = stats::average_ranks(x);
  auto ry = stats::average_ranks(y);
  return pearson_r(rx, ry);
}

Correlation kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::size_t n = x.size();
  if (n < 2) return {0.0, false};
  // O(n^2) pair count; rankings here are short.
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) ++ties_x;
      else if (dy == 0) ++ties_y;
      else if ((dx > 0) == (dy > 0)) ++concordant;
      else ++discordant;
    }
  }
  double denom = std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
  if (denom == 0) return {0.0, false};
  return {std::clamp((concordant - discordant) / denom, -1.0, 1.0), true};
}

double rank_biased_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
  if (!(p > 0 && p < 1)) throw UsageError("RBO persistence must be in (0, 1)");
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  const std::size_t s = shorter.size(), l = longer.size();
  if (s == 0) return l == 0 ? 1.0 : 0.0;

  // overlap[d] = |shorter[:min(d, s)] ∩ longer[:d]| for d = 1..l.
  std::vector<double> overlap(l + 1, 0.0);
  std::unordered_set<std::string> seen_short, seen_long;
  double x = 0;
  for (std::size_t d = 1; d <= l; ++d) {
    const auto& item_l = longer[d - 1];
    if (d <= s) {
      const auto& item_s = shorter[d - 1];
      if (item_s == item_l) {
        ++x;
      } else {
        if (seen_long.count(item_s)) ++x;
        if (seen_short.count(item_l)) ++x;
      }
      seen_short.insert(item_s);
    } else if (seen_short.count(item_l)) {
      ++x;
    }
    seen_long.insert(item_l);
    overlap[d] = x;
  }

  const double xs = overlap[s], xl = overlap[l];
  double sum = 0, pd = 1;
  for (std::size_t d = 1; d <= l; ++d) {
    pd *= p;
    const double dd = static_cast<double>(d);
    sum += overlap[d] / dd * pd;
    if (d > s) sum += xs * (dd - static_cast<double>(s)) / (static_cast<double>(s) * dd) * pd;
  }
  const double tail = ((xl - xs) / static_cast<double>(l) + xs / static_cast<double>(s)) * std::pow(p, static_cast<double>(l));
  return std::clamp((1.0 - p) / p * sum + tail, 0.0, 1.0);
}

nlohmann::json RankAgreement::to_json() const {
  return {{"kendall_tau_b", kendall_tau.value}, {"kendall_defined", kendall_tau.defined},
          {"spearman_rho", spearman_rho.value}, {"spearman_defined", spearman_rho.defined},
          {"rbo", rbo},                         {"rbo_p", persistence},
          {"common_items", common_items}};
}

RankAgreement rank_agreement(const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
  RankAgreement r;
  r.persistence = p;
  r.rbo = rank_biased_overlap(a, b, p);
  std::unordered_map<std::string, double> pos_b;
  for (std::size_t i = 0; i < b.size(); ++i) pos_b.emplace(b[i], static_cast<double>(i));
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = pos_b.find(a[i]);
    if (it == pos_b.end()) continue;
    xa.push_back(static_cast<double>(i));
    xb.push_back(it->second);
  }
  r.common_items = xa.size();
  r.kendall_tau = kendall_tau_b(xa, xb);
  r.spearman_rho = spearman_rho(xa, xb);
  return r;
}

}  // namespace abandon
