#include "abandon/evaluate/report.hpp"

#include <iomanip>

namespace abandon {

namespace {

void row(std::ostream& out, std::string_view name, const EvalReport& r) {
  const auto& t = r.test;
  out << name << ',' << r.p_used << ',' << t.precision << ',' << t.recall << ',' << t.f1 << ',' << r.ci_positive_f1.lo
      << ',' << r.ci_positive_f1.hi << ',' << t.micro_f1 << ',' << r.ci_micro_f1.lo << ',' << r.ci_micro_f1.hi << ','
      << t.auc << '\n';
}

void short_row(std::ostream& out, const EvalReport& r) {
  const auto& t = r.test;
  out << t.precision << ',' << t.recall << ',' << t.f1 << ',' << t.micro_f1 << ',' << t.auc << '\n';
}

}  // namespace

void write_results_table(std::ostream& out, const ExperimentResult& r) {
  out << std::setprecision(6);
  out << "model,p,precision,recall,f1,f1_ci_lo,f1_ci_hi,micro_f1,micro_ci_lo,micro_ci_hi,auc\n";
  for (const auto& b : r.baselines) row(out, baseline_name(b.kind), b.report);
  for (const auto& m : r.models) row(out, model_kind_name(m.outcome.kind), m.report);
}

void write_activity_table(std::ostream& out, const ActivityStudy& study) {
  out << std::setprecision(6);
  out << "bin,lower,upper,users,model,p,precision,recall,f1,micro_f1,auc\n";
  for (std::size_t b = 0; b < study.bins.size(); ++b) {
    const auto& bin = study.bins[b];
    std::string lower = b == 0 ? "" : std::to_string(study.plan.thresholds[b - 1]);
    std::string upper = b < 4 ? std::to_string(study.plan.thresholds[b]) : "";
    if (!bin.experiment) {
      out << bin.label << ',' << lower << ',' << upper << ',' << bin.users << ",,,,,,,\n";
      continue;
    }
    for (const auto& m : bin.experiment->models) {
      out << bin.label << ',' << lower << ',' << upper << ',' << bin.users << ',' << model_kind_name(m.outcome.kind)
          << ',' << m.report.p_used << ',';
      short_row(out, m.report);
    }
  }
}

void write_loocv_table(std::ostream& out, const LoocvResult& r) {
  out << std::setprecision(6);
  out << "model,metric,mean,std,rounds\n";
  for (const auto& [kind, metrics] : r.aggregate) {
    for (const auto& [name, s] : metrics) out << model_kind_name(kind) << ',' << name << ',' << s.mean << ',' << s.std << ',' << s.n << '\n';
  }
  out << "\ngroup,train_users,test_users,shared_users,defined,model,precision,recall,f1,micro_f1,auc\n";
  for (const auto& round : r.rounds) {
    for (const auto& [kind, rep] : round.reports) {
      out << round.group << ',' << round.train_users << ',' << round.test_users << ',' << round.shared_users << ','
          << (round.defined ? "yes" : "no") << ',' << model_kind_name(kind) << ',';
      short_row(out, rep);
    }
  }
}

void write_overlap_csv(std::ostream& out, const OverlapMatrix& o) {
  out << std::setprecision(6) << "group";
  for (const auto& g : o.groups) out << ',' << g;
  out << '\n';
  for (std::size_t i = 0; i < o.groups.size(); ++i) {
    out << o.groups[i];
    for (std::size_t j = 0; j < o.groups.size(); ++j) out << ',' << o.percent(i, j);
    out << '\n';
  }
}

void write_pr_curve_csv(std::ostream& out, const EvalReport& r) {
  out << std::setprecision(9) << "threshold,precision,recall\n";
  for (const auto& p : r.pr) out << p.threshold << ',' << p.precision << ',' << p.recall << '\n';
}

void write_ablation_table(std::ostream& out, const std::vector<std::pair<ImbalanceStrategy, ModelResult>>& rows) {
  out << std::setprecision(6) << "strategy,model,precision,recall,f1,micro_f1,auc\n";
  for (const auto& [s, m] : rows) {
    out << imbalance_strategy_name(s) << ',' << model_kind_name(m.outcome.kind) << ',';
    short_row(out, m.report);
  }
}

}  // namespace abandon
