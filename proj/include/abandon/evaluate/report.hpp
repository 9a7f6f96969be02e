#pragma once

#include <filesystem>
#include <ostream>

#include "abandon/evaluate/pipeline.hpp"

namespace abandon {

// model,p,precision,recall,f1,f1_ci_lo,f1_ci_hi,micro_f1,micro_ci_lo,micro_ci_hi,auc
// Baselines come first, then the models in run order.
void write_results_table(std::ostream& out, const ExperimentResult& r);

// bin,users,model,p,precision,recall,f1,micro_f1,auc
void write_activity_table(std::ostream& out, const ActivityStudy& study);

// model,metric,mean,std,rounds followed by one block per round.
void write_loocv_table(std::ostream& out, const LoocvResult& r);

// Square matrix with a header row of group ids.
void write_overlap_csv(std::ostream& out, const OverlapMatrix& o);

// threshold,precision,recall
void write_pr_curve_csv(std::ostream& out, const EvalReport& r);

// strategy,precision,recall,f1,micro_f1,auc
void write_ablation_table(std::ostream& out, const std::vector<std::pair<ImbalanceStrategy, ModelResult>>& rows);

// Opens `path` for writing, throwing IoError on failure, and calls `fn`.
template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn);

}  // namespace abandon

#include <fstream>

#include "abandon/common/error.hpp"

namespace abandon {

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace abandon
