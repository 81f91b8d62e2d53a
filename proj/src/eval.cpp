#include "selfkin/eval.hpp"

#include <cstdio>

#include "selfkin/pruning.hpp"
#include "selfkin/train.hpp"

namespace selfkin {

std::size_t RelationReport::total() const {
  std::size_t n = 0;
  for (const auto& s : per_relation) n += s.count;
  return n;
}

std::optional<double> RelationReport::macro_average() const {
  double sum = 0.0;
  int present = 0;
  for (const auto& s : per_relation) {
    if (s.count == 0) continue;
    sum += s.accuracy();
    ++present;
  }
  if (present == 0) return std::nullopt;
  return sum / present;
}

RelationReport evaluate(const ModelParams& params, const std::vector<PairSample>& pairs,
                        const FeatureStore& store, std::span<const Index> kept) {
  RelationReport report;
  for (const auto& p : pairs) {
    const Vec& a = store.at(p.id1);
    const Vec& b = store.at(p.id2);
    const Prediction pred =
        kept.empty() ? predict(params, a, b) : predict(params, slice(a, kept), slice(b, kept));
    auto& s = report.per_relation[static_cast<std::size_t>(p.relation)];
    ++s.count;
    if (pred.kin == p.kin) ++s.correct;
  }
  return report;
}

void print_report(const RelationReport& report, std::ostream& os) {
  char line[96];
  std::snprintf(line, sizeof line, "%-8s %8s %9s\n", "relation", "pairs", "accuracy");
  os << line;
  for (Relation r : kRelations) {
    const auto& s = report[r];
    if (s.count == 0) continue;
    std::snprintf(line, sizeof line, "%-8s %8zu %9.4f\n", std::string(relation_code(r)).c_str(), s.count,
                  s.accuracy());
    os << line;
  }
  const auto avg = report.macro_average();
  if (avg) std::snprintf(line, sizeof line, "%-8s %8zu %9.4f\n", "Average", report.total(), *avg);
  else std::snprintf(line, sizeof line, "%-8s %8zu %9s\n", "Average", report.total(), "n/a");
  os << line;
}

void write_report_csv(const RelationReport& report, std::ostream& os) {
  os << "relation,count,accuracy\n";
  char num[40];
  for (Relation r : kRelations) {
    const auto& s = report[r];
    if (s.count == 0) continue;
    std::snprintf(num, sizeof num, "%.17g", s.accuracy());
    os << relation_code(r) << ',' << s.count << ',' << num << '\n';
  }
  if (const auto avg = report.macro_average()) {
    std::snprintf(num, sizeof num, "%.17g", *avg);
    os << "Average," << report.total() << ',' << num << '\n';
  }
}

}  // namespace selfkin
