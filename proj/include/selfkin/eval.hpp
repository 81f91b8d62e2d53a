#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "selfkin/data.hpp"
#include "selfkin/model.hpp"

namespace selfkin {

struct RelationStats {
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct RelationReport {
  std::array<RelationStats, kNumRelations> per_relation{};

  const RelationStats& operator[](Relation r) const { return per_relation[static_cast<std::size_t>(r)]; }
  std::size_t total() const;
  /// Unweighted mean over relations with at least one pair; nullopt when empty.
  std::optional<double> macro_average() const;
};

/// Per-relation accuracy. When `kept` is given (pruned model), stored
/// descriptors are sliced to those coordinates first.
RelationReport evaluate(const ModelParams& params, const std::vector<PairSample>& pairs,
                        const FeatureStore& store, std::span<const Index> kept = {});

/// Rows in relation order, empty relations omitted, then the average.
void print_report(const RelationReport& report, std::ostream& os);
/// CSV: relation,count,accuracy with a final "Average" row.
void write_report_csv(const RelationReport& report, std::ostream& os);

}  // namespace selfkin
