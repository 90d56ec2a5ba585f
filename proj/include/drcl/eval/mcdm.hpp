#pragma once

#include "drcl/common.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drcl::eval {

enum class Direction { Benefit, Cost };

/// Alternatives (rows) scored on criteria (columns), before sanitization.
/// A missing cell (OM, N/A, NAN or empty in the source) is std::nullopt.
struct RawDecisionTable {
  std::vector<std::string> alternatives;
  std::vector<std::string> criteria;
  std::vector<Direction> directions;
  std::vector<std::vector<std::optional<double>>> cells;
};

struct DecisionMatrix {
  std::vector<std::string> alternatives;
  std::vector<std::string> criteria;
  std::vector<Direction> directions;
  MatrixX values;  // alternatives x criteria
};

struct SanitizedTable {
  DecisionMatrix matrix;
  /// One line per imputed cell or dropped criterion.
  std::vector<std::string> log;
};

/// Reads a decision table in CSV form. The header holds criterion names
/// suffixed with `+` (benefit) or `-` (cost). A leading header cell without
/// a suffix names the alternative-label column; otherwise alternatives are
/// numbered from 1.
RawDecisionTable parse_decision_csv(std::istream& in);

/// Imputes every missing cell with the worst observed value of its
/// criterion (minimum for benefit, maximum for cost) and drops criteria with
/// no observed value. Requires at least 2 alternatives and 1 criterion afterwards.
SanitizedTable sanitize(const RawDecisionTable& raw);

enum class Correlation { Pearson, Spearman };

/// CRITIC weights on min-max normalized, direction-adjusted columns:
/// w_j ∝ σ_j Σ_i (1 - ρ_ij). A constant column has σ = 0 (weight 0) and is
/// treated as uncorrelated with the others. If every raw weight vanishes
/// the non-constant criteria share the weight equally.
VectorX critic_weights(const DecisionMatrix& matrix, Correlation correlation = Correlation::Pearson);

struct TopsisResult {
  VectorX weights;
  VectorX closeness;
  std::vector<int> ranks;  // 1 = best
};

/// Classical TOPSIS: per-column Euclidean normalization, weighting, distance
/// to the direction-aware ideal and anti-ideal, closeness D- / (D+ + D-).
/// Identical alternatives (both distances zero) score 0.5.
TopsisResult topsis_rank(const DecisionMatrix& matrix, const VectorX& weights);

/// Competition ranking by descending score; equal scores share the smaller rank.
std::vector<int> competition_ranks(std::span<const double> scores);

}  // namespace drcl::eval
