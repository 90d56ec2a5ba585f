#include "drcl/eval/mcdm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

namespace drcl::eval {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_missing_marker(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s.empty() || s == "OM" || s == "N/A" || s == "NA" || s == "NAN";
}

/// Min-max normalized so that larger is better in every column.
MatrixX benefit_normalized(const DecisionMatrix& m) {
  MatrixX out(m.values.rows(), m.values.cols());
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    const double lo = m.values.col(j).minCoeff();
    const double hi = m.values.col(j).maxCoeff();
    if (hi - lo <= 0.0) {
      out.col(j).setZero();
      continue;
    }
    if (m.directions[j] == Direction::Benefit) out.col(j) = (m.values.col(j).array() - lo) / (hi - lo);
    else out.col(j) = (hi - m.values.col(j).array()) / (hi - lo);
  }
  return out;
}

VectorX average_ranks(const VectorX& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  VectorX ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(const VectorX& a, const VectorX& b) {
  const VectorX da = a.array() - a.mean();
  const VectorX db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : 0.0;
}

}  // namespace

RawDecisionTable parse_decision_csv(std::istream& in) {
  RawDecisionTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_done = false;
  bool label_column = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (!header_done) {
      header_done = true;
      if (!cells.empty()) {
        const auto& first = cells.front();
        label_column = first.empty() || (first.back() != '+' && first.back() != '-');
      }
      for (std::size_t c = label_column ? 1 : 0; c < cells.size(); ++c) {
        const auto& name = cells[c];
        if (name.size() < 2 || (name.back() != '+' && name.back() != '-')) {
          throw ParseError("criterion '" + name + "' needs a '+' or '-' direction suffix", line_no);
        }
        table.criteria.push_back(trim(name.substr(0, name.size() - 1)));
        table.directions.push_back(name.back() == '+' ? Direction::Benefit : Direction::Cost);
      }
      if (table.criteria.empty()) throw ParseError("no criteria in header", line_no);
      continue;
    }
    const std::size_t expected = table.criteria.size() + (label_column ? 1 : 0);
    if (cells.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    table.alternatives.push_back(label_column ? cells.front()
                                              : std::to_string(table.alternatives.size() + 1));
    std::vector<std::optional<double>> row;
    for (std::size_t c = label_column ? 1 : 0; c < cells.size(); ++c) {
      if (is_missing_marker(cells[c])) {
        row.emplace_back(std::nullopt);
        continue;
      }
      std::istringstream num(cells[c]);
      num.imbue(std::locale::classic());
      double v = 0;
      num >> v;
      if (num.fail() || !num.eof() || !std::isfinite(v)) {
        throw ParseError("bad numeric cell '" + cells[c] + "'", line_no);
      }
      row.emplace_back(v);
    }
    table.cells.push_back(std::move(row));
  }
  if (!header_done) throw ValidationError("decision table is empty");
  return table;
}

SanitizedTable sanitize(const RawDecisionTable& raw) {
  SanitizedTable out;
  const std::size_t rows = raw.cells.size();
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < raw.criteria.size(); ++j) {
    const bool any = std::any_of(raw.cells.begin(), raw.cells.end(),
                                 [j](const auto& row) { return row[j].has_value(); });
    if (any) kept.push_back(j);
    else out.log.push_back("dropped criterion '" + raw.criteria[j] + "': no observed values");
  }
  if (rows < 2 || kept.empty()) {
    throw ValidationError("decision table needs at least 2 alternatives and 1 usable criterion");
  }

  auto& m = out.matrix;
  m.alternatives = raw.alternatives;
  m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const std::size_t j = kept[c];
    m.criteria.push_back(raw.criteria[j]);
    m.directions.push_back(raw.directions[j]);
    const bool benefit = raw.directions[j] == Direction::Benefit;
    double worst = benefit ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
    for (const auto& row : raw.cells) {
      if (row[j]) worst = benefit ? std::min(worst, *row[j]) : std::max(worst, *row[j]);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& cell = raw.cells[i][j];
      if (!cell) {
        std::ostringstream msg;
        msg << "imputed " << raw.alternatives[i] << " / " << raw.criteria[j] << " = " << worst;
        out.log.push_back(msg.str());
      }
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cell ? *cell : worst;
    }
  }
  return out;
}

VectorX critic_weights(const DecisionMatrix& matrix, Correlation correlation) {
  MatrixX z = benefit_normalized(matrix);
  const auto cols = z.cols();
  VectorX sigma(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double mu = z.col(j).mean();
    sigma[j] = std::sqrt((z.col(j).array() - mu).square().mean());
  }
  if (correlation == Correlation::Spearman) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (sigma[j] > 0.0) z.col(j) = average_ranks(z.col(j));
    }
  }

  VectorX raw(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    double conflict = 0.0;
    for (Eigen::Index i = 0; i < cols; ++i) {
      const double rho = (sigma[i] > 0.0 && sigma[j] > 0.0) ? pearson(z.col(i), z.col(j)) : 0.0;
      conflict += 1.0 - (i == j ? 1.0 : rho);
    }
    raw[j] = sigma[j] * conflict;
  }

  const double total = raw.sum();
  if (total > 0.0) return raw / total;
  VectorX fallback = (sigma.array() > 0.0).cast<double>();
  if (fallback.sum() == 0.0) fallback.setOnes();
  return fallback / fallback.sum();
}

std::vector<int> competition_ranks(std::span<const double> scores) {
  std::vector<int> ranks(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int better = 0;
    for (double s : scores) better += s > scores[i] ? 1 : 0;
    ranks[i] = better + 1;
  }
  return ranks;
}

TopsisResult topsis_rank(const DecisionMatrix& matrix, const VectorX& weights) {
  const auto& x = matrix.values;
  if (weights.size() != x.cols()) throw DimensionError("topsis: one weight per criterion required");
  MatrixX v(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    v.col(j) = norm > 0.0 ? VectorX(x.col(j) / norm * weights[j]) : VectorX::Zero(x.rows());
  }
  RowVectorX ideal(x.cols());
  RowVectorX anti(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const bool benefit = matrix.directions[j] == Direction::Benefit;
    ideal[j] = benefit ? v.col(j).maxCoeff() : v.col(j).minCoeff();
    anti[j] = benefit ? v.col(j).minCoeff() : v.col(j).maxCoeff();
  }

  TopsisResult out;
  out.weights = weights;
  out.closeness.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double d_plus = (v.row(i) - ideal).norm();
    const double d_minus = (v.row(i) - anti).norm();
    const double denom = d_plus + d_minus;
    out.closeness[i] = denom > 0.0 ? d_minus / denom : 0.5;
  }
  out.ranks = competition_ranks(std::span<const double>(out.closeness.data(), static_cast<std::size_t>(out.closeness.size())));
  return out;
}

}  // namespace drcl::eval
