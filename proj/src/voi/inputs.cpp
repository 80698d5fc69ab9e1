#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/voi.hpp"

namespace cevoi {

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::constant:
      return "constant";
    case DropReason::linear_combination:
      return "linear-combination";
  }
  return "unknown";
}

std::optional<std::size_t> ParameterInputs::find(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

Eigen::VectorXd centred_column(const Matrix& m, std::size_t c) {
  Eigen::VectorXd v(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) v[static_cast<Eigen::Index>(r)] = m(r, c);
  v.array() -= v.mean();
  return v;
}

bool is_constant(const Matrix& m, std::size_t c) {
  for (std::size_t r = 1; r < m.rows(); ++r) {
    if (m(r, c) != m(0, c)) return false;
  }
  return true;
}

bool full_rank(const Eigen::MatrixXd& cols) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols);
  const auto& sv = svd.singularValues();
  return sv.size() > 0 && sv[sv.size() - 1] > kRankTolerance * sv[0];
}

std::string describe_relation(const Matrix& raw, const std::vector<std::string>& names,
                              const std::vector<std::size_t>& kept, std::size_t target) {
  const auto n = static_cast<Eigen::Index>(raw.rows());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kept.size()) + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      x(r, static_cast<Eigen::Index>(i)) = raw(row, kept[i]);
    }
    x(r, static_cast<Eigen::Index>(kept.size())) = 1.0;
    y[r] = raw(row, target);
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  std::string out = names[target] + " =";
  bool first = true;
  auto term = [&](double b, const std::string& name) {
    const char* sign = b < 0 ? (first ? "-" : " - ") : (first ? "" : " + ");
    out += fmt::format("{}{}{:.6g}", first ? " " : "", sign, std::fabs(b));
    if (!name.empty()) out += "*" + name;
    first = false;
  };
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double b = beta[static_cast<Eigen::Index>(i)];
    if (std::fabs(b) > 1e-9) term(b, names[kept[i]]);
  }
  const double intercept = beta[static_cast<Eigen::Index>(kept.size())];
  if (std::fabs(intercept) > 1e-9 || first) term(intercept, {});
  return out;
}

}  // namespace

ParameterInputs create_inputs(const RawParameters& raw, bool report_linear_combinations) {
  if (raw.mat.rows() < 2) throw ValidationError("parameter matrix needs at least 2 rows", "params");
  if (raw.names.size() != raw.mat.cols()) {
    throw ValidationError(fmt::format("{} parameter names for {} columns", raw.names.size(),
                                      raw.mat.cols()),
                          "params");
  }
  for (std::size_t r = 0; r < raw.mat.rows(); ++r) {
    for (std::size_t c = 0; c < raw.mat.cols(); ++c) {
      if (!std::isfinite(raw.mat(r, c))) {
        throw ValidationError(
            fmt::format("non-finite parameter value at row {}, column {}", r + 1, c + 1), "params");
      }
    }
  }

  ParameterInputs out;
  std::vector<std::size_t> kept;
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(raw.mat.rows()), 0);
  for (std::size_t c = 0; c < raw.mat.cols(); ++c) {
    if (is_constant(raw.mat, c)) {
      out.dropped.push_back({raw.names[c], c, DropReason::constant, {}});
      continue;
    }
    Eigen::VectorXd v = centred_column(raw.mat, c);
    v.normalize();
    Eigen::MatrixXd candidate(basis.rows(), basis.cols() + 1);
    candidate << basis, v;
    if (!full_rank(candidate)) {
      DroppedColumn d{raw.names[c], c, DropReason::linear_combination, {}};
      if (report_linear_combinations) d.relation = describe_relation(raw.mat, raw.names, kept, c);
      out.dropped.push_back(std::move(d));
      continue;
    }
    basis = std::move(candidate);
    kept.push_back(c);
  }
  if (kept.empty()) throw ValidationError("no informative parameters", "params");

  out.mat = Matrix(raw.mat.rows(), kept.size());
  for (std::size_t r = 0; r < raw.mat.rows(); ++r) {
    for (std::size_t i = 0; i < kept.size(); ++i) out.mat(r, i) = raw.mat(r, kept[i]);
  }
  for (std::size_t c : kept) out.names.push_back(raw.names[c]);
  return out;
}

}  // namespace cevoi
