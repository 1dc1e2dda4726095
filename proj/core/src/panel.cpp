#include "nsbfm/panel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nsbfm/csv.hpp"
#include "nsbfm/error.hpp"

namespace nsbfm {

namespace {

std::string shape(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

Panel::Panel(Eigen::MatrixXd y, std::vector<Eigen::MatrixXd> x) : y_(std::move(y)), x_(std::move(x)) {
  const Index n = y_.rows();
  const Index t = y_.cols();
  if (n < 1 || t < 1) throw std::invalid_argument("panel needs at least one unit and one period");
  for (Index i = 0; i < n; ++i)
    for (Index s = 0; s < t; ++s)
      if (y_(i, s) != 0.0 && y_(i, s) != 1.0)
        throw std::invalid_argument("outcome at unit " + std::to_string(i) + ", period " + std::to_string(s) +
                                    " is not 0 or 1");
  if (x_.empty()) {
    x_.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(t, 0));
    q_ = 0;
    return;
  }
  if (static_cast<Index>(x_.size()) != n)
    throw std::invalid_argument("covariates given for " + std::to_string(x_.size()) + " units, panel has " +
                                std::to_string(n));
  q_ = x_.front().cols();
  for (Index i = 0; i < n; ++i) {
    const auto& xi = x_[static_cast<std::size_t>(i)];
    if (xi.rows() != t || xi.cols() != q_)
      throw std::invalid_argument("covariate block of unit " + std::to_string(i) + " is " +
                                  shape(xi.rows(), xi.cols()) + ", expected " + shape(t, q_));
    if (!xi.allFinite()) throw std::invalid_argument("non-finite covariate for unit " + std::to_string(i));
  }
}

void ModelParams::check_against(const Panel& panel) const {
  const Index n = panel.n_units();
  const Index t = panel.n_periods();
  const Index q = panel.n_covariates();
  const Index r = lambda.cols();
  if (b.rows() != n || b.cols() != q)
    throw std::invalid_argument("B is " + shape(b.rows(), b.cols()) + ", expected " + shape(n, q));
  if (lambda.rows() != n)
    throw std::invalid_argument("Lambda is " + shape(lambda.rows(), r) + ", expected " + std::to_string(n) + " rows");
  if (f.rows() != t || f.cols() != r)
    throw std::invalid_argument("F is " + shape(f.rows(), f.cols()) + ", expected " + shape(t, r));
  if (!b.allFinite() || !lambda.allFinite() || !f.allFinite())
    throw std::invalid_argument("parameters contain non-finite entries");
}

Eigen::MatrixXd covariate_index(const Panel& panel, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(panel.n_units(), panel.n_periods());
  if (panel.n_covariates() == 0) return out;
  for (Index i = 0; i < panel.n_units(); ++i) out.row(i) = (panel.x(i) * b.row(i).transpose()).transpose();
  return out;
}

Eigen::MatrixXd single_index(const Panel& panel, const ModelParams& params) {
  params.check_against(panel);
  Eigen::MatrixXd z = covariate_index(panel, params.b);
  if (params.n_factors() > 0) z.noalias() += params.lambda * params.f.transpose();
  return z;
}

Panel load_panel(const std::filesystem::path& outcome_path,
                 const std::optional<std::filesystem::path>& covariate_path) {
  const auto lines = csv::read_lines(outcome_path);
  if (lines.empty()) throw ParseError(outcome_path.string() + ": empty outcome file", 1, 1);
  const std::size_t n = lines.size();
  std::size_t t = 0;
  Eigen::MatrixXd y;
  for (std::size_t r = 0; r < n; ++r) {
    const auto fields = csv::split_fields(lines[r]);
    if (r == 0) {
      t = fields.size();
      if (t == 0) throw ParseError(outcome_path.string() + ": empty first row", 1, 1);
      y.resize(static_cast<Index>(n), static_cast<Index>(t));
    }
    if (fields.size() != t)
      throw ParseError(outcome_path.string() + ": ragged row " + std::to_string(r + 1) + " has " +
                           std::to_string(fields.size()) + " cells, expected " + std::to_string(t),
                       r + 1, std::min(fields.size(), t) + 1);
    for (std::size_t c = 0; c < t; ++c) {
      const auto& cell = fields[c];
      if (cell != "0" && cell != "1")
        throw ParseError(outcome_path.string() + ": non-binary cell '" + std::string(cell) + "' at row " +
                             std::to_string(r + 1) + ", col " + std::to_string(c + 1),
                         r + 1, c + 1);
      y(static_cast<Index>(r), static_cast<Index>(c)) = cell == "1" ? 1.0 : 0.0;
    }
  }
  if (!covariate_path) return Panel(std::move(y), {});

  const auto& path = *covariate_path;
  const auto cov_lines = csv::read_lines(path);
  if (cov_lines.empty()) throw ParseError(path.string() + ": missing header", 1, 1);
  const auto header = csv::split_fields(cov_lines[0]);
  if (header.size() < 2 || header[0] != "unit" || header[1] != "period")
    throw ParseError(path.string() + ": header must start with unit,period", 1, 1);
  const std::size_t q = header.size() - 2;
  const Index ni = static_cast<Index>(n);
  const Index ti = static_cast<Index>(t);
  std::vector<Eigen::MatrixXd> x(n, Eigen::MatrixXd(ti, static_cast<Index>(q)));
  std::vector<char> seen(n * t, 0);
  for (std::size_t r = 1; r < cov_lines.size(); ++r) {
    if (cov_lines[r].empty()) continue;
    const auto fields = csv::split_fields(cov_lines[r]);
    if (fields.size() != q + 2)
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(q + 2),
                       r + 1, std::min(fields.size(), q + 2) + 1);
    const double unit = csv::parse_double(fields[0], r + 1, 1);
    const double period = csv::parse_double(fields[1], r + 1, 2);
    if (unit != std::floor(unit) || unit < 0 || unit >= static_cast<double>(n))
      throw ParseError(path.string() + ": unit index out of range at row " + std::to_string(r + 1), r + 1, 1);
    if (period != std::floor(period) || period < 0 || period >= static_cast<double>(t))
      throw ParseError(path.string() + ": period index out of range at row " + std::to_string(r + 1), r + 1, 2);
    const auto i = static_cast<std::size_t>(unit);
    const auto s = static_cast<std::size_t>(period);
    if (seen[i * t + s])
      throw ParseError(path.string() + ": duplicate (unit " + std::to_string(i) + ", period " + std::to_string(s) +
                           ") at row " + std::to_string(r + 1),
                       r + 1, 1);
    seen[i * t + s] = 1;
    for (std::size_t k = 0; k < q; ++k) {
      const double v = csv::parse_double(fields[k + 2], r + 1, k + 3);
      if (!std::isfinite(v))
        throw ParseError(path.string() + ": non-finite covariate at row " + std::to_string(r + 1) + ", col " +
                             std::to_string(k + 3),
                         r + 1, k + 3);
      x[i](static_cast<Index>(s), static_cast<Index>(k)) = v;
    }
  }
  for (Index i = 0; i < ni; ++i)
    for (Index s = 0; s < ti; ++s)
      if (!seen[static_cast<std::size_t>(i * ti + s)])
        throw ParseError(path.string() + ": no covariates for unit " + std::to_string(i) + ", period " +
                             std::to_string(s),
                         0, 0);
  return Panel(std::move(y), std::move(x));
}

void save_covariates(const Panel& panel, const std::filesystem::path& path) {
  std::vector<std::string> header{"unit", "period"};
  for (Index k = 0; k < panel.n_covariates(); ++k) header.push_back("cov_" + std::to_string(k + 1));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(panel.n_units() * panel.n_periods()));
  for (Index i = 0; i < panel.n_units(); ++i)
    for (Index t = 0; t < panel.n_periods(); ++t) {
      std::vector<std::string> row{std::to_string(i), std::to_string(t)};
      for (Index k = 0; k < panel.n_covariates(); ++k) row.push_back(csv::format_double(panel.x(i)(t, k)));
      rows.push_back(std::move(row));
    }
  csv::write_table(path, header, rows);
}

void save_fit(const FitResult& fit, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir);
  csv::write_matrix(dir / "B.csv", fit.params.b);
  csv::write_matrix(dir / "Lambda.csv", fit.params.lambda);
  csv::write_matrix(dir / "F.csv", fit.params.f);
  csv::write_matrix(dir / "zhat.csv", fit.zhat);
  csv::write_matrix(dir / "trace.csv",
                    Eigen::Map<const Eigen::VectorXd>(fit.loglik_trace.data(),
                                                      static_cast<Index>(fit.loglik_trace.size())));
}

FitResult load_fit(const std::filesystem::path& dir) {
  FitResult fit;
  fit.params.b = csv::read_matrix(dir / "B.csv");
  fit.params.lambda = csv::read_matrix(dir / "Lambda.csv");
  fit.params.f = csv::read_matrix(dir / "F.csv");
  fit.zhat = csv::read_matrix(dir / "zhat.csv");
  const Eigen::MatrixXd trace = csv::read_matrix(dir / "trace.csv");
  fit.loglik_trace.assign(trace.data(), trace.data() + trace.size());
  fit.n_iterations = static_cast<int>(fit.loglik_trace.size()) - 1;
  const Index n = fit.params.lambda.rows();
  if (fit.params.f.cols() != fit.params.lambda.cols())
    throw ParseError((dir / "F.csv").string() + ": factor count differs from Lambda.csv");
  if (fit.params.b.rows() != n || fit.zhat.rows() != n || fit.zhat.cols() != fit.params.f.rows())
    throw ParseError(dir.string() + ": fit files have inconsistent shapes");
  fit.sigma_hat = n > 0 ? Eigen::VectorXd((fit.params.lambda.transpose() * fit.params.lambda).diagonal() /
                                          static_cast<double>(n))
                        : Eigen::VectorXd();
  return fit;
}

}  // namespace nsbfm
