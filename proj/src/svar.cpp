#include "ancestry/svar.hpp"

#include <cmath>
#include <deque>
#include <utility>

namespace ancestry {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;

}  // namespace

double NoiseSpec::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case NoiseKind::Normal:
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    case NoiseKind::Uniform:
      return std::uniform_real_distribution<double>(-kSqrt3, kSqrt3)(rng);
    case NoiseKind::Laplace: {
      // Difference of two unit exponentials is Laplace(0, 1) with variance 2.
      std::exponential_distribution<double> exp1(1.0);
      const double a = exp1(rng);
      const double b = exp1(rng);
      return (a - b) / kSqrt2;
    }
    case NoiseKind::StudentT: {
      const double t = std::student_t_distribution<double>(nu)(rng);
      return t * std::sqrt((nu - 2.0) / nu);
    }
  }
  throw std::logic_error("unknown noise kind");
}

std::string NoiseSpec::name() const {
  switch (kind) {
    case NoiseKind::Normal:
      return "normal";
    case NoiseKind::Uniform:
      return "uniform";
    case NoiseKind::Laplace:
      return "laplace";
    case NoiseKind::StudentT:
      return "student_t";
  }
  throw std::logic_error("unknown noise kind");
}

NoiseSpec NoiseSpec::from_name(const std::string& name, double nu) {
  if (name == "normal") return {NoiseKind::Normal, nu};
  if (name == "uniform") return {NoiseKind::Uniform, nu};
  if (name == "laplace") return {NoiseKind::Laplace, nu};
  if (name == "student_t") {
    if (!(nu > 2.0)) {
      throw SpecError("student_t noise needs nu > 2 for a finite variance");
    }
    return {NoiseKind::StudentT, nu};
  }
  throw ParseError("unknown noise kind '" + name + "'");
}

std::vector<int> instantaneous_order(const Eigen::MatrixXd& B0) {
  const int d = static_cast<int>(B0.rows());
  std::vector<int> indegree(d, 0);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      if (B0(j, k) != 0.0) ++indegree[j];
    }
  }
  std::deque<int> ready;
  for (int j = 0; j < d; ++j) {
    if (indegree[j] == 0) ready.push_back(j);
  }
  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    const int k = ready.front();
    ready.pop_front();
    order.push_back(k);
    for (int j = 0; j < d; ++j) {
      if (B0(j, k) != 0.0 && --indegree[j] == 0) ready.push_back(j);
    }
  }
  if (static_cast<int>(order.size()) != d) {
    throw SpecError("instantaneous effects contain a cycle; B0 must be permutable to strictly lower triangular form");
  }
  return order;
}

void validate(const SvarSpec& spec) {
  if (spec.d < 1) throw SpecError("spec needs at least one series");
  if (spec.p < 0) throw SpecError("negative order");
  if (static_cast<int>(spec.B.size()) != spec.p + 1) {
    throw SpecError("expected " + std::to_string(spec.p + 1) + " coefficient matrices, got " +
                    std::to_string(spec.B.size()));
  }
  for (const auto& b : spec.B) {
    if (b.rows() != spec.d || b.cols() != spec.d) {
      throw SpecError("coefficient matrices must be d x d");
    }
    if (!b.allFinite()) throw SpecError("coefficient matrix has non-finite entries");
  }
  if (static_cast<int>(spec.noise.size()) != spec.d) {
    throw SpecError("need one noise distribution per series");
  }
  for (const auto& n : spec.noise) {
    if (n.kind == NoiseKind::StudentT && !(n.nu > 2.0)) {
      throw SpecError("student_t noise needs nu > 2 for a finite variance");
    }
  }
  instantaneous_order(spec.B[0]);
  const Stability st = is_stable(spec);
  if (!st.stable) {
    throw SpecError("process is not stable (companion spectral radius " +
                    std::to_string(st.spectral_radius) + ")");
  }
}

std::vector<Eigen::MatrixXd> reduced_form(const SvarSpec& spec) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(spec.d, spec.d) - spec.B.at(0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    throw NumericError("(I - B0) is singular; the instantaneous structure is not acyclic");
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(spec.p);
  for (int tau = 1; tau <= spec.p; ++tau) {
    out.push_back(lu.solve(spec.B.at(tau)));
  }
  return out;
}

Eigen::MatrixXd companion_matrix(const SvarSpec& spec) {
  if (spec.p < 1) {
    throw std::invalid_argument("companion matrix requires order p >= 1");
  }
  const auto btil = reduced_form(spec);
  const int d = spec.d;
  const int p = spec.p;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d * p, d * p);
  for (int tau = 0; tau < p; ++tau) {
    comp.block(0, tau * d, d, d) = btil[tau];
  }
  if (p > 1) {
    comp.block(d, 0, d * (p - 1), d * (p - 1)).setIdentity();
  }
  return comp;
}

Stability is_stable(const SvarSpec& spec) {
  if (spec.p == 0) return {true, 0.0};
  const Eigen::MatrixXd comp = companion_matrix(spec);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue iteration did not converge for the " +
                       std::to_string(comp.rows()) + "x" + std::to_string(comp.cols()) +
                       " companion matrix");
  }
  const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
  return {radius < 1.0, radius};
}

TimeSeries simulate(const SvarSpec& spec, Eigen::Index n_obs, Eigen::Index burn_in,
                    std::uint64_t seed) {
  validate(spec);
  if (n_obs < 1) throw std::invalid_argument("need at least one observation");
  if (burn_in < 0) throw std::invalid_argument("negative burn-in");

  const int d = spec.d;
  const int p = spec.p;
  const auto btil = reduced_form(spec);
  const Eigen::MatrixXd minv =
      Eigen::FullPivLU<Eigen::MatrixXd>(Eigen::MatrixXd::Identity(d, d) - spec.B[0])
          .inverse();

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out(n_obs, d);
  std::vector<Eigen::VectorXd> hist(p, Eigen::VectorXd::Zero(d));
  Eigen::VectorXd eps(d);
  Eigen::VectorXd x(d);

  const Eigen::Index total = burn_in + n_obs;
  for (Eigen::Index t = 0; t < total; ++t) {
    for (int k = 0; k < d; ++k) eps(k) = spec.noise[k].sample(rng);
    x.noalias() = minv * eps;
    for (int tau = 1; tau <= p; ++tau) {
      x.noalias() += btil[tau - 1] * hist[tau - 1];
    }
    if (t >= burn_in) out.row(t - burn_in) = x;
    for (int tau = p - 1; tau > 0; --tau) hist[tau] = hist[tau - 1];
    if (p > 0) hist[0] = x;
  }
  return make_series(std::move(out));
}

nlohmann::json to_json(const SvarSpec& spec) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& b : spec.B) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < b.cols(); ++k) row.push_back(b(j, k));
      rows.push_back(std::move(row));
    }
    coeffs.push_back(std::move(rows));
  }
  nlohmann::json noise = nlohmann::json::array();
  for (const auto& n : spec.noise) {
    nlohmann::json entry{{"kind", n.name()}};
    if (n.kind == NoiseKind::StudentT) entry["nu"] = n.nu;
    noise.push_back(std::move(entry));
  }
  return nlohmann::json{{"d", spec.d}, {"p", spec.p}, {"B", std::move(coeffs)},
                        {"noise", std::move(noise)}};
}

SvarSpec svar_from_json(const nlohmann::json& j) {
  try {
    SvarSpec spec;
    spec.d = j.at("d").get<int>();
    spec.p = j.at("p").get<int>();
    if (spec.d < 1 || spec.p < 0) throw ParseError("spec has invalid d or p");

    const auto& coeffs = j.at("B");
    if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != spec.p + 1) {
      throw ParseError("spec field B must list p + 1 matrices");
    }
    for (const auto& rows : coeffs) {
      if (!rows.is_array() || static_cast<int>(rows.size()) != spec.d) {
        throw ParseError("each coefficient matrix must have d rows");
      }
      Eigen::MatrixXd b(spec.d, spec.d);
      for (int r = 0; r < spec.d; ++r) {
        const auto& row = rows.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != spec.d) {
          throw ParseError("each coefficient row must have d entries");
        }
        for (int c = 0; c < spec.d; ++c) b(r, c) = row.at(c).get<double>();
      }
      spec.B.push_back(std::move(b));
    }

    const auto& noise = j.at("noise");
    if (!noise.is_array() || static_cast<int>(noise.size()) != spec.d) {
      throw ParseError("spec field noise must list one distribution per series");
    }
    for (const auto& entry : noise) {
      const std::string kind = entry.at("kind").get<std::string>();
      const double nu = entry.value("nu", 7.0);
      spec.noise.push_back(NoiseSpec::from_name(kind, nu));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed SVAR spec JSON: ") + e.what());
  }
}

}  // namespace ancestry
