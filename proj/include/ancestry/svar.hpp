#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ancestry/errors.hpp"
#include "ancestry/timeseries.hpp"

namespace ancestry {

enum class NoiseKind { Normal, Uniform, Laplace, StudentT };

// Innovation distribution, standardized analytically to mean 0 and unit
// variance: uniform on [-sqrt(3), sqrt(3)], Laplace scaled by 1/sqrt(2),
// Student-t(nu) scaled by sqrt((nu - 2) / nu).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Normal;
  double nu = 7.0;  // StudentT degrees of freedom, must exceed 2

  double sample(std::mt19937_64& rng) const;
  std::string name() const;
  static NoiseSpec from_name(const std::string& name, double nu = 7.0);
};

// Structural vector autoregressive model of order p on d series.
// B[tau](j, k) is the effect of x_{t-tau,k} on x_{t,j}; B[0] must describe an
// acyclic instantaneous structure and the companion matrix must be stable.
struct SvarSpec {
  int d = 0;
  int p = 0;
  std::vector<Eigen::MatrixXd> B;  // p + 1 matrices, each d x d
  std::vector<NoiseSpec> noise;    // one entry per series
};

// Checks shapes, acyclicity of the instantaneous structure, and stability.
void validate(const SvarSpec& spec);

// Topological order of the instantaneous structure; throws SpecError when the
// support of B0 contains a cycle.
std::vector<int> instantaneous_order(const Eigen::MatrixXd& B0);

// Reduced-form lag matrices (I - B0)^{-1} B_tau for tau = 1..p.
std::vector<Eigen::MatrixXd> reduced_form(const SvarSpec& spec);

// dp x dp companion matrix: top block row holds the reduced-form lag
// matrices, identity blocks sit on the subdiagonal. Requires p >= 1.
Eigen::MatrixXd companion_matrix(const SvarSpec& spec);

struct Stability {
  bool stable = false;
  double spectral_radius = 0.0;
};

// Largest companion eigenvalue modulus; for p = 0 the process is trivially
// stable with radius 0.
Stability is_stable(const SvarSpec& spec);

// Draws innovations per the noise assignment, recurses the reduced form from
// a zero state, discards `burn_in` initial steps, and returns the next
// `n_obs` rows. Deterministic given the seed.
TimeSeries simulate(const SvarSpec& spec, Eigen::Index n_obs, Eigen::Index burn_in,
                    std::uint64_t seed);

inline constexpr Eigen::Index kDefaultBurnIn = 10000;

// JSON document with matrices row-major and distributions by name.
nlohmann::json to_json(const SvarSpec& spec);
SvarSpec svar_from_json(const nlohmann::json& j);

}  // namespace ancestry
