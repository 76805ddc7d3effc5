#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parcelingam/data_matrix.hpp"
#include "parcelingam/ordering.hpp"

namespace parcelingam {

enum class NoiseFamily {
  GaussMixAsym,  // 0.7 N(-1.1, 0.49) + 0.3 N(2.57, 1): skewed, multimodal
  Laplace,       // standard double exponential
  GaussMixSym,   // 0.5 N(-1.5, 0.25) + 0.5 N(1.5, 0.25): bimodal, sub-Gaussian
};

const char* to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

/// Generator description for x = Bx + Lambda f + e. Variable ids are 1..d,
/// confounder ids 1..q. B(i-1, j-1) is the strength of x_j -> x_i.
struct SemSpec {
  int d = 0;
  int q = 0;
  Eigen::MatrixXd B;       // d x d, permutable to strictly lower triangular
  Eigen::MatrixXd Lambda;  // d x q, >= 2 nonzeros per column, full column rank
  std::vector<NoiseFamily> e_families;  // length d
  std::vector<NoiseFamily> f_families;  // length q
  std::uint64_t seed = 0;
  std::string name;  // metadata only

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// A topological order of the observed DAG (ids 1..d).
  std::vector<int> topological_order() const;
};

/// What the generator knows: the full pairwise order implied by the
/// generating topological order, with pairs that have no directed path in
/// either direction flagged so evaluation can exclude them, plus the true
/// strengths and the permutation that was applied. All in output coordinates.
struct SemGroundTruth {
  CausalOrderingMatrix true_ordering;
  Eigen::MatrixXd true_B;
  std::vector<int> permutation;  // output row r holds original variable permutation[r]
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> path_free;
};

/// Deterministic RNG stream; all draws are pinned to the generator's exact
/// bit stream so equal seeds give bitwise-equal data.
class NoiseRng {
 public:
  explicit NoiseRng(std::uint64_t seed);
  double uniform();  // (0, 1)
  double normal();   // standard normal, Box-Muller
  std::uint64_t next_u64();

 private:
  std::uint64_t state_;
};

/// Derives an independent stream for a labelled purpose (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n i.i.d. draws, then standardized to exact zero sample mean and unit
/// unbiased sample variance.
Eigen::VectorXd sample_noise(NoiseFamily family, int n, NoiseRng& rng);

struct GeneratedData {
  DataMatrix data;
  SemGroundTruth truth;
  Eigen::VectorXd noise_scales;  // realized sd of each e_i, original coordinates
};

/// Forward-simulates the model, scaling noise variances by fixed-point
/// iteration until var(e_i)/var(x_i) is 1/2 within 5% relative tolerance for
/// every variable with upstream input (the ratio is structurally 1 for pure
/// sources, which are exempt and generated at unit scale). Applies a random
/// variable permutation. Throws ScalingNonConvergence after 100 iterations.
GeneratedData generate(const SemSpec& spec, int n);

enum class BuiltinNetwork { Fig2_5Var, Fig3_10Var, Fig4_15Var, Chain, RandomDag };

BuiltinNetwork builtin_network_from_string(const std::string& name);
const char* to_string(BuiltinNetwork net);

struct BuiltinParams {
  int d = 3;             // chain / random_dag
  double density = 0.4;  // random_dag
  int q = 1;             // random_dag
  std::uint64_t seed = 1;
};

/// Fully populated generator spec for a named network. The fig-named specs
/// are structurally representative stand-ins with randomized weights in
/// +/-[0.5, 1.5]; they are labelled "representative" in output metadata.
SemSpec builtin_network(BuiltinNetwork name, const BuiltinParams& params = {});
SemSpec builtin_network(const std::string& name, const BuiltinParams& params = {});

}  // namespace parcelingam
