#include "parcelingam/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "parcelingam/core_stats.hpp"

namespace parcelingam {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix_step(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Weight with magnitude in [0.5, 1.5], sign uniform.
double draw_weight(NoiseRng& rng) {
  const double mag = 0.5 + rng.uniform();
  return rng.uniform() < 0.5 ? -mag : mag;
}

}  // namespace

const char* to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::GaussMixAsym: return "gauss_mix_asym";
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::GaussMixSym: return "gauss_mix_sym";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gauss_mix_asym") return NoiseFamily::GaussMixAsym;
  if (name == "laplace") return NoiseFamily::Laplace;
  if (name == "gauss_mix_sym") return NoiseFamily::GaussMixSym;
  throw std::invalid_argument("unknown noise family: " + name);
}

NoiseRng::NoiseRng(std::uint64_t seed) : state_(seed) {
  // Warm up so nearby seeds diverge immediately.
  splitmix_step(state_);
  splitmix_step(state_);
}

std::uint64_t NoiseRng::next_u64() { return splitmix_step(state_); }

double NoiseRng::uniform() {
  // 53-bit mantissa, strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xA24BAED4963EE407ull * (stream + 1));
  splitmix_step(state);
  return splitmix_step(state);
}

Eigen::VectorXd sample_noise(NoiseFamily family, int n, NoiseRng& rng) {
  if (n < 1) throw std::invalid_argument("sample_noise needs n >= 1");
  Eigen::VectorXd x(n);
  switch (family) {
    case NoiseFamily::GaussMixAsym:
      for (int i = 0; i < n; ++i)
        x[i] = rng.uniform() < 0.7 ? -1.1 + 0.7 * rng.normal()
                                   : 2.57 + 1.0 * rng.normal();
      break;
    case NoiseFamily::Laplace:
      for (int i = 0; i < n; ++i) {
        const double v = rng.uniform() - 0.5;
        x[i] = (v < 0.0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(v));
      }
      break;
    case NoiseFamily::GaussMixSym:
      for (int i = 0; i < n; ++i)
        x[i] = (rng.uniform() < 0.5 ? -1.5 : 1.5) + 0.5 * rng.normal();
      break;
  }
  if (n == 1) {
    x[0] = 0.0;
    return x;
  }
  x.array() -= x.mean();
  const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(n - 1));
  if (sd > 0.0) x /= sd;
  return x;
}

void SemSpec::validate() const {
  if (d < 2) throw std::invalid_argument("spec needs d >= 2 observed variables");
  if (q < 0) throw std::invalid_argument("spec needs q >= 0 confounders");
  if (B.rows() != d || B.cols() != d)
    throw std::invalid_argument("B must be d x d");
  if (Lambda.rows() != d || Lambda.cols() != q)
    throw std::invalid_argument("Lambda must be d x q");
  if (static_cast<int>(e_families.size()) != d)
    throw std::invalid_argument("e noise assignment must have length d");
  if (static_cast<int>(f_families.size()) != q)
    throw std::invalid_argument("f noise assignment must have length q");
  if (!B.allFinite() || !Lambda.allFinite())
    throw std::invalid_argument("spec matrices must be finite");
  for (int i = 0; i < d; ++i)
    if (B(i, i) != 0.0) throw std::invalid_argument("B diagonal must be zero");

  topological_order();  // throws when the pattern is cyclic

  for (int k = 0; k < q; ++k) {
    int nonzeros = 0;
    for (int i = 0; i < d; ++i)
      if (Lambda(i, k) != 0.0) ++nonzeros;
    if (nonzeros < 2)
      throw std::invalid_argument(
          "Lambda column " + std::to_string(k + 1) +
          " must have >= 2 nonzero entries (a confounder has >= 2 children)");
  }
  if (q > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Lambda);
    if (qr.rank() < q)
      throw std::invalid_argument("Lambda must have full column rank");
  }
}

std::vector<int> SemSpec::topological_order() const {
  // Kahn over the edge pattern (B(i,j) != 0 means x_j -> x_i),
  // smallest id first for determinism.
  std::vector<int> in_degree(d, 0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (B(i, j) != 0.0) ++in_degree[i];

  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < d; ++i)
    if (in_degree[i] == 0) ready.push(i);

  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u + 1);
    for (int i = 0; i < d; ++i)
      if (B(i, u) != 0.0 && --in_degree[i] == 0) ready.push(i);
  }
  if (static_cast<int>(order.size()) != d)
    throw std::invalid_argument("B is not permutable to strictly lower triangular");
  return order;
}

namespace {

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reachability(
    const Eigen::MatrixXd& b) {
  const int d = static_cast<int>(b.rows());
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(d, d);
  reach.setConstant(false);
  for (int src = 0; src < d; ++src) {
    std::vector<int> stack{src};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < d; ++v) {
        if (b(v, u) != 0.0 && !reach(src, v)) {
          reach(src, v) = true;
          stack.push_back(v);
        }
      }
    }
  }
  return reach;
}

}  // namespace

GeneratedData generate(const SemSpec& spec, int n) {
  spec.validate();
  if (n < 3) throw std::invalid_argument("generate needs n >= 3");

  NoiseRng noise_rng(derive_seed(spec.seed, 0));
  NoiseRng perm_rng(derive_seed(spec.seed, 1));

  const int d = spec.d;
  const int q = spec.q;

  Eigen::MatrixXd f(q, n);
  for (int k = 0; k < q; ++k)
    f.row(k) = sample_noise(spec.f_families[k], n, noise_rng).transpose();
  Eigen::MatrixXd e(d, n);
  for (int i = 0; i < d; ++i)
    e.row(i) = sample_noise(spec.e_families[i], n, noise_rng).transpose();

  const std::vector<int> topo = spec.topological_order();

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, n);
  Eigen::VectorXd scales = Eigen::VectorXd::Ones(d);
  std::vector<bool> source(d, false);  // no upstream input: ratio fixed at 1

  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    // One update pass in topological order: choose each scale so that the
    // realized var(e_i)/var(x_i) hits 1/2 given the current upstream values.
    for (int id : topo) {
      const int i = id - 1;
      Eigen::RowVectorXd upstream = Eigen::RowVectorXd::Zero(n);
      for (int j = 0; j < d; ++j)
        if (spec.B(i, j) != 0.0) upstream += spec.B(i, j) * x.row(j);
      for (int k = 0; k < q; ++k)
        if (spec.Lambda(i, k) != 0.0) upstream += spec.Lambda(i, k) * f.row(k);

      const double var_up = upstream.squaredNorm() / static_cast<double>(n - 1);
      if (var_up <= 1e-12) {
        source[i] = true;
        scales[i] = 1.0;
      } else {
        source[i] = false;
        const double c = upstream.dot(e.row(i)) / static_cast<double>(n - 1);
        scales[i] = c + std::sqrt(c * c + var_up);
      }
      x.row(i) = upstream + scales[i] * e.row(i);
    }

    // Verify the realized ratios.
    converged = true;
    for (int i = 0; i < d; ++i) {
      if (source[i]) continue;
      const double var_x = x.row(i).squaredNorm() / static_cast<double>(n - 1);
      const double ratio = scales[i] * scales[i] / var_x;
      if (std::abs(ratio - 0.5) > 0.025) {
        converged = false;
        break;
      }
    }
  }
  if (!converged)
    throw ScalingNonConvergence("variance-ratio fixed point did not converge");

  // Random variable permutation: output row r holds original variable perm[r].
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = d - 1; i > 0; --i) {
    const int j = static_cast<int>(perm_rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }

  GeneratedData out;
  out.data.values.resize(d, n);
  out.data.variable_ids.resize(d);
  for (int r = 0; r < d; ++r) {
    out.data.values.row(r) = x.row(perm[r]);
    out.data.variable_ids[r] = r + 1;
  }
  out.noise_scales = scales;

  const auto reach = reachability(spec.B);
  std::vector<int> topo_rank(d);
  for (int r = 0; r < d; ++r) topo_rank[topo[r] - 1] = r;

  SemGroundTruth truth;
  truth.true_ordering = CausalOrderingMatrix(out.data.variable_ids);
  truth.true_B.resize(d, d);
  truth.path_free.resize(d, d);
  truth.path_free.setConstant(false);
  truth.permutation.resize(d);
  for (int r = 0; r < d; ++r) truth.permutation[r] = perm[r] + 1;

  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) truth.true_B(r, c) = spec.B(perm[r], perm[c]);

  for (int r = 0; r < d; ++r) {
    for (int c = r + 1; c < d; ++c) {
      const int i = perm[r];
      const int j = perm[c];
      int value;
      if (reach(i, j)) {
        value = -1;
      } else if (reach(j, i)) {
        value = 1;
      } else {
        value = topo_rank[i] < topo_rank[j] ? -1 : 1;
        truth.path_free(r, c) = truth.path_free(c, r) = true;
      }
      truth.true_ordering.set_pair(r, c, value);
    }
  }
  out.truth = std::move(truth);
  return out;
}

const char* to_string(BuiltinNetwork net) {
  switch (net) {
    case BuiltinNetwork::Fig2_5Var: return "fig2_5var";
    case BuiltinNetwork::Fig3_10Var: return "fig3_10var";
    case BuiltinNetwork::Fig4_15Var: return "fig4_15var";
    case BuiltinNetwork::Chain: return "chain";
    case BuiltinNetwork::RandomDag: return "random_dag";
  }
  return "unknown";
}

BuiltinNetwork builtin_network_from_string(const std::string& name) {
  if (name == "fig2_5var") return BuiltinNetwork::Fig2_5Var;
  if (name == "fig3_10var") return BuiltinNetwork::Fig3_10Var;
  if (name == "fig4_15var") return BuiltinNetwork::Fig4_15Var;
  if (name == "chain") return BuiltinNetwork::Chain;
  if (name == "random_dag") return BuiltinNetwork::RandomDag;
  throw UnknownNetwork("unknown builtin network: " + name);
}

namespace {

// Source index -> noise family, cycling asym / laplace / sym as in the
// artificial-data protocol (1-based indices).
NoiseFamily family_for_index(int one_based) {
  switch (one_based % 3) {
    case 1: return NoiseFamily::GaussMixAsym;
    case 2: return NoiseFamily::Laplace;
    default: return NoiseFamily::GaussMixSym;
  }
}

SemSpec make_spec(int d, int q, const std::vector<std::array<int, 2>>& edges,
                  const std::vector<std::pair<int, std::vector<int>>>& confounders,
                  std::uint64_t seed, const std::string& name) {
  SemSpec spec;
  spec.d = d;
  spec.q = q;
  spec.B = Eigen::MatrixXd::Zero(d, d);
  spec.Lambda = Eigen::MatrixXd::Zero(d, q);
  spec.seed = seed;
  spec.name = name;
  for (int i = 1; i <= d; ++i) spec.e_families.push_back(family_for_index(i));
  for (int k = 1; k <= q; ++k) spec.f_families.push_back(family_for_index(k));

  NoiseRng rng(derive_seed(seed, 2));
  for (const auto& [child, parent] : edges)
    spec.B(child - 1, parent - 1) = draw_weight(rng);
  for (const auto& [latent, children] : confounders)
    for (int child : children) spec.Lambda(child - 1, latent - 1) = draw_weight(rng);
  return spec;
}

SemSpec random_dag(const BuiltinParams& params) {
  if (params.d < 2) throw std::invalid_argument("random_dag needs d >= 2");
  if (params.density < 0.0 || params.density > 1.0)
    throw std::invalid_argument("random_dag density must be in [0,1]");
  if (params.q < 0 || (params.q > 0 && params.d < 2))
    throw std::invalid_argument("random_dag confounder count invalid");

  for (int attempt = 0; attempt < 20; ++attempt) {
    NoiseRng rng(derive_seed(params.seed, 3 + attempt));
    SemSpec spec;
    spec.d = params.d;
    spec.q = params.q;
    spec.B = Eigen::MatrixXd::Zero(params.d, params.d);
    spec.Lambda = Eigen::MatrixXd::Zero(params.d, params.q);
    spec.seed = params.seed;
    spec.name = "random_dag";
    for (int i = 1; i <= params.d; ++i) spec.e_families.push_back(family_for_index(i));
    for (int k = 1; k <= params.q; ++k) spec.f_families.push_back(family_for_index(k));

    for (int j = 0; j < params.d; ++j)
      for (int i = j + 1; i < params.d; ++i)
        if (rng.uniform() < params.density) spec.B(i, j) = draw_weight(rng);

    for (int k = 0; k < params.q; ++k) {
      const int a = static_cast<int>(rng.next_u64() % params.d);
      int b = static_cast<int>(rng.next_u64() % (params.d - 1));
      if (b >= a) ++b;
      spec.Lambda(a, k) = draw_weight(rng);
      spec.Lambda(b, k) = draw_weight(rng);
    }

    try {
      spec.validate();
      return spec;
    } catch (const std::invalid_argument&) {
      // rank-deficient Lambda draw; retry with the next derived stream
    }
  }
  throw std::invalid_argument("random_dag could not draw a valid spec");
}

}  // namespace

SemSpec builtin_network(BuiltinNetwork name, const BuiltinParams& params) {
  switch (name) {
    case BuiltinNetwork::Chain: {
      if (params.d < 2) throw std::invalid_argument("chain needs d >= 2");
      std::vector<std::array<int, 2>> edges;
      for (int i = 1; i < params.d; ++i) edges.push_back({i + 1, i});
      return make_spec(params.d, 0, edges, {}, params.seed, "chain");
    }
    case BuiltinNetwork::Fig2_5Var:
      // Clean triangle 1 < 2 < 3, then the confounded block {4, 5}: both
      // confounders load on (4, 5) and neither confounded variable has an
      // observed parent, which pins the confounders' share of their variance
      // at one half and keeps their signature detectable at benchmark sizes.
      return make_spec(
          5, 2,
          {{2, 1}, {3, 1}, {3, 2}},
          {{1, {4, 5}}, {2, {4, 5}}}, params.seed, "fig2_5var");
    case BuiltinNetwork::Fig3_10Var:
      // Clean DAG on 1..6 plus the confounded block {7..10}; f1 covers the
      // whole block so every block pair is confounded, the rest pin down
      // pocket structure.
      return make_spec(
          10, 4,
          {{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 3}, {5, 4}, {6, 4}, {6, 5}},
          {{1, {7, 8, 9, 10}}, {2, {7, 9}}, {3, {8, 10}}, {4, {9, 10}}},
          params.seed, "fig3_10var");
    case BuiltinNetwork::Fig4_15Var:
      return make_spec(
          15, 6,
          {{2, 1}, {3, 1}, {4, 2}, {4, 3}, {5, 2}, {6, 4}, {7, 4}, {7, 5},
           {8, 6}, {9, 6}, {9, 7}, {10, 7}, {10, 9}},
          {{1, {11, 12, 13, 14, 15}}, {2, {11, 12}}, {3, {13, 14}},
           {4, {14, 15}}, {5, {11, 13}}, {6, {12, 15}}},
          params.seed, "fig4_15var");
    case BuiltinNetwork::RandomDag:
      return random_dag(params);
  }
  throw UnknownNetwork("unknown builtin network enum value");
}

SemSpec builtin_network(const std::string& name, const BuiltinParams& params) {
  return builtin_network(builtin_network_from_string(name), params);
}

}  // namespace parcelingam
