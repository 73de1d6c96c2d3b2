#include "hglue/toda.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hglue/bessel.hpp"
#include "hglue/errors.hpp"

namespace hglue {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (!(tolerance > 0.0)) fail("solver tolerance must be positive");
  if (!(r_min > 0.0) || !(r_min < 0.25)) fail("r_min must lie in (0, 1/4)");
  if (!(r_max >= 2.0) || !std::isfinite(r_max)) fail("r_max must be finite and >= 2");
  if (grid_size < 16) fail("grid_size must be at least 16");
  if (max_iterations < 1) fail("max_iterations must be positive");
  if (continuation_steps < 1) fail("continuation_steps must be positive");
}

RadialGrid::RadialGrid(double r_min, double r_max, int size) {
  if (!(r_min > 0.0) || !(r_max > r_min) || size < 3) {
    throw Error(ErrorKind::InvalidConfig, "radial grid needs 0 < r_min < r_max and >= 3 points");
  }
  log_min_ = std::log(r_min);
  log_step_ = (std::log(r_max) - log_min_) / (size - 1);
  points_.resize(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) points_[k] = std::exp(log_min_ + k * log_step_);
  points_.front() = r_min;
  points_.back() = r_max;
}

RadialGrid RadialGrid::scaled(double factor) const {
  RadialGrid out;
  out.points_ = points_;
  for (double& p : out.points_) p *= factor;
  out.log_min_ = log_min_ + std::log(factor);
  out.log_step_ = log_step_;
  return out;
}

namespace {

// Unknowns are the independent rows v_0..v_{m-1}; the full vector is
// u_q = v_q (q < m), u_{K-1-q} = -v_q, middle row zero for odd K.
struct Reduced {
  int K;
  int m;
  double exponent;                 // 2 + 2/K: weight r^{2+2/K} in log-radius form
  std::vector<double> two_alpha;   // 2 alpha_{K,i+1} for the independent rows

  explicit Reduced(int rank) : K(rank), m(rank / 2), exponent(2.0 + 2.0 / rank) {
    for (int i = 0; i < m; ++i) two_alpha.push_back((2.0 * i + 1.0 - K) / K);
  }

  void expand(const double* v, double* u) const {
    for (int q = 0; q < K; ++q) u[q] = 0.0;
    for (int i = 0; i < m; ++i) {
      u[i] = v[i];
      u[K - 1 - i] = -v[i];
    }
  }

  // Which independent unknown drives full row q, and with what sign.
  bool source(int q, int& j, double& sign) const {
    if (q < m) { j = q; sign = 1.0; return true; }
    if (q >= K - m) { j = K - 1 - q; sign = -1.0; return true; }
    return false;
  }

  // Linearization of the cyclic exponentials at u = 0, restricted to the
  // symmetric sector.
  Eigen::MatrixXd linear_operator() const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const int neighbours[2] = {(i + 1) % K, (i - 1 + K) % K};
      int j;
      double sign;
      if (source(i, j, sign)) L(i, j) += 2.0 * sign;
      for (int q : neighbours) {
        if (source(q, j, sign)) L(i, j) -= sign;
      }
    }
    return L;
  }
};

// Forcing G = 4 t^2 r^{2+2/K} [lambda F(u) + (1 - lambda) L v] in the log-radius
// form u_ss = G, and its Jacobian with respect to v (row-major m x m).
void forcing(const Reduced& sys, const Eigen::MatrixXd& L, double log_weight, const double* v,
             double lambda, double* G, double* dG) {
  double u[64];
  sys.expand(v, u);
  const int m = sys.m;
  const int K = sys.K;
  const double weight = std::exp(log_weight);
  for (int i = 0; i < m; ++i) {
    const int ip = (i + 1) % K;
    const int im = (i - 1 + K) % K;
    const double ep = std::exp(log_weight + u[i] - u[ip]);
    const double em = std::exp(log_weight + u[im] - u[i]);
    double linear = 0.0;
    for (int j = 0; j < m; ++j) linear += L(i, j) * v[j];
    G[i] = lambda * (ep - em) + (1.0 - lambda) * weight * linear;
    if (dG == nullptr) continue;
    for (int j = 0; j < m; ++j) dG[i * m + j] = (1.0 - lambda) * weight * L(i, j);
    const std::pair<int, double> partials[3] = {{i, ep + em}, {ip, -ep}, {im, -em}};
    for (const auto& [q, d] : partials) {
      int j;
      double sign;
      if (sys.source(q, j, sign)) dG[i * m + j] += lambda * d * sign;
    }
  }
}

struct FarField {
  Eigen::MatrixXd modes;      // orthonormal eigenvectors of L (columns)
  std::vector<double> rates;  // sqrt of eigenvalues
  Eigen::MatrixXd robin;      // v_s = robin * v at r_max
};

FarField far_field(const Reduced& sys, const Eigen::MatrixXd& L, double zeta_max) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  FarField ff;
  ff.modes = eig.eigenvectors();
  Eigen::VectorXd d(sys.m);
  const double p = (sys.K + 1.0) / sys.K;
  for (int k = 0; k < sys.m; ++k) {
    const double c = std::sqrt(eig.eigenvalues()(k));
    ff.rates.push_back(c);
    const double x = c * zeta_max;
    d(k) = -p * x * bessel_k1_scaled(x) / bessel_k0_scaled(x);
  }
  ff.robin = ff.modes * d.asDiagonal() * ff.modes.transpose();
  return ff;
}

double zeta_coefficient(int K) { return 2.0 * K / (K + 1.0); }

// Monomial coefficients of the degree-7 Hermite basis on [0, 1], ordered
// (p, p', p'', p''') at 0 followed by the same at 1.
constexpr double kHermite7[8][8] = {
    {1, 0, 0, 0, -35, 84, -70, 20},
    {0, 1, 0, 0, -20, 45, -36, 10},
    {0, 0, 0.5, 0, -5, 10, -7.5, 2},
    {0, 0, 0, 1.0 / 6, -2.0 / 3, 1, -2.0 / 3, 1.0 / 6},
    {0, 0, 0, 0, 35, -84, 70, -20},
    {0, 0, 0, 0, -15, 39, -34, 10},
    {0, 0, 0, 0, 2.5, -7, 6.5, -2},
    {0, 0, 0, 0, -1.0 / 6, 0.5, -0.5, 1.0 / 6},
};

// Discrete system on a log-uniform grid. Interior rows use the fourth-order
// compact (Numerov) stencil; boundary rows use fourth-order one-sided Taylor
// closures of the Robin conditions.
class Assembler {
 public:
  Assembler(const Reduced& sys, const RadialGrid& grid, double log_t2, const Eigen::MatrixXd& L,
            const Eigen::MatrixXd& robin)
      : sys_(sys), grid_(grid), log_t2_(log_t2), L_(L), robin_(robin) {}

  int size() const { return grid_.size() * sys_.m; }

  void evaluate(const Eigen::VectorXd& v, double lambda, Eigen::VectorXd& R,
                Eigen::SparseMatrix<double>* J) const {
    const int n = grid_.size();
    const int m = sys_.m;
    const double h = grid_.log_step();
    const double h2 = h * h;
    G_.resize(static_cast<std::size_t>(n * m));
    dG_.resize(static_cast<std::size_t>(n * m * m));
    for (int k = 0; k < n; ++k) {
      const double s = grid_.log_min() + k * h;
      const double log_weight = std::log(4.0) + log_t2_ + sys_.exponent * s;
      forcing(sys_, L_, log_weight, v.data() + k * m, lambda, &G_[k * m],
              J ? &dG_[k * m * m] : nullptr);
    }
    auto V = [&](int k, int i) { return v(k * m + i); };
    auto G = [&](int k, int i) { return G_[k * m + i]; };
    R.resize(n * m);
    for (int i = 0; i < m; ++i) {
      R(i) = (V(1, i) - V(0, i) - h * sys_.two_alpha[i]) / h2 -
             (7.0 * G(0, i) + 6.0 * G(1, i) - G(2, i)) / 24.0;
      for (int k = 1; k < n - 1; ++k) {
        R(k * m + i) = (V(k + 1, i) - 2.0 * V(k, i) + V(k - 1, i)) / h2 -
                       (G(k + 1, i) + 10.0 * G(k, i) + G(k - 1, i)) / 12.0;
      }
      double slope = 0.0;
      for (int j = 0; j < m; ++j) slope += robin_(i, j) * V(n - 1, j);
      R((n - 1) * m + i) = (V(n - 2, i) - V(n - 1, i) + h * slope) / h2 -
                           (7.0 * G(n - 1, i) + 6.0 * G(n - 2, i) - G(n - 3, i)) / 24.0;
    }
    if (J == nullptr) return;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n * m * m * 3 + 8 * m * m));
    auto dG = [&](int k, int i, int j) { return dG_[(k * m + i) * m + j]; };
    auto put = [&](int row, int k, int j, double value) {
      trips.emplace_back(row, k * m + j, value);
    };
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double delta = i == j ? 1.0 : 0.0;
        put(i, 0, j, -delta / h2 - 7.0 * dG(0, i, j) / 24.0);
        put(i, 1, j, delta / h2 - 6.0 * dG(1, i, j) / 24.0);
        put(i, 2, j, dG(2, i, j) / 24.0);
        for (int k = 1; k < n - 1; ++k) {
          const int row = k * m + i;
          put(row, k - 1, j, delta / h2 - dG(k - 1, i, j) / 12.0);
          put(row, k, j, -2.0 * delta / h2 - 10.0 * dG(k, i, j) / 12.0);
          put(row, k + 1, j, delta / h2 - dG(k + 1, i, j) / 12.0);
        }
        const int row = (n - 1) * m + i;
        put(row, n - 1, j, (-delta + h * robin_(i, j)) / h2 - 7.0 * dG(n - 1, i, j) / 24.0);
        put(row, n - 2, j, delta / h2 - 6.0 * dG(n - 2, i, j) / 24.0);
        put(row, n - 3, j, dG(n - 3, i, j) / 24.0);
      }
    }
    J->resize(n * m, n * m);
    J->setFromTriplets(trips.begin(), trips.end());
    J->makeCompressed();
  }

 private:
  const Reduced& sys_;
  const RadialGrid& grid_;
  double log_t2_;
  const Eigen::MatrixXd& L_;
  const Eigen::MatrixXd& robin_;
  mutable std::vector<double> G_;
  mutable std::vector<double> dG_;
};

struct NewtonOutcome {
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

NewtonOutcome newton(const Assembler& system, Eigen::VectorXd& v, double lambda,
                     const SolverConfig& config) {
  Eigen::VectorXd R;
  Eigen::VectorXd trial_R;
  Eigen::SparseMatrix<double> J;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  NewtonOutcome out;
  system.evaluate(v, lambda, R, &J);
  for (int it = 0; it < config.max_iterations; ++it) {
    out.iterations = it;
    out.residual = R.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(out.residual)) return out;
    if (out.residual <= config.tolerance) {
      out.converged = true;
      return out;
    }
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) return out;
    const Eigen::VectorXd step = lu.solve(-R);

    // Backtracking on the Euclidean residual norm.
    const double norm0 = R.norm();
    double damping = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Eigen::VectorXd trial = v + damping * step;
      system.evaluate(trial, lambda, trial_R, nullptr);
      const double norm1 = trial_R.norm();
      if (std::isfinite(norm1) && norm1 <= (1.0 - 1e-4 * damping) * norm0) {
        v = trial;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) {
      // Round-off floor: the full step no longer reduces the residual.
      out.residual = R.lpNorm<Eigen::Infinity>();
      out.converged = out.residual <= config.tolerance;
      return out;
    }
    system.evaluate(v, lambda, R, &J);
  }
  out.residual = R.lpNorm<Eigen::Infinity>();
  out.converged = out.residual <= config.tolerance;
  return out;
}

}  // namespace

struct TodaSolution::Data {
  int K = 0;
  int m = 0;
  double t = 1.0;
  SolverConfig config;
  RadialGrid grid;
  std::vector<std::vector<double>> u;    // full rows
  std::vector<std::vector<double>> us;   // d/ds, s = log r
  std::vector<std::vector<double>> uss;  // d^2/ds^2
  std::vector<std::vector<double>> usss; // d^3/ds^3 (differentiated equation)
  double residual_norm = 0.0;
  Eigen::MatrixXd linear;
  Eigen::MatrixXd modes;
  std::vector<double> rates;
  Eigen::VectorXd tail_amplitude;

  Data(int rank, const SolverConfig& cfg)
      : K(rank), m(rank / 2), config(cfg), grid(cfg.r_min, cfg.r_max, cfg.grid_size) {}
};

namespace {

std::vector<std::vector<double>> mirror_rows(const Reduced& sys,
                                             const std::vector<std::vector<double>>& reduced) {
  const std::size_t n = reduced.empty() ? 0 : reduced.front().size();
  std::vector<std::vector<double>> full(static_cast<std::size_t>(sys.K), std::vector<double>(n, 0.0));
  for (int i = 0; i < sys.m; ++i) {
    full[i] = reduced[i];
    for (std::size_t k = 0; k < n; ++k) full[sys.K - 1 - i][k] = -reduced[i][k];
  }
  return full;
}

}  // namespace

TodaSolution::TodaSolution(int K, const SolverConfig& config,
                           const std::vector<std::vector<double>>& u, double residual_norm) {
  if (K < 2) throw Error(ErrorKind::InvalidConfig, "Toda rank K must be >= 2");
  config.validate();
  auto data = std::make_shared<Data>(K, config);
  const Reduced sys(K);
  const int n = data->grid.size();
  const int m = sys.m;
  if (static_cast<int>(u.size()) < m) {
    throw Error(ErrorKind::InvalidConfig, "Toda solution needs floor(K/2) independent rows");
  }
  std::vector<std::vector<double>> v(u.begin(), u.begin() + m);
  for (const auto& row : v) {
    if (static_cast<int>(row.size()) != n) {
      throw Error(ErrorKind::InvalidConfig, "Toda row length does not match grid size");
    }
  }
  data->residual_norm = residual_norm;
  data->u = mirror_rows(sys, v);

  const Eigen::MatrixXd L = sys.linear_operator();
  const FarField ff = far_field(sys, L, zeta_coefficient(K) * std::pow(config.r_max, (K + 1.0) / K));
  data->linear = L;
  data->modes = ff.modes;
  data->rates = ff.rates;

  // Nodal second derivatives from the equation, first derivatives from the
  // fourth-order formula consistent with the compact stencil.
  const double h = data->grid.log_step();
  std::vector<std::vector<double>> vs(m, std::vector<double>(n));
  std::vector<std::vector<double>> vss(m, std::vector<double>(n));
  std::vector<double> node(m), g(m);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) node[i] = v[i][k];
    const double s = data->grid.log_min() + k * h;
    forcing(sys, L, std::log(4.0) + sys.exponent * s, node.data(), 1.0, g.data(), nullptr);
    for (int i = 0; i < m; ++i) vss[i][k] = g[i];
  }
  for (int i = 0; i < m; ++i) {
    const auto& y = v[i];
    const auto& G = vss[i];
    vs[i][0] = (y[1] - y[0]) / h - h * (7.0 * G[0] + 6.0 * G[1] - G[2]) / 24.0;
    for (int k = 1; k < n - 1; ++k) {
      vs[i][k] = (y[k + 1] - y[k - 1]) / (2.0 * h) - h * (G[k + 1] - G[k - 1]) / 12.0;
      // Sixth order: cancel the (7/360) h^4 u^(5) term, u^(5) = G''' by differences.
      if (k >= 2 && k + 2 < n) {
        vs[i][k] += 7.0 * h / 720.0 * (G[k + 2] - 2.0 * G[k + 1] + 2.0 * G[k - 1] - G[k - 2]);
      }
    }
    vs[i][n - 1] = (y[n - 1] - y[n - 2]) / h + h * (7.0 * G[n - 1] + 6.0 * G[n - 2] - G[n - 3]) / 24.0;
  }
  // u_sss = d/ds G(s, u(s)) = (2 + 2/K) G + (dG/du) u_s.
  std::vector<std::vector<double>> vsss(m, std::vector<double>(n));
  std::vector<double> jac(static_cast<std::size_t>(m * m));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) node[i] = v[i][k];
    const double s = data->grid.log_min() + k * h;
    forcing(sys, L, std::log(4.0) + sys.exponent * s, node.data(), 1.0, g.data(), jac.data());
    for (int i = 0; i < m; ++i) {
      double d3 = sys.exponent * g[i];
      for (int j = 0; j < m; ++j) d3 += jac[i * m + j] * vs[j][k];
      vsss[i][k] = d3;
    }
  }
  data->us = mirror_rows(sys, vs);
  data->uss = mirror_rows(sys, vss);
  data->usss = mirror_rows(sys, vsss);

  Eigen::VectorXd last(m);
  for (int i = 0; i < m; ++i) last(i) = v[i][n - 1];
  data->tail_amplitude = ff.modes.transpose() * last;
  data_ = std::move(data);
}

TodaSolution::TodaSolution(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

int TodaSolution::rank() const noexcept { return data_->K; }
double TodaSolution::t() const noexcept { return data_->t; }
const RadialGrid& TodaSolution::grid() const noexcept { return data_->grid; }
const SolverConfig& TodaSolution::config() const noexcept { return data_->config; }
double TodaSolution::residual_norm() const noexcept { return data_->residual_norm; }
std::span<const double> TodaSolution::decay_rates() const { return data_->rates; }

std::span<const double> TodaSolution::u(int row) const {
  if (row < 0 || row >= data_->K) throw Error(ErrorKind::IndexOutOfRange, "Toda row out of range");
  return data_->u[static_cast<std::size_t>(row)];
}

double TodaSolution::zeta(double r) const {
  const int K = data_->K;
  return data_->t * zeta_coefficient(K) * std::pow(r, (K + 1.0) / K);
}

TodaSolution TodaSolution::rescaled(double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "rescaling parameter t must be positive");
  auto data = std::make_shared<Data>(*data_);
  const double factor = std::pow(t / data_->t, data_->K / (data_->K + 1.0));
  data->grid = data_->grid.scaled(1.0 / factor);
  data->t = t;
  return TodaSolution(std::move(data));
}

RadialJet TodaSolution::jet(double r) const {
  const Data& d = *data_;
  const int K = d.K;
  const int m = d.m;
  const int n = d.grid.size();
  if (!(r >= d.grid.r_min() * (1.0 - 1e-12))) {
    throw Error(ErrorKind::BelowGrid, "radius " + std::to_string(r) + " is below the Toda grid");
  }
  std::vector<double> val(m), ds(m), dss(m);
  const double s = std::log(r);
  const double h = d.grid.log_step();

  if (r > d.grid.r_max()) {
    const double p = (K + 1.0) / K;
    const double zeta_r = zeta(r);
    const double zeta_max = zeta(d.grid.r_max());
    Eigen::VectorXd w(m), ws(m), wss(m);
    for (int k = 0; k < m; ++k) {
      const double x = d.rates[k] * zeta_r;
      const double xm = d.rates[k] * zeta_max;
      const double scale = std::exp(xm - x) / bessel_k0_scaled(xm);
      const double e = bessel_k0_scaled(x) * scale;
      w(k) = d.tail_amplitude(k) * e;
      ws(k) = -d.tail_amplitude(k) * p * x * bessel_k1_scaled(x) * scale;
      wss(k) = d.tail_amplitude(k) * p * p * x * x * e;
    }
    const Eigen::VectorXd a = d.modes * w, b = d.modes * ws, c = d.modes * wss;
    for (int i = 0; i < m; ++i) {
      val[i] = a(i);
      ds[i] = b(i);
      dss[i] = c(i);
    }
  } else {
    int k = static_cast<int>(std::floor((s - d.grid.log_min()) / h));
    k = std::clamp(k, 0, n - 2);
    const int nearest = (d.grid[k + 1] == r) ? k + 1 : k;
    if (d.grid[nearest] == r) {
      for (int i = 0; i < m; ++i) {
        val[i] = d.u[i][nearest];
        ds[i] = d.us[i][nearest];
        dss[i] = d.uss[i][nearest];
      }
    } else {
      // Septic Hermite on [s_k, s_{k+1}] through u and its first three
      // s-derivatives for the value and slope; u_ss is then taken from the
      // equation at the interpolated values, which is far more accurate than
      // differentiating the interpolant twice.
      const double tau = (s - (d.grid.log_min() + k * h)) / h;
      double H[8], D1[8];
      for (int q = 0; q < 8; ++q) {
        double y = 0.0, y1 = 0.0;
        for (int e = 7; e >= 0; --e) {
          y = y * tau + kHermite7[q][e];
          if (e > 0) y1 = y1 * tau + e * kHermite7[q][e];
        }
        H[q] = y;
        D1[q] = y1;
      }
      for (int i = 0; i < m; ++i) {
        const double c[8] = {d.u[i][k],         h * d.us[i][k],         h * h * d.uss[i][k],
                             h * h * h * d.usss[i][k], d.u[i][k + 1],    h * d.us[i][k + 1],
                             h * h * d.uss[i][k + 1],  h * h * h * d.usss[i][k + 1]};
        double y = 0, y1 = 0;
        for (int q = 0; q < 8; ++q) {
          y += c[q] * H[q];
          y1 += c[q] * D1[q];
        }
        val[i] = y;
        ds[i] = y1 / h;
      }
      const Reduced sys(K);
      const double log_weight = std::log(4.0) + 2.0 * std::log(d.t) + sys.exponent * s;
      forcing(sys, d.linear, log_weight, val.data(), 1.0, dss.data(), nullptr);
    }
  }

  RadialJet jet;
  jet.value.assign(K, 0.0);
  jet.d1.assign(K, 0.0);
  jet.d2.assign(K, 0.0);
  jet.laplacian.assign(K, 0.0);
  const double inv_r2 = 1.0 / (r * r);
  for (int i = 0; i < m; ++i) {
    const double d1 = ds[i] / r;
    const double d2 = (dss[i] - ds[i]) * inv_r2;
    const double lap = dss[i] * inv_r2;
    jet.value[i] = val[i];
    jet.d1[i] = d1;
    jet.d2[i] = d2;
    jet.laplacian[i] = lap;
    jet.value[K - 1 - i] = -val[i];
    jet.d1[K - 1 - i] = -d1;
    jet.d2[K - 1 - i] = -d2;
    jet.laplacian[K - 1 - i] = -lap;
  }
  return jet;
}

TodaSolution solve_toda(int K, const SolverConfig& config) {
  if (K < 2) throw Error(ErrorKind::InvalidConfig, "Toda rank K must be >= 2");
  if (K > 60) throw Error(ErrorKind::InvalidConfig, "Toda rank K above 60 is not supported");
  config.validate();

  const Reduced sys(K);
  const RadialGrid grid(config.r_min, config.r_max, config.grid_size);
  const Eigen::MatrixXd L = sys.linear_operator();
  const double zc = zeta_coefficient(K);
  const double p = (K + 1.0) / K;
  const FarField ff = far_field(sys, L, zc * std::pow(config.r_max, p));
  const Assembler system(sys, grid, 0.0, L, ff.robin);

  // Initial guess: log singularity at 0 blended into Bessel decay,
  // -(2 alpha / p) K0(c zeta) ~ 2 alpha log r near 0.
  const int n = grid.size();
  const int m = sys.m;
  const double c_min = *std::min_element(ff.rates.begin(), ff.rates.end());
  Eigen::VectorXd guess(n * m);
  for (int k = 0; k < n; ++k) {
    const double x = c_min * zc * std::pow(grid[k], p);
    const double k0 = bessel_k0(x);
    for (int i = 0; i < m; ++i) guess(k * m + i) = -(sys.two_alpha[i] / p) * k0;
  }

  Eigen::VectorXd v = guess;
  NewtonOutcome outcome = newton(system, v, 1.0, config);
  if (!outcome.converged) {
    // Homotopy from the linearized problem (lambda = 0) to the full one.
    v = guess;
    double lambda = 0.0;
    NewtonOutcome start = newton(system, v, 0.0, config);
    if (!start.converged) {
      throw Error(ErrorKind::NonConvergence, "linearized Toda problem did not converge");
    }
    double step = 1.0 / config.continuation_steps;
    while (lambda < 1.0) {
      const double target = std::min(1.0, lambda + step);
      Eigen::VectorXd trial = v;
      const NewtonOutcome stage = newton(system, trial, target, config);
      if (stage.converged) {
        v = trial;
        lambda = target;
        outcome = stage;
        step *= 1.5;
      } else {
        step *= 0.5;
        if (step < 1e-3 / config.continuation_steps) {
          throw Error(ErrorKind::NonConvergence,
                      "Toda continuation stalled at lambda = " + std::to_string(lambda) +
                          " (residual " + std::to_string(stage.residual) + ")");
        }
      }
    }
  }
  if (!outcome.converged) {
    throw Error(ErrorKind::NonConvergence,
                "Toda Newton iteration stopped at residual " + std::to_string(outcome.residual));
  }

  std::vector<std::vector<double>> rows(m, std::vector<double>(n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < m; ++i) rows[i][k] = v(k * m + i);
  return TodaSolution(K, config, rows, outcome.residual);
}

double toda_residual(const TodaSolution& solution) {
  const int K = solution.rank();
  const Reduced sys(K);
  const RadialGrid& grid = solution.grid();
  const Eigen::MatrixXd L = sys.linear_operator();
  const FarField ff = far_field(sys, L, solution.zeta(grid.r_max()));
  const Assembler system(sys, grid, 2.0 * std::log(solution.t()), L, ff.robin);
  const int n = grid.size();
  Eigen::VectorXd v(n * sys.m);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < sys.m; ++i) v(k * sys.m + i) = solution.u(i)[k];
  Eigen::VectorXd R;
  system.evaluate(v, 1.0, R, nullptr);
  return R.lpNorm<Eigen::Infinity>();
}

double painleve_residual(const TodaSolution& solution) {
  if (solution.rank() != 2) {
    throw Error(ErrorKind::WrongRank, "painleve_residual requires a rank-2 solution");
  }
  const RadialGrid& grid = solution.grid();
  const auto u = solution.u(0);
  const double h = grid.log_step();
  const double t2 = solution.t() * solution.t();
  const int n = grid.size();
  // u_ss = 8 t^2 r^3 sinh(2u) in log-radius form.
  std::vector<double> P(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double r = grid[k];
    P[k] = 8.0 * t2 * r * r * r * std::sinh(2.0 * u[k]);
  }
  double worst = 0.0;
  for (int k = 1; k < n - 1; ++k) {
    const double lhs = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / (h * h);
    const double rhs = (P[k + 1] + 10.0 * P[k] + P[k - 1]) / 12.0;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

RadialJet jet_rescaled(const TodaSolution& solution, double t, double r) {
  if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "t must be positive");
  if (t == solution.t()) return solution.jet(r);
  const int K = solution.rank();
  const double factor = std::pow(t / solution.t(), K / (K + 1.0));
  RadialJet jet = solution.jet(factor * r);
  for (int i = 0; i < K; ++i) {
    jet.d1[i] *= factor;
    jet.d2[i] *= factor * factor;
    jet.laplacian[i] *= factor * factor;
  }
  return jet;
}

std::vector<double> evaluate_rescaled(const TodaSolution& solution, double t, double r) {
  return jet_rescaled(solution, t, r).value;
}

double toda_linear_constant(int K) {
  const double s = std::sin(std::numbers::pi / K);
  return 4.0 * s * s;
}

AsymptoticReport asymptotic_check(const TodaSolution& solution, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::DomainError, "epsilon must lie in (0, 1)");
  }
  const RadialGrid& grid = solution.grid();
  const int n = grid.size();
  const int K = solution.rank();
  std::vector<double> norm2(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < K; ++i) norm2[k] += solution.u(i)[k] * solution.u(i)[k];
  if (std::sqrt(norm2.back()) >= epsilon) {
    throw Error(ErrorKind::NotDecayed, "||u(r_max)|| has not dropped below epsilon");
  }
  int first = n - 1;
  while (first > 0 && std::sqrt(norm2[first - 1]) < epsilon) --first;

  AsymptoticReport report;
  report.epsilon = epsilon;
  report.r_epsilon = grid[first];
  report.c_epsilon = 1.0 / (1.0 - epsilon);
  report.c_rank = toda_linear_constant(K);
  report.rate = 1.0 / std::sqrt(2.0 * report.c_epsilon * report.c_rank);
  const double x_eps = report.rate * solution.zeta(report.r_epsilon);
  report.min_log_margin = std::numeric_limits<double>::infinity();
  report.holds = true;
  for (int k = first + 1; k < n; ++k) {
    if (norm2[k] == 0.0) continue;
    const double x = report.rate * solution.zeta(grid[k]);
    const double log_bound = 2.0 * std::log(epsilon) + std::log(bessel_k0_scaled(x)) - x -
                             std::log(bessel_k0_scaled(x_eps)) + x_eps;
    const double margin = log_bound - std::log(norm2[k]);
    report.min_log_margin = std::min(report.min_log_margin, margin);
    ++report.points_checked;
    if (margin < 0.0) report.holds = false;
  }
  return report;
}

}  // namespace hglue
