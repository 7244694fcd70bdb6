#include "dgn/diffusion.hpp"

#include "dgn/spectral.hpp"

#include <cmath>

namespace dgn {

namespace {

void require_no_isolated(const Graph& g, const char* what) {
  for (Index i = 0; i < g.node_count(); ++i) {
    if (g.degree(i) == 0) throw ValidationError(std::string(what) + ": node " + std::to_string(i) + " is isolated");
  }
}

Eigen::MatrixXd random_walk(const Graph& g) {
  const Index n = g.node_count();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double inv = 1.0 / static_cast<double>(g.degree(i));
    for (const Index j : g.neighbors(i)) w(i, j) = inv;
  }
  return w;
}

}  // namespace

HeatKernel discrete_heat_kernel(const Graph& g, Index k) {
  if (k < 0) throw ValidationError("discrete heat kernel: k must be >= 0");
  require_no_isolated(g, "discrete heat kernel");
  const Eigen::MatrixXd w = random_walk(g);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(g.node_count(), g.node_count());
  for (Index s = 0; s < k; ++s) p = (p * w).eval();
  HeatKernel h;
  h.matrix = std::move(p);
  h.discrete = true;
  h.steps = k;
  return h;
}

HeatKernel continuous_heat_kernel(const Graph& g, double t, HeatMethod method) {
  if (!(t >= 0) || !std::isfinite(t)) throw ValidationError("continuous heat kernel: t must be finite and >= 0");
  require_no_isolated(g, "continuous heat kernel");
  HeatKernel h;
  h.time = t;
  if (method == HeatMethod::eigen) {
    h.matrix = DiffusionModel(g).kernel(t);
    return h;
  }
  // Poisson series: each term weight e^-t t^k / k! is carried in log space so
  // large t neither underflows the first weight nor overflows t^k.
  const Index n = g.node_count();
  const Eigen::MatrixXd w = random_walk(g);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  double mass = 0.0;
  for (Index k = 0;; ++k) {
    const double log_weight = -t + (k == 0 ? 0.0 : static_cast<double>(k) * std::log(t)) - std::lgamma(k + 1.0);
    const double weight = std::exp(log_weight);
    q += weight * p;
    mass += weight;
    if (static_cast<double>(k) > t && (1.0 - mass < 1e-17 || weight < 1e-300)) break;
    if (k > 100000) throw NumericalError("heat kernel series did not converge");
    p = (p * w).eval();
  }
  h.matrix = std::move(q);
  return h;
}

DiffusionModel::DiffusionModel(const Graph& g) : graph_(g) {
  require_no_isolated(g, "diffusion");
  degrees_ = degree_vector(g);
  mean_degree_ = degrees_.mean();
  const auto comps = connected_components(g);
  components_ = comps.component_count;
  labels_ = comps.labels;
  const SymmetricEigenResult eig = dense_symmetric_eigen(laplacian(g, LaplacianKind::symmetric_normalized));
  lambda_ = eig.values;
  u_ = eig.vectors;
  for (Index c = 0; c < u_.cols(); ++c) canonicalize_sign(u_.col(c));
  const Eigen::VectorXd inv_sqrt = degrees_.cwiseSqrt().cwiseInverse();
  psi_ = std::sqrt(mean_degree_) * (inv_sqrt.asDiagonal() * u_);
}

Eigen::MatrixXd DiffusionModel::kernel(double t) const {
  const Eigen::VectorXd sq = degrees_.cwiseSqrt();
  const Eigen::VectorXd decay = (-t * lambda_.array()).exp().matrix();
  const Eigen::MatrixXd left = sq.cwiseInverse().asDiagonal() * u_ * decay.asDiagonal();
  return left * (u_.transpose() * sq.asDiagonal());
}

DiffusionDistance DiffusionModel::distance(double t, Index x, Index y) const {
  const Index n = graph_.node_count();
  if (x < 0 || y < 0 || x >= n || y >= n) throw ValidationError("diffusion distance: node out of range");
  const Eigen::VectorXd sq = degrees_.cwiseSqrt();
  const Eigen::VectorXd decay = (-t * lambda_.array()).exp().matrix();
  // Rows x and y of the kernel only.
  const Eigen::RowVectorXd ux = u_.row(x).cwiseProduct(decay.transpose()) / sq[x];
  const Eigen::RowVectorXd uy = u_.row(y).cwiseProduct(decay.transpose()) / sq[y];
  const Eigen::RowVectorXd diff = ((ux - uy) * u_.transpose()).cwiseProduct(sq.transpose());
  DiffusionDistance d;
  d.unweighted = diff.norm();
  d.value = std::sqrt((diff.array().square() * (mean_degree_ / degrees_.transpose().array())).sum());
  const Eigen::VectorXd delta = psi_.row(x) - psi_.row(y);
  d.spectral = std::sqrt((((-2.0 * t) * lambda_.array()).exp() * delta.array().square()).sum());
  d.cross_component = labels_[x] != labels_[y];
  return d;
}

double DiffusionModel::scaled_squared_distance(double t, Index x, Index y) const {
  double total = 0.0;
  for (Index i = 1; i < lambda_.size(); ++i) {
    const double delta = psi_(x, i) - psi_(y, i);
    total += std::exp(-2.0 * t * (lambda_[i] - lambda_[1])) * delta * delta;
  }
  return total;
}

DiffusionDistance diffusion_distance(const Graph& g, double t, Index x, Index y) {
  if (!(t >= 0) || !std::isfinite(t)) throw ValidationError("diffusion distance: t must be finite and >= 0");
  return DiffusionModel(g).distance(t, x, y);
}

Index gradient_step(const Graph& g, const Eigen::VectorXd& phi, Index x) {
  if (phi.size() != g.node_count()) throw ValidationError("gradient_step: phi length mismatch");
  if (x < 0 || x >= g.node_count()) throw ValidationError("gradient_step: node out of range");
  const auto nb = g.neighbors(x);
  if (nb.empty()) throw ValidationError("gradient_step: node " + std::to_string(x) + " is isolated");
  Index best = nb.front();
  for (const Index z : nb) {
    if (phi[z] - phi[x] > phi[best] - phi[x]) best = z;
  }
  return best;
}

ReductionConstant reduction_constant(const DiffusionModel& model, Index x, Index x_prime, Index y) {
  ReductionConstant r;
  const Eigen::VectorXd& lambda = model.eigenvalues();
  const Index n = lambda.size();
  if (!model.connected()) {
    r.reason = "graph is not connected";
    return r;
  }
  if (n < 3 || !(lambda[2] - lambda[1] > 1e-8 * std::max(1.0, lambda[2]))) {
    r.reason = "lambda_1 is not simple";
    return r;
  }
  const Eigen::MatrixXd& psi = model.psi();
  if (!(psi(x, 1) < psi(y, 1))) {
    r.reason = "phi_1(x) < phi_1(y) does not hold";
    return r;
  }
  const double a = psi(x, 1) - psi(y, 1), b = psi(x_prime, 1) - psi(y, 1);
  r.numerator = a * a - b * b;
  if (!(r.numerator > 0)) {
    r.reason = "(phi_1(x') - phi_1(y))^2 >= (phi_1(x) - phi_1(y))^2";
    return r;
  }
  double s = 0.0;
  for (Index i = 2; i < n; ++i) {
    const double p = psi(x_prime, i) - psi(y, i), q = psi(x, i) - psi(y, i);
    s += std::abs(p * p - q * q);
  }
  r.higher_mode_sum = s;
  r.hypothesis_holds = true;
  r.value = s == 0.0 ? -std::numeric_limits<double>::infinity()
                     : std::log(r.numerator / s) / (2.0 * (lambda[1] - lambda[2]));
  return r;
}

GradientStepReport certify_gradient_steps(const Graph& g, const GradientStepOptions& options, std::string name) {
  GradientStepReport rep;
  rep.graph_name = std::move(name);
  rep.node_count = g.node_count();
  const DiffusionModel model(g);
  const Eigen::VectorXd& lambda = model.eigenvalues();
  if (!model.connected()) {
    rep.eligible = false;
    rep.skip_reason = "graph is not connected";
    return rep;
  }
  if (lambda.size() < 3 || !(lambda[2] - lambda[1] > 1e-8 * std::max(1.0, lambda[2]))) {
    rep.eligible = false;
    rep.skip_reason = "lambda_1 is not simple";
    return rep;
  }
  const Eigen::VectorXd phi = model.psi().col(1);
  const Index n = g.node_count();
  for (Index x = 0; x < n; ++x) {
    const Index xp = gradient_step(g, phi, x);
    for (Index y = 0; y < n; ++y) {
      if (!(phi[x] < phi[y])) continue;
      const ReductionConstant c = reduction_constant(model, x, xp, y);
      if (!c.hypothesis_holds || c.numerator <= options.numerator_floor) {
        ++rep.pairs_skipped;
        continue;
      }
      ++rep.pairs_checked;
      PairReport pr;
      pr.x = x;
      pr.y = y;
      pr.x_prime = xp;
      pr.c = c.value;
      const double lo = std::max(c.value, 0.0) + options.t_offset;
      const double hi = 4.0 * std::max(c.value, 1.0);
      for (int k = 0; k < options.t_points; ++k) {
        const double t = options.t_points == 1 ? lo : lo + (hi - lo) * k / (options.t_points - 1);
        const DiffusionDistance dxy = model.distance(t, x, y);
        const DiffusionDistance dpy = model.distance(t, xp, y);
        DiffusionSample s;
        s.t = t;
        s.d_xy = dxy.value;
        s.d_xpy = dpy.value;
        s.row_spectral_gap = std::max(std::abs(dxy.value - dxy.spectral), std::abs(dpy.value - dpy.spectral));
        s.reduced = model.scaled_squared_distance(t, xp, y) < model.scaled_squared_distance(t, x, y);
        rep.max_distance_disagreement = std::max(rep.max_distance_disagreement, s.row_spectral_gap);
        if (!s.reduced || s.row_spectral_gap >= options.agreement_tol) pr.passed = false;
        pr.samples.push_back(s);
      }
      if (!pr.passed) ++rep.failures;
      if (options.keep_pairs || !pr.passed) rep.pairs.push_back(std::move(pr));
    }
  }
  return rep;
}

}  // namespace dgn
