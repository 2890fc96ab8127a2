#include "explore/slam.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace explore {

namespace {

int variable_dim(const FactorGraph& g) {
  return 3 * g.num_poses() + 2 * g.num_landmarks();
}

Eigen::VectorXd flatten(const FactorGraph& g, const Estimate& e) {
  Eigen::VectorXd x(variable_dim(g));
  for (int i = 0; i < g.num_poses(); ++i) {
    x.segment<3>(3 * i) << e.poses[i].x, e.poses[i].y, e.poses[i].theta;
  }
  const int base = 3 * g.num_poses();
  for (int s = 0; s < g.num_landmarks(); ++s) {
    x.segment<2>(base + 2 * s) = e.landmarks.at(g.landmark_ids()[s]);
  }
  return x;
}

Estimate unflatten(const FactorGraph& g, const Eigen::VectorXd& x,
                   const Estimate& like) {
  Estimate e = like;
  for (int i = 0; i < g.num_poses(); ++i) {
    e.poses[i] = {x(3 * i), x(3 * i + 1), wrap_angle(x(3 * i + 2))};
  }
  const int base = 3 * g.num_poses();
  for (int s = 0; s < g.num_landmarks(); ++s) {
    e.landmarks[g.landmark_ids()[s]] = x.segment<2>(base + 2 * s);
  }
  return e;
}

}  // namespace

void FactorGraph::add_landmark(int id) {
  if (id < 0) throw std::invalid_argument("FactorGraph: negative landmark id");
  if (has_landmark(id)) return;
  landmark_slot_[id] = static_cast<int>(landmark_ids_.size());
  landmark_ids_.push_back(id);
}

void FactorGraph::add_prior(const PriorFactor& f) {
  if (f.pose < 0 || f.pose >= num_poses_) {
    throw std::invalid_argument("FactorGraph: prior on unknown pose");
  }
  if ((f.sigmas.array() <= 0.0).any()) {
    throw std::invalid_argument("FactorGraph: prior sigmas must be positive");
  }
  priors_.push_back(f);
}

void FactorGraph::add_odometry(const OdometryFactor& f) {
  if (f.from_pose < 0 || f.to_pose < 0 || f.from_pose >= num_poses_ ||
      f.to_pose >= num_poses_) {
    throw std::invalid_argument("FactorGraph: odometry on unknown pose");
  }
  if (!(f.translation_sigma > 0.0) || !(f.rotation_sigma > 0.0)) {
    throw std::invalid_argument("FactorGraph: odometry sigmas must be positive");
  }
  odometry_.push_back(f);
}

void FactorGraph::add_measurement(const MeasurementFactor& f) {
  if (f.pose < 0 || f.pose >= num_poses_) {
    throw std::invalid_argument("FactorGraph: measurement on unknown pose");
  }
  if (!has_landmark(f.landmark_id)) {
    throw std::invalid_argument("FactorGraph: measurement on unknown landmark");
  }
  if (!(f.range_sigma > 0.0) || !(f.bearing_sigma > 0.0)) {
    throw std::invalid_argument("FactorGraph: measurement sigmas must be positive");
  }
  measurements_.push_back(f);
}

void FactorGraph::dump(std::ostream& os) const {
  os.precision(17);
  for (const auto& f : priors_) {
    os << "prior " << f.pose << ' ' << f.mean.x << ' ' << f.mean.y << ' '
       << f.mean.theta << ' ' << f.sigmas.x() << ' ' << f.sigmas.y() << ' '
       << f.sigmas.z() << '\n';
  }
  for (const auto& f : odometry_) {
    os << "odom " << f.from_pose << ' ' << f.to_pose << ' ' << f.rotation << ' '
       << f.translation << ' ' << f.translation_sigma << ' '
       << f.rotation_sigma << '\n';
  }
  for (const auto& f : measurements_) {
    os << "meas " << f.pose << ' ' << f.landmark_id << ' ' << f.range << ' '
       << f.bearing << ' ' << f.range_sigma << ' ' << f.bearing_sigma << '\n';
  }
}

Linearization linearize(const FactorGraph& g, const Estimate& e) {
  const int rows = 3 * static_cast<int>(g.priors().size()) +
                   3 * static_cast<int>(g.odometry().size()) +
                   2 * static_cast<int>(g.measurements().size());
  const int cols = variable_dim(g);
  const int lm_base = 3 * g.num_poses();

  Linearization lin;
  lin.residual.resize(rows);
  lin.landmark_offset_base = lm_base;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(rows) * 4);
  int row = 0;

  for (const auto& f : g.priors()) {
    const Pose2& p = e.poses[f.pose];
    const Eigen::Vector3d w = f.sigmas.cwiseInverse();
    lin.residual(row + 0) = w.x() * (p.x - f.mean.x);
    lin.residual(row + 1) = w.y() * (p.y - f.mean.y);
    lin.residual(row + 2) = w.z() * wrap_angle(p.theta - f.mean.theta);
    for (int k = 0; k < 3; ++k) trips.emplace_back(row + k, 3 * f.pose + k, w(k));
    row += 3;
  }

  for (const auto& f : g.odometry()) {
    const Pose2& a = e.poses[f.from_pose];
    const Pose2& b = e.poses[f.to_pose];
    const double th = wrap_angle(a.theta + f.rotation);
    const double ct = std::cos(th);
    const double st = std::sin(th);
    const double px = a.x + f.translation * ct;
    const double py = a.y + f.translation * st;
    const double wt = 1.0 / f.translation_sigma;
    const double wr = 1.0 / f.rotation_sigma;

    lin.residual(row + 0) = wt * (b.x - px);
    lin.residual(row + 1) = wt * (b.y - py);
    lin.residual(row + 2) = wr * wrap_angle(b.theta - th);

    const int ca = 3 * f.from_pose;
    const int cb = 3 * f.to_pose;
    // d residual / d from = -(d prediction / d from)
    trips.emplace_back(row + 0, ca + 0, -wt);
    trips.emplace_back(row + 0, ca + 2, wt * f.translation * st);
    trips.emplace_back(row + 1, ca + 1, -wt);
    trips.emplace_back(row + 1, ca + 2, -wt * f.translation * ct);
    trips.emplace_back(row + 2, ca + 2, -wr);
    trips.emplace_back(row + 0, cb + 0, wt);
    trips.emplace_back(row + 1, cb + 1, wt);
    trips.emplace_back(row + 2, cb + 2, wr);
    row += 3;
  }

  for (const auto& f : g.measurements()) {
    const Pose2& p = e.poses[f.pose];
    const Eigen::Vector2d l = e.landmarks.at(f.landmark_id);
    const double dx = l.x() - p.x;
    const double dy = l.y() - p.y;
    const double q = std::max(dx * dx + dy * dy, 1e-18);
    const double r = std::sqrt(q);
    const double wr = 1.0 / f.range_sigma;
    const double wb = 1.0 / f.bearing_sigma;

    lin.residual(row + 0) = wr * (f.range - r);
    lin.residual(row + 1) =
        wb * wrap_angle(f.bearing - wrap_angle(std::atan2(dy, dx) - p.theta));

    const int cp = 3 * f.pose;
    const int cl = lm_base + 2 * g.landmark_slot(f.landmark_id);
    // residual = z - h(x); d residual = -dh
    trips.emplace_back(row + 0, cp + 0, -wr * (-dx / r));
    trips.emplace_back(row + 0, cp + 1, -wr * (-dy / r));
    trips.emplace_back(row + 0, cl + 0, -wr * (dx / r));
    trips.emplace_back(row + 0, cl + 1, -wr * (dy / r));
    trips.emplace_back(row + 1, cp + 0, -wb * (dy / q));
    trips.emplace_back(row + 1, cp + 1, -wb * (-dx / q));
    trips.emplace_back(row + 1, cp + 2, -wb * (-1.0));
    trips.emplace_back(row + 1, cl + 0, -wb * (-dy / q));
    trips.emplace_back(row + 1, cl + 1, -wb * (dx / q));
    row += 2;
  }

  lin.jacobian.resize(rows, cols);
  lin.jacobian.setFromTriplets(trips.begin(), trips.end());
  lin.cost = lin.residual.squaredNorm();
  return lin;
}

double graph_cost(const FactorGraph& g, const Estimate& e) {
  // residual-only evaluation; mirrors linearize() without the Jacobian
  double cost = 0.0;
  auto sq = [](double v) { return v * v; };
  for (const auto& f : g.priors()) {
    const Pose2& p = e.poses[f.pose];
    cost += sq((p.x - f.mean.x) / f.sigmas.x());
    cost += sq((p.y - f.mean.y) / f.sigmas.y());
    cost += sq(wrap_angle(p.theta - f.mean.theta) / f.sigmas.z());
  }
  for (const auto& f : g.odometry()) {
    const Pose2& a = e.poses[f.from_pose];
    const Pose2& b = e.poses[f.to_pose];
    const Pose2 pred = apply_motion(a, f.rotation, f.translation);
    cost += sq((b.x - pred.x) / f.translation_sigma);
    cost += sq((b.y - pred.y) / f.translation_sigma);
    cost += sq(wrap_angle(b.theta - pred.theta) / f.rotation_sigma);
  }
  for (const auto& f : g.measurements()) {
    const Pose2& p = e.poses[f.pose];
    const Eigen::Vector2d l = e.landmarks.at(f.landmark_id);
    const double dx = l.x() - p.x;
    const double dy = l.y() - p.y;
    const double r = std::sqrt(std::max(dx * dx + dy * dy, 1e-18));
    cost += sq((f.range - r) / f.range_sigma);
    cost += sq(wrap_angle(f.bearing - wrap_angle(std::atan2(dy, dx) - p.theta)) /
               f.bearing_sigma);
  }
  return cost;
}

namespace {

// Solve (H + lambda diag(H)) dx = -g. Returns false when the factorization
// fails or produces non-finite values.
bool solve_damped(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g,
                  double lambda, bool dense, Eigen::VectorXd& dx) {
  const int n = static_cast<int>(H.rows());
  Eigen::VectorXd diag = H.diagonal();
  for (int i = 0; i < n; ++i) {
    diag(i) = std::max(diag(i), 1e-12);
  }
  if (dense) {
    Eigen::MatrixXd Hd = Eigen::MatrixXd(H);
    Hd.diagonal() += lambda * diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
    if (ldlt.info() != Eigen::Success) return false;
    dx = ldlt.solve(-g);
  } else {
    Eigen::SparseMatrix<double> Hd = H;
    for (int i = 0; i < n; ++i) Hd.coeffRef(i, i) += lambda * diag(i);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(Hd);
    if (ldlt.info() != Eigen::Success) return false;
    dx = ldlt.solve(-g);
  }
  return dx.allFinite();
}

}  // namespace

Estimate optimize(const FactorGraph& graph, const Estimate& init,
                  const OptimizeOptions& opts) {
  if (graph.num_poses() == 0) throw std::invalid_argument("optimize: empty graph");
  if (static_cast<int>(init.poses.size()) != graph.num_poses()) {
    throw std::invalid_argument("optimize: init pose count mismatch");
  }

  Estimate est = init;
  est.cost_history.clear();
  const bool dense = graph.num_poses() + graph.num_landmarks() <
                     opts.dense_variable_threshold;

  Linearization lin = linearize(graph, est);
  double cost = lin.cost;
  est.cost_history.push_back(cost);
  double lambda = opts.initial_lambda;
  bool failed = false;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::SparseMatrix<double> H =
        Eigen::SparseMatrix<double>(lin.jacobian.transpose()) * lin.jacobian;
    const Eigen::VectorXd g = lin.jacobian.transpose() * lin.residual;

    Eigen::VectorXd dx;
    if (!solve_damped(H, g, lambda, dense, dx)) {
      lambda *= 10.0;
      if (lambda > opts.max_lambda) {
        failed = true;
        break;
      }
      continue;
    }

    const Eigen::VectorXd x_new = flatten(graph, est) + dx;
    const Estimate cand = unflatten(graph, x_new, est);
    const double cand_cost = graph_cost(graph, cand);

    if (std::isfinite(cand_cost) && cand_cost <= cost) {
      const double decrease = cost - cand_cost;
      est = cand;
      est.cost_history.push_back(cand_cost);
      lambda = std::max(lambda * 0.1, 1e-12);
      const bool tol_met =
          decrease < opts.relative_decrease_tol * std::max(cost, 1e-300);
      cost = cand_cost;
      if (tol_met) break;
      lin = linearize(graph, est);
    } else {
      lambda *= 10.0;
      if (lambda > opts.max_lambda) {
        failed = true;
        break;
      }
    }
  }

  est.converged = !failed;  // iteration cap counts as normal termination
  est.final_residual_norm = std::sqrt(cost);
  return est;
}

struct Marginals::Impl {
  bool dense = false;
  Eigen::MatrixXd dense_cov;  // full inverse when dense
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  const FactorGraph* graph = nullptr;
  int dim = 0;
};

Marginals::Marginals(const FactorGraph& graph, const Estimate& estimate,
                     const OptimizeOptions& opts)
    : impl_(std::make_unique<Impl>()) {
  impl_->graph = &graph;
  const Linearization lin = linearize(graph, estimate);
  const Eigen::SparseMatrix<double> H =
      Eigen::SparseMatrix<double>(lin.jacobian.transpose()) * lin.jacobian;
  impl_->dim = static_cast<int>(H.rows());
  impl_->dense =
      graph.num_poses() + graph.num_landmarks() < opts.dense_variable_threshold;
  if (impl_->dense) {
    Eigen::MatrixXd Hd(H);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("Marginals: information matrix not factorizable");
    }
    impl_->dense_cov =
        ldlt.solve(Eigen::MatrixXd::Identity(impl_->dim, impl_->dim));
  } else {
    impl_->ldlt.compute(H);
    if (impl_->ldlt.info() != Eigen::Success) {
      throw std::runtime_error("Marginals: information matrix not factorizable");
    }
  }
}

Marginals::~Marginals() = default;
Marginals::Marginals(Marginals&&) noexcept = default;
Marginals& Marginals::operator=(Marginals&&) noexcept = default;

Eigen::MatrixXd Marginals::block(const VariableKey& key) const {
  const FactorGraph& g = *impl_->graph;
  int offset = 0;
  int size = 0;
  if (key.kind == VariableKey::Kind::Pose) {
    if (key.index < 0 || key.index >= g.num_poses()) {
      throw std::out_of_range("Marginals: unknown pose");
    }
    offset = 3 * key.index;
    size = 3;
  } else {
    if (!g.has_landmark(key.index)) {
      throw std::out_of_range("Marginals: unknown landmark");
    }
    offset = 3 * g.num_poses() + 2 * g.landmark_slot(key.index);
    size = 2;
  }

  Eigen::MatrixXd block(size, size);
  if (impl_->dense) {
    block = impl_->dense_cov.block(offset, offset, size, size);
  } else {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(impl_->dim, size);
    for (int k = 0; k < size; ++k) rhs(offset + k, k) = 1.0;
    const Eigen::MatrixXd cols = impl_->ldlt.solve(rhs);
    block = cols.block(offset, 0, size, size);
  }
  return 0.5 * (block + block.transpose());
}

void incorporate_step(FactorGraph& graph, Estimate& estimate,
                      const MotionCommand& odometry, const SensorScan& scan,
                      const WorldConfig& cfg) {
  if (graph.num_poses() == 0) {
    throw std::invalid_argument("incorporate_step: graph needs an anchored pose");
  }
  const int prev = graph.num_poses() - 1;
  const int next = graph.add_pose();
  graph.add_odometry({prev, next, odometry.rotation, odometry.translation,
                      cfg.translation_noise_sd > 0.0 ? cfg.translation_noise_sd : 1e-3,
                      cfg.rotation_noise_sd > 0.0 ? cfg.rotation_noise_sd : 1e-3});

  const Pose2 guess =
      apply_motion(estimate.poses[prev], odometry.rotation, odometry.translation);
  estimate.poses.push_back(guess);

  for (const auto& rb : scan) {
    if (rb.landmark_id < 0) {
      throw std::invalid_argument("incorporate_step: negative landmark id");
    }
    if (!graph.has_landmark(rb.landmark_id)) {
      graph.add_landmark(rb.landmark_id);
      const double a = guess.theta + rb.bearing;
      estimate.landmarks[rb.landmark_id] =
          guess.position() + rb.range * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    graph.add_measurement({next, rb.landmark_id, rb.range, rb.bearing,
                           cfg.range_noise_sd > 0.0 ? cfg.range_noise_sd : 1e-3,
                           cfg.bearing_noise_sd > 0.0 ? cfg.bearing_noise_sd : 1e-3});
  }
}

}  // namespace explore
