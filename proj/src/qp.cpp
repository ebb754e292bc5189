#include "ccdc/qp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace ccdc {

void QuadraticProgram::validate() const {
  const int n = nv();
  if (P.rows() != n || P.cols() != n)
    throw std::invalid_argument("QuadraticProgram: P must be nv x nv");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + P.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("QuadraticProgram: P must be symmetric");
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != n))
    throw std::invalid_argument("QuadraticProgram: equality block mismatch");
  if (Gineq.rows() != hineq.size() || (Gineq.rows() > 0 && Gineq.cols() != n))
    throw std::invalid_argument("QuadraticProgram: inequality block mismatch");
  if (!P.allFinite() || !q.allFinite() || !Aeq.allFinite() ||
      !beq.allFinite() || !Gineq.allFinite() || !hineq.allFinite())
    throw std::invalid_argument("QuadraticProgram: data must be finite");
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::unbounded: return "unbounded";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::numerical: return "numerical";
  }
  return "unknown";
}

// Reads the lower triangle only.
bool LdltQuasiDefinite::factorize(const MatrixXd& K) {
  n_ = static_cast<int>(K.rows());
  L_ = MatrixXd::Zero(n_, n_);
  D_.resize(n_);
  VectorXd scaled(n_);
  for (int j = 0; j < n_; ++j) {
    scaled.head(j) = L_.row(j).head(j).transpose().cwiseProduct(D_.head(j));
    const int rem = n_ - j;
    VectorXd col = K.col(j).tail(rem);
    if (j > 0) col.noalias() -= L_.bottomLeftCorner(rem, j) * scaled.head(j);
    const double d = col(0);
    if (!std::isfinite(d) || std::abs(d) < 1e-300) return false;
    D_(j) = d;
    L_(j, j) = 1.0;
    if (rem > 1) L_.col(j).tail(rem - 1) = col.tail(rem - 1) / d;
  }
  return true;
}

VectorXd LdltQuasiDefinite::solve(const VectorXd& rhs) const {
  VectorXd v = rhs;
  L_.triangularView<Eigen::UnitLower>().solveInPlace(v);
  v.array() /= D_.array();
  L_.triangularView<Eigen::UnitLower>().transpose().solveInPlace(v);
  return v;
}

namespace {

struct Direction {
  VectorXd dx, dy, dz, ds;
};

// Condensed KKT system
//   [ P + dI + G'WG   A' ] [dx]   [rhs_x]
//   [ A              -dI ] [dy] = [rhs_y],   W = z / s (elementwise),
// factored once per interior-point iteration.
struct KktSystem {
  const QuadraticProgram& qp;
  double delta = 0;
  LdltQuasiDefinite fact;

  explicit KktSystem(const QuadraticProgram& problem) : qp(problem) {}

  bool factorize(const VectorXd& w, double reg, int retries) {
    const int n = qp.nv();
    const int me = qp.num_eq();
    MatrixXd B(n + me, n + me);
    delta = reg;
    for (int attempt = 0; attempt <= retries; ++attempt) {
      B.setZero();
      B.topLeftCorner(n, n) = qp.P;
      if (qp.num_ineq() > 0) {
        const MatrixXd Gw = w.cwiseSqrt().asDiagonal() * qp.Gineq;
        B.topLeftCorner(n, n)
            .selfadjointView<Eigen::Lower>()
            .rankUpdate(Gw.transpose());
      }
      B.topLeftCorner(n, n).diagonal().array() += delta;
      if (me > 0) {
        B.bottomLeftCorner(me, n) = qp.Aeq;
        B.bottomRightCorner(me, me).diagonal().array() -= delta;
      }
      if (fact.factorize(B)) return true;
      delta *= 10.0;
    }
    return false;
  }

  // Newton direction for the given residuals, via elimination of (dz, ds).
  Direction solve_raw(const VectorXd& rd, const VectorXd& re,
                      const VectorXd& ri, const VectorXd& rc,
                      const VectorXd& s, const VectorXd& z) const {
    const int n = qp.nv();
    const int me = qp.num_eq();
    const int mi = qp.num_ineq();
    Direction d;
    VectorXd rhs(n + me);
    VectorXd coupling;
    if (mi > 0) {
      coupling = (z.cwiseProduct(ri) - rc).cwiseQuotient(s);
      rhs.head(n) = -rd - qp.Gineq.transpose() * coupling;
    } else {
      rhs.head(n) = -rd;
    }
    if (me > 0) rhs.tail(me) = -re;
    const VectorXd sol = fact.solve(rhs);
    d.dx = sol.head(n);
    d.dy = me > 0 ? VectorXd(sol.tail(me)) : VectorXd(0);
    if (mi > 0) {
      const VectorXd Gdx = qp.Gineq * d.dx;
      d.dz = z.cwiseQuotient(s).cwiseProduct(Gdx) + coupling;
      d.ds = -ri - Gdx;
    } else {
      d.dz.resize(0);
      d.ds.resize(0);
    }
    return d;
  }

  // One step of iterative refinement against the unreduced system.
  Direction solve(const VectorXd& rd, const VectorXd& re, const VectorXd& ri,
                  const VectorXd& rc, const VectorXd& s,
                  const VectorXd& z) const {
    Direction d = solve_raw(rd, re, ri, rc, s, z);
    const int me = qp.num_eq();
    const int mi = qp.num_ineq();
    VectorXd ed = rd + qp.P * d.dx;
    if (me > 0) ed.noalias() += qp.Aeq.transpose() * d.dy;
    if (mi > 0) ed.noalias() += qp.Gineq.transpose() * d.dz;
    VectorXd ee = me > 0 ? VectorXd(re + qp.Aeq * d.dx) : VectorXd(0);
    VectorXd ei(0), ec(0);
    if (mi > 0) {
      ei = ri + qp.Gineq * d.dx + d.ds;
      ec = rc + z.cwiseProduct(d.ds) + s.cwiseProduct(d.dz);
    }
    const Direction corr = solve_raw(ed, ee, ei, ec, s, z);
    d.dx += corr.dx;
    if (me > 0) d.dy += corr.dy;
    if (mi > 0) {
      d.dz += corr.dz;
      d.ds += corr.ds;
    }
    return d;
  }
};

double step_to_boundary(const VectorXd& v, const VectorXd& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < v.size(); ++i)
    if (dv(i) < 0) alpha = std::min(alpha, -v(i) / dv(i));
  return alpha;
}

struct ResidualScales {
  double dual;
  double primal;
};

ResidualScales data_scales(const QuadraticProgram& qp) {
  double dual = 1.0 + qp.q.cwiseAbs().maxCoeff();
  if (qp.P.size() > 0) dual = std::max(dual, 1.0 + qp.P.cwiseAbs().maxCoeff());
  double primal = 1.0;
  if (qp.num_eq() > 0) primal += qp.beq.cwiseAbs().maxCoeff();
  if (qp.num_ineq() > 0) primal += qp.hineq.cwiseAbs().maxCoeff();
  return {dual, primal};
}

// Farkas-type certificate on a normalized dual ray.
bool certifies_infeasible(const QuadraticProgram& qp, const VectorXd& y,
                          const VectorXd& z, double scale_dual) {
  const double norm = z.lpNorm<1>() + (y.size() > 0 ? y.lpNorm<1>() : 0.0);
  if (norm < 1e-12) return false;
  VectorXd ray = qp.Gineq.transpose() * (z / norm);
  if (qp.num_eq() > 0) ray.noalias() += qp.Aeq.transpose() * (y / norm);
  double value = qp.hineq.dot(z) / norm;
  if (qp.num_eq() > 0) value += qp.beq.dot(y) / norm;
  return ray.cwiseAbs().maxCoeff() <= 1e-7 * scale_dual && value < -1e-10;
}

// Primal ray with negative objective slope inside the recession cone.
bool certifies_unbounded(const QuadraticProgram& qp, const VectorXd& x,
                         double scale_dual) {
  const double norm = x.cwiseAbs().maxCoeff();
  if (norm < 1e-12) return false;
  const VectorXd ray = x / norm;
  if ((qp.P * ray).cwiseAbs().maxCoeff() > 1e-7 * scale_dual) return false;
  if (qp.num_eq() > 0 &&
      (qp.Aeq * ray).cwiseAbs().maxCoeff() > 1e-7 * scale_dual)
    return false;
  if (qp.num_ineq() > 0 && (qp.Gineq * ray).maxCoeff() > 1e-7 * scale_dual)
    return false;
  return qp.q.dot(ray) < -1e-10;
}

struct Metrics {
  double primal;
  double dual;
  double gap;
};

Metrics evaluate_metrics(const QuadraticProgram& qp, const VectorXd& x,
                         const VectorXd& y, const VectorXd& z) {
  Metrics m{0, 0, 0};
  VectorXd rd = qp.P * x + qp.q;
  if (qp.num_eq() > 0) {
    rd.noalias() += qp.Aeq.transpose() * y;
    m.primal = (qp.Aeq * x - qp.beq).cwiseAbs().maxCoeff();
  }
  if (qp.num_ineq() > 0) {
    rd.noalias() += qp.Gineq.transpose() * z;
    const VectorXd slack = qp.hineq - qp.Gineq * x;
    m.primal = std::max(m.primal, std::max(0.0, -slack.minCoeff()));
    m.gap = std::abs(slack.cwiseMax(0.0).dot(z)) / std::max(1, qp.num_ineq());
  }
  m.dual = rd.cwiseAbs().maxCoeff();
  return m;
}

// Equality-KKT resolve on a guessed active set; exact complementarity when
// the guess verifies.
bool try_polish(const QuadraticProgram& qp, const QpConfig& config,
                const std::vector<int>& active, QpSolution& sol,
                const ResidualScales& scales) {
  const int n = qp.nv();
  const int me = qp.num_eq();
  const int na = static_cast<int>(active.size());
  MatrixXd Gact(na, n);
  VectorXd hact(na);
  for (int r = 0; r < na; ++r) {
    Gact.row(r) = qp.Gineq.row(active[r]);
    hact(r) = qp.hineq(active[r]);
  }
  const int dim = n + me + na;
  MatrixXd K = MatrixXd::Zero(dim, dim);
  K.topLeftCorner(n, n) = qp.P;
  const double delta = 1e-11 * scales.dual;
  K.topLeftCorner(n, n).diagonal().array() += delta;
  if (me > 0) {
    K.block(0, n, n, me) = qp.Aeq.transpose();
    K.block(n, 0, me, n) = qp.Aeq;
    K.block(n, n, me, me).diagonal().array() -= delta;
  }
  if (na > 0) {
    K.block(0, n + me, n, na) = Gact.transpose();
    K.block(n + me, 0, na, n) = Gact;
    K.block(n + me, n + me, na, na).diagonal().array() -= delta;
  }
  VectorXd rhs(dim);
  rhs.head(n) = -qp.q;
  if (me > 0) rhs.segment(n, me) = qp.beq;
  if (na > 0) rhs.tail(na) = hact;
  LdltQuasiDefinite fact;
  if (!fact.factorize(K)) return false;
  VectorXd v = fact.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) v += fact.solve(rhs - K * v);

  VectorXd x = v.head(n);
  VectorXd y = me > 0 ? VectorXd(v.segment(n, me)) : VectorXd(0);
  VectorXd z = VectorXd::Zero(qp.num_ineq());
  for (int r = 0; r < na; ++r) z(active[r]) = v(n + me + r);
  if (z.size() > 0 && z.minCoeff() < -1e-6 * scales.dual) return false;
  z = z.cwiseMax(0.0);
  const Metrics m = evaluate_metrics(qp, x, y, z);
  if (m.primal > config.tol_feas * scales.primal ||
      m.dual > config.tol_feas * scales.dual || m.gap > config.tol_gap)
    return false;
  sol.x = std::move(x);
  sol.y_eq = std::move(y);
  sol.z_ineq = std::move(z);
  sol.primal_res = m.primal;
  sol.dual_res = m.dual;
  sol.gap = m.gap;
  sol.polished = true;
  return true;
}

QpSolution solve_equality_only(const QuadraticProgram& qp,
                               const QpConfig& config) {
  const int n = qp.nv();
  const int me = qp.num_eq();
  const ResidualScales scales = data_scales(qp);
  QpSolution sol;
  sol.z_ineq.resize(0);

  LdltQuasiDefinite fact;
  double delta = config.reg;
  bool factored = false;
  MatrixXd K;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    K = MatrixXd::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = qp.P;
    K.topLeftCorner(n, n).diagonal().array() += delta;
    if (me > 0) {
      K.block(0, n, n, me) = qp.Aeq.transpose();
      K.block(n, 0, me, n) = qp.Aeq;
      K.block(n, n, me, me).diagonal().array() -= delta;
    }
    if (fact.factorize(K)) {
      factored = true;
      break;
    }
    delta *= 10.0;
  }
  if (!factored) {
    sol.status = QpStatus::numerical;
    return sol;
  }
  VectorXd rhs(n + me);
  rhs.head(n) = -qp.q;
  if (me > 0) rhs.tail(me) = qp.beq;
  VectorXd v = fact.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) v += fact.solve(rhs - K * v);
  sol.x = v.head(n);
  sol.y_eq = me > 0 ? VectorXd(v.tail(me)) : VectorXd(0);
  const Metrics m = evaluate_metrics(qp, sol.x, sol.y_eq, sol.z_ineq);
  sol.primal_res = m.primal;
  sol.dual_res = m.dual;
  sol.gap = 0.0;
  sol.iters = 1;
  if (m.primal <= config.tol_feas * scales.primal &&
      m.dual <= config.tol_feas * scales.dual)
    sol.status = QpStatus::optimal;
  else if (certifies_unbounded(qp, sol.x, scales.dual))
    sol.status = QpStatus::unbounded;
  else
    sol.status = QpStatus::numerical;
  return sol;
}

}  // namespace

QpSolution qp_solve(const QuadraticProgram& qp, const QpConfig& config) {
  qp.validate();
  if (qp.num_ineq() == 0) return solve_equality_only(qp, config);

  const int n = qp.nv();
  const int me = qp.num_eq();
  const int mi = qp.num_ineq();
  const ResidualScales scales = data_scales(qp);

  QpSolution sol;
  KktSystem kkt(qp);

  // Cold start: one regularized KKT solve with unit scalings; a warm start
  // replaces the primal part.
  VectorXd x, y;
  {
    if (!kkt.factorize(VectorXd::Ones(mi), config.reg, config.retries)) {
      sol.status = QpStatus::numerical;
      return sol;
    }
    const Direction d0 = kkt.solve_raw(
        qp.q, me > 0 ? VectorXd(-qp.beq) : VectorXd(0), VectorXd(-qp.hineq),
        VectorXd::Zero(mi), VectorXd::Ones(mi), VectorXd::Ones(mi));
    x = d0.dx;
    y = me > 0 ? d0.dy : VectorXd(0);
  }
  if (config.warm_start) {
    if (config.warm_start->size() != n)
      throw std::invalid_argument("qp_solve: warm start has wrong dimension");
    x = *config.warm_start;
  }
  const VectorXd s_raw = qp.hineq - qp.Gineq * x;
  const double s_floor = 1e-2 * (1.0 + s_raw.cwiseAbs().maxCoeff());
  VectorXd s = s_raw.cwiseMax(s_floor);
  VectorXd z = VectorXd::Constant(mi, 1.0);

  const double mi_inv = 1.0 / mi;
  int stall_count = 0;
  bool converged = false;
  bool factor_failed = false;

  for (int iter = 0; iter < config.max_iter; ++iter) {
    VectorXd rd = qp.P * x + qp.q + qp.Gineq.transpose() * z;
    if (me > 0) rd.noalias() += qp.Aeq.transpose() * y;
    VectorXd re = me > 0 ? VectorXd(qp.Aeq * x - qp.beq) : VectorXd(0);
    VectorXd ri = qp.Gineq * x + s - qp.hineq;
    const double mu = s.dot(z) * mi_inv;

    const double merit = rd.norm() + (me > 0 ? re.norm() : 0.0) + ri.norm();
    assert(sol.merit_history.empty() ||
           merit <= sol.merit_history.back() * (1.0 + 1e-9) +
                        1e-12 * scales.dual);
    sol.merit_history.push_back(merit);

    const bool feas_ok =
        rd.cwiseAbs().maxCoeff() <= config.tol_feas * scales.dual &&
        (me == 0 ||
         re.cwiseAbs().maxCoeff() <= config.tol_feas * scales.primal) &&
        ri.cwiseAbs().maxCoeff() <= config.tol_feas * scales.primal;
    if (feas_ok && mu <= config.tol_gap) {
      converged = true;
      break;
    }

    // Divergence-triggered certificates.
    const double dual_mag = z.lpNorm<1>() + (me > 0 ? y.lpNorm<1>() : 0.0);
    if (dual_mag > 1e6 * scales.primal &&
        certifies_infeasible(qp, y, z, scales.dual)) {
      sol.x = x, sol.y_eq = y, sol.z_ineq = z;
      sol.iters = iter;
      sol.status = QpStatus::infeasible;
      return sol;
    }
    if (x.cwiseAbs().maxCoeff() > 1e6 * scales.primal &&
        certifies_unbounded(qp, x, scales.dual)) {
      sol.x = x, sol.y_eq = y, sol.z_ineq = z;
      sol.iters = iter;
      sol.status = QpStatus::unbounded;
      return sol;
    }

    if (!kkt.factorize(z.cwiseQuotient(s), config.reg, config.retries)) {
      factor_failed = true;
      break;
    }

    // Predictor.
    const VectorXd rc_aff = s.cwiseProduct(z);
    const Direction aff = kkt.solve(rd, re, ri, rc_aff, s, z);
    const double alpha_aff = std::min(
        {1.0, step_to_boundary(s, aff.ds), step_to_boundary(z, aff.dz)});
    const double mu_aff =
        (s + alpha_aff * aff.ds).dot(z + alpha_aff * aff.dz) * mi_inv;
    const double sigma =
        std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);

    // Corrector.
    const VectorXd rc = s.cwiseProduct(z) + aff.ds.cwiseProduct(aff.dz) -
                        VectorXd::Constant(mi, sigma * mu);
    const Direction dir = kkt.solve(rd, re, ri, rc, s, z);
    const double alpha =
        std::min(1.0, 0.99 * std::min(step_to_boundary(s, dir.ds),
                                      step_to_boundary(z, dir.dz)));

    x += alpha * dir.dx;
    if (me > 0) y += alpha * dir.dy;
    s += alpha * dir.ds;
    z += alpha * dir.dz;
    sol.iters = iter + 1;

    stall_count = alpha < 1e-9 ? stall_count + 1 : 0;
    if (stall_count >= 3) break;
  }

  sol.x = x;
  sol.y_eq = y;
  sol.z_ineq = z;
  const Metrics m = evaluate_metrics(qp, x, y, z);
  sol.primal_res = m.primal;
  sol.dual_res = m.dual;
  sol.gap = m.gap;

  if (converged) {
    sol.status = QpStatus::optimal;
  } else if (factor_failed) {
    sol.status = QpStatus::numerical;
  } else if (certifies_infeasible(qp, y, z, scales.dual)) {
    sol.status = QpStatus::infeasible;
    return sol;
  } else if (certifies_unbounded(qp, x, scales.dual)) {
    sol.status = QpStatus::unbounded;
    return sol;
  } else if (stall_count >= 3) {
    sol.status = QpStatus::numerical;
  } else {
    sol.status = QpStatus::max_iter;
  }

  if (config.polish) {
    std::vector<int> active;
    for (int i = 0; i < mi; ++i)
      if (z(i) > s(i)) active.push_back(i);
    bool done = try_polish(qp, config, active, sol, scales);
    if (!done) {
      std::vector<int> wide;
      const double zmax = std::max(1.0, z.maxCoeff());
      for (int i = 0; i < mi; ++i)
        if (z(i) > 1e-6 * zmax) wide.push_back(i);
      if (wide != active) done = try_polish(qp, config, wide, sol, scales);
    }
    if (done) sol.status = QpStatus::optimal;
  }

  if (sol.status != QpStatus::optimal &&
      sol.primal_res <= config.tol_feas * scales.primal &&
      sol.dual_res <= config.tol_feas * scales.dual &&
      sol.gap <= config.tol_gap)
    sol.status = QpStatus::optimal;
  return sol;
}

QpSolution lp_solve(const VectorXd& q, const MatrixXd& Aeq, const VectorXd& beq,
                    const MatrixXd& Gineq, const VectorXd& hineq,
                    const QpConfig& config) {
  QuadraticProgram qp;
  const int n = static_cast<int>(q.size());
  qp.P = MatrixXd::Zero(n, n);
  qp.q = q;
  qp.Aeq = Aeq;
  qp.beq = beq;
  qp.Gineq = Gineq;
  qp.hineq = hineq;
  return qp_solve(qp, config);
}

}  // namespace ccdc
