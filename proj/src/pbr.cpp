#include "bellkit/pbr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "bellkit/error.hpp"
#include "bellkit/rng.hpp"

namespace bellkit {

namespace {

void check_same_alphabet(const BehaviorDistribution& f, const BehaviorDistribution& p) {
  if (f.alphabet() != p.alphabet())
    throw Error(ErrorCode::invalid_input, "behaviors use different alphabets");
}

// Setting-weighted cell masses p_xy f(ab|xy) in cell order.
Eigen::VectorXd cell_weights(const BehaviorDistribution& f) {
  const int k2 = f.outcomes() * f.outcomes();
  Eigen::VectorXd w(4 * k2);
  for (int s = 0; s < 4; ++s)
    for (int j = 0; j < k2; ++j) w(s * k2 + j) = f.setting_weights()[s] * f.cells()[s * k2 + j];
  return w;
}

// Orthonormal basis of the directions that keep per-setting normalization and
// both sets of marginal equalities.
Eigen::MatrixXd no_signaling_directions(int k) {
  const int n = 4 * k * k;
  auto cell = [k](int a, int b, int x, int y) { return (setting_index(x, y) * k + a) * k + b; };
  std::vector<Eigen::VectorXd> rows;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) r(cell(a, b, x, y)) = 1.0;
      rows.push_back(r);
    }
  for (int o = 0; o < k; ++o) {
    for (int x = 0; x < 2; ++x) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      for (int b = 0; b < k; ++b) {
        r(cell(o, b, x, 0)) += 1.0;
        r(cell(o, b, x, 1)) -= 1.0;
      }
      rows.push_back(r);
    }
    for (int y = 0; y < 2; ++y) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < k; ++a) {
        r(cell(a, o, 0, y)) += 1.0;
        r(cell(a, o, 1, y)) -= 1.0;
      }
      rows.push_back(r);
    }
  }
  Eigen::MatrixXd c(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = rows[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const auto rank = svd.rank();
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace

double kl_divergence(const BehaviorDistribution& f, const BehaviorDistribution& p) {
  check_same_alphabet(f, p);
  const int k2 = f.outcomes() * f.outcomes();
  double d = 0.0;
  for (int s = 0; s < 4; ++s) {
    const double w = f.setting_weights()[s];
    if (w <= 0.0) continue;
    for (int j = 0; j < k2; ++j) {
      const double fc = f.cells()[s * k2 + j];
      if (fc <= 0.0) continue;
      const double pc = p.cells()[s * k2 + j];
      if (pc <= 0.0) return std::numeric_limits<double>::infinity();
      d += w * fc * std::log2(fc / pc);
    }
  }
  return std::max(d, 0.0);
}

NsProjection project_no_signaling(const BehaviorDistribution& f, const ProjectionOptions& options) {
  f.validate();
  NsProjection out{f, 0.0, 0.0, true};
  if (f.signaling_gap() <= 1e-12) return out;

  const int k = f.outcomes();
  const Eigen::MatrixXd g = no_signaling_directions(k);
  const Eigen::VectorXd w = cell_weights(f);
  const auto n = w.size();
  const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(n, 1.0 / (k * k));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(g.cols());

  auto objective = [&](const Eigen::VectorXd& p, double mu) {
    double v = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) v -= (w(c) + mu) * std::log(p(c));
    return v;
  };

  // Objective gap of the barrier minimizer is at most n * mu nats.
  const double mu_final = options.tolerance * std::log(2.0) / static_cast<double>(n);
  double mu = 1e-3;
  bool converged = true;
  for (;;) {
    bool level_converged = false;
    for (int it = 0; it < options.max_newton; ++it) {
      const Eigen::VectorXd p = p0 + g * theta;
      const Eigen::ArrayXd wt = w.array() + mu;
      const Eigen::VectorXd grad = -g.transpose() * (wt / p.array()).matrix();
      const Eigen::MatrixXd hess =
          g.transpose() * (wt / p.array().square()).matrix().asDiagonal() * g;
      const Eigen::VectorXd step = hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(step);
      if (decrement < 1e-20) {
        level_converged = true;
        break;
      }
      const Eigen::VectorXd dp = g * step;
      double t = 1.0;
      while ((p + t * dp).minCoeff() <= 0.0) t *= 0.5;
      const double f0 = objective(p, mu);
      while (t > 1e-20 && objective(p + t * dp, mu) > f0 - 0.25 * t * decrement) t *= 0.5;
      theta += t * step;
      if (decrement < 1e-18) {
        level_converged = true;
        break;
      }
    }
    converged = converged && level_converged;
    if (mu <= mu_final) break;
    mu = std::max(mu * 0.1, mu_final);
  }

  const Eigen::VectorXd p = p0 + g * theta;
  std::copy(p.data(), p.data() + n, out.behavior.cells().begin());
  out.kl = kl_divergence(f, out.behavior);
  out.gap = static_cast<double>(n) * mu / std::log(2.0);
  out.converged = converged;
  return out;
}

int lhv_vertex_count(Alphabet alphabet) {
  const int k = alphabet_size(alphabet);
  return k * k * k * k;
}

bool lhv_vertex_cell(Alphabet alphabet, int vertex, int a, int b, int x, int y) {
  const int k = alphabet_size(alphabet);
  const int b1 = vertex % k, b0 = (vertex / k) % k, a1 = (vertex / (k * k)) % k,
            a0 = vertex / (k * k * k);
  return a == (x == 0 ? a0 : a1) && b == (y == 0 ? b0 : b1);
}

BehaviorDistribution LhvModel::behavior(const std::array<double, 4>& setting_weights) const {
  BehaviorDistribution out(alphabet, setting_weights);
  const int k = alphabet_size(alphabet);
  for (int v = 0; v < static_cast<int>(weights.size()); ++v)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b)
            if (lhv_vertex_cell(alphabet, v, a, b, x, y)) out(a, b, x, y) += weights[v];
  return out;
}

namespace {

struct EmState {
  std::vector<double> weights;
  double kl = 0.0;
  double gap = 0.0;
  bool converged = false;
};

// hits[v] lists the four cells (one per setting) selected by strategy v.
std::vector<std::array<int, 4>> vertex_cells(Alphabet alphabet) {
  const int k = alphabet_size(alphabet);
  const int nv = lhv_vertex_count(alphabet);
  std::vector<std::array<int, 4>> hits(nv);
  for (int v = 0; v < nv; ++v) {
    const int b1 = v % k, b0 = (v / k) % k, a1 = (v / (k * k)) % k, a0 = v / (k * k * k);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const int a = x == 0 ? a0 : a1, b = y == 0 ? b0 : b1;
        hits[v][setting_index(x, y)] = (setting_index(x, y) * k + a) * k + b;
      }
  }
  return hits;
}

EmState run_em(const Eigen::VectorXd& w, const std::vector<std::array<int, 4>>& hits,
               std::vector<double> weights, const LhvOptions& options) {
  const auto nc = w.size();
  const auto nv = hits.size();
  std::vector<double> q(nc), g(nv);
  EmState st;
  auto evaluate = [&] {
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t v = 0; v < nv; ++v)
      for (int c : hits[v]) q[c] += weights[v];
    double gmax = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      double s = 0.0;
      for (int c : hits[v])
        if (w(c) > 0.0) s += w(c) / q[c];
      g[v] = s;
      gmax = std::max(gmax, s);
    }
    return gmax - 1.0;
  };
  for (int it = 0; it < options.max_iterations; ++it) {
    st.gap = evaluate();
    if (st.gap <= options.gap_tolerance) {
      st.converged = true;
      break;
    }
    double total = 0.0;
    for (std::size_t v = 0; v < nv; ++v) total += (weights[v] *= g[v]);
    for (auto& x : weights) x /= total;
  }
  if (!st.converged) st.gap = evaluate();
  // Off from D(p || p_LR) by a constant, which is all the restart comparison needs.
  double kl = 0.0;
  for (Eigen::Index c = 0; c < nc; ++c)
    if (w(c) > 0.0) kl += w(c) * std::log2(w(c) / q[c]);
  st.weights = std::move(weights);
  st.kl = kl;
  return st;
}

}  // namespace

LhvFit closest_lhv(const BehaviorDistribution& p, const LhvOptions& options) {
  p.validate();
  const Alphabet alphabet = p.alphabet();
  const auto hits = vertex_cells(alphabet);
  const auto nv = hits.size();
  const Eigen::VectorXd w = cell_weights(p);
  EmState best = run_em(w, hits, std::vector<double>(nv, 1.0 / nv), options);
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(substream_seed(options.seed, "em-restarts", static_cast<std::uint64_t>(r)));
    std::vector<double> init(nv);
    double total = 0.0;
    for (auto& x : init) total += (x = 0.05 + rng.uniform());
    for (auto& x : init) x /= total;
    EmState st = run_em(w, hits, std::move(init), options);
    if (st.kl < best.kl - 1e-9) best = std::move(st);
  }

  LhvFit out;
  out.model.alphabet = alphabet;
  out.model.weights = best.weights;
  out.behavior = out.model.behavior(p.setting_weights());
  out.kl = kl_divergence(p, out.behavior);
  out.gap = best.gap;
  out.converged = best.converged;
  return out;
}

double PbrResult::p_value() const { return std::min(std::pow(10.0, log10_p), 1.0); }

PbrResult pbr_p_value(std::span<const TrialRecord> log, const PbrOptions& options) {
  if (options.block < 1) throw Error(ErrorCode::invalid_input, "pbr: block must be >= 1");
  const Alphabet alphabet = options.alphabet;
  const int k = alphabet_size(alphabet);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& t = log[i];
    if (i > 0 && t.index <= log[i - 1].index) {
      std::ostringstream msg;
      msg << "pbr: trial " << t.index << " follows trial " << log[i - 1].index;
      throw Error(ErrorCode::out_of_order, msg.str());
    }
    if (t.x > 1 || t.y > 1 || t.a >= k || t.b >= k)
      throw Error(ErrorCode::invalid_input, "pbr: trial record outside the alphabet");
  }

  const auto hits = vertex_cells(alphabet);
  const int nc = 4 * k * k;
  std::vector<double> ratio(nc, 1.0);
  CountTable history(alphabet);
  PbrResult out;
  out.n_trials = log.size();

  auto fit = [&](NsProjection& ns, LhvFit& lhv) {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if (history.setting_total(x, y) == 0) return false;
    BehaviorDistribution f = behavior_from_counts(history, alphabet);
    f.set_setting_weights(options.setting_dist);
    ns = project_no_signaling(f);
    lhv = closest_lhv(ns.behavior, options.lhv);
    return true;
  };

  double total = 0.0;
  for (std::size_t start = 0; start < log.size(); start += options.block) {
    if (start > 0) {
      NsProjection ns;
      LhvFit lhv;
      if (fit(ns, lhv) && lhv.kl <= options.local_kl_tol) {
        std::fill(ratio.begin(), ratio.end(), 1.0);
        out.max_normalization = std::max(out.max_normalization, 1.0);
      } else if (lhv.kl > options.local_kl_tol) {
        for (int c = 0; c < nc; ++c) {
          const double pl = lhv.behavior.cells()[c];
          ratio[c] = pl > 0.0 ? ns.behavior.cells()[c] / pl : 0.0;
        }
        for (const auto& h : hits) {
          double s = 0.0;
          for (int xy = 0; xy < 4; ++xy) s += options.setting_dist[xy] * ratio[h[xy]];
          out.max_normalization = std::max(out.max_normalization, s);
          if (s > 1.0 + options.normalization_tol) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "pbr: ratio normalization " << s << " exceeds 1 before trial "
                << log[start].index << " (lhv gap " << lhv.gap << ")";
            throw Error(ErrorCode::normalization_violation, msg.str());
          }
        }
      }
    }
    const std::size_t end = std::min<std::size_t>(log.size(), start + options.block);
    double block_sum = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      const auto& t = log[i];
      block_sum += std::log10(ratio[(setting_index(t.x, t.y) * k + t.a) * k + t.b]);
      ++history.at(t.a, t.b, t.x, t.y);
    }
    out.block_log10_r.push_back(block_sum);
    total += block_sum;
    ++out.blocks;
  }
  out.log10_p = std::min(-total, 0.0);

  NsProjection ns;
  LhvFit lhv;
  if (fit(ns, lhv)) {
    out.final_kl_ns = ns.kl;
    out.final_kl_lhv = lhv.kl;
  }
  return out;
}

}  // namespace bellkit
