#include "spod/lbfgs.hpp"

#include "spod/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

namespace spod {

void OptimizerOptions::validate() const {
  if (memory < 1) throw ConfigError("optimizer memory must be >= 1");
  if (!(grad_tol >= 0.0)) throw ConfigError("optimizer grad_tol must be nonnegative");
  if (max_iters < 0) throw ConfigError("optimizer max_iters must be nonnegative");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < curvature && curvature < 1.0)) {
    throw ConfigError("optimizer line-search constants need 0 < c1 < c2 < 1");
  }
  if (max_line_search < 1) throw ConfigError("optimizer max_line_search must be >= 1");
}

std::string_view to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::converged: return "converged";
    case OptimizerStatus::max_iterations: return "max-iterations";
    case OptimizerStatus::line_search_failed: return "line-search-failed";
    case OptimizerStatus::non_finite: return "non-finite";
  }
  return "unknown";
}

std::vector<double> OptimizerTrace::values() const {
  std::vector<double> v{initial_value};
  for (const auto& it : iterations) v.push_back(it.value);
  return v;
}

double OptimizerTrace::final_grad_norm() const {
  return iterations.empty() ? initial_grad_norm : iterations.back().grad_norm;
}

namespace {

struct Point {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

class NonFinite : public std::exception {};

/// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

class WolfeSearch {
 public:
  WolfeSearch(const ObjectiveFunction& fn, const OptimizerOptions& opt, const Point& start,
              const Eigen::VectorXd& dir, long& evals, std::vector<LineSearchTrial>& trials)
      : fn_(fn), opt_(opt), start_(start), dir_(dir), evals_(evals), trials_(trials) {}

  /// Returns the accepted point; `wolfe` tells whether the curvature
  /// condition holds as well. Returns false if no decrease was found.
  bool run(double initial_step, Point& accepted, bool& wolfe) {
    Point prev{0.0, start_.value, start_.slope, start_.x, start_.g};
    double step = initial_step;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      Point cur = evaluate(step, prev.step, std::numeric_limits<double>::infinity());
      if (!armijo(cur) || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur, accepted, wolfe);
      if (std::abs(cur.slope) <= -opt_.curvature * start_.slope) {
        accepted = std::move(cur);
        wolfe = true;
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, accepted, wolfe);
      prev = std::move(cur);
      step = 4.0 * step;
    }
    return fallback(prev, accepted, wolfe);
  }

 private:
  bool armijo(const Point& p) const {
    return p.value <= start_.value + opt_.sufficient_decrease * p.step * start_.slope;
  }

  Point evaluate(double step, double lower, double upper) {
    Point p;
    p.step = step;
    p.x = start_.x + step * dir_;
    p.g.resize(p.x.size());
    p.value = fn_(p.x, p.g);
    ++evals_;
    trials_.push_back({step, std::min(lower, upper), std::max(lower, upper), p.value});
    if (!std::isfinite(p.value) || !p.g.allFinite()) throw NonFinite{};
    p.slope = p.g.dot(dir_);
    return p;
  }

  bool zoom(Point lo, Point hi, Point& accepted, bool& wolfe) {
    const int budget = opt_.max_line_search - static_cast<int>(trials_.size());
    for (int i = 0; i < budget; ++i) {
      const double a = std::min(lo.step, hi.step), b = std::max(lo.step, hi.step);
      const double width = b - a;
      if (width <= 1e-16 * std::max(1.0, b)) break;
      double step = cubic_minimizer(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope);
      const double margin = 0.1 * width;
      if (!std::isfinite(step) || step < a + margin || step > b - margin) step = 0.5 * (a + b);
      Point cur = evaluate(step, a, b);
      if (!armijo(cur) || cur.value >= lo.value) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -opt_.curvature * start_.slope) {
        accepted = std::move(cur);
        wolfe = true;
        return true;
      }
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return fallback(lo, accepted, wolfe);
  }

  // The lower bracket end always satisfies sufficient decrease; accept it
  // if it moved at all.
  bool fallback(Point& lo, Point& accepted, bool& wolfe) {
    if (lo.step <= 0.0 || !(lo.value < start_.value)) return false;
    accepted = std::move(lo);
    wolfe = false;
    return true;
  }

  const ObjectiveFunction& fn_;
  const OptimizerOptions& opt_;
  const Point& start_;
  const Eigen::VectorXd& dir_;
  long& evals_;
  std::vector<LineSearchTrial>& trials_;
};

}  // namespace

OptimizerResult minimize(const ObjectiveFunction& fn, Eigen::VectorXd x0,
                         const OptimizerOptions& opt, const IterationObserver& observer) {
  opt.validate();
  OptimizerResult result;
  OptimizerTrace& trace = result.trace;

  Point cur;
  cur.x = std::move(x0);
  cur.g.resize(cur.x.size());
  cur.value = fn(cur.x, cur.g);
  trace.evaluations = 1;
  trace.initial_value = cur.value;
  auto finish = [&](OptimizerStatus status, std::string message) {
    trace.status = status;
    trace.message = std::move(message);
    result.x = std::move(cur.x);
    result.value = cur.value;
    result.gradient = std::move(cur.g);
    return std::move(result);
  };
  if (!std::isfinite(cur.value) || !cur.g.allFinite()) {
    return finish(OptimizerStatus::non_finite, "non-finite objective or gradient at the initial point");
  }
  const double g0 = cur.g.norm();
  trace.initial_grad_norm = g0;
  const double threshold = opt.relative_grad_tol ? opt.grad_tol * g0 : opt.grad_tol;
  if (g0 == 0.0 || g0 <= threshold) return finish(OptimizerStatus::converged, "initial point is stationary");

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y)
  std::vector<double> alpha;
  Eigen::VectorXd dir(cur.x.size());

  for (int it = 1; it <= opt.max_iters; ++it) {
    // Two-loop recursion for dir = -H g.
    dir = -cur.g;
    alpha.assign(history.size(), 0.0);
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto& [s, y] = history[i];
      alpha[i] = s.dot(dir) / y.dot(s);
      dir -= alpha[i] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      dir *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = y.dot(dir) / y.dot(s);
      dir += (alpha[i] - beta) * s;
    }
    cur.slope = cur.g.dot(dir);
    if (!(cur.slope < 0.0)) {
      history.clear();
      dir = -cur.g;
      cur.slope = -cur.g.squaredNorm();
    }
    const double initial_step = history.empty() ? 1.0 / cur.g.norm() : 1.0;

    IterationRecord rec;
    rec.iteration = it;
    rec.previous_value = cur.value;
    rec.slope = cur.slope;
    Point next;
    bool ok = false;
    try {
      WolfeSearch search(fn, opt, cur, dir, trace.evaluations, rec.trials);
      ok = search.run(initial_step, next, rec.wolfe);
    } catch (const NonFinite&) {
      trace.iterations.push_back(std::move(rec));
      return finish(OptimizerStatus::non_finite, "non-finite objective or gradient during line search");
    }
    if (!ok) {
      trace.iterations.push_back(std::move(rec));
      trace.iterations.back().value = cur.value;
      trace.iterations.back().grad_norm = cur.g.norm();
      return finish(OptimizerStatus::line_search_failed, "line search found no decrease");
    }

    Eigen::VectorXd s = next.x - cur.x;
    Eigen::VectorXd y = next.g - cur.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      history.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(history.size()) > opt.memory) history.pop_front();
    }
    rec.value = next.value;
    rec.step = next.step;
    rec.grad_norm = next.g.norm();
    cur = std::move(next);
    if (observer) observer(rec);
    const bool done = rec.grad_norm <= threshold;
    trace.iterations.push_back(std::move(rec));
    if (done) return finish(OptimizerStatus::converged, "gradient norm below tolerance");
  }
  return finish(OptimizerStatus::max_iterations, "iteration limit reached");
}

}  // namespace spod
