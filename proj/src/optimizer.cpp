#include "snl/optimizer.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "snl/error.hpp"

namespace snl {

std::string to_string(Schedule s) { return s == Schedule::cosine ? "cosine" : "constant"; }

Schedule parse_schedule(const std::string& name) {
  if (name == "constant") return Schedule::constant;
  if (name == "cosine") return Schedule::cosine;
  throw InputError("unknown schedule '" + name + "'");
}

double scheduled_step(double lr, Schedule schedule, std::size_t k, std::size_t iters) {
  if (schedule == Schedule::constant || iters == 0) return lr;
  const double phase = std::numbers::pi * static_cast<double>(k) / static_cast<double>(iters);
  return lr * 0.5 * (1.0 + std::cos(phase));
}

void DescentConfig::validate() const {
  if (!(lr > 0.0)) throw InputError("descent: lr must be positive");
  if (iters < 1) throw InputError("descent: iters must be at least 1");
  if (!(escape_step >= 0.0)) throw InputError("descent: escape_step must be nonnegative");
  if (record_every < 1) throw InputError("descent: record_every must be at least 1");
  regions.validate();
}

void Trajectory::write_csv(std::ostream& out, const io::Provenance* provenance) const {
  if (provenance != nullptr) out << provenance->csv_comment() << '\n';
  out << "iter,loss,grad_norm,dist,labels,step,escape_event\n";
  for (const auto& r : records) {
    out << r.iter << ',' << io::format_double(r.loss) << ',' << io::format_double(r.grad_norm)
        << ',' << io::format_double(r.dist) << ',' << r.labels << ','
        << io::format_double(r.step) << ',' << (r.escape_event ? 1 : 0) << '\n';
  }
}

Trajectory Trajectory::read_csv(std::istream& in) {
  Trajectory t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "iter,loss,grad_norm,dist,labels,step,escape_event")
        throw InputError("trajectory csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 7) throw InputError("trajectory csv: expected 7 fields");
    TrajectoryRecord r;
    try {
      r.iter = std::stoull(fields[0]);
      r.loss = std::stod(fields[1]);
      r.grad_norm = std::stod(fields[2]);
      r.dist = std::stod(fields[3]);
      r.labels = fields[4];
      r.step = std::stod(fields[5]);
      r.escape_event = fields[6] == "1";
    } catch (const std::exception&) {
      throw InputError("trajectory csv: malformed row '" + line + "'");
    }
    t.records.push_back(std::move(r));
  }
  if (!header_seen) throw InputError("trajectory csv: missing header");
  return t;
}

namespace {

void check_rank(const Factor& y, const char* where) {
  if (!is_full_rank(y.mat()))
    throw NumericalError(std::string(where) + ": rank collapse (sigma_r <= 1e-12 sigma_1)");
}

TrajectoryRecord make_record(std::size_t k, const Factor& y, const SymMatrix& a,
                             const SpectralTarget& target, const RegionParams& p, double loss,
                             double grad_norm) {
  check_rank(y, "descent");
  const Classification c = classify(y, a, target, p);
  TrajectoryRecord r;
  r.iter = k;
  r.loss = loss;
  r.grad_norm = grad_norm;
  r.dist = c.distance;
  r.labels = c.labels.joined();
  return r;
}

// Backtracking along +-direction; returns the accepted step or 0.
double escape_step_along(Factor& y, const SymMatrix& a, const Matrix& direction, double step,
                         double current_loss) {
  auto trial = [&](double s) {
    Factor t(y.mat() + direction * s);
    return std::make_pair(loss(t, a), std::move(t));
  };
  // Sign: the Hessian form is even, so compare both sides at the nominal step.
  const double sign = trial(-step).first < trial(step).first ? -1.0 : 1.0;
  double s = step;
  for (int halvings = 0; halvings <= 40; ++halvings) {
    auto [l, t] = trial(sign * s);
    if (std::isfinite(l) && l < current_loss) {
      y = std::move(t);
      return sign * s;
    }
    s *= 0.5;
  }
  return 0.0;
}

DescentResult run_descent(const Factor& y0, const SymMatrix& a, const SpectralTarget& target,
                          const DescentConfig& cfg, const RegionParams* escape_params) {
  cfg.validate();
  if (y0.n() != a.dim()) throw InputError("descent: factor and operator disagree in size");
  check_rank(y0, "descent");

  DescentResult out;
  Factor y = y0;
  Matrix last_finite = y.mat();
  const bool escapes = escape_params != nullptr && cfg.escape_step > 0.0;
  double escape_grad_threshold = 0.0;
  if (escapes) {
    const double sr = target.sigma_r_star();
    escape_grad_threshold =
        escape_params->alpha * escape_params->mu * sr * sr * sr / (4.0 * target.kappa_star);
  }

  for (std::size_t k = 0;; ++k) {
    LossAndGrad lg = evaluate(y, a);
    if (!std::isfinite(lg.loss) || !all_finite(lg.grad)) {
      throw DivergenceError("descent: loss diverged at iteration " + std::to_string(k), last_finite);
    }
    last_finite = y.mat();
    double gnorm = frobenius_norm(lg.grad);

    bool escaped = false;
    TrajectoryRecord pre_escape;
    if (escapes && k < cfg.iters && gnorm <= escape_grad_threshold) {
      const Classification c = classify(y, a, target, *escape_params);
      if (c.labels.contains(RegionLabel::R2)) {
        const EscapeReport rep = escape_direction(y, a, target, *escape_params);
        if (rep.status == EscapeStatus::escape) {
          pre_escape = make_record(k, y, a, target, cfg.regions, lg.loss, gnorm);
          const double taken = escape_step_along(y, a, rep.direction.entries, cfg.escape_step, lg.loss);
          if (taken != 0.0) {
            escaped = true;
            ++out.escape_events;
            lg = evaluate(y, a);
            gnorm = frobenius_norm(lg.grad);
          }
        }
      }
    }

    const bool last = k == cfg.iters;
    const bool converged = cfg.grad_tol > 0.0 && gnorm <= cfg.grad_tol;
    const double eta = (last || converged) ? 0.0 : scheduled_step(cfg.lr, cfg.schedule, k, cfg.iters);
    if (escaped) {
      pre_escape.step = eta;
      pre_escape.escape_event = true;
      out.trajectory.records.push_back(std::move(pre_escape));
    } else if (k % cfg.record_every == 0 || last || converged) {
      TrajectoryRecord r = make_record(k, y, a, target, cfg.regions, lg.loss, gnorm);
      r.step = eta;
      out.trajectory.records.push_back(std::move(r));
    }
    if (last || converged) break;

    lg.grad *= -eta;
    y.mat() += lg.grad;
    ++out.iterations;
  }
  out.y = std::move(y);
  return out;
}

}  // namespace

DescentResult gradient_descent(const Factor& y0, const SymMatrix& a, const SpectralTarget& target,
                               const DescentConfig& cfg) {
  return run_descent(y0, a, target, cfg, nullptr);
}

DescentResult escape_enabled_descent(const Factor& y0, const SymMatrix& a,
                                     const SpectralTarget& target, const DescentConfig& cfg,
                                     const RegionParams& p) {
  p.validate();
  return run_descent(y0, a, target, cfg, &p);
}

PlateauReport detect_plateau(const Trajectory& t, double factor, std::size_t min_length) {
  PlateauReport rep;
  const auto& rec = t.records;
  if (rec.size() < 2) return rep;
  const double far = 0.5 * rec.front().dist;
  std::size_t kmin = rec.size();
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec[i].dist < far) break;
    if (kmin == rec.size() || rec[i].grad_norm < rec[kmin].grad_norm) kmin = i;
  }
  if (kmin == rec.size()) return rep;
  const double bound = factor * rec[kmin].grad_norm;
  std::size_t lo = kmin;
  std::size_t hi = kmin;
  while (lo > 0 && rec[lo - 1].grad_norm <= bound) --lo;
  while (hi + 1 < rec.size() && rec[hi + 1].grad_norm <= bound) ++hi;
  rep.start_iter = rec[lo].iter;
  rep.end_iter = rec[hi].iter;
  rep.length = rep.end_iter - rep.start_iter;
  rep.grad_min = rec[kmin].grad_norm;
  rep.dist_at_end = rec[hi].dist;
  rep.dist_final = rec.back().dist;
  rep.drop_ratio = rep.dist_final > 0.0 ? rep.dist_at_end / rep.dist_final
                                        : std::numeric_limits<double>::infinity();
  rep.found = rep.length >= min_length && hi + 1 < rec.size();
  return rep;
}

}  // namespace snl
