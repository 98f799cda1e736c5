#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snl/ambient.hpp"
#include "snl/error.hpp"
#include "snl/io.hpp"
#include "snl/landscape.hpp"

namespace snl {

enum class Schedule { constant, cosine };

std::string to_string(Schedule s);
Schedule parse_schedule(const std::string& name);

// lr for constant; lr (1 + cos(pi k / iters)) / 2 for cosine.
double scheduled_step(double lr, Schedule schedule, std::size_t k, std::size_t iters);

struct DescentConfig {
  double lr = 1e-3;
  std::size_t iters = 1000;
  Schedule schedule = Schedule::constant;
  bool escape_enabled = false;
  double escape_step = 0.0;
  std::uint64_t seed = 0;
  std::size_t record_every = 10;
  // Stop early once ||grad H||_F <= grad_tol (0 disables).
  double grad_tol = 0.0;
  // Thresholds for the region labels written to the trajectory.
  RegionParams regions;

  void validate() const;
};

struct TrajectoryRecord {
  std::size_t iter = 0;
  double loss = 0.0;       // ||Y Y^T - A||_F^2
  double grad_norm = 0.0;  // ||grad||_F (ambient: grad H; network: parameter gradient)
  double dist = 0.0;       // d([Y], [Y*])
  std::string labels;      // semicolon-joined region labels
  double step = 0.0;       // step size applied from this iterate
  bool escape_event = false;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;

  // Header: iter,loss,grad_norm,dist,labels,step,escape_event. When given, the
  // provenance comment line precedes the header.
  void write_csv(std::ostream& out, const io::Provenance* provenance = nullptr) const;
  static Trajectory read_csv(std::istream& in);
};

// Raised when the loss stops being finite; carries the last finite iterate.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, Matrix last_iterate)
      : NumericalError(what), last_iterate_(std::move(last_iterate)) {}
  const Matrix& last_iterate() const { return last_iterate_; }

 private:
  Matrix last_iterate_;
};

struct DescentResult {
  Factor y;
  Trajectory trajectory;
  std::size_t iterations = 0;  // gradient steps taken
  std::size_t escape_events = 0;
};

// Y_{k+1} = Y_k - eta_k grad H(Y_k) in the ambient space. Records every
// `record_every` iterations plus the first and last iterate.
DescentResult gradient_descent(const Factor& y0, const SymMatrix& a, const SpectralTarget& target,
                               const DescentConfig& cfg);

// As gradient_descent, but whenever the iterate lies in R2 and a direction of
// negative curvature exists, first steps along it by escape_step (sign picked
// by the lower loss, halved until the loss decreases).
DescentResult escape_enabled_descent(const Factor& y0, const SymMatrix& a,
                                     const SpectralTarget& target, const DescentConfig& cfg,
                                     const RegionParams& p);

struct PlateauReport {
  bool found = false;
  std::size_t start_iter = 0;
  std::size_t end_iter = 0;
  std::size_t length = 0;
  double grad_min = 0.0;
  double dist_at_end = 0.0;
  double dist_final = 0.0;
  // dist_at_end / dist_final
  double drop_ratio = 0.0;
};

// Finds the low-gradient stretch around the smallest gradient norm seen while
// the iterate is still far from [Y*] (dist >= half its initial value): the
// maximal run of records with grad_norm <= factor * min. `found` requires the
// run to span at least min_length iterations.
PlateauReport detect_plateau(const Trajectory& t, double factor = 10.0,
                             std::size_t min_length = 500);

}  // namespace snl
